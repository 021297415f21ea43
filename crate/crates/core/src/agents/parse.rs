//! Extracting a bid from free-form model output.
//!
//! Candidates are currency amounts (`$300`, `$1,200`) and numbers following
//! the word "bid" (`bid 300`, `my bid is 250`). Refusal phrases ("sit out",
//! "not participate") are candidates too. The candidate that occurs last in
//! the text decides; a reply usually weighs options before concluding.

use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use super::AgentDecision;

static DOLLAR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\$\s*(\d[\d,]*)(?:\.\d+)?").unwrap());

static BID_WORD: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\bbid(?:s|ding)?\b[^.!?\n$\d]{0,30}?(\d[\d,]*)(?:\.\d+)?").unwrap()
});

// A number followed by one of these is a quantity, not money.
static NOT_MONEY_SUFFIX: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(?:%|percent|units?|days?|hp\b|health|points?|rounds?|times)").unwrap()
});

static REFUSAL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)(?:\bsit(?:ting)?\s+(?:this\s+one\s+|today\s+|this\s+round\s+)?out|(?:\bnot|n't|\bnever)\s+(?:going\s+to\s+|to\s+)?(?:participate|bid|be\s+bidding|place\s+a\s+bid)|\babstain(?:ing)?|\bskip(?:ping)?\s+(?:today|this\s+round|the\s+auction|bidding)|\bpass\s+on\s+(?:today|this)|\bno\s+bid\b|\bdecline\s+to\s+(?:bid|participate)|\brefrain\s+from\s+bidding)",
    )
    .unwrap()
});

// Text right before a refusal phrase that negates it ("rather than sit out").
static NEGATED_REFUSAL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)(?:rather\s+than|instead\s+of|afford\s+to|can't|cannot|won't|will\s+not|don't|do\s+not|than)\s+(?:\w+\s+){0,2}$")
        .unwrap()
});

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseFailure {
    #[error("no bid amount or refusal found")]
    NoBid,
    #[error("the bid of ${amount} exceeds your balance of ${balance}")]
    ExceedsBalance { amount: u64, balance: u64 },
    #[error("the response is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Candidate {
    Amount(u64),
    Refusal,
}

fn parse_number(digits: &str) -> Option<u64> {
    digits.replace(',', "").parse().ok()
}

fn candidates(text: &str) -> Vec<(usize, Candidate)> {
    let mut found = Vec::new();
    for re in [&*DOLLAR, &*BID_WORD] {
        for caps in re.captures_iter(text) {
            let m = caps.get(1).expect("group 1 always participates");
            if NOT_MONEY_SUFFIX.is_match(&text[m.end()..]) {
                continue;
            }
            if let Some(v) = parse_number(m.as_str()) {
                found.push((m.start(), Candidate::Amount(v)));
            }
        }
    }
    for m in REFUSAL.find_iter(text) {
        let before = &text[text.floor_char_boundary(m.start().saturating_sub(40))..m.start()];
        if NEGATED_REFUSAL.is_match(before) {
            continue;
        }
        found.push((m.start(), Candidate::Refusal));
    }
    found.sort_by_key(|(pos, _)| *pos);
    found.dedup_by_key(|(pos, _)| *pos);
    found
}

/// Reads the decision in `raw`. A zero amount counts as abstaining.
pub fn parse_decision(raw: &str, balance: u64) -> Result<AgentDecision, ParseFailure> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(ParseFailure::Empty);
    }
    let decision = |bid| AgentDecision {
        bid,
        reason: trimmed.to_string(),
        raw_response: raw.to_string(),
    };
    match candidates(trimmed).last() {
        None => Err(ParseFailure::NoBid),
        Some((_, Candidate::Refusal)) | Some((_, Candidate::Amount(0))) => Ok(decision(None)),
        Some(&(_, Candidate::Amount(amount))) if amount > balance => {
            Err(ParseFailure::ExceedsBalance { amount, balance })
        }
        Some(&(_, Candidate::Amount(amount))) => Ok(decision(Some(amount))),
    }
}
