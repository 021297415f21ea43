//! Hand-labelled model replies and the decision a reader would take from
//! each.

use serde::Deserialize;
use waterbid_core::agents::{parse_decision, ParseFailure};

#[derive(Deserialize)]
struct Case {
    text: String,
    balance: u64,
    expect: Expect,
}

#[derive(Deserialize, Debug, PartialEq)]
#[serde(untagged)]
enum Expect {
    Bid { bid: u64 },
    Abstain { abstain: bool },
    Error { error: String },
}

fn observed(case: &Case) -> Expect {
    match parse_decision(&case.text, case.balance) {
        Ok(d) => match d.bid {
            Some(bid) => Expect::Bid { bid },
            None => Expect::Abstain { abstain: true },
        },
        Err(e) => Expect::Error {
            error: match e {
                ParseFailure::NoBid => "no_bid",
                ParseFailure::ExceedsBalance { .. } => "exceeds",
                ParseFailure::Empty => "empty",
            }
            .into(),
        },
    }
}

#[test]
fn corpus_labels_agree() {
    let cases: Vec<Case> = include_str!("fixtures/parser_corpus.jsonl")
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(cases.len(), 50);
    let wrong: Vec<String> = cases
        .iter()
        .filter_map(|c| {
            let got = observed(c);
            (got != c.expect).then(|| format!("{:?}: expected {:?}, got {got:?}", c.text, c.expect))
        })
        .collect();
    assert!(wrong.is_empty(), "{} mislabelled:\n{}", wrong.len(), wrong.join("\n"));
}
