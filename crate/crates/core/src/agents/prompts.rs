//! Prompt rendering. The templates live in `templates/` as plain text with
//! `{placeholder}` slots and are compiled into the binary.

use std::collections::BTreeMap;

use super::AgentError;
use crate::engine::{GameConfig, PlayerId, PlayerSpec, PlayerState, RoundRecord};

pub const RULES_TEMPLATE: &str = include_str!("../../templates/rules.txt");
pub const ROSTER_LINE_TEMPLATE: &str = include_str!("../../templates/roster_line.txt");
pub const PERSONA_TEMPLATE: &str = include_str!("../../templates/persona.txt");
pub const BID_CALL_TEMPLATE: &str = include_str!("../../templates/bid_call.txt");
pub const STATUS_TEMPLATE: &str = include_str!("../../templates/status.txt");
pub const ANNOUNCEMENT_TEMPLATE: &str = include_str!("../../templates/announcement.txt");
pub const PARTICIPANTS_TEMPLATE: &str = include_str!("../../templates/participants.txt");
pub const RETRY_TEMPLATE: &str = include_str!("../../templates/retry.txt");

/// Substitutes `{name}` slots. Every slot in the template must be bound and
/// every binding must be used, so template edits fail loudly.
pub fn fill(template: &str, vars: &[(&str, String)]) -> Result<String, AgentError> {
    let template = template.strip_suffix('\n').unwrap_or(template);
    let lookup: BTreeMap<&str, &String> = vars.iter().map(|(k, v)| (*k, v)).collect();
    let mut used = vec![false; vars.len()];
    let mut out = String::with_capacity(template.len() + 64);
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        let end = after
            .find('}')
            .ok_or_else(|| AgentError::Template(format!("unclosed slot in {template:?}")))?;
        let key = &after[..end];
        let value = lookup
            .get(key)
            .ok_or_else(|| AgentError::Template(format!("unbound slot {{{key}}}")))?;
        if let Some(i) = vars.iter().position(|(k, _)| *k == key) {
            used[i] = true;
        }
        out.push_str(value);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(AgentError::Template(format!(
            "binding `{}` matches no slot",
            vars[i].0
        )));
    }
    Ok(out)
}

fn count_word(n: usize) -> String {
    const WORDS: [&str; 11] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    ];
    WORDS.get(n).map_or_else(|| n.to_string(), |w| w.to_string())
}

fn roster_block(config: &GameConfig) -> Result<String, AgentError> {
    let lines = config
        .roster
        .iter()
        .map(|p| {
            fill(
                ROSTER_LINE_TEMPLATE,
                &[
                    ("name", p.name.clone()),
                    ("requirement", p.requirement.to_string()),
                    ("salary", p.salary.to_string()),
                ],
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(lines.join("\n"))
}

/// The system message: game rules addressed to `player`, followed by the
/// player's persona when `persona_enabled`.
pub fn render_system_prompt(
    player: &PlayerSpec,
    config: &GameConfig,
    persona_enabled: bool,
) -> Result<String, AgentError> {
    let mut text = fill(
        RULES_TEMPLATE,
        &[
            ("player", player.name.clone()),
            ("days", config.days.to_string()),
            ("resident_count", count_word(config.roster.len())),
            ("hp_max", config.hp_max.to_string()),
            ("hp_start", config.hp_start.to_string()),
            ("water_gain", config.water_gain.to_string()),
            ("lower", config.supply_low.to_string()),
            ("upper", config.supply_high.to_string()),
            ("roster", roster_block(config)?),
        ],
    )?;
    if persona_enabled {
        let persona = player
            .persona
            .as_ref()
            .ok_or_else(|| AgentError::MissingPersona(player.id.clone()))?;
        text.push_str(&fill(
            PERSONA_TEMPLATE,
            &[
                ("profession", persona.profession.trim().to_string()),
                ("personality", persona.personality.trim().to_string()),
                ("background", persona.background.trim().to_string()),
            ],
        )?);
    }
    Ok(text)
}

pub fn render_status(state: &PlayerState, config: &GameConfig) -> Result<String, AgentError> {
    fill(
        STATUS_TEMPLATE,
        &[
            ("hp", state.hp.to_string()),
            ("hp_max", config.hp_max.to_string()),
            ("no_water_days", state.no_water_days.to_string()),
            ("balance", state.balance.to_string()),
        ],
    )
}

/// The daily call for bids, sent after salaries are credited.
pub fn render_bid_call(
    player: &PlayerSpec,
    day: u32,
    supply: u64,
    state: &PlayerState,
    config: &GameConfig,
) -> Result<String, AgentError> {
    fill(
        BID_CALL_TEMPLATE,
        &[
            ("player", player.name.clone()),
            ("round", day.to_string()),
            ("supply", supply.to_string()),
            ("status", render_status(state, config)?),
        ],
    )
}

fn display_name<'a>(config: &'a GameConfig, id: &'a PlayerId) -> &'a str {
    config.player(id).map_or(id.as_str(), |p| p.name.as_str())
}

fn join_names(names: &[&str]) -> String {
    match names {
        [] => "no one".to_string(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

/// Public results of a finished auction day: every offer, the supply and
/// who received water. Abstainers are listed as not participating.
pub fn render_results_announcement(
    round: &RoundRecord,
    config: &GameConfig,
) -> Result<String, AgentError> {
    let offers = if round.bids.is_empty() {
        "No resident submitted an offer.".to_string()
    } else {
        round
            .bids
            .iter()
            .map(|b| {
                let name = display_name(config, &b.player_id);
                match b.amount {
                    Some(amount) => {
                        let units = config.player(&b.player_id).map_or(0, |p| p.requirement);
                        format!("{name}: ${amount} for {units} units")
                    }
                    None => format!("{name}: did not participate"),
                }
            })
            .collect::<Vec<_>>()
            .join("\n\n")
    };
    let winners: Vec<&str> = round
        .winners
        .iter()
        .map(|w| display_name(config, &w.player_id))
        .collect();
    fill(
        ANNOUNCEMENT_TEMPLATE,
        &[
            ("round", round.day.to_string()),
            ("offers", offers),
            ("supply", round.supply.to_string()),
            ("allocation_result", join_names(&winners)),
        ],
    )
}

/// Broadcast status of every resident after a day: health, remaining
/// budget and consecutive No-Water Days.
pub fn render_participants_info(
    round: &RoundRecord,
    config: &GameConfig,
) -> Result<String, AgentError> {
    let rows = config
        .roster
        .iter()
        .map(|p| {
            let hp = round.hp_after.get(&p.id).copied().unwrap_or_default();
            if hp <= 0 {
                return format!("{}: eliminated", p.name);
            }
            format!(
                "{}: Health Points {}/{}, Balance ${}, No-Water Days {}",
                p.name,
                hp,
                config.hp_max,
                round.balance_after.get(&p.id).copied().unwrap_or_default(),
                round.nwd_after.get(&p.id).copied().unwrap_or_default(),
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    fill(
        PARTICIPANTS_TEMPLATE,
        &[("round", round.day.to_string()), ("rows", rows)],
    )
}

pub fn render_retry(problem: &str, balance: u64) -> Result<String, AgentError> {
    fill(
        RETRY_TEMPLATE,
        &[("problem", problem.to_string()), ("balance", balance.to_string())],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Allocation, Bid, PersonaText};

    fn low() -> GameConfig {
        GameConfig::standard(10, 20, 0)
    }

    #[test]
    fn rules_carry_roster_and_bounds() {
        let cfg = low();
        let text = render_system_prompt(&cfg.roster[0], &cfg, false).unwrap();
        assert!(text.starts_with("You are Alex and a resident living in W-Town."));
        assert!(text.contains("Alex: Water requirement - 8 units/day; Daily Salary - $70/day"));
        assert!(text.contains("Eric: Water requirement - 12 units/day; Daily Salary - $120/day"));
        assert!(text.contains("vary between 10 and 20 units"));
        assert!(text.contains("You are one of five residents"));
        assert!(!text.contains('{'));
    }

    #[test]
    fn persona_required_when_enabled() {
        let cfg = low();
        let err = render_system_prompt(&cfg.roster[1], &cfg, true).unwrap_err();
        assert!(matches!(err, AgentError::MissingPersona(id) if id.as_str() == "Bob"));
    }

    #[test]
    fn persona_appended_after_rules() {
        let cfg = low();
        let p = cfg.roster[0].clone().with_persona(PersonaText {
            profession: "Farmer".into(),
            personality: "Patient".into(),
            background: "Grew up by the river.".into(),
        });
        let text = render_system_prompt(&p, &cfg, true).unwrap();
        assert!(text.ends_with(
            "Good luck!\n\nYour persona:\nProfession: Farmer\nPersonality: Patient\nBackground: Grew up by the river."
        ));
    }

    #[test]
    fn bid_call_day_seven() {
        let cfg = low();
        let state = PlayerState {
            hp: 6,
            balance: 840,
            no_water_days: 1,
            alive: true,
        };
        let text = render_bid_call(&cfg.roster[4], 7, 19, &state, &cfg).unwrap();
        assert!(text.contains("Hello, Eric! Today is the Day 7"));
        assert!(text.contains("19 units"));
        assert!(text.contains("Balance: $840"));
    }

    #[test]
    fn announcement_names_winner_and_abstainer() {
        let cfg = low();
        let round = RoundRecord {
            day: 7,
            supply: 19,
            bids: vec![Bid::abstain("Alex", ""), Bid::offer("Eric", 300, "")],
            winners: vec![Allocation {
                player_id: "Eric".into(),
                units: 12,
                payment: 300,
            }],
            hp_after: Default::default(),
            nwd_after: Default::default(),
            balance_after: Default::default(),
            eliminated: vec![],
            min_successful_bid: Some(300),
        };
        let text = render_results_announcement(&round, &cfg).unwrap();
        assert!(text.contains("Alex: did not participate"));
        assert!(text.contains("Eric: $300 for 12 units"));
        assert!(text.ends_with("the water will be allocated to Eric."));
    }

    #[test]
    fn fill_rejects_unbound_and_unused() {
        assert!(fill("{a}", &[]).is_err());
        assert!(fill("x", &[("a", "1".into())]).is_err());
        assert_eq!(fill("${a}!", &[("a", "5".into())]).unwrap(), "$5!");
    }

    #[test]
    fn names_join_like_prose() {
        assert_eq!(join_names(&["A", "B", "C"]), "A, B and C");
        assert_eq!(join_names(&["A", "B"]), "A and B");
    }
}
