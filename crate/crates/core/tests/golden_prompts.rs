//! Rendered prompts compared byte for byte with hand-written fixtures.

use std::collections::BTreeMap;

use waterbid_core::agents::{render_bid_call, render_results_announcement, render_system_prompt};
use waterbid_core::engine::{allocate, Bid, GameConfig, PlayerId, PlayerState, RoundRecord};

fn cindy(cfg: &GameConfig) -> &waterbid_core::engine::PlayerSpec {
    cfg.player(&PlayerId::new("Cindy")).unwrap()
}

#[test]
fn system_prompt_matches_fixture() {
    let cfg = GameConfig::standard(10, 20, 0);
    let got = render_system_prompt(cindy(&cfg), &cfg, false).unwrap();
    assert_eq!(got, include_str!("golden/system_cindy_low.txt").trim_end_matches('\n'));
}

#[test]
fn bid_call_matches_fixture() {
    let cfg = GameConfig::standard(10, 20, 0);
    let state = PlayerState {
        hp: 8,
        balance: 100,
        no_water_days: 0,
        alive: true,
    };
    let got = render_bid_call(cindy(&cfg), 1, 17, &state, &cfg).unwrap();
    assert_eq!(got, include_str!("golden/bid_call_cindy_day1.txt").trim_end_matches('\n'));
}

#[test]
fn announcement_matches_fixture() {
    let cfg = GameConfig::standard(10, 20, 0);
    let bids: Vec<Bid> = [("Alex", 150), ("Bob", 200), ("Cindy", 120), ("David", 180), ("Eric", 300)]
        .iter()
        .map(|&(n, a)| Bid::offer(n, a, ""))
        .collect();
    let winners = allocate(&bids, &cfg.requirements(), 19, cfg.allocation_rule).unwrap();
    let round = RoundRecord {
        day: 7,
        supply: 19,
        bids,
        min_successful_bid: winners.iter().map(|w| w.payment).min(),
        winners,
        hp_after: BTreeMap::new(),
        nwd_after: BTreeMap::new(),
        balance_after: BTreeMap::new(),
        eliminated: vec![],
    };
    let got = render_results_announcement(&round, &cfg).unwrap();
    assert_eq!(got, include_str!("golden/announcement_day7.txt").trim_end_matches('\n'));
}

#[test]
fn persona_block_follows_rules() {
    let mut cfg = GameConfig::standard(10, 20, 0);
    waterbid_core::agents::attach_personas(&mut cfg.roster, &waterbid_core::agents::bundled_personas())
        .unwrap();
    let plain = include_str!("golden/system_cindy_low.txt").trim_end_matches('\n');
    let with = render_system_prompt(cindy(&cfg), &cfg, true).unwrap();
    let tail = with.strip_prefix(plain).expect("rules come first");
    assert!(tail.starts_with("\n\nYour persona:\nProfession: "), "{tail}");
    assert!(tail.contains("\nPersonality: ") && tail.contains("\nBackground: "));
}
