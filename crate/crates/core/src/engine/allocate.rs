use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use super::types::{Allocation, AllocationRule, Bid, PlayerId};
use super::EngineError;

/// Runs the sealed-bid first-price allocation for one day.
///
/// Offers are ranked by amount (high first), then requirement (low first),
/// then player id. The walk grants each bidder whose full requirement still
/// fits the remaining supply. Abstentions are ignored.
pub fn allocate(
    bids: &[Bid],
    requirements: &BTreeMap<PlayerId, u64>,
    supply: u64,
    rule: AllocationRule,
) -> Result<Vec<Allocation>, EngineError> {
    let mut seen = BTreeSet::new();
    let mut offers = Vec::with_capacity(bids.len());
    for bid in bids {
        if !seen.insert(&bid.player_id) {
            return Err(EngineError::DuplicateBid(bid.player_id.clone()));
        }
        let Some(amount) = bid.amount else { continue };
        if amount == 0 {
            return Err(EngineError::ZeroBid(bid.player_id.clone()));
        }
        let requirement = *requirements
            .get(&bid.player_id)
            .ok_or_else(|| EngineError::UnknownPlayer(bid.player_id.clone()))?;
        if requirement == 0 {
            return Err(EngineError::InvalidConfig(format!(
                "player `{}` has zero requirement",
                bid.player_id
            )));
        }
        offers.push((amount, requirement, &bid.player_id));
    }

    offers.sort_by_key(|&(amount, requirement, id)| (Reverse(amount), requirement, id));

    let mut remaining = supply;
    let mut winners = Vec::new();
    for (amount, requirement, id) in offers {
        if requirement <= remaining {
            remaining -= requirement;
            winners.push(Allocation {
                player_id: id.clone(),
                units: requirement,
                payment: amount,
            });
        } else if rule == AllocationRule::StopAtFirstMisfit {
            break;
        }
    }
    Ok(winners)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::types::standard_roster;

    fn reqs() -> BTreeMap<PlayerId, u64> {
        standard_roster()
            .into_iter()
            .map(|p| (p.id, p.requirement))
            .collect()
    }

    fn ids(w: &[Allocation]) -> Vec<&str> {
        w.iter().map(|a| a.player_id.as_str()).collect()
    }

    #[test]
    fn day_seven_scenario_eric_alone() {
        let bids = vec![
            Bid::offer("Alex", 150, ""),
            Bid::offer("Bob", 200, ""),
            Bid::offer("Cindy", 120, ""),
            Bid::offer("David", 180, ""),
            Bid::offer("Eric", 300, ""),
        ];
        let w = allocate(&bids, &reqs(), 19, AllocationRule::SkipAndContinue).unwrap();
        assert_eq!(ids(&w), ["Eric"]);
        assert_eq!(w[0].payment, 300);
        assert_eq!(w[0].units, 12);
    }

    #[test]
    fn ample_supply_everyone_wins() {
        let bids: Vec<_> = ["Alex", "Bob", "Cindy", "David", "Eric"]
            .iter()
            .enumerate()
            .map(|(i, n)| Bid::offer(*n, 10 + i as u64, ""))
            .collect();
        let w = allocate(&bids, &reqs(), 50, AllocationRule::SkipAndContinue).unwrap();
        assert_eq!(w.len(), 5);
    }

    #[test]
    fn tie_goes_to_lower_requirement() {
        let bids = vec![Bid::offer("Cindy", 100, ""), Bid::offer("Bob", 100, "")];
        let w = allocate(&bids, &reqs(), 9, AllocationRule::SkipAndContinue).unwrap();
        assert_eq!(ids(&w), ["Bob"]);
    }

    #[test]
    fn equal_amount_and_requirement_breaks_on_id() {
        let mut r = BTreeMap::new();
        r.insert(PlayerId::new("b"), 5);
        r.insert(PlayerId::new("a"), 5);
        let bids = vec![Bid::offer("b", 10, ""), Bid::offer("a", 10, "")];
        let w = allocate(&bids, &r, 5, AllocationRule::SkipAndContinue).unwrap();
        assert_eq!(ids(&w), ["a"]);
    }

    #[test]
    fn skip_continues_past_misfit_but_stop_rule_does_not() {
        // Eric (12) outbids Alex (8); supply 10 fits only Alex.
        let bids = vec![Bid::offer("Eric", 300, ""), Bid::offer("Alex", 50, "")];
        let skip = allocate(&bids, &reqs(), 10, AllocationRule::SkipAndContinue).unwrap();
        assert_eq!(ids(&skip), ["Alex"]);
        let stop = allocate(&bids, &reqs(), 10, AllocationRule::StopAtFirstMisfit).unwrap();
        assert!(stop.is_empty());
    }

    #[test]
    fn abstainers_are_excluded() {
        let bids = vec![Bid::abstain("Eric", "sit out"), Bid::offer("Alex", 1, "")];
        let w = allocate(&bids, &reqs(), 30, AllocationRule::SkipAndContinue).unwrap();
        assert_eq!(ids(&w), ["Alex"]);
    }

    #[test]
    fn duplicate_bidder_is_a_protocol_violation() {
        let bids = vec![Bid::offer("Alex", 1, ""), Bid::offer("Alex", 2, "")];
        let err = allocate(&bids, &reqs(), 30, AllocationRule::SkipAndContinue).unwrap_err();
        assert!(matches!(err, EngineError::DuplicateBid(id) if id.as_str() == "Alex"));
    }

    #[test]
    fn zero_and_unknown_bids_rejected() {
        let zero = vec![Bid::offer("Alex", 0, "")];
        assert!(matches!(
            allocate(&zero, &reqs(), 30, AllocationRule::SkipAndContinue),
            Err(EngineError::ZeroBid(_))
        ));
        let unknown = vec![Bid::offer("Zed", 5, "")];
        assert!(matches!(
            allocate(&unknown, &reqs(), 30, AllocationRule::SkipAndContinue),
            Err(EngineError::UnknownPlayer(_))
        ));
    }
}
