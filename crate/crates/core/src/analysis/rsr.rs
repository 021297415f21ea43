use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::engine::PlayerSpec;

/// Resource Satisfaction Rate: expected daily supply over the total daily
/// requirement of the players still alive. Kept as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rsr {
    Ratio(Ratio<u64>),
    /// No survivors; the rate is undefined.
    AllEliminated,
}

pub fn compute_rsr<'a>(
    supply_low: u64,
    supply_high: u64,
    survivors: impl IntoIterator<Item = &'a PlayerSpec>,
) -> Rsr {
    let demand: u64 = survivors.into_iter().map(|p| p.requirement).sum();
    if demand == 0 {
        return Rsr::AllEliminated;
    }
    // E[U{low..high}] = (low + high) / 2
    Rsr::Ratio(Ratio::new(supply_low + supply_high, 2 * demand))
}

/// Rounds a non-negative ratio to `places` decimals, half away from zero.
pub fn round_ratio(r: Ratio<u64>, places: u32) -> String {
    let scale = 10u128.pow(places);
    let num = *r.numer() as u128 * scale;
    let den = *r.denom() as u128;
    let scaled = (2 * num + den) / (2 * den);
    if places == 0 {
        return scaled.to_string();
    }
    format!(
        "{}.{:0width$}",
        scaled / scale,
        scaled % scale,
        width = places as usize
    )
}

impl Rsr {
    pub fn ratio(&self) -> Option<Ratio<u64>> {
        match self {
            Rsr::Ratio(r) => Some(*r),
            Rsr::AllEliminated => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        self.ratio()
            .map(|r| *r.numer() as f64 / *r.denom() as f64)
    }
}

impl fmt::Display for Rsr {
    /// Two decimals, or `all-eliminated`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rsr::Ratio(r) => f.write_str(&round_ratio(*r, 2)),
            Rsr::AllEliminated => f.write_str("all-eliminated"),
        }
    }
}

impl Serialize for Rsr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.as_f64() {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_none(),
        }
    }
}

/// Exact mean of the defined rates; `None` if none are defined.
pub fn mean_rsr<'a>(values: impl IntoIterator<Item = &'a Rsr>) -> Option<Ratio<u64>> {
    let defined: Vec<Ratio<u64>> = values.into_iter().filter_map(Rsr::ratio).collect();
    if defined.is_empty() {
        return None;
    }
    let sum = defined
        .iter()
        .fold(Ratio::from_integer(0u64), |acc, r| acc + r);
    Some(sum / Ratio::from_integer(defined.len() as u64))
}
