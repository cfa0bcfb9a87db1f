use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::record::{ContractKey, OptionRecord};

/// Eligibility thresholds. Moneyness bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_ttm_days: i64,
    pub moneyness_lo: f64,
    pub moneyness_hi: f64,
    pub min_volume: u64,
    /// Quotes below this mid price are treated as untraded.
    pub min_mid_price: f64,
    /// Minimum surviving daily rows per contract (normally `T_x + T_y`).
    pub min_observations: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_ttm_days: 30,
            moneyness_lo: 0.6,
            moneyness_hi: 1.3,
            min_volume: 1,
            min_mid_price: 0.01,
            min_observations: 60,
        }
    }
}

/// Why a record was dropped. The first failing rule wins, in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    ShortMaturity,
    Moneyness,
    LowVolume,
    LowPrice,
    InsufficientHistory,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::ShortMaturity => "ttm_below_minimum",
            RejectReason::Moneyness => "moneyness_out_of_band",
            RejectReason::LowVolume => "low_volume",
            RejectReason::LowPrice => "price_below_minimum",
            RejectReason::InsufficientHistory => "insufficient_history",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<OptionRecord>,
    pub rejected: BTreeMap<RejectReason, usize>,
}

impl FilterOutcome {
    pub fn rejected_total(&self) -> usize {
        self.rejected.values().sum()
    }
}

impl FilterConfig {
    pub fn row_reason(&self, r: &OptionRecord) -> Option<RejectReason> {
        let m = r.moneyness();
        if r.ttm_days() < self.min_ttm_days {
            Some(RejectReason::ShortMaturity)
        } else if !(self.moneyness_lo..=self.moneyness_hi).contains(&m) {
            Some(RejectReason::Moneyness)
        } else if r.volume < self.min_volume {
            Some(RejectReason::LowVolume)
        } else if r.mid_price.is_nan() || r.mid_price < self.min_mid_price {
            Some(RejectReason::LowPrice)
        } else {
            None
        }
    }
}

/// Apply the row filters, then drop contracts left with fewer than
/// `min_observations` rows. Surviving records keep their input order.
pub fn filter_eligible(records: &[OptionRecord], cfg: &FilterConfig) -> FilterOutcome {
    let mut rejected: BTreeMap<RejectReason, usize> = BTreeMap::new();
    let mut survivors = Vec::with_capacity(records.len());
    for r in records {
        match cfg.row_reason(r) {
            Some(reason) => *rejected.entry(reason).or_default() += 1,
            None => survivors.push(r),
        }
    }
    let mut counts: BTreeMap<ContractKey, usize> = BTreeMap::new();
    for r in &survivors {
        *counts.entry(r.contract()).or_default() += 1;
    }
    let mut kept = Vec::with_capacity(survivors.len());
    for r in survivors {
        if counts[&r.contract()] >= cfg.min_observations {
            kept.push(r.clone());
        } else {
            *rejected.entry(RejectReason::InsufficientHistory).or_default() += 1;
        }
    }
    FilterOutcome { kept, rejected }
}

#[cfg(test)]
mod tests {
    use chrono::{Days, NaiveDate};

    use super::*;
    use crate::data::OptionType;

    fn rec(day: u64, ttm: u64, s: f64, k: f64, vol: u64) -> OptionRecord {
        let q = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + Days::new(day);
        OptionRecord {
            quote_date: q,
            expiry_date: q + Days::new(ttm),
            strike: k,
            option_type: OptionType::Call,
            underlying_price: s,
            implied_vol: 0.2,
            mid_price: 1.0,
            volume: vol,
        }
    }

    fn single_rows() -> FilterConfig {
        FilterConfig { min_observations: 1, ..FilterConfig::default() }
    }

    #[test]
    fn maturity_threshold() {
        let out = filter_eligible(&[rec(0, 29, 100.0, 100.0, 5), rec(0, 30, 100.0, 100.0, 5)], &single_rows());
        assert_eq!(out.kept.len(), 1);
        assert_eq!(out.kept[0].ttm_days(), 30);
        assert_eq!(out.rejected[&RejectReason::ShortMaturity], 1);
    }

    #[test]
    fn near_zero_quotes_rejected() {
        let mut cheap = rec(0, 90, 100.0, 100.0, 5);
        cheap.mid_price = 0.0;
        let out = filter_eligible(&[cheap, rec(0, 90, 100.0, 100.0, 5)], &single_rows());
        assert_eq!(out.kept.len(), 1);
        assert_eq!(out.rejected[&RejectReason::LowPrice], 1);
    }

    #[test]
    fn moneyness_bounds_inclusive() {
        let rows = [
            rec(0, 90, 59.0, 100.0, 5),
            rec(0, 90, 60.0, 100.0, 5),
            rec(0, 90, 130.0, 100.0, 5),
            rec(0, 90, 130.5, 100.0, 5),
        ];
        let out = filter_eligible(&rows, &single_rows());
        let kept: Vec<f64> = out.kept.iter().map(OptionRecord::moneyness).collect();
        assert_eq!(kept, vec![0.6, 1.3]);
        assert_eq!(out.rejected[&RejectReason::Moneyness], 2);
    }

    #[test]
    fn low_volume_dropped() {
        let out = filter_eligible(&[rec(0, 90, 100.0, 100.0, 0)], &single_rows());
        assert!(out.kept.is_empty());
        assert_eq!(out.rejected[&RejectReason::LowVolume], 1);
    }

    #[test]
    fn short_history_contract_dropped_whole() {
        // Same expiry date for every row: one contract observed on 59 days.
        let rows: Vec<_> = (0..59).map(|d| rec(d, 200 - d, 100.0, 100.0, 5)).collect();
        let out = filter_eligible(&rows, &FilterConfig::default());
        assert!(out.kept.is_empty());
        assert_eq!(out.rejected[&RejectReason::InsufficientHistory], 59);
        let rows: Vec<_> = (0..60).map(|d| rec(d, 200 - d, 100.0, 100.0, 5)).collect();
        assert_eq!(filter_eligible(&rows, &FilterConfig::default()).kept.len(), 60);
    }

    #[test]
    fn idempotent() {
        let mut rows: Vec<_> = (0..80).map(|d| rec(d, 100 - d, 100.0 + d as f64, 100.0, d % 3)).collect();
        rows.extend((0..70).map(|d| rec(d, 300 - d, 90.0, 100.0, 4)));
        let once = filter_eligible(&rows, &FilterConfig::default());
        let twice = filter_eligible(&once.kept, &FilterConfig::default());
        assert_eq!(once.kept, twice.kept);
        assert_eq!(twice.rejected_total(), 0);
        assert_eq!(once.kept.len() + once.rejected_total(), rows.len());
    }
}
