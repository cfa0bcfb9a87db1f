//! Synthetic option chains driven by a Heston underlying.
//!
//! [`simulate_heston`] produces a daily `(S_t, v_t)` path with the
//! full-truncation Euler scheme; [`synthesize_chain`] quotes a rolling set
//! of contracts on that path with a [`QuotePricer`]; [`write_chain_csv`]
//! emits the chain in the ingestion schema.

use std::fs::File;
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::baselines::heston_price;
use crate::data::{write_chain, OptionRecord, OptionType};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};

/// Heston dynamics and the risk-free rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonParams {
    pub s0: f64,
    pub v0: f64,
    pub kappa: f64,
    pub theta: f64,
    pub xi: f64,
    pub rho: f64,
    pub r: f64,
}

impl Default for HestonParams {
    fn default() -> Self {
        Self { s0: 100.0, v0: 0.04, kappa: 2.0, theta: 0.04, xi: 0.3, rho: -0.7, r: 0.03 }
    }
}

impl HestonParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.s0 > 0.0
            && self.v0 >= 0.0
            && self.kappa >= 0.0
            && self.theta >= 0.0
            && self.xi >= 0.0
            && self.rho.abs() <= 1.0
            && [self.s0, self.v0, self.kappa, self.theta, self.xi, self.rho, self.r].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid Heston parameters {self:?}")))
        }
    }
}

/// Daily spot and variance, index 0 being the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct HestonPath {
    pub spot: Vec<f64>,
    pub variance: Vec<f64>,
}

impl HestonPath {
    pub fn len(&self) -> usize {
        self.spot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spot.is_empty()
    }
}

/// Simulate `n_days` daily states (`n_days − 1` steps of size `dt`) under the
/// rate `params.r`.
pub fn simulate_heston(params: &HestonParams, n_days: usize, dt: f64, seed: u64) -> Result<HestonPath> {
    simulate_heston_with_drift(params, params.r, n_days, dt, seed)
}

/// As [`simulate_heston`] but with an explicit drift for the spot, so the
/// path can be generated under a real-world measure while quotes are still
/// priced at `params.r`.
pub fn simulate_heston_with_drift(
    params: &HestonParams,
    drift: f64,
    n_days: usize,
    dt: f64,
    seed: u64,
) -> Result<HestonPath> {
    params.validate()?;
    if n_days == 0 || dt.is_nan() || dt <= 0.0 {
        return Err(Error::invalid("simulation needs n_days ≥ 1 and dt > 0"));
    }
    let mut rng = seeded(seed);
    let mut spot = Vec::with_capacity(n_days);
    let mut variance = Vec::with_capacity(n_days);
    let (mut s, mut v) = (params.s0, params.v0);
    let rho_perp = (1.0 - params.rho * params.rho).max(0.0).sqrt();
    spot.push(s);
    variance.push(v);
    for _ in 1..n_days {
        let z1: f64 = rng.sample(StandardNormal);
        let zp: f64 = rng.sample(StandardNormal);
        let z2 = params.rho * z1 + rho_perp * zp;
        let vp = v.max(0.0);
        let sd = (vp * dt).sqrt();
        s *= ((drift - 0.5 * vp) * dt + sd * z1).exp();
        v += params.kappa * (params.theta - vp) * dt + params.xi * sd * z2;
        spot.push(s);
        variance.push(v);
    }
    Ok(HestonPath { spot, variance })
}

/// Prices one quote from the current state of the underlying.
pub trait QuotePricer {
    fn price(&self, spot: f64, variance: f64, strike: f64, tau: f64, option_type: OptionType) -> Result<f64>;
}

/// Heston pricer with fixed dynamics, re-anchored on each day's `(S_t, v_t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonQuotePricer {
    pub params: HestonParams,
}

impl QuotePricer for HestonQuotePricer {
    fn price(&self, spot: f64, variance: f64, strike: f64, tau: f64, option_type: OptionType) -> Result<f64> {
        let p = HestonParams { s0: spot, v0: variance.max(0.0), ..self.params };
        heston_price(&p, strike, tau, option_type)
    }
}

/// Weekdays starting at `start` (moved forward to a weekday if needed).
pub fn trading_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

/// Rolling listing schedule of the synthetic chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLayout {
    /// Calendar days between consecutive expiries.
    pub expiry_spacing_days: u64,
    /// A contract is quoted while its time to maturity is at most this many
    /// calendar days (and at least one day).
    pub listing_days: i64,
    /// Strikes listed per expiry as multiples of the spot on the listing
    /// day, rounded to `strike_tick`.
    pub strike_multiples: Vec<f64>,
    pub strike_tick: f64,
    /// Probability that a quote shows zero traded volume.
    pub zero_volume_prob: f64,
    pub mean_volume: f64,
}

impl Default for ChainLayout {
    fn default() -> Self {
        Self {
            expiry_spacing_days: 182,
            listing_days: 365,
            strike_multiples: vec![0.7, 0.9, 1.1, 1.7],
            strike_tick: 0.5,
            zero_volume_prob: 0.03,
            mean_volume: 150.0,
        }
    }
}

/// Quote every listed contract on every day of the path.
///
/// Days are taken from `dates` (same length as `path`). Expiries fall every
/// `expiry_spacing_days` from the first date, the first one being the first
/// expiry more than a day after the start; strikes for an expiry are fixed
/// on the first day it is listed. Output is ordered by day, expiry, strike,
/// then call before put.
pub fn synthesize_chain(
    path: &HestonPath,
    dates: &[NaiveDate],
    layout: &ChainLayout,
    pricer: &dyn QuotePricer,
    seed: u64,
) -> Result<Vec<OptionRecord>> {
    if dates.len() != path.len() {
        return Err(Error::invalid("one date per path state is required"));
    }
    let (Some(&first), Some(&last)) = (dates.first(), dates.last()) else {
        return Ok(Vec::new());
    };
    let mut expiries = Vec::new();
    let mut e = first + Days::new(layout.expiry_spacing_days);
    let horizon = last + Days::new(layout.listing_days as u64);
    while e <= horizon {
        expiries.push(e);
        e = e + Days::new(layout.expiry_spacing_days);
    }
    // Strike set per expiry, fixed on its first listing day.
    let mut strikes: Vec<Option<Vec<f64>>> = vec![None; expiries.len()];
    let mut vol_rng = seeded(derive_seed(seed, "volume"));
    let mut out = Vec::new();
    for (t, &day) in dates.iter().enumerate() {
        let (s, v) = (path.spot[t], path.variance[t]);
        let iv = v.max(1e-8).sqrt();
        for (k, &expiry) in expiries.iter().enumerate() {
            let ttm = (expiry - day).num_days();
            if ttm < 1 || ttm > layout.listing_days {
                continue;
            }
            let grid = strikes[k].get_or_insert_with(|| {
                let mut g: Vec<f64> = layout
                    .strike_multiples
                    .iter()
                    .map(|m| ((s * m) / layout.strike_tick).round().max(1.0) * layout.strike_tick)
                    .collect();
                g.sort_by(f64::total_cmp);
                g.dedup();
                g
            });
            for &strike in grid.iter() {
                for ty in [OptionType::Call, OptionType::Put] {
                    let tau = ttm as f64 / 365.0;
                    let price = pricer
                        .price(s, v, strike, tau, ty)
                        .map_err(|e| Error::Pricing(format!("{day} K={strike} {ty} expiring {expiry}: {e}")))?;
                    let volume = if vol_rng.random::<f64>() < layout.zero_volume_prob {
                        0
                    } else {
                        let z: f64 = vol_rng.sample(StandardNormal);
                        (layout.mean_volume * (0.8 * z - 0.32).exp()).round().max(1.0) as u64
                    };
                    out.push(OptionRecord {
                        quote_date: day,
                        expiry_date: expiry,
                        strike,
                        option_type: ty,
                        underlying_price: s,
                        implied_vol: iv,
                        mid_price: price.max(0.0),
                        volume,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Write a chain in the ingestion CSV schema.
pub fn write_chain_csv(records: &[OptionRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_chain(records, file).map_err(|e| Error::io(path, e))
}

/// A full synthetic-market scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub heston: HestonParams,
    /// Real-world drift of the spot; `None` simulates at the risk-free rate.
    pub drift: Option<f64>,
    pub n_days: usize,
    pub dt: f64,
    pub start_date: NaiveDate,
    pub layout: ChainLayout,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            heston: HestonParams::default(),
            drift: None,
            n_days: 1200,
            dt: 1.0 / 252.0,
            start_date: NaiveDate::from_ymd_opt(2016, 1, 4).expect("valid date"),
            layout: ChainLayout::default(),
        }
    }
}

impl Scenario {
    /// Simulate the path and quote the chain.
    pub fn generate(&self, seed: u64) -> Result<Vec<OptionRecord>> {
        let drift = self.drift.unwrap_or(self.heston.r);
        let path = simulate_heston_with_drift(&self.heston, drift, self.n_days, self.dt, derive_seed(seed, "path"))?;
        let dates = trading_days(self.start_date, self.n_days);
        let pricer = HestonQuotePricer { params: self.heston };
        synthesize_chain(&path, &dates, &self.layout, &pricer, derive_seed(seed, "chain"))
    }
}

#[cfg(test)]
mod tests;
