//! Static-pricer forecasts.
//!
//! Spot and volatility are frozen at their last observed values and only
//! time to maturity decays over the horizon. The decay uses the calendar
//! distance to each target date, so a trading-day step ages the contract by
//! the days that actually elapse.

use serde::{Deserialize, Serialize};

use super::black_scholes::{bs_price, discounted_intrinsic, BsInputs};
use super::heston::heston_price;
use crate::data::{WindowSample, IMPLIED_VOL, TTM_YEARS, UNDERLYING};
use crate::error::Result;
use crate::market::HestonParams;

/// Heston dynamics used by [`heston_forecast`]; `theta = None` means
/// `θ = v0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonForecastParams {
    pub kappa: f64,
    pub theta: Option<f64>,
    pub xi: f64,
    pub rho: f64,
}

impl Default for HestonForecastParams {
    fn default() -> Self {
        Self { kappa: 2.0, theta: None, xi: 0.3, rho: -0.7 }
    }
}

/// Time to maturity in years at each target date.
pub fn remaining_tau(sample: &WindowSample) -> Vec<f64> {
    let tau0 = sample.last_features()[TTM_YEARS];
    let end = sample.end_date();
    sample.target_dates.iter().map(|d| tau0 - (*d - end).num_days() as f64 / 365.0).collect()
}

pub fn bs_forecast(sample: &WindowSample, rate: f64) -> Result<Vec<f64>> {
    let last = sample.last_features();
    remaining_tau(sample)
        .into_iter()
        .map(|tau| {
            if tau <= 0.0 {
                return Ok(discounted_intrinsic(last[UNDERLYING], sample.strike, rate, 0.0, sample.option_type));
            }
            bs_price(&BsInputs {
                spot: last[UNDERLYING],
                strike: sample.strike,
                rate,
                vol: last[IMPLIED_VOL],
                tau,
                option_type: sample.option_type,
            })
        })
        .collect()
}

pub fn heston_forecast(sample: &WindowSample, rate: f64, dynamics: &HestonForecastParams) -> Result<Vec<f64>> {
    let last = sample.last_features();
    let v0 = last[IMPLIED_VOL] * last[IMPLIED_VOL];
    let params = HestonParams {
        s0: last[UNDERLYING],
        v0,
        kappa: dynamics.kappa,
        theta: dynamics.theta.unwrap_or(v0),
        xi: dynamics.xi,
        rho: dynamics.rho,
        r: rate,
    };
    remaining_tau(sample)
        .into_iter()
        .map(|tau| {
            if tau <= 0.0 {
                Ok(discounted_intrinsic(params.s0, sample.strike, rate, 0.0, sample.option_type))
            } else {
                heston_price(&params, sample.strike, tau, sample.option_type)
            }
        })
        .collect()
}

/// The last observed price repeated over the horizon.
pub fn persistence_forecast(sample: &WindowSample) -> Vec<f64> {
    vec![sample.anchor_price; sample.horizon()]
}
