use serde::{Deserialize, Serialize};

use crate::data::OptionType;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsInputs {
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub vol: f64,
    pub tau: f64,
    pub option_type: OptionType,
}

/// Standard normal CDF via the complementary error function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Discounted intrinsic value `max(±(S − K·e^{−rτ}), 0)`.
pub fn discounted_intrinsic(spot: f64, strike: f64, rate: f64, tau: f64, option_type: OptionType) -> f64 {
    let fwd_strike = strike * (-rate * tau).exp();
    match option_type {
        OptionType::Call => (spot - fwd_strike).max(0.0),
        OptionType::Put => (fwd_strike - spot).max(0.0),
    }
}

/// Black-Scholes price of a European option. Zero maturity or zero
/// volatility returns the discounted intrinsic value.
pub fn bs_price(p: &BsInputs) -> Result<f64> {
    let finite = [p.spot, p.strike, p.rate, p.vol, p.tau].iter().all(|v| v.is_finite());
    if !finite || p.spot <= 0.0 || p.strike <= 0.0 || p.vol < 0.0 || p.tau < 0.0 {
        return Err(Error::Pricing(format!("invalid Black-Scholes inputs {p:?}")));
    }
    if p.tau == 0.0 || p.vol == 0.0 {
        return Ok(discounted_intrinsic(p.spot, p.strike, p.rate, p.tau, p.option_type));
    }
    let sd = p.vol * p.tau.sqrt();
    let d1 = ((p.spot / p.strike).ln() + (p.rate + 0.5 * p.vol * p.vol) * p.tau) / sd;
    let d2 = d1 - sd;
    let df = (-p.rate * p.tau).exp();
    Ok(match p.option_type {
        OptionType::Call => p.spot * norm_cdf(d1) - p.strike * df * norm_cdf(d2),
        OptionType::Put => p.strike * df * norm_cdf(-d2) - p.spot * norm_cdf(-d1),
    })
}
