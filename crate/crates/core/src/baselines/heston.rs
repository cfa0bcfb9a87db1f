//! Semi-closed-form Heston pricer.
//!
//! The call is `S·P₁ − K·e^{−rτ}·P₂` with
//! `P_j = ½ + (1/π) ∫₀^∞ Re[e^{−iφ ln K} f_j(φ) / (iφ)] dφ`, where `f_j` is
//! the characteristic function of `ln S_τ` under the stock (j = 1) or the
//! money-market (j = 2) measure. The characteristic function uses the
//! rotation-count-free form (`g = (b − ρξiφ − d)/(b − ρξiφ + d)` with
//! `e^{−dτ}`), which keeps the complex logarithm on its principal branch.
//! The integral runs over a truncated domain with fixed-node Gauss-Legendre
//! quadrature. Puts follow from put-call parity.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::OptionType;
use crate::error::{Error, Result};
use crate::market::HestonParams;

/// Below this vol-of-vol the deterministic-variance limit of the
/// characteristic function is used.
const XI_LIMIT: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub nodes: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { nodes: 128, lower: 1e-8, upper: 200.0 }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Recurrence for P_n(z) and its derivative.
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn default_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(Quadrature::default().nodes))
}

/// `ln f_j(φ)` including the `iφ ln S` term.
fn log_char_fn(p: &HestonParams, tau: f64, phi: f64, j: usize) -> Complex64 {
    let i = Complex64::i();
    let iphi = i * phi;
    let x = p.s0.ln();
    let u = if j == 1 { 0.5 } else { -0.5 };
    if p.xi < XI_LIMIT {
        // Deterministic variance: ln S_τ is Gaussian with integrated variance V.
        let var = if p.kappa > 0.0 {
            p.theta * tau + (p.v0 - p.theta) * (1.0 - (-p.kappa * tau).exp()) / p.kappa
        } else {
            p.v0 * tau
        };
        return iphi * (x + p.r * tau) + (u * iphi - 0.5 * phi * phi) * var;
    }
    let a = p.kappa * p.theta;
    let b = if j == 1 { p.kappa - p.rho * p.xi } else { p.kappa };
    let xi2 = p.xi * p.xi;
    let beta = b - p.rho * p.xi * iphi;
    let d = (beta * beta - xi2 * (2.0 * u * iphi - phi * phi)).sqrt();
    let g = (beta - d) / (beta + d);
    let edt = (-d * tau).exp();
    let c = p.r * iphi * tau + (a / xi2) * ((beta - d) * tau - 2.0 * ((1.0 - g * edt) / (1.0 - g)).ln());
    let dd = (beta - d) / xi2 * (1.0 - edt) / (1.0 - g * edt);
    c + dd * p.v0 + iphi * x
}

fn probability(p: &HestonParams, strike: f64, tau: f64, j: usize, q: &Quadrature) -> Result<f64> {
    let owned;
    let (nodes, weights) = if *q == Quadrature::default() {
        let r = default_rule();
        (&r.0, &r.1)
    } else {
        owned = gauss_legendre(q.nodes);
        (&owned.0, &owned.1)
    };
    let half = 0.5 * (q.upper - q.lower);
    let mid = 0.5 * (q.upper + q.lower);
    let lnk = strike.ln();
    let mut total = 0.0;
    for (z, w) in nodes.iter().zip(weights) {
        let phi = mid + half * z;
        let iphi = Complex64::new(0.0, phi);
        let value = ((log_char_fn(p, tau, phi, j) - iphi * lnk).exp() / iphi).re;
        if !value.is_finite() {
            return Err(Error::Pricing(format!("non-finite Heston integrand at φ={phi} (j={j}, K={strike}, τ={tau})")));
        }
        total += w * value;
    }
    Ok(0.5 + half * total / PI)
}

/// Heston price with the default quadrature.
pub fn heston_price(p: &HestonParams, strike: f64, tau: f64, option_type: OptionType) -> Result<f64> {
    heston_price_with(p, strike, tau, option_type, &Quadrature::default())
}

pub fn heston_price_with(
    p: &HestonParams,
    strike: f64,
    tau: f64,
    option_type: OptionType,
    q: &Quadrature,
) -> Result<f64> {
    p.validate()?;
    if !(tau > 0.0 && tau.is_finite()) || !(strike > 0.0 && strike.is_finite()) {
        return Err(Error::Pricing(format!("Heston pricer needs τ > 0 and K > 0, got τ={tau}, K={strike}")));
    }
    let p1 = probability(p, strike, tau, 1, q)?;
    let p2 = probability(p, strike, tau, 2, q)?;
    let df = (-p.r * tau).exp();
    let call = p.s0 * p1 - strike * df * p2;
    Ok(match option_type {
        OptionType::Call => call,
        OptionType::Put => call - p.s0 + strike * df,
    })
}
