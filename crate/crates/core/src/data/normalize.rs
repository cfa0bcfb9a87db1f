use serde::{Deserialize, Serialize};

use super::window::WindowSample;
use super::{FeatureRow, FEATURE_NAMES, MID_PRICE, N_FEATURES};
use crate::error::{Error, Result};

/// Per-feature min-max statistics, in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub x_min: Vec<f64>,
    pub x_max: Vec<f64>,
}

impl NormalizationParams {
    fn span(&self, feature: usize) -> f64 {
        self.x_max[feature] - self.x_min[feature]
    }

    pub fn is_degenerate(&self, feature: usize) -> bool {
        self.span(feature) <= 0.0
    }

    /// `(x − min)/(max − min)`; degenerate features map to 0. Values outside
    /// the fitted range are not clamped.
    pub fn transform(&self, feature: usize, x: f64) -> f64 {
        if self.is_degenerate(feature) {
            0.0
        } else {
            (x - self.x_min[feature]) / self.span(feature)
        }
    }

    pub fn inverse_transform(&self, feature: usize, z: f64) -> f64 {
        if self.is_degenerate(feature) {
            self.x_min[feature]
        } else {
            self.x_min[feature] + z * self.span(feature)
        }
    }

    pub fn transform_row(&self, row: &FeatureRow) -> FeatureRow {
        std::array::from_fn(|f| self.transform(f, row[f]))
    }

    pub fn transform_target(&self, price: f64) -> f64 {
        self.transform(MID_PRICE, price)
    }

    pub fn inverse_target(&self, z: f64) -> f64 {
        self.inverse_transform(MID_PRICE, z)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_min.len() != N_FEATURES || self.x_max.len() != N_FEATURES {
            return Err(Error::invalid("normalizer must carry one range per feature"));
        }
        if self.x_min.iter().zip(&self.x_max).any(|(lo, hi)| lo.partial_cmp(hi).is_none_or(|o| o.is_gt())) {
            return Err(Error::invalid("normalizer has x_max < x_min"));
        }
        Ok(())
    }
}

/// Fit min-max statistics on training samples: every encoder row and every
/// target price of every sample contributes.
pub fn fit_normalizer(train: &[WindowSample]) -> Result<NormalizationParams> {
    if train.is_empty() {
        return Err(Error::invalid("cannot fit a normalizer on zero samples"));
    }
    let mut x_min = vec![f64::INFINITY; N_FEATURES];
    let mut x_max = vec![f64::NEG_INFINITY; N_FEATURES];
    let mut see = |f: usize, v: f64| {
        x_min[f] = x_min[f].min(v);
        x_max[f] = x_max[f].max(v);
    };
    for s in train {
        for row in &s.encoder_raw {
            for (f, &v) in row.iter().enumerate() {
                see(f, v);
            }
        }
        for &p in &s.target_raw {
            see(MID_PRICE, p);
        }
    }
    let params = NormalizationParams { x_min, x_max };
    for (f, name) in FEATURE_NAMES.iter().enumerate() {
        if params.is_degenerate(f) {
            log::warn!("feature `{name}` is constant on the training set; it normalises to 0");
        }
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn params(lo: f64, hi: f64) -> NormalizationParams {
        NormalizationParams { x_min: vec![lo; N_FEATURES], x_max: vec![hi; N_FEATURES] }
    }

    #[test]
    fn boundaries_and_midpoint() {
        let p = params(2.0, 10.0);
        assert_eq!(p.transform(0, 2.0), 0.0);
        assert_eq!(p.transform(0, 10.0), 1.0);
        assert_eq!(p.transform(0, 6.0), 0.5);
        assert_eq!(p.transform(0, 14.0), 1.5);
    }

    #[test]
    fn degenerate_maps_to_zero() {
        let p = params(3.0, 3.0);
        assert_eq!(p.transform(1, 3.0), 0.0);
        assert_eq!(p.transform(1, 100.0), 0.0);
        assert_eq!(p.inverse_transform(1, 0.7), 3.0);
    }

    proptest! {
        #[test]
        fn round_trip(lo in -1e3f64..1e3, width in 1e-3f64..1e3, xs in proptest::collection::vec(-1.0f64..2.0, 100)) {
            let p = params(lo, lo + width);
            for u in xs {
                let x = lo + u * width;
                let back = p.inverse_transform(4, p.transform(4, x));
                prop_assert!((back - x).abs() < 1e-12 * x.abs().max(1.0));
            }
        }
    }
}
