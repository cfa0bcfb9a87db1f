use crate::baselines::{bs_forecast, heston_forecast, persistence_forecast, HestonForecastParams};
use crate::data::{NormalizationParams, WindowSample};
use crate::error::Result;
use crate::nn::SequenceModel;

/// Anything that maps a window to `T_y` raw prices.
pub trait Forecaster {
    fn name(&self) -> String;
    fn forecast(&self, sample: &WindowSample) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PersistenceForecaster;

impl Forecaster for PersistenceForecaster {
    fn name(&self) -> String {
        "Persistence".into()
    }

    fn forecast(&self, sample: &WindowSample) -> Result<Vec<f64>> {
        Ok(persistence_forecast(sample))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BlackScholesForecaster {
    pub rate: f64,
}

impl Forecaster for BlackScholesForecaster {
    fn name(&self) -> String {
        "Black-Scholes".into()
    }

    fn forecast(&self, sample: &WindowSample) -> Result<Vec<f64>> {
        bs_forecast(sample, self.rate)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HestonForecaster {
    pub rate: f64,
    pub dynamics: HestonForecastParams,
}

impl Forecaster for HestonForecaster {
    fn name(&self) -> String {
        "Heston".into()
    }

    fn forecast(&self, sample: &WindowSample) -> Result<Vec<f64>> {
        heston_forecast(sample, self.rate, &self.dynamics)
    }
}

/// A trained model plus the normaliser its samples were scaled with.
pub struct LearnedForecaster<'a> {
    pub model: &'a dyn SequenceModel,
    pub normalizer: &'a NormalizationParams,
}

impl Forecaster for LearnedForecaster<'_> {
    fn name(&self) -> String {
        self.model.label().into()
    }

    fn forecast(&self, sample: &WindowSample) -> Result<Vec<f64>> {
        let z = self.model.predict(sample)?;
        Ok(z.into_iter().map(|v| self.normalizer.inverse_target(v)).collect())
    }
}
