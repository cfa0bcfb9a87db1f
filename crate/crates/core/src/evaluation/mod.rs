//! Accuracy metrics, the directional backtest and report files.
//!
//! Every metric is computed in price units. A sequence is one test window:
//! the anchor `y_t` is the last observed price and `y_{t+T}` the price at
//! the final horizon step. The strategy goes long when the forecast for the
//! final step exceeds the anchor, short when it is below and stays flat on
//! a tie; a flat position earns nothing. Net value adds the per-sequence
//! returns to 1 without compounding.

mod forecasters;
mod report;

pub use forecasters::{BlackScholesForecaster, Forecaster, HestonForecaster, LearnedForecaster, PersistenceForecaster};
pub use report::{
    emit_predictions_csv, emit_report, read_report, write_predictions, ReportFile, PREDICTIONS_HEADER, REPORT_FORMAT,
    REPORT_VERSION,
};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::WindowSample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Long,
    Short,
    Flat,
}

impl Position {
    pub fn from_forecast(anchor: f64, predicted: f64) -> Self {
        if predicted > anchor {
            Self::Long
        } else if predicted < anchor {
            Self::Short
        } else {
            Self::Flat
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Self::Long => 1.0,
            Self::Short => -1.0,
            Self::Flat => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub contract_id: String,
    pub window_end: NaiveDate,
    pub anchor: f64,
    pub predicted_final: f64,
    pub actual_final: f64,
    pub position: Position,
    pub log_return: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub mae: f64,
    pub rmse: f64,
    pub direction_accuracy_pct: f64,
    pub final_day_mae: f64,
    pub net_value: f64,
    pub n_sequences: usize,
}

fn check_pairs(preds: &[f64], targets: &[f64]) -> Result<()> {
    if preds.is_empty() {
        return Err(Error::invalid("metric of an empty set"));
    }
    if preds.len() != targets.len() {
        return Err(Error::invalid(format!("{} predictions for {} targets", preds.len(), targets.len())));
    }
    Ok(())
}

pub fn mae(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_pairs(preds, targets)?;
    Ok(preds.iter().zip(targets).map(|(p, t)| (p - t).abs()).sum::<f64>() / preds.len() as f64)
}

pub fn rmse(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_pairs(preds, targets)?;
    Ok((preds.iter().zip(targets).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / preds.len() as f64).sqrt())
}

fn check_sequences(samples: &[WindowSample], predictions: &[Vec<f64>]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::invalid("no sequences to evaluate"));
    }
    if samples.len() != predictions.len() {
        return Err(Error::invalid(format!("{} forecasts for {} sequences", predictions.len(), samples.len())));
    }
    for (s, p) in samples.iter().zip(predictions) {
        if p.len() != s.horizon() {
            return Err(Error::invalid(format!("forecast of length {} for {}", p.len(), s.id())));
        }
    }
    Ok(())
}

/// Percentage of sequences whose predicted and realised final-step changes
/// share a sign; a zero change only matches a zero change.
pub fn direction_accuracy(samples: &[WindowSample], predictions: &[Vec<f64>]) -> Result<f64> {
    check_sequences(samples, predictions)?;
    let hits = samples
        .iter()
        .zip(predictions)
        .filter(|(s, p)| {
            let predicted = p[p.len() - 1] - s.anchor_price;
            let actual = s.target_raw[s.horizon() - 1] - s.anchor_price;
            sign(predicted) == sign(actual)
        })
        .count();
    Ok(100.0 * hits as f64 / samples.len() as f64)
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

pub fn final_day_mae(samples: &[WindowSample], predictions: &[Vec<f64>]) -> Result<f64> {
    check_sequences(samples, predictions)?;
    let (p, t): (Vec<f64>, Vec<f64>) =
        samples.iter().zip(predictions).map(|(s, p)| (p[p.len() - 1], s.target_raw[s.horizon() - 1])).unzip();
    mae(&p, &t)
}

/// `ln(y_T / y_t) · sign(ŷ_T − y_t)`.
pub fn sequence_return(y_t: f64, y_final: f64, predicted_final: f64) -> Result<f64> {
    if !(y_t > 0.0 && y_final > 0.0) {
        return Err(Error::invalid(format!("log return needs positive prices, got {y_t} and {y_final}")));
    }
    Ok((y_final / y_t).ln() * Position::from_forecast(y_t, predicted_final).sign())
}

/// `1 + Σ R_i`.
pub fn cumulative_net_value(returns: &[f64]) -> f64 {
    1.0 + returns.iter().sum::<f64>()
}

/// Metrics, trades and raw forecasts of one model over a test set.
#[derive(Debug, Clone, PartialEq)]
pub struct Backtest {
    pub report: MetricsReport,
    pub trades: Vec<TradeRecord>,
    /// Forecasts aligned with the chronologically sorted samples.
    pub predictions: Vec<Vec<f64>>,
    pub samples: Vec<WindowSample>,
}

/// Samples in chronological order (window end, then contract).
pub fn chronological(samples: &[WindowSample]) -> Vec<WindowSample> {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| (a.end_date(), &a.contract_id, a.start).cmp(&(b.end_date(), &b.contract_id, b.start)));
    s
}

pub fn backtest(forecaster: &dyn Forecaster, test: &[WindowSample]) -> Result<Backtest> {
    if test.is_empty() {
        return Err(Error::invalid("backtest needs a non-empty test set"));
    }
    let samples = chronological(test);
    let mut predictions = Vec::with_capacity(samples.len());
    let mut trades = Vec::with_capacity(samples.len());
    for s in &samples {
        let fail = |e: Error| Error::Forecast { model: forecaster.name(), sample: s.id(), source: Box::new(e) };
        let p = forecaster.forecast(s).map_err(fail)?;
        if p.len() != s.horizon() || p.iter().any(|v| !v.is_finite()) {
            return Err(fail(Error::invalid(format!("{} values, expected {} finite", p.len(), s.horizon()))));
        }
        let predicted_final = p[p.len() - 1];
        let actual_final = s.target_raw[s.horizon() - 1];
        let log_return = sequence_return(s.anchor_price, actual_final, predicted_final).map_err(fail)?;
        trades.push(TradeRecord {
            contract_id: s.contract_id.clone(),
            window_end: s.end_date(),
            anchor: s.anchor_price,
            predicted_final,
            actual_final,
            position: Position::from_forecast(s.anchor_price, predicted_final),
            log_return,
        });
        predictions.push(p);
    }
    let flat_p: Vec<f64> = predictions.iter().flatten().copied().collect();
    let flat_t: Vec<f64> = samples.iter().flat_map(|s| s.target_raw.iter().copied()).collect();
    let returns: Vec<f64> = trades.iter().map(|t| t.log_return).collect();
    let report = MetricsReport {
        model: forecaster.name(),
        mae: mae(&flat_p, &flat_t)?,
        rmse: rmse(&flat_p, &flat_t)?,
        direction_accuracy_pct: direction_accuracy(&samples, &predictions)?,
        final_day_mae: final_day_mae(&samples, &predictions)?,
        net_value: cumulative_net_value(&returns),
        n_sequences: samples.len(),
    };
    Ok(Backtest { report, trades, predictions, samples })
}

#[cfg(test)]
mod tests;
