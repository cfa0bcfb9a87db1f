use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::normalize::NormalizationParams;
use super::record::{OptionRecord, OptionType};
use super::{features, FeatureRow, MID_PRICE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub t_x: usize,
    pub t_y: usize,
    pub t_label: usize,
    pub stride: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { t_x: 30, t_y: 30, t_label: 5, stride: 1 }
    }
}

impl WindowConfig {
    /// Windows available in a series of `len` rows.
    pub fn count(&self, len: usize) -> usize {
        let need = self.t_x + self.t_y;
        if len < need || self.stride == 0 {
            0
        } else {
            (len - need) / self.stride + 1
        }
    }
}

/// One training / evaluation instance cut from a single contract's series.
///
/// Raw fields are filled at construction; the normalised fields stay empty
/// until [`WindowSample::normalize`] is called with fitted statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSample {
    pub contract_id: String,
    pub option_type: OptionType,
    pub strike: f64,
    pub expiry_date: NaiveDate,
    /// Index of the first encoder row within the contract series.
    pub start: usize,
    pub encoder_dates: Vec<NaiveDate>,
    pub target_dates: Vec<NaiveDate>,
    pub encoder_raw: Vec<FeatureRow>,
    pub target_raw: Vec<f64>,
    /// Raw mid price at the last encoder step (`y_t`).
    pub anchor_price: f64,
    pub t_label: usize,
    pub encoder_input: Vec<FeatureRow>,
    pub decoder_known: Vec<f64>,
    pub target: Vec<f64>,
}

impl WindowSample {
    pub fn end_date(&self) -> NaiveDate {
        *self.encoder_dates.last().expect("non-empty encoder span")
    }

    pub fn target_start(&self) -> NaiveDate {
        self.target_dates[0]
    }

    pub fn target_end(&self) -> NaiveDate {
        *self.target_dates.last().expect("non-empty target span")
    }

    pub fn horizon(&self) -> usize {
        self.target_raw.len()
    }

    /// The last `t_label` observed mid prices, raw.
    pub fn decoder_known_raw(&self) -> Vec<f64> {
        let n = self.encoder_raw.len();
        self.encoder_raw[n - self.t_label..].iter().map(|r| r[MID_PRICE]).collect()
    }

    pub fn last_features(&self) -> &FeatureRow {
        self.encoder_raw.last().expect("non-empty encoder span")
    }

    /// Fill the normalised fields from fitted statistics.
    pub fn normalize(&mut self, norm: &NormalizationParams) {
        self.encoder_input = self.encoder_raw.iter().map(|r| norm.transform_row(r)).collect();
        self.decoder_known = self.decoder_known_raw().into_iter().map(|p| norm.transform_target(p)).collect();
        self.target = self.target_raw.iter().map(|&p| norm.transform_target(p)).collect();
    }

    pub fn is_normalized(&self) -> bool {
        self.encoder_input.len() == self.encoder_raw.len() && self.target.len() == self.target_raw.len()
    }

    /// A stable identifier for diagnostics.
    pub fn id(&self) -> String {
        format!("{}@{}", self.contract_id, self.end_date())
    }
}

/// Cut sliding windows from one contract's chronologically sorted series.
///
/// Window `i` uses rows `[i·stride, i·stride + T_x)` as encoder input and
/// the next `T_y` rows as targets. Too-short series yield no windows.
pub fn build_windows(series: &[OptionRecord], cfg: &WindowConfig) -> Vec<WindowSample> {
    let n = cfg.count(series.len());
    if n == 0 || cfg.t_label > cfg.t_x {
        return Vec::new();
    }
    debug_assert!(series.windows(2).all(|w| w[0].quote_date < w[1].quote_date));
    let contract_id = series[0].contract().to_string();
    (0..n)
        .map(|w| {
            let i = w * cfg.stride;
            let enc = &series[i..i + cfg.t_x];
            let tgt = &series[i + cfg.t_x..i + cfg.t_x + cfg.t_y];
            WindowSample {
                contract_id: contract_id.clone(),
                option_type: series[0].option_type,
                strike: series[0].strike,
                expiry_date: series[0].expiry_date,
                start: i,
                encoder_dates: enc.iter().map(|r| r.quote_date).collect(),
                target_dates: tgt.iter().map(|r| r.quote_date).collect(),
                encoder_raw: enc.iter().map(features).collect(),
                target_raw: tgt.iter().map(|r| r.mid_price).collect(),
                anchor_price: enc[cfg.t_x - 1].mid_price,
                t_label: cfg.t_label,
                encoder_input: Vec::new(),
                decoder_known: Vec::new(),
                target: Vec::new(),
            }
        })
        .collect()
}

/// Group records by contract and sort each group by quote date.
pub fn contract_series(records: &[OptionRecord]) -> BTreeMap<String, Vec<OptionRecord>> {
    let mut by_key: BTreeMap<_, Vec<OptionRecord>> = BTreeMap::new();
    for r in records {
        by_key.entry(r.contract()).or_default().push(r.clone());
    }
    by_key
        .into_iter()
        .map(|(k, mut rows)| {
            rows.sort_by_key(|r| r.quote_date);
            rows.dedup_by_key(|r| r.quote_date);
            (k.to_string(), rows)
        })
        .collect()
}

/// Windows over every contract, in contract-id then start order.
pub fn build_all_windows(records: &[OptionRecord], cfg: &WindowConfig) -> Vec<WindowSample> {
    contract_series(records).values().flat_map(|s| build_windows(s, cfg)).collect()
}
