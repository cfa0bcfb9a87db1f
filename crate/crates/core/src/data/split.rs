use serde::{Deserialize, Serialize};

use super::window::WindowSample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self { train: 0.70, validation: 0.15, test: 0.15 }
    }
}

impl SplitFractions {
    /// `(train, validation, test)` counts for `total` samples. Train and
    /// validation round down; test takes the remainder.
    pub fn counts(&self, total: usize) -> (usize, usize, usize) {
        let sum = self.train + self.validation + self.test;
        let floor = |f: f64| ((f / sum) * total as f64 + 1e-9).floor() as usize;
        let tr = floor(self.train).min(total);
        let va = floor(self.validation).min(total - tr);
        (tr, va, total - tr - va)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<WindowSample>,
    pub validation: Vec<WindowSample>,
    pub test: Vec<WindowSample>,
    /// Samples discarded because their targets would overlap an earlier split.
    pub purged: usize,
}

impl DatasetSplit {
    pub fn all(&self) -> impl Iterator<Item = &WindowSample> {
        self.train.iter().chain(&self.validation).chain(&self.test)
    }

    pub fn all_mut(&mut self) -> impl Iterator<Item = &mut WindowSample> {
        self.train.iter_mut().chain(self.validation.iter_mut()).chain(self.test.iter_mut())
    }
}

/// Split samples chronologically by window-end date.
///
/// Training takes the earliest samples. A later sample is admitted to
/// validation only if its first target date falls after every date (encoder
/// or target) used by training; test samples must additionally start their
/// encoder span after the last training target, and their targets must
/// follow every validation date. Samples falling in these gaps are purged.
/// The kept counts follow `fractions` exactly under the rounding rule of
/// [`SplitFractions::counts`], using the largest total that fits.
pub fn chrono_split(samples: Vec<WindowSample>, fractions: SplitFractions) -> Result<DatasetSplit> {
    if samples.len() < 3 {
        return Err(Error::Split(format!("need at least 3 samples, got {}", samples.len())));
    }
    let mut sorted = samples;
    sorted.sort_by(|a, b| (a.end_date(), &a.contract_id, a.start).cmp(&(b.end_date(), &b.contract_id, b.start)));
    if sorted.first().map(WindowSample::end_date) == sorted.last().map(WindowSample::end_date) {
        return Err(Error::Split("every sample ends on the same date".into()));
    }

    for total in (3..=sorted.len()).rev() {
        let (tr, va, te) = fractions.counts(total);
        if tr == 0 || va == 0 || te == 0 {
            continue;
        }
        if let Some((val_idx, test_idx)) = assemble(&sorted, tr, va, te) {
            let purged = sorted.len() - total;
            let mut val_set = vec![false; sorted.len()];
            let mut test_set = vec![false; sorted.len()];
            val_idx.iter().for_each(|&i| val_set[i] = true);
            test_idx.iter().for_each(|&i| test_set[i] = true);
            let mut split = DatasetSplit { purged, ..DatasetSplit::default() };
            for (i, s) in sorted.into_iter().enumerate() {
                if i < tr {
                    split.train.push(s);
                } else if val_set[i] {
                    split.validation.push(s);
                } else if test_set[i] {
                    split.test.push(s);
                }
            }
            return Ok(split);
        }
    }
    Err(Error::Split("no chronological cut leaves non-empty validation and test sets".into()))
}

fn assemble(sorted: &[WindowSample], tr: usize, va: usize, te: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let train_last = sorted[..tr].iter().map(WindowSample::target_end).max()?;
    let val: Vec<usize> = (tr..sorted.len()).filter(|&i| sorted[i].target_start() > train_last).take(va).collect();
    if val.len() < va {
        return None;
    }
    let after_val = *val.last()? + 1;
    let val_last = val.iter().map(|&i| sorted[i].target_end()).max()?;
    let test: Vec<usize> = (after_val..sorted.len())
        .filter(|&i| {
            let s = &sorted[i];
            s.target_start() > val_last && s.encoder_dates[0] > train_last
        })
        .take(te)
        .collect();
    (test.len() == te).then_some((val, test))
}
