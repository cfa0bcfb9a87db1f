use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::filter::{filter_eligible, FilterConfig, RejectReason};
use super::normalize::{fit_normalizer, NormalizationParams};
use super::record::OptionRecord;
use super::split::{chrono_split, DatasetSplit, SplitFractions};
use super::window::{build_windows, contract_series, WindowConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PrepareConfig {
    pub filter: FilterConfig,
    pub window: WindowConfig,
    pub fractions: SplitFractions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Part {
    Train,
    Validation,
    Test,
}

/// Compact on-disk form of a prepared split: the eligible records plus the
/// window assignment, from which samples are rebuilt exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedDataset {
    pub format: String,
    pub version: u32,
    pub config: PrepareConfig,
    pub normalizer: NormalizationParams,
    pub records: Vec<OptionRecord>,
    assignments: Vec<(String, usize, Part)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareSummary {
    pub input_records: usize,
    pub kept_records: usize,
    pub rejected: BTreeMap<String, usize>,
    pub contracts: usize,
    pub windows: usize,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub purged: usize,
}

const FORMAT: &str = "informer-options-prepared";

/// Filter, window, split and normalise a chain.
pub fn prepare(
    records: &[OptionRecord],
    cfg: &PrepareConfig,
) -> Result<(PreparedDataset, DatasetSplit, PrepareSummary)> {
    let outcome = filter_eligible(records, &cfg.filter);
    if outcome.kept.is_empty() {
        return Err(Error::invalid(format!("zero eligible contracts after filtering {} records", records.len())));
    }
    let series = contract_series(&outcome.kept);
    let windows: Vec<_> = series.values().flat_map(|s| build_windows(s, &cfg.window)).collect();
    let n_windows = windows.len();
    if n_windows == 0 {
        return Err(Error::invalid("zero eligible contracts long enough to window"));
    }
    let mut split = chrono_split(windows, cfg.fractions)?;
    let normalizer = fit_normalizer(&split.train)?;
    split.all_mut().for_each(|s| s.normalize(&normalizer));

    let mut assignments = Vec::new();
    for (part, list) in [(Part::Train, &split.train), (Part::Validation, &split.validation), (Part::Test, &split.test)]
    {
        assignments.extend(list.iter().map(|s| (s.contract_id.clone(), s.start, part)));
    }
    let summary = PrepareSummary {
        input_records: records.len(),
        kept_records: outcome.kept.len(),
        rejected: outcome.rejected.iter().map(|(r, n): (&RejectReason, &usize)| (r.as_str().to_string(), *n)).collect(),
        contracts: series.len(),
        windows: n_windows,
        train: split.train.len(),
        validation: split.validation.len(),
        test: split.test.len(),
        purged: split.purged,
    };
    let prepared = PreparedDataset {
        format: FORMAT.into(),
        version: 1,
        config: *cfg,
        normalizer,
        records: outcome.kept,
        assignments,
    };
    Ok((prepared, split, summary))
}

impl PreparedDataset {
    /// Rebuild the normalised split.
    pub fn materialize(&self) -> Result<DatasetSplit> {
        self.normalizer.validate()?;
        let series = contract_series(&self.records);
        let mut index: HashMap<(String, usize), _> = HashMap::new();
        for (id, rows) in &series {
            for w in build_windows(rows, &self.config.window) {
                index.insert((id.clone(), w.start), w);
            }
        }
        let mut split = DatasetSplit::default();
        for (id, start, part) in &self.assignments {
            let mut w = index
                .get(&(id.clone(), *start))
                .cloned()
                .ok_or_else(|| Error::invalid(format!("prepared dataset references missing window {id}+{start}")))?;
            w.normalize(&self.normalizer);
            match part {
                Part::Train => split.train.push(w),
                Part::Validation => split.validation.push(w),
                Part::Test => split.test.push(w),
            }
        }
        split.purged = index.len() - self.assignments.len();
        Ok(split)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let p: Self = serde_json::from_str(&text)?;
        if p.format != FORMAT || p.version != 1 {
            return Err(Error::invalid(format!("{}: not a version-1 prepared dataset", path.display())));
        }
        Ok(p)
    }
}
