//! Option-chain ingestion and sample preparation.
//!
//! The pipeline is: [`parse_chain`] → [`filter_eligible`] →
//! [`build_all_windows`] → [`chrono_split`] → [`fit_normalizer`] on the
//! training split → [`WindowSample::normalize`] on every split.
//! [`prepare`] runs the whole sequence.

mod filter;
mod normalize;
mod prepared;
mod record;
mod split;
mod window;

pub use filter::{filter_eligible, FilterConfig, FilterOutcome, RejectReason};
pub use normalize::{fit_normalizer, NormalizationParams};
pub use prepared::{prepare, PrepareConfig, PrepareSummary, PreparedDataset};
pub use record::{
    parse_chain, write_chain, ContractKey, OptionRecord, OptionType, ParsedChain, RowDiagnostic, CHAIN_HEADER,
};
pub use split::{chrono_split, DatasetSplit, SplitFractions};
pub use window::{build_all_windows, build_windows, contract_series, WindowConfig, WindowSample};

pub const N_FEATURES: usize = 6;

/// Model input feature order.
pub const FEATURE_NAMES: [&str; N_FEATURES] =
    ["underlying_price", "implied_vol", "ttm_years", "strike", "type_indicator", "mid_price"];

pub const UNDERLYING: usize = 0;
pub const IMPLIED_VOL: usize = 1;
pub const TTM_YEARS: usize = 2;
pub const STRIKE: usize = 3;
pub const TYPE_INDICATOR: usize = 4;
pub const MID_PRICE: usize = 5;

pub type FeatureRow = [f64; N_FEATURES];

/// Feature vector of one quote.
pub fn features(r: &OptionRecord) -> FeatureRow {
    [r.underlying_price, r.implied_vol, r.ttm_years(), r.strike, r.option_type.indicator(), r.mid_price]
}
