//! Filter a chain, cut sliding windows, split them chronologically and fit
//! the training-set normaliser.

use informer_options::data::{prepare, PrepareConfig, FEATURE_NAMES};
use informer_options::market::Scenario;

fn main() -> informer_options::Result<()> {
    let chain = Scenario { n_days: 500, ..Scenario::default() }.generate(11)?;
    let (prepared, split, summary) = prepare(&chain, &PrepareConfig::default())?;

    println!("{} of {} quotes kept; rejected {:?}", summary.kept_records, summary.input_records, summary.rejected);
    println!(
        "{} contracts, {} windows: train {}, validation {}, test {} ({} purged at split boundaries)",
        summary.contracts, summary.windows, summary.train, summary.validation, summary.test, summary.purged
    );
    for (f, name) in FEATURE_NAMES.iter().enumerate() {
        println!("  {name:>16}: [{:.4}, {:.4}]", prepared.normalizer.x_min[f], prepared.normalizer.x_max[f]);
    }

    let s = &split.test[0];
    println!(
        "first test window {}: encoder {} .. {}, targets {} .. {}, anchor {:.4}",
        s.id(),
        s.encoder_dates[0],
        s.end_date(),
        s.target_start(),
        s.target_end(),
        s.anchor_price
    );
    Ok(())
}
