//! The full comparison workflow on a small scenario: generate, prepare,
//! train both learned models, backtest every model and write the reports.

use informer_options::cli::{cmd_compare, RunConfig};

fn main() -> informer_options::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/example-compare".into());
    let mut cfg = RunConfig { seed: 21, ..RunConfig::default() };
    cfg.apply_text(&format!(
        "out = {out}\nscenario.days = 300\nwindow.stride = 4\ntrain.epochs = 3\nlstm.hidden = 16\n"
    ))?;
    let outcome = cmd_compare(&cfg)?;
    println!("{}", outcome.tables);
    println!("reports in {out}/compare.json");
    Ok(())
}
