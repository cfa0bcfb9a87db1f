//! Backtest the pricing and persistence baselines over a test split and
//! print the metric tables and a few trades.

use informer_options::cli::format_tables;
use informer_options::data::{prepare, PrepareConfig};
use informer_options::evaluation::{
    backtest, BlackScholesForecaster, Forecaster, HestonForecaster, PersistenceForecaster,
};
use informer_options::market::Scenario;

fn main() -> informer_options::Result<()> {
    let scenario = Scenario { n_days: 500, ..Scenario::default() };
    let chain = scenario.generate(3)?;
    let (_, split, _) = prepare(&chain, &PrepareConfig::default())?;
    let rate = scenario.heston.r;

    let bs = BlackScholesForecaster { rate };
    let heston = HestonForecaster { rate, dynamics: Default::default() };
    let roster: [&dyn Forecaster; 3] = [&bs, &heston, &PersistenceForecaster];
    let runs = roster.iter().map(|f| backtest(*f, &split.test)).collect::<informer_options::Result<Vec<_>>>()?;

    let reports: Vec<_> = runs.iter().map(|b| b.report.clone()).collect();
    println!("{}", format_tables(&reports));
    for t in runs[0].trades.iter().take(5) {
        println!(
            "{} {} anchor {:.4} forecast {:.4} realised {:.4} {:?} return {:+.5}",
            t.window_end, t.contract_id, t.anchor, t.predicted_final, t.actual_final, t.position, t.log_return
        );
    }
    Ok(())
}
