//! Simulate a Heston market, quote a rolling option chain on it and write
//! the chain as CSV.

use std::collections::BTreeSet;

use informer_options::data::OptionType;
use informer_options::market::{write_chain_csv, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/example-chain.csv".into());
    let scenario = Scenario { n_days: 400, ..Scenario::default() };
    let chain = scenario.generate(7)?;

    let dates: BTreeSet<_> = chain.iter().map(|r| r.quote_date).collect();
    let contracts: BTreeSet<_> = chain.iter().map(|r| (r.expiry_date, r.strike.to_bits(), r.option_type)).collect();
    let calls = chain.iter().filter(|r| r.option_type == OptionType::Call).count();
    println!("{} quotes over {} trading days, {} contracts, {calls} calls", chain.len(), dates.len(), contracts.len());
    for r in chain.iter().take(5) {
        println!(
            "{} exp {} K {:7.2} {:?} S {:7.2} iv {:.3} mid {:8.4} vol {}",
            r.quote_date,
            r.expiry_date,
            r.strike,
            r.option_type,
            r.underlying_price,
            r.implied_vol,
            r.mid_price,
            r.volume
        );
    }

    if let Some(dir) = std::path::Path::new(&out).parent() {
        std::fs::create_dir_all(dir)?;
    }
    write_chain_csv(&chain, &out)?;
    println!("wrote {out}");
    Ok(())
}
