//! Closed-form Black-Scholes and semi-analytic Heston prices on a small
//! grid, with the put-call parity residual of the Heston pricer.

use informer_options::baselines::{bs_price, heston_price, BsInputs};
use informer_options::data::OptionType;
use informer_options::market::HestonParams;

fn main() -> informer_options::Result<()> {
    let heston = HestonParams::default();
    let vol = heston.v0.sqrt();
    println!(
        "{:>6} {:>5} {:>9} {:>9} {:>9} {:>9} {:>10}",
        "K", "tau", "bs call", "bs put", "h call", "h put", "parity"
    );
    for tau in [0.25, 0.5, 1.0] {
        for strike in [80.0, 100.0, 120.0] {
            let bs =
                |option_type| bs_price(&BsInputs { spot: heston.s0, strike, rate: heston.r, vol, tau, option_type });
            let call = heston_price(&heston, strike, tau, OptionType::Call)?;
            let put = heston_price(&heston, strike, tau, OptionType::Put)?;
            let parity = call - put - heston.s0 + strike * (-heston.r * tau).exp();
            println!(
                "{strike:6.1} {tau:5.2} {:9.4} {:9.4} {call:9.4} {put:9.4} {parity:10.1e}",
                bs(OptionType::Call)?,
                bs(OptionType::Put)?,
            );
        }
    }
    Ok(())
}
