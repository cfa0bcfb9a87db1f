//! Reference forecasters: closed-form pricers with a frozen-input forecast
//! protocol, a small LSTM, and persistence.

mod black_scholes;
mod forecast;
mod heston;
mod lstm;

pub use black_scholes::{bs_price, discounted_intrinsic, norm_cdf, BsInputs};
pub use forecast::{bs_forecast, heston_forecast, persistence_forecast, remaining_tau, HestonForecastParams};
pub use heston::{gauss_legendre, heston_price, heston_price_with, Quadrature};
pub use lstm::{lstm_cell_step, lstm_forecast_model, Lstm, LstmConfig};

#[cfg(test)]
mod tests;
