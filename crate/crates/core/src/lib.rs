//! Informer-style option price forecasting laboratory.
//!
//! The crate bundles everything needed to run a desk-scale forecasting
//! study on option chains:
//!
//! * [`tensor`]: a small dense-tensor core with reverse-mode gradients;
//! * [`data`]: option-chain CSV ingestion, eligibility filters, min-max
//!   normalisation, sliding windows and chronological splits;
//! * [`market`]: a Heston-driven synthetic chain generator;
//! * [`nn`]: parameter sets and forward-pass context for the learned
//!   models;
//! * [`model`]: the encoder–decoder forecaster with full and ProbSparse
//!   attention, distilling and generative decoding;
//! * [`baselines`]: Black-Scholes, Heston, LSTM and persistence forecasters;
//! * [`training`]: weighted MSE, Adam, early stopping and random search;
//! * [`evaluation`]: MAE/RMSE, direction accuracy, final-day MAE and the
//!   long/short log-return backtest;
//! * [`cli`]: the `informer-options` command-line workflow.

pub mod baselines;
pub mod cli;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod market;
pub mod model;
pub mod nn;
pub mod rng;
pub mod tensor;
pub mod training;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
