use chrono::{Days, NaiveDate};

use crate::data::{
    build_windows, fit_normalizer, NormalizationParams, OptionRecord, OptionType, WindowConfig, WindowSample,
};

/// A smooth single-contract series of `n` daily quotes.
pub fn series(n: usize, phase: f64) -> Vec<OptionRecord> {
    let d0 = NaiveDate::from_ymd_opt(2020, 1, 6).unwrap();
    (0..n)
        .map(|i| {
            let t = i as f64;
            let s = 100.0 + 5.0 * (0.07 * t + phase).sin() + 0.02 * t;
            OptionRecord {
                quote_date: d0 + Days::new(i as u64),
                expiry_date: d0 + Days::new(n as u64 + 400),
                strike: 100.0,
                option_type: OptionType::Call,
                underlying_price: s,
                implied_vol: 0.2 + 0.01 * (0.05 * t).cos(),
                mid_price: (s - 95.0).max(0.5) + 0.3 * (0.11 * t + phase).cos(),
                volume: 10,
            }
        })
        .collect()
}

/// Normalised windows cut from [`series`], with the fitted normaliser.
pub fn samples(cfg: &WindowConfig, n_rows: usize, phase: f64) -> (Vec<WindowSample>, NormalizationParams) {
    let mut w = build_windows(&series(n_rows, phase), cfg);
    let norm = fit_normalizer(&w).unwrap();
    w.iter_mut().for_each(|s| s.normalize(&norm));
    (w, norm)
}
