use approx::assert_relative_eq;
use proptest::prelude::*;

use super::*;
use crate::data::WindowConfig;
use crate::testutil::samples;

/// Replays a fixed forecast per sample id.
struct Fixed(Vec<(String, Vec<f64>)>);

impl Forecaster for Fixed {
    fn name(&self) -> String {
        "fixed".into()
    }

    fn forecast(&self, sample: &WindowSample) -> Result<Vec<f64>> {
        let id = sample.id();
        self.0.iter().find(|(k, _)| *k == id).map(|(_, v)| v.clone()).ok_or_else(|| Error::invalid("unknown sample"))
    }
}

struct Perfect;

impl Forecaster for Perfect {
    fn name(&self) -> String {
        "perfect".into()
    }

    fn forecast(&self, sample: &WindowSample) -> Result<Vec<f64>> {
        Ok(sample.target_raw.clone())
    }
}

/// Reflects another forecaster's forecast through the anchor.
struct Mirror<F>(F);

impl<F: Forecaster> Forecaster for Mirror<F> {
    fn name(&self) -> String {
        format!("mirror {}", self.0.name())
    }

    fn forecast(&self, s: &WindowSample) -> Result<Vec<f64>> {
        Ok(self.0.forecast(s)?.into_iter().map(|p| 2.0 * s.anchor_price - p).collect())
    }
}

fn window_set(n_rows: usize, phase: f64) -> Vec<WindowSample> {
    let cfg = WindowConfig { t_x: 10, t_y: 5, t_label: 2, stride: 1 };
    samples(&cfg, n_rows, phase).0
}

fn with_final(mut s: WindowSample, anchor: f64, actual_final: f64) -> WindowSample {
    let n = s.encoder_raw.len();
    s.encoder_raw[n - 1][crate::data::MID_PRICE] = anchor;
    s.anchor_price = anchor;
    let h = s.horizon();
    s.target_raw[h - 1] = actual_final;
    s
}

#[test]
fn mae_and_rmse_cases() {
    assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    assert_eq!(mae(&[3.0, -3.0], &[0.0, 0.0]).unwrap(), 3.0);
    assert_eq!(rmse(&[3.0, -3.0], &[0.0, 0.0]).unwrap(), 3.0);
    assert_eq!(mae(&[0.0, 4.0], &[0.0, 0.0]).unwrap(), 2.0);
    assert_relative_eq!(rmse(&[0.0, 4.0], &[0.0, 0.0]).unwrap(), 8f64.sqrt(), epsilon = 1e-15);
    assert!(mae(&[], &[]).is_err());
    assert!(rmse(&[1.0], &[]).is_err());
}

#[test]
fn direction_accuracy_cases() {
    let base = window_set(20, 0.0);
    let s: Vec<WindowSample> = [(10.0, 11.0), (10.0, 9.0), (10.0, 12.0), (10.0, 8.0)]
        .iter()
        .zip(&base)
        .map(|(&(a, f), s)| with_final(s.clone(), a, f))
        .collect();
    let fc = |finals: [f64; 4]| -> Vec<Vec<f64>> { finals.iter().map(|&f| vec![0.0, 0.0, 0.0, 0.0, f]).collect() };
    assert_eq!(direction_accuracy(&s, &fc([12.0, 8.0, 10.5, 9.5])).unwrap(), 100.0);
    assert_eq!(direction_accuracy(&s, &fc([12.0, 8.0, 9.0, 11.0])).unwrap(), 50.0);

    let flat = with_final(base[0].clone(), 10.0, 10.0);
    let moved = with_final(base[1].clone(), 10.0, 10.5);
    assert_eq!(direction_accuracy(std::slice::from_ref(&flat), &[vec![10.0; 5]]).unwrap(), 100.0);
    assert_eq!(direction_accuracy(std::slice::from_ref(&moved), &[vec![10.0; 5]]).unwrap(), 0.0);
    assert!(direction_accuracy(&[], &[]).is_err());
    assert!(direction_accuracy(&s[..1], &[vec![1.0; 4]]).is_err());
}

#[test]
fn final_day_mae_cases() {
    let s = window_set(20, 0.3);
    let noisy: Vec<Vec<f64>> = s
        .iter()
        .map(|x| {
            let mut p: Vec<f64> = x.target_raw.iter().map(|v| v + 7.0).collect();
            p[4] = x.target_raw[4];
            p
        })
        .collect();
    assert_eq!(final_day_mae(&s, &noisy).unwrap(), 0.0);
    let mut off = s[0].target_raw.clone();
    off[4] += 2.5;
    assert_eq!(final_day_mae(&s[..1], &[off]).unwrap(), 2.5);

    let cfg = WindowConfig { t_x: 10, t_y: 1, t_label: 2, stride: 1 };
    let one = samples(&cfg, 20, 0.0).0;
    let p: Vec<Vec<f64>> = one.iter().map(|x| vec![x.target_raw[0] * 1.1 + 0.3]).collect();
    let flat_p: Vec<f64> = p.iter().flatten().copied().collect();
    let flat_t: Vec<f64> = one.iter().map(|x| x.target_raw[0]).collect();
    assert_eq!(final_day_mae(&one, &p).unwrap(), mae(&flat_p, &flat_t).unwrap());
}

#[test]
fn sequence_return_cases() {
    let y_t = 100.0;
    let y_final = 100.0 * 0.1f64.exp();
    assert_relative_eq!(sequence_return(y_t, y_final, 105.0).unwrap(), 0.1, epsilon = 1e-15);
    assert_relative_eq!(sequence_return(y_t, y_final, 95.0).unwrap(), -0.1, epsilon = 1e-15);
    assert_eq!(sequence_return(y_t, y_final, 100.0).unwrap(), 0.0);
    assert!(sequence_return(0.0, 1.0, 2.0).is_err());
    assert!(sequence_return(1.0, -1.0, 2.0).is_err());
}

#[test]
fn net_value_cases() {
    assert_eq!(cumulative_net_value(&[]), 1.0);
    assert_relative_eq!(cumulative_net_value(&[0.1, -0.05, 0.2]), 1.25, epsilon = 1e-15);
}

#[test]
fn persistence_is_flat_and_neutral() {
    let s = window_set(60, 0.2);
    let bt = backtest(&PersistenceForecaster, &s).unwrap();
    assert_eq!(bt.report.net_value, 1.0);
    assert!(bt.trades.iter().all(|t| t.position == Position::Flat && t.log_return == 0.0));
    assert_eq!(bt.report.n_sequences, s.len());
    assert_eq!(bt.report.model, "Persistence");
}

#[test]
fn perfect_and_mirrored_forecasts() {
    let s = window_set(60, 0.7);
    let perfect = backtest(&Perfect, &s).unwrap();
    assert_eq!(perfect.report.direction_accuracy_pct, 100.0);
    assert_eq!(perfect.report.mae, 0.0);
    let max_nv = cumulative_net_value(
        &perfect.trades.iter().map(|t| (t.actual_final / t.anchor).ln().abs()).collect::<Vec<_>>(),
    );
    assert_eq!(perfect.report.net_value, max_nv);
    let mirror = backtest(&Mirror(Perfect), &s).unwrap();
    assert_eq!(mirror.report.net_value, 2.0 - perfect.report.net_value);
}

#[test]
fn trades_are_chronological_and_consistent() {
    let mut s = window_set(40, 0.1);
    s.extend(window_set(40, 1.3).into_iter().map(|mut x| {
        x.contract_id = "B".into();
        x
    }));
    s.reverse();
    let bt = backtest(&Perfect, &s).unwrap();
    assert!(bt.trades.windows(2).all(|w| (w[0].window_end, &w[0].contract_id) <= (w[1].window_end, &w[1].contract_id)));
    for t in &bt.trades {
        assert_eq!(t.position, Position::from_forecast(t.anchor, t.predicted_final));
        if t.position == Position::Flat {
            assert_eq!(t.log_return, 0.0);
        }
    }
    assert_eq!(bt.report.net_value, cumulative_net_value(&bt.trades.iter().map(|t| t.log_return).collect::<Vec<_>>()));
}

#[test]
fn backtest_errors_name_the_sample() {
    let s = window_set(30, 0.0);
    assert!(backtest(&PersistenceForecaster, &[]).is_err());
    let err = backtest(&Fixed(vec![]), &s).unwrap_err();
    assert!(matches!(&err, Error::Forecast { sample, .. } if *sample == chronological(&s)[0].id()));
    let short = Fixed(s.iter().map(|x| (x.id(), vec![1.0; 3])).collect());
    assert!(matches!(backtest(&short, &s), Err(Error::Forecast { .. })));
    let nan = Fixed(s.iter().map(|x| (x.id(), vec![f64::NAN; 5])).collect());
    assert!(backtest(&nan, &s).is_err());
    let mut zero = s.clone();
    zero[0] = with_final(zero[0].clone(), 0.0, 1.0);
    assert!(backtest(&Perfect, &zero).is_err());
}

#[test]
fn backtest_is_deterministic() {
    let s = window_set(50, 0.4);
    let f = BlackScholesForecaster { rate: 0.03 };
    assert_eq!(backtest(&f, &s).unwrap(), backtest(&f, &s).unwrap());
}

#[test]
fn report_round_trip_and_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    emit_report(&[], &path).unwrap();
    let empty = read_report(&path).unwrap();
    assert!(empty.reports.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"reports\": []"));

    let s = window_set(45, 0.9);
    let a = backtest(&PersistenceForecaster, &s).unwrap();
    let b = backtest(&BlackScholesForecaster { rate: 0.01 }, &s).unwrap();
    let reports = vec![a.report.clone(), b.report.clone()];
    emit_report(&reports, &path).unwrap();
    assert_eq!(read_report(&path).unwrap().reports, reports);

    let cfg = WindowConfig { t_x: 30, t_y: 30, t_label: 5, stride: 1 };
    let one = samples(&cfg, 60, 0.0).0;
    assert_eq!(one.len(), 1);
    let runs = [backtest(&PersistenceForecaster, &one).unwrap(), backtest(&Perfect, &one).unwrap()];
    let csv_path = dir.path().join("p.csv");
    emit_predictions_csv(&runs, &csv_path).unwrap();
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 61);
    assert_eq!(lines[0], PREDICTIONS_HEADER.join(","));
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[2], "1");
    assert_eq!(first[3].parse::<f64>().unwrap(), one[0].target_raw[0]);
    assert_eq!(first[5], "Persistence");
}

proptest! {
    #[test]
    fn rmse_dominates_mae(errs in prop::collection::vec(-1e3f64..1e3, 1..64)) {
        let zeros = vec![0.0; errs.len()];
        let (m, r) = (mae(&errs, &zeros).unwrap(), rmse(&errs, &zeros).unwrap());
        prop_assert!(m >= 0.0);
        prop_assert!(r >= m * (1.0 - 1e-12));
    }

    #[test]
    fn mirror_net_values_sum_to_two(bumps in prop::collection::vec(-3f64..3.0, 16), ties in prop::collection::vec(any::<bool>(), 16)) {
        let s = window_set(30, 0.5);
        let fc = Fixed(
            s.iter()
                .zip(bumps.iter().zip(&ties).cycle())
                .map(|(x, (b, tie))| (x.id(), vec![x.anchor_price + if *tie { 0.0 } else { *b }; 5]))
                .collect(),
        );
        let a = backtest(&fc, &s).unwrap().report.net_value;
        let m = backtest(&Mirror(fc), &s).unwrap().report.net_value;
        prop_assert!((a + m - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_prices_preserves_direction_and_returns(c in 0.1f64..20.0, bumps in prop::collection::vec(-2f64..2.0, 8)) {
        let s = window_set(25, 0.8);
        let scaled: Vec<WindowSample> = s
            .iter()
            .map(|x| {
                let mut y = x.clone();
                y.anchor_price *= c;
                y.target_raw.iter_mut().for_each(|v| *v *= c);
                y
            })
            .collect();
        let plan = |k: f64, set: &[WindowSample]| {
            Fixed(set.iter().zip(bumps.iter().cycle()).map(|(x, b)| (x.id(), x.target_raw.iter().map(|v| v + k * b).collect())).collect())
        };
        let a = backtest(&plan(1.0, &s), &s).unwrap();
        let b = backtest(&plan(c, &scaled), &scaled).unwrap();
        prop_assert_eq!(a.report.direction_accuracy_pct, b.report.direction_accuracy_pct);
        prop_assert_eq!(a.report.n_sequences, b.report.n_sequences);
        prop_assert!((a.report.net_value - b.report.net_value).abs() < 1e-12);
        prop_assert!((a.report.mae * c - b.report.mae).abs() < 1e-9 * (1.0 + b.report.mae));
        prop_assert!((a.report.rmse * c - b.report.rmse).abs() < 1e-9 * (1.0 + b.report.rmse));
        for (x, y) in a.trades.iter().zip(&b.trades) {
            prop_assert_eq!(x.position, y.position);
        }
    }
}
