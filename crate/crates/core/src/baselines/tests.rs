use chrono::{Days, NaiveDate};
use rand_distr::{Distribution, StandardNormal};

use super::*;
use crate::data::{build_windows, fit_normalizer, OptionRecord, OptionType, WindowConfig, WindowSample};
use crate::nn::{ForwardCtx, SequenceModel};
use crate::rng::seeded;
use crate::tensor::{grad_check, Tensor};

/// A window over 60 identical daily quotes of one contract.
fn constant_sample(option_type: OptionType, spot: f64, strike: f64, days_left_at_end: u64, mid: f64) -> WindowSample {
    let d0 = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
    let expiry = d0 + Days::new(29 + days_left_at_end);
    let records: Vec<OptionRecord> = (0..60)
        .map(|i| OptionRecord {
            quote_date: d0 + Days::new(i),
            expiry_date: expiry,
            strike,
            option_type,
            underlying_price: spot,
            implied_vol: 0.25,
            mid_price: mid,
            volume: 5,
        })
        .collect();
    let mut w = build_windows(&records, &WindowConfig::default());
    let norm = fit_normalizer(&w).unwrap();
    w[0].normalize(&norm);
    w.remove(0)
}

#[test]
fn bs_matches_monte_carlo() {
    let (s, k, r, vol, tau): (f64, f64, f64, f64, f64) = (100.0, 100.0, 0.05, 0.2, 1.0);
    let mut rng = seeded(11);
    let n = 1_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        let st = s * ((r - 0.5 * vol * vol) * tau + vol * tau.sqrt() * z).exp();
        let pay = (-r * tau).exp() * (st - k).max(0.0);
        sum += pay;
        sq += pay * pay;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    let c = bs_price(&BsInputs { spot: s, strike: k, rate: r, vol, tau, option_type: OptionType::Call }).unwrap();
    assert!((c - mean).abs() < 3.0 * se, "bs {c} mc {mean} se {se}");
}

#[test]
fn bs_forecast_decays_for_out_of_the_money_options() {
    for (ty, k) in [(OptionType::Call, 120.0), (OptionType::Put, 80.0)] {
        let s = constant_sample(ty, 100.0, k, 200, 1.0);
        let f = bs_forecast(&s, 0.02).unwrap();
        assert_eq!(f.len(), 30);
        assert!(f.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!(f.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{ty}: {f:?}");
        assert!(f[29] < f[0]);
    }
}

#[test]
fn forecasts_clamp_to_intrinsic_at_expiry() {
    let s = constant_sample(OptionType::Call, 105.0, 100.0, 10, 5.5);
    let tau = remaining_tau(&s);
    let expired = tau.iter().position(|t| *t <= 0.0).unwrap();
    assert_eq!(expired, 9);
    let bs = bs_forecast(&s, 0.03).unwrap();
    let hs = heston_forecast(&s, 0.03, &HestonForecastParams::default()).unwrap();
    for h in expired..30 {
        assert_eq!(bs[h], 5.0);
        assert_eq!(hs[h], 5.0);
    }
    assert!(bs[..expired].iter().all(|v| *v > 5.0));
}

#[test]
fn heston_forecast_reduces_to_black_scholes() {
    let dynamics = HestonForecastParams { xi: 0.0, theta: None, ..HestonForecastParams::default() };
    for (ty, k) in [(OptionType::Call, 95.0), (OptionType::Put, 110.0), (OptionType::Call, 130.0)] {
        let s = constant_sample(ty, 100.0, k, 120, 3.0);
        let bs = bs_forecast(&s, 0.03).unwrap();
        let hs = heston_forecast(&s, 0.03, &dynamics).unwrap();
        assert_eq!(hs.len(), 30);
        for (a, b) in bs.iter().zip(&hs) {
            assert!((a - b).abs() < 1e-4, "{ty} K={k}: {a} vs {b}");
        }
        assert_eq!(hs, heston_forecast(&s, 0.03, &dynamics).unwrap());
    }
}

#[test]
fn persistence_cases() {
    let s = constant_sample(OptionType::Put, 100.0, 95.0, 100, 7.5);
    let f = persistence_forecast(&s);
    assert_eq!(f, vec![7.5; 30]);
    let mae = f.iter().zip(&s.target_raw).map(|(p, y)| (p - y).abs()).sum::<f64>();
    assert_eq!(mae, 0.0);
}

#[test]
fn lstm_with_zero_weights_outputs_the_head_bias() {
    let mut m = lstm_forecast_model(LstmConfig::default(), 3);
    for p in m.params.iter_mut() {
        if p.name == "head.b" {
            p.data.iter_mut().enumerate().for_each(|(i, v)| *v = i as f64 * 0.1 - 1.0);
        } else {
            p.data.fill(0.0);
        }
    }
    let s = constant_sample(OptionType::Call, 100.0, 100.0, 150, 4.0);
    let out = m.predict(&s).unwrap();
    let bias = m.params.get("head.b").unwrap().data.clone();
    assert_eq!(out, bias);
}

#[test]
fn lstm_outputs_thirty_finite_values() {
    let m = lstm_forecast_model(LstmConfig::default(), 8);
    let s = constant_sample(OptionType::Put, 90.0, 100.0, 150, 11.0);
    let out = m.forward(&m.params.leaves(false), &s, &mut ForwardCtx::eval(0)).unwrap();
    assert_eq!(out.shape(), &[30]);
    assert!(out.data().iter().all(|v| v.is_finite()));
}

#[test]
fn lstm_gradients_through_five_steps() {
    let cfg = LstmConfig { hidden: 4, n_features: 3, t_y: 2 };
    let m = lstm_forecast_model(cfg, 21);
    let x: Vec<f64> = (0..15).map(|i| ((i * 7) % 5) as f64 * 0.3 - 0.6).collect();
    let mut point = vec![Tensor::param(vec![5, 3], x).unwrap()];
    point.extend(m.params.iter().map(|p| {
        let data = p.data.iter().enumerate().map(|(i, v)| v + 0.05 * ((i % 3) as f64 - 1.0)).collect();
        Tensor::param(p.shape.clone(), data).unwrap()
    }));
    let err = grad_check(
        |t| {
            let leaves = m.params.leaves_from(t[1..].to_vec());
            m.forward_inputs(&leaves, &t[0])?.weighted_sum(&[0.7, -1.3])
        },
        &point,
        1e-6,
    )
    .unwrap();
    assert!(err < 1e-4, "{err}");
}

#[test]
fn lstm_single_cell_step_gradients() {
    let hidden = 3;
    let m = lstm_forecast_model(LstmConfig { hidden, n_features: 2, t_y: 1 }, 5);
    let wh = m.params.get("lstm.wh").unwrap();
    let b = m.params.get("lstm.b").unwrap();
    let point = vec![
        Tensor::param(vec![1, 4 * hidden], (0..12).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap(),
        Tensor::param(vec![1, hidden], vec![0.2, -0.4, 0.1]).unwrap(),
        Tensor::param(vec![1, hidden], vec![-0.3, 0.5, 0.9]).unwrap(),
        Tensor::param(wh.shape.clone(), wh.data.clone()).unwrap(),
        Tensor::param(b.shape.clone(), vec![0.1; 4 * hidden]).unwrap(),
    ];
    let err = grad_check(
        |t| {
            let mut all = m.params.leaves(false).tensors().to_vec();
            all[1] = t[3].clone();
            all[2] = t[4].clone();
            let leaves = m.params.leaves_from(all);
            let (h, c) = lstm_cell_step(&leaves, &t[0], &t[1], &t[2], hidden)?;
            h.add(&c.scale(0.5)?)?.weighted_sum(&[1.0, -2.0, 0.5])
        },
        &point,
        1e-6,
    )
    .unwrap();
    assert!(err < 1e-4, "{err}");
}
