use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::data::parse_chain;
use crate::rng::derive_index;

#[test]
fn constant_variance_without_vol_of_vol() {
    let p = HestonParams { xi: 0.0, v0: 0.05, theta: 0.05, ..HestonParams::default() };
    let path = simulate_heston(&p, 300, 1.0 / 252.0, 11).unwrap();
    assert_eq!(path.len(), 300);
    assert!(path.variance.iter().all(|v| (v - 0.05).abs() < 1e-15));
}

#[test]
fn zero_vol_of_vol_is_geometric_brownian_motion() {
    let p = HestonParams { xi: 0.0, v0: 0.09, theta: 0.09, ..HestonParams::default() };
    let dt = 1.0 / 252.0;
    let path = simulate_heston(&p, 200, dt, 5).unwrap();
    // Replay the same normal stream through the GBM recurrence.
    let mut rng = seeded(5);
    let mut s = p.s0;
    for t in 1..200 {
        let z1: f64 = rng.sample(StandardNormal);
        let _: f64 = rng.sample(StandardNormal);
        s *= ((p.r - 0.5 * 0.09) * dt + (0.09 * dt).sqrt() * z1).exp();
        assert!((path.spot[t] - s).abs() < 1e-9 * s);
    }
}

#[test]
fn spot_is_a_discounted_martingale() {
    let p = HestonParams::default();
    let (n_paths, steps, dt) = (100_000u64, 64usize, 1.0 / 128.0);
    let horizon = (steps as f64) * dt;
    let finals: Vec<f64> = (0..n_paths)
        .map(|i| *simulate_heston(&p, steps + 1, dt, derive_index(99, i)).unwrap().spot.last().unwrap())
        .collect();
    let mean = finals.iter().sum::<f64>() / n_paths as f64;
    let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n_paths - 1) as f64;
    let se = (var / n_paths as f64).sqrt();
    let expected = p.s0 * (p.r * horizon).exp();
    assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected} (se {se})");
}

#[test]
fn simulation_is_deterministic() {
    let p = HestonParams::default();
    assert_eq!(simulate_heston(&p, 50, 1.0 / 252.0, 3).unwrap(), simulate_heston(&p, 50, 1.0 / 252.0, 3).unwrap());
    assert!(simulate_heston(&p, 0, 1.0 / 252.0, 3).is_err());
    assert!(simulate_heston(&HestonParams { rho: -2.0, ..p }, 5, 1.0 / 252.0, 3).is_err());
}

fn small_scenario() -> Scenario {
    Scenario { n_days: 40, ..Scenario::default() }
}

#[test]
fn first_day_quote_matches_pricer() {
    let sc = small_scenario();
    let chain = sc.generate(1).unwrap();
    let first = chain[0].quote_date;
    let s0 = sc.heston.s0;
    // Strikes at listing are multiples of s0 = 100, so K = 90 / 110 exist.
    for rec in chain.iter().filter(|r| r.quote_date == first && r.option_type == OptionType::Call) {
        let expected = heston_price(&sc.heston, rec.strike, rec.ttm_years(), OptionType::Call).unwrap();
        assert!((rec.mid_price - expected.max(0.0)).abs() < 1e-12);
        assert_eq!(rec.underlying_price, s0);
        assert!((rec.implied_vol - sc.heston.v0.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn deep_out_of_the_money_short_put_is_cheap() {
    let pricer = HestonQuotePricer { params: HestonParams::default() };
    let p = pricer.price(100.0, 0.04, 60.0, 20.0 / 365.0, OptionType::Put).unwrap();
    // Quadrature noise may leave a value a hair below zero.
    assert!(p > -1e-6 && p < 0.01 * 60.0, "{p}");
}

#[test]
fn csv_round_trip_and_byte_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let chain = small_scenario().generate(8).unwrap();
    assert!(chain.iter().any(|r| r.volume == 0));
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_chain_csv(&chain, &a).unwrap();
    write_chain_csv(&small_scenario().generate(8).unwrap(), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let parsed = parse_chain(&a).unwrap();
    assert!(parsed.rejected.is_empty());
    assert_eq!(parsed.records, chain);
}

#[test]
fn header_only_and_single_record_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.csv");
    write_chain_csv(&[], &p).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 1);
    let one = small_scenario().generate(2).unwrap().remove(0);
    write_chain_csv(std::slice::from_ref(&one), &p).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 2);
    assert_eq!(parse_chain(&p).unwrap().records, vec![one]);
}

#[test]
fn thousand_records_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("k.csv");
    let chain: Vec<_> =
        Scenario { n_days: 120, ..Scenario::default() }.generate(4).unwrap().into_iter().take(1000).collect();
    assert_eq!(chain.len(), 1000);
    write_chain_csv(&chain, &p).unwrap();
    assert_eq!(parse_chain(&p).unwrap().records, chain);
}

#[test]
fn calls_monotone_in_strike_and_parity_holds() {
    let sc = Scenario { n_days: 60, ..Scenario::default() };
    let chain = sc.generate(6).unwrap();
    let mut calls: BTreeMap<(NaiveDate, NaiveDate), Vec<(f64, f64)>> = BTreeMap::new();
    let mut puts: BTreeMap<(NaiveDate, NaiveDate, i64), f64> = BTreeMap::new();
    for r in &chain {
        match r.option_type {
            OptionType::Call => calls.entry((r.quote_date, r.expiry_date)).or_default().push((r.strike, r.mid_price)),
            OptionType::Put => {
                puts.insert((r.quote_date, r.expiry_date, (r.strike * 1e6) as i64), r.mid_price);
            }
        }
    }
    let mut parity_checked = 0;
    for ((day, expiry), mut row) in calls {
        row.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in row.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-8, "{day} {expiry}: {w:?}");
        }
        let spot = chain.iter().find(|r| r.quote_date == day).unwrap().underlying_price;
        let tau = (expiry - day).num_days() as f64 / 365.0;
        for (k, c) in row {
            let p = puts[&(day, expiry, (k * 1e6) as i64)];
            if c > 0.0 && p > 0.0 {
                let resid = c - p - spot + k * (-sc.heston.r * tau).exp();
                assert!(resid.abs() < 1e-6, "{day} K={k}: {resid}");
                parity_checked += 1;
            }
        }
    }
    assert!(parity_checked > 100);
}
