use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::rng::seeded;

fn m(rows: &[&[f64]]) -> Tensor {
    Tensor::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn random(shape: Vec<usize>, seed: u64, scale: f64) -> Tensor {
    let mut rng = seeded(seed);
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
    Tensor::constant(shape, data).unwrap()
}

#[test]
fn matmul_examples() {
    let eye = m(&[&[1.0, 0.0], &[0.0, 1.0]]);
    let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
    assert_eq!(eye.matmul(&a).unwrap().data(), a.data());
    let z = m(&[&[0.0], &[0.0]]);
    assert_eq!(eye.matmul(&z).unwrap().data(), &[0.0, 0.0]);
    let b = m(&[&[5.0], &[6.0]]);
    let c = a.matmul(&b).unwrap();
    assert_eq!(c.shape(), &[2, 1]);
    assert_eq!(c.data(), &[17.0, 39.0]);
}

#[test]
fn matmul_rejects_inner_mismatch() {
    let a = m(&[&[1.0, 2.0]]);
    let err = a.matmul(&a).unwrap_err();
    assert!(matches!(err, TensorError::Shape { op: "matmul", .. }));
}

#[test]
fn softmax_examples() {
    let s = m(&[&[0.0, 0.0, 0.0]]).softmax_rows().unwrap();
    for v in s.data() {
        assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-15);
    }
    let s = m(&[&[1000.0, 0.0]]).softmax_rows().unwrap();
    assert_abs_diff_eq!(s.data()[0], 1.0, epsilon = 1e-12);
    assert!(s.data()[1] < 1e-300);
    // 1/(1+e) and e/(1+e), evaluated directly.
    let e = std::f64::consts::E;
    let s = m(&[&[1.0, 2.0]]).softmax_rows().unwrap();
    assert_abs_diff_eq!(s.data()[0], 1.0 / (1.0 + e), epsilon = 1e-12);
    assert_abs_diff_eq!(s.data()[0], 0.26894, epsilon = 1e-5);
    assert_abs_diff_eq!(s.data()[1], 0.73106, epsilon = 1e-5);
}

#[test]
fn masked_softmax_zeroes_disallowed() {
    let x = m(&[&[1.0, 2.0, 3.0]]);
    let s = x.softmax_rows_masked(&[true, true, false]).unwrap();
    assert_eq!(s.data()[2], 0.0);
    assert_abs_diff_eq!(s.data()[0] + s.data()[1], 1.0, epsilon = 1e-15);
    assert!(x.softmax_rows_masked(&[false, false, false]).is_err());
}

#[test]
fn elementwise_examples() {
    let x = Tensor::constant(vec![3], vec![-1.0, 0.0, 2.0]).unwrap();
    assert_eq!(x.relu().unwrap().data(), &[0.0, 0.0, 2.0]);
    assert_eq!(m(&[&[2.0, 4.0]]).mean(1).unwrap().data(), &[3.0]);
    let a = Tensor::constant(vec![1], vec![1.0]).unwrap();
    let b = Tensor::constant(vec![2], vec![2.0, 3.0]).unwrap();
    let c = a.concat(&b, 0).unwrap();
    assert_eq!(c.shape(), &[3]);
    assert_eq!(c.data(), &[1.0, 2.0, 3.0]);
    let e = Tensor::constant(vec![2], vec![-1.0, 1.0]).unwrap().elu().unwrap();
    assert_abs_diff_eq!(e.data()[0], (-1.0f64).exp() - 1.0, epsilon = 1e-15);
    assert_eq!(e.data()[1], 1.0);
}

#[test]
fn concat_matrices_both_axes() {
    let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
    let b = m(&[&[5.0], &[6.0]]);
    let c = a.concat(&b, 1).unwrap();
    assert_eq!(c.shape(), &[2, 3]);
    assert_eq!(c.data(), &[1.0, 2.0, 5.0, 3.0, 4.0, 6.0]);
    let d = a.concat(&m(&[&[7.0, 8.0]]), 0).unwrap();
    assert_eq!(d.shape(), &[3, 2]);
    assert_eq!(d.data(), &[1.0, 2.0, 3.0, 4.0, 7.0, 8.0]);
    assert!(a.concat(&b, 0).is_err());
}

#[test]
fn relu_gradient_at_zero_is_zero() {
    let x = Tensor::param(vec![3], vec![-1.0, 0.0, 2.0]).unwrap();
    x.relu().unwrap().sum().unwrap().backward().unwrap();
    assert_eq!(x.grad().unwrap(), vec![0.0, 0.0, 1.0]);
}

#[test]
fn max_pool_examples() {
    let col = |v: &[f64]| Tensor::constant(vec![v.len(), 1], v.to_vec()).unwrap();
    assert_eq!(col(&[1.0, 3.0, 2.0, 0.0]).max_pool_1d().unwrap().data(), &[3.0, 2.0]);
    assert_eq!(col(&[4.0]).max_pool_1d().unwrap().data(), &[4.0]);
    assert_eq!(col(&[5.0, 1.0, 4.0, 4.0, 9.0]).max_pool_1d().unwrap().data(), &[5.0, 4.0, 9.0]);
}

#[test]
fn max_pool_routes_gradient_to_argmax() {
    let x = Tensor::param(vec![3, 1], vec![1.0, 3.0, 2.0]).unwrap();
    x.max_pool_1d().unwrap().sum().unwrap().backward().unwrap();
    assert_eq!(x.grad().unwrap(), vec![0.0, 1.0, 1.0]);
}

#[test]
fn dropout_examples() {
    let x = random(vec![8, 8], 1, 1.0);
    assert_eq!(x.dropout(0.0, 9, true).unwrap().data(), x.data());
    assert_eq!(x.dropout(0.06, 9, false).unwrap().data(), x.data());
    let a = x.dropout(0.5, 9, true).unwrap();
    let b = x.dropout(0.5, 9, true).unwrap();
    assert_eq!(a.data(), b.data());
    let zeros = a.data().iter().filter(|v| **v == 0.0).count();
    assert!(zeros > 10 && zeros < 54, "{zeros} zeros");
    for (o, i) in a.data().iter().zip(x.data()) {
        assert!(*o == 0.0 || (*o - 2.0 * i).abs() < 1e-15);
    }
    assert!(x.dropout(1.0, 9, true).is_err());
}

#[test]
fn backward_examples() {
    let x = Tensor::param(vec![2], vec![1.0, 2.0]).unwrap();
    x.mul(&x).unwrap().sum().unwrap().backward().unwrap();
    assert_eq!(x.grad().unwrap(), vec![2.0, 4.0]);

    // constant loss: c + 0·x
    let x = Tensor::param(vec![2], vec![1.0, 2.0]).unwrap();
    let loss = x.scale(0.0).unwrap().sum().unwrap();
    loss.backward().unwrap();
    assert_eq!(x.grad().unwrap(), vec![0.0, 0.0]);

    let v = Tensor::param(vec![2], vec![1.0, 2.0]).unwrap();
    assert!(matches!(v.backward(), Err(TensorError::NotScalar(_))));
}

#[test]
fn non_finite_rejected() {
    assert!(matches!(Tensor::constant(vec![1], vec![f64::NAN]), Err(TensorError::NonFinite { .. })));
    let big = Tensor::constant(vec![1, 1], vec![1e200]).unwrap();
    assert!(matches!(big.matmul(&big), Err(TensorError::NonFinite { op: "matmul" })));
}

#[test]
fn grad_check_examples() {
    let x = Tensor::scalar(3.0).unwrap();
    let err = grad_check(|p| p[0].mul(&p[0])?.sum(), &[x], 1e-5).unwrap();
    assert!(err < 1e-8, "{err}");

    let x = Tensor::constant(vec![3], vec![-2.0, 1.5, 4.0]).unwrap();
    let err = grad_check(|p| p[0].relu()?.sum(), &[x], 1e-5).unwrap();
    assert!(err < 1e-8, "{err}");

    // softmax followed by a cross-entropy-like weighting on a random 4×4
    let x = random(vec![4, 4], 3, 2.0);
    let w: Vec<f64> = (0..16).map(|i| (i % 5) as f64 - 2.0).collect();
    let err = grad_check(|p| p[0].softmax_rows()?.weighted_sum(&w), &[x], 1e-5).unwrap();
    assert!(err < 1e-4, "{err}");
}

#[test]
fn every_primitive_passes_grad_check() {
    for seed in 0..10 {
        let a = random(vec![3, 4], seed, 1.0);
        let b = random(vec![4, 2], seed + 100, 1.0);
        let bias = random(vec![4], seed + 200, 1.0);
        let gain = random(vec![4], seed + 300, 1.0);
        let w: Vec<f64> = (0..12).map(|i| ((i * 7 + seed as usize) % 5) as f64 - 2.0).collect();
        let w6: Vec<f64> = w[..6].to_vec();
        let w3: Vec<f64> = w[..3].to_vec();
        let w4: Vec<f64> = w[..4].to_vec();
        let checks: Vec<(&str, f64)> = vec![
            ("matmul", grad_check(|p| p[0].matmul(&p[1])?.weighted_sum(&w6), &[a.clone(), b.clone()], 1e-5).unwrap()),
            ("transpose", grad_check(|p| p[0].transpose()?.weighted_sum(&w), std::slice::from_ref(&a), 1e-5).unwrap()),
            (
                "add_row",
                grad_check(|p| p[0].add_row(&p[1])?.weighted_sum(&w), &[a.clone(), bias.clone()], 1e-5).unwrap(),
            ),
            ("mul", grad_check(|p| p[0].mul(&p[0].tanh()?)?.weighted_sum(&w), std::slice::from_ref(&a), 1e-5).unwrap()),
            ("sigmoid", grad_check(|p| p[0].sigmoid()?.weighted_sum(&w), std::slice::from_ref(&a), 1e-5).unwrap()),
            ("elu", grad_check(|p| p[0].elu()?.weighted_sum(&w), std::slice::from_ref(&a), 1e-5).unwrap()),
            ("mean0", grad_check(|p| p[0].mean(0)?.weighted_sum(&w4), std::slice::from_ref(&a), 1e-5).unwrap()),
            ("mean1", grad_check(|p| p[0].mean(1)?.weighted_sum(&w3), std::slice::from_ref(&a), 1e-5).unwrap()),
            (
                "slice",
                grad_check(
                    |p| p[0].slice_rows(1, 3)?.slice_cols(1, 4)?.weighted_sum(&w6),
                    std::slice::from_ref(&a),
                    1e-5,
                )
                .unwrap(),
            ),
            (
                "select",
                grad_check(|p| p[0].select_rows(&[2, 0, 2])?.weighted_sum(&w), std::slice::from_ref(&a), 1e-5).unwrap(),
            ),
            (
                "pool",
                grad_check(|p| p[0].max_pool_1d()?.weighted_sum(&w[..8]), std::slice::from_ref(&a), 1e-5).unwrap(),
            ),
            (
                "cat",
                grad_check(
                    |p| Tensor::cat(&[p[0].clone(), p[0].scale(2.0)?], 1)?.slice_cols(2, 6)?.weighted_sum(&w),
                    std::slice::from_ref(&a),
                    1e-5,
                )
                .unwrap(),
            ),
            (
                "layer_norm",
                grad_check(
                    |p| p[0].layer_norm(&p[1], &p[2], 1e-5)?.weighted_sum(&w),
                    &[a.clone(), gain.clone(), bias.clone()],
                    1e-5,
                )
                .unwrap(),
            ),
            (
                "dropout",
                grad_check(|p| p[0].dropout(0.3, seed, true)?.weighted_sum(&w), std::slice::from_ref(&a), 1e-5)
                    .unwrap(),
            ),
        ];
        for (name, err) in checks {
            assert!(err < 1e-6, "{name} seed {seed}: {err}");
        }
    }
}

#[test]
fn shared_subexpression_accumulates() {
    let x = Tensor::param(vec![1], vec![3.0]).unwrap();
    let y = x.mul(&x).unwrap();
    let z = y.add(&y).unwrap().add(&x).unwrap();
    z.sum().unwrap().backward().unwrap();
    // d/dx (2x² + x) = 4x + 1
    assert_eq!(x.grad().unwrap(), vec![13.0]);
}

proptest! {
    #[test]
    fn softmax_rows_sum_to_one(vals in proptest::collection::vec(-1e3f64..1e3, 1..40), cols in 1usize..8) {
        let rows = vals.len() / cols;
        prop_assume!(rows >= 1);
        let x = Tensor::constant(vec![rows, cols], vals[..rows * cols].to_vec()).unwrap();
        let s = x.softmax_rows().unwrap();
        for r in 0..rows {
            let total: f64 = s.row(r).iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(s.row(r).iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn max_pool_length_is_half_rounded_up(l in 1usize..=64) {
        let x = Tensor::constant(vec![l, 2], (0..2 * l).map(|i| i as f64).collect()).unwrap();
        prop_assert_eq!(x.max_pool_1d().unwrap().shape()[0], l.div_ceil(2));
    }

    #[test]
    fn eval_dropout_is_bitwise_identity(vals in proptest::collection::vec(-1e6f64..1e6, 1..64), seed: u64, rate in 0.0f64..0.99) {
        let x = Tensor::constant(vec![vals.len()], vals.clone()).unwrap();
        let y = x.dropout(rate, seed, false).unwrap();
        prop_assert!(y.data().iter().zip(&vals).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn matmul_is_associative(seed: u64) {
        let a = random(vec![4, 4], seed, 1.0);
        let b = random(vec![4, 4], seed ^ 1, 1.0);
        let c = random(vec![4, 4], seed ^ 2, 1.0);
        let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
        let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
        for (x, y) in left.data().iter().zip(right.data()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
