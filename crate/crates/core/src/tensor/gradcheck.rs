use rand::seq::index::sample;

use super::{Tensor, TensorError, TensorResult};
use crate::rng::seeded;

/// Compare reverse-mode gradients of a scalar function against central
/// differences over every input coordinate.
///
/// Returns `max |analytic − numeric| / max(1, |analytic|)`.
pub fn grad_check<F>(f: F, point: &[Tensor], eps: f64) -> TensorResult<f64>
where
    F: Fn(&[Tensor]) -> TensorResult<Tensor>,
{
    let coords: Vec<(usize, usize)> =
        point.iter().enumerate().flat_map(|(t, x)| (0..x.numel()).map(move |i| (t, i))).collect();
    check_coords(&f, point, eps, &coords)
}

/// Like [`grad_check`] but only probes `max_coords` coordinates drawn
/// uniformly without replacement (seeded). Used where the full sweep would
/// need tens of thousands of forward passes.
pub fn grad_check_sampled<F>(f: F, point: &[Tensor], eps: f64, max_coords: usize, seed: u64) -> TensorResult<f64>
where
    F: Fn(&[Tensor]) -> TensorResult<Tensor>,
{
    let all: Vec<(usize, usize)> =
        point.iter().enumerate().flat_map(|(t, x)| (0..x.numel()).map(move |i| (t, i))).collect();
    if all.len() <= max_coords {
        return check_coords(&f, point, eps, &all);
    }
    let mut rng = seeded(seed);
    let mut picked: Vec<usize> = sample(&mut rng, all.len(), max_coords).into_vec();
    picked.sort_unstable();
    let coords: Vec<_> = picked.into_iter().map(|i| all[i]).collect();
    check_coords(&f, point, eps, &coords)
}

fn check_coords<F>(f: &F, point: &[Tensor], eps: f64, coords: &[(usize, usize)]) -> TensorResult<f64>
where
    F: Fn(&[Tensor]) -> TensorResult<Tensor>,
{
    let leaves: Vec<Tensor> =
        point.iter().map(|x| Tensor::param(x.shape().to_vec(), x.data().to_vec())).collect::<TensorResult<_>>()?;
    let loss = f(&leaves)?;
    if loss.numel() != 1 {
        return Err(TensorError::NotScalar(loss.shape().to_vec()));
    }
    loss.backward()?;
    let analytic: Vec<Vec<f64>> = leaves.iter().map(|l| l.grad().unwrap_or_else(|| vec![0.0; l.numel()])).collect();

    let eval = |t: usize, i: usize, delta: f64| -> TensorResult<f64> {
        let inputs: Vec<Tensor> = point
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let mut d = x.data().to_vec();
                if k == t {
                    d[i] += delta;
                }
                Tensor::constant(x.shape().to_vec(), d)
            })
            .collect::<TensorResult<_>>()?;
        Ok(f(&inputs)?.data()[0])
    };

    let mut worst: f64 = 0.0;
    for &(t, i) in coords {
        let numeric = (eval(t, i, eps)? - eval(t, i, -eps)?) / (2.0 * eps);
        let a = analytic[t][i];
        worst = worst.max((a - numeric).abs() / a.abs().max(1.0));
    }
    Ok(worst)
}
