//! ProbSparse attention against full attention: with every query active the
//! two agree exactly; otherwise lazy queries receive the mean of the values.

use informer_options::model::{active_queries, probsparse_attention, scaled_dot_attention, select_queries};
use informer_options::rng::seeded;
use informer_options::tensor::{Tensor, TensorResult};
use rand::Rng;

fn random(rows: usize, cols: usize, seed: u64) -> TensorResult<Tensor> {
    let mut rng = seeded(seed);
    Tensor::constant(vec![rows, cols], (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn main() -> TensorResult<()> {
    for (l, factor) in [(6, 3), (64, 1), (64, 3), (96, 5)] {
        let (q, k, v) = (random(l, 8, 1)?, random(l, 8, 2)?, random(l, 8, 3)?);
        let full = scaled_dot_attention(&q, &k, &v, None)?;
        let sparse = probsparse_attention(&q, &k, &v, factor, 9, false)?;
        let active = select_queries(&q, &k, factor, 9)?;
        println!(
            "L = {l:3}, factor {factor}: {:2} of {l} queries active (budget {}), max |full − sparse| = {:.3e}",
            active.len(),
            active_queries(factor, l),
            max_diff(full.data(), sparse.data())
        );
    }
    Ok(())
}
