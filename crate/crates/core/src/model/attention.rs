//! Scaled dot-product attention and its ProbSparse approximation.

use crate::rng::counter_uniform;
use crate::tensor::{Tensor, TensorError, TensorResult};

/// Row-major `L_q × L_k` mask allowing key `j` for query `i` iff `j ≤ i`.
pub fn causal_mask(l_q: usize, l_k: usize) -> Vec<bool> {
    (0..l_q).flat_map(|i| (0..l_k).map(move |j| j <= i)).collect()
}

fn check_qkv(q: &Tensor, k: &Tensor, v: &Tensor) -> TensorResult<(usize, usize, usize)> {
    let (l_q, d_q) = q.dims2("attention")?;
    let (l_k, d_k) = k.dims2("attention")?;
    let (l_v, _) = v.dims2("attention")?;
    if d_q != d_k || l_k != l_v {
        return Err(TensorError::Shape {
            op: "attention",
            detail: format!("Q {:?}, K {:?}, V {:?}", q.shape(), k.shape(), v.shape()),
        });
    }
    Ok((l_q, l_k, d_k))
}

/// `softmax(Q·Kᵀ/√d_k)·V` with an optional row-major allow mask. Returns the
/// output and the attention weights.
pub fn attention_weights(q: &Tensor, k: &Tensor, v: &Tensor, mask: Option<&[bool]>) -> TensorResult<(Tensor, Tensor)> {
    let (_, _, d_k) = check_qkv(q, k, v)?;
    let scores = q.matmul(&k.transpose()?)?.scale(1.0 / (d_k as f64).sqrt())?;
    let weights = match mask {
        Some(m) => scores.softmax_rows_masked(m)?,
        None => scores.softmax_rows()?,
    };
    Ok((weights.matmul(v)?, weights))
}

pub fn scaled_dot_attention(q: &Tensor, k: &Tensor, v: &Tensor, mask: Option<&[bool]>) -> TensorResult<Tensor> {
    attention_weights(q, k, v, mask).map(|(out, _)| out)
}

/// Max-minus-mean sparsity measurement of each query against the sampled
/// keys: `M(q) = max_j s_j − mean_j s_j`, `s_j = ⟨q, k_j⟩/√d`.
pub fn sparsity_scores(q: &Tensor, k_sampled: &Tensor) -> TensorResult<Vec<f64>> {
    let (l_q, d) = q.dims2("sparsity_scores")?;
    let (n, d_k) = k_sampled.dims2("sparsity_scores")?;
    if d != d_k {
        return Err(TensorError::Shape {
            op: "sparsity_scores",
            detail: format!("{:?} vs {:?}", q.shape(), k_sampled.shape()),
        });
    }
    let scale = 1.0 / (d as f64).sqrt();
    Ok((0..l_q)
        .map(|i| {
            let qi = q.row(i);
            let (mut max, mut sum) = (f64::NEG_INFINITY, 0.0);
            for j in 0..n {
                let s = qi.iter().zip(k_sampled.row(j)).map(|(a, b)| a * b).sum::<f64>() * scale;
                max = max.max(s);
                sum += s;
            }
            // Guard the (rounding-level) negative case so M ≥ 0 holds.
            (max - sum / n as f64).max(0.0)
        })
        .collect())
}

/// `factor·⌈ln n⌉`, at least 1.
pub fn log_budget(factor: usize, n: usize) -> usize {
    (factor * (n as f64).ln().ceil() as usize).max(1)
}

/// Number of active queries for a query length `l_q`.
pub fn active_queries(factor: usize, l_q: usize) -> usize {
    log_budget(factor, l_q).min(l_q)
}

/// ProbSparse selection for one head: indices of the active queries in
/// ascending order.
pub fn select_queries(q: &Tensor, k: &Tensor, factor: usize, seed: u64) -> TensorResult<Vec<usize>> {
    let (l_q, _) = q.dims2("probsparse")?;
    let (l_k, _) = k.dims2("probsparse")?;
    let u = active_queries(factor, l_q);
    let n_sample = log_budget(factor, l_k);
    let sampled: Vec<usize> =
        (0..n_sample as u64).map(|i| ((counter_uniform(seed, i) * l_k as f64) as usize).min(l_k - 1)).collect();
    let m = sparsity_scores(q, &k.detach().select_rows(&sampled)?)?;
    let mut order: Vec<usize> = (0..l_q).collect();
    order.sort_by(|&a, &b| m[b].total_cmp(&m[a]).then(a.cmp(&b)));
    let mut top = order[..u].to_vec();
    top.sort_unstable();
    Ok(top)
}

/// ProbSparse attention. Active queries attend exactly over all keys; lazy
/// queries receive the mean of the value rows (the running mean over the
/// allowed prefix when `causal`). With every query active the result is
/// exactly [`scaled_dot_attention`].
pub fn probsparse_attention(
    q: &Tensor,
    k: &Tensor,
    v: &Tensor,
    factor: usize,
    seed: u64,
    causal: bool,
) -> TensorResult<Tensor> {
    probsparse_weights(q, k, v, factor, seed, causal).map(|(out, _)| out)
}

/// As [`probsparse_attention`], also returning the effective weight rows.
pub fn probsparse_weights(
    q: &Tensor,
    k: &Tensor,
    v: &Tensor,
    factor: usize,
    seed: u64,
    causal: bool,
) -> TensorResult<(Tensor, Vec<Vec<f64>>)> {
    if factor == 0 {
        return Err(TensorError::Invalid { op: "probsparse", detail: "factor must be ≥ 1".into() });
    }
    let (l_q, l_k, _) = check_qkv(q, k, v)?;
    let full_mask = causal.then(|| causal_mask(l_q, l_k));
    if active_queries(factor, l_q) >= l_q {
        let (out, w) = attention_weights(q, k, v, full_mask.as_deref())?;
        let rows = (0..l_q).map(|i| w.row(i).to_vec()).collect();
        return Ok((out, rows));
    }
    let active = select_queries(q, k, factor, seed)?;
    let mut is_active = vec![false; l_q];
    active.iter().for_each(|&i| is_active[i] = true);
    let lazy: Vec<usize> = (0..l_q).filter(|&i| !is_active[i]).collect();

    let q_act = q.select_rows(&active)?;
    let mask_act: Option<Vec<bool>> =
        causal.then(|| active.iter().flat_map(|&i| (0..l_k).map(move |j| j <= i)).collect());
    let (out_act, w_act) = attention_weights(&q_act, k, v, mask_act.as_deref())?;

    let lazy_rows: Vec<Vec<f64>> = lazy
        .iter()
        .map(|&i| {
            let support = if causal { (i + 1).min(l_k) } else { l_k };
            let w = 1.0 / support as f64;
            (0..l_k).map(|j| if j < support { w } else { 0.0 }).collect()
        })
        .collect();

    let mut weights = vec![Vec::new(); l_q];
    for (r, &i) in active.iter().enumerate() {
        weights[i] = w_act.row(r).to_vec();
    }
    for (r, &i) in lazy.iter().enumerate() {
        weights[i] = lazy_rows[r].clone();
    }
    if lazy.is_empty() {
        return Ok((out_act, weights));
    }
    let averaging = Tensor::from_rows(&lazy_rows)?;
    let out_lazy = averaging.matmul(v)?;
    // Rows of [active; lazy] back into query order.
    let mut position = vec![0; l_q];
    for (r, &i) in active.iter().chain(&lazy).enumerate() {
        position[i] = r;
    }
    let out = Tensor::cat(&[out_act, out_lazy], 0)?.select_rows(&position)?;
    Ok((out, weights))
}
