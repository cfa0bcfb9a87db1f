use super::{ParentGrads, Tensor, TensorError, TensorResult};
use crate::rng::counter_uniform;

fn mismatch(op: &'static str, a: &[usize], b: &[usize]) -> TensorError {
    TensorError::Shape { op, detail: format!("{a:?} vs {b:?}") }
}

fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> TensorResult<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(mismatch(op, a.shape(), b.shape()))
    }
}

/// `c[m×n] = a[m×k] · b[k×n]`.
fn gemm(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        let crow = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (cv, bv) in crow.iter_mut().zip(brow) {
                *cv += aip * bv;
            }
        }
    }
    c
}

/// `c[m×k] = g[m×n] · bᵀ` where `b` is `k×n`.
fn gemm_bt(g: &[f64], b: &[f64], m: usize, n: usize, k: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * k];
    for i in 0..m {
        let grow = &g[i * n..(i + 1) * n];
        for p in 0..k {
            let brow = &b[p * n..(p + 1) * n];
            c[i * k + p] = grow.iter().zip(brow).map(|(x, y)| x * y).sum();
        }
    }
    c
}

/// `c[k×n] = aᵀ · g` where `a` is `m×k` and `g` is `m×n`.
fn gemm_at(a: &[f64], g: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; k * n];
    for i in 0..m {
        let grow = &g[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let crow = &mut c[p * n..(p + 1) * n];
            for (cv, gv) in crow.iter_mut().zip(grow) {
                *cv += aip * gv;
            }
        }
    }
    c
}

fn unary(
    x: &Tensor,
    op: &'static str,
    f: impl Fn(f64) -> f64,
    // derivative from (input, output)
    df: impl Fn(f64, f64) -> f64 + 'static,
) -> TensorResult<Tensor> {
    let data: Vec<f64> = x.data().iter().map(|&v| f(v)).collect();
    Tensor::from_op(
        op,
        x.shape().to_vec(),
        data,
        vec![x.clone()],
        Box::new(move |a| {
            let input = a.parents[0].data();
            let g = a.grad.iter().zip(input.iter().zip(a.out)).map(|(g, (&i, &o))| g * df(i, o)).collect();
            vec![Some(g)]
        }),
    )
}

impl Tensor {
    /// Matrix product of two 2-D tensors.
    pub fn matmul(&self, other: &Tensor) -> TensorResult<Tensor> {
        let (m, k) = self.dims2("matmul")?;
        let (k2, n) = other.dims2("matmul")?;
        if k != k2 {
            return Err(mismatch("matmul", self.shape(), other.shape()));
        }
        let data = gemm(self.data(), other.data(), m, k, n);
        Tensor::from_op(
            "matmul",
            vec![m, n],
            data,
            vec![self.clone(), other.clone()],
            Box::new(move |a| {
                let (lhs, rhs) = (&a.parents[0], &a.parents[1]);
                let ga = lhs.requires_grad().then(|| gemm_bt(a.grad, rhs.data(), m, n, k));
                let gb = rhs.requires_grad().then(|| gemm_at(lhs.data(), a.grad, m, k, n));
                vec![ga, gb]
            }),
        )
    }

    pub fn transpose(&self) -> TensorResult<Tensor> {
        let (m, n) = self.dims2("transpose")?;
        let src = self.data();
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                data[j * m + i] = src[i * n + j];
            }
        }
        Tensor::from_op(
            "transpose",
            vec![n, m],
            data,
            vec![self.clone()],
            Box::new(move |a| {
                let mut g = vec![0.0; m * n];
                for j in 0..n {
                    for i in 0..m {
                        g[i * n + j] = a.grad[j * m + i];
                    }
                }
                vec![Some(g)]
            }),
        )
    }

    pub fn add(&self, other: &Tensor) -> TensorResult<Tensor> {
        same_shape("add", self, other)?;
        let data = self.data().iter().zip(other.data()).map(|(a, b)| a + b).collect();
        Tensor::from_op(
            "add",
            self.shape().to_vec(),
            data,
            vec![self.clone(), other.clone()],
            Box::new(|a| vec![Some(a.grad.to_vec()), Some(a.grad.to_vec())]),
        )
    }

    pub fn sub(&self, other: &Tensor) -> TensorResult<Tensor> {
        same_shape("sub", self, other)?;
        let data = self.data().iter().zip(other.data()).map(|(a, b)| a - b).collect();
        Tensor::from_op(
            "sub",
            self.shape().to_vec(),
            data,
            vec![self.clone(), other.clone()],
            Box::new(|a| vec![Some(a.grad.to_vec()), Some(a.grad.iter().map(|g| -g).collect())]),
        )
    }

    /// Elementwise product.
    pub fn mul(&self, other: &Tensor) -> TensorResult<Tensor> {
        same_shape("mul", self, other)?;
        let data = self.data().iter().zip(other.data()).map(|(a, b)| a * b).collect();
        Tensor::from_op(
            "mul",
            self.shape().to_vec(),
            data,
            vec![self.clone(), other.clone()],
            Box::new(|a| {
                let (x, y) = (a.parents[0].data(), a.parents[1].data());
                let gx = a.grad.iter().zip(y).map(|(g, v)| g * v).collect();
                let gy = a.grad.iter().zip(x).map(|(g, v)| g * v).collect();
                vec![Some(gx), Some(gy)]
            }),
        )
    }

    /// Adds a length-`n` vector to every row of an `m×n` matrix.
    pub fn add_row(&self, bias: &Tensor) -> TensorResult<Tensor> {
        let (m, n) = self.dims2("add_row")?;
        if bias.numel() != n {
            return Err(mismatch("add_row", self.shape(), bias.shape()));
        }
        let mut data = self.data().to_vec();
        for row in data.chunks_mut(n) {
            row.iter_mut().zip(bias.data()).for_each(|(x, b)| *x += b);
        }
        Tensor::from_op(
            "add_row",
            vec![m, n],
            data,
            vec![self.clone(), bias.clone()],
            Box::new(move |a| {
                let mut gb = vec![0.0; n];
                for row in a.grad.chunks(n) {
                    gb.iter_mut().zip(row).for_each(|(s, g)| *s += g);
                }
                vec![Some(a.grad.to_vec()), Some(gb)]
            }),
        )
    }

    pub fn scale(&self, c: f64) -> TensorResult<Tensor> {
        unary(self, "scale", move |v| v * c, move |_, _| c)
    }

    /// Rectified linear unit; the derivative at exactly 0 is 0.
    pub fn relu(&self) -> TensorResult<Tensor> {
        unary(self, "relu", |v| v.max(0.0), |i, _| if i > 0.0 { 1.0 } else { 0.0 })
    }

    /// Exponential linear unit with α = 1.
    pub fn elu(&self) -> TensorResult<Tensor> {
        unary(self, "elu", |v| if v > 0.0 { v } else { v.exp_m1() }, |i, o| if i > 0.0 { 1.0 } else { o + 1.0 })
    }

    pub fn sigmoid(&self) -> TensorResult<Tensor> {
        unary(
            self,
            "sigmoid",
            |v| {
                if v >= 0.0 {
                    1.0 / (1.0 + (-v).exp())
                } else {
                    let e = v.exp();
                    e / (1.0 + e)
                }
            },
            |_, o| o * (1.0 - o),
        )
    }

    pub fn tanh(&self) -> TensorResult<Tensor> {
        unary(self, "tanh", f64::tanh, |_, o| 1.0 - o * o)
    }

    /// Row-wise softmax, stabilised by subtracting each row's maximum.
    pub fn softmax_rows(&self) -> TensorResult<Tensor> {
        self.softmax_impl(None)
    }

    /// Row-wise softmax restricted to the entries where `allowed` is true;
    /// disallowed entries get weight exactly 0.
    pub fn softmax_rows_masked(&self, allowed: &[bool]) -> TensorResult<Tensor> {
        if allowed.len() != self.numel() {
            return Err(TensorError::Shape {
                op: "softmax_rows_masked",
                detail: format!("mask has {} entries for {:?}", allowed.len(), self.shape()),
            });
        }
        self.softmax_impl(Some(allowed))
    }

    fn softmax_impl(&self, allowed: Option<&[bool]>) -> TensorResult<Tensor> {
        let (m, n) = self.dims2("softmax_rows")?;
        let x = self.data();
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let ok = |j: usize| allowed.is_none_or(|mask| mask[i * n + j]);
            let row = &x[i * n..(i + 1) * n];
            let max = (0..n).filter(|&j| ok(j)).map(|j| row[j]).fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return Err(TensorError::Invalid {
                    op: "softmax_rows_masked",
                    detail: format!("row {i} has no allowed entries"),
                });
            }
            let orow = &mut out[i * n..(i + 1) * n];
            let mut total = 0.0;
            for j in 0..n {
                if ok(j) {
                    orow[j] = (row[j] - max).exp();
                    total += orow[j];
                }
            }
            orow.iter_mut().for_each(|v| *v /= total);
        }
        Tensor::from_op(
            "softmax_rows",
            vec![m, n],
            out,
            vec![self.clone()],
            Box::new(move |a| {
                let mut g = vec![0.0; m * n];
                for i in 0..m {
                    let y = &a.out[i * n..(i + 1) * n];
                    let gy = &a.grad[i * n..(i + 1) * n];
                    let dot: f64 = y.iter().zip(gy).map(|(p, q)| p * q).sum();
                    for j in 0..n {
                        g[i * n + j] = y[j] * (gy[j] - dot);
                    }
                }
                vec![Some(g)]
            }),
        )
    }

    /// Mean of a matrix along `axis`, dropping that axis. A 1-D input
    /// reduces to a single value.
    pub fn mean(&self, axis: usize) -> TensorResult<Tensor> {
        if self.shape().len() == 1 {
            if axis != 0 {
                return Err(TensorError::Invalid {
                    op: "mean",
                    detail: format!("axis {axis} out of range for a vector"),
                });
            }
            return self.reshape(vec![1, self.numel()])?.mean(1);
        }
        let (m, n) = self.dims2("mean")?;
        let x = self.data();
        let (out, len) = match axis {
            0 => {
                let mut o = vec![0.0; n];
                for row in x.chunks(n) {
                    o.iter_mut().zip(row).for_each(|(s, v)| *s += v);
                }
                o.iter_mut().for_each(|s| *s /= m as f64);
                (o, n)
            }
            1 => (x.chunks(n).map(|r| r.iter().sum::<f64>() / n as f64).collect(), m),
            _ => {
                return Err(TensorError::Invalid {
                    op: "mean",
                    detail: format!("axis {axis} out of range for a matrix"),
                })
            }
        };
        Tensor::from_op(
            "mean",
            vec![len],
            out,
            vec![self.clone()],
            Box::new(move |a| {
                let mut g = vec![0.0; m * n];
                for i in 0..m {
                    for j in 0..n {
                        g[i * n + j] = if axis == 0 { a.grad[j] / m as f64 } else { a.grad[i] / n as f64 };
                    }
                }
                vec![Some(g)]
            }),
        )
    }

    /// Sum of all elements, as a shape-`[1]` tensor.
    pub fn sum(&self) -> TensorResult<Tensor> {
        let n = self.numel();
        Tensor::from_op(
            "sum",
            vec![1],
            vec![self.data().iter().sum()],
            vec![self.clone()],
            Box::new(move |a| vec![Some(vec![a.grad[0]; n])]),
        )
    }

    /// `Σ_i w_i x_i` over the flattened tensor.
    pub fn weighted_sum(&self, weights: &[f64]) -> TensorResult<Tensor> {
        if weights.len() != self.numel() {
            return Err(TensorError::Shape {
                op: "weighted_sum",
                detail: format!("{} weights for {} values", weights.len(), self.numel()),
            });
        }
        let w = weights.to_vec();
        let value = self.data().iter().zip(&w).map(|(x, w)| x * w).sum();
        Tensor::from_op(
            "weighted_sum",
            vec![1],
            vec![value],
            vec![self.clone()],
            Box::new(move |a| vec![Some(w.iter().map(|w| w * a.grad[0]).collect())]),
        )
    }

    pub fn reshape(&self, shape: Vec<usize>) -> TensorResult<Tensor> {
        super::check_shape("reshape", &shape, self.numel())?;
        Tensor::from_op(
            "reshape",
            shape,
            self.data().to_vec(),
            vec![self.clone()],
            Box::new(|a| vec![Some(a.grad.to_vec())]),
        )
    }

    /// Concatenate two tensors along `axis` (0 for vectors; 0 or 1 for matrices).
    pub fn concat(&self, other: &Tensor, axis: usize) -> TensorResult<Tensor> {
        Tensor::cat(&[self.clone(), other.clone()], axis)
    }

    /// Concatenate any number of tensors along `axis`.
    pub fn cat(parts: &[Tensor], axis: usize) -> TensorResult<Tensor> {
        let first = parts.first().ok_or(TensorError::Invalid { op: "cat", detail: "nothing to concatenate".into() })?;
        let rank = first.shape().len();
        if parts.iter().any(|p| p.shape().len() != rank) || axis >= rank || rank > 2 {
            return Err(TensorError::Invalid {
                op: "cat",
                detail: format!("axis {axis} with ranks that differ or exceed 2"),
            });
        }
        // View every part as (outer × inner) where `inner` is the contiguous
        // block concatenated per outer index.
        let (outer, inners): (usize, Vec<usize>) = if rank == 1 || axis == 0 {
            if rank == 2 && parts.iter().any(|p| p.shape()[1] != first.shape()[1]) {
                return Err(mismatch("cat", first.shape(), parts[1].shape()));
            }
            (1, parts.iter().map(Tensor::numel).collect())
        } else {
            let rows = first.shape()[0];
            if parts.iter().any(|p| p.shape()[0] != rows) {
                return Err(mismatch("cat", first.shape(), parts[1].shape()));
            }
            (rows, parts.iter().map(|p| p.shape()[1]).collect())
        };
        let width: usize = inners.iter().sum();
        let mut data = Vec::with_capacity(outer * width);
        for o in 0..outer {
            for (p, &w) in parts.iter().zip(&inners) {
                data.extend_from_slice(&p.data()[o * w..(o + 1) * w]);
            }
        }
        let shape = match (rank, axis) {
            (1, _) => vec![width],
            (_, 0) => vec![width / first.shape()[1], first.shape()[1]],
            _ => vec![outer, width],
        };
        Tensor::from_op(
            "cat",
            shape,
            data,
            parts.to_vec(),
            Box::new(move |a| {
                let mut grads: Vec<Vec<f64>> = inners.iter().map(|&w| Vec::with_capacity(outer * w)).collect();
                for o in 0..outer {
                    let mut off = o * width;
                    for (g, &w) in grads.iter_mut().zip(&inners) {
                        g.extend_from_slice(&a.grad[off..off + w]);
                        off += w;
                    }
                }
                grads.into_iter().map(Some).collect()
            }),
        )
    }

    /// Rows `start..end` of a matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> TensorResult<Tensor> {
        let (m, n) = self.dims2("slice_rows")?;
        if start >= end || end > m {
            return Err(TensorError::Invalid {
                op: "slice_rows",
                detail: format!("range {start}..{end} for {m} rows"),
            });
        }
        let data = self.data()[start * n..end * n].to_vec();
        Tensor::from_op(
            "slice_rows",
            vec![end - start, n],
            data,
            vec![self.clone()],
            Box::new(move |a| {
                let mut g = vec![0.0; m * n];
                g[start * n..end * n].copy_from_slice(a.grad);
                vec![Some(g)]
            }),
        )
    }

    /// Columns `start..end` of a matrix.
    pub fn slice_cols(&self, start: usize, end: usize) -> TensorResult<Tensor> {
        let (m, n) = self.dims2("slice_cols")?;
        if start >= end || end > n {
            return Err(TensorError::Invalid {
                op: "slice_cols",
                detail: format!("range {start}..{end} for {n} columns"),
            });
        }
        let w = end - start;
        let data = self.data().chunks(n).flat_map(|r| r[start..end].iter().copied()).collect();
        Tensor::from_op(
            "slice_cols",
            vec![m, w],
            data,
            vec![self.clone()],
            Box::new(move |a| {
                let mut g = vec![0.0; m * n];
                for i in 0..m {
                    g[i * n + start..i * n + end].copy_from_slice(&a.grad[i * w..(i + 1) * w]);
                }
                vec![Some(g)]
            }),
        )
    }

    /// Gather rows by index (repeats allowed): output row `r` is input row `index[r]`.
    pub fn select_rows(&self, index: &[usize]) -> TensorResult<Tensor> {
        let (m, n) = self.dims2("select_rows")?;
        if index.is_empty() || index.iter().any(|&i| i >= m) {
            return Err(TensorError::Invalid { op: "select_rows", detail: format!("indices {index:?} for {m} rows") });
        }
        let idx = index.to_vec();
        let data = idx.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Tensor::from_op(
            "select_rows",
            vec![idx.len(), n],
            data,
            vec![self.clone()],
            Box::new(move |a| {
                let mut g = vec![0.0; m * n];
                for (r, &i) in idx.iter().enumerate() {
                    for j in 0..n {
                        g[i * n + j] += a.grad[r * n + j];
                    }
                }
                vec![Some(g)]
            }),
        )
    }

    /// Max pooling over the time axis of an `L×d` matrix with window 2 and
    /// stride 2; an odd trailing row forms a singleton window.
    pub fn max_pool_1d(&self) -> TensorResult<Tensor> {
        let (l, d) = self.dims2("max_pool_1d")?;
        let out_len = l.div_ceil(2);
        let x = self.data();
        let mut data = vec![0.0; out_len * d];
        let mut argmax = vec![0usize; out_len * d];
        for o in 0..out_len {
            let r0 = 2 * o;
            for j in 0..d {
                let mut best = r0;
                if r0 + 1 < l && x[(r0 + 1) * d + j] > x[r0 * d + j] {
                    best = r0 + 1;
                }
                data[o * d + j] = x[best * d + j];
                argmax[o * d + j] = best * d + j;
            }
        }
        Tensor::from_op(
            "max_pool_1d",
            vec![out_len, d],
            data,
            vec![self.clone()],
            Box::new(move |a| {
                let mut g = vec![0.0; l * d];
                for (k, &src) in argmax.iter().enumerate() {
                    g[src] += a.grad[k];
                }
                vec![Some(g)]
            }),
        )
    }

    /// Inverted dropout. In training mode each element is zeroed with
    /// probability `rate` (counter-based on `seed`) and survivors are scaled by
    /// `1/(1-rate)`; otherwise the input is returned unchanged.
    pub fn dropout(&self, rate: f64, seed: u64, training: bool) -> TensorResult<Tensor> {
        if !(0.0..1.0).contains(&rate) {
            return Err(TensorError::Invalid { op: "dropout", detail: format!("rate must lie in [0, 1), got {rate}") });
        }
        if !training || rate == 0.0 {
            return Ok(self.clone());
        }
        let keep = 1.0 / (1.0 - rate);
        let mask: Vec<f64> =
            (0..self.numel() as u64).map(|i| if counter_uniform(seed, i) < rate { 0.0 } else { keep }).collect();
        let data = self.data().iter().zip(&mask).map(|(x, m)| x * m).collect();
        Tensor::from_op(
            "dropout",
            self.shape().to_vec(),
            data,
            vec![self.clone()],
            Box::new(move |a| vec![Some(a.grad.iter().zip(&mask).map(|(g, m)| g * m).collect())]),
        )
    }

    /// Layer normalisation over the last axis of a matrix with learnable
    /// gain and shift.
    pub fn layer_norm(&self, gain: &Tensor, shift: &Tensor, eps: f64) -> TensorResult<Tensor> {
        let (m, n) = self.dims2("layer_norm")?;
        if gain.numel() != n || shift.numel() != n {
            return Err(mismatch("layer_norm", self.shape(), gain.shape()));
        }
        let x = self.data();
        let mut xhat = vec![0.0; m * n];
        let mut inv_std = vec![0.0; m];
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let row = &x[i * n..(i + 1) * n];
            let mu = row.iter().sum::<f64>() / n as f64;
            let var = row.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64;
            let s = 1.0 / (var + eps).sqrt();
            inv_std[i] = s;
            for j in 0..n {
                let h = (row[j] - mu) * s;
                xhat[i * n + j] = h;
                out[i * n + j] = h * gain.data()[j] + shift.data()[j];
            }
        }
        Tensor::from_op(
            "layer_norm",
            vec![m, n],
            out,
            vec![self.clone(), gain.clone(), shift.clone()],
            Box::new(move |a| {
                let gamma = a.parents[1].data();
                let mut gx = vec![0.0; m * n];
                let mut gg = vec![0.0; n];
                let mut gb = vec![0.0; n];
                for i in 0..m {
                    let gy = &a.grad[i * n..(i + 1) * n];
                    let h = &xhat[i * n..(i + 1) * n];
                    let mut sum_d = 0.0;
                    let mut sum_dh = 0.0;
                    for j in 0..n {
                        gg[j] += gy[j] * h[j];
                        gb[j] += gy[j];
                        let d = gy[j] * gamma[j];
                        sum_d += d;
                        sum_dh += d * h[j];
                    }
                    let nf = n as f64;
                    for j in 0..n {
                        let d = gy[j] * gamma[j];
                        gx[i * n + j] = inv_std[i] / nf * (nf * d - sum_d - h[j] * sum_dh);
                    }
                }
                let grads: ParentGrads = vec![Some(gx), Some(gg), Some(gb)];
                grads
            }),
        )
    }
}
