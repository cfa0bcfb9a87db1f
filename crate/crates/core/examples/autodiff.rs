//! Reverse-mode gradients on a tiny two-layer network, checked against
//! central finite differences.

use informer_options::tensor::{grad_check, Tensor, TensorResult};

fn loss(p: &[Tensor]) -> TensorResult<Tensor> {
    let (x, w1, w2) = (&p[0], &p[1], &p[2]);
    x.matmul(w1)?.tanh()?.matmul(w2)?.sigmoid()?.mean(0)?.sum()
}

fn main() -> TensorResult<()> {
    let x = Tensor::param(vec![4, 3], (0..12).map(|i| (i as f64 * 0.37).sin()).collect())?;
    let w1 = Tensor::param(vec![3, 5], (0..15).map(|i| (i as f64 * 0.91).cos() * 0.5).collect())?;
    let w2 = Tensor::param(vec![5, 2], (0..10).map(|i| 0.1 * i as f64 - 0.4).collect())?;
    let point = [x, w1, w2];

    let out = loss(&point)?;
    out.backward()?;
    println!("loss = {:.6}", out.data()[0]);
    for (name, t) in ["x", "w1", "w2"].iter().zip(&point) {
        let g = t.grad().unwrap_or_default();
        println!("d loss / d {name}: {:?}", g.iter().map(|v| format!("{v:+.4}")).collect::<Vec<_>>());
    }

    let err = grad_check(loss, &point, 1e-6)?;
    println!("max relative error against finite differences: {err:.2e}");
    Ok(())
}
