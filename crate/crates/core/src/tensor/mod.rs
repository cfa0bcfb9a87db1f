//! Dense row-major `f64` tensors with eager reverse-mode differentiation.
//!
//! Every operation records its parents and a backward closure when at least
//! one input requires a gradient. [`Tensor::backward`] walks the recorded
//! graph in reverse topological order and accumulates `∂loss/∂node` into the
//! grad slot of every node that requires one. The graph lives exactly as long
//! as the tensors referencing it, so it is rebuilt on every forward pass.
//!
//! ```
//! use informer_options::tensor::Tensor;
//!
//! let x = Tensor::param(vec![2], vec![1.0, 2.0]).unwrap();
//! let loss = x.mul(&x).unwrap().sum().unwrap();
//! loss.backward().unwrap();
//! assert_eq!(x.grad().unwrap(), vec![2.0, 4.0]);
//! ```

mod gradcheck;
mod ops;

use std::cell::RefCell;
use std::collections::HashSet;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

pub use gradcheck::{grad_check, grad_check_sampled};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("{op}: shape mismatch ({detail})")]
    Shape { op: &'static str, detail: String },
    #[error("{op}: non-finite value produced")]
    NonFinite { op: &'static str },
    #[error("backward requires a scalar loss, got shape {0:?}")]
    NotScalar(Vec<usize>),
    #[error("{op}: {detail}")]
    Invalid { op: &'static str, detail: String },
}

pub type TensorResult<T> = std::result::Result<T, TensorError>;

pub(crate) struct BackwardArgs<'a> {
    pub grad: &'a [f64],
    pub out: &'a [f64],
    pub parents: &'a [Tensor],
}

/// Per-parent gradient contributions, `None` where nothing flows.
pub(crate) type ParentGrads = Vec<Option<Vec<f64>>>;
type BackwardFn = Box<dyn Fn(&BackwardArgs<'_>) -> ParentGrads>;

struct Node {
    shape: Vec<usize>,
    data: Vec<f64>,
    requires_grad: bool,
    grad: RefCell<Option<Vec<f64>>>,
    parents: Vec<Tensor>,
    backward: Option<BackwardFn>,
}

/// A dense tensor. Cloning is cheap and shares the underlying node.
#[derive(Clone)]
pub struct Tensor {
    node: Rc<Node>,
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor")
            .field("shape", &self.node.shape)
            .field("requires_grad", &self.node.requires_grad)
            .field("data", &self.node.data)
            .finish()
    }
}

fn check_shape(op: &'static str, shape: &[usize], len: usize) -> TensorResult<()> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(TensorError::Shape { op, detail: format!("dimensions must be positive, got {shape:?}") });
    }
    let n: usize = shape.iter().product();
    if n != len {
        return Err(TensorError::Shape { op, detail: format!("shape {shape:?} needs {n} values, got {len}") });
    }
    Ok(())
}

fn check_finite(op: &'static str, data: &[f64]) -> TensorResult<()> {
    if data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(TensorError::NonFinite { op })
    }
}

impl Tensor {
    fn leaf(shape: Vec<usize>, data: Vec<f64>, requires_grad: bool) -> TensorResult<Self> {
        check_shape("tensor", &shape, data.len())?;
        check_finite("tensor", &data)?;
        Ok(Self {
            node: Rc::new(Node {
                shape,
                data,
                requires_grad,
                grad: RefCell::new(None),
                parents: Vec::new(),
                backward: None,
            }),
        })
    }

    /// A value that never receives a gradient.
    pub fn constant(shape: Vec<usize>, data: Vec<f64>) -> TensorResult<Self> {
        Self::leaf(shape, data, false)
    }

    /// A leaf whose gradient is collected by [`Tensor::backward`].
    pub fn param(shape: Vec<usize>, data: Vec<f64>) -> TensorResult<Self> {
        Self::leaf(shape, data, true)
    }

    pub fn zeros(shape: Vec<usize>) -> TensorResult<Self> {
        let n = shape.iter().product();
        Self::constant(shape, vec![0.0; n])
    }

    pub fn scalar(value: f64) -> TensorResult<Self> {
        Self::constant(vec![1], vec![value])
    }

    /// Build a row-major matrix from rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> TensorResult<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(TensorError::Shape { op: "from_rows", detail: "ragged rows".into() });
        }
        Self::constant(vec![rows.len(), cols], rows.concat())
    }

    pub(crate) fn from_op(
        op: &'static str,
        shape: Vec<usize>,
        data: Vec<f64>,
        parents: Vec<Tensor>,
        backward: BackwardFn,
    ) -> TensorResult<Self> {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        check_finite(op, &data)?;
        let requires_grad = parents.iter().any(Tensor::requires_grad);
        let (parents, backward) = if requires_grad { (parents, Some(backward)) } else { (Vec::new(), None) };
        Ok(Self { node: Rc::new(Node { shape, data, requires_grad, grad: RefCell::new(None), parents, backward }) })
    }

    pub fn shape(&self) -> &[usize] {
        &self.node.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.node.data
    }

    pub fn numel(&self) -> usize {
        self.node.data.len()
    }

    pub fn requires_grad(&self) -> bool {
        self.node.requires_grad
    }

    /// Rows and columns of a 2-D tensor.
    pub fn dims2(&self, op: &'static str) -> TensorResult<(usize, usize)> {
        match self.node.shape.as_slice() {
            [r, c] => Ok((*r, *c)),
            other => Err(TensorError::Shape { op, detail: format!("expected a matrix, got shape {other:?}") }),
        }
    }

    pub fn get2(&self, row: usize, col: usize) -> f64 {
        let cols = *self.node.shape.last().unwrap_or(&1);
        self.node.data[row * cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let cols = *self.node.shape.last().unwrap_or(&1);
        &self.node.data[row * cols..(row + 1) * cols]
    }

    /// The accumulated gradient, if backward reached this tensor.
    pub fn grad(&self) -> Option<Vec<f64>> {
        self.node.grad.borrow().clone()
    }

    /// A copy of this value cut off from the graph.
    pub fn detach(&self) -> Tensor {
        Tensor {
            node: Rc::new(Node {
                shape: self.node.shape.clone(),
                data: self.node.data.clone(),
                requires_grad: false,
                grad: RefCell::new(None),
                parents: Vec::new(),
                backward: None,
            }),
        }
    }

    fn id(&self) -> *const Node {
        Rc::as_ptr(&self.node)
    }

    /// Reverse-mode sweep from a scalar loss.
    pub fn backward(&self) -> TensorResult<()> {
        if self.numel() != 1 {
            return Err(TensorError::NotScalar(self.node.shape.clone()));
        }
        if !self.requires_grad() {
            return Ok(());
        }

        // Iterative post-order DFS gives a topological order.
        let mut order: Vec<Tensor> = Vec::new();
        let mut visited: HashSet<*const Node> = HashSet::new();
        let mut stack: Vec<(Tensor, bool)> = vec![(self.clone(), false)];
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                order.push(t);
                continue;
            }
            if !visited.insert(t.id()) {
                continue;
            }
            stack.push((t.clone(), true));
            for p in &t.node.parents {
                if p.requires_grad() && !visited.contains(&p.id()) {
                    stack.push((p.clone(), false));
                }
            }
        }

        *self.node.grad.borrow_mut() = Some(vec![1.0]);
        for t in order.iter().rev() {
            let Some(bw) = &t.node.backward else { continue };
            let grad = match t.node.grad.borrow().as_ref() {
                Some(g) => g.clone(),
                None => continue,
            };
            let contributions = bw(&BackwardArgs { grad: &grad, out: &t.node.data, parents: &t.node.parents });
            for (p, g) in t.node.parents.iter().zip(contributions) {
                let Some(g) = g else { continue };
                if !p.requires_grad() {
                    continue;
                }
                let mut slot = p.node.grad.borrow_mut();
                match slot.as_mut() {
                    Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b),
                    None => *slot = Some(g),
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
