//! A minimal dense row-major tensor.
//!
//! Parameter structs hold `Tensor<T>` fields so the optimizer, checkpoint
//! writer and gradient checker can walk every parameter uniformly. Hot loops
//! index `data` directly.

use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub shape: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![T::zero(); n],
        }
    }

    pub fn full(shape: &[usize], value: T) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "shape {:?} does not match data length {}",
            shape,
            data.len()
        );
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of rows for a 2-D tensor.
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Number of columns for a 2-D tensor.
    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    /// Row `i` of a 2-D tensor as a slice.
    pub fn row(&self, i: usize) -> &[T] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn fill(&mut self, value: T) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `out = W x` for row-major `W` of shape `(rows, cols)`, `x` of length `cols`.
pub fn matvec<T: Real>(w: &Tensor<T>, x: &[T], out: &mut [T]) {
    let (r, c) = (w.rows(), w.cols());
    debug_assert_eq!(x.len(), c);
    debug_assert_eq!(out.len(), r);
    for (i, o) in out.iter_mut().enumerate() {
        let row = &w.data[i * c..(i + 1) * c];
        let mut acc = T::zero();
        for (wv, xv) in row.iter().zip(x) {
            acc += *wv * *xv;
        }
        *o = acc;
    }
}

/// `out += Wᵀ g`: the input-gradient half of a matvec adjoint.
pub fn matvec_backward_input<T: Real>(w: &Tensor<T>, grad_out: &[T], grad_x: &mut [T]) {
    let c = w.cols();
    debug_assert_eq!(grad_out.len(), w.rows());
    debug_assert_eq!(grad_x.len(), c);
    for (i, &g) in grad_out.iter().enumerate() {
        if g == T::zero() {
            continue;
        }
        let row = &w.data[i * c..(i + 1) * c];
        for (gx, wv) in grad_x.iter_mut().zip(row) {
            *gx += *wv * g;
        }
    }
}

/// `dW += g ⊗ x`: the weight-gradient half of a matvec adjoint.
pub fn matvec_backward_weight<T: Real>(grad_w: &mut Tensor<T>, grad_out: &[T], x: &[T]) {
    let c = grad_w.cols();
    debug_assert_eq!(x.len(), c);
    debug_assert_eq!(grad_out.len(), grad_w.rows());
    for (i, g) in grad_out.iter().enumerate() {
        if *g == T::zero() {
            continue;
        }
        let row = &mut grad_w.data[i * c..(i + 1) * c];
        for (dw, xv) in row.iter_mut().zip(x) {
            *dw += *g * *xv;
        }
    }
}
