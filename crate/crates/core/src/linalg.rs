//! Small dense helpers shared by the physics modules.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::Result;

pub type C64 = Complex64;

/// Dense complex square matrix. Used for Hamiltonians, jump operators and states.
pub type Operator = Array2<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> Operator {
    Array2::eye(n)
}

pub fn dagger(a: &Operator) -> Operator {
    a.t().mapv(|z| z.conj())
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    ndarray::linalg::kron(a, b)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a.dot(b) - b.dot(a)
}

pub fn trace(a: &Operator) -> C64 {
    a.diag().sum()
}

pub fn frobenius(a: &Operator) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest elementwise deviation from Hermiticity, max |A - A†|.
pub fn hermiticity_defect(a: &Operator) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(a: &Operator) -> Operator {
    (a + &dagger(a)).mapv(|z| z * 0.5)
}

/// Eigen-decomposition of the Hermitian part of `a`, ascending eigenvalues.
pub fn hermitian_eigen(a: &Operator) -> Result<(Array1<f64>, Operator)> {
    let (w, v) = hermitize(a).eigh(UPLO::Lower)?;
    Ok((w, v))
}

pub fn hermitian_eigenvalues(a: &Operator) -> Result<Array1<f64>> {
    Ok(hermitian_eigen(a)?.0)
}

/// Trace distance ½‖A − B‖₁ for Hermitian A, B.
pub fn trace_distance(a: &Operator, b: &Operator) -> Result<f64> {
    let w = hermitian_eigenvalues(&(a - b))?;
    Ok(0.5 * w.iter().map(|x| x.abs()).sum::<f64>())
}

/// Column-stacking vectorization: vec(X)[i + j n] = X[i, j].
pub fn vectorize(x: &Operator) -> Array1<C64> {
    x.t().iter().copied().collect()
}

pub fn unvectorize(v: &Array1<C64>, n: usize) -> Operator {
    Array2::from_shape_fn((n, n), |(i, j)| v[i + j * n])
}
