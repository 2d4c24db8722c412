use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::scalar::Scalar;

/// `y = coefficients . x + intercept`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel<S> {
    coefficients: Vec<S>,
    intercept: S,
    regularized: bool,
}

impl<S: Scalar> LinearModel<S> {
    pub fn new(coefficients: Vec<S>, intercept: S) -> Self {
        Self { coefficients, intercept, regularized: false }
    }

    pub fn coefficients(&self) -> &[S] {
        &self.coefficients
    }

    pub fn intercept(&self) -> S {
        self.intercept
    }

    /// True when the fit fell back to the ridge-regularized system.
    pub fn regularized(&self) -> bool {
        self.regularized
    }

    #[inline]
    pub fn predict(&self, x: &[S]) -> S {
        debug_assert_eq!(x.len(), self.coefficients.len());
        self.coefficients.iter().zip(x).fold(self.intercept, |acc, (&k, &xi)| acc + k * xi)
    }
}

/// Ordinary least squares with an intercept.
///
/// The centred normal system is equilibrated to unit diagonal and
/// eigen-decomposed. When a column has zero variance or the condition number
/// exceeds [`Scalar::ill_conditioned`], a ridge term of `1e-8` times the mean
/// eigenvalue is added and the model is flagged as regularized.
pub fn ols_fit<S: Scalar>(x: &Matrix<S>, y: &[S]) -> Result<LinearModel<S>> {
    let n = x.rows();
    let d = x.cols();
    if n == 0 {
        return Err(Error::EmptyInput("ols_fit needs at least one row"));
    }
    if y.len() != n {
        return Err(Error::Shape(format!("design has {n} rows but target has {}", y.len())));
    }
    let nf = S::from_usize(n).unwrap();
    let y_mean = y.iter().copied().sum::<S>() / nf;
    if d == 0 {
        return Ok(LinearModel { coefficients: Vec::new(), intercept: y_mean, regularized: false });
    }

    let mut x_mean = vec![S::zero(); d];
    for i in 0..n {
        for (m, &v) in x_mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    for m in &mut x_mean {
        *m /= nf;
    }

    let mut gram: Matrix<S> = Matrix::zeros(d, d);
    let mut rhs = vec![S::zero(); d];
    let mut centred = vec![S::zero(); d];
    for i in 0..n {
        for ((c, &v), &m) in centred.iter_mut().zip(x.row(i)).zip(&x_mean) {
            *c = v - m;
        }
        let dy = y[i] - y_mean;
        for a in 0..d {
            let ca = centred[a];
            rhs[a] += ca * dy;
            let row = gram.row_mut(a);
            for b in a..d {
                row[b] += ca * centred[b];
            }
        }
    }

    // Equilibrate; zero-variance columns are dropped from the solve.
    let scale: Vec<S> = (0..d).map(|a| gram.get(a, a).sqrt()).collect();
    let active: Vec<usize> = (0..d).filter(|&a| scale[a] > S::zero()).collect();
    let mut regularized = active.len() < d;
    let mut coefficients = vec![S::zero(); d];

    if !active.is_empty() {
        let m = active.len();
        let mut g = Matrix::zeros(m, m);
        for (i, &a) in active.iter().enumerate() {
            for (j, &b) in active.iter().enumerate() {
                let v = if a <= b { gram.get(a, b) } else { gram.get(b, a) };
                g.set(i, j, v / (scale[a] * scale[b]));
            }
        }
        let b: Vec<S> = active.iter().map(|&a| rhs[a] / scale[a]).collect();
        let (vals, vecs) = symmetric_eigen(&g);
        let max = vals.iter().copied().fold(S::zero(), S::max);
        let min = vals.iter().copied().fold(S::infinity(), S::min);
        let ridge = if min <= S::zero() || max / min > S::ill_conditioned() {
            regularized = true;
            let trace: S = vals.iter().copied().sum();
            S::c(1e-8) * trace / S::from_usize(m).unwrap()
        } else {
            S::zero()
        };
        // k = V diag(1 / (lambda + ridge)) V^T b
        let mut proj = vec![S::zero(); m];
        for (k, p) in proj.iter_mut().enumerate() {
            let dot: S = (0..m).map(|i| vecs.get(i, k) * b[i]).sum();
            let denom = vals[k].max(S::zero()) + ridge;
            *p = if denom > S::zero() { dot / denom } else { S::zero() };
        }
        for (i, &a) in active.iter().enumerate() {
            let ki: S = (0..m).map(|k| vecs.get(i, k) * proj[k]).sum();
            coefficients[a] = ki / scale[a];
        }
    }

    let intercept = coefficients.iter().zip(&x_mean).fold(y_mean, |acc, (&k, &m)| acc - k * m);
    Ok(LinearModel { coefficients, intercept, regularized })
}
