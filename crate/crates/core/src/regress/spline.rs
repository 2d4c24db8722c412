use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::regress::ols_fit;
use crate::regress::piecewise::check_increasing;
use crate::scalar::Scalar;

/// Least-squares cubic regression spline in truncated-power form.
///
/// The fit runs on the standardized variable `u = (t - center) / scale`,
/// with `center` and `scale` taken from the sample range. Outside that range
/// the spline continues along its boundary tangent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline<S> {
    knots: Vec<S>,
    center: S,
    scale: S,
    lo: S,
    hi: S,
    /// `[1, u, u^2, u^3, (u - k_1)^3_+, ...]` coefficients.
    basis: Vec<S>,
    /// Expanded polynomial `a + b u + c u^2 + d u^3` for each of the
    /// `knots.len() + 1` segments.
    segments: Vec<[S; 4]>,
}

impl<S: Scalar> CubicSpline<S> {
    pub fn knots(&self) -> &[S] {
        &self.knots
    }

    /// Truncated-power coefficients in the standardized variable.
    pub fn basis_coefficients(&self) -> &[S] {
        &self.basis
    }

    pub fn segment_polynomials(&self) -> &[[S; 4]] {
        &self.segments
    }

    /// Temperature range seen in training.
    pub fn range(&self) -> (S, S) {
        (self.lo, self.hi)
    }

    fn to_u(&self, t: S) -> S {
        (t - self.center) / self.scale
    }

    fn segment_of(&self, t: S) -> usize {
        self.knots.iter().take_while(|&&k| t >= k).count()
    }

    /// Value, first and second derivative (with respect to `t`) of segment
    /// polynomial `seg` at `t`, without range clamping.
    pub fn segment_eval(&self, seg: usize, t: S) -> [S; 3] {
        let [a, b, c, d] = self.segments[seg];
        let u = self.to_u(t);
        let two = S::c(2.0);
        let three = S::c(3.0);
        let six = S::c(6.0);
        let v = a + u * (b + u * (c + u * d));
        let d1 = (b + u * (two * c + u * three * d)) / self.scale;
        let d2 = (two * c + six * d * u) / (self.scale * self.scale);
        [v, d1, d2]
    }

    fn inside(&self, t: S) -> [S; 3] {
        self.segment_eval(self.segment_of(t), t)
    }

    /// Left and right limits of (value, d/dt, d2/dt2) at knot `k`.
    pub fn knot_limits(&self, k: usize) -> ([S; 3], [S; 3]) {
        let at = self.knots[k];
        (self.segment_eval(k, at), self.segment_eval(k + 1, at))
    }

    pub fn evaluate(&self, t: S) -> S {
        if t < self.lo {
            let [v, d1, _] = self.inside(self.lo);
            v + d1 * (t - self.lo)
        } else if t > self.hi {
            let [v, d1, _] = self.inside(self.hi);
            v + d1 * (t - self.hi)
        } else {
            self.inside(t)[0]
        }
    }
}

/// Least-squares cubic spline with fixed interior knots.
pub fn spline_fit<S: Scalar>(t: &[S], y: &[S], knots: &[S]) -> Result<CubicSpline<S>> {
    if t.len() != y.len() {
        return Err(Error::Shape(format!("{} temperatures for {} readings", t.len(), y.len())));
    }
    if t.is_empty() {
        return Err(Error::EmptyInput("spline_fit needs at least one sample"));
    }
    check_increasing(knots)?;
    let lo = t.iter().copied().fold(S::infinity(), S::min);
    let hi = t.iter().copied().fold(S::neg_infinity(), S::max);
    let two = S::c(2.0);
    let center = (lo + hi) / two;
    let scale = if hi > lo { (hi - lo) / two } else { S::one() };
    let uk: Vec<S> = knots.iter().map(|&k| (k - center) / scale).collect();

    let d = 3 + uk.len();
    let x = Matrix::from_fn(t.len(), d, |i, j| {
        let u = (t[i] - center) / scale;
        match j {
            0 => u,
            1 => u * u,
            2 => u * u * u,
            _ => (u - uk[j - 3]).max(S::zero()).powi(3),
        }
    });
    let lm = ols_fit(&x, y)?;
    let mut basis = Vec::with_capacity(d + 1);
    basis.push(lm.intercept());
    basis.extend_from_slice(lm.coefficients());

    let three = S::c(3.0);
    let mut segments = Vec::with_capacity(uk.len() + 1);
    let mut poly = [basis[0], basis[1], basis[2], basis[3]];
    segments.push(poly);
    for (k, &kappa) in uk.iter().enumerate() {
        // h (u - kappa)^3 = h (u^3 - 3 kappa u^2 + 3 kappa^2 u - kappa^3)
        let h = basis[4 + k];
        poly[0] -= h * kappa * kappa * kappa;
        poly[1] += h * three * kappa * kappa;
        poly[2] -= h * three * kappa;
        poly[3] += h;
        segments.push(poly);
    }

    Ok(CubicSpline { knots: knots.to_vec(), center, scale, lo, hi, basis, segments })
}
