use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::regress::ols_fit;
use crate::scalar::Scalar;

/// Continuous piecewise-linear function in hinge form:
/// `intercept + slope * t + sum_k hinge_slopes[k] * max(0, t - breakpoints[k])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear<S> {
    breakpoints: Vec<S>,
    intercept: S,
    slope: S,
    hinge_slopes: Vec<S>,
}

impl<S: Scalar> PiecewiseLinear<S> {
    pub fn new(breakpoints: Vec<S>, intercept: S, slope: S, hinge_slopes: Vec<S>) -> Result<Self> {
        check_increasing(&breakpoints)?;
        if hinge_slopes.len() != breakpoints.len() {
            return Err(Error::Shape(format!(
                "{} hinge slopes for {} breakpoints",
                hinge_slopes.len(),
                breakpoints.len()
            )));
        }
        Ok(Self { breakpoints, intercept, slope, hinge_slopes })
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn intercept(&self) -> S {
        self.intercept
    }

    pub fn slope(&self) -> S {
        self.slope
    }

    pub fn hinge_slopes(&self) -> &[S] {
        &self.hinge_slopes
    }

    pub fn segments(&self) -> usize {
        self.breakpoints.len() + 1
    }

    pub fn evaluate(&self, t: S) -> S {
        self.breakpoints
            .iter()
            .zip(&self.hinge_slopes)
            .fold(self.intercept + self.slope * t, |acc, (&b, &h)| acc + h * (t - b).max(S::zero()))
    }
}

pub(crate) fn check_increasing<S: Scalar>(knots: &[S]) -> Result<()> {
    if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("breakpoints must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Least-squares continuous piecewise-linear fit with fixed breakpoints.
pub fn piecewise_fit<S: Scalar>(t: &[S], y: &[S], breakpoints: &[S]) -> Result<PiecewiseLinear<S>> {
    if t.len() != y.len() {
        return Err(Error::Shape(format!("{} temperatures for {} readings", t.len(), y.len())));
    }
    check_increasing(breakpoints)?;
    let d = 1 + breakpoints.len();
    let x = Matrix::from_fn(t.len(), d, |i, j| if j == 0 { t[i] } else { (t[i] - breakpoints[j - 1]).max(S::zero()) });
    let lm = ols_fit(&x, y)?;
    let k = lm.coefficients();
    Ok(PiecewiseLinear {
        breakpoints: breakpoints.to_vec(),
        intercept: lm.intercept(),
        slope: k[0],
        hinge_slopes: k[1..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::sse;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn line_data_has_no_hinges() {
        let t = grid(50, -10.0, 20.0);
        let y: Vec<f64> = t.iter().map(|v| 100.0 - 3.0 * v).collect();
        let f = piecewise_fit(&t, &y, &[-4.0, 2.0, 8.0, 14.0]).unwrap();
        assert!(f.hinge_slopes().iter().all(|h| h.abs() < 1e-8));
        assert!((f.slope() + 3.0).abs() < 1e-8);
        assert_eq!(f.segments(), 5);
    }

    #[test]
    fn recovers_known_five_segment_function() {
        let truth = PiecewiseLinear::new(vec![-5.0, 2.0, 9.0, 16.0], 230.0, -8.0, vec![1.5, 2.0, 1.0, 2.5]).unwrap();
        let t = grid(400, -20.0, 30.0);
        let y: Vec<f64> = t.iter().map(|&v| truth.evaluate(v)).collect();
        let f = piecewise_fit(&t, &y, truth.breakpoints()).unwrap();
        for v in grid(97, -25.0, 35.0) {
            assert!((f.evaluate(v) - truth.evaluate(v)).abs() < 1e-6);
        }
    }

    #[test]
    fn empty_breakpoints_reduce_to_a_line() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 3.5, 6.5, 8.0];
        let f = piecewise_fit(&t, &y, &[]).unwrap();
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]).unwrap();
        let lm = ols_fit(&x, &y).unwrap();
        assert_eq!(f.slope(), lm.coefficients()[0]);
        assert_eq!(f.intercept(), lm.intercept());
    }

    #[test]
    fn continuity_at_breakpoints() {
        let f = PiecewiseLinear::<f64>::new(vec![0.0, 1.0], 1.0, 2.0, vec![-3.0, 4.0]).unwrap();
        for &b in f.breakpoints() {
            let left = f.evaluate(b - 1e-12);
            let right = f.evaluate(b + 1e-12);
            assert!((left - right).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_unsorted_breakpoints() {
        assert!(piecewise_fit(&[1.0, 2.0], &[1.0, 2.0], &[2.0, 1.0]).is_err());
        assert!(piecewise_fit(&[1.0, 2.0], &[1.0], &[]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn nests_the_line(ys in proptest::collection::vec(0.0f64..100.0, 20..60)) {
            let t = grid(ys.len(), -15.0, 25.0);
            let bp = crate::regress::quantile_breakpoints(&t, 5);
            let f = piecewise_fit(&t, &ys, &bp).unwrap();
            let line = piecewise_fit(&t, &ys, &[]).unwrap();
            let a = sse(&t, &ys, |v| f.evaluate(v));
            let b = sse(&t, &ys, |v| line.evaluate(v));
            proptest::prop_assert!(a <= b * (1.0 + 1e-9) + 1e-9);
        }
    }
}
