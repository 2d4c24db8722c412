//! Forecast error measures over the scorable cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regress::sorted_quantile;

/// A metric value with the number of cells it was computed on and the number
/// excluded because the actual reading was not positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub value: f64,
    pub scored: usize,
    pub excluded: usize,
}

/// Running sums for MAPE and MSE over the same cells.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorAccumulator {
    abs_pct: f64,
    sq: f64,
    pub scored: usize,
    pub excluded: usize,
}

impl ErrorAccumulator {
    /// Add a cell. Cells with `actual <= 0` are counted as excluded.
    pub fn push(&mut self, pred: f64, actual: f64) {
        if actual > 0.0 {
            self.abs_pct += (actual - pred).abs() / actual;
            self.sq += (actual - pred) * (actual - pred);
            self.scored += 1;
        } else {
            self.excluded += 1;
        }
    }

    /// Count a cell that cannot be scored (invalid reading).
    pub fn skip(&mut self) {
        self.excluded += 1;
    }

    pub fn merge(&mut self, other: &ErrorAccumulator) {
        self.abs_pct += other.abs_pct;
        self.sq += other.sq;
        self.scored += other.scored;
        self.excluded += other.excluded;
    }

    fn check(&self) -> Result<()> {
        if self.scored == 0 {
            return Err(Error::EmptyInput("no scorable cells (every actual reading is zero or invalid)"));
        }
        Ok(())
    }

    /// Mean absolute percentage error in percent.
    pub fn mape(&self) -> Result<Metric> {
        self.check()?;
        Ok(Metric { value: 100.0 * self.abs_pct / self.scored as f64, scored: self.scored, excluded: self.excluded })
    }

    pub fn mse(&self) -> Result<Metric> {
        self.check()?;
        Ok(Metric { value: self.sq / self.scored as f64, scored: self.scored, excluded: self.excluded })
    }
}

fn accumulate(pred: &[f64], actual: &[f64]) -> Result<ErrorAccumulator> {
    if pred.len() != actual.len() {
        return Err(Error::Shape(format!("{} predictions for {} actual readings", pred.len(), actual.len())));
    }
    let mut acc = ErrorAccumulator::default();
    for (p, a) in pred.iter().zip(actual) {
        acc.push(*p, *a);
    }
    Ok(acc)
}

/// Mean of `|actual - pred| / actual * 100` over cells with `actual > 0`.
pub fn mape(pred: &[f64], actual: &[f64]) -> Result<Metric> {
    accumulate(pred, actual)?.mape()
}

/// Mean squared error over the cells `mape` scores.
pub fn mse(pred: &[f64], actual: &[f64]) -> Result<Metric> {
    accumulate(pred, actual)?.mse()
}

/// First quartile, median and third quartile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Quartiles with linear interpolation between order statistics.
pub fn quartiles(values: &[f64]) -> Result<Quartiles> {
    if values.is_empty() {
        return Err(Error::EmptyInput("quartiles of an empty sample"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(Quartiles { q1: sorted_quantile(&v, 0.25), median: sorted_quantile(&v, 0.5), q3: sorted_quantile(&v, 0.75) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[3.0, 4.0], &[3.0, 4.0]).unwrap().value, 0.0);
        assert!((mape(&[110.0, 180.0], &[100.0, 200.0]).unwrap().value - 10.0).abs() < 1e-12);
        let m = mape(&[5.0, 100.0], &[0.0, 100.0]).unwrap();
        assert_eq!((m.value, m.scored, m.excluded), (0.0, 1, 1));
        assert!(mape(&[1.0], &[0.0]).is_err());
        assert!(mape(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap().value, 0.0);
        assert_eq!(mse(&[2.0, 5.0], &[1.0, 3.0]).unwrap().value, 2.5);
        assert_eq!(mse(&[7.0], &[4.0]).unwrap().value, 9.0);
        assert_eq!(mse(&[9.0, 1.0], &[0.0, 2.0]).unwrap().value, 1.0);
    }

    #[test]
    fn quartile_examples() {
        assert_eq!(quartiles(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap(), Quartiles { q1: 2.0, median: 3.0, q3: 4.0 });
        assert_eq!(quartiles(&[7.5]).unwrap(), Quartiles { q1: 7.5, median: 7.5, q3: 7.5 });
        assert_eq!(quartiles(&[1.0, 2.0]).unwrap(), Quartiles { q1: 1.25, median: 1.5, q3: 1.75 });
        assert!(quartiles(&[]).is_err());
    }
}
