use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A run of samples pooled to a single level; `lo..=hi` is its temperature span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsotonicBlock<S> {
    pub lo: S,
    pub hi: S,
    pub mean: S,
    pub weight: usize,
}

/// Least-squares non-increasing step function of temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotonicFit<S> {
    blocks: Vec<IsotonicBlock<S>>,
}

impl<S: Scalar> IsotonicFit<S> {
    /// Blocks in ascending temperature order.
    pub fn blocks(&self) -> &[IsotonicBlock<S>] {
        &self.blocks
    }

    /// Step value at `t`. Steps sit halfway between neighbouring blocks; a
    /// temperature exactly on a step takes the colder block's level.
    pub fn evaluate(&self, t: S) -> S {
        let half = S::c(0.5);
        // Steps rise with block index, so the first step at or above `t` is
        // found by bisection.
        let (mut lo, mut hi) = (0, self.blocks.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if t > (self.blocks[mid].hi + self.blocks[mid + 1].lo) * half {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        self.blocks[lo].mean
    }
}

/// Pool-adjacent-violators fit of `y` as a non-increasing function of `t`.
///
/// Samples with identical temperature are averaged before the main pass.
pub fn isotonic_fit<S: Scalar>(t: &[S], y: &[S]) -> Result<IsotonicFit<S>> {
    if t.len() != y.len() {
        return Err(Error::Shape(format!("{} temperatures for {} readings", t.len(), y.len())));
    }
    if t.is_empty() {
        return Err(Error::EmptyInput("isotonic_fit needs at least one sample"));
    }
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&a, &b| t[a].partial_cmp(&t[b]).unwrap_or(std::cmp::Ordering::Equal));

    struct Pool<S> {
        lo: S,
        hi: S,
        sum: S,
        weight: usize,
    }
    impl<S: Scalar> Pool<S> {
        fn mean(&self) -> S {
            self.sum / S::from_usize(self.weight).unwrap()
        }
    }

    let mut stack: Vec<Pool<S>> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let ti = t[order[i]];
        let mut sum = S::zero();
        let mut weight = 0;
        while i < order.len() && t[order[i]] == ti {
            sum += y[order[i]];
            weight += 1;
            i += 1;
        }
        stack.push(Pool { lo: ti, hi: ti, sum, weight });
        while stack.len() >= 2 && stack[stack.len() - 1].mean() >= stack[stack.len() - 2].mean() {
            let last = stack.pop().unwrap();
            let prev = stack.last_mut().unwrap();
            prev.hi = last.hi;
            prev.sum += last.sum;
            prev.weight += last.weight;
        }
    }

    let blocks: Vec<IsotonicBlock<S>> =
        stack.iter().map(|p| IsotonicBlock { lo: p.lo, hi: p.hi, mean: p.mean(), weight: p.weight }).collect();
    assert!(blocks.windows(2).all(|w| w[0].mean > w[1].mean), "isotonic block means must be non-increasing");
    Ok(IsotonicFit { blocks })
}
