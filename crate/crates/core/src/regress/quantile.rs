use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) fn sort_scalars<S: Scalar>(v: &mut [S]) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
}

/// Linear-interpolation quantile of already sorted data, `p` in [0, 1].
pub fn sorted_quantile<S: Scalar>(sorted: &[S], p: S) -> S {
    let n = sorted.len();
    debug_assert!(n > 0);
    let h = p * S::from_usize(n - 1).unwrap();
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0).min(n - 1);
    if i + 1 >= n {
        return sorted[n - 1];
    }
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

pub fn quantile<S: Scalar>(samples: &[S], p: S) -> Result<S> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("quantile of an empty sample"));
    }
    let mut sorted = samples.to_vec();
    sort_scalars(&mut sorted);
    Ok(sorted_quantile(&sorted, p))
}

/// Breakpoints splitting `samples` into `parts` equicardinal groups.
///
/// Quantiles that coincide, or that sit on the sample minimum or maximum,
/// are dropped; fewer breakpoints then mean fewer segments.
pub fn quantile_breakpoints<S: Scalar>(samples: &[S], parts: usize) -> Vec<S> {
    if samples.is_empty() || parts < 2 {
        return Vec::new();
    }
    let mut sorted = samples.to_vec();
    sort_scalars(&mut sorted);
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let parts_s = S::from_usize(parts).unwrap();
    let mut out: Vec<S> = Vec::with_capacity(parts - 1);
    for k in 1..parts {
        let q = sorted_quantile(&sorted, S::from_usize(k).unwrap() / parts_s);
        if q <= lo || q >= hi {
            continue;
        }
        if out.last().is_some_and(|&last| q <= last) {
            continue;
        }
        out.push(q);
    }
    out
}
