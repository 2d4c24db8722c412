//! k-means++ seeding followed by Lloyd iterations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::regress::sorted_quantile;
use crate::scalar::Scalar;

const MAX_ITERATIONS: usize = 100;

fn sq_dist<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum()
}

/// `k` cluster centers of the rows of `data`.
pub fn kmeans<S: Scalar>(data: &Matrix<S>, k: usize, rng: &mut ChaCha8Rng) -> Result<Matrix<S>> {
    let (n, d) = (data.rows(), data.cols());
    if n == 0 || k == 0 {
        return Err(Error::EmptyInput("k-means needs data and at least one cluster"));
    }
    let mut centers = Matrix::zeros(k, d);
    centers.row_mut(0).copy_from_slice(data.row(rng.random_range(0..n)));
    let mut nearest: Vec<S> = (0..n).map(|i| sq_dist(data.row(i), centers.row(0))).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().map(|v| v.to_f64().unwrap_or(0.0)).sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, v) in nearest.iter().enumerate() {
                r -= v.to_f64().unwrap_or(0.0);
                if r <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).copy_from_slice(data.row(pick));
        for (i, v) in nearest.iter_mut().enumerate() {
            *v = v.min(sq_dist(data.row(i), centers.row(c)));
        }
    }

    let mut assignment = vec![usize::MAX; n];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (i, slot) in assignment.iter_mut().enumerate() {
            let row = data.row(i);
            let mut best = 0;
            let mut best_d = sq_dist(row, centers.row(0));
            for c in 1..k {
                let dist = sq_dist(row, centers.row(c));
                if dist < best_d {
                    best = c;
                    best_d = dist;
                }
            }
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Matrix::<S>::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums.row_mut(c).iter_mut().zip(data.row(i)) {
                *s += *v;
            }
        }
        for c in 0..k {
            // An emptied cluster keeps its previous center.
            if counts[c] > 0 {
                let cnt = S::c(counts[c] as f64);
                for (dst, s) in centers.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = *s / cnt;
                }
            }
        }
    }
    Ok(centers)
}

/// Median Euclidean distance over distinct center pairs, or 1 when the
/// centers coincide.
pub fn median_center_distance<S: Scalar>(centers: &Matrix<S>) -> S {
    let k = centers.rows();
    let mut dists = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            dists.push(sq_dist(centers.row(a), centers.row(b)).sqrt());
        }
    }
    if dists.is_empty() {
        return S::one();
    }
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let m = sorted_quantile(&dists, S::c(0.5));
    if m > S::zero() {
        m
    } else {
        S::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn separated_blobs_are_found() {
        let mut rows = Vec::new();
        for (cx, cy) in [(0.0, 0.0), (10.0, 10.0), (-10.0, 10.0)] {
            for k in 0..20 {
                let j = k as f64 * 0.01;
                rows.push(vec![cx + j, cy - j]);
            }
        }
        let data = Matrix::<f64>::from_rows(&rows).unwrap();
        let centers = kmeans(&data, 3, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let mut xs: Vec<f64> = (0..3).map(|c| centers.get(c, 0).round()).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![-10.0, 0.0, 10.0]);
        let again = kmeans(&data, 3, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(centers, again);
    }

    #[test]
    fn more_clusters_than_distinct_points() {
        let data = Matrix::<f64>::from_rows(&[[1.0], [1.0], [1.0]]).unwrap();
        let centers = kmeans(&data, 16, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(centers.rows(), 16);
        assert_eq!(median_center_distance(&centers), 1.0);
    }
}
