//! Nondominated sets under lower-is-better on both axes.

use std::cmp::Ordering;

/// Items not dominated by any other: `b` dominates `a` when
/// `b.time <= a.time` and `b.quality <= a.quality` with one strict.
/// Exact ties keep both. Output keeps the input order.
pub fn nondominated<T: Clone>(points: &[(T, f64, f64)]) -> Vec<T> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (ta, qa) = (points[a].1, points[a].2);
        let (tb, qb) = (points[b].1, points[b].2);
        ta.total_cmp(&tb).then(qa.total_cmp(&qb))
    });
    let mut keep = vec![false; points.len()];
    // Best quality among strictly faster items.
    let mut best_before = f64::INFINITY;
    let mut i = 0;
    while i < order.len() {
        let t = points[order[i]].1;
        let mut j = i;
        while j < order.len() && points[order[j]].1.total_cmp(&t) == Ordering::Equal {
            j += 1;
        }
        // Sorted by quality inside the group, so the first is the group best.
        let group_best = points[order[i]].2;
        for &k in &order[i..j] {
            let q = points[k].2;
            keep[k] = q <= group_best && q < best_before;
        }
        best_before = best_before.min(group_best);
        i = j;
    }
    points.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p.0.clone()).collect()
}

/// Quadratic reference implementation of [`nondominated`].
pub fn nondominated_brute_force<T: Clone>(points: &[(T, f64, f64)]) -> Vec<T> {
    points
        .iter()
        .filter(|a| !points.iter().any(|b| b.1 <= a.1 && b.2 <= a.2 && (b.1 < a.1 || b.2 < a.2)))
        .map(|p| p.0.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let pts = [("A", 1.0, 5.0), ("B", 2.0, 3.0), ("C", 3.0, 4.0)];
        assert_eq!(nondominated(&pts), vec!["A", "B"]);
        assert_eq!(nondominated(&[("A", 4.0, 4.0)]), vec!["A"]);
        assert_eq!(nondominated(&[("A", 1.0, 1.0), ("B", 1.0, 1.0)]), vec!["A", "B"]);
        assert_eq!(nondominated(&[("A", 1.0, 2.0), ("B", 1.0, 1.0)]), vec!["B"]);
        assert_eq!(nondominated(&[("A", 1.0, 1.0), ("B", 2.0, 1.0)]), vec!["A"]);
        assert!(nondominated::<&str>(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn matches_brute_force(pts in prop::collection::vec((0u8..6, 0u8..6), 1..25)) {
            let pts: Vec<(usize, f64, f64)> =
                pts.iter().enumerate().map(|(i, (t, q))| (i, f64::from(*t), f64::from(*q))).collect();
            prop_assert_eq!(nondominated(&pts), nondominated_brute_force(&pts));
        }
    }
}
