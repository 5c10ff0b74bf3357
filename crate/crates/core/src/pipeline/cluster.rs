//! Agglomerative clustering with Ward linkage via Lance–Williams updates.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult<R: Real> {
    /// Cluster label per input unit, relabeled to 0..k in order of first
    /// appearance by unit index.
    pub labels: Vec<usize>,
    pub k: usize,
    /// (cluster a, cluster b, merge distance) per merge, oldest first.
    /// Original units are 0..n; the cluster created by merge t is n + t.
    pub merge_history: Vec<(usize, usize, R)>,
}

/// Cut an agglomerative Ward dendrogram at `k` clusters. Merge distances are
/// Ward costs seeded with squared Euclidean distances, so the history is
/// non-decreasing.
pub fn ward_cluster<R: Real>(features: &Array2<R>, k: usize) -> Result<ClusterResult<R>> {
    let n = features.nrows();
    if n == 0 {
        return Err(Error::invalid("ward_cluster needs at least one unit"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k must lie in [1, {n}], got {k}")));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("ward_cluster requires finite features"));
    }

    // active[slot] = (cluster id, size); dist[a][b] for active slots
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes: Vec<R> = vec![R::one(); n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut dist = vec![vec![R::zero(); n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let d = features
                .row(a)
                .iter()
                .zip(features.row(b))
                .map(|(&x, &y)| (x - y) * (x - y))
                .sum::<R>();
            dist[a][b] = d;
            dist[b][a] = d;
        }
    }

    let mut merge_history = Vec::with_capacity(n - k);
    for step in 0..(n - k) {
        // closest active pair, ties broken towards smaller slot indices
        let mut best: Option<(usize, usize, R)> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                let d = dist[a][b];
                if best.map_or(true, |(_, _, bd)| d < bd) {
                    best = Some((a, b, d));
                }
            }
        }
        let (a, b, d) = best.expect("at least two active clusters");
        merge_history.push((ids[a], ids[b], d));

        // Lance–Williams update for Ward linkage
        let (na, nb) = (sizes[a], sizes[b]);
        for &c in &active {
            if c == a || c == b {
                continue;
            }
            let nc = sizes[c];
            let updated =
                ((na + nc) * dist[a][c] + (nb + nc) * dist[b][c] - nc * d) / (na + nb + nc);
            dist[a][c] = updated;
            dist[c][a] = updated;
        }
        // merged cluster lives in slot a
        ids[a] = n + step;
        sizes[a] = na + nb;
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        active.retain(|&s| s != b);
    }

    // relabel surviving clusters in order of their smallest unit index
    let mut slot_min: Vec<(usize, usize)> = active
        .iter()
        .map(|&s| (*members[s].iter().min().expect("non-empty cluster"), s))
        .collect();
    slot_min.sort_unstable();
    let mut labels = vec![0usize; n];
    for (label, &(_, slot)) in slot_min.iter().enumerate() {
        for &unit in &members[slot] {
            labels[unit] = label;
        }
    }
    Ok(ClusterResult { labels, k, merge_history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn blob_features(centers: &[(f64, f64)], per_blob: usize, sd: f64, seed: u64) -> Array2<f64> {
        let mut rng = RngStream::new(seed, 0);
        let n = centers.len() * per_blob;
        let mut flat = Vec::with_capacity(2 * n);
        for &(cx, cy) in centers {
            for _ in 0..per_blob {
                flat.push(cx + sd * rng.std_normal_f64());
                flat.push(cy + sd * rng.std_normal_f64());
            }
        }
        Array2::from_shape_vec((n, 2), flat).unwrap()
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let f = blob_features(&[(0.0, 0.0)], 5, 1.0, 1);
        let r = ward_cluster(&f, 5).unwrap();
        assert_eq!(r.merge_history.len(), 0);
        let mut labels = r.labels.clone();
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn separated_blobs_recovered_exactly() {
        let f = blob_features(&[(0.0, 0.0), (100.0, 0.0)], 10, 1.0, 2);
        let r = ward_cluster(&f, 2).unwrap();
        // brute-force oracle: assign to the nearest blob center
        for i in 0..10 {
            assert_eq!(r.labels[i], r.labels[0]);
        }
        for i in 10..20 {
            assert_eq!(r.labels[i], r.labels[10]);
        }
        assert_ne!(r.labels[0], r.labels[10]);
    }

    #[test]
    fn merge_distances_are_non_decreasing() {
        let f = blob_features(&[(0.0, 0.0), (3.0, 1.0), (6.0, -2.0)], 8, 1.0, 3);
        let r = ward_cluster(&f, 1).unwrap();
        assert_eq!(r.merge_history.len(), 23);
        for w in r.merge_history.windows(2) {
            assert!(w[0].2 <= w[1].2, "{} > {}", w[0].2, w[1].2);
        }
    }

    #[test]
    fn labels_invariant_to_row_permutation_up_to_renaming() {
        let f = blob_features(&[(0.0, 0.0), (50.0, 0.0), (0.0, 50.0)], 6, 1.0, 4);
        let r = ward_cluster(&f, 3).unwrap();
        // reverse the rows
        let n = f.nrows();
        let rev = Array2::from_shape_fn(f.dim(), |(i, j)| f[(n - 1 - i, j)]);
        let r2 = ward_cluster(&rev, 3).unwrap();
        // partition must match after undoing the permutation
        for i in 0..n {
            for j in 0..n {
                let same_a = r.labels[i] == r.labels[j];
                let same_b = r2.labels[n - 1 - i] == r2.labels[n - 1 - j];
                assert_eq!(same_a, same_b, "units {i},{j} disagree");
            }
        }
    }

    #[test]
    fn bad_inputs_rejected() {
        let f = blob_features(&[(0.0, 0.0)], 4, 1.0, 5);
        assert!(ward_cluster(&f, 0).is_err());
        assert!(ward_cluster(&f, 5).is_err());
        let mut nan = f.clone();
        nan[(0, 0)] = f64::NAN;
        assert!(ward_cluster(&nan, 2).is_err());
    }
}
