//! Rank-based fitness shaping.

/// Map raw fitness values to rank-based values in `[-1, 1]`, so a single
/// outlier cannot dominate the update. Ties share the average of their
/// positional ranks; the mapping preserves ordering by construction.
///
/// A singleton maps to `[0.0]`; an empty slice maps to an empty vector.
pub fn rank_transform(raw: &[f64]) -> Vec<f64> {
    let m = raw.len();
    if m == 0 {
        return Vec::new();
    }
    if m == 1 {
        return vec![0.0];
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));

    let mut ranks = vec![0.0; m];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j + 1 < m && raw[order[j + 1]] == raw[order[i]] {
            j += 1;
        }
        // positions i..=j hold equal values; share the mean rank
        let shared = (i + j) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = shared;
        }
        i = j + 1;
    }
    let denom = (m - 1) as f64;
    ranks.iter().map(|r| 2.0 * r / denom - 1.0).collect()
}
