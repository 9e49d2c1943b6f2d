//! Exact maximum-weight one-to-one assignment (Kuhn-Munkres with potentials,
//! O(n^2 m) for an n x m matrix with n <= m).

/// Returns the maximum total weight over all one-to-one assignments of rows
/// to columns. Unassigned rows or columns contribute nothing. Weights must
/// be finite and non-negative.
pub(crate) fn max_total_weight(weights: &[Vec<f64>]) -> f64 {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    if rows > cols {
        let transposed: Vec<Vec<f64>> = (0..cols)
            .map(|j| (0..rows).map(|i| weights[i][j]).collect())
            .collect();
        return max_total_weight(&transposed);
    }

    let max_w = weights.iter().flatten().fold(0.0_f64, |acc, &w| acc.max(w));
    // minimize cost = max_w - weight; every row ends up matched, which is
    // optimal for non-negative weights
    let cost = |i: usize, j: usize| max_w - weights[i][j];

    let n = rows;
    let m = cols;
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; m + 1];
    let mut matched_row = vec![0usize; m + 1]; // row matched to column j, 0 = none
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut total = 0.0;
    for j in 1..=m {
        if matched_row[j] != 0 {
            total += weights[matched_row[j] - 1][j - 1];
        }
    }
    total
}
