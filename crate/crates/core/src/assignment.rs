//! Square linear assignment: Hungarian method with row/column potentials.

/// Permutation `p` minimising `sum_i cost[i][p[i]]`, solved in `O(n^3)`.
///
/// `cost` is row-major `n x n`. Integer costs keep the optimum exact.
pub fn min_cost_assignment(cost: &[i64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // One-based indices, row/column 0 is a sentinel.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
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
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut p = vec![0usize; n];
    for j in 1..=n {
        p[owner[j] - 1] = j - 1;
    }
    p
}

/// Permutation maximising `sum_i gain[i][p[i]]` by trying all `n!` in
/// lexicographic order; the first maximiser wins, so identity wins ties.
pub fn max_gain_exhaustive(gain: &[i64], n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    let score = |p: &[usize]| -> i64 { p.iter().enumerate().map(|(i, &j)| gain[i * n + j]).sum() };
    let mut best = perm.clone();
    let mut best_score = score(&perm);
    while next_permutation(&mut perm) {
        let s = score(&perm);
        if s > best_score {
            best_score = s;
            best.copy_from_slice(&perm);
        }
    }
    best
}

/// Advances to the next lexicographic permutation; false after the last.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
