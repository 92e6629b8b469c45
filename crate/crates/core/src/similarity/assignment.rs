//! Minimum-cost rectangular assignment (Hungarian method with potentials).

/// Assign every row to a distinct column so that the summed cost is minimal.
///
/// `cost` is `rows × cols` with `rows <= cols`. Among all optimal
/// assignments the lexicographically smallest column vector is returned,
/// comparing the column of row 0 first. Costs closer than a relative `1e-9`
/// are treated as ties.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let rows = cost.len();
    if rows == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(rows <= m, "more rows than columns");
    assert!(cost.iter().all(|r| r.len() == m), "ragged cost matrix");

    // Pad with zero-cost dummy rows so the problem is square.
    let a = |i: usize, j: usize| if i < rows { cost[i][j] } else { 0.0 };

    // 1-based arrays; index 0 is the virtual start column.
    let mut u = vec![0.0f64; m + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=m {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
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

    let mut col_of = vec![0usize; m];
    let mut row_of = vec![0usize; m];
    for j in 1..=m {
        col_of[owner[j] - 1] = j - 1;
        row_of[j - 1] = owner[j] - 1;
    }

    // Any perfect matching on tight edges (zero reduced cost) is optimal, so
    // the lexicographic choice only has to search that subgraph.
    let scale = cost.iter().flatten().fold(1.0f64, |acc, c| acc.max(c.abs()));
    let eps = 1e-9 * scale;
    let tight = |i: usize, j: usize| (a(i, j) - u[i + 1] - v[j + 1]).abs() <= eps;

    let mut fixed = vec![false; m];
    for i in 0..rows {
        for j in 0..m {
            if !tight(i, j) {
                continue;
            }
            if col_of[i] == j {
                break;
            }
            let displaced = row_of[j];
            if fixed[displaced] {
                continue;
            }
            if let Some(moves) = reroute(displaced, col_of[i], j, i, &fixed, &col_of, &row_of, m, &tight) {
                for (r, c) in moves.into_iter().chain(std::iter::once((i, j))) {
                    col_of[r] = c;
                    row_of[c] = r;
                }
                break;
            }
        }
        fixed[i] = true;
    }
    col_of.truncate(rows);
    col_of
}

// Breadth-first search for an alternating path that moves `start` off
// `taken` and ends on column `free`, using tight edges and unfixed rows.
#[allow(clippy::too_many_arguments)]
fn reroute(
    start: usize,
    free: usize,
    taken: usize,
    mover: usize,
    fixed: &[bool],
    col_of: &[usize],
    row_of: &[usize],
    m: usize,
    tight: &impl Fn(usize, usize) -> bool,
) -> Option<Vec<(usize, usize)>> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; m];
    let mut visited = vec![false; m];
    visited[start] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(r) = queue.pop_front() {
        for c in 0..m {
            if c == taken || c == col_of[r] || !tight(r, c) {
                continue;
            }
            if c == free {
                let mut moves = vec![(r, c)];
                let mut row = r;
                while let Some((prev, col)) = parent[row] {
                    moves.push((prev, col));
                    row = prev;
                }
                return Some(moves);
            }
            let q = row_of[c];
            if q == mover || fixed[q] || visited[q] {
                continue;
            }
            visited[q] = true;
            parent[q] = Some((r, c));
            queue.push_back(q);
        }
    }
    None
}

pub fn assignment_cost(cost: &[Vec<f64>], assignment: &[usize]) -> f64 {
    assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
}
