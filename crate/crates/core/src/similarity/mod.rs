//! Similarity layout of fretboard heatmaps.
//!
//! Grids are compared by the Euclidean distance of their L1-normalised count
//! vectors, so two players who favour the same cells are close no matter how
//! many notes they played. The distance matrix is embedded in the plane by
//! classical MDS, refined by SMACOF stress majorization, and finally snapped
//! onto a display grid by an optimal assignment.

pub mod assignment;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heatmap::{FretboardGrid, ShapeMismatch};
use crate::stats::quantile;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistanceError {
    #[error("distance matrix has {len} entries, expected {n}x{n}")]
    Shape { n: usize, len: usize },
    #[error("entry ({i}, {j}) is {value}; distances must be finite and nonnegative")]
    InvalidEntry { i: usize, j: usize, value: f64 },
    #[error("entry ({i}, {j}) differs from its transpose")]
    Asymmetric { i: usize, j: usize },
    #[error("diagonal entry {0} is not zero")]
    NonzeroDiagonal(usize),
}

/// A validated symmetric dissimilarity matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self, DistanceError> {
        if d.len() != n * n {
            return Err(DistanceError::Shape { n, len: d.len() });
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(DistanceError::NonzeroDiagonal(i));
            }
            for j in 0..n {
                let value = d[i * n + j];
                if !(value.is_finite() && value >= 0.0) {
                    return Err(DistanceError::InvalidEntry { i, j, value });
                }
                if value != d[j * n + i] {
                    return Err(DistanceError::Asymmetric { i, j });
                }
            }
        }
        Ok(Self { n, d })
    }

    /// Build from a function evaluated on the upper triangle.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, DistanceError> {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self::new(n, d)
    }

    pub fn from_points(points: &[Point]) -> Self {
        Self::from_fn(points.len(), |i, j| euclidean(points[i], points[j])).expect("point distances are valid")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

pub fn euclidean(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Euclidean distance between L1-normalised count vectors. An empty grid
/// normalises to the zero vector.
pub fn heatmap_distance(a: &FretboardGrid, b: &FretboardGrid) -> Result<f64, ShapeMismatch> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(ShapeMismatch { left_rows: a.rows, left_cols: a.cols, right_rows: b.rows, right_cols: b.cols });
    }
    let norm = |g: &FretboardGrid| {
        let total = g.mapped_total();
        if total == 0 {
            0.0
        } else {
            1.0 / total as f64
        }
    };
    let (na, nb) = (norm(a), norm(b));
    let sum: f64 = a
        .counts
        .iter()
        .zip(&b.counts)
        .map(|(&x, &y)| (x as f64 * na - y as f64 * nb).powi(2))
        .sum();
    Ok(sum.sqrt())
}

pub fn distance_matrix(grids: &[FretboardGrid]) -> Result<DistanceMatrix, ShapeMismatch> {
    let n = grids.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = heatmap_distance(&grids[i], &grids[j])?;
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix::new(n, d).expect("heatmap distances are valid"))
}

/// Classical (Torgerson) MDS into two dimensions.
///
/// Each axis is the eigenvector of `-1/2 J D² J` for one of the two largest
/// eigenvalues (clamped at zero), scaled by the eigenvalue's square root.
/// Axes are oriented so their entry of largest magnitude is positive, the
/// lowest index winning ties.
pub fn classical_mds(d: &DistanceMatrix) -> Vec<Point> {
    let n = d.len();
    if n <= 1 {
        return vec![[0.0, 0.0]; n];
    }
    let sq = DMatrix::from_fn(n, n, |i, j| d.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));

    let mut points = vec![[0.0, 0.0]; n];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let scale = eig.eigenvalues[k].max(0.0).sqrt();
        let column: Vec<f64> = eig.eigenvectors.column(k).iter().map(|x| x * scale).collect();
        let tol = 1e-12 * column.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut pivot = 0;
        for (i, x) in column.iter().enumerate() {
            if x.abs() > column[pivot].abs() + tol {
                pivot = i;
            }
        }
        let sign = if column[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (p, x) in points.iter_mut().zip(&column) {
            p[axis] = sign * x;
        }
    }
    points
}

/// Normalised stress `Σ(d_ij − ‖x_i − x_j‖)² / Σ d_ij²` over pairs i < j.
/// Zero when every dissimilarity is zero.
pub fn normalized_stress(d: &DistanceMatrix, points: &[Point]) -> f64 {
    let n = d.len();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let target = d.get(i, j);
            num += (target - euclidean(points[i], points[j])).powi(2);
            den += target * target;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmacofOptions {
    pub max_iterations: usize,
    /// Stop once an iteration lowers the stress by less than this.
    pub tolerance: f64,
}

impl Default for SmacofOptions {
    fn default() -> Self {
        Self { max_iterations: 300, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmacofResult {
    pub points: Vec<Point>,
    pub stress: f64,
    /// Stress of the initial configuration followed by one entry per
    /// iteration.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("initial configuration has {got} points for {expected} items")]
pub struct InitLengthMismatch {
    pub expected: usize,
    pub got: usize,
}

/// Metric SMACOF with unit weights, iterating the Guttman transform.
pub fn smacof(d: &DistanceMatrix, init: &[Point], opts: SmacofOptions) -> Result<SmacofResult, InitLengthMismatch> {
    let n = d.len();
    if init.len() != n {
        return Err(InitLengthMismatch { expected: n, got: init.len() });
    }
    if (0..n).all(|i| (0..n).all(|j| d.get(i, j) == 0.0)) {
        return Ok(SmacofResult { points: vec![[0.0, 0.0]; n], stress: 0.0, trace: vec![0.0] });
    }
    let mut x = init.to_vec();
    let mut stress = normalized_stress(d, &x);
    let mut trace = vec![stress];
    for _ in 0..opts.max_iterations {
        x = guttman_transform(d, &x);
        let next = normalized_stress(d, &x);
        trace.push(next);
        let decrease = stress - next;
        stress = next;
        if decrease < opts.tolerance {
            break;
        }
    }
    Ok(SmacofResult { points: x, stress, trace })
}

fn guttman_transform(d: &DistanceMatrix, x: &[Point]) -> Vec<Point> {
    let n = x.len();
    let mut out = vec![[0.0, 0.0]; n];
    for i in 0..n {
        let mut diag = 0.0;
        let mut acc = [0.0, 0.0];
        for j in 0..n {
            if i == j {
                continue;
            }
            let dist = euclidean(x[i], x[j]);
            let b = if dist > 0.0 { -d.get(i, j) / dist } else { 0.0 };
            diag -= b;
            acc[0] += b * x[j][0];
            acc[1] += b * x[j][1];
        }
        out[i] = [(acc[0] + diag * x[i][0]) / n as f64, (acc[1] + diag * x[i][1]) / n as f64];
    }
    out
}

/// Cells of a display grid chosen for each point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridAssignment {
    pub rows: usize,
    pub cols: usize,
    /// `(row, col)` per point.
    pub cells: Vec<(usize, usize)>,
}

/// Grid dimensions for `n` items: `⌈√n⌉` columns and as many rows as needed.
pub fn grid_shape(n: usize) -> (usize, usize) {
    if n == 0 {
        return (0, 0);
    }
    let mut cols = (n as f64).sqrt().ceil() as usize;
    while cols * cols < n {
        cols += 1;
    }
    while cols > 1 && (cols - 1) * (cols - 1) >= n {
        cols -= 1;
    }
    (n.div_ceil(cols), cols)
}

/// Points rescaled so their bounding box spans the cell centres of a
/// `rows × cols` grid, in (x = column, y = row) units.
pub fn scale_to_grid(points: &[Point], rows: usize, cols: usize) -> Vec<Point> {
    let axis = |k: usize, cells: usize| {
        let lo = points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        points
            .iter()
            .map(move |p| {
                if span > 1e-12 * (1.0 + hi.abs().max(lo.abs())) {
                    0.5 + (p[k] - lo) / span * (cells as f64 - 1.0)
                } else {
                    cells as f64 / 2.0
                }
            })
            .collect::<Vec<f64>>()
    };
    let xs = axis(0, cols);
    let ys = axis(1, rows);
    xs.into_iter().zip(ys).map(|(x, y)| [x, y]).collect()
}

/// Squared distance from every scaled point to every cell centre, cells in
/// row-major order.
pub fn snap_costs(points: &[Point]) -> (usize, usize, Vec<Vec<f64>>) {
    let (rows, cols) = grid_shape(points.len());
    let scaled = scale_to_grid(points, rows, cols);
    let costs = scaled
        .iter()
        .map(|p| {
            (0..rows * cols)
                .map(|cell| {
                    let (r, c) = (cell / cols, cell % cols);
                    (p[0] - (c as f64 + 0.5)).powi(2) + (p[1] - (r as f64 + 0.5)).powi(2)
                })
                .collect()
        })
        .collect();
    (rows, cols, costs)
}

/// Place every point in its own grid cell, minimising the total squared
/// distance between points and cell centres.
pub fn snap_to_grid(points: &[Point]) -> GridAssignment {
    let (rows, cols, costs) = snap_costs(points);
    let cells = assignment::min_cost_assignment(&costs).into_iter().map(|cell| (cell / cols, cell % cols)).collect();
    GridAssignment { rows, cols, cells }
}

pub const DEFAULT_OUTLIER_NEIGHBORS: usize = 3;

/// Flags items whose mean distance to their `k` nearest neighbours lies
/// above the upper Tukey fence `Q3 + 1.5·IQR` of all such scores. Fewer than
/// five items are never flagged.
pub fn detect_outliers(d: &DistanceMatrix, k: usize) -> Vec<bool> {
    let n = d.len();
    if n < 5 {
        return vec![false; n];
    }
    let scores = knn_scores(d, k);
    let q1 = quantile(&scores, 0.25).expect("nonempty");
    let q3 = quantile(&scores, 0.75).expect("nonempty");
    let fence = q3 + 1.5 * (q3 - q1);
    scores.iter().map(|&s| s > fence).collect()
}

/// Mean distance of each item to its `min(k, n-1)` nearest other items.
pub fn knn_scores(d: &DistanceMatrix, k: usize) -> Vec<f64> {
    let n = d.len();
    let k = k.max(1).min(n.saturating_sub(1));
    (0..n)
        .map(|i| {
            if k == 0 {
                return 0.0;
            }
            let mut others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d.get(i, j)).collect();
            others.sort_by(f64::total_cmp);
            others[..k].iter().sum::<f64>() / k as f64
        })
        .collect()
}

/// Final similarity layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout2D {
    pub points: Vec<Point>,
    pub stress: f64,
    /// `(row, col)` display cell per item.
    pub grid: Vec<(usize, usize)>,
    pub outliers: Vec<bool>,
}

impl Layout2D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn grid_shape(&self) -> (usize, usize) {
        grid_shape(self.points.len())
    }
}

/// Distances, classical MDS initialisation, SMACOF, grid snapping and
/// outlier flags in one call.
pub fn layout_from_distances(d: &DistanceMatrix, neighbors: usize) -> Layout2D {
    let init = classical_mds(d);
    let refined = smacof(d, &init, SmacofOptions::default()).expect("init has one point per item");
    let grid = snap_to_grid(&refined.points).cells;
    Layout2D { stress: refined.stress, grid, outliers: detect_outliers(d, neighbors), points: refined.points }
}

pub fn layout_grids(grids: &[FretboardGrid], neighbors: usize) -> Result<Layout2D, ShapeMismatch> {
    Ok(layout_from_distances(&distance_matrix(grids)?, neighbors))
}
