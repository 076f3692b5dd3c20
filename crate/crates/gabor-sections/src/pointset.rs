//! Ball-truncated point sets Λ_n = Λ ∩ B_n(0) for lattices and explicit
//! point clouds.
//!
//! Points carry a canonical order — ascending norm, then lexicographic
//! coordinates — so the set at a smaller radius is literally a prefix of
//! the set at a larger one. Gram sections inherit this: a sub-radius
//! section is a leading principal submatrix, which makes eigenvalue
//! interlacing checks trivial.

use crate::tf::TfPoint;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::path::Path;
use thiserror::Error;

pub const DEFAULT_POINT_CAP: usize = 20_000;

#[derive(Debug, Error)]
pub enum PointSetError {
    #[error("lattice generator is singular (|det| = {det:.3e})")]
    SingularGenerator { det: f64 },
    #[error("generator must be a {expected}x{expected} matrix for dimension {dim}")]
    BadGeneratorShape { expected: usize, dim: usize },
    #[error("ball of radius {radius} holds {count} points, exceeding the cap {cap}")]
    TooManyPoints {
        radius: f64,
        count: usize,
        cap: usize,
    },
    #[error("radii must be ascending")]
    RadiiNotAscending,
    #[error("radius {radius} exceeds the enumerated radius {max}")]
    RadiusBeyondEnumeration { radius: f64, max: f64 },
    #[error("point set is empty")]
    Empty,
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A full-rank lattice Λ = Aℤ^{2d} given by its 2d×2d generator matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    generator: DMatrix<f64>,
    inverse: DMatrix<f64>,
    dim: usize,
}

impl LatticeSpec {
    /// Builds a lattice from the generator's rows (row-major, 2d×2d).
    pub fn new(dim: usize, rows: &[Vec<f64>]) -> Result<Self, PointSetError> {
        let n = 2 * dim;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(PointSetError::BadGeneratorShape { expected: n, dim });
        }
        let generator = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let det = generator.determinant();
        if det.abs() <= 1e-12 {
            return Err(PointSetError::SingularGenerator { det });
        }
        let inverse = generator
            .clone()
            .try_inverse()
            .ok_or(PointSetError::SingularGenerator { det })?;
        Ok(Self {
            generator,
            inverse,
            dim,
        })
    }

    /// ℤ^{2d} itself.
    pub fn identity(dim: usize) -> Self {
        let n = 2 * dim;
        Self {
            generator: DMatrix::identity(n, n),
            inverse: DMatrix::identity(n, n),
            dim,
        }
    }

    /// s·ℤ^{2d} (square lattice scaled by s). s = 1/√2 gives the
    /// oversampled density-2 configuration used in the examples.
    pub fn scaled_identity(dim: usize, s: f64) -> Result<Self, PointSetError> {
        let n = 2 * dim;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { s } else { 0.0 }).collect())
            .collect();
        Self::new(dim, &rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    fn point(&self, k: &[i64]) -> TfPoint {
        let n = 2 * self.dim;
        let mut coords = vec![0.0; n];
        for (i, c) in coords.iter_mut().enumerate() {
            for (j, &kj) in k.iter().enumerate() {
                *c += self.generator[(i, j)] * kj as f64;
            }
        }
        TfPoint {
            x: coords[..self.dim].to_vec(),
            xi: coords[self.dim..].to_vec(),
        }
    }

    /// A⁻¹λ — integer to ~1e-9 whenever λ really lies on the lattice.
    pub fn coefficients(&self, z: &TfPoint) -> Vec<f64> {
        let n = 2 * self.dim;
        let coords: Vec<f64> = z.x.iter().chain(z.xi.iter()).copied().collect();
        (0..n)
            .map(|i| (0..n).map(|j| self.inverse[(i, j)] * coords[j]).sum())
            .collect()
    }

    /// Shortest nonzero lattice vector length.
    pub fn minimal_distance(&self) -> f64 {
        let n = 2 * self.dim;
        let shortest_col = (0..n)
            .map(|j| self.generator.column(j).norm())
            .fold(f64::INFINITY, f64::min);
        let row_sum = max_row_sum(&self.inverse);
        let kmax = (row_sum * shortest_col).ceil() as i64 + 1;
        let mut best = shortest_col;
        let mut k = vec![-kmax; n];
        'outer: loop {
            if k.iter().any(|&v| v != 0) {
                let p = self.point(&k);
                let r = p.norm();
                if r > 0.0 && r < best {
                    best = r;
                }
            }
            for c in 0..n {
                k[c] += 1;
                if k[c] <= kmax {
                    continue 'outer;
                }
                k[c] = -kmax;
            }
            break;
        }
        best
    }
}

fn max_row_sum(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PointSource {
    Lattice,
    Explicit,
}

/// Points of Λ ∩ B_n(0) in canonical order (norm, then lexicographic).
/// The position of a point in `points` is its stable id.
#[derive(Debug, Clone)]
pub struct PointSet {
    points: Vec<TfPoint>,
    norms: Vec<f64>,
    radius: f64,
    dim: usize,
    source: PointSource,
}

/// Boundary tolerance: |λ| ≤ n + 1e-12 counts as inside the closed ball.
const BALL_TOL: f64 = 1e-12;

fn canonical_cmp(a: &(f64, TfPoint), b: &(f64, TfPoint)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| {
        for (p, q) in a.1.x.iter().zip(&b.1.x) {
            match p.total_cmp(q) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        for (p, q) in a.1.xi.iter().zip(&b.1.xi) {
            match p.total_cmp(q) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    })
}

/// Enumerates all lattice points with |Ak| ≤ n. The integer search box
/// comes from |k|_∞ = |A⁻¹λ|_∞ ≤ ‖A⁻¹‖_row |λ|.
pub fn enumerate_lattice_in_ball(
    lat: &LatticeSpec,
    n: f64,
    cap: usize,
) -> Result<PointSet, PointSetError> {
    assert!(n >= 0.0 && n.is_finite(), "radius must be finite and >= 0");
    let two_d = 2 * lat.dim;
    let kmax = (max_row_sum(&lat.inverse) * n).ceil() as i64 + 1;
    let mut found: Vec<(f64, TfPoint)> = Vec::new();
    let mut k = vec![-kmax; two_d];
    'outer: loop {
        let p = lat.point(&k);
        let r = p.norm();
        if r <= n + BALL_TOL {
            found.push((r, p));
            if found.len() > cap {
                return Err(PointSetError::TooManyPoints {
                    radius: n,
                    count: found.len(),
                    cap,
                });
            }
        }
        for c in 0..two_d {
            k[c] += 1;
            if k[c] <= kmax {
                continue 'outer;
            }
            k[c] = -kmax;
        }
        break;
    }
    found.sort_by(canonical_cmp);
    Ok(PointSet {
        norms: found.iter().map(|(r, _)| *r).collect(),
        points: found.into_iter().map(|(_, p)| p).collect(),
        radius: n,
        dim: lat.dim,
        source: PointSource::Lattice,
    })
}

impl PointSet {
    /// An explicit point cloud; the truncation radius is the largest norm.
    pub fn from_points(dim: usize, pts: Vec<TfPoint>) -> Result<Self, PointSetError> {
        if pts.is_empty() {
            return Err(PointSetError::Empty);
        }
        let mut tagged: Vec<(f64, TfPoint)> = pts.into_iter().map(|p| (p.norm(), p)).collect();
        tagged.sort_by(canonical_cmp);
        let radius = tagged.last().map(|(r, _)| *r).unwrap_or(0.0);
        Ok(PointSet {
            norms: tagged.iter().map(|(r, _)| *r).collect(),
            points: tagged.into_iter().map(|(_, p)| p).collect(),
            radius,
            dim,
            source: PointSource::Explicit,
        })
    }

    /// Reads an explicit point cloud from CSV with header columns
    /// x_1..x_d, xi_1..xi_d.
    pub fn from_csv(path: &Path) -> Result<Self, PointSetError> {
        let mut rdr = csv::Reader::from_path(path)
            .map_err(|e| PointSetError::Csv(e.to_string()))?;
        let headers = rdr
            .headers()
            .map_err(|e| PointSetError::Csv(e.to_string()))?
            .clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        if cols.len() < 2 || cols.len() % 2 != 0 {
            return Err(PointSetError::Csv(format!(
                "expected an even number of columns x_1..x_d, xi_1..xi_d, got {cols:?}"
            )));
        }
        let d = cols.len() / 2;
        for i in 0..d {
            if cols[i] != format!("x_{}", i + 1) || cols[d + i] != format!("xi_{}", i + 1) {
                return Err(PointSetError::Csv(format!(
                    "expected headers x_1..x_{d}, xi_1..xi_{d}, got {cols:?}"
                )));
            }
        }
        let mut pts = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| PointSetError::Csv(e.to_string()))?;
            let vals: Result<Vec<f64>, _> =
                rec.iter().map(|s| s.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| PointSetError::Csv(e.to_string()))?;
            if vals.len() != 2 * d {
                return Err(PointSetError::Csv(format!(
                    "row has {} fields, expected {}",
                    vals.len(),
                    2 * d
                )));
            }
            pts.push(
                TfPoint::new(vals[..d].to_vec(), vals[d..].to_vec())
                    .map_err(|e| PointSetError::Csv(e.to_string()))?,
            );
        }
        Self::from_points(d, pts)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn source(&self) -> &PointSource {
        &self.source
    }

    pub fn points(&self) -> &[TfPoint] {
        &self.points
    }

    pub fn point(&self, id: usize) -> &TfPoint {
        &self.points[id]
    }

    /// Norms in canonical (ascending) order.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Number of points with |λ| ≤ r; under the canonical order these are
    /// exactly the first `prefix_len(r)` points.
    pub fn prefix_len(&self, r: f64) -> usize {
        self.norms.partition_point(|&n| n <= r + BALL_TOL)
    }

    /// Prefix lengths for a list of ascending radii. The mask for radii[j]
    /// is the index range 0..lens[j]; masks are nested by construction.
    pub fn nested_masks(&self, radii: &[f64]) -> Result<Vec<usize>, PointSetError> {
        if radii.windows(2).any(|w| w[1] < w[0]) {
            return Err(PointSetError::RadiiNotAscending);
        }
        if let Some(&last) = radii.last() {
            if last > self.radius + BALL_TOL {
                return Err(PointSetError::RadiusBeyondEnumeration {
                    radius: last,
                    max: self.radius,
                });
            }
        }
        Ok(radii.iter().map(|&r| self.prefix_len(r)).collect())
    }
}

/// max_z #{λ : |λ - z| ≤ 1}, scanned over the points themselves plus a
/// half-step grid covering the ball. For a lattice the maximum is attained
/// at lattice points, so the scan is exact once the grid step is at most
/// half the minimal lattice distance.
pub fn relative_separation(ps: &PointSet) -> usize {
    assert!(!ps.is_empty(), "point set must be nonempty");
    let two_d = 2 * ps.dim;

    // bucket points into unit cells for O(1) neighborhood lookups
    let cell_of = |p: &TfPoint| -> Vec<i64> {
        p.x.iter()
            .chain(p.xi.iter())
            .map(|&c| c.floor() as i64)
            .collect()
    };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in ps.points.iter().enumerate() {
        buckets.entry(cell_of(p)).or_default().push(i);
    }
    let count_near = |center: &[f64]| -> usize {
        let base: Vec<i64> = center.iter().map(|&c| c.floor() as i64).collect();
        let mut count = 0;
        let mut off = vec![-1i64; two_d];
        'outer: loop {
            let cell: Vec<i64> = base.iter().zip(&off).map(|(b, o)| b + o).collect();
            if let Some(ids) = buckets.get(&cell) {
                for &i in ids {
                    let p = &ps.points[i];
                    let d2: f64 = p
                        .x
                        .iter()
                        .chain(p.xi.iter())
                        .zip(center)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    if d2 <= 1.0 + BALL_TOL {
                        count += 1;
                    }
                }
            }
            for c in 0..two_d {
                off[c] += 1;
                if off[c] <= 1 {
                    continue 'outer;
                }
                off[c] = -1;
            }
            break;
        }
        count
    };

    let mut best = 0;
    for p in &ps.points {
        let center: Vec<f64> = p.x.iter().chain(p.xi.iter()).copied().collect();
        best = best.max(count_near(&center));
    }

    let min_dist = minimal_pairwise_distance(ps);
    let step = (min_dist / 2.0).min(0.5).max(1e-3);
    let r = ps.radius;
    let m = (r / step).ceil() as i64;
    let centers = ((2 * m + 1) as usize).checked_pow(two_d as u32);
    if centers.is_some_and(|c| c <= 2_000_000) {
        let mut k = vec![-m; two_d];
        'outer: loop {
            let center: Vec<f64> = k.iter().map(|&v| v as f64 * step).collect();
            if center.iter().map(|c| c * c).sum::<f64>() <= r * r + BALL_TOL {
                best = best.max(count_near(&center));
            }
            for c in 0..two_d {
                k[c] += 1;
                if k[c] <= m {
                    continue 'outer;
                }
                k[c] = -m;
            }
            break;
        }
    }
    best
}

fn minimal_pairwise_distance(ps: &PointSet) -> f64 {
    // norms are sorted; nearby-norm pairs suffice for a good upper bound,
    // and any overestimate only coarsens the scan grid
    let n = ps.len();
    if n < 2 {
        return 1.0;
    }
    let mut best = f64::INFINITY;
    let window = 64.min(n - 1);
    for i in 0..n {
        for j in (i + 1)..(i + 1 + window).min(n) {
            let d = ps.points[i].sub(&ps.points[j]).norm();
            if d > 0.0 && d < best {
                best = d;
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        1.0
    }
}
