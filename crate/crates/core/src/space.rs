//! Metric spaces that instances live in: euclidean point sets of any
//! dimension, or an explicit distance matrix validated against the metric
//! axioms.

use crate::error::{Error, Result};

/// Tolerance for the triangle-inequality validation of explicit matrices,
/// relative to the distance being checked.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// Symmetric distance matrix over `n` points, stored as the row-major upper
/// triangle (diagonal excluded, implicitly zero).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from its upper triangle and validates symmetry (by
    /// construction), nonnegativity, and the triangle inequality within
    /// [`TRIANGLE_TOL`].
    pub fn new(n: usize, upper: Vec<f64>) -> Result<Self> {
        let expect = n * (n.saturating_sub(1)) / 2;
        if upper.len() != expect {
            return Err(Error::InvalidMetric(format!(
                "upper triangle for {n} points needs {expect} entries, got {}",
                upper.len()
            )));
        }
        for (idx, &d) in upper.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidMetric(format!(
                    "distance entry {idx} is {d}, must be finite and nonnegative"
                )));
            }
        }
        let m = DistanceMatrix { n, upper };
        m.validate_triangle()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn upper_triangle(&self) -> &[f64] {
        &self.upper
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else if i < j {
            self.upper[self.idx(i, j)]
        } else {
            self.upper[self.idx(j, i)]
        }
    }

    fn validate_triangle(&self) -> Result<()> {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let dij = self.get(i, j);
                let tol = TRIANGLE_TOL * dij.max(1.0);
                for k in 0..self.n {
                    if k == i || k == j {
                        continue;
                    }
                    if dij > self.get(i, k) + self.get(k, j) + tol {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality violated: d({i},{j}) = {dij} > d({i},{k}) + d({k},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The two supported metric kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum Space {
    /// Points with coordinates in `dim`-dimensional euclidean space.
    Euclidean { dim: usize, points: Vec<Vec<f64>> },
    /// Explicit, validated distance matrix.
    Matrix(DistanceMatrix),
}

impl Space {
    pub fn euclidean(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMetric("euclidean dimension must be >= 1".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidMetric(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMetric(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(Space::Euclidean { dim, points })
    }

    pub fn matrix(m: DistanceMatrix) -> Self {
        Space::Matrix(m)
    }

    /// Number of points the space is defined over.
    pub fn point_count(&self) -> usize {
        match self {
            Space::Euclidean { points, .. } => points.len(),
            Space::Matrix(m) => m.len(),
        }
    }

    /// Doubling dimension when known. Euclidean space of dimension `m` has
    /// doubling dimension `m`; an explicit matrix carries none.
    pub fn doubling_dim(&self) -> Option<f64> {
        match self {
            Space::Euclidean { dim, .. } => Some(*dim as f64),
            Space::Matrix(_) => None,
        }
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        match self {
            Space::Euclidean { points, .. } => {
                let pa = &points[a];
                let pb = &points[b];
                pa.iter()
                    .zip(pb)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            }
            Space::Matrix(m) => m.get(a, b),
        }
    }
}
