use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randomness::Params;
use crate::scalar::Scalar;

/// Node placement on `[-lambda/2, lambda/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mesh {
    Uniform,
    /// Nodes clustered towards both endpoints, with endpoint distance scaling like
    /// `(index distance)^(1/q)`. Useful for small `q` where `F'` blows up at the ends.
    Graded,
    /// Arbitrary nodes, e.g. read back from a file.
    Custom,
}

/// Strictly increasing nodes from `-lambda/2` to `lambda/2`, endpoints exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    params: Params<T>,
    nodes: Vec<T>,
    mesh: Mesh,
}

impl<T: Scalar> Grid<T> {
    /// `segments + 1` nodes. Graded meshes need an even segment count.
    pub fn new(params: Params<T>, segments: usize, mesh: Mesh) -> Result<Self> {
        if segments == 0 {
            return Err(Error::InvalidParams("grid needs at least one segment".into()));
        }
        let half = params.half();
        let nf = T::from_usize_lossy(segments);
        let mut nodes: Vec<T> = match mesh {
            Mesh::Custom => {
                return Err(Error::InvalidParams("custom meshes are built with Grid::from_nodes".into()))
            }
            Mesh::Uniform => (0..=segments)
                .map(|i| -half + params.lambda * T::from_usize_lossy(i) / nf)
                .collect(),
            Mesh::Graded => {
                if !segments.is_multiple_of(2) {
                    return Err(Error::InvalidParams("graded mesh needs an even segment count".into()));
                }
                let inv_q = params.q.recip();
                let two = T::lit(2.0);
                (0..=segments)
                    .map(|i| {
                        if 2 * i <= segments {
                            -half + half * (two * T::from_usize_lossy(i) / nf).powf(inv_q)
                        } else {
                            half - half * (two * T::from_usize_lossy(segments - i) / nf).powf(inv_q)
                        }
                    })
                    .collect()
            }
        };
        nodes[0] = -half;
        nodes[segments] = half;
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams("grid nodes are not strictly increasing at this resolution".into()));
        }
        Ok(Self { params, nodes, mesh })
    }

    /// Grid from explicit nodes; endpoints must be `-lambda/2` and `lambda/2` (within 1e-12 relative).
    pub fn from_nodes(params: Params<T>, mut nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidParams("grid needs at least two nodes".into()));
        }
        let half = params.half();
        let tol = T::lit(1e-12) * params.lambda;
        let last = nodes.len() - 1;
        if (nodes[0] + half).abs() > tol || (nodes[last] - half).abs() > tol {
            return Err(Error::GridMismatch("grid endpoints must be -lambda/2 and lambda/2".into()));
        }
        nodes[0] = -half;
        nodes[last] = half;
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams("grid nodes are not strictly increasing".into()));
        }
        let uniform = Self::uniform(params, last)?;
        let close = uniform.nodes.iter().zip(&nodes).all(|(a, b)| (*a - *b).abs() <= tol);
        if close {
            return Ok(uniform);
        }
        Ok(Self { params, nodes, mesh: Mesh::Custom })
    }

    pub fn uniform(params: Params<T>, segments: usize) -> Result<Self> {
        Self::new(params, segments, Mesh::Uniform)
    }

    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn segments(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Spacing of a uniform grid.
    pub fn step(&self) -> Option<T> {
        (self.mesh == Mesh::Uniform).then(|| self.params.lambda / T::from_usize_lossy(self.segments()))
    }

    /// Index of the segment containing `z` (clamped to the grid).
    pub fn locate(&self, z: T) -> usize {
        let n = self.segments();
        if z <= self.nodes[0] {
            return 0;
        }
        if z >= self.nodes[n] {
            return n - 1;
        }
        // first node strictly greater than z, minus one
        self.nodes.partition_point(|&x| x <= z).saturating_sub(1).min(n - 1)
    }

    pub fn same_as(&self, other: &Grid<T>) -> bool {
        std::ptr::eq(self, other) || (self.params == other.params && self.mesh == other.mesh && self.nodes == other.nodes)
    }
}

/// Piecewise-linear function on a [`Grid`], given by its nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.nodes().len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.nodes().len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<Grid<T>>, c: T) -> Self {
        let values = vec![c; grid.nodes().len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<Grid<T>>, f: impl Fn(T) -> T) -> Self {
        let values = grid.nodes().iter().map(|&z| f(z)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn params(&self) -> &Params<T> {
        self.grid.params()
    }

    pub fn nodes(&self) -> &[T] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn segments(&self) -> usize {
        self.grid.segments()
    }

    /// Value at the right endpoint `lambda/2`.
    pub fn right_value(&self) -> T {
        self.values[self.values.len() - 1]
    }

    /// Slope on segment `j`, i.e. between nodes `j` and `j + 1`.
    #[inline]
    pub fn slope(&self, j: usize) -> T {
        let t = self.grid.nodes();
        (self.values[j + 1] - self.values[j]) / (t[j + 1] - t[j])
    }

    /// Linear interpolation; constant extension outside the grid.
    pub fn eval(&self, z: T) -> T {
        let t = self.grid.nodes();
        let n = self.segments();
        if z <= t[0] {
            return self.values[0];
        }
        if z >= t[n] {
            return self.values[n];
        }
        let j = self.grid.locate(z);
        let theta = (z - t[j]) / (t[j + 1] - t[j]);
        self.values[j] + theta * (self.values[j + 1] - self.values[j])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch("functions live on different grids".into()))
        }
    }

    /// `sup |self - other|` over the nodes.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        self.ensure_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs())))
    }

    pub fn sup(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn inf(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    /// Non-increasing with values in `[0, 1]`, up to `tol`.
    pub fn is_anti_cdf(&self, tol: T) -> bool {
        self.values.iter().all(|&v| v >= -tol && v <= T::one() + tol)
            && self.values.windows(2).all(|w| w[1] <= w[0] + tol)
    }

    /// Generalized inverse of an anti-CDF: the largest `z` with `F(z) >= u`.
    /// Returns `lambda/2` (the atom) when `u <= F(lambda/2)`.
    pub fn anti_cdf_inverse(&self, u: T) -> T {
        let t = self.grid.nodes();
        let n = self.segments();
        if u <= self.values[n] {
            return t[n];
        }
        if u >= self.values[0] {
            return t[0];
        }
        // values are non-increasing: find the last node with value >= u
        let j = self.values.partition_point(|&v| v >= u).saturating_sub(1).min(n - 1);
        let (a, b) = (self.values[j], self.values[j + 1]);
        if a <= b {
            return t[j];
        }
        let theta = ((a - u) / (a - b)).max(T::zero()).min(T::one());
        t[j] + theta * (t[j + 1] - t[j])
    }

    /// Two-column CSV (`z,value`) with round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,value\n");
        for (z, v) in self.nodes().iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", z.as_f64(), v.as_f64()));
        }
        out
    }

    /// Parses the output of [`GridFunction::to_csv`].
    pub fn from_csv(params: Params<T>, text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (k == 0 && line.starts_with('z')) {
                continue;
            }
            let mut cols = line.split(',');
            let parse = |c: Option<&str>| -> Result<T> {
                c.and_then(|s| s.trim().parse::<f64>().ok())
                    .map(T::lit)
                    .ok_or_else(|| Error::InvalidParams(format!("bad CSV line {}: {line}", k + 1)))
            };
            nodes.push(parse(cols.next())?);
            values.push(parse(cols.next())?);
        }
        let grid = Arc::new(Grid::from_nodes(params, nodes)?);
        Self::new(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Params<f64> {
        Params::new(0.5, 2.0).unwrap()
    }

    #[test]
    fn uniform_grid_endpoints_and_step() {
        let g = Grid::uniform(params(), 8).unwrap();
        assert_eq!(g.nodes()[0], -1.0);
        assert_eq!(g.nodes()[8], 1.0);
        assert_eq!(g.step(), Some(0.25));
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.locate(-1.0), 0);
        assert_eq!(g.locate(1.0), 7);
        assert_eq!(g.locate(0.1), 4);
        assert_eq!(g.locate(0.0), 4);
    }

    #[test]
    fn graded_grid_clusters_at_ends() {
        let g = Grid::new(Params::new(0.25_f64, 2.0).unwrap(), 16, Mesh::Graded).unwrap();
        let t = g.nodes();
        assert_eq!(t[0], -1.0);
        assert_eq!(t[16], 1.0);
        assert!(t[8].abs() < 1e-15);
        assert!((t[1] - t[0] - 0.125_f64.powi(4)).abs() < 1e-15);
        assert!((t[16] - t[15] - (t[1] - t[0])).abs() < 1e-15);
        assert!(Grid::new(params(), 7, Mesh::Graded).is_err());
        assert!(g.step().is_none());
    }

    #[test]
    fn interpolation_and_slopes() {
        let g = Arc::new(Grid::uniform(params(), 4).unwrap());
        let f = GridFunction::from_fn(g, |z| 2.0 * z + 1.0);
        assert!((f.eval(0.3) - 1.6).abs() < 1e-15);
        assert_eq!(f.eval(-5.0), -1.0);
        assert_eq!(f.eval(5.0), 3.0);
        assert!((f.slope(2) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn anti_cdf_checks_and_inverse() {
        let g = Arc::new(Grid::uniform(params(), 4).unwrap());
        // F(z) = 0.8 - 0.3 (z + 1) on [-1, 1] with F(-1) forced to 1: a jump is not allowed,
        // so use a proper anti-CDF with an atom of 0.2 at the right end.
        let f = GridFunction::new(g.clone(), vec![1.0, 0.8, 0.6, 0.4, 0.2]).unwrap();
        assert!(f.is_anti_cdf(0.0));
        assert_eq!(f.anti_cdf_inverse(0.1), 1.0);
        assert_eq!(f.anti_cdf_inverse(0.2), 1.0);
        assert!((f.anti_cdf_inverse(0.7) - (-0.25)).abs() < 1e-15);
        assert_eq!(f.anti_cdf_inverse(1.0), -1.0);
        let bad = GridFunction::new(g.clone(), vec![1.0, 0.8, 0.9, 0.4, 0.2]).unwrap();
        assert!(!bad.is_anti_cdf(0.0));
        assert!(GridFunction::new(g, vec![1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = Arc::new(Grid::new(Params::new(0.3_f64, 1.5).unwrap(), 10, Mesh::Graded).unwrap());
        let f = GridFunction::from_fn(g, |z| (-z).exp() / 3.0);
        let back = GridFunction::from_csv(*f.params(), &f.to_csv()).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.nodes(), f.nodes());
        let u = Arc::new(Grid::uniform(params(), 6).unwrap());
        let fu = GridFunction::constant(u, 0.5);
        let back = GridFunction::from_csv(*fu.params(), &fu.to_csv()).unwrap();
        assert_eq!(back.grid().mesh(), Mesh::Uniform);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = GridFunction::constant(Arc::new(Grid::uniform(params(), 4).unwrap()), 0.0);
        let b = GridFunction::constant(Arc::new(Grid::uniform(params(), 8).unwrap()), 0.0);
        assert!(matches!(a.sup_distance(&b), Err(Error::GridMismatch(_))));
    }
}
