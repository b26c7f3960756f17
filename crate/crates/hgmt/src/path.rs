//! Sampled paths over strictly increasing grids, the carrier type for every
//! curve-valued computation in the crate.
//!
//! Grids are plain `f64` vectors; the uniform dyadic grids produced by
//! [`uniform_grid`] consist of exactly representable dyadic rationals, so
//! cell widths and dyadic scale classifications are exact.

use crate::error::{domain, Result};
use crate::group::HPoint;

/// Value types a path can take.  `WIDTH` is the number of coordinate columns
/// after the time column in the serialized row layout.
pub trait PathValue: Copy {
    const WIDTH: usize;
    fn to_row(&self, out: &mut [f64]);
    fn from_row(row: &[f64]) -> Self;
    fn finite(&self) -> bool;
}

impl PathValue for f64 {
    const WIDTH: usize = 1;
    fn to_row(&self, out: &mut [f64]) {
        out[0] = *self;
    }
    fn from_row(row: &[f64]) -> Self {
        row[0]
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl PathValue for [f64; 2] {
    const WIDTH: usize = 2;
    fn to_row(&self, out: &mut [f64]) {
        out[..2].copy_from_slice(self);
    }
    fn from_row(row: &[f64]) -> Self {
        [row[0], row[1]]
    }
    fn finite(&self) -> bool {
        self[0].is_finite() && self[1].is_finite()
    }
}

impl PathValue for HPoint {
    const WIDTH: usize = 3;
    fn to_row(&self, out: &mut [f64]) {
        out[0] = self.x;
        out[1] = self.y;
        out[2] = self.z;
    }
    fn from_row(row: &[f64]) -> Self {
        HPoint::new(row[0], row[1], row[2])
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath<V> {
    grid: Vec<f64>,
    values: Vec<V>,
}

pub type ScalarPath = SampledPath<f64>;
pub type PlanarPath = SampledPath<[f64; 2]>;
pub type HeisPath = SampledPath<HPoint>;

impl<V: PathValue> SampledPath<V> {
    pub fn new(grid: Vec<f64>, values: Vec<V>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(domain(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(domain("a sampled path needs at least two nodes"));
        }
        for w in grid.windows(2) {
            if !(w[0].is_finite() && w[1].is_finite() && w[0] < w[1]) {
                return Err(domain(format!(
                    "grid must be finite and strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(i) = values.iter().position(|v| !v.finite()) {
            return Err(domain(format!("non-finite path value at node {i}")));
        }
        Ok(SampledPath { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_start(&self) -> f64 {
        self.grid[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t_start()
    }

    /// True when both paths sample the same grid, bit for bit.  Operations
    /// combining two paths require this rather than approximate agreement.
    pub fn same_grid<W: PathValue>(&self, other: &SampledPath<W>) -> bool {
        self.grid == other.grid
    }

    pub fn map<W: PathValue>(&self, f: impl Fn(&V) -> W) -> SampledPath<W> {
        SampledPath { grid: self.grid.clone(), values: self.values.iter().map(f).collect() }
    }

    /// Restriction to a node range (inclusive endpoints).
    pub fn restrict(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo >= hi || hi >= self.len() {
            return Err(domain(format!("invalid restriction window [{lo}, {hi}]")));
        }
        Ok(SampledPath {
            grid: self.grid[lo..=hi].to_vec(),
            values: self.values[lo..=hi].to_vec(),
        })
    }
}

impl PlanarPath {
    pub fn x_path(&self) -> ScalarPath {
        self.map(|v| v[0])
    }

    pub fn y_path(&self) -> ScalarPath {
        self.map(|v| v[1])
    }
}

impl HeisPath {
    /// Horizontal shadow of the path.
    pub fn planar(&self) -> PlanarPath {
        self.map(|p| [p.x, p.y])
    }
}

/// Uniform dyadic grid on [0, 1] with `2^k + 1` nodes.
pub fn uniform_grid(k: u32) -> Vec<f64> {
    let n = 1usize << k;
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

/// Uniform grid with `cells + 1` nodes on an arbitrary interval.
pub fn uniform_grid_on(t0: f64, t1: f64, cells: usize) -> Result<Vec<f64>> {
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(domain(format!("invalid interval [{t0}, {t1}]")));
    }
    if cells == 0 {
        return Err(domain("a grid needs at least one cell"));
    }
    let h = (t1 - t0) / cells as f64;
    let mut g: Vec<f64> = (0..=cells).map(|i| t0 + i as f64 * h).collect();
    *g.last_mut().unwrap() = t1;
    Ok(g)
}

/// Sample a scalar function on a grid.
pub fn sample_scalar(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<ScalarPath> {
    SampledPath::new(grid.to_vec(), grid.iter().map(|&t| f(t)).collect())
}

/// Sample a planar function on a grid.
pub fn sample_planar(grid: &[f64], f: impl Fn(f64) -> [f64; 2]) -> Result<PlanarPath> {
    SampledPath::new(grid.to_vec(), grid.iter().map(|&t| f(t)).collect())
}
