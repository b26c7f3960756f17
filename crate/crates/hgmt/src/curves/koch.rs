//! Koch-type planar generators: each refinement level replaces every
//! segment by two equal segments meeting at an apex offset from the parent
//! midpoint, on sides alternating by level, with level lengths
//! `l_n = 2^{-n (1/2 + h_n)}` in the unit frame.
//!
//! The canonical families use ratios `h_n` in `(0, 1/2)` that do not
//! increase, which makes every refinement feasible. `with_sequence` accepts
//! any ratios in `(0, 1/2)`; a drop steep enough to need an imaginary apex
//! height surfaces as a domain error from `koch_generate`.

use crate::error::{domain, Result};
use crate::path::PlanarPath;

#[derive(Clone, Debug)]
pub struct KochSpec {
    /// Ratios for levels `1..=depth`; level 0 always has unit length.
    h: Vec<f64>,
    start: [f64; 2],
    end: [f64; 2],
}

fn check_ratio(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 0.5) {
        return Err(domain(format!("length ratio {h} outside (0, 1/2)")));
    }
    Ok(())
}

impl KochSpec {
    pub fn with_sequence(h: Vec<f64>, start: [f64; 2], end: [f64; 2]) -> Result<Self> {
        for &v in &h {
            check_ratio(v)?;
        }
        if start == end || !start.iter().chain(&end).all(|v| v.is_finite()) {
            return Err(domain("generator endpoints must be distinct finite points"));
        }
        Ok(KochSpec { h, start, end })
    }

    pub fn constant(h: f64, depth: usize, start: [f64; 2], end: [f64; 2]) -> Result<Self> {
        check_ratio(h)?;
        Self::with_sequence(vec![h; depth], start, end)
    }

    /// Constant-ratio spec whose image is a quasi-helix of exponent `beta`;
    /// the ratio solves `beta = 1 / (1/2 + h)`.
    pub fn quasi_helix(beta: f64, depth: usize, start: [f64; 2], end: [f64; 2]) -> Result<Self> {
        if !(beta > 1.0 && beta < 2.0) {
            return Err(domain(format!("quasi-helix exponent {beta} outside (1, 2)")));
        }
        Self::constant(1.0 / beta - 0.5, depth, start, end)
    }

    /// Slowly decaying ratios `h_n = (n ln^2(n+1) + 2)^{-1}`, the family with
    /// unbounded blowup of the level envelope against any fixed power law.
    pub fn slow_decay(depth: usize, start: [f64; 2], end: [f64; 2]) -> Result<Self> {
        let h = (1..=depth)
            .map(|n| {
                let n = n as f64;
                1.0 / (n * (n + 1.0).ln().powi(2) + 2.0)
            })
            .collect();
        Self::with_sequence(h, start, end)
    }

    pub fn depth(&self) -> usize {
        self.h.len()
    }

    pub fn ratios(&self) -> &[f64] {
        &self.h
    }

    /// Unit-frame segment length after `n` refinement levels.
    pub fn level_length(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            (2.0f64).powf(-(n as f64) * (0.5 + self.h[n - 1]))
        }
    }

    /// Box-dimension prediction `1 / (1/2 + h_depth)` from the final ratio.
    pub fn predicted_box_dimension(&self) -> f64 {
        match self.h.last() {
            Some(&h) => 1.0 / (0.5 + h),
            None => 1.0,
        }
    }
}

/// Generate the level-`depth` polyline on the dyadic grid `i 2^{-depth}`.
/// First and last vertices equal the spec endpoints bit for bit.
pub fn koch_generate(spec: &KochSpec) -> Result<PlanarPath> {
    let depth = spec.depth();
    if depth > 24 {
        return Err(domain("refinement depth above 24 would allocate beyond 16M vertices"));
    }
    for n in 1..=depth {
        if 2.0 * spec.level_length(n) < spec.level_length(n - 1) {
            return Err(domain(format!(
                "children at level {n} are too short to meet: 2 l_{n} < l_{}",
                n - 1
            )));
        }
    }
    let mut pts: Vec<[f64; 2]> = vec![[0.0, 0.0], [1.0, 0.0]];
    for n in 1..=depth {
        let child = spec.level_length(n);
        // Apex side alternates per level, starting left; keeping one side
        // curls branches into overlapping spirals and loses box dimension.
        let side = if n % 2 == 1 { 1.0 } else { -1.0 };
        let mut next = Vec::with_capacity(2 * pts.len() - 1);
        for w in pts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let dx = q[0] - p[0];
            let dy = q[1] - p[1];
            let len = (dx * dx + dy * dy).sqrt();
            let disc = child * child - 0.25 * len * len;
            if disc < 0.0 {
                return Err(domain(format!(
                    "children at level {n} are too short to meet: negative apex height"
                )));
            }
            let height = side * disc.sqrt();
            let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            // Left normal of the directed parent segment.
            let nx = -dy / len;
            let ny = dx / len;
            next.push(p);
            next.push([mid[0] + height * nx, mid[1] + height * ny]);
        }
        next.push(*pts.last().unwrap());
        pts = next;
    }
    let v = [spec.end[0] - spec.start[0], spec.end[1] - spec.start[1]];
    let w = [-v[1], v[0]];
    let mut mapped: Vec<[f64; 2]> = pts
        .iter()
        .map(|p| {
            [
                spec.start[0] + p[0] * v[0] + p[1] * w[0],
                spec.start[1] + p[0] * v[1] + p[1] * w[1],
            ]
        })
        .collect();
    let last = mapped.len() - 1;
    mapped[0] = spec.start;
    mapped[last] = spec.end;
    let cells = 1usize << depth;
    let grid = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    PlanarPath::new(grid, mapped)
}
