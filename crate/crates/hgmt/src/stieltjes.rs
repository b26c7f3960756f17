//! Riemann-Stieltjes machinery on sampled paths: subdivision families,
//! mixed-product area sums, the sewing construction for germs with a
//! summable defect modulus, Young-type bound verification, and the dynamic
//! program computing extremal area sums over all increasing chains.
//!
//! Every sum is accumulated with [`pairwise_sum`] or Kahan compensation so
//! results do not depend on incidental evaluation order.

use crate::error::{domain, Result};
use crate::num::{dyadic_scale, kahan_cumulative, pairwise_sum, pow2};
use crate::path::{PlanarPath, SampledPath, ScalarPath};
use rand::Rng;
use serde::Serialize;

/// A subdivision of a sampled path's parameter interval, stored as strictly
/// increasing node indices that include both endpoints.
#[derive(Clone, Debug)]
pub struct Subdivision {
    indices: Vec<usize>,
    n_nodes: usize,
}

impl Subdivision {
    /// The finest subdivision: every grid node.
    pub fn full(n_nodes: usize) -> Self {
        assert!(n_nodes >= 2);
        Subdivision { indices: (0..n_nodes).collect(), n_nodes }
    }

    pub fn from_indices(indices: Vec<usize>, n_nodes: usize) -> Result<Self> {
        if n_nodes < 2 {
            return Err(domain("subdivision needs a grid with at least two nodes"));
        }
        if indices.len() < 2 || indices[0] != 0 || *indices.last().unwrap() != n_nodes - 1 {
            return Err(domain("subdivision must run from the first to the last node"));
        }
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(domain(format!(
                    "subdivision indices must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if *indices.last().unwrap() >= n_nodes {
            return Err(domain("subdivision index beyond the grid"));
        }
        Ok(Subdivision { indices, n_nodes })
    }

    /// Roughly equal-time cells: nearest grid node to each of `cells + 1`
    /// evenly spaced times, deduplicated.
    pub fn uniform(grid: &[f64], cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(domain("subdivision needs at least one cell"));
        }
        let n = grid.len();
        if cells >= n - 1 {
            return Ok(Self::full(n));
        }
        let t0 = grid[0];
        let span = grid[n - 1] - t0;
        let mut indices = vec![0usize];
        let mut cursor = 0usize;
        for j in 1..cells {
            let target = t0 + span * j as f64 / cells as f64;
            while cursor + 1 < n - 1 && (grid[cursor + 1] - target).abs() <= (grid[cursor] - target).abs()
            {
                cursor += 1;
            }
            if cursor > *indices.last().unwrap() {
                indices.push(cursor);
            }
        }
        indices.push(n - 1);
        Self::from_indices(indices, n)
    }

    /// Every `stride`-th node where `stride = (n - 1) / 2^level`; requires the
    /// cell count to be divisible so the subdivision is exactly dyadic.
    pub fn dyadic(grid: &[f64], level: u32) -> Result<Self> {
        let cells = grid.len() - 1;
        let parts = 1usize
            .checked_shl(level)
            .ok_or_else(|| domain(format!("dyadic level {level} too deep")))?;
        if parts > cells || cells % parts != 0 {
            return Err(domain(format!(
                "grid with {cells} cells does not split into 2^{level} dyadic parts"
            )));
        }
        let stride = cells / parts;
        let indices = (0..=parts).map(|j| j * stride).collect();
        Self::from_indices(indices, grid.len())
    }

    /// Random walk through the grid with every cell no wider than
    /// `target_mesh` wherever the grid itself allows it.
    pub fn random(grid: &[f64], target_mesh: f64, rng: &mut impl Rng) -> Result<Self> {
        if !(target_mesh > 0.0) {
            return Err(domain("target mesh must be positive"));
        }
        let n = grid.len();
        let mut indices = vec![0usize];
        let mut i = 0usize;
        while i < n - 1 {
            let mut max_j = i + 1;
            while max_j + 1 < n && grid[max_j + 1] - grid[i] <= target_mesh {
                max_j += 1;
            }
            let j = rng.gen_range(i + 1..=max_j);
            indices.push(j);
            i = j;
        }
        Self::from_indices(indices, n)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn n_cells(&self) -> usize {
        self.indices.len() - 1
    }

    pub fn matches_grid(&self, grid: &[f64]) -> bool {
        self.n_nodes == grid.len()
    }

    /// Width of the widest cell.
    pub fn mesh(&self, grid: &[f64]) -> f64 {
        assert!(self.matches_grid(grid));
        self.indices
            .windows(2)
            .map(|w| grid[w[1]] - grid[w[0]])
            .fold(0.0, f64::max)
    }

    /// Dyadic scale of each cell width under the half-open bracket
    /// `2^-(k+1) <= w < 2^-k`; an exact width `2^-j` lands at scale `j - 1`.
    pub fn cell_scales(&self, grid: &[f64]) -> Vec<i32> {
        assert!(self.matches_grid(grid));
        self.indices
            .windows(2)
            .map(|w| dyadic_scale(grid[w[1]] - grid[w[0]]))
            .collect()
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.indices.windows(2).map(|w| (w[0], w[1]))
    }
}

fn require_same_grid(x: &ScalarPath, y: &ScalarPath, sub: &Subdivision) -> Result<()> {
    if !x.same_grid(y) {
        return Err(domain("integrand and integrator sample different grids"));
    }
    if !sub.matches_grid(x.grid()) {
        return Err(domain("subdivision does not match the path grid"));
    }
    Ok(())
}

/// Left-endpoint Riemann-Stieltjes sum of `x` against `y` along a subdivision.
pub fn stieltjes_sum(x: &ScalarPath, y: &ScalarPath, sub: &Subdivision) -> Result<f64> {
    require_same_grid(x, y, sub)?;
    let xv = x.values();
    let yv = y.values();
    let terms: Vec<f64> = sub.cells().map(|(i, j)| xv[i] * (yv[j] - yv[i])).collect();
    Ok(pairwise_sum(&terms))
}

/// Mixed product `x_i y_j - y_i x_j` of two planar samples; the elementary
/// signed-area contribution of the ordered pair.
fn mixed(p: &[[f64; 2]], i: usize, j: usize) -> f64 {
    p[i][0] * p[j][1] - p[i][1] * p[j][0]
}

/// Discrete Levy area along a subdivision: twice the mixed-product sum over
/// consecutive cells.
pub fn levy_area(p: &PlanarPath, sub: &Subdivision) -> Result<f64> {
    if !sub.matches_grid(p.grid()) {
        return Err(domain("subdivision does not match the path grid"));
    }
    let v = p.values();
    let terms: Vec<f64> = sub.cells().map(|(i, j)| mixed(v, i, j)).collect();
    Ok(2.0 * pairwise_sum(&terms))
}

/// Running Levy area over the full grid, compensated.
pub fn levy_area_path(p: &PlanarPath) -> ScalarPath {
    let v = p.values();
    let terms: Vec<f64> = (0..v.len() - 1).map(|i| 2.0 * mixed(v, i, i + 1)).collect();
    SampledPath::new(p.grid().to_vec(), kahan_cumulative(&terms)).unwrap()
}

/// A two-parameter germ `mu(a, b)` together with its declared defect modulus:
/// splitting any interval at an interior point changes `mu` by at most
/// `omega` of the interval width, and `sum_i 2^i omega(h 2^-i)` converges.
pub struct GermFunction {
    mu: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    omega: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl GermFunction {
    pub fn new(
        mu: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        omega: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        GermFunction { mu: Box::new(mu), omega: Box::new(omega) }
    }

    pub fn mu(&self, a: f64, b: f64) -> f64 {
        (self.mu)(a, b)
    }

    pub fn omega(&self, h: f64) -> f64 {
        (self.omega)(h)
    }

    /// `sum_{i >= 0} 2^i omega(gap 2^-i)`, the defect budget of the sewing
    /// construction over an interval of width `gap`.  Returns infinity when
    /// the series visibly fails to converge.
    pub fn omega_tail(&self, gap: f64) -> f64 {
        if gap <= 0.0 {
            return 0.0;
        }
        let mut sum = 0.0;
        let mut prev = f64::INFINITY;
        let mut growing = 0u32;
        for i in 0..200 {
            let term = pow2(i) * self.omega(gap * pow2(-i));
            if !term.is_finite() {
                return f64::INFINITY;
            }
            sum += term;
            if term >= prev {
                growing += 1;
                if growing >= 24 {
                    return f64::INFINITY;
                }
            } else {
                growing = 0;
            }
            if term <= 1e-18 * sum.max(1e-300) {
                return sum;
            }
            prev = term;
        }
        // Terms neither vanished nor grew for 200 levels: treat as divergent.
        f64::INFINITY
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PreconditionReport {
    pub triples_checked: usize,
    pub violations: usize,
    pub worst_ratio: f64,
    pub worst_triple: Option<(f64, f64, f64)>,
}

#[derive(Serialize)]
pub struct SewingReport {
    #[serde(skip)]
    pub nu: ScalarPath,
    pub tail_bound_full_span: f64,
    pub precondition: PreconditionReport,
}

pub struct SewingOptions {
    /// Extra dyadic refinement levels inside each grid cell when evaluating
    /// the germ increment.  At 0 the increment is the germ itself; refining
    /// the grid is the usual way to refine the integral.
    pub refine_depth: u32,
    pub precondition_samples: usize,
    pub seed: u64,
}

impl Default for SewingOptions {
    fn default() -> Self {
        SewingOptions { refine_depth: 0, precondition_samples: 512, seed: 0x5e471 }
    }
}

/// Builds the additive function `nu` with `nu(start) = 0` whose increments
/// follow the germ: over each grid cell the germ is summed at the requested
/// refinement depth, and for any pair of grid nodes the defect
/// `|nu(b) - nu(a) - mu(a, b)|` obeys the modulus tail for the gap `b - a`.
pub fn sewing_integrate(
    germ: &GermFunction,
    grid: &[f64],
    opts: &SewingOptions,
) -> Result<SewingReport> {
    if grid.len() < 2 {
        return Err(domain("sewing needs a grid with at least two nodes"));
    }
    let span = grid[grid.len() - 1] - grid[0];
    let tail = germ.omega_tail(span);
    if !tail.is_finite() {
        return Err(domain("defect modulus tail diverges; the germ is not sewable"));
    }

    let mut increments = Vec::with_capacity(grid.len() - 1);
    for w in grid.windows(2) {
        increments.push(refined_increment(germ, w[0], w[1], opts.refine_depth));
    }
    let nu = SampledPath::new(grid.to_vec(), kahan_cumulative(&increments))?;

    let mut rng = crate::num::seeded_rng(opts.seed);
    let mut violations = 0usize;
    let mut worst_ratio = 0.0f64;
    let mut worst_triple = None;
    let n = grid.len();
    for _ in 0..opts.precondition_samples {
        let i = rng.gen_range(0..n - 2);
        let k = rng.gen_range(i + 2..n);
        let j = rng.gen_range(i + 1..k);
        let (a, b, c) = (grid[i], grid[j], grid[k]);
        let defect = (germ.mu(a, b) + germ.mu(b, c) - germ.mu(a, c)).abs();
        let bound = germ.omega(c - a);
        let ratio = defect / bound.max(1e-300);
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_triple = Some((a, b, c));
        }
        if defect > bound * (1.0 + 1e-9) + 1e-15 {
            violations += 1;
        }
        // The germ must vanish on degenerate intervals.
        if germ.mu(a, a).abs() > 1e-15 {
            violations += 1;
        }
    }
    Ok(SewingReport {
        nu,
        tail_bound_full_span: tail,
        precondition: PreconditionReport {
            triples_checked: opts.precondition_samples,
            violations,
            worst_ratio,
            worst_triple,
        },
    })
}

fn refined_increment(germ: &GermFunction, a: f64, b: f64, depth: u32) -> f64 {
    let mut prev = germ.mu(a, b);
    for d in 1..=depth {
        let parts = 1usize << d;
        let h = (b - a) / parts as f64;
        let terms: Vec<f64> =
            (0..parts).map(|k| germ.mu(a + k as f64 * h, a + (k + 1) as f64 * h)).collect();
        let s = pairwise_sum(&terms);
        if (s - prev).abs() <= 1e-15 * s.abs().max(1.0) {
            return s;
        }
        prev = s;
    }
    prev
}

/// Defect budget for a node pair at gap `h`, as asserted by the sewing bound.
pub fn sewing_defect_bound(germ: &GermFunction, h: f64) -> f64 {
    germ.omega_tail(h)
}

/// Holder seminorm estimated over all dyadic-gap node pairs.
pub fn holder_seminorm(path: &ScalarPath, alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha <= 1.0);
    let g = path.grid();
    let v = path.values();
    let n = g.len();
    let mut best = 0.0f64;
    let mut gap = 1usize;
    loop {
        for i in 0..n - gap {
            let dt = g[i + gap] - g[i];
            let q = (v[i + gap] - v[i]).abs() / dt.powf(alpha);
            best = best.max(q);
        }
        if gap >= n - 1 {
            break;
        }
        gap = (gap * 2).min(n - 1);
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct YoungWindow {
    pub span: f64,
    pub integral: f64,
    pub defect_max: f64,
    pub scale: f64,
    pub ratio: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct YoungReport {
    pub theta: f64,
    pub c_theory: f64,
    pub windows: Vec<YoungWindow>,
    pub ratio_spread: f64,
}

/// Checks the Young estimate on nested prefix windows: for Holder exponents
/// with `alpha + beta > 1`, the Stieltjes integral minus `x(t)` times the
/// integrator increment stays within `C |x|_alpha |y|_beta T^(alpha+beta)`
/// for every anchor `t`, with `C = 1 + 1 / (1 - 2^(1 - alpha - beta))`.
pub fn young_bound_check(
    x: &ScalarPath,
    y: &ScalarPath,
    alpha: f64,
    beta: f64,
    halvings: u32,
) -> Result<YoungReport> {
    if !(0.0 < alpha && alpha <= 1.0 && 0.0 < beta && beta <= 1.0) {
        return Err(domain("Holder exponents must lie in (0, 1]"));
    }
    let theta = alpha + beta;
    if theta <= 1.0 {
        return Err(domain(format!(
            "exponent sum {theta} is not above 1; the Young estimate does not apply"
        )));
    }
    if !x.same_grid(y) {
        return Err(domain("integrand and integrator sample different grids"));
    }
    // Sewing constant for the anchored germ, plus 1 for moving the anchor.
    let c_theory = 1.0 + 1.0 / (1.0 - (2.0f64).powf(1.0 - theta));

    let n = x.len();
    let mut windows = Vec::new();
    for j in 0..=halvings {
        let cells = (n - 1) >> j;
        if cells == 0 {
            break;
        }
        let xw = x.restrict(0, cells)?;
        let yw = y.restrict(0, cells)?;
        let span = xw.duration();
        let sub = Subdivision::full(xw.len());
        let integral = stieltjes_sum(&xw, &yw, &sub)?;
        let y_inc = yw.values()[cells] - yw.values()[0];
        let defect_max = xw
            .values()
            .iter()
            .map(|&xt| (integral - xt * y_inc).abs())
            .fold(0.0, f64::max);
        let scale =
            holder_seminorm(&xw, alpha) * holder_seminorm(&yw, beta) * span.powf(theta);
        let (ratio, ok) = if scale > 1e-300 {
            let r = defect_max / scale;
            (r, r <= c_theory * (1.0 + 1e-9))
        } else {
            (0.0, defect_max <= 1e-12)
        };
        windows.push(YoungWindow { span, integral, defect_max, scale, ratio, ok });
    }
    let ratios: Vec<f64> = windows.iter().map(|w| w.ratio).filter(|r| *r > 0.0).collect();
    let ratio_spread = if ratios.len() >= 2 {
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    } else {
        1.0
    };
    Ok(YoungReport { theta, c_theory, windows, ratio_spread })
}

/// Extremal mixed-product sums over all increasing chains inside a node
/// window, computed by dynamic programming.  Every subdivision's area sum
/// lies between `min` and `max`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExtremalSums {
    pub max: f64,
    pub min: f64,
}

pub fn extremal_area_dp(p: &PlanarPath, lo: usize, hi: usize) -> Result<ExtremalSums> {
    if lo >= hi || hi >= p.len() {
        return Err(domain(format!("empty or out-of-range window [{lo}, {hi}]")));
    }
    let v = p.values();
    let m = hi - lo + 1;
    let mut dmax = vec![f64::NEG_INFINITY; m];
    let mut dmin = vec![f64::INFINITY; m];
    dmax[0] = 0.0;
    dmin[0] = 0.0;
    for j in 1..m {
        let pj = v[lo + j];
        let mut best_max = f64::NEG_INFINITY;
        let mut best_min = f64::INFINITY;
        for i in 0..j {
            let pi = v[lo + i];
            let w = pi[0] * pj[1] - pi[1] * pj[0];
            let cand_max = dmax[i] + w;
            let cand_min = dmin[i] + w;
            if cand_max > best_max {
                best_max = cand_max;
            }
            if cand_min < best_min {
                best_min = cand_min;
            }
        }
        dmax[j] = best_max;
        dmin[j] = best_min;
    }
    Ok(ExtremalSums { max: dmax[m - 1], min: dmin[m - 1] })
}

/// Integration-by-parts defect of a subdivision: the two one-sided Stieltjes
/// sums plus the boundary correction collapse to minus the sum of increment
/// products, exactly, for every subdivision.
pub fn ibp_defect(x: &ScalarPath, y: &ScalarPath, sub: &Subdivision) -> Result<f64> {
    require_same_grid(x, y, sub)?;
    let xv = x.values();
    let yv = y.values();
    let sx = stieltjes_sum(x, y, sub)?;
    let sy = stieltjes_sum(y, x, sub)?;
    let n = x.len() - 1;
    Ok(sx + sy - (xv[n] * yv[n] - xv[0] * yv[0]))
}
