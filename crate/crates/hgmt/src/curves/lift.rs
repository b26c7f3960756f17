//! Lifts of planar curves into the Heisenberg group.
//!
//! `vertical_lift` attaches the natural third coordinate
//! `z(t) = z0 + t - Z(t)`, with `Z` the cumulative discrete Levy area, so
//! that consecutive contact increments equal the parameter step exactly in
//! exact arithmetic.
//!
//! `rough_lift` builds the variational lift for curves below Lipschitz
//! regularity: the third coordinate at `t_j` is the supremum over increasing
//! grid chains of `sum h(||planar gap||^2) + 2 det(later, earlier)`, where
//! `h(delta) = delta / eps(delta)` comes from a roughness modulus.

use crate::error::{domain, Result};
use crate::group::HPoint;
use crate::num::dyadic_scale;
use crate::path::{HeisPath, PlanarPath};
use crate::stieltjes::levy_area_path;

/// Natural-parametrization lift. Requires planar oscillation no larger than
/// the square root of the parameter gap for the area-sum interpretation to
/// hold; the construction itself is defined for any sampled curve.
pub fn vertical_lift(p: &PlanarPath, z0: f64) -> Result<HeisPath> {
    let levy = levy_area_path(p);
    let values = p
        .grid()
        .iter()
        .zip(levy.values())
        .zip(p.values())
        .map(|((t, lz), xy)| HPoint::new(xy[0], xy[1], z0 + t - lz))
        .collect();
    HeisPath::new(p.grid().to_vec(), values)
}

/// Piecewise-linear upper envelope over gap thresholds: on the interval
/// between consecutive thresholds the value grows linearly from the running
/// maximum of earlier node values.
struct GapEnvelope {
    thresholds: Vec<f64>,
    slopes: Vec<f64>,
    prefix: Vec<f64>,
}

impl GapEnvelope {
    fn new(thresholds: Vec<f64>, slopes: Vec<f64>) -> Self {
        let mut prefix = Vec::with_capacity(thresholds.len() + 1);
        prefix.push(0.0);
        let mut run = 0.0f64;
        for (t, s) in thresholds.iter().zip(&slopes) {
            run = run.max(t * s);
            prefix.push(run);
        }
        GapEnvelope { thresholds, slopes, prefix }
    }

    fn eval(&self, delta: f64) -> f64 {
        let j = self.thresholds.partition_point(|t| *t <= delta);
        let mut v = self.prefix[j];
        if j < self.slopes.len() {
            v = v.max(delta * self.slopes[j]);
        }
        v
    }
}

pub struct RoughnessModulus {
    label: String,
    eval_fn: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

fn uniform_cell(p: &PlanarPath) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for w in p.grid().windows(2) {
        let d = w[1] - w[0];
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if hi > lo * (1.0 + 1e-9) {
        return Err(domain("gap-derived moduli need a uniform parameter grid"));
    }
    Ok(0.5 * (lo + hi))
}

/// Largest squared planar displacement over each index gap `m`.
fn gap_sup_sq(p: &PlanarPath) -> Vec<f64> {
    let v = p.values();
    let n = v.len();
    let mut d = vec![0.0f64; n - 1];
    for m in 1..n {
        let mut best = 0.0f64;
        for i in 0..n - m {
            let dx = v[i + m][0] - v[i][0];
            let dy = v[i + m][1] - v[i][1];
            let s = dx * dx + dy * dy;
            if s > best {
                best = s;
            }
        }
        d[m - 1] = best;
    }
    d
}

/// Sorted distinct gap thresholds plus, per threshold, the statistic of the
/// gaps reaching it, folded with a running extremum while scanning
/// thresholds from the largest down.
fn threshold_fold(
    d: &[f64],
    stat: impl Fn(usize) -> f64,
    fold: impl Fn(f64, f64) -> f64,
    init: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let mut thr_desc = Vec::new();
    let mut val_desc = Vec::new();
    let mut run = init;
    let mut i = 0;
    while i < order.len() {
        let t = d[order[i]];
        while i < order.len() && d[order[i]] == t {
            run = fold(run, stat(order[i] + 1));
            i += 1;
        }
        if t > 0.0 {
            thr_desc.push(t);
            val_desc.push(run);
        }
    }
    thr_desc.reverse();
    val_desc.reverse();
    (thr_desc, val_desc)
}

impl RoughnessModulus {
    pub fn from_closure(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RoughnessModulus { label: label.into(), eval_fn: Box::new(f) }
    }

    /// Power modulus `eps(delta) = min(1, delta^theta)` with `theta` in
    /// `(0, 1)`, the range keeping `delta / eps` continuous at zero.
    pub fn power(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(domain(format!("power modulus exponent {theta} outside (0, 1)")));
        }
        Ok(Self::from_closure(format!("power({theta})"), move |d| d.powf(theta)))
    }

    /// Modulus read off from the curve's own gap structure:
    /// `eps(delta) = c^{-1} sup { delta0 / g(delta0) : delta0 <= delta }`,
    /// where `g` is the smallest time gap whose displacement supremum
    /// reaches `delta0`.
    pub fn whitney_auto(p: &PlanarPath, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain("scale constant must be positive"));
        }
        let cell = uniform_cell(p)?;
        let d = gap_sup_sq(p);
        let (thr, minm) = threshold_fold(&d, |m| m as f64, f64::min, f64::INFINITY);
        if thr.is_empty() {
            return Err(domain("constant curve has no gap structure"));
        }
        let slopes = minm.iter().map(|m| 1.0 / (c * m * cell)).collect();
        let env = GapEnvelope::new(thr, slopes);
        Ok(Self::from_closure("whitney-auto", move |delta| env.eval(delta)))
    }

    /// Modulus of the vanishing-area recipe: displacement thresholds are
    /// weighted by the reciprocal of `gap * S_k(gap)` with `S_k` the
    /// square-summable tail `sum_{l >= max(k+1, k0)} l^{-2}` of the
    /// coefficient envelope.
    pub fn vanishing_recipe(p: &PlanarPath, k0: usize) -> Result<Self> {
        if !(1..=60).contains(&k0) {
            return Err(domain("tail start index must lie in 1..=60"));
        }
        let cell = uniform_cell(p)?;
        let d = gap_sup_sq(p);
        let w = |m: usize| {
            let gap = m as f64 * cell;
            let k = dyadic_scale(gap);
            let start = (k + 1).max(k0 as i32) as usize;
            1.0 / (gap * inv_square_tail(start))
        };
        let (thr, wmax) = threshold_fold(&d, w, f64::max, 0.0);
        if thr.is_empty() {
            return Err(domain("constant curve has no gap structure"));
        }
        let slopes = wmax.iter().map(|w| 2.0 * w).collect();
        let env = GapEnvelope::new(thr, slopes);
        Ok(Self::from_closure(format!("vanishing-area(k0={k0})"), move |delta| env.eval(delta)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Modulus value, clamped into `(0, 1]` for positive arguments.
    pub fn eval(&self, delta: f64) -> f64 {
        if delta <= 0.0 {
            0.0
        } else {
            (self.eval_fn)(delta).clamp(f64::MIN_POSITIVE, 1.0)
        }
    }

    /// Height increment `h(delta) = delta / eps(delta)`, zero at zero.
    pub fn h(&self, delta: f64) -> f64 {
        if delta <= 0.0 {
            0.0
        } else {
            delta / self.eval(delta)
        }
    }
}

/// Tail `sum_{l >= start} l^{-2}`, by direct summation up to a shift where
/// the asymptotic expansion of the derivative of the digamma function is
/// accurate to near machine precision.
fn inv_square_tail(start: usize) -> f64 {
    let start = start.max(1);
    let big = start.max(120);
    let mut s = 0.0f64;
    for l in start..big {
        s += 1.0 / (l as f64 * l as f64);
    }
    let x = big as f64;
    s + 1.0 / x + 1.0 / (2.0 * x * x) + 1.0 / (6.0 * x * x * x) - 1.0 / (30.0 * x.powi(5))
}

#[derive(Clone, Debug)]
pub struct RoughLiftOptions {
    pub z0: f64,
    /// Abort threshold for the chain supremum; crossing it reports infinite
    /// variation instead of a lift.
    pub var_cap: f64,
}

impl Default for RoughLiftOptions {
    fn default() -> Self {
        RoughLiftOptions { z0: 0.0, var_cap: 1e6 }
    }
}

pub struct RoughLiftReport {
    /// Present unless the variation cap was crossed.
    pub lift: Option<HeisPath>,
    /// Chain suprema `z0 + sup sum dz` per node; truncated where the cap
    /// fired.
    pub z: Vec<f64>,
    pub infinite_variation: bool,
}

/// Variational lift by dynamic programming over increasing grid chains,
/// quadratic in the number of nodes.
pub fn rough_lift(
    p: &PlanarPath,
    eps: &RoughnessModulus,
    opts: &RoughLiftOptions,
) -> Result<RoughLiftReport> {
    if !(opts.var_cap > 0.0) {
        return Err(domain("variation cap must be positive"));
    }
    let v = p.values();
    let n = v.len();
    let mut dp = vec![0.0f64; n];
    for j in 1..n {
        let (xj, yj) = (v[j][0], v[j][1]);
        let mut best = f64::NEG_INFINITY;
        for i in 0..j {
            let dx = xj - v[i][0];
            let dy = yj - v[i][1];
            let dz = eps.h(dx * dx + dy * dy) + 2.0 * (xj * v[i][1] - yj * v[i][0]);
            let cand = dp[i] + dz;
            if cand > best {
                best = cand;
            }
        }
        dp[j] = best;
        if best.abs() > opts.var_cap {
            return Ok(RoughLiftReport {
                lift: None,
                z: dp[..=j].iter().map(|d| opts.z0 + d).collect(),
                infinite_variation: true,
            });
        }
    }
    let z: Vec<f64> = dp.iter().map(|d| opts.z0 + d).collect();
    let values = v
        .iter()
        .zip(&z)
        .map(|(xy, zz)| HPoint::new(xy[0], xy[1], *zz))
        .collect();
    Ok(RoughLiftReport {
        lift: Some(HeisPath::new(p.grid().to_vec(), values)?),
        z,
        infinite_variation: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::contact_increment;
    use crate::path::{sample_planar, uniform_grid};
    use std::f64::consts::PI;

    fn line(k: u32) -> PlanarPath {
        sample_planar(&uniform_grid(k), |t| [t, 0.0]).unwrap()
    }

    fn circle(k: u32) -> PlanarPath {
        sample_planar(&uniform_grid(k), |t| {
            let w = 2.0 * PI * t;
            [w.cos(), w.sin()]
        })
        .unwrap()
    }

    #[test]
    fn lift_of_horizontal_line_is_exact() {
        let lift = vertical_lift(&line(8), 0.5).unwrap();
        for (t, p) in lift.grid().iter().zip(lift.values()) {
            assert_eq!(p.x, *t);
            assert_eq!(p.y, 0.0);
            assert!((p.z - (0.5 + t)).abs() < 1e-15);
        }
    }

    #[test]
    fn consecutive_contact_increments_equal_the_step() {
        let lift = vertical_lift(&circle(10), 0.0).unwrap();
        let g = lift.grid();
        let v = lift.values();
        for i in 0..v.len() - 1 {
            let c = contact_increment(v[i], v[i + 1]);
            assert!((c - (g[i + 1] - g[i])).abs() < 1e-14);
        }
    }

    #[test]
    fn circle_lift_matches_discrete_area_formula() {
        let k = 12u32;
        let n = (1usize << k) as f64;
        let lift = vertical_lift(&circle(k), 0.0).unwrap();
        let z_end = lift.values().last().unwrap().z;
        let exact = 1.0 - 2.0 * n * (2.0 * PI / n).sin();
        assert!((z_end - exact).abs() < 1e-10);
        assert!((z_end - (1.0 - 4.0 * PI)).abs() < 1e-3);
    }

    #[test]
    fn holder_lift_is_euclidean_holder_three_quarters() {
        use crate::curves::lacunary::{lacunary_eval, LacunarySpec};
        use crate::path::ScalarPath;
        use crate::stieltjes::holder_seminorm;
        let spec = LacunarySpec::holder_pair(0.75, 9, 1.0).unwrap();
        let grid = uniform_grid(12);
        let out = lacunary_eval(&spec, &grid).unwrap();
        let planar = sample_planar(&grid, |t| {
            // Re-evaluating keeps one source of truth for the samples.
            [0.0, 0.0].map(|_| t)
        })
        .unwrap();
        let _ = planar;
        let xy: Vec<[f64; 2]> = out
            .f
            .values()
            .iter()
            .zip(out.g.values())
            .map(|(a, b)| [*a, *b])
            .collect();
        let p = PlanarPath::new(grid.clone(), xy).unwrap();
        let lift = vertical_lift(&p, 0.0).unwrap();
        let zp = ScalarPath::new(grid.clone(), lift.values().iter().map(|q| q.z).collect()).unwrap();
        let cx = spec.holder_bound_f(0.75);
        let cy = spec.holder_bound_g(0.75);
        let bf = spec.sup_bound_f();
        let bg = spec.sup_bound_g();
        // |z(t)-z(s)| <= |t-s| + |Levy window|; the window obeys the
        // anchored sewing bound with modulus cx*cy*r^{3/2} and dyadic tail
        // factor 1/(1 - 2^{-1/2}).
        let sew = 1.0 / (1.0 - (0.5f64).sqrt());
        let cz = 1.0 + 2.0 * (bf * cy + bg * cx) + 4.0 * sew * cx * cy;
        let emp_z = holder_seminorm(&zp, 0.75);
        assert!(
            emp_z <= cz,
            "z seminorm {emp_z} exceeds composite bound {cz}"
        );
        let sum_kappa: f64 = lift
            .values()
            .windows(2)
            .map(|w| crate::group::kappa_inf(w[0], w[1]))
            .sum();
        assert!((sum_kappa - 1.0).abs() < 0.02, "kappa sum {sum_kappa}");
    }

    #[test]
    fn rough_lift_of_constant_curve_is_flat() {
        let grid = uniform_grid(5);
        let p = sample_planar(&grid, |_| [0.3, -0.2]).unwrap();
        let eps = RoughnessModulus::power(0.5).unwrap();
        let rep = rough_lift(&p, &eps, &RoughLiftOptions { z0: 2.0, var_cap: 10.0 }).unwrap();
        assert!(!rep.infinite_variation);
        assert!(rep.z.iter().all(|z| (*z - 2.0).abs() < 1e-15));
    }

    #[test]
    fn line_with_gap_modulus_recovers_unit_height() {
        let p = line(8);
        let eps = RoughnessModulus::whitney_auto(&p, 1.0).unwrap();
        let rep = rough_lift(&p, &eps, &RoughLiftOptions::default()).unwrap();
        for (t, z) in p.grid().iter().zip(&rep.z) {
            assert!((z - t).abs() < 1e-9, "z({t}) = {z}");
        }
        let lift = rep.lift.unwrap();
        for w in lift.values().windows(2) {
            assert!(w[1].z >= w[0].z - 1e-12);
        }
    }

    #[test]
    fn superadditive_height_prefers_single_hops() {
        // Slope 0.6 keeps every squared displacement below 1, so the power
        // modulus never clamps and h(delta) = delta^0.7 throughout.
        let grid = uniform_grid(6);
        let p = sample_planar(&grid, |t| [0.6 * t, 0.0]).unwrap();
        let eps = RoughnessModulus::power(0.3).unwrap();
        let rep = rough_lift(&p, &eps, &RoughLiftOptions::default()).unwrap();
        // Brute-force chain supremum, independent of the library loop.
        let v = p.values();
        let mut brute = vec![0.0f64; v.len()];
        for j in 1..v.len() {
            brute[j] = (0..j)
                .map(|i| {
                    let dx = v[j][0] - v[i][0];
                    let dy = v[j][1] - v[i][1];
                    brute[i] + eps.h(dx * dx + dy * dy)
                })
                .fold(f64::NEG_INFINITY, f64::max);
        }
        for (a, b) in rep.z.iter().zip(&brute) {
            assert!((a - b).abs() < 1e-12);
        }
        let direct = (0.36f64).powf(0.7);
        assert!((rep.z.last().unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn variation_cap_reports_infinite_variation() {
        let p = circle(8);
        let eps = RoughnessModulus::power(0.5).unwrap();
        let rep = rough_lift(&p, &eps, &RoughLiftOptions { z0: 0.0, var_cap: 0.1 }).unwrap();
        assert!(rep.infinite_variation);
        assert!(rep.lift.is_none());
        assert!(rep.z.len() < p.len());
    }

    #[test]
    fn moduli_validate_and_clamp() {
        assert!(RoughnessModulus::power(1.0).is_err());
        assert!(RoughnessModulus::power(0.0).is_err());
        let eps = RoughnessModulus::power(0.5).unwrap();
        assert_eq!(eps.eval(0.0), 0.0);
        assert_eq!(eps.eval(4.0), 1.0);
        assert_eq!(eps.h(0.0), 0.0);
        let free = RoughnessModulus::from_closure("zero", |_| 0.0);
        assert!(free.h(1.0).is_finite());
    }

    #[test]
    fn inverse_square_tail_matches_series() {
        let basel = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        assert!((inv_square_tail(1) - basel).abs() < 1e-13);
        let mut direct = 0.0;
        for l in 7..400000 {
            direct += 1.0 / (l as f64 * l as f64);
        }
        assert!((inv_square_tail(7) - direct).abs() < 1e-5);
    }

    #[test]
    fn vanishing_recipe_builds_monotone_modulus() {
        let spec = crate::curves::lacunary::LacunarySpec::vanishing_area(1, 6).unwrap();
        let grid = uniform_grid(9);
        let out = crate::curves::lacunary::lacunary_eval(&spec, &grid).unwrap();
        let xy: Vec<[f64; 2]> = out
            .f
            .values()
            .iter()
            .zip(out.g.values())
            .map(|(a, b)| [*a, *b])
            .collect();
        let p = PlanarPath::new(grid, xy).unwrap();
        let eps = RoughnessModulus::vanishing_recipe(&p, 1).unwrap();
        let mut prev = 0.0;
        for i in 1..=40 {
            let d = i as f64 * 1e-4;
            let e = eps.eval(d);
            assert!(e >= prev - 1e-15);
            assert!(e <= 1.0);
            prev = e;
        }
    }
}
