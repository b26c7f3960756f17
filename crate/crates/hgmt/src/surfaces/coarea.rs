//! Coarea comparison: the level-set mass of a scalar pair against the
//! integral of its horizontal Jacobian determinant.
//!
//! For a pair `F` on a box `E` the two sides are
//!
//! * left: the spherical 2-measure of `F^{-1}(a) intersected with E`,
//!   integrated over the value plane,
//! * right: the integral of `|det d_hF|` over `E` in Lebesgue volume.
//!
//! Only the ratio of the two sides is reported.  The proportionality
//! constant relating them is never computed; constancy of the ratio across
//! boxes and across pairs is the checkable statement.
//!
//! Level sets are extracted fiber-wise: for each value `a` the planar
//! position is tracked across a ladder of z-levels by warm-started Newton
//! steps.  A fiber whose tracking fails anywhere is excluded and reported
//! through a coverage factor rather than silently dropped.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::group::HPoint;
use crate::measure::{hausdorff_area, AreaOptions, QuasiMetricCurve};
use crate::path::HeisPath;
use crate::surfaces::map::{horizontal_newton, Box3, ScalarMapPair};

#[derive(Clone, Debug)]
pub struct CoareaOptions {
    /// Midpoint cells per axis for the right-hand volume integral.
    pub rhs_grid: usize,
    /// Cells per axis of the value-plane integration rectangle.
    pub a_grid: usize,
    /// z-ladder cells per extracted fiber.
    pub fibers: usize,
    pub newton_tol: f64,
    pub newton_iters: usize,
    /// Mesh level handed to the measure estimator per fiber.
    pub area_level: u32,
    /// Subsample resolution per axis inside partially covered value cells.
    pub boundary_subsample: usize,
}

impl Default for CoareaOptions {
    fn default() -> Self {
        CoareaOptions {
            rhs_grid: 64,
            a_grid: 32,
            fibers: 64,
            newton_tol: 1e-10,
            newton_iters: 32,
            area_level: 6,
            boundary_subsample: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxCoarea {
    pub bounds: Box3,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Fraction of the value-plane weight whose fibers were tracked; below
    /// one the ratio rests on the measured part only.
    pub coverage: f64,
    pub lost_fibers: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoareaReport {
    pub boxes: Vec<BoxCoarea>,
    pub ratio_mean: f64,
    /// `(max - min) / mean` of the per-box ratios.
    pub ratio_spread: f64,
}

enum Probe {
    Lost,
    Out,
    In((f64, f64)),
}

enum Fiber {
    Lost,
    Empty,
    Measured { h2: f64, seed: (f64, f64) },
}

/// Newton solve for one value at a fixed z-level; the converged point is
/// re-anchored to that level.  The anchor is exact for pairs that do not
/// read the z-coordinate; for pairs that do, the residual re-check below
/// rejects anchors the solve does not survive.
fn solve_at(
    pair: &ScalarMapPair,
    a: [f64; 2],
    warm: (f64, f64),
    z: f64,
    opts: &CoareaOptions,
) -> Option<HPoint> {
    let start = HPoint::new(warm.0, warm.1, z);
    let trace = horizontal_newton(pair, a, start, opts.newton_tol, opts.newton_iters).ok()?;
    if !trace.converged {
        return None;
    }
    let anchored = HPoint::new(trace.point.x, trace.point.y, z);
    let val = pair.eval(anchored);
    let res = (val[0] - a[0]).hypot(val[1] - a[1]);
    if res <= 100.0 * opts.newton_tol {
        Some(anchored)
    } else {
        None
    }
}

/// Membership probe: does the fiber over `a` meet the box?  Retries from
/// the box center once so a stale warm start cannot lose a healthy fiber.
fn probe(pair: &ScalarMapPair, bx: &Box3, a: [f64; 2], warm: (f64, f64), opts: &CoareaOptions) -> Probe {
    let zc = 0.5 * (bx.z.0 + bx.z.1);
    let center = (0.5 * (bx.x.0 + bx.x.1), 0.5 * (bx.y.0 + bx.y.1));
    let solved = solve_at(pair, a, warm, zc, opts)
        .or_else(|| solve_at(pair, a, center, zc, opts));
    match solved {
        None => Probe::Lost,
        Some(p) => {
            if bx.x.0 <= p.x && p.x <= bx.x.1 && bx.y.0 <= p.y && p.y <= bx.y.1 {
                Probe::In((p.x, p.y))
            } else {
                Probe::Out
            }
        }
    }
}

/// Extract the fiber over `a` along the z-ladder and measure it.
fn fiber_measure(
    pair: &ScalarMapPair,
    bx: &Box3,
    a: [f64; 2],
    warm: (f64, f64),
    opts: &CoareaOptions,
) -> Result<Fiber> {
    let center = (0.5 * (bx.x.0 + bx.x.1), 0.5 * (bx.y.0 + bx.y.1));
    let mut track = warm;
    let mut seed = None;
    let mut chain: Vec<HPoint> = Vec::with_capacity(opts.fibers + 1);
    for j in 0..=opts.fibers {
        let z = bx.z.0 + (bx.z.1 - bx.z.0) * j as f64 / opts.fibers as f64;
        let p = match solve_at(pair, a, track, z, opts)
            .or_else(|| solve_at(pair, a, center, z, opts))
        {
            Some(p) => p,
            None => return Ok(Fiber::Lost),
        };
        track = (p.x, p.y);
        if seed.is_none() {
            seed = Some(track);
        }
        if bx.x.0 <= p.x && p.x <= bx.x.1 && bx.y.0 <= p.y && p.y <= bx.y.1 {
            chain.push(p);
        }
    }
    if chain.len() < 2 {
        return Ok(Fiber::Empty);
    }
    let grid: Vec<f64> = chain.iter().map(|p| p.z).collect();
    let path = HeisPath::new(grid, chain)?;
    let curve = QuasiMetricCurve::heis(&path);
    let area_opts = AreaOptions { random_subs: 8, ..AreaOptions::default() };
    let report = hausdorff_area(&curve, &[opts.area_level], &area_opts)?;
    let h2 = *report.estimate.last().unwrap();
    Ok(Fiber::Measured { h2, seed: seed.unwrap() })
}

/// Bounding rectangle of the pair's values over the box, from an inclusive
/// 9x9x9 corner-to-corner lattice.
fn value_rect(pair: &ScalarMapPair, bx: &Box3) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let m = 8;
    for i in 0..=m {
        let x = bx.x.0 + (bx.x.1 - bx.x.0) * i as f64 / m as f64;
        for j in 0..=m {
            let y = bx.y.0 + (bx.y.1 - bx.y.0) * j as f64 / m as f64;
            for k in 0..=m {
                let z = bx.z.0 + (bx.z.1 - bx.z.0) * k as f64 / m as f64;
                let v = pair.eval(HPoint::new(x, y, z));
                for c in 0..2 {
                    lo[c] = lo[c].min(v[c]);
                    hi[c] = hi[c].max(v[c]);
                }
            }
        }
    }
    (lo, hi)
}

fn check_box(pair: &ScalarMapPair, bx: &Box3, opts: &CoareaOptions) -> Result<BoxCoarea> {
    let det_floor = pair.min_abs_det(bx, 8);
    if det_floor < 1e-8 {
        return Err(domain(format!(
            "horizontal differential degenerates in the box (sampled min |det| = {det_floor:.3e})"
        )));
    }

    let n = opts.rhs_grid;
    let mut rhs_sum = 0.0;
    for i in 0..n {
        let x = bx.x.0 + (bx.x.1 - bx.x.0) * (i as f64 + 0.5) / n as f64;
        for j in 0..n {
            let y = bx.y.0 + (bx.y.1 - bx.y.0) * (j as f64 + 0.5) / n as f64;
            for k in 0..n {
                let z = bx.z.0 + (bx.z.1 - bx.z.0) * (k as f64 + 0.5) / n as f64;
                rhs_sum += pair.det_dh(HPoint::new(x, y, z)).abs();
            }
        }
    }
    let rhs = rhs_sum * bx.volume() / (n * n * n) as f64;

    let (lo, hi) = value_rect(pair, bx);
    let g = opts.a_grid;
    let (da1, da2) = ((hi[0] - lo[0]) / g as f64, (hi[1] - lo[1]) / g as f64);
    if !(da1 > 0.0 && da2 > 0.0) {
        return Err(domain("the pair's value range over the box is degenerate"));
    }
    let cell_area = da1 * da2;
    let rect_area = cell_area * (g * g) as f64;

    let mut warm = (0.5 * (bx.x.0 + bx.x.1), 0.5 * (bx.y.0 + bx.y.1));
    let mut lhs = 0.0;
    let mut lost_weight = 0.0;
    let mut lost_fibers = 0usize;
    let s = opts.boundary_subsample.max(1);

    for i in 0..g {
        for j in 0..g {
            let (a1, a2) = (lo[0] + da1 * i as f64, lo[1] + da2 * j as f64);
            let corners = [
                [a1, a2],
                [a1 + da1, a2],
                [a1, a2 + da2],
                [a1 + da1, a2 + da2],
            ];
            let center = [a1 + 0.5 * da1, a2 + 0.5 * da2];
            let mut ins = 0usize;
            let mut lost = 0usize;
            let mut probed = 0usize;
            for a in corners.iter().chain(std::iter::once(&center)) {
                probed += 1;
                match probe(pair, bx, *a, warm, opts) {
                    Probe::Lost => lost += 1,
                    Probe::Out => {}
                    Probe::In(seed) => {
                        ins += 1;
                        warm = seed;
                    }
                }
            }
            lost_fibers += lost;
            if lost == probed {
                lost_weight += cell_area;
                continue;
            }
            if ins == 0 {
                continue;
            }
            if ins + lost == probed && lost == 0 {
                match fiber_measure(pair, bx, center, warm, opts)? {
                    Fiber::Lost => {
                        lost_fibers += 1;
                        lost_weight += cell_area;
                    }
                    Fiber::Empty => {}
                    Fiber::Measured { h2, seed } => {
                        warm = seed;
                        lhs += cell_area * h2;
                    }
                }
                continue;
            }
            let sub_area = cell_area / (s * s) as f64;
            for p in 0..s {
                for q in 0..s {
                    let a = [
                        a1 + da1 * (p as f64 + 0.5) / s as f64,
                        a2 + da2 * (q as f64 + 0.5) / s as f64,
                    ];
                    match probe(pair, bx, a, warm, opts) {
                        Probe::Lost => {
                            lost_fibers += 1;
                            lost_weight += sub_area;
                        }
                        Probe::Out => {}
                        Probe::In(seed) => {
                            warm = seed;
                            match fiber_measure(pair, bx, a, warm, opts)? {
                                Fiber::Lost => {
                                    lost_fibers += 1;
                                    lost_weight += sub_area;
                                }
                                Fiber::Empty => {}
                                Fiber::Measured { h2, seed } => {
                                    warm = seed;
                                    lhs += sub_area * h2;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    if lhs <= 0.0 {
        return Err(domain("level-set sweep found no mass in the box"));
    }
    Ok(BoxCoarea {
        bounds: *bx,
        lhs,
        rhs,
        ratio: lhs / rhs,
        coverage: 1.0 - lost_weight / rect_area,
        lost_fibers,
    })
}

/// Measure the two sides of the coarea comparison on every box and report
/// per-box ratios with their spread.
pub fn coarea_check(
    pair: &ScalarMapPair,
    boxes: &[Box3],
    opts: &CoareaOptions,
) -> Result<CoareaReport> {
    if boxes.is_empty() {
        return Err(domain("at least one box is required"));
    }
    if opts.rhs_grid == 0 || opts.a_grid == 0 || opts.fibers < 2 {
        return Err(domain("grid resolutions must be positive (and fibers at least 2)"));
    }
    let mut out = Vec::with_capacity(boxes.len());
    for bx in boxes {
        out.push(check_box(pair, bx, opts)?);
    }
    let ratios: Vec<f64> = out.iter().map(|b| b.ratio).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = if ratios.len() > 1 {
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        (max - min) / mean
    } else {
        0.0
    };
    Ok(CoareaReport { boxes: out, ratio_mean: mean, ratio_spread: spread })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> CoareaOptions {
        CoareaOptions {
            rhs_grid: 16,
            a_grid: 8,
            fibers: 32,
            area_level: 5,
            boundary_subsample: 4,
            ..CoareaOptions::default()
        }
    }

    #[test]
    fn coordinate_pair_ratio_is_one_on_the_unit_box() {
        let pair = ScalarMapPair::coordinate_pair();
        let report = coarea_check(&pair, &[Box3::unit()], &quick()).unwrap();
        let b = &report.boxes[0];
        // Vertical fibers of height 1 over a unit value square, against a
        // unit volume of |det| = 1: both sides are exact.
        assert!((b.ratio - 1.0).abs() <= 1e-9, "ratio {}", b.ratio);
        assert!((b.coverage - 1.0).abs() == 0.0);
        assert_eq!(b.lost_fibers, 0);
    }

    #[test]
    fn rotated_pair_matches_the_coordinate_ratio() {
        let opts = CoareaOptions {
            a_grid: 16,
            boundary_subsample: 16,
            ..quick()
        };
        let planar = coarea_check(&ScalarMapPair::coordinate_pair(), &[Box3::unit()], &opts)
            .unwrap()
            .ratio_mean;
        let rotated = coarea_check(&ScalarMapPair::rotated_pair(), &[Box3::unit()], &opts)
            .unwrap()
            .ratio_mean;
        // The rotated value region is a diamond whose partially covered
        // cells go through the subsampling path.
        assert!(
            (rotated - planar).abs() <= 0.04 * planar,
            "planar {planar} rotated {rotated}"
        );
    }

    #[test]
    fn z_shift_and_stretch_leave_the_ratio_alone() {
        let pair = ScalarMapPair::coordinate_pair();
        let boxes = [
            Box3::unit(),
            Box3::new((0.0, 1.0), (0.0, 1.0), (1.25, 2.25)).unwrap(),
            Box3::new((0.0, 1.0), (0.0, 1.0), (2.5, 4.5)).unwrap(),
        ];
        let report = coarea_check(&pair, &boxes, &quick()).unwrap();
        let base = report.boxes[0].ratio;
        for b in &report.boxes {
            assert!((b.ratio - base).abs() <= 0.02 * base, "ratios {:?}", report.boxes);
        }
        assert!(report.ratio_spread <= 0.02);
        // The doubled z-extent doubles both sides.
        assert!((report.boxes[2].lhs - 2.0 * report.boxes[0].lhs).abs() <= 0.02);
    }

    #[test]
    fn degenerate_differential_is_rejected() {
        let pair = ScalarMapPair::new(
            |p| p.x,
            |p| p.x,
            |_| 1.0,
            |_| 0.0,
            |_| 1.0,
            |_| 0.0,
        );
        let err = coarea_check(&pair, &[Box3::unit()], &quick()).unwrap_err();
        assert!(format!("{err}").contains("degenerates"));
    }

    #[test]
    fn wrong_derivative_costs_coverage_but_not_the_report() {
        // The claimed x-derivative has the wrong sign above x = 0.4, so
        // Newton runs away for targets below the warm-start band and the
        // sweep loses roughly the lower half of the value range.
        let pair = ScalarMapPair::new(
            |p| p.x,
            |p| p.y,
            |p| if p.x >= 0.4 { -1.0 } else { 1.0 },
            |_| 0.0,
            |_| 0.0,
            |_| 1.0,
        );
        let report = coarea_check(&pair, &[Box3::unit()], &quick()).unwrap();
        let b = &report.boxes[0];
        assert!(b.lost_fibers > 0);
        assert!(b.coverage > 0.2 && b.coverage < 0.9, "coverage {}", b.coverage);
        assert!(b.lhs > 0.0);
    }
}
