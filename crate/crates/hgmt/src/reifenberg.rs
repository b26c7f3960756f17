//! Flatness profiles and dyadic parametrization of vertically flat sets.
//!
//! A point cloud is probed in three ways: the Whitney profile bounds the
//! planar spread of pairs against their vertical separation, the Reifenberg
//! profile measures the Hausdorff distance from metric balls to vertical
//! segments, and the dyadic parametrization extracts an ordered arc by
//! recursive midpoint selection, certifying the chord decay rate
//! `c(eps) = 2^{-1/2} (eps^2 + sqrt(1 + eps^2 + eps^4))`.

use crate::error::{domain, Result};
use crate::group::{
    contact_increment, dist_inf, in_vertical_cone, ConeSign, ConeSpec, HPoint,
};
use crate::num::{dyadic_scale, pow2};
use crate::serialize::fmt_field;
use serde::Serialize;
use std::collections::BTreeMap;

pub struct PointCloud {
    points: Vec<HPoint>,
    r_min: f64,
    r_max: f64,
}

impl PointCloud {
    /// Cloud with the scale range inferred from the data: `r_max` is the
    /// diameter and `r_min` four times the nearest-neighbor spacing, below
    /// which a finite sample carries no geometric information.
    pub fn new(points: Vec<HPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(domain("a point cloud needs at least two points"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(domain("point cloud coordinates must be finite"));
        }
        let mut r_max = 0.0f64;
        let mut nn = f64::INFINITY;
        for i in 0..points.len() {
            let mut nearest = f64::INFINITY;
            for j in 0..points.len() {
                if i == j {
                    continue;
                }
                let d = dist_inf(points[i], points[j]);
                r_max = r_max.max(d);
                if d > 0.0 {
                    nearest = nearest.min(d);
                }
            }
            nn = nn.min(nearest);
        }
        if !(r_max > 0.0) {
            return Err(domain("all cloud points coincide"));
        }
        let r_min = (4.0 * nn).min(r_max);
        Ok(PointCloud { points, r_min, r_max })
    }

    pub fn with_scales(points: Vec<HPoint>, r_min: f64, r_max: f64) -> Result<Self> {
        if !(0.0 < r_min && r_min <= r_max && r_max.is_finite()) {
            return Err(domain(format!("invalid scale range [{r_min}, {r_max}]")));
        }
        let mut cloud = Self::new(points)?;
        cloud.r_min = r_min;
        cloud.r_max = r_max;
        Ok(cloud)
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Dyadic scale grid `2^-k` covering `[r_min, r_max]` from the largest
    /// power of two not exceeding `r_max` down to the smallest not below
    /// `r_min`.
    fn scale_indices(&self) -> (i32, i32) {
        let k_hi = dyadic_scale(self.r_max) + 1;
        let base = dyadic_scale(self.r_min);
        let k_lo = if pow2(-(base + 1)) >= self.r_min * (1.0 - 1e-12) {
            base + 1
        } else {
            base
        };
        (k_hi, k_lo.max(k_hi))
    }
}

/// Per-scale planar-spread maxima.  `ratio_vertical` divides the planar
/// offset by the square root of the contact increment (the Whitney
/// statistic); `ratio_metric` divides by the full distance.  Pairs at zero
/// distance are skipped and counted; pairs with zero contact but nonzero
/// planar offset are counted separately since their vertical ratio is
/// unbounded.
#[derive(Clone, Debug, Serialize)]
pub struct WhitneyReport {
    pub r: Vec<f64>,
    pub ratio_vertical: Vec<f64>,
    pub ratio_metric: Vec<f64>,
    pub pairs: u64,
    pub skipped_coincident: u64,
    pub horizontal_pairs: u64,
}

impl WhitneyReport {
    /// Statistic at the finest populated scale.
    pub fn finest_vertical(&self) -> f64 {
        *self.ratio_vertical.last().unwrap()
    }

    pub fn max_metric(&self) -> f64 {
        self.ratio_metric.iter().cloned().fold(0.0, f64::max)
    }

    pub fn min_metric(&self) -> f64 {
        self.ratio_metric.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

pub fn whitney_profile(cloud: &PointCloud) -> Result<WhitneyReport> {
    let pts = cloud.points();
    let mut buckets: BTreeMap<i32, (f64, f64)> = BTreeMap::new();
    let mut pairs = 0u64;
    let mut skipped = 0u64;
    let mut horizontal = 0u64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = dist_inf(pts[i], pts[j]);
            if d == 0.0 {
                skipped += 1;
                continue;
            }
            pairs += 1;
            let rel = pts[i].rel(pts[j]);
            let planar = rel.x.hypot(rel.y);
            let slot = buckets.entry(dyadic_scale(d)).or_insert((0.0, 0.0));
            if rel.z == 0.0 {
                if planar > 0.0 {
                    horizontal += 1;
                }
            } else {
                slot.0 = slot.0.max(planar / rel.z.abs().sqrt());
            }
            slot.1 = slot.1.max(planar / d);
        }
    }
    if pairs == 0 {
        return Err(domain("all point pairs coincide"));
    }
    let mut r = Vec::new();
    let mut ratio_vertical = Vec::new();
    let mut ratio_metric = Vec::new();
    // A bucket labeled r collects pairs with d in [r, 2r); the label is the
    // inclusive lower edge so it coincides with the ball radii used by
    // reifenberg_epsilon.
    for (k, (v, m)) in buckets {
        r.push(pow2(-(k + 1)));
        ratio_vertical.push(v);
        ratio_metric.push(m);
    }
    Ok(WhitneyReport {
        r,
        ratio_vertical,
        ratio_metric,
        pairs,
        skipped_coincident: skipped,
        horizontal_pairs: horizontal,
    })
}

/// Per-scale normalized Hausdorff distance from ball contents to vertical
/// segments.  `None` marks a scale at which no sampled base point had a
/// second cloud point inside its ball.
#[derive(Clone, Debug, Serialize)]
pub struct EpsilonReport {
    pub r: Vec<f64>,
    pub epsilon: Vec<Option<f64>>,
    pub bases_used: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct EpsilonOptions {
    /// Base points examined per scale; strided deterministically when the
    /// cloud is larger.
    pub base_budget: usize,
}

impl Default for EpsilonOptions {
    fn default() -> Self {
        EpsilonOptions { base_budget: 64 }
    }
}

/// Two-sided Hausdorff distance between `E ∩ B(A, r)` and the vertical
/// segment through `A`, normalized by `r` and maximized over base points.
/// The segment spans the contact window the ball contents occupy, which is
/// contained in `[-r^2, r^2]`, and is discretized at 4096 cells so its
/// metric resolution is at worst `r / 64`.
pub fn reifenberg_epsilon(cloud: &PointCloud, opts: &EpsilonOptions) -> Result<EpsilonReport> {
    let pts = cloud.points();
    if opts.base_budget == 0 {
        return Err(domain("base budget must be positive"));
    }
    let stride = pts.len().div_ceil(opts.base_budget).max(1);
    let bases: Vec<usize> = (0..pts.len()).step_by(stride).collect();
    let (k_hi, k_lo) = cloud.scale_indices();
    let mut r_out = Vec::new();
    let mut eps_out = Vec::new();
    for k in k_hi..=k_lo {
        let r = pow2(-k);
        let mut worst: Option<f64> = None;
        for &a in &bases {
            // Relative coordinates: distance from (u, v, w) to the segment
            // point (0, 0, s) is max(||(u, v)||, |w - s|^(1/2)).
            let mut rels: Vec<(f64, f64)> = Vec::new();
            for (j, p) in pts.iter().enumerate() {
                if j == a {
                    continue;
                }
                let rel = pts[a].rel(*p);
                if dist_inf(pts[a], *p) <= r {
                    rels.push((rel.z, rel.x.hypot(rel.y)));
                }
            }
            if rels.is_empty() {
                continue;
            }
            rels.push((0.0, 0.0));
            rels.sort_by(|p, q| p.0.total_cmp(&q.0));
            // The segment is trimmed to the contact window the ball contents
            // occupy (always inside [-r^2, r^2]).  A finite sample truncates
            // at its ends, and a truncated vertical set is still vertical;
            // genuine horizontal spread is caught by the planar term either
            // way, since the trimmed segment keeps no planar extent.
            let lo_w = rels.first().unwrap().0.min(0.0);
            let hi_w = rels.last().unwrap().0.max(0.0);
            let seg_cells = 4096usize;
            let seg_step = (hi_w - lo_w) / seg_cells as f64;
            // Cloud side: nearest segment sample to (u, v, w) has s within
            // half a step of w clamped to the window.
            let mut d_cloud = 0.0f64;
            for &(w, planar) in &rels {
                let s = if seg_step > 0.0 {
                    (lo_w + ((w - lo_w) / seg_step).round() * seg_step).clamp(lo_w, hi_w)
                } else {
                    lo_w
                };
                d_cloud = d_cloud.max(planar.max((w - s).abs().sqrt()));
            }
            // Segment side: nearest cloud point to (0, 0, s); the sorted w
            // scan stops once the vertical gap alone exceeds the best.
            let mut d_seg = 0.0f64;
            for i in 0..=seg_cells {
                let s = lo_w + seg_step * i as f64;
                let at = rels.partition_point(|p| p.0 < s);
                let mut best = f64::INFINITY;
                let mut lo = at;
                let mut hi = at;
                loop {
                    let left_gap = if lo > 0 { (s - rels[lo - 1].0).sqrt() } else { f64::INFINITY };
                    let right_gap =
                        if hi < rels.len() { (rels[hi].0 - s).max(0.0).sqrt() } else { f64::INFINITY };
                    if left_gap >= best && right_gap >= best {
                        break;
                    }
                    if left_gap <= right_gap {
                        lo -= 1;
                        best = best.min(left_gap.max(rels[lo].1));
                    } else {
                        best = best.min(right_gap.max(rels[hi].1));
                        hi += 1;
                    }
                }
                d_seg = d_seg.max(best);
            }
            let eps = d_cloud.max(d_seg) / r;
            worst = Some(worst.map_or(eps, |w: f64| w.max(eps)));
        }
        r_out.push(r);
        eps_out.push(worst);
    }
    Ok(EpsilonReport { r: r_out, epsilon: eps_out, bases_used: bases.len() })
}

/// Combined profile in the shape expected by downstream consumers:
/// matching scale, Hausdorff, and Whitney series.
#[derive(Clone, Debug, Serialize)]
pub struct CloudProfile {
    pub r: Vec<f64>,
    pub epsilon: Vec<Option<f64>>,
    pub whitney: Vec<Option<f64>>,
}

pub fn cloud_profile(cloud: &PointCloud, opts: &EpsilonOptions) -> Result<CloudProfile> {
    let eps = reifenberg_epsilon(cloud, opts)?;
    let whit = whitney_profile(cloud)?;
    let whitney = eps
        .r
        .iter()
        .map(|&r| {
            whit.r
                .iter()
                .position(|&wr| wr == r)
                .map(|i| whit.ratio_vertical[i])
        })
        .collect();
    Ok(CloudProfile { r: eps.r, epsilon: eps.epsilon, whitney })
}

/// Chord decay base of the midpoint construction.
pub fn chord_decay(eps: f64) -> f64 {
    let e2 = eps * eps;
    (e2 + (1.0 + e2 + e2 * e2).sqrt()) / 2.0f64.sqrt()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChainPoint {
    /// Level at which the point entered the chain; endpoints are level 0.
    pub level: u32,
    /// Index into the source cloud.
    pub idx: usize,
    pub point: HPoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChordCertificate {
    pub r0: f64,
    pub eps: f64,
    pub c_eps: f64,
    /// Largest chord between consecutive chain points after each level.
    pub max_chord: Vec<f64>,
    /// `max_chord[n] <= c^n r0 (1 + tol)` at every level.
    pub decay_ok: bool,
    /// `max_chord[n+1] <= c max_chord[n] (1 + tol)` between levels.
    pub step_ok: bool,
    /// Consecutive contact increments all positive.
    pub ordered_ok: bool,
    /// Every midpoint lies in the upward cone of its predecessor and the
    /// downward cone of its successor at the derived opening.
    pub cone_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Parametrization {
    pub chain: Vec<ChainPoint>,
    pub certificate: ChordCertificate,
}

impl Parametrization {
    /// Chain rows as `level,idx,x,y,z` with round-trip-exact floats.
    pub fn csv_string(&self) -> String {
        let mut out = String::from("level,idx,x,y,z\n");
        for cp in &self.chain {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                cp.level,
                cp.idx,
                fmt_field(cp.point.x),
                fmt_field(cp.point.y),
                fmt_field(cp.point.z)
            ));
        }
        out
    }
}

const CHORD_TOL: f64 = 0.05;

/// Recursive midpoint parametrization.  Endpoints are the lowest point of
/// the cloud (or `origin`) and the farthest admissible point above it;
/// every cell `[P, Q]` is split at the cloud point nearest the ideal
/// midpoint `P * (0, 0, r1^2)`, `r1 = d(P, Q) / sqrt(2)`, admissible within
/// distance `eps * r1`, ties to the smallest index.  Levels stop at the
/// cloud's scale floor.
pub fn dyadic_parametrize(
    cloud: &PointCloud,
    eps: f64,
    origin: Option<usize>,
) -> Result<Parametrization> {
    if !(0.0 < eps && eps <= 0.5) {
        return Err(domain(format!(
            "flatness budget {eps} outside the working range (0, 0.5]"
        )));
    }
    let pts = cloud.points();
    let o = match origin {
        Some(i) => {
            if i >= pts.len() {
                return Err(domain(format!("origin index {i} beyond the cloud")));
            }
            i
        }
        None => {
            let mut best = 0usize;
            for (i, p) in pts.iter().enumerate() {
                if p.z < pts[best].z {
                    best = i;
                }
            }
            best
        }
    };
    // Upper endpoint: farthest point whose planar offset from the origin is
    // controlled by its height, so the pair spans a near-vertical segment.
    let mut a: Option<usize> = None;
    let mut a_dist = 0.0f64;
    for (i, p) in pts.iter().enumerate() {
        if i == o {
            continue;
        }
        let rel = pts[o].rel(*p);
        if rel.z <= 0.0 {
            continue;
        }
        if rel.x.hypot(rel.y) <= eps * rel.z.sqrt() {
            let d = dist_inf(pts[o], *p);
            if d > a_dist {
                a_dist = d;
                a = Some(i);
            }
        }
    }
    let a = a.ok_or_else(|| {
        domain("no admissible upper endpoint: no point sits in the vertical cone above the origin")
    })?;

    let mut chain: Vec<ChainPoint> = vec![
        ChainPoint { level: 0, idx: o, point: pts[o] },
        ChainPoint { level: 0, idx: a, point: pts[a] },
    ];
    let mut used = vec![false; pts.len()];
    used[o] = true;
    used[a] = true;
    let r0 = a_dist;
    let mut max_chord = vec![r0];
    let floor = cloud.r_min();
    let mut level = 0u32;
    loop {
        let widest = chain
            .windows(2)
            .map(|w| dist_inf(w[0].point, w[1].point))
            .fold(0.0, f64::max);
        if widest / 2.0f64.sqrt() <= floor {
            break;
        }
        level += 1;
        let mut next: Vec<ChainPoint> = Vec::with_capacity(2 * chain.len() - 1);
        for w in chain.windows(2) {
            let (p, q) = (w[0], w[1]);
            let r1 = dist_inf(p.point, q.point) / 2.0f64.sqrt();
            let ideal = p.point.mul(HPoint::new(0.0, 0.0, r1 * r1));
            let mut best: Option<(f64, usize)> = None;
            for (i, cand) in pts.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let d = dist_inf(*cand, ideal);
                if d <= eps * r1 && best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, i));
                }
            }
            let Some((_, b)) = best else {
                return Err(domain(format!(
                    "level {level}: no midpoint within {:.3e} of the ideal point for the cell \
                     [{:?} -> {:?}]",
                    eps * r1,
                    p.point,
                    q.point
                )));
            };
            used[b] = true;
            next.push(p);
            next.push(ChainPoint { level, idx: b, point: pts[b] });
        }
        next.push(*chain.last().unwrap());
        chain = next;
        max_chord.push(
            chain
                .windows(2)
                .map(|w| dist_inf(w[0].point, w[1].point))
                .fold(0.0, f64::max),
        );
    }

    let c_eps = chord_decay(eps);
    let decay_ok = max_chord
        .iter()
        .enumerate()
        .all(|(n, &m)| m <= c_eps.powi(n as i32) * r0 * (1.0 + CHORD_TOL));
    let step_ok = max_chord
        .windows(2)
        .all(|w| w[1] <= c_eps * w[0] * (1.0 + CHORD_TOL));
    let ordered_ok = chain
        .windows(2)
        .all(|w| contact_increment(w[0].point, w[1].point) > 0.0);
    // Opening derived from admissibility: a midpoint sits within eps*r1 of
    // the vertical point above its predecessor, hence its planar offset
    // over vertical gap is at most eps / sqrt(1 - eps^2); relative to the
    // successor the offsets of both cell endpoints stack up.
    let open_up = (eps / (1.0 - eps * eps).sqrt() * (1.0 + CHORD_TOL)).min(0.95);
    let open_down = (open_up * (1.0 + 2.0f64.sqrt())).min(0.95);
    let mut cone_ok = true;
    for w in chain.windows(2) {
        if w[1].level <= w[0].level {
            continue;
        }
        let radius = dist_inf(w[0].point, w[1].point) * (1.0 + 2.0 * eps) + f64::MIN_POSITIVE;
        let cone = ConeSpec::new(w[0].point, open_up, 2.0 * radius, ConeSign::Above)?;
        cone_ok &= in_vertical_cone(&cone, w[1].point);
    }
    for w in chain.windows(2) {
        if w[0].level <= w[1].level {
            continue;
        }
        let radius = dist_inf(w[0].point, w[1].point) * (1.0 + 2.0 * eps) + f64::MIN_POSITIVE;
        let cone = ConeSpec::new(w[1].point, open_down, 2.0 * radius, ConeSign::Below)?;
        cone_ok &= in_vertical_cone(&cone, w[0].point);
    }

    Ok(Parametrization {
        chain,
        certificate: ChordCertificate {
            r0,
            eps,
            c_eps,
            max_chord,
            decay_ok,
            step_ok,
            ordered_ok,
            cone_ok,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::lacunary::{lacunary_eval, LacunarySpec};
    use crate::curves::lift::vertical_lift;
    use crate::path::{uniform_grid, PlanarPath};

    fn vertical_cloud(k: u32, len: f64) -> PointCloud {
        let pts = uniform_grid(k)
            .iter()
            .map(|&t| HPoint::new(0.0, 0.0, len * t))
            .collect();
        PointCloud::new(pts).unwrap()
    }

    fn lift_cloud(k: u32, amplitude: f64) -> PointCloud {
        let spec =
            LacunarySpec::holder_pair(0.75, (k as usize).saturating_sub(3), amplitude).unwrap();
        let grid = uniform_grid(k);
        let out = lacunary_eval(&spec, &grid).unwrap();
        let xy: Vec<[f64; 2]> = out
            .f
            .values()
            .iter()
            .zip(out.g.values())
            .map(|(a, b)| [*a, *b])
            .collect();
        let lift = vertical_lift(&PlanarPath::new(grid, xy).unwrap(), 0.0).unwrap();
        PointCloud::new(lift.values().to_vec()).unwrap()
    }

    fn a_set(n_top: usize) -> PointCloud {
        let mut pts = vec![HPoint::ORIGIN];
        for n in 1..=n_top {
            let x = 1.0 / n as f64;
            pts.push(HPoint::new(x, 0.0, x));
            pts.push(HPoint::new(x, -x * x, x));
        }
        PointCloud::new(pts).unwrap()
    }

    #[test]
    fn z_axis_cloud_has_zero_whitney_profile() {
        let report = whitney_profile(&vertical_cloud(6, 1.0)).unwrap();
        assert!(report.ratio_vertical.iter().all(|v| *v == 0.0));
        assert!(report.ratio_metric.iter().all(|v| *v == 0.0));
        assert_eq!(report.skipped_coincident, 0);
        assert_eq!(report.horizontal_pairs, 0);
    }

    #[test]
    fn parabolic_graph_whitney_profile_sits_at_the_cone_bound() {
        // (t, 0, 2t|t|): pairs anchored at the origin keep planar spread
        // exactly 2^{-1/2} times the vertical scale, so no bucket falls
        // below that and the Whitney condition visibly fails.
        let pts: Vec<HPoint> = (0..=512)
            .map(|i| {
                let t = -1.0 + i as f64 / 256.0;
                HPoint::new(t, 0.0, 2.0 * t * t.abs())
            })
            .collect();
        let report = whitney_profile(&PointCloud::new(pts).unwrap()).unwrap();
        let inv_sqrt2 = 0.5f64.sqrt();
        for (r, v) in report.r.iter().zip(&report.ratio_vertical) {
            assert!(*v >= inv_sqrt2 - 1e-9, "bucket {r}: {v}");
        }
        assert!(report.min_metric() >= inv_sqrt2 - 1e-9);
    }

    #[test]
    fn truncated_a_set_finest_bucket_scales_inversely_with_depth() {
        // Pairs (A_k, B_k) populate the finest buckets; their squared
        // Whitney ratio is 1 / (2k), so the finest bucket statistic decays
        // like 1/N with a stable constant.
        let mut cs = Vec::new();
        for n_top in [50usize, 100, 200] {
            let report = whitney_profile(&a_set(n_top)).unwrap();
            let sq = report.finest_vertical().powi(2);
            cs.push(sq * n_top as f64);
        }
        for c in &cs {
            assert!(*c > 0.05 && *c < 2.0, "constant {c}");
        }
        let spread = cs.iter().cloned().fold(0.0, f64::max)
            / cs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 2.0, "constants {cs:?}");
    }

    #[test]
    fn whitney_profile_is_left_and_dilation_invariant() {
        let base = lift_cloud(8, 0.25);
        let before = whitney_profile(&base).unwrap();
        let g = HPoint::new(0.4, -1.3, 2.2);
        let moved: Vec<HPoint> = base.points().iter().map(|p| g.mul(*p)).collect();
        let after = whitney_profile(&PointCloud::new(moved).unwrap()).unwrap();
        assert_eq!(before.r, after.r);
        for (x, y) in before.ratio_vertical.iter().zip(&after.ratio_vertical) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
        // Dilation by an exact power of two relabels buckets without
        // changing the ratios.
        let scaled: Vec<HPoint> = base.points().iter().map(|p| p.dilate(4.0)).collect();
        let dil = whitney_profile(&PointCloud::new(scaled).unwrap()).unwrap();
        assert_eq!(dil.r.len(), before.r.len());
        for (x, y) in before.ratio_vertical.iter().zip(&dil.ratio_vertical) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn vertical_cloud_epsilon_stays_at_the_discretization_floor() {
        let cloud = PointCloud::with_scales(
            vertical_cloud(14, 1.0).points.clone(),
            0.25,
            1.0,
        )
        .unwrap();
        let report = reifenberg_epsilon(&cloud, &EpsilonOptions::default()).unwrap();
        assert!(report.epsilon.iter().any(|e| e.is_some()));
        for (r, eps) in report.r.iter().zip(&report.epsilon) {
            if let Some(e) = eps {
                // Segment sampling contributes 1/64 at most; the cloud's own
                // z-spacing adds sqrt(h/2)/r.
                let bound = 1.0 / 64.0 + (0.5f64 * pow2(-14)).sqrt() / r;
                assert!(*e <= bound * 1.1, "r {r}: eps {e} bound {bound}");
            }
        }
    }

    #[test]
    fn diagonal_line_epsilon_stays_large_at_planar_scales() {
        // (t, 0, t) at radii r >= 1: the planar component of the metric
        // binds, so ball contents spread r sideways and no vertical segment
        // comes closer than about r.  (Below unit scale the same line is
        // nearly vertical: its offset r^2 vanishes faster than r.)
        let pts: Vec<HPoint> = (0..=4096)
            .map(|i| {
                let t = 16.0 * i as f64 / 4096.0;
                HPoint::new(t, 0.0, t)
            })
            .collect();
        let cloud = PointCloud::with_scales(pts, 1.0, 8.0).unwrap();
        let report = reifenberg_epsilon(&cloud, &EpsilonOptions::default()).unwrap();
        let mut sampled = 0usize;
        for eps in report.epsilon.iter().flatten() {
            assert!(*eps >= 0.5, "eps {eps}");
            sampled += 1;
        }
        assert!(sampled >= 3);
    }

    #[test]
    fn lift_cloud_epsilon_decays_below_the_saturation_scale() {
        // The lift's planar spread saturates at the curve's total width,
        // which inflates epsilon near the scale where that width matches
        // the ball radius.  Below that scale epsilon decays like sqrt(r)
        // down to the sampling floor, so the profile's tail is monotone.
        let cloud = lift_cloud(14, 0.15);
        let report = reifenberg_epsilon(&cloud, &EpsilonOptions::default()).unwrap();
        let sampled: Vec<(f64, f64)> = report
            .r
            .iter()
            .zip(&report.epsilon)
            .filter_map(|(r, e)| e.map(|e| (*r, e)))
            .collect();
        assert!(sampled.len() >= 5, "profile {sampled:?}");
        let (peak_idx, peak) = sampled
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, p)| (i, p.1))
            .unwrap();
        assert!(peak_idx + 2 < sampled.len(), "peak at the fine end: {sampled:?}");
        for w in sampled[peak_idx..].windows(2) {
            assert!(w[1].1 < w[0].1, "tail not decaying: {sampled:?}");
        }
        let fine = sampled.last().unwrap().1;
        assert!(fine < 0.7 * peak, "peak {peak} fine {fine}");
    }

    #[test]
    fn vertical_cloud_parametrization_matches_dyadic_subdivision() {
        let cloud = vertical_cloud(12, 1.0);
        let par = dyadic_parametrize(&cloud, 0.3, None).unwrap();
        let cert = &par.certificate;
        assert!(cert.decay_ok && cert.step_ok && cert.ordered_ok && cert.cone_ok);
        assert!((cert.r0 - 1.0).abs() <= 1e-12);
        // Chords halve in squared distance per level while the z-grid
        // resolves the ideal midpoints.
        for (n, chord) in cert.max_chord.iter().enumerate() {
            if *chord > 0.1 {
                let ideal = pow2(-(n as i32)).sqrt();
                assert!(
                    (chord - ideal).abs() <= 0.02 * ideal,
                    "level {n}: chord {chord} ideal {ideal}"
                );
            }
        }
        // The chain is injective and strictly z-ordered.
        let mut seen: Vec<usize> = par.chain.iter().map(|c| c.idx).collect();
        let total = seen.len();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), total);
        assert!(par.chain.windows(2).all(|w| w[0].point.z < w[1].point.z));
    }

    #[test]
    fn lift_cloud_parametrization_certifies_chord_decay() {
        // Amplitude is kept small so the planar spread within each cell
        // stays inside the 0.3-cone admissibility margin at every level.
        let cloud = lift_cloud(12, 0.05);
        let par = dyadic_parametrize(&cloud, 0.3, Some(0)).unwrap();
        let cert = &par.certificate;
        assert!((cert.c_eps - 0.8046).abs() < 5e-4);
        assert!(cert.decay_ok, "chords {:?}", cert.max_chord);
        assert!(cert.ordered_ok);
        assert!(cert.cone_ok);
        assert!(cert.max_chord.len() >= 4);
        let csv = par.csv_string();
        assert!(csv.starts_with("level,idx,x,y,z\n"));
        assert_eq!(csv.lines().count(), par.chain.len() + 1);
    }

    #[test]
    fn parametrize_rejects_out_of_range_budgets_and_flat_failures() {
        let cloud = vertical_cloud(6, 1.0);
        assert!(dyadic_parametrize(&cloud, 0.6, None).is_err());
        assert!(dyadic_parametrize(&cloud, 0.0, None).is_err());
        // A cloud with nothing above the origin has no admissible endpoint.
        let pts = vec![
            HPoint::new(0.0, 0.0, 0.0),
            HPoint::new(1.0, 0.0, 0.0),
            HPoint::new(2.0, 0.0, -0.5),
        ];
        let err = dyadic_parametrize(&PointCloud::new(pts).unwrap(), 0.3, Some(0)).unwrap_err();
        assert!(format!("{err}").contains("upper endpoint"));
        // A sparse middle makes some level fail with a named cell; the scale
        // floor is lowered so the recursion actually reaches the gap.
        let mut pts: Vec<HPoint> = Vec::new();
        for i in 0..=16 {
            let z = i as f64 / 16.0;
            if !(0.2..0.5).contains(&z) {
                pts.push(HPoint::new(0.0, 0.0, z));
            }
        }
        let sparse = PointCloud::with_scales(pts, 0.05, 1.0).unwrap();
        let err = dyadic_parametrize(&sparse, 0.1, Some(0)).unwrap_err();
        assert!(format!("{err}").contains("no midpoint"), "got {err}");
    }

    #[test]
    fn profile_json_shape_is_r_epsilon_whitney() {
        let cloud = vertical_cloud(8, 1.0);
        let profile = cloud_profile(&cloud, &EpsilonOptions::default()).unwrap();
        let json = serde_json::to_string(&profile).unwrap();
        assert!(json.starts_with("{\"r\":["));
        assert!(json.contains("\"epsilon\":["));
        assert!(json.contains("\"whitney\":["));
        assert_eq!(profile.r.len(), profile.epsilon.len());
        assert_eq!(profile.r.len(), profile.whitney.len());
    }
}
