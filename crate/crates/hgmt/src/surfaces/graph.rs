//! Intrinsic graphs over the (y, z)-plane and their horizontal flow.
//!
//! A scalar field `phi` on a rectangle `Omega` parametrizes the surface
//! `Phi(y, z) = (phi(y, z), y, z + 2 phi(y, z) y)`.  The horizontal
//! direction of the ambient group pulls back to the plane field
//! `W = d/dy - 4 phi d/dz`, so integral curves are graphs
//! `t -> (y0 + t, z(t))` with `z' = -4 phi(y0 + t, z)`.
//!
//! The solver is explicit Euler with a half-step companion run.  `phi` is in
//! general only continuous, which makes every solution `C^1` but nothing
//! better; a higher-order scheme would claim accuracy the field cannot
//! support, while the half-step gap gives a usable first-order error
//! estimate.

use crate::error::{domain, Result};
use crate::group::{dist_inf, HPoint};

/// Closed axis-aligned rectangle in the (y, z)-plane.  Degenerate edges are
/// allowed so that zero-area quadrature regions exist; operations that need
/// interior room validate their own spans.
#[derive(Clone, Copy, Debug)]
pub struct Rect {
    pub y: (f64, f64),
    pub z: (f64, f64),
}

impl Rect {
    pub fn new(y: (f64, f64), z: (f64, f64)) -> Result<Self> {
        for v in [y.0, y.1, z.0, z.1] {
            if !v.is_finite() {
                return Err(domain(format!("rectangle bound {v} is not finite")));
            }
        }
        if y.0 > y.1 || z.0 > z.1 {
            return Err(domain(format!(
                "rectangle [{}, {}] x [{}, {}] has a reversed edge",
                y.0, y.1, z.0, z.1
            )));
        }
        Ok(Rect { y, z })
    }

    pub fn contains(&self, y: f64, z: f64) -> bool {
        self.y.0 <= y && y <= self.y.1 && self.z.0 <= z && z <= self.z.1
    }

    pub fn y_span(&self) -> f64 {
        self.y.1 - self.y.0
    }

    pub fn z_span(&self) -> f64 {
        self.z.1 - self.z.0
    }

    pub fn area(&self) -> f64 {
        self.y_span() * self.z_span()
    }

    fn covers(&self, other: &Rect) -> bool {
        let tol = 1e-12 * (self.y_span() + self.z_span()).max(1.0);
        self.y.0 - tol <= other.y.0
            && other.y.1 <= self.y.1 + tol
            && self.z.0 - tol <= other.z.0
            && other.z.1 <= self.z.1 + tol
    }
}

type ScalarField = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Scalar field on a rectangle together with the graph map
/// `Phi(y, z) = (phi, y, z + 2 phi y)` and an optional slope field `w`,
/// the derivative of `phi` along integral curves.  Without a caller-supplied
/// slope, `w` is measured by central difference quotients of `phi` along a
/// short integral curve.
pub struct IntrinsicGraph {
    domain: Rect,
    phi: ScalarField,
    slope: Option<ScalarField>,
}

impl IntrinsicGraph {
    pub fn new(dom: Rect, phi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let graph = IntrinsicGraph { domain: dom, phi: Box::new(phi), slope: None };
        graph.check_injective(32)?;
        Ok(graph)
    }

    pub fn with_slope(
        dom: Rect,
        phi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        slope: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let graph = IntrinsicGraph {
            domain: dom,
            phi: Box::new(phi),
            slope: Some(Box::new(slope)),
        };
        graph.check_injective(32)?;
        Ok(graph)
    }

    /// Constant field; the flow is the exact linear shear `z = z0 - 4ct`.
    pub fn constant(dom: Rect, c: f64) -> Result<Self> {
        Self::with_slope(dom, move |_, _| c, |_, _| 0.0)
    }

    /// `phi(y, z) = y`; along any integral curve `phi` grows at unit rate.
    pub fn linear_y(dom: Rect) -> Result<Self> {
        Self::with_slope(dom, |y, _| y, |_, _| 1.0)
    }

    /// `phi(y, z) = scale * sqrt(|z|)`: continuous but not Lipschitz at
    /// `z = 0`, the classical non-uniqueness example.  No slope field is
    /// attached because `phi` is not differentiable along curves crossing
    /// the axis.
    pub fn sqrt_abs_z(dom: Rect, scale: f64) -> Result<Self> {
        if !scale.is_finite() {
            return Err(domain(format!("field scale {scale} is not finite")));
        }
        Self::new(dom, move |_, z| scale * z.abs().sqrt())
    }

    /// Distinct parameters must map to distinct surface points within the
    /// sampling resolution.  The contact coordinate of `Phi(y, z1)` relative
    /// to `Phi(y, z2)` is exactly `z2 - z1`, so for a finite field the map
    /// cannot collide; the sampled scan is a guard against evaluators that
    /// return non-finite or unstable values.
    fn check_injective(&self, n: usize) -> Result<()> {
        let scale = (self.domain.y_span() + self.domain.z_span()).max(1.0);
        for i in 0..=n {
            let y = self.domain.y.0 + self.domain.y_span() * i as f64 / n as f64;
            let mut column: Vec<(f64, HPoint)> = Vec::with_capacity(n + 1);
            for j in 0..=n {
                let z = self.domain.z.0 + self.domain.z_span() * j as f64 / n as f64;
                let p = self.map(y, z);
                if !p.is_finite() {
                    return Err(domain(format!(
                        "graph map is not finite at ({y}, {z})"
                    )));
                }
                column.push((z, p));
            }
            for a in 0..column.len() {
                for b in a + 1..column.len() {
                    let (za, pa) = column[a];
                    let (zb, pb) = column[b];
                    if za != zb && dist_inf(pa, pb) <= 1e-9 * scale {
                        return Err(domain(format!(
                            "graph map identifies ({y}, {za}) with ({y}, {zb})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn phi(&self, y: f64, z: f64) -> f64 {
        (self.phi)(y, z)
    }

    /// Graph map `Phi(y, z) = (phi, y, z + 2 phi y)`.
    pub fn map(&self, y: f64, z: f64) -> HPoint {
        let p = self.phi(y, z);
        HPoint::new(p, y, z + 2.0 * p * y)
    }

    /// Slope `w` at a point: the caller-supplied field when present,
    /// otherwise a central difference quotient of `phi` along the integral
    /// curve through the point (one-sided at the domain boundary).
    pub fn slope(&self, y: f64, z: f64) -> Result<f64> {
        if let Some(w) = &self.slope {
            return Ok(w(y, z));
        }
        if !self.domain.contains(y, z) {
            return Err(domain(format!("({y}, {z}) lies outside the field domain")));
        }
        let h = 1e-5 * self.domain.y_span().max(1e-6);
        let fwd = self.short_arc(y, z, h);
        let bwd = self.short_arc(y, z, -h);
        match (fwd, bwd) {
            (Some((tf, pf)), Some((tb, pb))) => Ok((pf - pb) / (tf - tb)),
            (Some((tf, pf)), None) => Ok((pf - self.phi(y, z)) / tf),
            (None, Some((tb, pb))) => Ok((self.phi(y, z) - pb) / -tb),
            (None, None) => Err(domain(format!(
                "no room to measure a slope at ({y}, {z})"
            ))),
        }
    }

    /// Endpoint of a 16-step Euler arc, as `(reached offset, phi there)`;
    /// `None` when the arc exits the domain immediately.
    fn short_arc(&self, y: f64, z: f64, h: f64) -> Option<(f64, f64)> {
        let steps = 16;
        let dt = h / steps as f64;
        let mut t = 0.0;
        let mut zc = z;
        for _ in 0..steps {
            let zn = zc - 4.0 * self.phi(y + t, zc) * dt;
            if !self.domain.contains(y + t + dt, zn) {
                break;
            }
            t += dt;
            zc = zn;
        }
        if t == 0.0 {
            None
        } else {
            Some((t, self.phi(y + t, zc)))
        }
    }
}

/// Euler solution of `z' = -4 phi(y0 + t, z)` on a uniform offset grid,
/// with the half-step companion and the field values along the way.
#[derive(Clone, Debug)]
pub struct IntegralCurve {
    pub y0: f64,
    /// Signed offsets from the start, `t[0] = 0`.
    pub t: Vec<f64>,
    pub z: Vec<f64>,
    /// Companion run at half the step, sampled on the same grid.
    pub z_half: Vec<f64>,
    /// Field along the coarse curve.
    pub phi: Vec<f64>,
    /// Largest gap between the two runs; for a first-order scheme the gap
    /// is about half the coarse error.
    pub error_est: f64,
    /// The march stopped early because the next node left the domain.
    pub exited: bool,
}

impl IntegralCurve {
    pub fn end(&self) -> (f64, f64) {
        (
            self.y0 + self.t.last().copied().unwrap(),
            self.z.last().copied().unwrap(),
        )
    }

    /// Largest deviation between difference quotients of `phi` along the
    /// curve and the slope field at cell midpoints.
    pub fn quotient_defect(&self, graph: &IntrinsicGraph) -> Result<f64> {
        if self.t.len() < 2 {
            return Err(domain("a quotient needs at least two nodes"));
        }
        let mut worst = 0.0f64;
        for i in 0..self.t.len() - 1 {
            let dt = self.t[i + 1] - self.t[i];
            let quot = (self.phi[i + 1] - self.phi[i]) / dt;
            let tm = 0.5 * (self.t[i] + self.t[i + 1]);
            let zm = 0.5 * (self.z[i] + self.z[i + 1]);
            let w = graph.slope(self.y0 + tm, zm)?;
            worst = worst.max((quot - w).abs());
        }
        Ok(worst)
    }
}

/// Integrates the horizontal field from `start` over the signed offset range
/// `[0, span]`.  `step` is a request: it is refined so the final node lands
/// on `span` exactly.  A boundary exit truncates the curve and sets the
/// flag instead of failing.
pub fn integrate_wphi(
    graph: &IntrinsicGraph,
    start: (f64, f64),
    step: f64,
    span: f64,
) -> Result<IntegralCurve> {
    if !(step.is_finite() && step > 0.0) {
        return Err(domain(format!("step {step} must be positive")));
    }
    if !span.is_finite() {
        return Err(domain(format!("span {span} is not finite")));
    }
    let (y0, z0) = start;
    if !graph.domain().contains(y0, z0) {
        return Err(domain(format!(
            "start ({y0}, {z0}) lies outside the field domain"
        )));
    }
    let n = (span.abs() / step).ceil().max(1.0) as usize;
    let dt = span / n as f64;
    let mut t = vec![0.0];
    let mut z = vec![z0];
    let mut z_half = vec![z0];
    let mut phi = vec![graph.phi(y0, z0)];
    let mut exited = false;
    let mut zc = z0;
    let mut zf = z0;
    for i in 0..n {
        if span == 0.0 {
            break;
        }
        let ti = i as f64 * dt;
        let zc_next = zc - 4.0 * graph.phi(y0 + ti, zc) * dt;
        let zf_mid = zf - 4.0 * graph.phi(y0 + ti, zf) * (dt / 2.0);
        let zf_next = zf_mid - 4.0 * graph.phi(y0 + ti + dt / 2.0, zf_mid) * (dt / 2.0);
        let tn = (i + 1) as f64 * dt;
        if !graph.domain().contains(y0 + tn, zc_next)
            || !graph.domain().contains(y0 + tn, zf_next)
            || !graph.domain().contains(y0 + ti + dt / 2.0, zf_mid)
        {
            exited = true;
            break;
        }
        zc = zc_next;
        zf = zf_next;
        t.push(tn);
        z.push(zc);
        z_half.push(zf);
        phi.push(graph.phi(y0 + tn, zc));
    }
    let error_est = z
        .iter()
        .zip(&z_half)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(IntegralCurve { y0, t, z, z_half, phi, error_est, exited })
}

/// Ordered family of integral curves advanced in lockstep.
#[derive(Clone, Debug)]
pub struct Flow {
    pub y0: f64,
    pub t: Vec<f64>,
    pub seeds: Vec<f64>,
    /// One z-track per seed, in seed order.
    pub curves: Vec<Vec<f64>>,
    /// Largest displacement the lattice reordering ever applied; zero in
    /// the Lipschitz regime, where Euler preserves order by itself.
    pub max_correction: f64,
    pub exited: bool,
}

impl Flow {
    /// z-values of every curve at time node `j`, in seed order.
    pub fn cross_section(&self, j: usize) -> Vec<f64> {
        self.curves.iter().map(|c| c[j]).collect()
    }
}

/// Non-penetration flow by extremal selection: seeds interpolate the given
/// z-range linearly, every curve takes the same Euler step, and each step
/// ends with the lattice operations `(z_i, z_j) -> (min, max)` applied
/// until the family is ordered again (its monotone rearrangement).  The
/// family is one admissible ordered selection, not a certified maximal
/// chain.
pub fn extremal_flow(
    graph: &IntrinsicGraph,
    z_range: (f64, f64),
    curves: usize,
    step: f64,
    span: f64,
) -> Result<Flow> {
    if curves < 2 {
        return Err(domain("an ordered family needs at least two curves"));
    }
    if !(z_range.0.is_finite() && z_range.1.is_finite() && z_range.0 <= z_range.1) {
        return Err(domain(format!(
            "seed range [{}, {}] is not an interval",
            z_range.0, z_range.1
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(domain(format!("step {step} must be positive")));
    }
    if !(span.is_finite() && span != 0.0) {
        return Err(domain(format!("span {span} must be nonzero")));
    }
    let y0 = graph.domain().y.0;
    let seeds: Vec<f64> = (0..curves)
        .map(|i| {
            z_range.0 + (z_range.1 - z_range.0) * i as f64 / (curves - 1) as f64
        })
        .collect();
    for &s in &seeds {
        if !graph.domain().contains(y0, s) {
            return Err(domain(format!("seed ({y0}, {s}) lies outside the domain")));
        }
    }
    let n = (span.abs() / step).ceil().max(1.0) as usize;
    let dt = span / n as f64;
    let mut t = vec![0.0];
    let mut tracks: Vec<Vec<f64>> = seeds.iter().map(|&s| vec![s]).collect();
    let mut current = seeds.clone();
    let mut max_correction = 0.0f64;
    let mut exited = false;
    'march: for i in 0..n {
        let ti = i as f64 * dt;
        let tn = (i + 1) as f64 * dt;
        let mut next: Vec<f64> = current
            .iter()
            .map(|&zc| zc - 4.0 * graph.phi(y0 + ti, zc) * dt)
            .collect();
        for &zn in &next {
            if !graph.domain().contains(y0 + tn, zn) {
                exited = true;
                break 'march;
            }
        }
        let mut sorted = next.clone();
        sorted.sort_by(f64::total_cmp);
        for (a, b) in next.iter().zip(&sorted) {
            max_correction = max_correction.max((a - b).abs());
        }
        next = sorted;
        t.push(tn);
        for (track, &zn) in tracks.iter_mut().zip(&next) {
            track.push(zn);
        }
        current = next;
    }
    for j in 0..t.len() {
        for pair in tracks.windows(2) {
            if pair[0][j] > pair[1][j] {
                return Err(domain(format!(
                    "internal: flow ordering violated at node {j} after selection"
                )));
            }
        }
    }
    Ok(Flow { y0, t, seeds, curves: tracks, max_correction, exited })
}

/// Graph quasi-distance
/// `d_g(A, B) = max(|dy| sqrt(1 + w(A)^2), |z_2 - zhat_1|^(1/2))`, where
/// `zhat_1` is carried from `A` to the ordinate of `B` along an integral
/// curve.  Not symmetric in its arguments.
pub fn dg_distance(graph: &IntrinsicGraph, a: (f64, f64), b: (f64, f64)) -> Result<f64> {
    for (y, z) in [a, b] {
        if !graph.domain().contains(y, z) {
            return Err(domain(format!("({y}, {z}) lies outside the field domain")));
        }
    }
    let w = graph.slope(a.0, a.1)?;
    let dy = b.0 - a.0;
    let zhat = if dy == 0.0 {
        a.1
    } else {
        let curve = integrate_wphi(graph, a, dy.abs() / 4096.0, dy)?;
        if curve.exited {
            return Err(domain(format!(
                "integral curve from ({}, {}) leaves the domain before ordinate {}",
                a.0, a.1, b.0
            )));
        }
        curve.end().1
    };
    Ok((dy.abs() * (1.0 + w * w).sqrt()).max((b.1 - zhat).abs().sqrt()))
}

/// Spherical measure of the image of a region: midpoint quadrature of the
/// density `2 sqrt(1 + w^2)` on an `ny x nz` cell grid.
pub fn surface_measure(
    graph: &IntrinsicGraph,
    region: Rect,
    grid: (usize, usize),
) -> Result<f64> {
    let (ny, nz) = grid;
    if ny == 0 || nz == 0 {
        return Err(domain("quadrature needs at least one cell per axis"));
    }
    if !graph.domain().covers(&region) {
        return Err(domain("quadrature region leaves the field domain"));
    }
    if region.area() == 0.0 {
        return Ok(0.0);
    }
    let dy = region.y_span() / ny as f64;
    let dz = region.z_span() / nz as f64;
    let mut total = 0.0;
    for i in 0..ny {
        let y = region.y.0 + (i as f64 + 0.5) * dy;
        for j in 0..nz {
            let z = region.z.0 + (j as f64 + 0.5) * dz;
            let w = graph.slope(y, z)?;
            total += 2.0 * (1.0 + w * w).sqrt() * dy * dz;
        }
    }
    Ok(total)
}
