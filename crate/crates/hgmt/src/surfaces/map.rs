//! Scalar pairs on the group with horizontal differentials, and a Newton
//! iteration whose steps stay inside horizontal planes.
//!
//! A pair `F = (f, g)` carries evaluators for the horizontal derivatives
//! `Xf, Yf, Xg, Yg` along the left-invariant frame `X = d/dx + 2y d/dz`,
//! `Y = d/dy - 2x d/dz`.  The update `A -> A * (u, v, 0)` moves along the
//! horizontal plane through `A`, so the third coordinate is dragged by the
//! group law rather than corrected separately.

use crate::error::{domain, Result};
use crate::group::HPoint;

/// Closed axis-aligned box in the group's coordinates.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct Box3 {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub z: (f64, f64),
}

impl Box3 {
    pub fn new(x: (f64, f64), y: (f64, f64), z: (f64, f64)) -> Result<Self> {
        for (lo, hi) in [x, y, z] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(domain(format!("box edge [{lo}, {hi}] is not an interval")));
            }
        }
        Ok(Box3 { x, y, z })
    }

    pub fn unit() -> Self {
        Box3 { x: (0.0, 1.0), y: (0.0, 1.0), z: (0.0, 1.0) }
    }

    pub fn volume(&self) -> f64 {
        (self.x.1 - self.x.0) * (self.y.1 - self.y.0) * (self.z.1 - self.z.0)
    }

    pub fn center(&self) -> HPoint {
        HPoint::new(
            0.5 * (self.x.0 + self.x.1),
            0.5 * (self.y.0 + self.y.1),
            0.5 * (self.z.0 + self.z.1),
        )
    }

    pub fn contains(&self, p: HPoint) -> bool {
        self.x.0 <= p.x
            && p.x <= self.x.1
            && self.y.0 <= p.y
            && p.y <= self.y.1
            && self.z.0 <= p.z
            && p.z <= self.z.1
    }

    /// Planar containment with a relative tolerance; level-set points are
    /// classified by their (x, y) footprint while z is marched separately.
    pub fn contains_planar(&self, p: HPoint, tol: f64) -> bool {
        let sx = (self.x.1 - self.x.0).abs().max(1.0) * tol;
        let sy = (self.y.1 - self.y.0).abs().max(1.0) * tol;
        self.x.0 - sx <= p.x && p.x <= self.x.1 + sx && self.y.0 - sy <= p.y && p.y <= self.y.1 + sy
    }
}

type HField = Box<dyn Fn(HPoint) -> f64 + Send + Sync>;

/// `F = (f, g)` with caller-supplied horizontal derivative evaluators.
pub struct ScalarMapPair {
    f: HField,
    g: HField,
    xf: HField,
    yf: HField,
    xg: HField,
    yg: HField,
}

impl ScalarMapPair {
    pub fn new(
        f: impl Fn(HPoint) -> f64 + Send + Sync + 'static,
        g: impl Fn(HPoint) -> f64 + Send + Sync + 'static,
        xf: impl Fn(HPoint) -> f64 + Send + Sync + 'static,
        yf: impl Fn(HPoint) -> f64 + Send + Sync + 'static,
        xg: impl Fn(HPoint) -> f64 + Send + Sync + 'static,
        yg: impl Fn(HPoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarMapPair {
            f: Box::new(f),
            g: Box::new(g),
            xf: Box::new(xf),
            yf: Box::new(yf),
            xg: Box::new(xg),
            yg: Box::new(yg),
        }
    }

    /// `F = (x, y)`: the horizontal differential is the identity.
    pub fn coordinate_pair() -> Self {
        Self::new(|p| p.x, |p| p.y, |_| 1.0, |_| 0.0, |_| 0.0, |_| 1.0)
    }

    /// `F = (x + y, y - x)`: a rotation-and-scale with `det = 2`.
    pub fn rotated_pair() -> Self {
        Self::new(
            |p| p.x + p.y,
            |p| p.y - p.x,
            |_| 1.0,
            |_| 1.0,
            |_| -1.0,
            |_| 1.0,
        )
    }

    pub fn eval(&self, p: HPoint) -> [f64; 2] {
        [(self.f)(p), (self.g)(p)]
    }

    /// Rows `[Xf, Yf]` and `[Xg, Yg]`.
    pub fn horizontal_jacobian(&self, p: HPoint) -> [[f64; 2]; 2] {
        [[(self.xf)(p), (self.yf)(p)], [(self.xg)(p), (self.yg)(p)]]
    }

    pub fn det_dh(&self, p: HPoint) -> f64 {
        let j = self.horizontal_jacobian(p);
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    /// Smallest `|det|` over an `n^3` midpoint sample of the box; the
    /// nondegeneracy precondition of the coarea comparison.
    pub fn min_abs_det(&self, b: &Box3, n: usize) -> f64 {
        let mut worst = f64::INFINITY;
        for i in 0..n {
            let x = b.x.0 + (b.x.1 - b.x.0) * (i as f64 + 0.5) / n as f64;
            for j in 0..n {
                let y = b.y.0 + (b.y.1 - b.y.0) * (j as f64 + 0.5) / n as f64;
                for k in 0..n {
                    let z = b.z.0 + (b.z.1 - b.z.0) * (k as f64 + 0.5) / n as f64;
                    worst = worst.min(self.det_dh(HPoint::new(x, y, z)).abs());
                }
            }
        }
        worst
    }
}

/// Outcome of the horizontal Newton iteration.  Non-convergence is reported
/// in-band (`converged: false` with the residual history) so that level-set
/// tracking can skip a fiber without unwinding; genuinely malformed inputs
/// and singular differentials are errors.
#[derive(Clone, Debug)]
pub struct NewtonTrace {
    pub point: HPoint,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual before each step, ending with the final residual.
    pub history: Vec<f64>,
}

/// Newton iteration on horizontal planes: solve
/// `d_hF(A) (u, v) = target - F(A)` and move to `A * (u, v, 0)`.
pub fn horizontal_newton(
    pair: &ScalarMapPair,
    target: [f64; 2],
    start: HPoint,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonTrace> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(domain(format!("tolerance {tol} must be positive")));
    }
    if !(start.is_finite() && target[0].is_finite() && target[1].is_finite()) {
        return Err(domain("newton start and target must be finite"));
    }
    let mut a = start;
    let mut history = Vec::new();
    for it in 0..=max_iter {
        let val = pair.eval(a);
        let r = [target[0] - val[0], target[1] - val[1]];
        let res = r[0].hypot(r[1]);
        history.push(res);
        if res <= tol {
            return Ok(NewtonTrace {
                point: a,
                residual: res,
                iterations: it,
                converged: true,
                history,
            });
        }
        if it == max_iter {
            break;
        }
        let j = pair.horizontal_jacobian(a);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !det.is_finite() || det.abs() <= 1e-14 * jacobian_scale(&j) {
            return Err(domain(format!(
                "singular horizontal differential at ({}, {}, {})",
                a.x, a.y, a.z
            )));
        }
        let u = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let v = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        a = a.mul(HPoint::new(u, v, 0.0));
        if !a.is_finite() {
            return Err(domain("newton iterate left the finite range"));
        }
    }
    Ok(NewtonTrace {
        point: a,
        residual: history.last().copied().unwrap(),
        iterations: max_iter,
        converged: false,
        history,
    })
}

fn jacobian_scale(j: &[[f64; 2]; 2]) -> f64 {
    j.iter()
        .flatten()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_pair_solves_in_one_step() {
        let pair = ScalarMapPair::coordinate_pair();
        let out =
            horizontal_newton(&pair, [0.7, -0.4], HPoint::ORIGIN, 1e-12, 8).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert!((out.point.x - 0.7).abs() <= 1e-15);
        assert!((out.point.y + 0.4).abs() <= 1e-15);
        // One horizontal step from the origin stays in the plane z = 0.
        assert_eq!(out.point.z, 0.0);
    }

    #[test]
    fn rotated_pair_reaches_the_hand_solution() {
        // f = x + y, g = y - x: J = [[1, 1], [-1, 1]], so target (1, 1)
        // from the origin needs (u, v) = (0, 1).
        let pair = ScalarMapPair::rotated_pair();
        let out = horizontal_newton(&pair, [1.0, 1.0], HPoint::ORIGIN, 1e-10, 16).unwrap();
        assert!(out.converged);
        assert!(out.residual < 1e-10);
        assert!(out.point.x.abs() <= 1e-12);
        assert!((out.point.y - 1.0).abs() <= 1e-12);
        assert!(out.point.z.abs() <= 1e-12);
    }

    #[test]
    fn exact_start_returns_immediately() {
        let pair = ScalarMapPair::rotated_pair();
        let start = HPoint::new(0.3, 0.5, -1.2);
        let target = pair.eval(start);
        let out = horizontal_newton(&pair, target, start, 1e-12, 8).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.history.len(), 1);
        assert_eq!(out.point.x, start.x);
        assert_eq!(out.point.z, start.z);
    }

    #[test]
    fn nonlinear_pair_converges_quadratically() {
        // f = x + 0.2 sin(y), g = y: Xf = 1, Yf = 0.2 cos(y).
        let pair = ScalarMapPair::new(
            |p| p.x + 0.2 * p.y.sin(),
            |p| p.y,
            |_| 1.0,
            |p| 0.2 * p.y.cos(),
            |_| 0.0,
            |_| 1.0,
        );
        let out = horizontal_newton(&pair, [0.4, 0.9], HPoint::ORIGIN, 1e-12, 16).unwrap();
        assert!(out.converged, "history {:?}", out.history);
        assert!(out.iterations <= 5);
        let val = pair.eval(out.point);
        assert!((val[0] - 0.4).abs() <= 1e-12 && (val[1] - 0.9).abs() <= 1e-12);
    }

    #[test]
    fn wrong_derivatives_report_non_convergence_with_history() {
        // Claimed derivative has the wrong sign, so steps move away.
        let pair = ScalarMapPair::new(
            |p| p.x,
            |p| p.y,
            |_| -1.0,
            |_| 0.0,
            |_| 0.0,
            |_| 1.0,
        );
        let out = horizontal_newton(&pair, [1.0, 0.0], HPoint::ORIGIN, 1e-12, 6).unwrap();
        assert!(!out.converged);
        assert_eq!(out.history.len(), 7);
        assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn singular_differential_is_a_domain_error() {
        let pair = ScalarMapPair::new(
            |p| p.x,
            |p| p.x,
            |_| 1.0,
            |_| 0.0,
            |_| 1.0,
            |_| 0.0,
        );
        let err = horizontal_newton(&pair, [1.0, 2.0], HPoint::ORIGIN, 1e-12, 8).unwrap_err();
        assert!(format!("{err}").contains("singular"));
        assert!(pair.min_abs_det(&Box3::unit(), 4) <= 1e-14);
    }

    #[test]
    fn rotated_pair_determinant_is_two_everywhere() {
        let pair = ScalarMapPair::rotated_pair();
        let b = Box3::new((0.0, 1.0), (0.0, 1.0), (2.5, 3.5)).unwrap();
        assert!((pair.min_abs_det(&b, 6) - 2.0).abs() <= 1e-15);
        assert!((pair.det_dh(b.center()) - 2.0).abs() <= 1e-15);
    }
}
