//! The first Heisenberg group with its homogeneous structure: group law,
//! dilations, the box-type homogeneous norm, and vertical cones.
//!
//! Points are coordinates `(x, y, z)` with the product
//! `(x, y, z) * (x', y', z') = (x + x', y + y', z + z' + 2(x'y - xy'))`.
//! The distance used everywhere in this crate is the left-invariant one
//! induced by the norm `max(sqrt(x^2 + y^2), |z|^(1/2))`, which scales
//! linearly under the dilations `(x, y, z) -> (tx, ty, t^2 z)`.

use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HPoint {
    pub const ORIGIN: HPoint = HPoint { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        HPoint { x, y, z }
    }

    /// Constructor for data crossing an external boundary; rejects non-finite
    /// coordinates so the infallible group operations stay total inside.
    pub fn checked(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(domain(format!("non-finite point ({x}, {y}, {z})")));
        }
        Ok(HPoint { x, y, z })
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Group product.
    pub fn mul(self, rhs: HPoint) -> HPoint {
        HPoint {
            x: self.x + rhs.x,
            y: self.y + rhs.y,
            z: self.z + rhs.z + 2.0 * (rhs.x * self.y - self.x * rhs.y),
        }
    }

    /// Group product with the domain check required at external call sites.
    pub fn checked_mul(self, rhs: HPoint) -> Result<HPoint> {
        if !self.is_finite() || !rhs.is_finite() {
            return Err(domain("group product of a non-finite point"));
        }
        Ok(self.mul(rhs))
    }

    /// Group inverse; coordinatewise negation.
    pub fn inv(self) -> HPoint {
        HPoint { x: -self.x, y: -self.y, z: -self.z }
    }

    /// Left difference `self^{-1} * b`.  Its planar part is the coordinate
    /// difference and its vertical part is the contact increment of the
    /// ordered pair `(self, b)`.
    pub fn rel(self, b: HPoint) -> HPoint {
        self.inv().mul(b)
    }

    /// Anisotropic dilation; `t` must be positive.
    pub fn dilate(self, t: f64) -> HPoint {
        assert!(t.is_finite() && t > 0.0, "dilation factor must be positive");
        HPoint { x: t * self.x, y: t * self.y, z: t * t * self.z }
    }

    pub fn checked_dilate(self, t: f64) -> Result<HPoint> {
        if !self.is_finite() {
            return Err(domain("dilation of a non-finite point"));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(domain(format!("dilation factor {t} must be positive and finite")));
        }
        Ok(self.dilate(t))
    }

    /// Projection to the horizontal plane.
    pub fn proj(self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Homogeneous norm `max(sqrt(x^2 + y^2), |z|^(1/2))`.
    pub fn norm_inf(self) -> f64 {
        self.x.hypot(self.y).max(self.z.abs().sqrt())
    }
}

/// Left-invariant homogeneous distance.
pub fn dist_inf(a: HPoint, b: HPoint) -> f64 {
    a.rel(b).norm_inf()
}

/// Euclidean distance between horizontal projections.  Equals the
/// homogeneous distance from `b` to the vertical line through `a`.
pub fn planar_dist(a: HPoint, b: HPoint) -> f64 {
    (b.x - a.x).hypot(b.y - a.y)
}

/// Contact increment `z` of the left difference `a^{-1} b`:
/// `z_b - z_a - 2 (x_b y_a - x_a y_b)`.
pub fn contact_increment(a: HPoint, b: HPoint) -> f64 {
    a.rel(b).z
}

/// Nearest point to `b` on the vertical line through `a`, reached by sliding
/// `a` vertically by the contact increment.
pub fn vertical_project(a: HPoint, b: HPoint) -> HPoint {
    a.mul(HPoint::new(0.0, 0.0, contact_increment(a, b)))
}

/// Squared homogeneous distance, the contact quasi-metric used by the
/// measure-theoretic estimators.
pub fn kappa_inf(a: HPoint, b: HPoint) -> f64 {
    let r = a.rel(b);
    (r.x * r.x + r.y * r.y).max(r.z.abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeSign {
    /// Points whose contact increment from the apex is nonnegative.
    Above,
    /// Points whose contact increment from the apex is nonpositive.
    Below,
    Both,
}

/// A truncated vertical cone: points within homogeneous distance `radius` of
/// the apex whose planar offset is at most `opening` times that distance,
/// on the side selected by `sign`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConeSpec {
    pub apex: HPoint,
    pub opening: f64,
    pub radius: f64,
    pub sign: ConeSign,
}

impl ConeSpec {
    pub fn new(apex: HPoint, opening: f64, radius: f64, sign: ConeSign) -> Result<Self> {
        if !apex.is_finite() {
            return Err(domain("cone apex must be finite"));
        }
        if !(opening.is_finite() && 0.0 < opening && opening < 1.0) {
            return Err(domain(format!("cone opening {opening} must lie in (0, 1)")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(domain(format!("cone radius {radius} must be positive")));
        }
        Ok(ConeSpec { apex, opening, radius, sign })
    }
}

/// Cone membership: distance strictly below the radius, planar offset within
/// the opening fraction of the distance, and the sign constraint on the
/// contact increment.
pub fn in_vertical_cone(cone: &ConeSpec, p: HPoint) -> bool {
    let d = dist_inf(cone.apex, p);
    if !(d < cone.radius) {
        return false;
    }
    let r = cone.apex.rel(p);
    if r.x.hypot(r.y) > cone.opening * d {
        return false;
    }
    match cone.sign {
        ConeSign::Above => r.z >= 0.0,
        ConeSign::Below => r.z <= 0.0,
        ConeSign::Both => true,
    }
}

/// Diameter bound for the overlap of an upward cone at `o` and a downward
/// cone at an apex vertically above it: `2 d(o, apex) (e^2 + sqrt(1 + e^4))`
/// for opening `e`.
pub fn cone_overlap_diameter_bound(apex_dist: f64, opening: f64) -> f64 {
    let e2 = opening * opening;
    2.0 * apex_dist * (e2 + (1.0 + e2 * e2).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::seeded_rng;
    use rand::Rng;

    #[test]
    fn product_of_unit_horizontal_steps() {
        let p = HPoint::new(1.0, 0.0, 0.0).mul(HPoint::new(0.0, 1.0, 0.0));
        assert_eq!(p, HPoint::new(1.0, 1.0, -2.0));
    }

    #[test]
    fn product_with_inverse_is_identity() {
        let p = HPoint::new(0.3, -1.2, 5.0);
        let e = p.mul(p.inv());
        assert_eq!(e, HPoint::ORIGIN);
    }

    #[test]
    fn non_finite_input_is_a_domain_error() {
        let p = HPoint::new(f64::NAN, 0.0, 0.0);
        assert!(p.checked_mul(HPoint::ORIGIN).is_err());
        assert!(HPoint::checked(0.0, f64::INFINITY, 0.0).is_err());
        assert!(HPoint::ORIGIN.checked_dilate(-1.0).is_err());
        assert!(HPoint::ORIGIN.checked_dilate(0.0).is_err());
    }

    #[test]
    fn dilation_doubles_plane_and_quadruples_height() {
        assert_eq!(HPoint::new(1.0, 1.0, 1.0).dilate(2.0), HPoint::new(2.0, 2.0, 4.0));
        let p = HPoint::new(0.5, -2.0, 3.0);
        let composed = p.dilate(2.0).dilate(3.0);
        assert_eq!(composed, p.dilate(6.0));
    }

    #[test]
    fn distance_oracles() {
        let o = HPoint::ORIGIN;
        assert_eq!(dist_inf(o, HPoint::new(3.0, 4.0, 0.0)), 5.0);
        assert_eq!(dist_inf(o, HPoint::new(0.0, 0.0, 9.0)), 3.0);
        // Along a vertical line the distance is the square root of the height
        // gap regardless of the base point.
        let a = HPoint::new(2.0, -1.0, 0.25);
        let b = a.mul(HPoint::new(0.0, 0.0, 0.16));
        assert!((dist_inf(a, b) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn vertical_projection_is_closest_on_axis() {
        let a = HPoint::new(0.1, 0.2, 0.3);
        let b = HPoint::new(1.1, -0.7, 2.0);
        let proj = vertical_project(a, b);
        assert!((dist_inf(b, proj) - planar_dist(a, b)).abs() < 1e-14);
        // Sliding the projection along the axis only increases the distance.
        for dz in [-0.5, -0.1, 0.1, 0.5] {
            let q = proj.mul(HPoint::new(0.0, 0.0, dz));
            assert!(dist_inf(b, q) >= dist_inf(b, proj) - 1e-14);
        }
    }

    #[test]
    fn cone_membership_splits_by_sign() {
        let apex = HPoint::new(1.0, 2.0, -1.0);
        let up = ConeSpec::new(apex, 0.5, 10.0, ConeSign::Above).unwrap();
        let down = ConeSpec::new(apex, 0.5, 10.0, ConeSign::Below).unwrap();
        let above = apex.mul(HPoint::new(0.0, 0.0, 1.0));
        let below = apex.mul(HPoint::new(0.0, 0.0, -1.0));
        assert!(in_vertical_cone(&up, above) && !in_vertical_cone(&up, below));
        assert!(in_vertical_cone(&down, below) && !in_vertical_cone(&down, above));
        // A point with planar offset beyond the opening fraction is outside.
        let sideways = apex.mul(HPoint::new(0.9, 0.0, 1.0));
        assert!(!in_vertical_cone(&up, sideways));
        // The radius cut is strict.
        let far = apex.mul(HPoint::new(0.0, 0.0, 100.0));
        assert!(!in_vertical_cone(&up, far));
    }

    #[test]
    fn cone_spec_rejects_bad_parameters() {
        assert!(ConeSpec::new(HPoint::ORIGIN, 0.0, 1.0, ConeSign::Both).is_err());
        assert!(ConeSpec::new(HPoint::ORIGIN, 1.0, 1.0, ConeSign::Both).is_err());
        assert!(ConeSpec::new(HPoint::ORIGIN, 0.5, 0.0, ConeSign::Both).is_err());
    }

    #[test]
    fn opposed_cone_overlap_diameter_bound_holds_on_samples() {
        // Apex pair: origin looking up, a point at distance 1 on the vertical
        // axis looking down.  The overlap is sampled uniformly from a box that
        // contains it; the sampled diameter must respect the closed-form
        // bound, and the apexes themselves witness that it is at least 1.
        let mut rng = seeded_rng(0x636f6e65);
        let o = HPoint::ORIGIN;
        for opening in [0.1, 0.3, 0.5] {
            let a = HPoint::new(0.0, 0.0, 1.0);
            let up = ConeSpec::new(o, opening, 50.0, ConeSign::Above).unwrap();
            let down = ConeSpec::new(a, opening, 50.0, ConeSign::Below).unwrap();
            let mut kept = vec![o, a];
            for _ in 0..100_000 {
                let p = HPoint::new(
                    rng.gen_range(-opening..opening),
                    rng.gen_range(-opening..opening),
                    rng.gen_range(0.0..1.0),
                );
                if kept.len() < 1500 && in_vertical_cone(&up, p) && in_vertical_cone(&down, p) {
                    kept.push(p);
                }
            }
            assert!(kept.len() > 100, "sampler found too few overlap points");
            let mut diam: f64 = 0.0;
            for i in 0..kept.len() {
                for j in (i + 1)..kept.len() {
                    diam = diam.max(dist_inf(kept[i], kept[j]));
                }
            }
            let bound = cone_overlap_diameter_bound(1.0, opening);
            assert!(diam >= 1.0);
            assert!(
                diam <= bound * (1.0 + 1e-9),
                "opening {opening}: sampled diameter {diam} exceeds bound {bound}"
            );
        }
    }
}
