//! Computational geometric measure theory on the first Heisenberg group.
//!
//! The crate provides the group and its parabolic metric geometry
//! ([`group`]), sampled paths with exact serialization ([`path`],
//! [`serialize`]), Stieltjes and sewing integration with Levy areas
//! ([`stieltjes`]), curve generators and lifts ([`curves`]), Hausdorff
//! measure and dimension estimators ([`measure`]), flatness profiles with
//! dyadic parametrization ([`reifenberg`]), and intrinsic-graph surfaces
//! with a coarea consistency check ([`surfaces`]).

pub mod curves;
pub mod error;
pub mod group;
pub mod measure;
pub mod num;
pub mod path;
pub mod reifenberg;
pub mod serialize;
pub mod stieltjes;
pub mod surfaces;

pub use error::{Error, Result};
pub use group::{contact_increment, dist_inf, kappa_inf, planar_dist, vertical_project, HPoint};
pub use path::{uniform_grid, HeisPath, PlanarPath, SampledPath, ScalarPath};
