//! Intrinsic-graph surfaces, characteristic flows, and coarea checks.

pub mod coarea;
pub mod graph;
pub mod map;

pub use coarea::{coarea_check, BoxCoarea, CoareaOptions, CoareaReport};
pub use graph::{
    dg_distance, extremal_flow, integrate_wphi, surface_measure, Flow, IntegralCurve,
    IntrinsicGraph, Rect,
};
pub use map::{horizontal_newton, Box3, NewtonTrace, ScalarMapPair};
