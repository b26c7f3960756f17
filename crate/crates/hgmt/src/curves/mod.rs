//! Curve generators: lacunary Fourier pairs, Koch-type polylines, and
//! vertical/rough lifts into the Heisenberg group.

pub mod koch;
pub mod lacunary;
pub mod lift;

pub use koch::{koch_generate, KochSpec};
pub use lacunary::{
    lacunary_eval, lacunary_eval_complex, lacunary_limit, lacunary_remainder_bound, LacunaryEval,
    LacunarySpec, LimitPrediction,
};
pub use lift::{
    rough_lift, vertical_lift, RoughLiftOptions, RoughLiftReport, RoughnessModulus,
};
