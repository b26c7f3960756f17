//! Scratch probe freezing the bisection-dimension configuration.

use hgmt::curves::lacunary::{lacunary_eval, LacunarySpec};
use hgmt::curves::lift::vertical_lift;
use hgmt::measure::{bisect_dimension, QuasiMetricCurve};
use hgmt::{uniform_grid, PlanarPath};

fn holder_path(k: u32, amplitude: f64) -> PlanarPath {
    let spec = LacunarySpec::holder_pair(0.75, (k as usize).saturating_sub(3), amplitude).unwrap();
    let grid = uniform_grid(k);
    let out = lacunary_eval(&spec, &grid).unwrap();
    let xy: Vec<[f64; 2]> = out
        .f
        .values()
        .iter()
        .zip(out.g.values())
        .map(|(a, b)| [*a, *b])
        .collect();
    PlanarPath::new(grid, xy).unwrap()
}

fn main() {
    for (k, amp, depth) in [
        (12u32, 0.25f64, 9u32),
        (13, 0.25, 9),
        (13, 0.25, 10),
        (12, 0.2, 8),
        (12, 0.2, 9),
        (13, 0.3, 9),
    ] {
        let lift = vertical_lift(&holder_path(k, amp), 0.0).unwrap();
        let c = QuasiMetricCurve::heis(&lift);
        let b = bisect_dimension(&c, depth).unwrap();
        println!(
            "mesh {k} amp {amp} depth {depth}: dim {:.4} ahlfors [{:.3}, {:.3}]",
            b.dimension, b.ahlfors_min, b.ahlfors_max
        );
    }
}
