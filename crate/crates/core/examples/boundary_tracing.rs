//! Locates Mathieu tongue edges along l at fixed drive, comparing the slice
//! product with the RK4 integrator, then traces tongue boundaries in 2D.

use paramres::chart::{tongue_boundaries, Axis, FamilyKind, SweepSpec};
use paramres::modulation::{monodromy_converged, rk4_oracle, trace_boundary, FrequencyProfile};

fn main() -> paramres::error::Result<()> {
    let slices = |l: f64| Ok(monodromy_converged(&FrequencyProfile::mathieu(l, 0.5, 2.0)?, 1.0, 1e-10)?.result);
    let rk4 = |l: f64| rk4_oracle(&FrequencyProfile::mathieu(l, 0.5, 2.0)?, 1.0, 4000);
    let a = trace_boundary(slices, (-0.5, 5.0), 220, 1e-12)?;
    let b = trace_boundary(rk4, (-0.5, 5.0), 220, 1e-12)?;
    for (p, q) in a.iter().zip(&b) {
        println!("l = {:.12} ({:?})  rk4 differs by {:.1e}", p.param, p.boundary, (p.param - q.param).abs());
    }

    let spec = SweepSpec::new(
        FamilyKind::Mathieu,
        Axis::new("l", 0.0, 4.5, 40),
        Axis::new("delta_l", 0.05, 1.5, 20),
    );
    for line in tongue_boundaries(&spec, 1e-12)? {
        let (first, last) = (line.points[0], line.points[line.points.len() - 1]);
        println!(
            "{:?} polyline, {} points, ({:.3}, {:.3}) to ({:.3}, {:.3})",
            line.sign,
            line.points.len(),
            first.param1,
            first.param2,
            last.param1,
            last.param2
        );
    }
    Ok(())
}
