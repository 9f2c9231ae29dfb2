//! Builds a truncated delta-comb eigenstate of the resonant kicked map, shows
//! that only the two ends fail to cancel, and checks comb orthogonality.

use std::f64::consts::PI;

use paramres::quantum::comb::{build_resonant_eigenstate, comb_overlap, eigen_residual, expected_boundary_moduli};

fn main() -> paramres::error::Result<()> {
    let (alpha, n) = (0.6, 8);
    let comb = build_resonant_eigenstate(1.2, 0.4, alpha, n)?;
    for e in comb.entries.iter().step_by(4) {
        println!("n = {:>3}  x = {:>12.6}  |c| = {:.6}", e.index, e.position, e.amplitude.norm());
    }

    let r = eigen_residual(&comb)?;
    let (lo, hi) = expected_boundary_moduli(alpha, n);
    println!(
        "boundary terms {}, interior max rel {:.1e}, moduli {:.6} / {:.6} (expected {:.6} / {:.6})",
        r.boundary_terms,
        r.interior_max_rel,
        r.residual[0].amplitude.norm(),
        r.residual[1].amplitude.norm(),
        lo,
        hi
    );

    let other = build_resonant_eigenstate(1.2, 0.4 + 2.0 * PI / (2 * n + 1) as f64, alpha, n)?;
    println!("overlap with the next Dirichlet zero: {:.1e}", comb_overlap(&comb, &other)?.norm());
    Ok(())
}
