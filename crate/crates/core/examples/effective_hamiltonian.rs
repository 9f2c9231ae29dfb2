//! Extracts the effective quadratic generator of one period and checks that
//! exponentiating it rebuilds the monodromy matrix.

use paramres::classical::{monodromy_kicked, KickedParams};
use paramres::heff::{expanded_kicked_coefficients, heff_from_monodromy};

fn main() -> paramres::error::Result<()> {
    for (omega_t, alpha) in [(1.0, 0.3), (0.4, 1.2), (3.0, 0.2), (2.5, 1.5)] {
        let p = KickedParams::dimensionless(1.0, omega_t, alpha)?;
        let g = heff_from_monodromy(&monodromy_kicked(&p), p.period, p.hbar)?;
        println!(
            "wT={omega_t:<4} alpha={alpha:<4} {:<10} u={:+.6} v={:+.6} w={:+.6} reflected={} err={:.1e}",
            g.regime.name(),
            g.u,
            g.v,
            g.w,
            g.reflection_factor,
            g.reconstruction_error()
        );
    }

    // the expansion doubles the cross term
    let p = KickedParams::dimensionless(1.0, 0.05, 0.05)?;
    let g = heff_from_monodromy(&monodromy_kicked(&p), p.period, p.hbar)?;
    println!("exact    {:?}", [g.u, g.v, g.w]);
    println!("expanded {:?}", expanded_kicked_coefficients(&p)?);
    Ok(())
}
