//! Propagates a coherent state through elliptic and hyperbolic maps and fits
//! the variance growth rate.

use std::f64::consts::TAU;

use paramres::classical::{classify, monodromy_kicked, KickedParams, DEFAULT_BAND};
use paramres::quantum::gaussian::{variance_growth_exponent, GaussianState};

fn main() -> paramres::error::Result<()> {
    for (omega_t, alpha) in [(2.0, 0.5), (TAU, 0.8), (0.3, 1.5)] {
        let m = monodromy_kicked(&KickedParams::dimensionless(1.0, omega_t, alpha)?);
        let c = classify(&m, DEFAULT_BAND);
        let mut s = GaussianState::vacuum([1.0, 0.0], 1.0);
        let mut peak: f64 = 0.0;
        for _ in 0..40 {
            s = s.step(&m);
            peak = peak.max(s.max_eigenvalue());
        }
        println!(
            "wT={omega_t:.3} alpha={alpha} {:<10} exponent {:.6}  peak variance {:.3e}  det {:.15}",
            c.tag(),
            c.exponent(),
            peak,
            s.det_covariance()
        );
        if c.exponent() > 0.0 && c.tag().starts_with("hyperbolic") {
            println!("  fitted growth {:.6}", variance_growth_exponent(&m, 30)?);
        }
    }
    Ok(())
}
