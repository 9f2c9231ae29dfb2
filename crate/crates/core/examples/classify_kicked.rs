//! Classifies the kicked oscillator across a few kick strengths at fixed ωT.

use paramres::classical::{classify, monodromy_kicked, quadratic_form, KickedParams, DEFAULT_BAND};

fn main() -> paramres::error::Result<()> {
    let omega_t = 2.0;
    println!("{:>6} {:>22} {:>12} {:>10}", "alpha", "class", "exponent", "tr M");
    for alpha in [0.0, 0.5, 1.0, 1.3, 1.6, 2.5] {
        let m = monodromy_kicked(&KickedParams::dimensionless(1.0, omega_t, alpha)?);
        let c = classify(&m, DEFAULT_BAND);
        println!("{alpha:>6.2} {:>22} {:>12.6} {:>10.5}", c.tag(), c.exponent(), m.trace());
    }

    let m = monodromy_kicked(&KickedParams::dimensionless(1.0, 0.3, 0.4)?);
    let q = quadratic_form(&m);
    let mut z = [0.2, -0.1];
    let q0 = q.eval(z);
    for _ in 0..10 {
        z = m.matrix().apply(z);
    }
    println!("invariant after 10 periods: {:.3e} -> {:.3e}", q0, q.eval(z));
    Ok(())
}
