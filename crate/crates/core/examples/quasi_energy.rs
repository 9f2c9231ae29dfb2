//! Quasi-energy ladders of elliptic Floquet operators at rational and
//! irrational rotation numbers, and degenerate partners on the marginal line.

use std::f64::consts::TAU;

use paramres::quantum::spectrum::{elliptic_spectrum, marginal_partners, Rationality};

fn main() -> paramres::error::Result<()> {
    for omega_t in [TAU / 3.0, TAU * 2.0 / 5.0, TAU * (5f64.sqrt() - 1.0) / 2.0] {
        let s = elliptic_spectrum(omega_t, 12, 1e-10)?;
        let kind = match s.rationality {
            Rationality::Rational { r, s } => format!("{r}/{s}"),
            Rationality::Irrational => "irrational".into(),
        };
        println!(
            "wT/2pi = {:<10.6} {kind:<10} {} distinct of {}, classes {:?}",
            omega_t / TAU,
            s.distinct.len(),
            s.values.len(),
            s.classes
        );
    }

    for p in marginal_partners(0.7, 1.0, 1.0, 4)? {
        println!("k = {}  P = ±{:.9}", p.k, p.p_plus);
    }
    Ok(())
}
