//! Quasi-energy spectra of the Floquet operator in the three regimes.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{classify, Monodromy2, Regime, StabilityClass};
use crate::error::{Error, Result};

/// Default denominator cap for rational detection.
pub const DEFAULT_DENOMINATOR_CAP: u64 = 1_000_000;
/// Default tolerance for rational detection.
pub const DEFAULT_RATIONAL_TOL: f64 = 1e-9;

/// Outcome of the continued-fraction test on `x = ΩT/2π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rationality {
    /// `x ≈ r/s` in lowest terms.
    Rational { r: u64, s: u64 },
    Irrational,
}

/// Finds the first continued-fraction convergent `r/s` of `x ≥ 0` with
/// `s ≤ cap` and `|s·x − r| ≤ tol`.
///
/// `|s·x − r|` is the drift, in turns, of `ε_{n+s}` against `εₙ`; an
/// irrational `x` keeps it above `1/(√5·s)`, so a cap well below
/// `1/tol` never misreads a badly approximable number as rational.
pub fn detect_rational(x: f64, cap: u64, tol: f64) -> Rationality {
    if !x.is_finite() || x < 0.0 {
        return Rationality::Irrational;
    }
    let (mut p_prev, mut p) = (1u128, x.floor() as u128);
    let (mut q_prev, mut q) = (0u128, 1u128);
    let mut frac = x - x.floor();
    loop {
        if q as u64 > cap {
            return Rationality::Irrational;
        }
        if (q as f64 * x - p as f64).abs() <= tol {
            return Rationality::Rational {
                r: p as u64,
                s: q as u64,
            };
        }
        if frac == 0.0 {
            return Rationality::Irrational;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        if a > 1e15 {
            return Rationality::Irrational;
        }
        let a = a as u128;
        let (pn, qn) = (a * p + p_prev, a * q + q_prev);
        p_prev = p;
        q_prev = q;
        p = pn;
        q = qn;
    }
}

/// Quasi energies of an elliptic Floquet operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticSpectrum {
    pub omega_t: f64,
    /// `εₙ = ΩT(n + ½) mod 2π` for `n = 0..=n_max`.
    pub values: Vec<f64>,
    pub rationality: Rationality,
    /// Distinct quasi energies, one per class, in ascending order.
    pub distinct: Vec<f64>,
    /// Indices `n` sharing each distinct value (`n mod s` classes in the
    /// rational case, singletons otherwise); aligned with `distinct`.
    pub classes: Vec<Vec<usize>>,
    /// Largest gap between neighbouring values on the circle.
    pub max_gap: f64,
}

/// Quasi-energy spectrum, tagged by regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum QuasiEnergySpectrum {
    Elliptic(EllipticSpectrum),
    /// Continuous spectrum covering `[0, 2π)` with countable degeneracy.
    Continuous {
        regime: Regime,
        reflected: bool,
        /// Degenerate partners of a reference state, where available.
        partners: Vec<MarginalPartner>,
    },
}

/// `ΩT(n + ½) mod 2π`.
pub fn quasi_energy(omega_t: f64, n: usize) -> f64 {
    (omega_t * (n as f64 + 0.5)).rem_euclid(TAU)
}

pub fn elliptic_spectrum(omega_t: f64, n_max: usize, tol: f64) -> Result<EllipticSpectrum> {
    elliptic_spectrum_with_cap(omega_t, n_max, tol, DEFAULT_DENOMINATOR_CAP)
}

pub fn elliptic_spectrum_with_cap(omega_t: f64, n_max: usize, tol: f64, cap: u64) -> Result<EllipticSpectrum> {
    if !(omega_t > 0.0 && omega_t.is_finite()) {
        return Err(Error::invalid("omega_t", format!("must be positive, got {omega_t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let values: Vec<f64> = (0..=n_max).map(|n| quasi_energy(omega_t, n)).collect();
    let rationality = detect_rational(omega_t / TAU, cap, tol);
    let mut groups: Vec<(f64, Vec<usize>)> = match rationality {
        Rationality::Rational { s, .. } => {
            let s = s as usize;
            (0..s.min(n_max + 1))
                .map(|nu| {
                    let members: Vec<usize> = (nu..=n_max).step_by(s).collect();
                    (values[nu], members)
                })
                .collect()
        }
        Rationality::Irrational => values.iter().enumerate().map(|(n, &e)| (e, vec![n])).collect(),
    };
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let max_gap = circular_max_gap(&values);
    let (distinct, classes) = groups.into_iter().unzip();
    Ok(EllipticSpectrum {
        omega_t,
        values,
        rationality,
        distinct,
        classes,
        max_gap,
    })
}

fn circular_max_gap(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let wrap = v[0] + TAU - v[v.len() - 1];
    v.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

/// Momentum pair `±P` degenerate with a reference `P₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalPartner {
    pub k: u64,
    pub p_plus: f64,
    pub p_minus: f64,
}

/// `exp(−i P² T / 2ħ)`.
pub fn marginal_floquet_phase(p: f64, period: f64, hbar: f64) -> Complex64 {
    Complex64::from_polar(1.0, -(p * p * period / (2.0 * hbar)).rem_euclid(TAU))
}

/// `±√(P₀² + (2ħ/T)·2πk)`.
pub fn marginal_partner(p0: f64, period: f64, hbar: f64, k: u64) -> MarginalPartner {
    let p = (p0 * p0 + 2.0 * hbar / period * TAU * k as f64).sqrt();
    MarginalPartner {
        k,
        p_plus: p,
        p_minus: -p,
    }
}

/// Partners for `k = 1..=k_max`, each checked to share the Floquet phase of
/// `P₀` to `1e-12`.
pub fn marginal_partners(p0: f64, period: f64, hbar: f64, k_max: u64) -> Result<Vec<MarginalPartner>> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::invalid("period", format!("must be positive, got {period}")));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::invalid("hbar", format!("must be positive, got {hbar}")));
    }
    let reference = marginal_floquet_phase(p0, period, hbar);
    let mut out = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let partner = marginal_partner(p0, period, hbar, k);
        for p in [partner.p_plus, partner.p_minus] {
            let d = (marginal_floquet_phase(p, period, hbar) - reference).norm();
            if d > 1e-12 {
                return Err(Error::Indeterminate(format!(
                    "partner k = {k} misses the reference phase by {d:e}"
                )));
            }
        }
        out.push(partner);
    }
    Ok(out)
}

/// Options for [`quasi_energy_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub band: f64,
    pub n_max: usize,
    pub tol: f64,
    pub cap: u64,
    /// Reference momentum for the sampled partners in the continuous case.
    pub p0: f64,
    pub k_max: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            band: crate::classical::DEFAULT_BAND,
            n_max: 16,
            tol: DEFAULT_RATIONAL_TOL,
            cap: DEFAULT_DENOMINATOR_CAP,
            p0: 0.0,
            k_max: 4,
        }
    }
}

/// Spectrum of the Floquet operator whose classical map is `m`.
///
/// The elliptic case projects the oscillator ladder with the rotation angle
/// of `m`. Marginal and hyperbolic maps give a continuous spectrum; partners
/// are sampled from the free-particle normal form with period `period`.
pub fn quasi_energy_spectrum(
    m: &Monodromy2,
    period: f64,
    hbar: f64,
    opts: &SpectrumOptions,
) -> Result<QuasiEnergySpectrum> {
    match classify(m, opts.band) {
        StabilityClass::Elliptic { omega } => Ok(QuasiEnergySpectrum::Elliptic(
            elliptic_spectrum_with_cap(omega, opts.n_max, opts.tol, opts.cap)?,
        )),
        StabilityClass::Hyperbolic { reflected, .. } => Ok(QuasiEnergySpectrum::Continuous {
            regime: Regime::Hyperbolic,
            reflected,
            partners: marginal_partners(opts.p0, period, hbar, opts.k_max)?,
        }),
        StabilityClass::Marginal { sign, .. } => Ok(QuasiEnergySpectrum::Continuous {
            regime: Regime::Marginal,
            reflected: sign == crate::classical::TraceSign::Minus,
            partners: marginal_partners(opts.p0, period, hbar, opts.k_max)?,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn third_turn_has_three_classes() {
        let s = elliptic_spectrum(TAU / 3.0, 8, DEFAULT_RATIONAL_TOL).unwrap();
        assert_eq!(s.rationality, Rationality::Rational { r: 1, s: 3 });
        assert_eq!(s.distinct.len(), 3);
        for (got, want) in s.distinct.iter().zip([PI / 3.0, PI, 5.0 * PI / 3.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_eq!(s.classes, vec![vec![0, 3, 6], vec![1, 4, 7], vec![2, 5, 8]]);
    }

    #[test]
    fn full_turn_is_single_value() {
        let s = elliptic_spectrum(TAU, 5, DEFAULT_RATIONAL_TOL).unwrap();
        assert_eq!(s.rationality, Rationality::Rational { r: 1, s: 1 });
        assert_eq!(s.distinct.len(), 1);
        assert!(s.values.iter().all(|&e| (e - PI).abs() < 1e-12));
    }

    #[test]
    fn golden_angle_is_irrational_and_dense() {
        let golden = (5.0_f64.sqrt() - 1.0) / 2.0;
        let mut last = f64::INFINITY;
        for n_max in [10, 20, 40, 80, 160, 320] {
            let s = elliptic_spectrum(golden * TAU, n_max, DEFAULT_RATIONAL_TOL).unwrap();
            assert_eq!(s.rationality, Rationality::Irrational);
            assert_eq!(s.distinct.len(), n_max + 1);
            assert!(s.max_gap < last);
            last = s.max_gap;
        }
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(detect_rational(0.4, 1000, 1e-12), Rationality::Rational { r: 2, s: 5 });
        assert_eq!(detect_rational(3.25, 1000, 1e-12), Rationality::Rational { r: 13, s: 4 });
        assert_eq!(detect_rational(PI, 100, 1e-9), Rationality::Irrational);
        assert_eq!(
            detect_rational(355.0 / 113.0, 1000, 1e-9),
            Rationality::Rational { r: 355, s: 113 }
        );
    }

    #[test]
    fn partners() {
        let p = marginal_partner(0.0, TAU, 1.0, 1);
        assert_abs_diff_eq!(p.p_plus, 2.0_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.p_minus, -(2.0_f64.sqrt()), epsilon = 1e-15);
        let p = marginal_partner(0.7, 1.3, 1.0, 0);
        assert_eq!((p.p_plus, p.p_minus), (0.7, -0.7));
        let all = marginal_partners(0.37, 2.1, 0.8, 50).unwrap();
        assert_eq!(all.len(), 50);
        assert!(marginal_partners(0.0, 0.0, 1.0, 3).is_err());
    }
}
