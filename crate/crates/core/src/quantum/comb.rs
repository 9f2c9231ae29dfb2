//! Resonant Floquet eigenstates as truncated combs of position eigenstates.
//!
//! At resonance (`ωT = 2πk`) the Floquet operator reduces to the squeeze
//! kick `U_k|x⟩ = e^{−α/2}|e^{−α}x⟩`. Its improper eigenstates are geometric
//! ladders
//!
//! ```text
//! |x₀, μ⟩ = (2π)^{−1/2} Σₙ e^{iμn} e^{−αn/2} |e^{−αn} x₀⟩,
//! ```
//!
//! with `x₀` in a fundamental interval `[1, e^{|α|}) ∪ [−e^{|α|}, −1)`, plus
//! the state `|x = 0⟩`. A comb keeps the entries `n ∈ [−N, N]`; states are
//! paired by ladder index, so no position grid is involved.
//!
//! Ladder amplitudes and positions are evaluated from error-free products
//! `μ·n` and `α·n` so that entries of shifted ladders agree to a few ulps
//! regardless of `n`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Interior entries whose relative mismatch exceeds this count as
/// uncancelled in [`eigen_residual`].
pub const CANCELLATION_TOL: f64 = 1e-13;

/// A weighted position eigenstate `a·|x⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionEntry {
    pub position: f64,
    pub amplitude: Complex64,
}

impl PositionEntry {
    /// `U_k(a|x⟩) = a·e^{−α/2}|e^{−α}x⟩`.
    pub fn kick(&self, alpha: f64) -> PositionEntry {
        PositionEntry {
            position: (-alpha).exp() * self.position,
            amplitude: self.amplitude * (-0.5 * alpha).exp(),
        }
    }
}

/// Entry of a comb: ladder index, position and amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombEntry {
    pub index: i64,
    pub position: f64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaCombState {
    pub x0: f64,
    pub mu: f64,
    pub alpha: f64,
    pub half_width: usize,
    /// Sorted by ladder index.
    pub entries: Vec<CombEntry>,
    /// The fixed state `|x = 0⟩`.
    pub origin: bool,
}

/// `a·b` as an unevaluated sum `hi + lo`.
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    (hi, a.mul_add(b, -hi))
}

/// `exp(hi + lo)` for small `lo`.
fn exp_split((hi, lo): (f64, f64)) -> f64 {
    hi.exp() * (1.0 + lo)
}

/// `e^{i(hi + lo)}` for small `lo`.
fn cis_split((hi, lo): (f64, f64)) -> Complex64 {
    let (s, c) = hi.sin_cos();
    Complex64::new(c, s) * Complex64::new(1.0, lo)
}

/// `e^{−αn} x₀`.
pub fn ladder_position(x0: f64, alpha: f64, n: i64) -> f64 {
    x0 * exp_split(two_product(-alpha, n as f64))
}

/// `e^{iμn} e^{−αn/2} / √(2π)`.
pub fn ladder_amplitude(mu: f64, alpha: f64, n: i64) -> Complex64 {
    let modulus = exp_split(two_product(-0.5 * alpha, n as f64));
    cis_split(two_product(mu, n as f64)) * (modulus * FRAC_1_SQRT_2PI)
}

/// True when `x0` lies in `[1, e^{|α|}) ∪ [−e^{|α|}, −1)`.
pub fn in_fundamental_interval(x0: f64, alpha: f64) -> bool {
    let top = alpha.abs().exp();
    (1.0..top).contains(&x0) || (-top..-1.0).contains(&x0)
}

/// Maps a nonzero position onto its ladder representative in the
/// fundamental interval.
///
/// Returns `(x₀, n)` with `ladder_position(x₀, α, n) ≈ x`.
pub fn normalize_label(x: f64, alpha: f64) -> Result<(f64, i64)> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::invalid("alpha", "must be finite and nonzero"));
    }
    if x == 0.0 || !x.is_finite() {
        return Err(Error::invalid("x0", "position 0 is its own orbit"));
    }
    let a = alpha.abs();
    let mut k = (x.abs().ln() / a).floor() as i64;
    let mut x0 = x * (-a * k as f64).exp();
    // floor of a rounded logarithm can be off by one
    if x0.abs() < 1.0 {
        k -= 1;
        x0 = x * (-a * k as f64).exp();
    } else if x0.abs() >= a.exp() {
        k += 1;
        x0 = x * (-a * k as f64).exp();
    }
    // x = x₀ e^{a k} = x₀ e^{−α n}
    let n = if alpha > 0.0 { -k } else { k };
    Ok((x0, n))
}

/// Comb `|x₀, μ⟩` truncated to `n ∈ [−N, N]`.
pub fn build_resonant_eigenstate(x0: f64, mu: f64, alpha: f64, half_width: usize) -> Result<DeltaCombState> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::invalid("alpha", "must be finite and nonzero"));
    }
    if half_width == 0 {
        return Err(Error::invalid("N", "truncation half-width must be at least 1"));
    }
    if !mu.is_finite() {
        return Err(Error::invalid("mu", "must be finite"));
    }
    if !in_fundamental_interval(x0, alpha) {
        return Err(Error::invalid(
            "x0",
            format!(
                "{x0} lies outside [1, e^|α|) ∪ [-e^|α|, -1); use normalize_label to map it onto its ladder"
            ),
        ));
    }
    let n = half_width as i64;
    let entries = (-n..=n)
        .map(|i| CombEntry {
            index: i,
            position: ladder_position(x0, alpha, i),
            amplitude: ladder_amplitude(mu, alpha, i),
        })
        .collect();
    Ok(DeltaCombState {
        x0,
        mu: mu.rem_euclid(TAU),
        alpha,
        half_width,
        entries,
        origin: false,
    })
}

impl DeltaCombState {
    /// The eigenstate `|x = 0⟩` sitting on the unstable fixed point.
    pub fn origin(alpha: f64) -> Self {
        DeltaCombState {
            x0: 0.0,
            mu: 0.0,
            alpha,
            half_width: 0,
            entries: vec![CombEntry {
                index: 0,
                position: 0.0,
                amplitude: Complex64::new(1.0, 0.0),
            }],
            origin: true,
        }
    }

    /// Applies `U_k` with strength `kick`.
    ///
    /// A kick equal to `±α` shifts the ladder by one rung; positions are
    /// re-evaluated from the ladder so that they stay exactly comparable by
    /// index. Any other strength leaves the ladder and is rejected.
    pub fn kick(&self, kick: f64) -> Result<DeltaCombState> {
        let shift = if kick == 0.0 || self.origin {
            0
        } else if kick == self.alpha {
            1
        } else if kick == -self.alpha {
            -1
        } else {
            return Err(Error::CombMismatch(format!(
                "kick strength {kick} does not preserve the ladder of α = {}",
                self.alpha
            )));
        };
        let factor = (-0.5 * kick).exp();
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let index = e.index + shift;
                CombEntry {
                    index,
                    position: if self.origin {
                        0.0
                    } else {
                        ladder_position(self.x0, self.alpha, index)
                    },
                    amplitude: e.amplitude * factor,
                }
            })
            .collect();
        Ok(DeltaCombState {
            entries,
            ..self.clone()
        })
    }

    pub fn entry(&self, index: i64) -> Option<&CombEntry> {
        self.entries
            .binary_search_by_key(&index, |e| e.index)
            .ok()
            .map(|i| &self.entries[i])
    }
}

/// `F|ψ⟩ − e^{−iμ}|ψ⟩` for a resonant comb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResidual {
    /// Sum of `|amplitude|²` over the surviving entries.
    pub residual_norm_sq: f64,
    /// Entries present in only one of `F|ψ⟩` and `e^{−iμ}|ψ⟩`.
    pub boundary_terms: usize,
    /// Interior entries whose relative mismatch exceeds [`CANCELLATION_TOL`].
    pub uncancelled_interior: usize,
    /// Largest `|Δa| / |a|` over interior entries.
    pub interior_max_rel: f64,
    /// Surviving entries, by index.
    pub residual: Vec<CombEntry>,
}

pub fn eigen_residual(comb: &DeltaCombState) -> Result<EigenResidual> {
    if comb.origin {
        return Err(Error::CombMismatch("the origin state has no quasi phase".into()));
    }
    let kicked = comb.kick(comb.alpha)?;
    let phase = Complex64::from_polar(1.0, -comb.mu);
    let mut residual = Vec::new();
    let mut interior_max_rel: f64 = 0.0;
    let mut uncancelled = 0;
    let mut boundary_terms = 0;
    let lo = comb.entries[0].index;
    let hi = kicked.entries[kicked.entries.len() - 1].index;
    for index in lo..=hi {
        let lhs = kicked.entry(index);
        let rhs = comb.entry(index);
        match (lhs, rhs) {
            (Some(l), Some(r)) => {
                let target = r.amplitude * phase;
                let diff = l.amplitude - target;
                let rel = diff.norm() / target.norm();
                interior_max_rel = interior_max_rel.max(rel);
                if rel > CANCELLATION_TOL {
                    uncancelled += 1;
                    residual.push(CombEntry {
                        amplitude: diff,
                        ..*l
                    });
                }
            }
            (Some(l), None) => {
                boundary_terms += 1;
                residual.push(*l);
            }
            (None, Some(r)) => {
                boundary_terms += 1;
                residual.push(CombEntry {
                    amplitude: -r.amplitude * phase,
                    ..*r
                });
            }
            (None, None) => {}
        }
    }
    Ok(EigenResidual {
        residual_norm_sq: residual.iter().map(|e| e.amplitude.norm_sqr()).sum(),
        boundary_terms,
        uncancelled_interior: uncancelled,
        interior_max_rel,
        residual,
    })
}

/// Moduli of the two boundary residual entries, `(n = −N, n = N + 1)`:
/// `e^{αN/2}/√(2π)` and `e^{−α(N+1)/2}/√(2π)`.
pub fn expected_boundary_moduli(alpha: f64, half_width: usize) -> (f64, f64) {
    let n = half_width as f64;
    (
        (0.5 * alpha * n).exp() * FRAC_1_SQRT_2PI,
        (-0.5 * alpha * (n + 1.0)).exp() * FRAC_1_SQRT_2PI,
    )
}

/// Formal overlap `⟨c₁|c₂⟩` of two combs.
///
/// Only entries at identical positions pair up. Each pairing carries the
/// Jacobian `e^{αn}` of `δ(e^{−αn}(x₀ − x₀′)) = e^{αn} δ(x₀ − x₀′)`, with the
/// label delta counted as one, so equal labels give the Dirichlet kernel
/// `Σₙ e^{i(μ′−μ)n}/(2π)`.
pub fn comb_overlap(c1: &DeltaCombState, c2: &DeltaCombState) -> Result<Complex64> {
    if c1.alpha != c2.alpha {
        return Err(Error::CombMismatch(format!("α differs: {} vs {}", c1.alpha, c2.alpha)));
    }
    if c1.half_width != c2.half_width {
        return Err(Error::CombMismatch(format!(
            "truncation differs: {} vs {}",
            c1.half_width, c2.half_width
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for e1 in &c1.entries {
        if let Some(e2) = c2.entry(e1.index) {
            if e1.position == e2.position {
                let jacobian = if c1.origin {
                    1.0
                } else {
                    exp_split(two_product(c1.alpha, e1.index as f64))
                };
                sum += e1.amplitude.conj() * e2.amplitude * jacobian;
            }
        }
    }
    Ok(sum)
}

/// `D_N(δ) = Σ_{n=−N}^{N} e^{iδn} / (2π)`, evaluated in closed form.
pub fn dirichlet_kernel(delta: f64, half_width: usize) -> f64 {
    let m = 2 * half_width + 1;
    let half = 0.5 * delta;
    if half.sin().abs() < 1e-3 {
        let n = half_width as i64;
        return (-n..=n).map(|k| (delta * k as f64).cos()).sum::<f64>() / TAU;
    }
    (m as f64 * half).sin() / (half.sin() * TAU)
}

/// Overlap matrix of combs with labels `x0s × μ_k`, `μ_k = 2πk/mu_count`.
/// Rows and columns run over `x0` first, then `μ`.
pub fn overlap_matrix(x0s: &[f64], mu_count: usize, alpha: f64, half_width: usize) -> Result<Vec<Vec<Complex64>>> {
    let mut combs = Vec::with_capacity(x0s.len() * mu_count);
    for &x0 in x0s {
        for k in 0..mu_count {
            let mu = TAU * k as f64 / mu_count as f64;
            combs.push(build_resonant_eigenstate(x0, mu, alpha, half_width)?);
        }
    }
    combs
        .iter()
        .map(|a| combs.iter().map(|b| comb_overlap(a, b)).collect())
        .collect()
}

/// `μ` grid spacing at which neighbouring combs are exactly orthogonal.
pub fn dirichlet_zero_spacing(half_width: usize) -> f64 {
    2.0 * PI / (2 * half_width + 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_entry_kick() {
        let e = PositionEntry {
            position: 1.0,
            amplitude: Complex64::new(1.0, 0.0),
        };
        let k = e.kick(1.0);
        assert_abs_diff_eq!(k.position, 0.367879, epsilon = 1e-6);
        assert_abs_diff_eq!(k.amplitude.re, 0.606531, epsilon = 1e-6);
        assert_eq!(e.kick(0.0), e);
        let back = k.kick(-1.0);
        assert_abs_diff_eq!(back.position, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(back.amplitude.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn comb_layout() {
        let c = build_resonant_eigenstate(1.0, 0.0, 1.0, 1).unwrap();
        let e = 1.0_f64.exp();
        let pos: Vec<f64> = c.entries.iter().map(|e| e.position).collect();
        assert_abs_diff_eq!(pos[0], e, epsilon = 1e-15);
        assert_eq!(pos[1], 1.0);
        assert_abs_diff_eq!(pos[2], 1.0 / e, epsilon = 1e-16);
        let moduli: Vec<f64> = c.entries.iter().map(|e| e.amplitude.norm()).collect();
        for (m, want) in moduli.iter().zip([e.sqrt(), 1.0, 1.0 / e.sqrt()]) {
            assert_abs_diff_eq!(*m, want * FRAC_1_SQRT_2PI, epsilon = 1e-15);
        }
    }

    #[test]
    fn comb_amplitudes_follow_formula() {
        let (mu, alpha) = (2.3, 0.7);
        let c = build_resonant_eigenstate(-1.5, mu, alpha, 6).unwrap();
        for e in &c.entries {
            let n = e.index as f64;
            let want = Complex64::from_polar((-alpha * n / 2.0).exp() * FRAC_1_SQRT_2PI, mu * n);
            assert!((e.amplitude - want).norm() < 1e-14 * want.norm());
        }
        assert!(c.entries.windows(2).all(|w| w[1].position > w[0].position));
    }

    #[test]
    fn labels_outside_fundamental_interval_are_rejected() {
        assert!(build_resonant_eigenstate(0.5, 0.0, 1.0, 3).is_err());
        assert!(build_resonant_eigenstate(3.0, 0.0, 1.0, 3).is_err());
        assert!(build_resonant_eigenstate(-0.9, 0.0, 1.0, 3).is_err());
        assert!(build_resonant_eigenstate(1.5, 0.0, 0.0, 3).is_err());
        // negative α uses |α|
        assert!(build_resonant_eigenstate(2.0, 0.0, -1.0, 3).is_ok());
    }

    #[test]
    fn normalize_label_recovers_ladder() {
        for (x, alpha) in [(17.3, 1.0), (0.013, 0.4), (-5.0, 2.0), (0.3, -0.6)] {
            let (x0, n) = normalize_label(x, alpha).unwrap();
            assert!(in_fundamental_interval(x0, alpha), "{x} -> {x0}");
            assert_abs_diff_eq!(ladder_position(x0, alpha, n), x, epsilon = 1e-13 * x.abs());
        }
    }

    #[test]
    fn kick_round_trip_and_origin() {
        let c = build_resonant_eigenstate(1.3, 0.4, 0.9, 4).unwrap();
        assert_eq!(c.kick(0.0).unwrap(), c);
        let back = c.kick(0.9).unwrap().kick(-0.9).unwrap();
        for (a, b) in back.entries.iter().zip(&c.entries) {
            assert_eq!(a.index, b.index);
            assert_eq!(a.position, b.position);
            assert!((a.amplitude - b.amplitude).norm() <= 1e-15 * b.amplitude.norm());
        }
        assert!(c.kick(0.5).is_err());

        let o = DeltaCombState::origin(0.9).kick(0.9).unwrap();
        assert_eq!(o.entries[0].position, 0.0);
        assert_abs_diff_eq!(o.entries[0].amplitude.re, (-0.45_f64).exp(), epsilon = 1e-16);
    }

    #[test]
    fn ladder_kick_composition() {
        let n = 5;
        let c = build_resonant_eigenstate(1.2, 0.0, 1.0, n).unwrap();
        let mut k = c.clone();
        for _ in 0..(2 * n + 1) {
            k = k.kick(1.0).unwrap();
        }
        let first = k.entries[0];
        assert_eq!(first.index, n as i64 + 1);
        assert_eq!(first.position, ladder_position(1.2, 1.0, n as i64 + 1));
    }

    #[test]
    fn residual_structure() {
        let c = build_resonant_eigenstate(1.0, 1.234, 1.0, 10).unwrap();
        let r = eigen_residual(&c).unwrap();
        assert_eq!(r.boundary_terms, 2);
        assert_eq!(r.uncancelled_interior, 0);
        assert!(r.interior_max_rel < 1e-15);
        let (lo, hi) = expected_boundary_moduli(1.0, 10);
        assert_eq!(r.residual[0].index, -10);
        assert_eq!(r.residual[1].index, 11);
        assert_abs_diff_eq!(r.residual[0].amplitude.norm(), lo, epsilon = 1e-12 * lo);
        assert_abs_diff_eq!(r.residual[1].amplitude.norm(), hi, epsilon = 1e-12);
        assert_abs_diff_eq!(r.residual_norm_sq, lo * lo + hi * hi, epsilon = 1e-12 * lo * lo);
    }

    #[test]
    fn overlaps() {
        let (alpha, n) = (1.0, 6);
        let a = build_resonant_eigenstate(1.2, 0.3, alpha, n).unwrap();
        let b = build_resonant_eigenstate(2.1, 0.3, alpha, n).unwrap();
        assert_eq!(comb_overlap(&a, &b).unwrap(), Complex64::new(0.0, 0.0));
        let self_overlap = comb_overlap(&a, &a).unwrap();
        assert_abs_diff_eq!(self_overlap.re, (2 * n + 1) as f64 / TAU, epsilon = 1e-13);
        assert_abs_diff_eq!(self_overlap.im, 0.0, epsilon = 1e-13);
        let c = build_resonant_eigenstate(1.2, 0.3 + dirichlet_zero_spacing(n), alpha, n).unwrap();
        assert!(comb_overlap(&a, &c).unwrap().norm() < 1e-13);
        let d = build_resonant_eigenstate(1.2, 0.3, alpha, n + 1).unwrap();
        assert!(comb_overlap(&a, &d).is_err());
        let o = DeltaCombState::origin(alpha);
        let o2 = DeltaCombState { half_width: n, ..o.clone() };
        assert_eq!(comb_overlap(&o2, &a).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn dirichlet_closed_form_matches_sum() {
        for n in [1usize, 4, 9] {
            for delta in [0.0, 0.3, 1.7, TAU] {
                let sum: Complex64 = (-(n as i64)..=n as i64)
                    .map(|k| Complex64::from_polar(1.0, delta * k as f64))
                    .sum::<Complex64>()
                    / TAU;
                assert_abs_diff_eq!(dirichlet_kernel(delta, n), sum.re, epsilon = 1e-13);
            }
        }
    }
}
