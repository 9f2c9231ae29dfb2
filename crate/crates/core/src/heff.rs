//! Effective Hamiltonian of a one-period map.
//!
//! A symplectic 2×2 matrix `M` with non-negative trace is the exponential of
//! the trace-free generator
//!
//! ```text
//! G = Δ · (M − ½Tr M · I),     Δ = arcsinh(D)/D,     D² = (½Tr M)² − 1,
//! ```
//!
//! which is the classical shadow of the quadratic operator
//! `−(i/ħ)·H_eff·T = a p̂² + b x̂² + (c/2)(x̂p̂ + p̂x̂)`. Writing
//! `H_eff = u p² + v x² + w xp`, the generator of the flow over one period is
//! `G = T · [[w, 2u], [−2v, −w]]`.
//!
//! Maps with negative trace are not exponentials of a real generator when
//! `Tr M < −2`, and the principal branch of `Δ` picks the wrong rotation
//! angle for `−2 < Tr M < 0`. Both are handled by splitting off a factor
//! `−I` and recording it in [`EffectiveGenerator::reflection_factor`]; the
//! factor contributes a phase `π` per period.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::classical::{
    quadratic_form, KickedParams, Monodromy2, QuadraticFormCoeffs, Regime, DEFAULT_BAND,
};
use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// Below this `|D²|` the series of `Δ` is used.
pub const DELTA_SERIES_THRESHOLD: f64 = 1e-4;

/// `D²` together with `Δ(D²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaValue {
    pub dsq: f64,
    pub delta: f64,
}

/// `Δ = arcsinh(D)/D` as an even function of `D`.
///
/// For `D² < 0` this is `arcsin(√−D²)/√−D²`, and near zero the series
/// `1 − D²/6 + 3D⁴/40` is used.
pub fn delta_of_dsq(dsq: f64) -> Result<f64> {
    if !dsq.is_finite() || dsq <= -1.0 {
        return Err(Error::invalid("dsq", format!("must lie in (-1, inf), got {dsq}")));
    }
    Ok(delta_unchecked(dsq))
}

fn delta_unchecked(dsq: f64) -> f64 {
    if dsq.abs() < DELTA_SERIES_THRESHOLD {
        delta_series(dsq)
    } else {
        delta_direct(dsq)
    }
}

pub(crate) fn delta_series(dsq: f64) -> f64 {
    1.0 - dsq / 6.0 + 3.0 * dsq * dsq / 40.0
}

pub(crate) fn delta_direct(dsq: f64) -> f64 {
    if dsq > 0.0 {
        let d = dsq.sqrt();
        d.asinh() / d
    } else {
        let d = (-dsq).sqrt();
        d.asin() / d
    }
}

/// Quadratic generator of the one-period evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveGenerator {
    /// Coefficient of `p²` in `H_eff`.
    pub u: f64,
    /// Coefficient of `x²`.
    pub v: f64,
    /// Coefficient of the symmetrised product `½(xp + px)`.
    pub w: f64,
    /// `G = T·[[w, 2u], [−2v, −w]]`, trace-free.
    pub generator: Mat2,
    /// `exp(G) = −M` rather than `M`.
    pub reflection_factor: bool,
    pub delta: DeltaValue,
    pub regime: Regime,
    pub period: f64,
    pub hbar: f64,
    /// The map the generator was extracted from.
    pub monodromy: Monodromy2,
}

/// Extracts the effective generator with the default marginal band.
pub fn heff_from_monodromy(m: &Monodromy2, period: f64, hbar: f64) -> Result<EffectiveGenerator> {
    heff_from_monodromy_with_band(m, period, hbar, DEFAULT_BAND)
}

pub fn heff_from_monodromy_with_band(
    m: &Monodromy2,
    period: f64,
    hbar: f64,
    band: f64,
) -> Result<EffectiveGenerator> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::invalid("period", format!("must be positive, got {period}")));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::invalid("hbar", format!("must be positive, got {hbar}")));
    }
    if !(band >= 0.0) {
        return Err(Error::invalid("band", "must be non-negative"));
    }
    let h = m.half_trace();
    let regime = Regime::from_half_trace(h, band);
    let reflection_factor = h < 0.0;
    let reduced = if reflection_factor {
        -*m.matrix()
    } else {
        *m.matrix()
    };
    let h_red = h.abs();
    let dsq = h_red * h_red - 1.0;
    let delta = match regime {
        // exp of the nilpotent part is exact; avoids 0/0 at the boundary
        Regime::Marginal => 1.0,
        // h = 0 up to rounding: quarter turn
        _ if dsq <= -1.0 => FRAC_PI_2,
        _ => delta_unchecked(dsq),
    };
    let generator = (reduced - Mat2::IDENTITY.scale(h_red)).scale(delta);
    Ok(EffectiveGenerator {
        u: generator.m12() / (2.0 * period),
        v: -generator.m21() / (2.0 * period),
        w: generator.m11() / period,
        generator,
        reflection_factor,
        delta: DeltaValue { dsq, delta },
        regime,
        period,
        hbar,
        monodromy: *m,
    })
}

/// Normal form `½(P² + Ω²X²)` the effective Hamiltonian is equivalent to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReduction {
    /// `Ω²` in units of inverse time squared; exactly zero when marginal.
    pub omega_sq: f64,
    pub normal_form: Regime,
}

pub fn regime_reduction(gen: &EffectiveGenerator) -> RegimeReduction {
    let omega_sq = match gen.regime {
        Regime::Marginal => 0.0,
        _ => gen.generator.det() / (gen.period * gen.period),
    };
    RegimeReduction {
        omega_sq,
        normal_form: gen.regime,
    }
}

/// Least-squares fit `Q = σ · H_eff` over the three quadratic coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportionality {
    pub sigma: f64,
    /// `‖q − σh‖ / ‖q‖`.
    pub residual: f64,
}

pub fn quadratic_form_proportionality(
    gen: &EffectiveGenerator,
    q: &QuadraticFormCoeffs,
) -> Result<Proportionality> {
    let h = gen.classical_form();
    let q = q.as_array();
    let hn = norm3(&h);
    let qn = norm3(&q);
    let scale = gen.monodromy.matrix().max_abs().max(1.0);
    if hn <= 1e-12 * scale / gen.period || qn <= 1e-12 * scale {
        return Err(Error::Indeterminate(
            "both quadratic forms vanish for M = ±I".to_string(),
        ));
    }
    let sigma = dot3(&q, &h) / (hn * hn);
    let r = [q[0] - sigma * h[0], q[1] - sigma * h[1], q[2] - sigma * h[2]];
    Ok(Proportionality {
        sigma,
        residual: norm3(&r) / qn,
    })
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

impl EffectiveGenerator {
    /// `[u, v, w]`, the coefficients of `p²`, `x²` and `xp` in the classical
    /// effective Hamiltonian. Ordered like [`QuadraticFormCoeffs::as_array`].
    pub fn classical_form(&self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    /// Independent matrix exponential of the generator.
    pub fn exp(&self) -> Mat2 {
        self.generator.expm()
    }

    /// `‖exp(G) ∓ M‖_max` with the sign given by the reflection factor.
    pub fn reconstruction_error(&self) -> f64 {
        let target = if self.reflection_factor {
            -*self.monodromy.matrix()
        } else {
            *self.monodromy.matrix()
        };
        self.exp().max_abs_diff(&target)
    }

    /// `‖Gᵀ Λ + Λ G‖_max`; zero for members of the symplectic algebra.
    pub fn algebra_defect(&self) -> f64 {
        use crate::mat2::LAMBDA;
        (self.generator.transpose() * LAMBDA + LAMBDA * self.generator).max_abs()
    }

    /// Eigenvalue magnitude of `G`: the rotation angle (elliptic) or growth
    /// exponent (hyperbolic) of the reduced map.
    pub fn generator_exponent(&self) -> f64 {
        self.generator.det().abs().sqrt()
    }

    /// Rotation angle per period including the `π` of a split-off `−I`.
    pub fn phase_per_period(&self) -> f64 {
        let base = match self.regime {
            Regime::Elliptic => self.generator_exponent(),
            _ => 0.0,
        };
        if self.reflection_factor {
            base + PI
        } else {
            base
        }
    }

    /// True for `M = −I` exactly, where the generator is a half turn
    /// represented entirely by the reflection factor.
    pub fn is_half_turn(&self) -> bool {
        self.reflection_factor && self.generator == Mat2::ZERO
    }

    /// Imaginary parts of `a`, `b`, `c` in
    /// `a p̂² + b x̂² + (c/2)(x̂p̂ + p̂x̂)`, using the matrix-element formulas
    /// `a = (i/ħ)(Δ/2)M₁₂`, `b = −(i/ħ)(Δ/2)M₂₁`, `c = (i/ħ)(Δ/2)(M₁₁ − M₂₂)`
    /// on the (reflection-reduced) map.
    pub fn exponent_coefficients(&self) -> [f64; 3] {
        let k = 1.0 / self.hbar;
        [
            k * self.generator.m12() / 2.0,
            -k * self.generator.m21() / 2.0,
            k * self.generator.m11(),
        ]
    }

    pub fn quadratic_form(&self) -> QuadraticFormCoeffs {
        quadratic_form(&self.monodromy)
    }
}

/// Closed-form expansion of `H_eff` for the kicked oscillator,
///
/// ```text
/// Δ·sin(ωT)/(ωT)·( p²/(2m eᵅ) + m ω² eᵅ x²/2 + ω sinh α cot(ωT)·(xp + px) ),
/// ```
///
/// returned as the classical `[u, v, w]` (with `xp + px → 2xp`). Its `p²`
/// and `x²` coefficients agree with [`heff_from_monodromy`]; its cross
/// coefficient is twice the matrix-element value, so this expansion is kept
/// only as a diagnostic.
pub fn expanded_kicked_coefficients(params: &KickedParams) -> Result<[f64; 3]> {
    let wt = params.omega_t();
    if params.omega == 0.0 || wt.sin() == 0.0 {
        return Err(Error::invalid("omega", "expansion needs sin(ωT) ≠ 0"));
    }
    let h = params.alpha.cosh() * wt.cos();
    if h < 0.0 {
        return Err(Error::invalid("omega", "expansion assumes a non-negative trace"));
    }
    let delta = delta_of_dsq(h * h - 1.0)?;
    let pre = delta * wt.sin() / wt;
    let (m, w, a) = (params.mass, params.omega, params.alpha);
    Ok([
        pre / (2.0 * m * a.exp()),
        pre * m * w * w * a.exp() / 2.0,
        pre * w * a.sinh() / wt.tan() * 2.0,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{classify, free_matrix, kick_matrix, monodromy_kicked, StabilityClass};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn kicked(omega_t: f64, alpha: f64) -> Monodromy2 {
        monodromy_kicked(&KickedParams::dimensionless(1.0, omega_t, alpha).unwrap())
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_of_dsq(0.0).unwrap(), 1.0);
        let s1 = 1.0_f64.sinh();
        assert_abs_diff_eq!(delta_of_dsq(s1 * s1).unwrap(), 1.0 / s1, epsilon = 1e-12);
        assert_abs_diff_eq!(delta_of_dsq(s1 * s1).unwrap(), 0.850918, epsilon = 1e-6);
        let d = delta_of_dsq(-0.75).unwrap();
        assert_abs_diff_eq!(d, (PI / 3.0) / (PI / 3.0).sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(d, 1.209200, epsilon = 1e-6);
    }

    #[test]
    fn delta_rejects_out_of_domain() {
        assert!(delta_of_dsq(-1.0).is_err());
        assert!(delta_of_dsq(-2.0).is_err());
        assert!(delta_of_dsq(f64::NAN).is_err());
    }

    #[test]
    fn delta_series_matches_direct_at_switch() {
        for dsq in [DELTA_SERIES_THRESHOLD, -DELTA_SERIES_THRESHOLD] {
            assert!((delta_series(dsq) - delta_direct(dsq)).abs() < 1e-12);
        }
    }

    #[test]
    fn free_motion_has_no_cross_term() {
        let m = free_matrix(1.0, 1.0, FRAC_PI_2);
        let g = heff_from_monodromy(&m, FRAC_PI_2, 1.0).unwrap();
        assert_abs_diff_eq!(g.w, 0.0, epsilon = 1e-15);
        assert!(!g.reflection_factor);
        assert!(g.reconstruction_error() < 1e-12);
        // H_eff = ½(p² + x²) for unit mass and frequency
        assert_abs_diff_eq!(g.u, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(g.v, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn bare_kick_generator() {
        let alpha = 0.7;
        let g = heff_from_monodromy(&kick_matrix(alpha), 1.0, 1.0).unwrap();
        assert_eq!((g.u, g.v), (0.0, 0.0));
        assert!(g.generator.max_abs_diff(&Mat2::diag(alpha, -alpha)) < 1e-14);
        assert!(g.reconstruction_error() < 1e-13);
    }

    #[test]
    fn identity_and_half_turn() {
        let g = heff_from_monodromy(&Monodromy2::IDENTITY, 1.0, 1.0).unwrap();
        assert_eq!(g.generator, Mat2::ZERO);
        assert!(!g.reflection_factor);

        let minus = Monodromy2::new(-Mat2::IDENTITY).unwrap();
        let g = heff_from_monodromy(&minus, 1.0, 1.0).unwrap();
        assert!(g.is_half_turn());
        assert_abs_diff_eq!(g.phase_per_period(), PI);
    }

    #[test]
    fn regime_reduction_signs() {
        let e = heff_from_monodromy(&kicked(FRAC_PI_2, 0.1), FRAC_PI_2, 1.0).unwrap();
        assert!(regime_reduction(&e).omega_sq > 0.0);
        let h = heff_from_monodromy(&kicked(TAU, 1.0), TAU, 1.0).unwrap();
        assert!(regime_reduction(&h).omega_sq < 0.0);
        let wt = (1.0 / 0.5_f64.cosh()).acos();
        let mg = heff_from_monodromy(&kicked(wt, 0.5), wt, 1.0).unwrap();
        let r = regime_reduction(&mg);
        assert_eq!(r.omega_sq, 0.0);
        assert_eq!(r.normal_form, Regime::Marginal);
    }

    #[test]
    fn proportionality_examples() {
        let m = free_matrix(1.3, 0.8, 1.1);
        let g = heff_from_monodromy(&m, 1.1, 1.0).unwrap();
        let q = quadratic_form(&m);
        let p = quadratic_form_proportionality(&g, &q).unwrap();
        assert!(p.residual < 1e-10);
        assert_abs_diff_eq!(p.sigma, -2.0 * 1.1 / g.delta.delta, epsilon = 1e-12);

        let k = kick_matrix(0.4);
        let g = heff_from_monodromy(&k, 1.0, 1.0).unwrap();
        let q = quadratic_form(&k);
        let p = quadratic_form_proportionality(&g, &q).unwrap();
        assert_abs_diff_eq!(p.sigma, q.q_xp / g.w, epsilon = 1e-12);

        let p2 = quadratic_form_proportionality(&g, &q.scale(2.0)).unwrap();
        assert_eq!(p2.sigma, 2.0 * p.sigma);
    }

    #[test]
    fn proportionality_indeterminate_at_identity() {
        let g = heff_from_monodromy(&Monodromy2::IDENTITY, 1.0, 1.0).unwrap();
        let q = quadratic_form(&Monodromy2::IDENTITY);
        assert!(matches!(
            quadratic_form_proportionality(&g, &q),
            Err(Error::Indeterminate(_))
        ));
    }

    #[test]
    fn expansion_cross_term_is_doubled() {
        let p = KickedParams::new(1.2, 0.9, 1.1, 0.35, 1.0).unwrap();
        let g = heff_from_monodromy(&monodromy_kicked(&p), p.period, 1.0).unwrap();
        let [u, v, w] = expanded_kicked_coefficients(&p).unwrap();
        assert_abs_diff_eq!(u, g.u, epsilon = 1e-12);
        assert_abs_diff_eq!(v, g.v, epsilon = 1e-12);
        assert_abs_diff_eq!(w, 2.0 * g.w, epsilon = 1e-12);
    }

    #[test]
    fn negative_trace_elliptic_is_split() {
        let m = kicked(2.5, 0.2);
        assert!(m.trace() < 0.0 && m.trace() > -2.0);
        let g = heff_from_monodromy(&m, 2.5, 1.0).unwrap();
        assert!(g.reflection_factor);
        assert!(g.reconstruction_error() < 1e-12);
        let StabilityClass::Elliptic { omega } = classify(&m, DEFAULT_BAND) else {
            panic!("expected elliptic")
        };
        let phase = g.phase_per_period();
        let d = (phase - omega).rem_euclid(TAU);
        assert!(d.min(TAU - d) < 1e-12 || ((phase + omega) % TAU).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn generator_reconstructs(wt in 0.0f64..TAU, a in -2.0f64..2.0) {
            let m = kicked(wt, a);
            prop_assume!((m.half_trace().abs() - 1.0).abs() > DEFAULT_BAND);
            let g = heff_from_monodromy(&m, 1.0, 1.0).unwrap();
            prop_assert!(g.reconstruction_error() < 1e-10);
            prop_assert!(g.algebra_defect() < 1e-12 * g.generator.max_abs().max(1.0));
            prop_assert!(g.generator.trace().abs() < 1e-15 * g.generator.max_abs().max(1.0));
        }

        #[test]
        fn regime_matches_classification(wt in 0.0f64..TAU, a in -2.0f64..2.0) {
            let m = kicked(wt, a);
            let g = heff_from_monodromy(&m, 1.0, 1.0).unwrap();
            let r = regime_reduction(&g);
            let class = classify(&m, DEFAULT_BAND);
            prop_assert_eq!(r.normal_form, class.regime());
            match class.regime() {
                Regime::Elliptic => prop_assert!(r.omega_sq > 0.0),
                Regime::Hyperbolic => prop_assert!(r.omega_sq < 0.0),
                Regime::Marginal => prop_assert!(r.omega_sq == 0.0),
            }
        }

        #[test]
        fn generator_exponent_matches_class(wt in 0.0f64..TAU, a in -2.0f64..2.0) {
            let m = kicked(wt, a);
            let class = classify(&m, DEFAULT_BAND);
            let g = heff_from_monodromy(&m, 1.0, 1.0).unwrap();
            prop_assume!(!g.reflection_factor);
            match class {
                StabilityClass::Elliptic { omega } => {
                    prop_assert!((g.generator_exponent() - omega.min(TAU - omega)).abs() < 1e-10)
                }
                StabilityClass::Hyperbolic { mu, .. } => {
                    prop_assert!((g.generator_exponent() - mu).abs() < 1e-10)
                }
                StabilityClass::Marginal { .. } => {}
            }
        }
    }
}
