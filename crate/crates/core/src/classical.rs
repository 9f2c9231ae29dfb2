//! One-period maps of the periodically kicked oscillator.
//!
//! Between kicks the particle moves in the potential `mω²x²/2`; at every
//! multiple of `T` a dilation kick `(x, p) ↦ (eᵅx, e⁻ᵅp)` acts
//! instantaneously. The map over one period, taken from just before one kick
//! to just before the next, is `M = M₀ · M_k`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::{Mat2, LAMBDA};

/// Default half-width of the marginal band around `|Tr M|/2 = 1`.
pub const DEFAULT_BAND: f64 = 1e-9;

/// Tolerance on `|det M − 1|` accepted when wrapping a matrix as a monodromy.
pub const DET_TOLERANCE: f64 = 1e-8;

/// Entry-wise tolerance used to decide whether a marginal map equals `±I`.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Parameters of the kicked oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickedParams {
    pub mass: f64,
    pub omega: f64,
    pub period: f64,
    pub alpha: f64,
    pub hbar: f64,
}

impl KickedParams {
    pub fn new(mass: f64, omega: f64, period: f64, alpha: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::invalid("mass", format!("must be positive, got {mass}")));
        }
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::invalid("omega", format!("must be non-negative, got {omega}")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::invalid("period", format!("must be positive, got {period}")));
        }
        if !alpha.is_finite() {
            return Err(Error::invalid("alpha", "must be finite"));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::invalid("hbar", format!("must be positive, got {hbar}")));
        }
        Ok(Self {
            mass,
            omega,
            period,
            alpha,
            hbar,
        })
    }

    /// Unit mass and `ħ = 1`.
    pub fn dimensionless(omega: f64, period: f64, alpha: f64) -> Result<Self> {
        Self::new(1.0, omega, period, alpha, 1.0)
    }

    /// Rescaled phase advance `ωT`; together with `α` it fixes the stability.
    pub fn omega_t(&self) -> f64 {
        self.omega * self.period
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Real 2×2 map over one drive period; unit determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy2(Mat2);

impl Monodromy2 {
    pub const IDENTITY: Monodromy2 = Monodromy2(Mat2::IDENTITY);

    /// Wraps `m` after checking `|det m − 1| ≤ DET_TOLERANCE`.
    pub fn new(m: Mat2) -> Result<Self> {
        let det = m.det();
        if !m.is_finite() || (det - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::NotSymplectic { det });
        }
        Ok(Monodromy2(m))
    }

    /// Wraps a product of exactly symplectic factors without re-checking.
    pub(crate) fn from_symplectic(m: Mat2) -> Self {
        Monodromy2(m)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn half_trace(&self) -> f64 {
        0.5 * self.0.trace()
    }

    pub fn det(&self) -> f64 {
        self.0.det()
    }

    /// `‖Mᵀ Λ M − Λ‖_max`.
    pub fn symplectic_defect(&self) -> f64 {
        (self.0.transpose() * LAMBDA * self.0).max_abs_diff(&LAMBDA)
    }

    pub fn compose(&self, first: &Monodromy2) -> Monodromy2 {
        Monodromy2(self.0 * first.0)
    }

    pub fn inverse(&self) -> Monodromy2 {
        let m = &self.0;
        Monodromy2(Mat2::new(m.m22(), -m.m12(), -m.m21(), m.m11()))
    }

    pub fn powi(&self, n: u32) -> Monodromy2 {
        Monodromy2(self.0.powi(n))
    }
}

/// Which of the two lines `Tr M = ±2` a marginal map or boundary sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TraceSign {
    Plus,
    Minus,
}

impl TraceSign {
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            TraceSign::Minus
        } else {
            TraceSign::Plus
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            TraceSign::Plus => 1.0,
            TraceSign::Minus => -1.0,
        }
    }
}

/// Coarse regime, without exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Elliptic,
    Hyperbolic,
    Marginal,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Elliptic => "elliptic",
            Regime::Hyperbolic => "hyperbolic",
            Regime::Marginal => "marginal",
        }
    }

    /// Regime of a symplectic map with the given half trace.
    pub fn from_half_trace(half_trace: f64, band: f64) -> Regime {
        let a = half_trace.abs();
        if a < 1.0 - band {
            Regime::Elliptic
        } else if a > 1.0 + band {
            Regime::Hyperbolic
        } else {
            Regime::Marginal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StabilityClass {
    /// Conjugate to a rotation by `omega ∈ (0, 2π)` per period.
    Elliptic { omega: f64 },
    /// Eigenvalues `±e^{±μ}`; `reflected` when both are negative.
    Hyperbolic { mu: f64, reflected: bool },
    /// Degenerate eigenvalue `sign`; `shearing` unless the map is `±I`.
    Marginal { sign: TraceSign, shearing: bool },
}

impl StabilityClass {
    pub fn regime(&self) -> Regime {
        match self {
            StabilityClass::Elliptic { .. } => Regime::Elliptic,
            StabilityClass::Hyperbolic { .. } => Regime::Hyperbolic,
            StabilityClass::Marginal { .. } => Regime::Marginal,
        }
    }

    /// `Ω`, `μ` or zero.
    pub fn exponent(&self) -> f64 {
        match *self {
            StabilityClass::Elliptic { omega } => omega,
            StabilityClass::Hyperbolic { mu, .. } => mu,
            StabilityClass::Marginal { .. } => 0.0,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            StabilityClass::Elliptic { .. } => "elliptic",
            StabilityClass::Hyperbolic {
                reflected: false, ..
            } => "hyperbolic",
            StabilityClass::Hyperbolic { reflected: true, .. } => "hyperbolic_reflected",
            StabilityClass::Marginal { .. } => "marginal",
        }
    }
}

/// Coefficients of `Q(z) = q_pp p² + q_xx x² + q_xp xp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFormCoeffs {
    pub q_pp: f64,
    pub q_xx: f64,
    pub q_xp: f64,
}

impl QuadraticFormCoeffs {
    pub fn eval(&self, z: [f64; 2]) -> f64 {
        let [x, p] = z;
        self.q_pp * p * p + self.q_xx * x * x + self.q_xp * x * p
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.q_pp, self.q_xx, self.q_xp]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            q_pp: s * self.q_pp,
            q_xx: s * self.q_xx,
            q_xp: s * self.q_xp,
        }
    }
}

/// A root of `|cosh α cos ωT| = 1` in `ωT ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRoot {
    pub omega_t: f64,
    pub sign: TraceSign,
    /// Set for `α = 0`, where the indicator touches zero without crossing.
    pub touching: bool,
}

/// Dilation kick `diag(eᵅ, e⁻ᵅ)`.
pub fn kick_matrix(alpha: f64) -> Monodromy2 {
    Monodromy2(Mat2::diag(alpha.exp(), (-alpha).exp()))
}

/// Free harmonic motion over time `t`; the `ω = 0` limit is the shear
/// `[[1, t/m], [0, 1]]`.
pub fn free_matrix(mass: f64, omega: f64, t: f64) -> Monodromy2 {
    if omega == 0.0 {
        return Monodromy2(Mat2::new(1.0, t / mass, 0.0, 1.0));
    }
    let phase = omega * t;
    let (s, c) = phase.sin_cos();
    let mw = mass * omega;
    Monodromy2(Mat2::new(c, s / mw, -mw * s, c))
}

/// `M = M₀ · M_k`: a kick followed by free motion over one period.
pub fn monodromy_kicked(params: &KickedParams) -> Monodromy2 {
    let free = free_matrix(params.mass, params.omega, params.period);
    free.compose(&kick_matrix(params.alpha))
}

/// Eigenvalues `(λ₊, λ₋)` with `|λ₊| ≥ 1` and `λ₊λ₋ = 1`.
pub fn eigenvalue_pair(m: &Monodromy2) -> Result<(Complex64, Complex64)> {
    let det = m.det();
    if (det - 1.0).abs() > DET_TOLERANCE {
        return Err(Error::NotSymplectic { det });
    }
    let h = m.half_trace();
    let disc = h * h - 1.0;
    if disc < 0.0 {
        let im = (-disc).sqrt();
        Ok((Complex64::new(h, im), Complex64::new(h, -im)))
    } else {
        // Larger-modulus root first; the partner is its reciprocal.
        let plus = h + h.signum() * disc.sqrt();
        let plus = if h == 0.0 { disc.sqrt() } else { plus };
        Ok((Complex64::new(plus, 0.0), Complex64::new(1.0 / plus, 0.0)))
    }
}

pub fn classify(m: &Monodromy2, band: f64) -> StabilityClass {
    let h = m.half_trace();
    match Regime::from_half_trace(h, band) {
        Regime::Elliptic => {
            let base = h.acos();
            let omega = if m.matrix().m12() > 0.0 { base } else { TAU - base };
            StabilityClass::Elliptic { omega }
        }
        Regime::Hyperbolic => StabilityClass::Hyperbolic {
            mu: h.abs().acosh(),
            reflected: h < 0.0,
        },
        Regime::Marginal => {
            let sign = TraceSign::of(h);
            let pm = Mat2::IDENTITY.scale(sign.as_f64());
            StabilityClass::Marginal {
                sign,
                shearing: m.matrix().max_abs_diff(&pm) > IDENTITY_TOLERANCE,
            }
        }
    }
}

/// Coefficients of the invariant form `Q(z) = zᵀ Λ M z`.
pub fn quadratic_form(m: &Monodromy2) -> QuadraticFormCoeffs {
    let a = LAMBDA * *m.matrix();
    QuadraticFormCoeffs {
        q_pp: a.m22(),
        q_xx: a.m11(),
        q_xp: a.m12() + a.m21(),
    }
}

/// Closed-form roots of `cos ωT = ±1/cosh α` in `[0, 2π)`, sorted.
///
/// For `α = 0` the indicator only touches zero, at `ωT = 0` and `ωT = π`;
/// those two points are returned with `touching` set.
pub fn stability_boundary_kicked(alpha: f64) -> Vec<BoundaryRoot> {
    if alpha == 0.0 {
        return vec![
            BoundaryRoot {
                omega_t: 0.0,
                sign: TraceSign::Plus,
                touching: true,
            },
            BoundaryRoot {
                omega_t: PI,
                sign: TraceSign::Minus,
                touching: true,
            },
        ];
    }
    let base = (1.0 / alpha.cosh()).acos();
    let mut roots = vec![
        BoundaryRoot {
            omega_t: base,
            sign: TraceSign::Plus,
            touching: false,
        },
        BoundaryRoot {
            omega_t: PI - base,
            sign: TraceSign::Minus,
            touching: false,
        },
        BoundaryRoot {
            omega_t: PI + base,
            sign: TraceSign::Minus,
            touching: false,
        },
        BoundaryRoot {
            omega_t: TAU - base,
            sign: TraceSign::Plus,
            touching: false,
        },
    ];
    roots.sort_by(|a, b| a.omega_t.total_cmp(&b.omega_t));
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn kicked(omega_t: f64, alpha: f64) -> Monodromy2 {
        monodromy_kicked(&KickedParams::dimensionless(1.0, omega_t, alpha).unwrap())
    }

    #[test]
    fn kick_matrix_values() {
        assert_eq!(kick_matrix(0.0), Monodromy2::IDENTITY);
        let k = kick_matrix(1.0);
        assert_abs_diff_eq!(k.matrix().m11(), std::f64::consts::E, epsilon = 1e-12);
        assert_abs_diff_eq!(k.matrix().m22(), 0.367879441, epsilon = 1e-9);
        let prod = kick_matrix(-1.0).compose(&k);
        assert!(prod.matrix().max_abs_diff(&Mat2::IDENTITY) < 1e-15);
    }

    #[test]
    fn free_matrix_resonances_and_shear() {
        assert!(free_matrix(1.0, 1.0, TAU).matrix().max_abs_diff(&Mat2::IDENTITY) < 1e-15);
        assert!(free_matrix(1.0, 1.0, PI).matrix().max_abs_diff(&-Mat2::IDENTITY) < 1e-15);
        assert_eq!(*free_matrix(1.0, 0.0, 2.0).matrix(), Mat2::new(1.0, 2.0, 0.0, 1.0));
    }

    #[test]
    fn monodromy_examples() {
        let free = free_matrix(1.0, 1.3, 0.7);
        let m = monodromy_kicked(&KickedParams::dimensionless(1.3, 0.7, 0.0).unwrap());
        assert_eq!(m, free);

        let m = kicked(TAU, 1.0);
        let e = 1.0_f64.exp();
        assert!(m.matrix().max_abs_diff(&Mat2::diag(e, 1.0 / e)) < 1e-15);

        let m = monodromy_kicked(&KickedParams::new(1.0, 1.0, PI / 2.0, 0.5, 1.0).unwrap());
        let expected = Mat2::new(0.0, 0.606531, -1.648721, 0.0);
        assert!(m.matrix().max_abs_diff(&expected) < 1e-6);
    }

    #[test]
    fn eigenvalue_examples() {
        let (lp, lm) = eigenvalue_pair(&kicked(TAU, 1.0)).unwrap();
        assert_abs_diff_eq!(lp.re, 1.0_f64.exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(lm.re, (-1.0_f64).exp(), epsilon = 1e-12);

        let rot = Monodromy2::new(Mat2::new(0.0, 1.0, -1.0, 0.0)).unwrap();
        let (lp, lm) = eigenvalue_pair(&rot).unwrap();
        assert_eq!(lp, Complex64::new(0.0, 1.0));
        assert_eq!(lm, Complex64::new(0.0, -1.0));

        let shear = Monodromy2::new(Mat2::new(1.0, 3.0, 0.0, 1.0)).unwrap();
        let (lp, lm) = eigenvalue_pair(&shear).unwrap();
        assert_eq!(lp, Complex64::new(1.0, 0.0));
        assert_eq!(lm, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn eigenvalue_pair_rejects_non_symplectic() {
        let bad = Monodromy2::from_symplectic(Mat2::diag(2.0, 2.0));
        assert!(matches!(eigenvalue_pair(&bad), Err(Error::NotSymplectic { .. })));
        assert!(Monodromy2::new(Mat2::diag(2.0, 2.0)).is_err());
    }

    #[test]
    fn reflected_hyperbolic_eigenvalues_are_negative() {
        let m = kicked(PI, 1.0);
        let (lp, lm) = eigenvalue_pair(&m).unwrap();
        assert_abs_diff_eq!(lp.re, -(1.0_f64.exp()), epsilon = 1e-12);
        assert_abs_diff_eq!((lp * lm).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn classify_examples() {
        match classify(&kicked(PI / 2.0, 0.1), DEFAULT_BAND) {
            StabilityClass::Elliptic { omega } => assert_abs_diff_eq!(omega, PI / 2.0, epsilon = 1e-15),
            other => panic!("expected elliptic, got {other:?}"),
        }
        match classify(&kicked(TAU, 1.0), DEFAULT_BAND) {
            StabilityClass::Hyperbolic { mu, reflected } => {
                assert_abs_diff_eq!(mu, 1.0, epsilon = 1e-14);
                assert!(!reflected);
            }
            other => panic!("expected hyperbolic, got {other:?}"),
        }
        let wt = (1.0 / 0.5_f64.cosh()).acos();
        assert_eq!(
            classify(&kicked(wt, 0.5), DEFAULT_BAND),
            StabilityClass::Marginal {
                sign: TraceSign::Plus,
                shearing: true
            }
        );
        assert_eq!(
            classify(&Monodromy2::IDENTITY, DEFAULT_BAND),
            StabilityClass::Marginal {
                sign: TraceSign::Plus,
                shearing: false
            }
        );
        assert!(matches!(
            classify(&kicked(PI, 0.3), DEFAULT_BAND),
            StabilityClass::Hyperbolic { reflected: true, .. }
        ));
    }

    #[test]
    fn elliptic_angle_follows_off_diagonal_sign() {
        // ωT = 1 gives a positive M₁₂, ωT = 2π − 1 a negative one.
        let a = classify(&kicked(1.0, 0.0), DEFAULT_BAND).exponent();
        let b = classify(&kicked(TAU - 1.0, 0.0), DEFAULT_BAND).exponent();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b, TAU - 1.0, epsilon = 1e-14);
    }

    #[test]
    fn quadratic_form_examples() {
        let (m, w) = (1.7, 0.9);
        let q = quadratic_form(&free_matrix(m, w, 0.4));
        // proportional to p² + m²ω²x², no cross term
        assert_abs_diff_eq!(q.q_xx / q.q_pp, m * m * w * w, epsilon = 1e-13);
        assert_abs_diff_eq!(q.q_xp, 0.0, epsilon = 1e-15);

        let q = quadratic_form(&kick_matrix(0.8));
        assert_eq!((q.q_pp, q.q_xx), (0.0, 0.0));
        assert!(q.q_xp != 0.0);

        let q = quadratic_form(&Monodromy2::IDENTITY);
        assert_eq!(q.as_array(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn marginal_form_is_a_perfect_square() {
        let alpha = 0.5_f64;
        let wt = (1.0 / alpha.cosh()).acos();
        let q = quadratic_form(&kicked(wt, alpha));
        // discriminant of a perfect square vanishes
        let disc = q.q_xp * q.q_xp - 4.0 * q.q_pp * q.q_xx;
        assert!(disc.abs() < 1e-12 * q.q_xp.powi(2).max(1.0));
    }

    #[test]
    fn boundary_roots() {
        let roots = stability_boundary_kicked(0.5);
        assert_eq!(roots.len(), 4);
        for r in &roots {
            assert_abs_diff_eq!(r.omega_t.cos().abs(), 0.886819, epsilon = 1e-6);
            assert_abs_diff_eq!((0.5_f64.cosh() * r.omega_t.cos()).abs(), 1.0, epsilon = 1e-15);
            assert_eq!(TraceSign::of(r.omega_t.cos()), r.sign);
        }
        for r in stability_boundary_kicked(1.0) {
            assert_abs_diff_eq!(r.omega_t.cos().abs(), 0.648054, epsilon = 1e-6);
        }
        let far = stability_boundary_kicked(40.0);
        assert_abs_diff_eq!(far[0].omega_t, PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(far[2].omega_t, 1.5 * PI, epsilon = 1e-12);

        let zero = stability_boundary_kicked(0.0);
        assert!(zero.iter().all(|r| r.touching));
        assert_eq!(zero.len(), 2);
    }

    proptest! {
        #[test]
        fn symplectic_and_unit_det(
            m in 0.1f64..10.0, w in 0.0f64..10.0, t in 0.01f64..10.0, a in -3.0f64..3.0
        ) {
            let mono = monodromy_kicked(&KickedParams::new(m, w, t, a, 1.0).unwrap());
            let scale = mono.matrix().max_abs().powi(2).max(1.0);
            prop_assert!((mono.det() - 1.0).abs() < 1e-12 * scale);
            prop_assert!(mono.symplectic_defect() < 1e-12 * scale);
        }

        #[test]
        fn eigenvalue_product_is_one(wt in 0.0f64..TAU, a in -3.0f64..3.0) {
            let (lp, lm) = eigenvalue_pair(&kicked(wt, a)).unwrap();
            prop_assert!(((lp * lm) - 1.0).norm() < 1e-12);
            prop_assert!(lp.norm() >= 1.0 - 1e-12);
        }

        #[test]
        fn classification_is_scale_free(
            m in 0.1f64..10.0, w in 0.01f64..10.0, t in 0.01f64..10.0, a in -3.0f64..3.0
        ) {
            let p = KickedParams::new(m, w, t, a, 1.0).unwrap();
            let reduced = KickedParams::dimensionless(1.0, p.omega_t(), a).unwrap();
            prop_assert_eq!(
                classify(&monodromy_kicked(&p), DEFAULT_BAND),
                classify(&monodromy_kicked(&reduced), DEFAULT_BAND)
            );
        }

        #[test]
        fn quadratic_form_is_invariant(
            wt in 0.0f64..TAU, a in -2.0f64..2.0, x in -3.0f64..3.0, p in -3.0f64..3.0
        ) {
            let m = kicked(wt, a);
            let q = quadratic_form(&m);
            let z = [x, p];
            let mz = m.matrix().apply(z);
            let scale = q.as_array().iter().fold(0.0f64, |s, c| s.max(c.abs())) * (x * x + p * p).max(1.0);
            prop_assert!((q.eval(mz) - q.eval(z)).abs() < 1e-12 * scale.max(1.0) * 10.0);
        }
    }
}
