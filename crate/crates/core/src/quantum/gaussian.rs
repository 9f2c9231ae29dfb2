//! Gaussian states under the Floquet map.
//!
//! First and second moments of `ẑ = (x̂, p̂)` evolve exactly like the
//! classical phase-space vector: `⟨ẑ⟩ ↦ M⟨ẑ⟩`, `Σ ↦ M Σ Mᵀ`.
//!
//! The covariance is stored in Williamson form `Σ = ν·L Lᵀ` with `ν = √det Σ`
//! and `L = [[a, 0], [b, 1/a]]` lower triangular of unit determinant. After
//! each period `M L` is reduced back to that shape by an LQ step, so
//! `det Σ = ν²` holds structurally even when the entries of `Σ` grow like
//! `e^{2μn}` and a direct determinant would cancel catastrophically.

use serde::{Deserialize, Serialize};

use crate::classical::{classify, Monodromy2, Regime, DEFAULT_BAND};
use crate::error::{Error, Result};
use crate::mat2::Mat2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    mean: [f64; 2],
    /// `√det Σ`.
    nu: f64,
    /// Lower-triangular symplectic factor `[[a, 0], [b, 1/a]]`.
    a: f64,
    b: f64,
}

impl GaussianState {
    /// Checks symmetry, positivity and `det Σ ≥ ħ²/4`.
    pub fn new(mean: [f64; 2], covariance: Mat2, hbar: f64) -> Result<Self> {
        let c = covariance;
        if !c.is_finite() || !mean.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("covariance", "entries must be finite"));
        }
        if (c.m12() - c.m21()).abs() > 1e-14 * c.max_abs() {
            return Err(Error::invalid("covariance", "must be symmetric"));
        }
        let det = c.det();
        if !(c.m11() > 0.0 && det > 0.0) {
            return Err(Error::invalid("covariance", "must be positive definite"));
        }
        if det < 0.25 * hbar * hbar * (1.0 - 1e-12) {
            return Err(Error::invalid(
                "covariance",
                format!("violates the uncertainty bound: det = {det} < ħ²/4 = {}", 0.25 * hbar * hbar),
            ));
        }
        let nu = det.sqrt();
        let a = (c.m11() / nu).sqrt();
        let b = c.m12() / (nu * a);
        Ok(Self { mean, nu, a, b })
    }

    /// Minimum-uncertainty state with `Σ = (ħ/2)·I`.
    pub fn vacuum(mean: [f64; 2], hbar: f64) -> Self {
        Self {
            mean,
            nu: 0.5 * hbar,
            a: 1.0,
            b: 0.0,
        }
    }

    pub fn mean(&self) -> [f64; 2] {
        self.mean
    }

    pub fn covariance(&self) -> Mat2 {
        let l = self.factor();
        (l * l.transpose()).scale(self.nu)
    }

    /// `det Σ`, evaluated on the factored form.
    pub fn det_covariance(&self) -> f64 {
        let l = self.factor();
        let d = l.m11() * l.m22();
        self.nu * self.nu * d * d
    }

    /// Largest eigenvalue of `Σ`.
    pub fn max_eigenvalue(&self) -> f64 {
        // eigenvalues of L Lᵀ have product 1 and sum a² + b² + 1/a²
        let l = self.factor();
        let half_sum = 0.5 * (l.m11() * l.m11() + l.m21() * l.m21() + l.m22() * l.m22());
        let disc = (half_sum - 1.0).max(0.0) * (half_sum + 1.0);
        self.nu * (half_sum + disc.sqrt())
    }

    fn factor(&self) -> Mat2 {
        Mat2::new(self.a, 0.0, self.b, 1.0 / self.a)
    }

    /// One application of `M`.
    pub fn step(&self, m: &Monodromy2) -> Self {
        let mean = m.matrix().apply(self.mean);
        let ml = *m.matrix() * self.factor();
        // LQ: the first row's norm becomes the new diagonal entry
        let a = ml.m11().hypot(ml.m12());
        let b = (ml.m21() * ml.m11() + ml.m22() * ml.m12()) / a;
        Self {
            mean,
            nu: self.nu,
            a,
            b,
        }
    }
}

/// `n_periods` successive applications of `M`.
pub fn propagate_gaussian(state: &GaussianState, m: &Monodromy2, n_periods: usize) -> GaussianState {
    let mut s = *state;
    for _ in 0..n_periods {
        s = s.step(m);
    }
    s
}

/// Least-squares slope of `½ ln λ_max(Σₙ)` against `n` over the second half
/// of `n = 1..=n_max`, starting from the vacuum with `ħ = 1`.
pub fn variance_growth_exponent(m: &Monodromy2, n_max: usize) -> Result<f64> {
    let class = classify(m, DEFAULT_BAND);
    if class.regime() != Regime::Hyperbolic {
        return Err(Error::WrongRegime {
            expected: "hyperbolic",
            found: class.regime().name(),
        });
    }
    if n_max < 4 {
        return Err(Error::invalid("n_max", "need at least 4 periods"));
    }
    let mut state = GaussianState::vacuum([0.0, 0.0], 1.0);
    let mut series = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        state = state.step(m);
        series.push((n as f64, 0.5 * state.max_eigenvalue().ln()));
    }
    let tail = &series[n_max / 2..];
    Ok(least_squares_slope(tail))
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{monodromy_kicked, KickedParams};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    fn kicked(omega_t: f64, alpha: f64) -> Monodromy2 {
        monodromy_kicked(&KickedParams::dimensionless(1.0, omega_t, alpha).unwrap())
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let s = GaussianState::new([0.3, -1.0], Mat2::new(1.0, 0.2, 0.2, 0.7), 1.0).unwrap();
        let t = propagate_gaussian(&s, &Monodromy2::IDENTITY, 10);
        assert_eq!(t.mean(), s.mean());
        assert!(t.covariance().max_abs_diff(&s.covariance()) < 1e-15);
    }

    #[test]
    fn covariance_round_trips_through_factor() {
        let c = Mat2::new(2.0, -0.4, -0.4, 0.9);
        let s = GaussianState::new([0.0, 0.0], c, 1.0).unwrap();
        assert!(s.covariance().max_abs_diff(&c) < 1e-15);
        assert_abs_diff_eq!(s.det_covariance(), c.det(), epsilon = 1e-15);
    }

    #[test]
    fn step_matches_direct_congruence() {
        let m = kicked(1.1, 0.4);
        let c = Mat2::new(1.5, 0.3, 0.3, 0.8);
        let s = GaussianState::new([1.0, 2.0], c, 1.0).unwrap().step(&m);
        let direct = *m.matrix() * c * m.matrix().transpose();
        assert!(s.covariance().max_abs_diff(&direct) < 1e-14);
        assert_eq!(s.mean(), m.matrix().apply([1.0, 2.0]));
    }

    #[test]
    fn rejects_unphysical_covariances() {
        assert!(GaussianState::new([0.0; 2], Mat2::new(0.1, 0.0, 0.0, 0.1), 1.0).is_err());
        assert!(GaussianState::new([0.0; 2], Mat2::new(1.0, 0.5, 0.4, 1.0), 1.0).is_err());
        assert!(GaussianState::new([0.0; 2], Mat2::new(-1.0, 0.0, 0.0, -1.0), 1.0).is_err());
    }

    #[test]
    fn hyperbolic_variance_grows_like_e_2n() {
        let m = kicked(TAU, 1.0);
        let mut s = GaussianState::vacuum([0.0; 2], 1.0);
        let mut pts = Vec::new();
        for n in 1..=20 {
            s = s.step(&m);
            if n >= 10 {
                pts.push((n as f64, s.max_eigenvalue().ln()));
            }
        }
        let slope = least_squares_slope(&pts);
        assert!((1.98..=2.02).contains(&slope), "slope {slope}");
    }

    #[test]
    fn determinant_is_preserved() {
        let s0 = GaussianState::new([0.0; 2], Mat2::new(0.9, 0.1, 0.1, 0.6), 1.0).unwrap();
        for m in [kicked(TAU, 1.0), kicked(1.0, 0.2), kicked(std::f64::consts::PI, 1.5)] {
            let s = propagate_gaussian(&s0, &m, 50);
            assert!((s.det_covariance() - s0.det_covariance()).abs() < 1e-10);
        }
    }

    #[test]
    fn growth_exponent_examples() {
        let e = variance_growth_exponent(&kicked(TAU, 1.0), 30).unwrap();
        assert!((e - 1.0).abs() < 0.01);
        let e = variance_growth_exponent(&kicked(TAU, 0.5), 30).unwrap();
        assert!((e - 0.5).abs() < 0.005);
        let m = kicked(2.8, 1.2);
        let mu = m.half_trace().abs().acosh();
        let e = variance_growth_exponent(&m, 30).unwrap();
        assert!((e - mu).abs() < 0.01 * mu);
        assert!(matches!(
            variance_growth_exponent(&kicked(1.0, 0.1), 30),
            Err(Error::WrongRegime { .. })
        ));
    }

    #[test]
    fn elliptic_variance_stays_bounded() {
        let m = kicked(1.0, 0.4);
        let mut s = GaussianState::vacuum([0.0; 2], 1.0);
        let mut peak: f64 = 0.0;
        for _ in 0..1000 {
            s = s.step(&m);
            peak = peak.max(s.max_eigenvalue());
        }
        assert!(peak < 10.0);
    }
}
