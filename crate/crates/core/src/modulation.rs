//! Monodromy of `ẍ + ω²(t) x = 0` for an arbitrary periodic `ω²(t)`.
//!
//! The period is cut into `N` equal slices; on each slice `ω²` is frozen at
//! its midpoint value and the slice is propagated with the exact
//! constant-coefficient matrix (rotation, hyperbolic rotation or shear).
//! Every factor is exactly symplectic and the symmetric midpoint rule gives
//! second-order convergence in `1/N`. A classical RK4 integration of the
//! fundamental matrix serves as an independent cross-check.

use std::f64::consts::TAU;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classical::{free_matrix, Monodromy2, TraceSign};
use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// First slice count tried by [`monodromy_converged`].
pub const INITIAL_SLICES: usize = 64;
/// Largest slice count [`monodromy_converged`] will try.
pub const MAX_SLICES: usize = 1 << 20;

/// Periodic squared frequency `ω²(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FrequencyProfile {
    Constant {
        omega_sq: f64,
        period: f64,
    },
    /// `ω²(t) = l − Δl·cos(ω₀ t)` with period `2π/ω₀`.
    Mathieu {
        l: f64,
        delta_l: f64,
        omega0: f64,
    },
    /// `high` on the first `duty` fraction of the period, `low` afterwards.
    SquareWave {
        high: f64,
        low: f64,
        duty: f64,
        period: f64,
    },
    /// Piecewise linear through `(t, ω²)` samples spanning `[0, T]`.
    Sampled { samples: Vec<(f64, f64)> },
}

impl FrequencyProfile {
    pub fn constant(omega_sq: f64, period: f64) -> Result<Self> {
        let p = FrequencyProfile::Constant { omega_sq, period };
        p.validate()?;
        Ok(p)
    }

    pub fn mathieu(l: f64, delta_l: f64, omega0: f64) -> Result<Self> {
        let p = FrequencyProfile::Mathieu { l, delta_l, omega0 };
        p.validate()?;
        Ok(p)
    }

    pub fn square_wave(high: f64, low: f64, duty: f64, period: f64) -> Result<Self> {
        let p = FrequencyProfile::SquareWave {
            high,
            low,
            duty,
            period,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn sampled(samples: Vec<(f64, f64)>) -> Result<Self> {
        let p = FrequencyProfile::Sampled { samples };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be finite"))
            }
        };
        match *self {
            FrequencyProfile::Constant { omega_sq, period } => {
                finite("omega_sq", omega_sq)?;
                positive("period", period)
            }
            FrequencyProfile::Mathieu { l, delta_l, omega0 } => {
                finite("l", l)?;
                finite("delta_l", delta_l)?;
                positive("omega0", omega0)
            }
            FrequencyProfile::SquareWave {
                high,
                low,
                duty,
                period,
            } => {
                finite("high", high)?;
                finite("low", low)?;
                if !(duty > 0.0 && duty < 1.0) {
                    return Err(Error::invalid("duty", format!("must lie in (0, 1), got {duty}")));
                }
                positive("period", period)
            }
            FrequencyProfile::Sampled { ref samples } => validate_samples(samples),
        }
    }

    pub fn period(&self) -> f64 {
        match *self {
            FrequencyProfile::Constant { period, .. } => period,
            FrequencyProfile::Mathieu { omega0, .. } => TAU / omega0,
            FrequencyProfile::SquareWave { period, .. } => period,
            FrequencyProfile::Sampled { ref samples } => samples[samples.len() - 1].0,
        }
    }

    /// `ω²(t)`, extended periodically.
    pub fn omega_sq(&self, t: f64) -> f64 {
        match *self {
            FrequencyProfile::Constant { omega_sq, .. } => omega_sq,
            FrequencyProfile::Mathieu { l, delta_l, omega0 } => l - delta_l * (omega0 * t).cos(),
            FrequencyProfile::SquareWave {
                high,
                low,
                duty,
                period,
            } => {
                if t.rem_euclid(period) < duty * period {
                    high
                } else {
                    low
                }
            }
            FrequencyProfile::Sampled { ref samples } => {
                let tt = t.rem_euclid(self.period());
                let idx = samples.partition_point(|&(ts, _)| ts <= tt);
                if idx == 0 {
                    return samples[0].1;
                }
                if idx >= samples.len() {
                    return samples[samples.len() - 1].1;
                }
                let (t0, w0) = samples[idx - 1];
                let (t1, w1) = samples[idx];
                w0 + (w1 - w0) * (tt - t0) / (t1 - t0)
            }
        }
    }

    /// Non-fatal remarks: a Mathieu drive with `l − Δl ≤ 0` makes `ω²`
    /// negative over part of the period (inverted pendulum regime).
    pub fn warnings(&self) -> Vec<String> {
        match *self {
            FrequencyProfile::Mathieu { l, delta_l, .. } if l - delta_l.abs() <= 0.0 => {
                vec![format!(
                    "omega^2(t) = l - delta_l cos(omega0 t) becomes non-positive (l = {l}, delta_l = {delta_l})"
                )]
            }
            _ => Vec::new(),
        }
    }

    /// Reads a two-column `t,omega_sq` CSV with a header row.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let samples = parse_profile_csv(reader)?;
        FrequencyProfile::sampled(samples)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

fn validate_samples(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::invalid("samples", "need at least two samples"));
    }
    if samples[0].0 != 0.0 {
        return Err(Error::invalid("samples", "first sample must be at t = 0"));
    }
    for (i, w) in samples.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(Error::invalid(
                "samples",
                format!("t must increase strictly (sample {})", i + 1),
            ));
        }
    }
    if samples.iter().any(|(t, w)| !t.is_finite() || !w.is_finite()) {
        return Err(Error::invalid("samples", "values must be finite"));
    }
    let (first, last) = (samples[0].1, samples[samples.len() - 1].1);
    if first != last {
        return Err(Error::invalid(
            "samples",
            format!("first and last omega_sq must be equal for periodicity ({first} vs {last})"),
        ));
    }
    Ok(())
}

/// Parses the sampled-profile CSV. Line numbers in errors are 1-based and
/// count the header.
pub fn parse_profile_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::ProfileParse {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    if header.len() != 2 || &header[0] != "t" || &header[1] != "omega_sq" {
        return Err(Error::ProfileParse {
            line: 1,
            reason: format!("expected header `t,omega_sq`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::ProfileParse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::ProfileParse {
                line,
                reason: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let parse = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|_| Error::ProfileParse {
                line,
                reason: format!("cannot parse {what} `{s}`"),
            })
        };
        let t = parse(&record[0], "t")?;
        let w = parse(&record[1], "omega_sq")?;
        if let Some(&(prev, _)) = samples.last() {
            if !(t > prev) {
                return Err(Error::ProfileParse {
                    line,
                    reason: format!("t must increase strictly ({t} after {prev})"),
                });
            }
        }
        samples.push((t, w));
    }
    if samples.is_empty() {
        return Err(Error::ProfileParse {
            line: 1,
            reason: "no samples".to_string(),
        });
    }
    Ok(samples)
}

/// Exact propagator over time `dt` for a frozen `ω²`.
pub fn slice_matrix(omega_sq: f64, mass: f64, dt: f64) -> Mat2 {
    if omega_sq > 0.0 {
        *free_matrix(mass, omega_sq.sqrt(), dt).matrix()
    } else if omega_sq < 0.0 {
        let k = (-omega_sq).sqrt();
        let (s, c) = ((k * dt).sinh(), (k * dt).cosh());
        Mat2::new(c, s / (mass * k), mass * k * s, c)
    } else {
        Mat2::new(1.0, dt / mass, 0.0, 1.0)
    }
}

/// Ordered midpoint slice product `S_{N−1} ⋯ S₀` over one period.
pub fn monodromy_slices(profile: &FrequencyProfile, mass: f64, slices: usize) -> Result<Monodromy2> {
    if slices == 0 {
        return Err(Error::invalid("slices", "need at least one slice"));
    }
    positive("mass", mass)?;
    let period = profile.period();
    let dt = period / slices as f64;
    let mut m = Mat2::IDENTITY;
    for n in 0..slices {
        let mid = (n as f64 + 0.5) * dt;
        m = slice_matrix(profile.omega_sq(mid), mass, dt) * m;
    }
    Ok(Monodromy2::from_symplectic(m))
}

/// Result of [`monodromy_converged`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceProduct {
    pub slices: usize,
    pub result: Monodromy2,
    /// `(N, ‖M_N − M_{2N}‖_max)` for every doubling tried.
    pub history: Vec<(usize, f64)>,
}

/// Doubles the slice count from [`INITIAL_SLICES`] until two successive
/// products agree to `tol`; returns the finer one.
pub fn monodromy_converged(profile: &FrequencyProfile, mass: f64, tol: f64) -> Result<SliceProduct> {
    positive("tol", tol)?;
    let mut n = INITIAL_SLICES;
    let mut coarse = monodromy_slices(profile, mass, n)?;
    let mut history = Vec::new();
    let mut deviation = f64::INFINITY;
    while 2 * n <= MAX_SLICES {
        let fine = monodromy_slices(profile, mass, 2 * n)?;
        deviation = coarse.matrix().max_abs_diff(fine.matrix());
        history.push((n, deviation));
        if deviation < tol {
            return Ok(SliceProduct {
                slices: 2 * n,
                result: fine,
                history,
            });
        }
        coarse = fine;
        n *= 2;
    }
    Err(Error::NonConvergence {
        tol,
        max_slices: MAX_SLICES,
        deviation,
    })
}

/// Fundamental matrix of `ẋ = p/m, ṗ = −mω²(t)x` over one period by
/// fixed-step classical RK4.
pub fn rk4_oracle(profile: &FrequencyProfile, mass: f64, steps: usize) -> Result<Monodromy2> {
    if steps < 100 {
        return Err(Error::invalid("steps", format!("need at least 100 steps, got {steps}")));
    }
    positive("mass", mass)?;
    let h = profile.period() / steps as f64;
    let a = |t: f64| Mat2::new(0.0, 1.0 / mass, -mass * profile.omega_sq(t), 0.0);
    let mut y = Mat2::IDENTITY;
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = a(t) * y;
        let k2 = a(t + 0.5 * h) * (y + k1.scale(0.5 * h));
        let k3 = a(t + 0.5 * h) * (y + k2.scale(0.5 * h));
        let k4 = a(t + h) * (y + k3.scale(h));
        y = y + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
    }
    Ok(Monodromy2::from_symplectic(y))
}

/// `|Tr M|/2 − 1`: negative inside stable regions, positive inside tongues.
pub fn stability_indicator(m: &Monodromy2) -> f64 {
    m.half_trace().abs() - 1.0
}

/// A refined point on a stability boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub param: f64,
    /// The line `Tr M = ±2` the point sits on.
    pub boundary: TraceSign,
    /// `|Tr M|/2 − 1` at `param`.
    pub residual: f64,
}

/// Bisects a sign change of `f` on `[a, b]` down to `b − a < tol`.
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { a, b });
    }
    while (b - a).abs() >= tol {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Locates every crossing of `|Tr M(param)|/2 = 1` in `range`.
///
/// The range is scanned on `samples` equal sub-intervals; every sign change
/// of the stability indicator is refined by bisection to `tol`. Touching
/// zeros that do not change sign are not reported.
pub fn trace_boundary<F>(family: F, range: (f64, f64), samples: usize, tol: f64) -> Result<Vec<BoundaryPoint>>
where
    F: Fn(f64) -> Result<Monodromy2>,
{
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(Error::invalid("range", format!("empty range [{lo}, {hi}]")));
    }
    if samples == 0 {
        return Err(Error::invalid("samples", "need at least one sub-interval"));
    }
    positive("tol", tol)?;
    let indicator = |p: f64| family(p).map(|m| stability_indicator(&m));
    let grid: Vec<f64> = (0..=samples)
        .map(|i| lo + (hi - lo) * i as f64 / samples as f64)
        .collect();
    let values = grid.iter().map(|&p| indicator(p)).collect::<Result<Vec<_>>>()?;
    let mut points = Vec::new();
    for i in 0..samples {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 || fa.signum() != fb.signum() && fb != 0.0 {
            let param = bisect(indicator, grid[i], grid[i + 1], tol)?;
            let m = family(param)?;
            points.push(BoundaryPoint {
                param,
                boundary: TraceSign::of(m.trace()),
                residual: stability_indicator(&m),
            });
        }
    }
    if points.is_empty() {
        return Err(Error::NoSignChange { a: lo, b: hi });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{classify, monodromy_kicked, KickedParams, Regime};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn constant_profile_matches_free_motion() {
        let p = FrequencyProfile::constant(1.7, 2.3).unwrap();
        let exact = free_matrix(1.0, 1.7_f64.sqrt(), 2.3);
        for n in [1, 7, 64, 1000] {
            let m = monodromy_slices(&p, 1.0, n).unwrap();
            assert!(m.matrix().max_abs_diff(exact.matrix()) < 1e-12, "N = {n}");
        }
    }

    #[test]
    fn mathieu_without_drive_is_free_motion() {
        let p = FrequencyProfile::mathieu(1.0, 0.0, 2.0).unwrap();
        let exact = free_matrix(1.0, 1.0, PI);
        let m = monodromy_slices(&p, 1.0, 128).unwrap();
        assert!(m.matrix().max_abs_diff(exact.matrix()) < 1e-12);
    }

    #[test]
    fn square_wave_two_factor_product() {
        let (high, low, period) = (2.0, -0.5, 1.7);
        let p = FrequencyProfile::square_wave(high, low, 0.5, period).unwrap();
        let half = period / 2.0;
        let exact = slice_matrix(low, 1.3, half) * slice_matrix(high, 1.3, half);
        for n in [2, 16, 256] {
            let m = monodromy_slices(&p, 1.3, n).unwrap();
            assert!(m.matrix().max_abs_diff(&exact) < 1e-12, "N = {n}");
        }
    }

    #[test]
    fn slices_stay_symplectic() {
        let p = FrequencyProfile::mathieu(0.3, 1.1, 1.5).unwrap();
        for n in [1, 10, 1000, 10000] {
            let m = monodromy_slices(&p, 1.0, n).unwrap();
            let tol = 1e-10 * (n as f64).sqrt() * m.matrix().max_abs().powi(2).max(1.0);
            assert!((m.det() - 1.0).abs() < tol);
        }
    }

    #[test]
    fn rk4_matches_free_motion() {
        let p = FrequencyProfile::constant(2.0, 1.4).unwrap();
        let m = rk4_oracle(&p, 1.0, 10_000).unwrap();
        let exact = free_matrix(1.0, 2.0_f64.sqrt(), 1.4);
        assert!(m.matrix().max_abs_diff(exact.matrix()) < 1e-10);
        assert!((m.det() - 1.0).abs() < 1e-9);
        assert!(rk4_oracle(&p, 1.0, 99).is_err());
    }

    #[test]
    fn converged_constant_stops_at_first_check() {
        let p = FrequencyProfile::constant(1.0, 1.0).unwrap();
        let sp = monodromy_converged(&p, 1.0, 1e-10).unwrap();
        assert_eq!(sp.slices, 2 * INITIAL_SLICES);
        assert_eq!(sp.history.len(), 1);
    }

    #[test]
    fn converged_mathieu_matches_rk4() {
        let p = FrequencyProfile::mathieu(1.0, 0.5, 2.0).unwrap();
        let sp = monodromy_converged(&p, 1.0, 1e-10).unwrap();
        let rk = rk4_oracle(&p, 1.0, 20_000).unwrap();
        assert!(sp.result.matrix().max_abs_diff(rk.matrix()) < 1e-8);
        assert!((sp.result.trace() - rk.trace()).abs() < 1e-8);
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let p = FrequencyProfile::mathieu(1.0, 0.5, 2.0).unwrap();
        let exact = rk4_oracle(&p, 1.0, 20_000).unwrap();
        let err = |n| {
            monodromy_slices(&p, 1.0, n)
                .unwrap()
                .matrix()
                .max_abs_diff(exact.matrix())
        };
        let (e1, e2) = (err(128), err(256));
        assert_abs_diff_eq!(e1 / e2, 4.0, epsilon = 0.2);
    }

    #[test]
    fn mathieu_drive_sign_symmetry() {
        let a = FrequencyProfile::mathieu(1.3, 0.6, 2.0).unwrap();
        let b = FrequencyProfile::mathieu(1.3, -0.6, 2.0).unwrap();
        let ta = monodromy_slices(&a, 1.0, 512).unwrap().trace();
        let tb = monodromy_slices(&b, 1.0, 512).unwrap().trace();
        assert!((ta - tb).abs() < 1e-9);
    }

    #[test]
    fn tongue_tips_without_drive() {
        // √l·T = kπ with T = π: marginal at l = k², elliptic in between
        for k in 1..4 {
            let l = (k * k) as f64;
            let p = FrequencyProfile::mathieu(l, 0.0, 2.0).unwrap();
            let m = monodromy_slices(&p, 1.0, 64).unwrap();
            assert_eq!(classify(&m, 1e-9).regime(), Regime::Marginal);
            let p = FrequencyProfile::mathieu(l + 0.5 * (2 * k + 1) as f64, 0.0, 2.0).unwrap();
            let m = monodromy_slices(&p, 1.0, 64).unwrap();
            assert_eq!(classify(&m, 1e-9).regime(), Regime::Elliptic);
        }
    }

    #[test]
    fn kicked_boundary_by_bisection() {
        let alpha = 0.8;
        let family = |wt: f64| Ok(monodromy_kicked(&KickedParams::dimensionless(1.0, wt, alpha)?));
        let pts = trace_boundary(family, (1e-6, TAU - 1e-6), 64, 1e-13).unwrap();
        let closed = crate::classical::stability_boundary_kicked(alpha);
        assert_eq!(pts.len(), closed.len());
        for (p, c) in pts.iter().zip(&closed) {
            assert!((p.param - c.omega_t).abs() < 1e-9);
            assert_eq!(p.boundary, c.sign);
        }
    }

    #[test]
    fn no_sign_change_is_reported() {
        let family = |wt: f64| Ok(monodromy_kicked(&KickedParams::dimensionless(1.0, wt, 0.0)?));
        assert!(matches!(
            trace_boundary(family, (0.5, 2.5), 8, 1e-10),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn weak_drive_boundaries_approach_resonance() {
        let dl = 1e-3;
        let family = |l: f64| {
            let p = FrequencyProfile::mathieu(l, dl, 2.0)?;
            monodromy_slices(&p, 1.0, 256)
        };
        let pts = trace_boundary(family, (0.5, 1.5), 50, 1e-12).unwrap();
        assert_eq!(pts.len(), 2);
        for p in &pts {
            assert!((p.param - 1.0).abs() < dl);
            assert_eq!(p.boundary, TraceSign::Minus);
        }
    }

    #[test]
    fn csv_ingestion() {
        let text = "t,omega_sq\n0,1.0\n0.5,2.0\n1.0,1.0\n";
        let p = FrequencyProfile::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(p.period(), 1.0);
        assert_abs_diff_eq!(p.omega_sq(0.25), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.omega_sq(1.75), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let bad = "t,omega_sq\n0,1.0\n0.5,abc\n1.0,1.0\n";
        match FrequencyProfile::from_csv_reader(bad.as_bytes()) {
            Err(Error::ProfileParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let unsorted = "t,omega_sq\n0,1.0\n0.5,2\n0.4,1.0\n";
        match FrequencyProfile::from_csv_reader(unsorted.as_bytes()) {
            Err(Error::ProfileParse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let no_header = "0,1.0\n1,1.0\n";
        assert!(matches!(
            FrequencyProfile::from_csv_reader(no_header.as_bytes()),
            Err(Error::ProfileParse { line: 1, .. })
        ));
        let aperiodic = "t,omega_sq\n0,1.0\n1.0,2.0\n";
        assert!(FrequencyProfile::from_csv_reader(aperiodic.as_bytes()).is_err());
    }

    #[test]
    fn inverted_mathieu_warns() {
        let p = FrequencyProfile::mathieu(0.2, 0.5, 2.0).unwrap();
        assert_eq!(p.warnings().len(), 1);
        assert!(FrequencyProfile::mathieu(1.0, 0.5, 2.0).unwrap().warnings().is_empty());
    }
}
