//! Built-in acceptance suite.
//!
//! Every criterion draws its random samples from its own ChaCha stream
//! seeded by `(seed, id)`, so results and report bytes depend only on the
//! seed.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::{sweep, write_chart_csv, CellClass, FamilyKind, SweepSpec, Axis, MonodromyMethod};
use crate::classical::{
    classify, monodromy_kicked, quadratic_form, stability_boundary_kicked, KickedParams, Monodromy2, Regime,
    DEFAULT_BAND,
};
use crate::error::{Error, Result};
use crate::heff::{delta_direct, delta_series, heff_from_monodromy, quadratic_form_proportionality};
use crate::modulation::{monodromy_converged, monodromy_slices, rk4_oracle, trace_boundary, FrequencyProfile};
use crate::quantum::comb::{
    build_resonant_eigenstate, comb_overlap, dirichlet_kernel, eigen_residual, expected_boundary_moduli,
};
use crate::quantum::gaussian::{propagate_gaussian, variance_growth_exponent, GaussianState};
use crate::quantum::spectrum::{elliptic_spectrum, marginal_floquet_phase, marginal_partners, Rationality};
use crate::mat2::Mat2;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Random draws for the sampled criteria.
    pub samples: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            seed: DEFAULT_SEED,
            samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "symplecticity"),
    (2, "classification_oracle"),
    (3, "generator_reconstruction"),
    (4, "delta_continuity"),
    (5, "quadratic_form_invariance"),
    (6, "slice_product_convergence"),
    (7, "boundary_dual_method"),
    (8, "hyperbolic_growth"),
    (9, "comb_eigenstate"),
    (10, "spectrum_structure"),
    (11, "determinism"),
];

fn rng_for(cfg: &SelftestConfig, id: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ id as u64)
}

pub fn run_selftest(cfg: &SelftestConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id, cfg)).collect()
}

pub fn run_criterion(id: u8, cfg: &SelftestConfig) -> CriterionResult {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .unwrap_or("unknown");
    let outcome = match id {
        1 => symplecticity(cfg),
        2 => classification_oracle(),
        3 => generator_reconstruction(cfg),
        4 => delta_continuity(),
        5 => quadratic_form_invariance(cfg),
        6 => slice_product_convergence(),
        7 => boundary_dual_method(),
        8 => hyperbolic_growth(),
        9 => comb_eigenstate(cfg),
        10 => spectrum_structure(cfg),
        11 => determinism(cfg),
        _ => Err(Error::invalid("id", format!("no criterion {id}"))),
    };
    let (passed, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name,
        passed,
        detail,
    }
}

type Outcome = Result<(bool, String)>;

fn random_kicked(rng: &mut ChaCha8Rng) -> KickedParams {
    KickedParams::new(
        rng.gen_range(0.2..5.0),
        rng.gen_range(0.1..5.0),
        rng.gen_range(0.1..10.0),
        rng.gen_range(-2.0..2.0),
        1.0,
    )
    .expect("sampled parameters are in range")
}

fn symplecticity(cfg: &SelftestConfig) -> Outcome {
    let mut rng = rng_for(cfg, 1);
    let (mut worst_lambda, mut worst_det) = (0.0_f64, 0.0_f64);
    for _ in 0..cfg.samples {
        let m = monodromy_kicked(&random_kicked(&mut rng));
        worst_lambda = worst_lambda.max(m.symplectic_defect());
        worst_det = worst_det.max((m.det() - 1.0).abs());
    }
    Ok((
        worst_lambda < 1e-12 && worst_det < 1e-12,
        format!("max |MᵀΛM−Λ| = {worst_lambda:.3e}, max |det−1| = {worst_det:.3e}"),
    ))
}

fn classification_oracle() -> Outcome {
    let spec = SweepSpec::kicked((0.0, TAU, 200), (-2.0, 2.0, 200));
    let chart = sweep(&spec)?;
    let (mut checked, mut wrong) = (0usize, 0usize);
    for c in &chart.cells {
        let s = (c.param2.cosh() * c.param1.cos()).abs() - 1.0;
        if s.abs() <= 1e-9 {
            continue;
        }
        checked += 1;
        let unstable = matches!(c.class, CellClass::Hyperbolic | CellClass::HyperbolicReflected);
        if unstable != (s > 0.0) || c.class == CellClass::Marginal {
            wrong += 1;
        }
    }
    Ok((wrong == 0, format!("{checked} cells outside the margin, {wrong} disagreements")))
}

fn generator_reconstruction(cfg: &SelftestConfig) -> Outcome {
    let mut rng = rng_for(cfg, 3);
    let (mut worst, mut reflected, mut used) = (0.0_f64, 0usize, 0usize);
    while used < cfg.samples {
        let m = monodromy_kicked(&random_kicked(&mut rng));
        if (m.half_trace().abs() - 1.0).abs() <= DEFAULT_BAND {
            continue;
        }
        let g = heff_from_monodromy(&m, 1.0, 1.0)?;
        worst = worst.max(g.reconstruction_error());
        reflected += g.reflection_factor as usize;
        used += 1;
    }
    Ok((
        worst < 1e-10,
        format!("max |exp(G) − (±M)| = {worst:.3e} over {used} points ({reflected} with −I split off)"),
    ))
}

fn delta_continuity() -> Outcome {
    let mut worst = 0.0_f64;
    for dsq in [1e-4, -1e-4] {
        worst = worst.max((delta_direct(dsq) - delta_series(dsq)).abs());
    }
    let at_zero = crate::heff::delta_of_dsq(0.0)?;
    Ok((
        worst < 1e-12 && at_zero == 1.0,
        format!("|direct − series| at |D²| = 1e-4: {worst:.3e}; Δ(0) = {at_zero}"),
    ))
}

fn quadratic_form_invariance(cfg: &SelftestConfig) -> Outcome {
    let mut rng = rng_for(cfg, 5);
    let (mut worst_ratio, mut worst_prop) = (0.0_f64, 0.0_f64);
    let (mut elliptic, mut marginal) = (0, 0);
    let points = (cfg.samples / 50).max(20);
    for k in 0..points {
        let alpha: f64 = rng.gen_range(-2.0..2.0);
        let m = if k % 2 == 0 {
            let wt = loop {
                let wt: f64 = rng.gen_range(0.0..TAU);
                if (alpha.cosh() * wt.cos()).abs() < 0.999 {
                    break wt;
                }
            };
            elliptic += 1;
            monodromy_kicked(&KickedParams::dimensionless(1.0, wt, alpha)?)
        } else {
            let root = stability_boundary_kicked(alpha);
            let pick = &root[rng.gen_range(0..root.len())];
            marginal += 1;
            monodromy_kicked(&KickedParams::dimensionless(1.0, pick.omega_t.max(1e-3), alpha)?)
        };
        let regime = classify(&m, DEFAULT_BAND).regime();
        if regime == Regime::Hyperbolic {
            return Err(Error::Indeterminate("sampled point left the elliptic/marginal set".into()));
        }
        let q = quadratic_form(&m);
        let qn = q.as_array().iter().map(|v| v * v).sum::<f64>().sqrt();
        for _ in 0..5 {
            let z = loop {
                let z = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                if q.eval(z).abs() > 1e-3 * qn * (z[0] * z[0] + z[1] * z[1]) {
                    break z;
                }
            };
            let q0 = q.eval(z);
            let mut zn = z;
            for _ in 0..50 {
                zn = m.matrix().apply(zn);
                worst_ratio = worst_ratio.max((q.eval(zn) / q0 - 1.0).abs());
            }
        }
        let g = heff_from_monodromy(&m, 1.0, 1.0)?;
        worst_prop = worst_prop.max(quadratic_form_proportionality(&g, &q)?.residual);
    }
    Ok((
        worst_ratio < 1e-8 && worst_prop < 1e-10,
        format!(
            "max |Q(Mⁿz)/Q(z) − 1| = {worst_ratio:.3e}, max proportionality residual = {worst_prop:.3e} ({elliptic} elliptic, {marginal} marginal)"
        ),
    ))
}

fn slice_product_convergence() -> Outcome {
    let profile = FrequencyProfile::mathieu(1.0, 0.5, 2.0)?;
    let oracle = rk4_oracle(&profile, 1.0, 20_000)?;
    let converged = monodromy_converged(&profile, 1.0, 1e-9)?;
    let err_conv = converged.result.matrix().max_abs_diff(oracle.matrix());
    let errs = [64usize, 128, 256, 512]
        .iter()
        .map(|&n| monodromy_slices(&profile, 1.0, n).map(|m| m.matrix().max_abs_diff(oracle.matrix())))
        .collect::<Result<Vec<_>>>()?;
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = err_conv < 1e-8 && orders.iter().all(|p| (1.8..=2.2).contains(p));
    Ok((
        ok,
        format!(
            "|M_slices − M_rk4| = {err_conv:.3e} at N = {}; orders {:.3} {:.3} {:.3}",
            converged.slices, orders[0], orders[1], orders[2]
        ),
    ))
}

fn boundary_dual_method() -> Outcome {
    let mut worst_kicked = 0.0_f64;
    for alpha in [-1.3, 0.3, 0.8, 1.7] {
        let family = |wt: f64| Ok(monodromy_kicked(&KickedParams::dimensionless(1.0, wt, alpha)?));
        let found = trace_boundary(family, (1e-6, TAU - 1e-6), 64, 1e-13)?;
        let closed = stability_boundary_kicked(alpha);
        if found.len() != closed.len() {
            return Ok((false, format!("α = {alpha}: {} roots vs {} closed-form", found.len(), closed.len())));
        }
        for (f, c) in found.iter().zip(&closed) {
            worst_kicked = worst_kicked.max((f.param - c.omega_t).abs());
        }
    }
    let (dl, w0) = (0.5, 2.0);
    let by_slices = |l: f64| {
        let p = FrequencyProfile::mathieu(l, dl, w0)?;
        monodromy_converged(&p, 1.0, 1e-9).map(|s| s.result)
    };
    let by_rk4 = |l: f64| rk4_oracle(&FrequencyProfile::mathieu(l, dl, w0)?, 1.0, 4000);
    let a = trace_boundary(by_slices, (-0.5, 5.0), 220, 1e-12)?;
    let b = trace_boundary(by_rk4, (-0.5, 5.0), 220, 1e-12)?;
    if a.len() != b.len() {
        return Ok((false, format!("Mathieu: {} vs {} boundary points", a.len(), b.len())));
    }
    let worst_mathieu = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x.param - y.param).abs())
        .fold(0.0, f64::max);
    Ok((
        worst_kicked < 1e-9 && worst_mathieu < 1e-6,
        format!(
            "kicked |bisection − closed form| = {worst_kicked:.3e}; Mathieu |slices − rk4| = {worst_mathieu:.3e} over {} points",
            a.len()
        ),
    ))
}

fn hyperbolic_growth() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (wt, alpha) in [(TAU, 1.0), (TAU, 0.5), (2.8, 1.2)] {
        let m = monodromy_kicked(&KickedParams::dimensionless(1.0, wt, alpha)?);
        let mu = classify(&m, DEFAULT_BAND).exponent();
        let fit = variance_growth_exponent(&m, 30)?;
        let rel = (fit - mu).abs() / mu;
        ok &= rel < 0.01;
        details.push(format!("{rel:.2e}"));
    }
    let s0 = GaussianState::new([0.3, -0.2], Mat2::new(0.9, 0.1, 0.1, 0.6), 1.0)?;
    let marginal_wt = (1.0 / 0.7_f64.cosh()).acos();
    let maps: [(f64, f64); 5] = [(1.0, 0.3), (TAU, 1.0), (PI, 1.0), (marginal_wt, 0.7), (TAU, 0.0)];
    let mut drift = 0.0_f64;
    for (wt, alpha) in maps {
        let m: Monodromy2 = monodromy_kicked(&KickedParams::dimensionless(1.0, wt, alpha)?);
        let s = propagate_gaussian(&s0, &m, 50);
        drift = drift.max((s.det_covariance() - s0.det_covariance()).abs());
    }
    ok &= drift < 1e-10;
    Ok((
        ok,
        format!("relative exponent errors {}; max det Σ drift = {drift:.3e}", details.join(" ")),
    ))
}

fn comb_eigenstate(cfg: &SelftestConfig) -> Outcome {
    let mut rng = rng_for(cfg, 9);
    let (mut interior, mut moduli, mut distinct_x0, mut dirichlet) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut structure_ok = true;
    for alpha in [0.3_f64, 1.0, 2.0] {
        for n in [5usize, 20] {
            let top = alpha.exp();
            let x0 = rng.gen_range(1.0..top);
            let mu = rng.gen_range(0.0..TAU);
            let comb = build_resonant_eigenstate(x0, mu, alpha, n)?;
            let r = eigen_residual(&comb)?;
            interior = interior.max(r.interior_max_rel);
            structure_ok &= r.boundary_terms == 2 && r.uncancelled_interior == 0 && r.residual.len() == 2;
            let (lo, hi) = expected_boundary_moduli(alpha, n);
            let got_lo = r.residual.iter().find(|e| e.index == -(n as i64));
            let got_hi = r.residual.iter().find(|e| e.index == n as i64 + 1);
            match (got_lo, got_hi) {
                (Some(a), Some(b)) => {
                    moduli = moduli
                        .max((a.amplitude.norm() - lo).abs() / lo)
                        .max((b.amplitude.norm() - hi).abs() / hi);
                }
                _ => structure_ok = false,
            }

            let x1 = -rng.gen_range(1.0..top);
            let labels = [(x0, mu), (x0, rng.gen_range(0.0..TAU)), (x1, mu), (x1, rng.gen_range(0.0..TAU))];
            let combs = labels
                .iter()
                .map(|&(x, m)| build_resonant_eigenstate(x, m, alpha, n))
                .collect::<Result<Vec<_>>>()?;
            for (a, ca) in labels.iter().zip(&combs) {
                for (b, cb) in labels.iter().zip(&combs) {
                    let o = comb_overlap(ca, cb)?;
                    if a.0 == b.0 {
                        let want = dirichlet_kernel(b.1 - a.1, n);
                        dirichlet = dirichlet.max((o.re - want).abs()).max(o.im.abs());
                    } else {
                        distinct_x0 = distinct_x0.max(o.norm());
                    }
                }
            }
        }
    }
    let ok = structure_ok && interior <= 1e-15 && moduli < 1e-12 && distinct_x0 == 0.0 && dirichlet < 1e-12;
    Ok((
        ok,
        format!(
            "interior {interior:.3e}, boundary moduli {moduli:.3e} (relative), distinct x0 {distinct_x0:.1e}, Dirichlet {dirichlet:.3e}"
        ),
    ))
}

fn spectrum_structure(cfg: &SelftestConfig) -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for (r, s) in [(1u64, 3u64), (2, 5)] {
        let omega_t = TAU * r as f64 / s as f64;
        let spec = elliptic_spectrum(omega_t, 4 * s as usize + 2, 1e-9)?;
        let rational = spec.rationality == Rationality::Rational { r, s };
        let mut predicted: Vec<f64> = (0..s)
            .map(|nu| (PI * r as f64 * (2 * nu + 1) as f64 / s as f64).rem_euclid(TAU))
            .collect();
        predicted.sort_by(f64::total_cmp);
        let values_ok = spec.distinct.len() == s as usize
            && spec
                .distinct
                .iter()
                .zip(&predicted)
                .all(|(a, b)| (a - b).abs() < 1e-9);
        let classes_ok = spec.classes.iter().zip(&spec.distinct).all(|(members, &e)| {
            let nu = members[0] % s as usize;
            members.iter().all(|&n| n % s as usize == nu && (spec.values[n] - e).abs() < 1e-9)
        }) && spec.classes.iter().map(|c| c.len()).sum::<usize>() == spec.values.len();
        ok &= rational && values_ok && classes_ok;
        details.push(format!("{r}/{s}: {} distinct", spec.distinct.len()));
    }
    let mut rng = rng_for(cfg, 10);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let (p0, period, hbar) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.2..5.0), rng.gen_range(0.1..2.0));
        let reference = marginal_floquet_phase(p0, period, hbar);
        for p in marginal_partners(p0, period, hbar, 10)? {
            for q in [p.p_plus, p.p_minus] {
                worst = worst.max((marginal_floquet_phase(q, period, hbar) - reference).norm());
            }
        }
    }
    ok &= worst < 1e-12;
    Ok((ok, format!("{}; marginal partner phase spread {worst:.3e}", details.join(", "))))
}

/// Chart bytes and the report of the other criteria, each produced twice.
fn determinism(cfg: &SelftestConfig) -> Outcome {
    let render_chart = |spec: &SweepSpec| -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_chart_csv(&sweep(spec)?, &mut buf)?;
        Ok(buf)
    };
    let kicked = SweepSpec::kicked((0.0, TAU, 120), (-2.0, 2.0, 120));
    let mut mathieu = SweepSpec::new(
        FamilyKind::Mathieu,
        Axis::new("l", 0.0, 3.0, 40),
        Axis::new("delta_l", 0.0, 1.5, 30),
    );
    mathieu.method = MonodromyMethod::Slices(256);
    let charts_equal = render_chart(&kicked)? == render_chart(&kicked)?
        && render_chart(&mathieu)? == render_chart(&mathieu)?;
    let quick = SelftestConfig {
        samples: cfg.samples.min(500),
        ..*cfg
    };
    let render_report = || -> Result<Vec<u8>> {
        let results: Vec<CriterionResult> = [1u8, 3, 5, 9, 10].iter().map(|&id| run_criterion(id, &quick)).collect();
        let mut buf = Vec::new();
        write_report_csv(&results, &mut buf)?;
        Ok(buf)
    };
    let report_equal = render_report()? == render_report()?;
    Ok((
        charts_equal && report_equal,
        format!("charts identical: {charts_equal}; seeded report identical: {report_equal}"),
    ))
}

pub fn write_report_csv<W: Write>(results: &[CriterionResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["id", "name", "status", "detail"]).map_err(io)?;
    for r in results {
        w.write_record([
            r.id.to_string(),
            r.name.to_string(),
            if r.passed { "pass" } else { "fail" }.to_string(),
            r.detail.clone(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
