//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and validation errors, 2 for
//! numerical failures (non-convergence, missing boundaries, failed
//! selftest). Errors are reported on stderr as a JSON object.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::chart::{
    boundaries_of, chart_json, sweep, write_boundaries_csv, write_chart_csv, Axis, FamilyKind, MonodromyMethod,
    SweepSpec, DEFAULT_SLICES,
};
use crate::classical::{
    classify, eigenvalue_pair, monodromy_kicked, quadratic_form, KickedParams, Monodromy2, StabilityClass,
};
use crate::error::{Error, Result};
use crate::heff::{heff_from_monodromy_with_band, quadratic_form_proportionality, regime_reduction};
use crate::mat2::Mat2;
use crate::modulation::{monodromy_converged, parse_profile_csv, rk4_oracle, trace_boundary, FrequencyProfile};
use crate::quantum::comb::{build_resonant_eigenstate, comb_overlap, eigen_residual, expected_boundary_moduli};
use crate::quantum::gaussian::{least_squares_slope, GaussianState};
use crate::quantum::spectrum::{
    elliptic_spectrum_with_cap, quasi_energy_spectrum, EllipticSpectrum, QuasiEnergySpectrum, Rationality,
    SpectrumOptions, DEFAULT_DENOMINATOR_CAP,
};
use crate::selftest::{run_selftest, write_report_csv, SelftestConfig, DEFAULT_SEED};

use report::{FieldsBuilder, Field, Format, Report};

pub const SUBCOMMANDS: [&str; 8] = [
    "classify",
    "heff",
    "chart",
    "spectrum",
    "evolve",
    "eigenstate",
    "mathieu-boundary",
    "selftest",
];

#[derive(Debug, Parser)]
#[command(name = "paramres", version, about = "Stability, effective generators and Floquet spectra of parametrically driven oscillators")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Flat `key = value` run file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monodromy matrix, eigenvalues, class and quadratic invariant.
    Classify(ClassifyArgs),
    /// Effective quadratic generator of the one-period map.
    Heff(ClassifyArgs),
    /// Stability chart over a parameter plane.
    Chart(ChartArgs),
    /// Quasi-energy spectrum.
    Spectrum(SpectrumArgs),
    /// Gaussian state propagation.
    Evolve(EvolveArgs),
    /// Resonant comb eigenstate and its residual.
    Eigenstate(EigenstateArgs),
    /// Stability boundaries of the Mathieu family along one parameter.
    MathieuBoundary(MathieuBoundaryArgs),
    /// Runs the built-in acceptance suite.
    Selftest(SelftestArgs),
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn finite(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be finite, got {v}"))
    }
}

fn parse_list<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| finite(p.trim()))
        .collect::<std::result::Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("expected {N} comma-separated numbers"))
}

fn parse_axis(s: &str) -> std::result::Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err("expected name:min:max:points".into());
    }
    let points = parts[3].parse::<usize>().map_err(|e| format!("points: {e}"))?;
    Ok(Axis::new(parts[0], finite(parts[1])?, finite(parts[2])?, points))
}

#[derive(Debug, Clone, Args)]
pub struct KickedArgs {
    #[arg(long, default_value_t = 1.0, value_parser = positive, allow_negative_numbers = true)]
    pub mass: f64,
    #[arg(long, default_value_t = 1.0, value_parser = finite, allow_negative_numbers = true)]
    pub omega: f64,
    /// Drive period.
    #[arg(long = "T", default_value_t = 1.0, value_parser = positive, allow_negative_numbers = true)]
    pub period: f64,
    #[arg(long, default_value_t = 0.0, value_parser = finite, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive, allow_negative_numbers = true)]
    pub hbar: f64,
    /// Sets `T = 2π/ω`.
    #[arg(long)]
    pub resonant: bool,
    /// Explicit one-period map `m11,m12,m21,m22` instead of the kicked one.
    #[arg(long, value_parser = parse_list::<4>, allow_hyphen_values = true)]
    pub matrix: Option<[f64; 4]>,
}

impl KickedArgs {
    fn params(&self) -> Result<KickedParams> {
        let period = if self.resonant {
            if self.omega <= 0.0 {
                return Err(Error::invalid("omega", "--resonant needs ω > 0"));
            }
            TAU / self.omega
        } else {
            self.period
        };
        KickedParams::new(self.mass, self.omega, period, self.alpha, self.hbar)
    }

    fn monodromy(&self) -> Result<(Monodromy2, f64)> {
        let p = self.params()?;
        match self.matrix {
            Some([a, b, c, d]) => Ok((Monodromy2::new(Mat2::new(a, b, c, d))?, p.period)),
            None => Ok((monodromy_kicked(&p), p.period)),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub kicked: KickedArgs,
    /// Half-width of the marginal band around `|Tr M| = 2`.
    #[arg(long, default_value_t = crate::classical::DEFAULT_BAND, value_parser = positive, allow_negative_numbers = true)]
    pub band: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Kicked,
    Mathieu,
    Custom,
}

#[derive(Debug, Clone, Args)]
pub struct ChartArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Kicked)]
    pub family: FamilyArg,
    /// First axis as `name:min:max:points`.
    #[arg(long, value_parser = parse_axis)]
    pub x: Option<Axis>,
    /// Second axis as `name:min:max:points`.
    #[arg(long, value_parser = parse_axis)]
    pub y: Option<Axis>,
    #[arg(long = "omega-t", value_parser = finite, allow_negative_numbers = true)]
    pub omega_t: Option<f64>,
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub l: Option<f64>,
    #[arg(long = "delta-l", value_parser = finite, allow_negative_numbers = true)]
    pub delta_l: Option<f64>,
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub omega0: Option<f64>,
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub offset: Option<f64>,
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub scale: Option<f64>,
    /// Base profile for the custom family (`t,omega_sq` CSV).
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0, value_parser = positive, allow_negative_numbers = true)]
    pub mass: f64,
    #[arg(long, default_value_t = crate::classical::DEFAULT_BAND, value_parser = positive, allow_negative_numbers = true)]
    pub band: f64,
    /// Fixed slice count for modulated families.
    #[arg(long, default_value_t = DEFAULT_SLICES)]
    pub slices: usize,
    /// Refine slices per cell until successive products agree to this.
    #[arg(long = "converge-tol", value_parser = positive, allow_negative_numbers = true)]
    pub converge_tol: Option<f64>,
    /// Emit refined boundary polylines instead of cells.
    #[arg(long)]
    pub boundaries: bool,
    /// Bisection tolerance for boundary points.
    #[arg(long, default_value_t = 1e-12, value_parser = positive, allow_negative_numbers = true)]
    pub tol: f64,
}

impl ChartArgs {
    fn spec(&self) -> Result<SweepSpec> {
        let family = match self.family {
            FamilyArg::Kicked => FamilyKind::Kicked,
            FamilyArg::Mathieu => FamilyKind::Mathieu,
            FamilyArg::Custom => FamilyKind::Custom,
        };
        let (dx, dy) = match family {
            FamilyKind::Kicked => (Axis::new("omega_t", 0.0, TAU, 101), Axis::new("alpha", -2.0, 2.0, 101)),
            FamilyKind::Mathieu => (Axis::new("l", -0.5, 5.0, 111), Axis::new("delta_l", 0.0, 2.0, 81)),
            FamilyKind::Custom => (Axis::new("offset", -1.0, 4.0, 101), Axis::new("scale", 0.0, 2.0, 81)),
        };
        let mut spec = SweepSpec::new(
            family,
            self.x.clone().unwrap_or(dx),
            self.y.clone().unwrap_or(dy),
        );
        let fixed = [
            ("omega_t", self.omega_t),
            ("alpha", self.alpha),
            ("l", self.l),
            ("delta_l", self.delta_l),
            ("omega0", self.omega0),
            ("offset", self.offset),
            ("scale", self.scale),
        ];
        for (name, v) in fixed {
            if let Some(v) = v {
                spec.fixed.insert(name.to_string(), v);
            }
        }
        spec.band = self.band;
        spec.mass = self.mass;
        spec.method = match self.converge_tol {
            Some(tol) => MonodromyMethod::Converged(tol),
            None => MonodromyMethod::Slices(self.slices),
        };
        if let Some(path) = &self.profile {
            let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            spec.profile = Some(parse_profile_csv(file)?);
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// Rotation angle per period; when absent it is taken from the map.
    #[arg(long = "OmegaT", value_parser = positive, allow_negative_numbers = true)]
    pub omega_t: Option<f64>,
    #[command(flatten)]
    pub kicked: KickedArgs,
    #[arg(long = "n-max", default_value_t = 16)]
    pub n_max: usize,
    /// Tolerance of the rationality test `|s·x − r|`.
    #[arg(long, default_value_t = 1e-8, value_parser = positive, allow_negative_numbers = true)]
    pub tol: f64,
    /// Largest denominator tried.
    #[arg(long, default_value_t = DEFAULT_DENOMINATOR_CAP)]
    pub cap: u64,
    #[arg(long, default_value_t = crate::classical::DEFAULT_BAND, value_parser = positive, allow_negative_numbers = true)]
    pub band: f64,
    /// Reference momentum for degenerate partners.
    #[arg(long, default_value_t = 0.0, value_parser = finite, allow_negative_numbers = true)]
    pub p0: f64,
    #[arg(long = "k-max", default_value_t = 4)]
    pub k_max: u64,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub kicked: KickedArgs,
    #[arg(long, default_value_t = 30)]
    pub periods: usize,
    /// Initial mean `x,p`.
    #[arg(long, value_parser = parse_list::<2>, allow_hyphen_values = true)]
    pub mean: Option<[f64; 2]>,
    /// Initial covariance `sxx,sxp,spp`; defaults to the vacuum `(ħ/2)·I`.
    #[arg(long, value_parser = parse_list::<3>, allow_hyphen_values = true)]
    pub cov: Option<[f64; 3]>,
    /// Emit the per-period trajectory.
    #[arg(long)]
    pub trajectory: bool,
    #[arg(long, default_value_t = crate::classical::DEFAULT_BAND, value_parser = positive, allow_negative_numbers = true)]
    pub band: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EigenstateArgs {
    #[arg(long, default_value_t = 1.0, value_parser = finite, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, value_parser = finite, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0, value_parser = finite, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Truncation half-width.
    #[arg(long = "N", default_value_t = 10)]
    pub half_width: usize,
    /// Emit the comb entries.
    #[arg(long)]
    pub entries: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanParam {
    L,
    DeltaL,
    Omega0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryMethod {
    Slices,
    Rk4,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct MathieuBoundaryArgs {
    #[arg(long, value_enum, default_value_t = ScanParam::L)]
    pub scan: ScanParam,
    #[arg(long, default_value_t = -0.5, value_parser = finite, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, default_value_t = 5.0, value_parser = finite, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 1.0, value_parser = finite, allow_negative_numbers = true)]
    pub l: f64,
    #[arg(long = "delta-l", default_value_t = 0.5, value_parser = finite, allow_negative_numbers = true)]
    pub delta_l: f64,
    #[arg(long, default_value_t = 2.0, value_parser = positive, allow_negative_numbers = true)]
    pub omega0: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive, allow_negative_numbers = true)]
    pub mass: f64,
    /// Scan sub-intervals.
    #[arg(long, default_value_t = 220)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-12, value_parser = positive, allow_negative_numbers = true)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = BoundaryMethod::Slices)]
    pub method: BoundaryMethod,
    #[arg(long = "converge-tol", default_value_t = 1e-9, value_parser = positive, allow_negative_numbers = true)]
    pub converge_tol: f64,
    /// RK4 steps per period.
    #[arg(long, default_value_t = 4000)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Random draws for the sampled criteria.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

/// Outcome of a command: the report and, for a failed selftest, the error
/// to signal after writing it.
struct Output {
    report: Report,
    failure: Option<Error>,
}

impl From<Report> for Output {
    fn from(report: Report) -> Self {
        Output { report, failure: None }
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// its output. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config::expand_args(args, &SUBCOMMANDS) {
        Ok(a) => a,
        Err(e) => return report_error(stderr, &e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let body = json!({
                "error": "usage",
                "kind": format!("{:?}", e.kind()),
                "message": e.render().to_string().trim_end(),
            });
            let _ = writeln!(stderr, "{body}");
            return 1;
        }
    };
    let output = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => return report_error(stderr, &e),
    };
    let written = match &cli.output {
        Some(path) => File::create(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                output.report.write(cli.format, &mut w)?;
                w.flush()?;
                Ok(())
            }),
        None => output.report.write(cli.format, &mut *stdout),
    };
    if let Err(e) = written {
        return report_error(stderr, &e);
    }
    match output.failure {
        Some(e) => report_error(stderr, &e),
        None => 0,
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

fn report_error(stderr: &mut dyn Write, e: &Error) -> i32 {
    let code = exit_code(e);
    let body = json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": code,
    });
    let _ = writeln!(stderr, "{body}");
    code
}

fn dispatch(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Classify(a) => cmd_classify(a).map(Into::into),
        Command::Heff(a) => cmd_heff(a).map(Into::into),
        Command::Chart(a) => cmd_chart(a, cli.format).map(Into::into),
        Command::Spectrum(a) => cmd_spectrum(a).map(Into::into),
        Command::Evolve(a) => cmd_evolve(a).map(Into::into),
        Command::Eigenstate(a) => cmd_eigenstate(a).map(Into::into),
        Command::MathieuBoundary(a) => cmd_mathieu_boundary(a).map(Into::into),
        Command::Selftest(a) => cmd_selftest(a, cli.seed, cli.format),
    }
}

fn put_matrix(b: &mut FieldsBuilder, prefix: &str, m: &Mat2) {
    b.put(format!("{prefix}11"), m.m11())
        .put(format!("{prefix}12"), m.m12())
        .put(format!("{prefix}21"), m.m21())
        .put(format!("{prefix}22"), m.m22());
}

fn put_class(b: &mut FieldsBuilder, class: &StabilityClass) {
    b.put("class", class.tag()).put("exponent", class.exponent());
    match *class {
        StabilityClass::Elliptic { omega } => {
            b.put("Omega", omega);
        }
        StabilityClass::Hyperbolic { mu, reflected } => {
            b.put("mu", mu).put("reflected", reflected);
        }
        StabilityClass::Marginal { sign, shearing } => {
            b.put("sign", crate::chart::sign_tag(sign)).put("shearing", shearing);
        }
    }
}

fn put_kicked(b: &mut FieldsBuilder, k: &KickedArgs) -> Result<()> {
    if k.matrix.is_none() {
        let p = k.params()?;
        b.put("mass", p.mass)
            .put("omega", p.omega)
            .put("T", p.period)
            .put("alpha", p.alpha);
    }
    Ok(())
}

pub fn cmd_classify(a: &ClassifyArgs) -> Result<Report> {
    let (m, _) = a.kicked.monodromy()?;
    let class = classify(&m, a.band);
    let (lp, lm) = eigenvalue_pair(&m)?;
    let q = quadratic_form(&m);
    let mut b = FieldsBuilder::new();
    put_kicked(&mut b, &a.kicked)?;
    put_matrix(&mut b, "m", m.matrix());
    b.put("trace", m.trace())
        .put("det", m.det())
        .put("lambda_plus_re", lp.re)
        .put("lambda_plus_im", lp.im)
        .put("lambda_minus_re", lm.re)
        .put("lambda_minus_im", lm.im);
    put_class(&mut b, &class);
    b.put("q_pp", q.q_pp).put("q_xx", q.q_xx).put("q_xp", q.q_xp);
    Ok(b.build())
}

pub fn cmd_heff(a: &ClassifyArgs) -> Result<Report> {
    let (m, period) = a.kicked.monodromy()?;
    let g = heff_from_monodromy_with_band(&m, period, a.kicked.hbar, a.band)?;
    let class = classify(&m, a.band);
    let q = quadratic_form(&m);
    let mut b = FieldsBuilder::new();
    put_kicked(&mut b, &a.kicked)?;
    put_class(&mut b, &class);
    b.put("regime", g.regime.name())
        .put("reflection_factor", g.reflection_factor)
        .put("dsq", g.delta.dsq)
        .put("delta", g.delta.delta)
        .put("u", g.u)
        .put("v", g.v)
        .put("w", g.w);
    put_matrix(&mut b, "g", &g.generator);
    let [ia, ib, ic] = g.exponent_coefficients();
    b.put("a_im", ia)
        .put("b_im", ib)
        .put("c_im", ic)
        .put("omega_eff_sq", regime_reduction(&g).omega_sq)
        .put("phase_per_period", g.phase_per_period())
        .put("reconstruction_error", g.reconstruction_error())
        .put("algebra_defect", g.algebra_defect())
        .put("q_pp", q.q_pp)
        .put("q_xx", q.q_xx)
        .put("q_xp", q.q_xp);
    match quadratic_form_proportionality(&g, &q) {
        Ok(p) => {
            b.put("sigma", p.sigma).put("proportionality_residual", p.residual);
        }
        Err(Error::Indeterminate(_)) => {
            b.put("sigma", f64::NAN).put("proportionality_residual", f64::NAN);
        }
        Err(e) => return Err(e),
    }
    Ok(b.build())
}

pub fn cmd_chart(a: &ChartArgs, format: Format) -> Result<Report> {
    let spec = a.spec()?;
    let chart = sweep(&spec)?;
    let mut buf = Vec::new();
    if a.boundaries {
        let lines = boundaries_of(&chart, a.tol);
        match format {
            Format::Csv => write_boundaries_csv(&lines, &mut buf)?,
            Format::Json => report::write_json(
                &serde_json::to_value(&lines).map_err(|e| Error::Io(e.to_string()))?,
                &mut buf,
            )?,
        }
    } else {
        match format {
            Format::Csv => write_chart_csv(&chart, &mut buf)?,
            Format::Json => report::write_json(&chart_json(&chart), &mut buf)?,
        }
    }
    Ok(Report::Raw(buf))
}

fn put_elliptic(b: &mut FieldsBuilder, s: &EllipticSpectrum) {
    b.put("regime", "elliptic").put("OmegaT", s.omega_t);
    match s.rationality {
        Rationality::Rational { r, s: den } => {
            b.put("rational", true).put("r", r).put("s", den);
        }
        Rationality::Irrational => {
            b.put("rational", false);
        }
    }
    b.put("levels", s.values.len())
        .put("distinct", s.distinct.len())
        .put("max_gap", s.max_gap);
    for (k, (e, members)) in s.distinct.iter().zip(&s.classes).enumerate() {
        let m: Vec<String> = members.iter().map(|n| n.to_string()).collect();
        b.put(format!("epsilon_{k}"), *e).put(format!("members_{k}"), m.join(" "));
    }
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<Report> {
    let mut b = FieldsBuilder::new();
    if let Some(omega_t) = a.omega_t {
        let s = elliptic_spectrum_with_cap(omega_t, a.n_max, a.tol, a.cap)?;
        put_elliptic(&mut b, &s);
        return Ok(b.build());
    }
    let (m, period) = a.kicked.monodromy()?;
    let opts = SpectrumOptions {
        band: a.band,
        n_max: a.n_max,
        tol: a.tol,
        cap: a.cap,
        p0: a.p0,
        k_max: a.k_max,
    };
    match quasi_energy_spectrum(&m, period, a.kicked.hbar, &opts)? {
        QuasiEnergySpectrum::Elliptic(s) => put_elliptic(&mut b, &s),
        QuasiEnergySpectrum::Continuous {
            regime,
            reflected,
            partners,
        } => {
            b.put("regime", regime.name())
                .put("reflected", reflected)
                .put("continuous", true)
                .put("p0", a.p0);
            for p in partners {
                b.put(format!("partner_{}", p.k), p.p_plus);
            }
        }
    }
    Ok(b.build())
}

pub fn cmd_evolve(a: &EvolveArgs) -> Result<Report> {
    let (m, _) = a.kicked.monodromy()?;
    let hbar = a.kicked.hbar;
    let mean = a.mean.unwrap_or([0.0, 0.0]);
    let s0 = match a.cov {
        Some([xx, xp, pp]) => GaussianState::new(mean, Mat2::new(xx, xp, xp, pp), hbar)?,
        None => GaussianState::vacuum(mean, hbar),
    };
    let mut rows = Vec::with_capacity(a.periods + 1);
    let mut s = s0;
    let mut series = Vec::with_capacity(a.periods);
    let row = |n: usize, s: &GaussianState| -> Vec<Field> {
        let c = s.covariance();
        vec![
            n.into(),
            s.mean()[0].into(),
            s.mean()[1].into(),
            c.m11().into(),
            c.m12().into(),
            c.m22().into(),
            s.det_covariance().into(),
        ]
    };
    rows.push(row(0, &s));
    for n in 1..=a.periods {
        s = s.step(&m);
        series.push((n as f64, 0.5 * s.max_eigenvalue().ln()));
        rows.push(row(n, &s));
    }
    if a.trajectory {
        return Ok(Report::table(&["n", "x", "p", "sigma_xx", "sigma_xp", "sigma_pp", "det"], rows));
    }
    let class = classify(&m, a.band);
    let mut b = FieldsBuilder::new();
    put_kicked(&mut b, &a.kicked)?;
    put_class(&mut b, &class);
    b.put("periods", a.periods);
    if matches!(class, StabilityClass::Hyperbolic { .. }) && a.periods >= 4 {
        b.put("fitted_exponent", least_squares_slope(&series[a.periods / 2..]));
    }
    let c = s.covariance();
    b.put("x", s.mean()[0])
        .put("p", s.mean()[1])
        .put("sigma_xx", c.m11())
        .put("sigma_xp", c.m12())
        .put("sigma_pp", c.m22())
        .put("max_variance", s.max_eigenvalue())
        .put("det_initial", s0.det_covariance())
        .put("det_final", s.det_covariance())
        .put("det_drift", (s.det_covariance() - s0.det_covariance()).abs());
    Ok(b.build())
}

pub fn cmd_eigenstate(a: &EigenstateArgs) -> Result<Report> {
    let comb = build_resonant_eigenstate(a.x0, a.mu, a.alpha, a.half_width)?;
    if a.entries {
        let rows = comb
            .entries
            .iter()
            .map(|e| vec![e.index.into(), e.position.into(), e.amplitude.re.into(), e.amplitude.im.into()])
            .collect();
        return Ok(Report::table(&["index", "position", "amplitude_re", "amplitude_im"], rows));
    }
    let r = eigen_residual(&comb)?;
    let (lo, hi) = expected_boundary_moduli(a.alpha, a.half_width);
    let n = a.half_width as i64;
    let modulus = |idx: i64| {
        r.residual
            .iter()
            .find(|e| e.index == idx)
            .map(|e| e.amplitude.norm())
            .unwrap_or(f64::NAN)
    };
    let mut b = FieldsBuilder::new();
    b.put("x0", a.x0)
        .put("mu", comb.mu)
        .put("alpha", a.alpha)
        .put("N", a.half_width)
        .put("entries", comb.entries.len())
        .put("boundary_terms", r.boundary_terms)
        .put("uncancelled_interior", r.uncancelled_interior)
        .put("interior_max_rel", r.interior_max_rel)
        .put("residual_norm_sq", r.residual_norm_sq)
        .put("boundary_low_index", -n)
        .put("boundary_low_modulus", modulus(-n))
        .put("boundary_low_expected", lo)
        .put("boundary_high_index", n + 1)
        .put("boundary_high_modulus", modulus(n + 1))
        .put("boundary_high_expected", hi)
        .put("self_overlap", comb_overlap(&comb, &comb)?.re);
    Ok(b.build())
}

pub fn cmd_mathieu_boundary(a: &MathieuBoundaryArgs) -> Result<Report> {
    let profile = |v: f64| {
        let (l, dl, w0) = match a.scan {
            ScanParam::L => (v, a.delta_l, a.omega0),
            ScanParam::DeltaL => (a.l, v, a.omega0),
            ScanParam::Omega0 => (a.l, a.delta_l, v),
        };
        FrequencyProfile::mathieu(l, dl, w0)
    };
    let by_slices = |v: f64| monodromy_converged(&profile(v)?, a.mass, a.converge_tol).map(|s| s.result);
    let by_rk4 = |v: f64| rk4_oracle(&profile(v)?, a.mass, a.steps);
    let methods: &[BoundaryMethod] = match a.method {
        BoundaryMethod::Both => &[BoundaryMethod::Slices, BoundaryMethod::Rk4],
        ref m => std::slice::from_ref(m),
    };
    let mut rows = Vec::new();
    for &method in methods {
        let points = match method {
            BoundaryMethod::Rk4 => trace_boundary(by_rk4, (a.from, a.to), a.samples, a.tol)?,
            _ => trace_boundary(by_slices, (a.from, a.to), a.samples, a.tol)?,
        };
        let name = if method == BoundaryMethod::Rk4 { "rk4" } else { "slices" };
        for p in points {
            rows.push(vec![
                name.into(),
                p.param.into(),
                crate::chart::sign_tag(p.boundary).into(),
                p.residual.into(),
            ]);
        }
    }
    let scan = match a.scan {
        ScanParam::L => "l",
        ScanParam::DeltaL => "delta_l",
        ScanParam::Omega0 => "omega0",
    };
    Ok(Report::table(&["method", scan, "boundary", "residual"], rows))
}

fn cmd_selftest(a: &SelftestArgs, seed: u64, format: Format) -> Result<Output> {
    if a.samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    let cfg = SelftestConfig {
        seed,
        samples: a.samples,
    };
    let results = run_selftest(&cfg);
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    let report = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_report_csv(&results, &mut buf)?;
            Report::Raw(buf)
        }
        Format::Json => Report::table(
            &["id", "name", "status", "detail"],
            results
                .iter()
                .map(|r| {
                    vec![
                        (r.id as i64).into(),
                        r.name.into(),
                        if r.passed { "pass" } else { "fail" }.into(),
                        r.detail.clone().into(),
                    ]
                })
                .collect(),
        ),
    };
    let failure = (!failed.is_empty())
        .then(|| Error::Indeterminate(format!("selftest criteria failed: {}", failed.join(", "))));
    Ok(Output { report, failure })
}
