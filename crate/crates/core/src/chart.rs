//! Stability charts over two-parameter planes.
//!
//! A sweep evaluates the one-period map on a rectangular grid and classifies
//! every node. Boundaries between stable and unstable cells are refined by
//! bisection along grid edges and chained into polylines.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{classify, free_matrix, kick_matrix, Monodromy2, StabilityClass, TraceSign, DEFAULT_BAND};
use crate::error::{Error, Result};
use crate::modulation::{bisect, monodromy_converged, monodromy_slices, stability_indicator, FrequencyProfile};

/// Default slice count for modulated families.
pub const DEFAULT_SLICES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Axes `omega_t`, `alpha`.
    Kicked,
    /// Axes among `l`, `delta_l`, `omega0`.
    Mathieu,
    /// Axes `offset`, `scale`: `ω²(t) = offset + scale·f(t)` for a sampled `f`.
    Custom,
}

impl FamilyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "kicked" => Ok(FamilyKind::Kicked),
            "mathieu" => Ok(FamilyKind::Mathieu),
            "custom" => Ok(FamilyKind::Custom),
            other => Err(Error::invalid(
                "family",
                format!("unknown family `{other}` (kicked, mathieu, custom)"),
            )),
        }
    }

    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            FamilyKind::Kicked => &["omega_t", "alpha"],
            FamilyKind::Mathieu => &["l", "delta_l", "omega0"],
            FamilyKind::Custom => &["offset", "scale"],
        }
    }

    fn default_value(self, name: &str) -> f64 {
        match (self, name) {
            (FamilyKind::Mathieu, "l") => 1.0,
            (FamilyKind::Mathieu, "omega0") => 2.0,
            (FamilyKind::Custom, "scale") => 1.0,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, min: f64, max: f64, points: usize) -> Self {
        Axis {
            name: name.into(),
            min,
            max,
            points,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }
}

/// How modulated families obtain their monodromy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonodromyMethod {
    Slices(usize),
    Converged(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: FamilyKind,
    pub axis1: Axis,
    pub axis2: Axis,
    pub fixed: BTreeMap<String, f64>,
    pub band: f64,
    pub mass: f64,
    pub method: MonodromyMethod,
    /// Base profile `f(t)` for the custom family.
    pub profile: Option<Vec<(f64, f64)>>,
}

impl SweepSpec {
    pub fn new(family: FamilyKind, axis1: Axis, axis2: Axis) -> Self {
        SweepSpec {
            family,
            axis1,
            axis2,
            fixed: BTreeMap::new(),
            band: DEFAULT_BAND,
            mass: 1.0,
            method: MonodromyMethod::Slices(DEFAULT_SLICES),
            profile: None,
        }
    }

    pub fn kicked(omega_t: (f64, f64, usize), alpha: (f64, f64, usize)) -> Self {
        SweepSpec::new(
            FamilyKind::Kicked,
            Axis::new("omega_t", omega_t.0, omega_t.1, omega_t.2),
            Axis::new("alpha", alpha.0, alpha.1, alpha.2),
        )
    }

    pub fn with_fixed(mut self, name: &str, value: f64) -> Self {
        self.fixed.insert(name.to_string(), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let names = self.family.parameters();
        for axis in [&self.axis1, &self.axis2] {
            if !names.contains(&axis.name.as_str()) {
                return Err(Error::invalid(
                    "axis",
                    format!("`{}` is not a parameter of this family ({})", axis.name, names.join(", ")),
                ));
            }
            if axis.points < 2 {
                return Err(Error::invalid("resolution", format!("axis `{}` needs at least 2 points", axis.name)));
            }
            if !(axis.min.is_finite() && axis.max.is_finite() && axis.max > axis.min) {
                return Err(Error::invalid(
                    "range",
                    format!("axis `{}` has degenerate range [{}, {}]", axis.name, axis.min, axis.max),
                ));
            }
        }
        if self.axis1.name == self.axis2.name {
            return Err(Error::invalid("axis", "the two axes must differ"));
        }
        for (k, v) in &self.fixed {
            if !names.contains(&k.as_str()) {
                return Err(Error::invalid("fixed", format!("`{k}` is not a parameter of this family")));
            }
            if !v.is_finite() {
                return Err(Error::invalid("fixed", format!("`{k}` must be finite")));
            }
        }
        if !(self.band > 0.0 && self.band < 1.0) {
            return Err(Error::invalid("band", "must lie in (0, 1)"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid("mass", "must be positive"));
        }
        match self.method {
            MonodromyMethod::Slices(0) => return Err(Error::invalid("slices", "need at least one slice")),
            MonodromyMethod::Converged(tol) if !(tol > 0.0) => {
                return Err(Error::invalid("tol", "must be positive"))
            }
            _ => {}
        }
        if self.family == FamilyKind::Custom && self.profile.is_none() {
            return Err(Error::invalid("profile", "the custom family needs a sampled profile"));
        }
        Ok(())
    }

    fn param(&self, name: &str, p1: f64, p2: f64) -> f64 {
        if self.axis1.name == name {
            p1
        } else if self.axis2.name == name {
            p2
        } else {
            self.fixed
                .get(name)
                .copied()
                .unwrap_or_else(|| self.family.default_value(name))
        }
    }

    /// One-period map at axis values `(p1, p2)`.
    pub fn monodromy_at(&self, p1: f64, p2: f64) -> Result<Monodromy2> {
        match self.family {
            FamilyKind::Kicked => {
                let wt = self.param("omega_t", p1, p2);
                let alpha = self.param("alpha", p1, p2);
                Ok(free_matrix(1.0, 1.0, wt).compose(&kick_matrix(alpha)))
            }
            FamilyKind::Mathieu => {
                let profile = FrequencyProfile::mathieu(
                    self.param("l", p1, p2),
                    self.param("delta_l", p1, p2),
                    self.param("omega0", p1, p2),
                )?;
                self.modulated(&profile)
            }
            FamilyKind::Custom => {
                let offset = self.param("offset", p1, p2);
                let scale = self.param("scale", p1, p2);
                let base = self
                    .profile
                    .as_ref()
                    .ok_or_else(|| Error::invalid("profile", "missing"))?;
                let samples = base.iter().map(|&(t, f)| (t, offset + scale * f)).collect();
                self.modulated(&FrequencyProfile::sampled(samples)?)
            }
        }
    }

    fn modulated(&self, profile: &FrequencyProfile) -> Result<Monodromy2> {
        match self.method {
            MonodromyMethod::Slices(n) => monodromy_slices(profile, self.mass, n),
            MonodromyMethod::Converged(tol) => monodromy_converged(profile, self.mass, tol).map(|s| s.result),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellClass {
    Elliptic,
    Hyperbolic,
    HyperbolicReflected,
    Marginal,
    Error,
}

impl CellClass {
    pub fn tag(self) -> &'static str {
        match self {
            CellClass::Elliptic => "elliptic",
            CellClass::Hyperbolic => "hyperbolic",
            CellClass::HyperbolicReflected => "hyperbolic_reflected",
            CellClass::Marginal => "marginal",
            CellClass::Error => "error",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            CellClass::Elliptic,
            CellClass::Hyperbolic,
            CellClass::HyperbolicReflected,
            CellClass::Marginal,
            CellClass::Error,
        ]
        .into_iter()
        .find(|c| c.tag() == s)
    }

    fn of(class: &StabilityClass) -> Self {
        match class {
            StabilityClass::Elliptic { .. } => CellClass::Elliptic,
            StabilityClass::Hyperbolic { reflected: false, .. } => CellClass::Hyperbolic,
            StabilityClass::Hyperbolic { reflected: true, .. } => CellClass::HyperbolicReflected,
            StabilityClass::Marginal { .. } => CellClass::Marginal,
        }
    }

    pub fn is_stable(self) -> bool {
        self == CellClass::Elliptic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartCell {
    pub param1: f64,
    pub param2: f64,
    pub class: CellClass,
    /// `Ω`, `μ`, zero, or NaN for error cells.
    pub exponent: f64,
    /// `Tr M`, NaN for error cells.
    pub trace: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub spec: SweepSpec,
    /// Row-major: `cells[j * axis1.points + i]` sits at `(axis1[i], axis2[j])`.
    pub cells: Vec<ChartCell>,
}

impl Chart {
    pub fn cell(&self, i: usize, j: usize) -> &ChartCell {
        &self.cells[j * self.spec.axis1.points + i]
    }
}

fn evaluate(spec: &SweepSpec, p1: f64, p2: f64) -> ChartCell {
    match spec.monodromy_at(p1, p2) {
        Ok(m) => {
            let class = classify(&m, spec.band);
            ChartCell {
                param1: p1,
                param2: p2,
                class: CellClass::of(&class),
                exponent: class.exponent(),
                trace: m.trace(),
                error: None,
            }
        }
        Err(e) => ChartCell {
            param1: p1,
            param2: p2,
            class: CellClass::Error,
            exponent: f64::NAN,
            trace: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

/// Classifies every grid node. Cells are evaluated in parallel and assembled
/// in row-major order, axis 2 outer.
pub fn sweep(spec: &SweepSpec) -> Result<Chart> {
    spec.validate()?;
    let (n1, n2) = (spec.axis1.points, spec.axis2.points);
    let v1 = spec.axis1.values();
    let v2 = spec.axis2.values();
    let cells = (0..n1 * n2)
        .into_par_iter()
        .map(|k| evaluate(spec, v1[k % n1], v2[k / n1]))
        .collect();
    Ok(Chart {
        spec: spec.clone(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinedPoint {
    pub param1: f64,
    pub param2: f64,
    pub sign: TraceSign,
    /// `|Tr M|/2 − 1` at the point.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub sign: TraceSign,
    pub points: Vec<RefinedPoint>,
    pub closed: bool,
}

/// Grid edge between node `(i, j)` and its right (`vertical == false`) or
/// upper neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Edge {
    i: usize,
    j: usize,
    vertical: bool,
}

impl Edge {
    /// Grid squares `(i, j)` (lower-left node) touching this edge.
    fn squares(&self, n1: usize, n2: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(2);
        if self.vertical {
            if self.i > 0 {
                out.push((self.i - 1, self.j));
            }
            if self.i + 1 < n1 {
                out.push((self.i, self.j));
            }
        } else {
            if self.j > 0 {
                out.push((self.i, self.j - 1));
            }
            if self.j + 1 < n2 {
                out.push((self.i, self.j));
            }
        }
        out
    }
}

/// Boundary polylines of a sweep.
///
/// Every grid edge whose endpoints straddle `|Tr M| = 2` is bisected to
/// `tol` along that edge. Points on edges of a common grid square and on the
/// same line `Tr M = ±2` are linked; maximal chains through points with
/// exactly two links form the polylines, so junctions end chains.
pub fn tongue_boundaries(spec: &SweepSpec, tol: f64) -> Result<Vec<Polyline>> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let chart = sweep(spec)?;
    Ok(boundaries_of(&chart, tol))
}

pub fn boundaries_of(chart: &Chart, tol: f64) -> Vec<Polyline> {
    let spec = &chart.spec;
    let (n1, n2) = (spec.axis1.points, spec.axis2.points);
    let indicator = |i: usize, j: usize| {
        let c = chart.cell(i, j);
        0.5 * c.trace.abs() - 1.0
    };
    let mut edges = Vec::new();
    for j in 0..n2 {
        for i in 0..n1 {
            let f = indicator(i, j);
            if i + 1 < n1 && straddles(f, indicator(i + 1, j)) {
                edges.push(Edge { i, j, vertical: false });
            }
            if j + 1 < n2 && straddles(f, indicator(i, j + 1)) {
                edges.push(Edge { i, j, vertical: true });
            }
        }
    }
    let refined: Vec<Option<RefinedPoint>> = edges.par_iter().map(|e| refine_edge(spec, e, tol)).collect();
    let nodes: Vec<(Edge, RefinedPoint)> = edges
        .into_iter()
        .zip(refined)
        .filter_map(|(e, p)| p.map(|p| (e, p)))
        .collect();

    let mut by_square: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, (e, _)) in nodes.iter().enumerate() {
        for sq in e.squares(n1, n2) {
            by_square.entry(sq).or_default().push(k);
        }
    }
    let mut links: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for members in by_square.values() {
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                if nodes[a].1.sign == nodes[b].1.sign {
                    links[a].push(b);
                    links[b].push(a);
                }
            }
        }
    }
    for l in &mut links {
        l.sort_unstable();
        l.dedup();
    }
    chain(&nodes, &links)
}

fn straddles(a: f64, b: f64) -> bool {
    a.is_finite() && b.is_finite() && (a < 0.0) != (b < 0.0)
}

fn refine_edge(spec: &SweepSpec, e: &Edge, tol: f64) -> Option<RefinedPoint> {
    let (a1, a2) = (&spec.axis1, &spec.axis2);
    let point = |s: f64| {
        if e.vertical {
            (a1.value(e.i), s)
        } else {
            (s, a2.value(e.j))
        }
    };
    let (lo, hi) = if e.vertical {
        (a2.value(e.j), a2.value(e.j + 1))
    } else {
        (a1.value(e.i), a1.value(e.i + 1))
    };
    let f = |s: f64| {
        let (p1, p2) = point(s);
        spec.monodromy_at(p1, p2).map(|m| stability_indicator(&m))
    };
    let s = bisect(f, lo, hi, tol).ok()?;
    let (p1, p2) = point(s);
    let m = spec.monodromy_at(p1, p2).ok()?;
    Some(RefinedPoint {
        param1: p1,
        param2: p2,
        sign: TraceSign::of(m.trace()),
        residual: stability_indicator(&m),
    })
}

fn chain(nodes: &[(Edge, RefinedPoint)], links: &[Vec<usize>]) -> Vec<Polyline> {
    let mut used_link = std::collections::BTreeSet::new();
    let mut visited = vec![false; nodes.len()];
    let mut lines = Vec::new();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let walk = |start: usize, next: usize, used: &mut std::collections::BTreeSet<(usize, usize)>, visited: &mut [bool]| {
        let mut path = vec![start];
        used.insert(key(start, next));
        let (mut prev, mut cur) = (start, next);
        loop {
            path.push(cur);
            visited[cur] = true;
            if links[cur].len() != 2 || cur == start {
                break;
            }
            let nxt = if links[cur][0] == prev { links[cur][1] } else { links[cur][0] };
            if used.contains(&key(cur, nxt)) {
                break;
            }
            used.insert(key(cur, nxt));
            prev = cur;
            cur = nxt;
        }
        path
    };
    // open chains and junction branches
    for start in 0..nodes.len() {
        if links[start].len() == 2 {
            continue;
        }
        visited[start] = true;
        if links[start].is_empty() {
            lines.push(vec![start]);
            continue;
        }
        for &next in &links[start] {
            if !used_link.contains(&key(start, next)) {
                lines.push(walk(start, next, &mut used_link, &mut visited));
            }
        }
    }
    // closed loops
    for start in 0..nodes.len() {
        if !visited[start] {
            visited[start] = true;
            let next = links[start][0];
            lines.push(walk(start, next, &mut used_link, &mut visited));
        }
    }
    lines
        .into_iter()
        .map(|path| Polyline {
            sign: nodes[path[0]].1.sign,
            closed: path.len() > 2 && path.first() == path.last(),
            points: path.iter().map(|&k| nodes[k].1).collect(),
        })
        .collect()
}

fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NaN".to_string()
    }
}

pub const CHART_CSV_HEADER: [&str; 5] = ["param1", "param2", "class", "exponent", "trace"];

pub fn write_chart_csv<W: Write>(chart: &Chart, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CHART_CSV_HEADER).map_err(csv_err)?;
    for c in &chart.cells {
        w.write_record([
            fmt_float(c.param1),
            fmt_float(c.param2),
            c.class.tag().to_string(),
            fmt_float(c.exponent),
            fmt_float(c.trace),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn json_float(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::Value::from(v)
    } else {
        serde_json::Value::Null
    }
}

pub fn chart_json(chart: &Chart) -> serde_json::Value {
    let cells = chart
        .cells
        .iter()
        .map(|c| {
            let mut obj = serde_json::Map::new();
            obj.insert("param1".into(), json_float(c.param1));
            obj.insert("param2".into(), json_float(c.param2));
            obj.insert("class".into(), c.class.tag().into());
            obj.insert("exponent".into(), json_float(c.exponent));
            obj.insert("trace".into(), json_float(c.trace));
            if let Some(e) = &c.error {
                obj.insert("error".into(), e.clone().into());
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    serde_json::Value::Array(cells)
}

pub fn write_chart_json<W: Write>(chart: &Chart, mut out: W) -> Result<()> {
    serde_json::to_writer(&mut out, &chart_json(chart)).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// `(param1, param2, class, exponent, trace)` as read back from CSV.
pub type ChartRow = (f64, f64, CellClass, f64, f64);

pub fn read_chart_csv<R: std::io::Read>(input: R) -> Result<Vec<ChartRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != CHART_CSV_HEADER {
        return Err(Error::Io(format!("unexpected chart header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Io(format!("bad float `{s}`: {e}")));
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let class = CellClass::parse(&rec[2]).ok_or_else(|| Error::Io(format!("bad class `{}`", &rec[2])))?;
            Ok((num(&rec[0])?, num(&rec[1])?, class, num(&rec[3])?, num(&rec[4])?))
        })
        .collect()
}

pub fn write_boundaries_csv<W: Write>(lines: &[Polyline], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["polyline", "point", "param1", "param2", "sign", "residual"])
        .map_err(csv_err)?;
    for (k, line) in lines.iter().enumerate() {
        for (n, p) in line.points.iter().enumerate() {
            w.write_record([
                k.to_string(),
                n.to_string(),
                fmt_float(p.param1),
                fmt_float(p.param2),
                sign_tag(p.sign).to_string(),
                fmt_float(p.residual),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn sign_tag(s: TraceSign) -> &'static str {
    match s {
        TraceSign::Plus => "+",
        TraceSign::Minus => "-",
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
