//! Reproducible numerical studies that emit CSV tables.
//!
//! Every study is driven by an [`ExperimentConfig`], a flat JSON document.
//! A config names its experiment and overrides any subset of that
//! experiment's preset, so `{"experiment": "cond"}` alone is a valid config.
//!
//! Floating-point cells are printed with 17 significant digits and failed
//! baseline solves are recorded as `singular`. Wall-clock timings go into the
//! JSON sidecar, and into extra CSV columns only when `timings` is set.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::basis::{hermitegf_matrix, HermiteGFBasis};
use crate::grids::{
    chebyshev_nodes_variant, halton_nodes, uniform_nodes, ChebyshevVariant, NodeKind, TestFunction,
};
use crate::hagedorn::{evaluate_aniso, fit_aniso, ShapeMatrix};
use crate::interp1d::{
    fit_hermitegf, fit_hermitegf_qr, fit_rbf_direct, uniform_cell_volume, Interpolant1D, Metric,
};
use crate::linalg::condition_number;
use crate::tensor::{NdTensor, TensorInterpolant};
use crate::{Error, PhaseTimes, Result};

/// Largest dimension accepted without `allow_large`.
pub const DESK_MAX_DIM: usize = 3;
/// Largest per-dimension node count accepted without `allow_large`.
pub const DESK_MAX_N: usize = 40;

/// The available studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Table1,
    EpsSweep,
    Cond,
    Gamma,
    Tensor,
    Uniform,
    Aniso,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Table1,
        ExperimentKind::EpsSweep,
        ExperimentKind::Cond,
        ExperimentKind::Gamma,
        ExperimentKind::Tensor,
        ExperimentKind::Uniform,
        ExperimentKind::Aniso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Table1 => "table1",
            ExperimentKind::EpsSweep => "eps-sweep",
            ExperimentKind::Cond => "cond",
            ExperimentKind::Gamma => "gamma",
            ExperimentKind::Tensor => "tensor",
            ExperimentKind::Uniform => "uniform",
            ExperimentKind::Aniso => "aniso",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Parameters of one study. Keys irrelevant to the chosen experiment are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Interpolated function (all studies except `gamma` and `cond`).
    pub function: TestFunction,
    /// Functions compared in the `gamma` study.
    pub functions: Vec<TestFunction>,
    /// Domain per dimension; the same interval is used in every dimension.
    pub interval: [f64; 2],
    /// Collocation node family for the 1D studies.
    pub node_kind: NodeKind,
    pub chebyshev_variant: ChebyshevVariant,
    /// Node counts per dimension.
    pub n_values: Vec<usize>,
    pub eps_start: f64,
    pub eps_step: f64,
    pub eps_stop: f64,
    pub epsilon: f64,
    pub gamma: f64,
    /// γ values for the `cond` and `uniform` studies.
    pub gammas: Vec<f64>,
    /// γL values for the `gamma` study.
    pub gamma_l: Vec<f64>,
    /// Expansion size for an additional HermiteGF-QR column in `eps-sweep`.
    pub m_terms: Option<usize>,
    /// Extra expansion terms `M - N` for `table1`.
    pub j_add: Vec<usize>,
    pub dims: Vec<usize>,
    /// Uniform evaluation points per dimension.
    pub n_eval: usize,
    /// Evaluation points per dimension when `d = 3` in the `tensor` study.
    pub n_eval_high_dim: usize,
    pub metric: Metric,
    /// Halton node count for the `aniso` study.
    pub n_nodes: usize,
    pub aniso_epsilon: f64,
    pub aniso_xi: f64,
    pub iso_epsilons: Vec<f64>,
    /// Worker threads, 0 for automatic.
    pub threads: usize,
    /// Append per-row wall-clock columns to the CSV (breaks bit-identical output).
    pub timings: bool,
    /// Lift the desk-scale limits on dimension and node count.
    pub allow_large: bool,
}

fn range(a: usize, b: usize) -> Vec<usize> {
    (a..=b).collect()
}

fn tenths(a: u32, b: u32) -> Vec<f64> {
    (a..=b).map(|k| f64::from(k) / 10.0).collect()
}

impl ExperimentConfig {
    /// Defaults reproducing the corresponding study.
    pub fn preset(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: kind,
            function: TestFunction::F2,
            functions: vec![TestFunction::Fc1, TestFunction::Fc2, TestFunction::Fc4],
            interval: [-1.0, 1.0],
            node_kind: NodeKind::Chebyshev,
            chebyshev_variant: ChebyshevVariant::Lobatto,
            n_values: range(2, 40),
            eps_start: 0.01,
            eps_step: 0.01,
            eps_stop: 0.5,
            epsilon: 0.1,
            gamma: 1.0,
            gammas: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            gamma_l: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            m_terms: None,
            j_add: vec![0, 1, 2, 3, 4, 5, 30],
            dims: vec![1, 2, 3],
            n_eval: 100,
            n_eval_high_dim: 21,
            metric: Metric::L2,
            n_nodes: 121,
            aniso_epsilon: 0.4,
            aniso_xi: 0.2,
            iso_epsilons: tenths(2, 8),
            threads: 0,
            timings: false,
            allow_large: false,
        };
        match kind {
            ExperimentKind::Table1 => Self {
                interval: [-4.0, 4.0],
                n_values: vec![10, 20, 25, 30],
                metric: Metric::L2Quadrature,
                ..base
            },
            ExperimentKind::EpsSweep => Self {
                interval: [-4.0, 4.0],
                n_values: vec![30],
                eps_step: 0.001,
                eps_stop: 0.99,
                ..base
            },
            ExperimentKind::Cond | ExperimentKind::Gamma => base,
            ExperimentKind::Tensor => Self {
                function: TestFunction::F3,
                n_values: range(5, 25),
                gamma: 3.0,
                n_eval: 53,
                ..base
            },
            ExperimentKind::Uniform => Self {
                function: TestFunction::Fu,
                node_kind: NodeKind::Uniform,
                ..base
            },
            ExperimentKind::Aniso => Self {
                function: TestFunction::Fa,
                n_values: vec![11],
                gamma: 3.0,
                n_eval: 17,
                ..base
            },
        }
    }

    /// Parses a JSON document, overlaying its keys on the preset it names.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let Value::Object(overrides) = value else {
            return Err(Error::Config("config must be a JSON object".into()));
        };
        let kind = match overrides.get("experiment") {
            Some(Value::String(s)) => s.parse::<ExperimentKind>()?,
            Some(other) => return Err(Error::Config(format!("bad experiment value {other}"))),
            None => return Err(Error::Config("missing key 'experiment'".into())),
        };
        Self::preset(kind).merged(overrides)
    }

    /// Returns a copy with `overrides` applied; the result is validated.
    pub fn merged(&self, overrides: Map<String, Value>) -> Result<Self> {
        let Value::Object(mut merged) = serde_json::to_value(self).expect("config serializes")
        else {
            unreachable!("config serializes to an object")
        };
        merged.extend(overrides);
        let cfg: Self = serde_json::from_value(Value::Object(merged))
            .map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// `eps_start + k eps_step` up to `eps_stop`, rounded to 12 decimals.
    pub fn epsilon_sweep(&self) -> Result<Vec<f64>> {
        let (a, h, b) = (self.eps_start, self.eps_step, self.eps_stop);
        if !(a > 0.0 && h > 0.0 && a <= b && b.is_finite()) {
            return Err(Error::Config(format!(
                "empty epsilon sweep {a}:{h}:{b}; need 0 < start <= stop and step > 0"
            )));
        }
        let count = ((b - a) / h + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|k| ((a + k as f64 * h) * 1e12).round() / 1e12)
            .collect())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let [a, b] = self.interval;
        if !(a < b && a.is_finite() && b.is_finite()) {
            return bad(format!("interval [{a}, {b}] must satisfy a < b"));
        }
        if self.n_values.is_empty() {
            return bad("n_values must not be empty".into());
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return bad(format!("node counts must be >= 2, got {n}"));
        }
        let positive = |name: &str, v: &[f64]| -> Result<()> {
            if v.is_empty() {
                return Err(Error::Config(format!("{name} must not be empty")));
            }
            match v.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
                Some(x) => Err(Error::Config(format!("{name} must be > 0, got {x}"))),
                None => Ok(()),
            }
        };
        positive("gamma", &[self.gamma])?;
        positive("epsilon", &[self.epsilon])?;
        positive("gammas", &self.gammas)?;
        positive("gamma_l", &self.gamma_l)?;
        positive("iso_epsilons", &self.iso_epsilons)?;
        self.epsilon_sweep()?;
        if self.j_add.is_empty() {
            return bad("j_add must not be empty".into());
        }
        if self.functions.is_empty() {
            return bad("functions must not be empty".into());
        }
        if self.n_eval < 2 || self.n_eval_high_dim < 2 {
            return bad("evaluation grids need at least 2 points per dimension".into());
        }
        if self.n_nodes == 0 {
            return bad("n_nodes must be >= 1".into());
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dims must be nonempty and >= 1".into());
        }
        if !self.allow_large {
            if let Some(d) = self.dims.iter().find(|&&d| d > DESK_MAX_DIM) {
                return bad(format!(
                    "d = {d} exceeds the desk-scale limit {DESK_MAX_DIM}; set allow_large to override"
                ));
            }
            if let Some(n) = self.n_values.iter().find(|&&n| n > DESK_MAX_N) {
                return bad(format!(
                    "N = {n} exceeds the desk-scale limit {DESK_MAX_N}; set allow_large to override"
                ));
            }
        }
        let one_d = |f: TestFunction| matches!(f.dim(), None | Some(1));
        match self.experiment {
            ExperimentKind::Table1 | ExperimentKind::EpsSweep | ExperimentKind::Uniform => {
                if !one_d(self.function) {
                    return bad(format!("{} is not a 1D function", self.function));
                }
            }
            ExperimentKind::Gamma => {
                if let Some(f) = self.functions.iter().find(|&&f| !one_d(f)) {
                    return bad(format!("{f} is not a 1D function"));
                }
            }
            ExperimentKind::Tensor => {
                if let (Some(fd), Some(d)) = (
                    self.function.dim(),
                    self.dims.iter().find(|&&d| Some(d) != self.function.dim()),
                ) {
                    return bad(format!("{} needs d = {fd}, got {d}", self.function));
                }
            }
            ExperimentKind::Aniso => {
                if !matches!(self.function.dim(), None | Some(2)) {
                    return bad(format!("{} is not a 2D function", self.function));
                }
                ShapeMatrix::test_family(self.aniso_epsilon, self.aniso_xi)
                    .map_err(|e| Error::Config(e.to_string()))?;
            }
            ExperimentKind::Cond => {}
        }
        Ok(())
    }

    fn nodes_1d(&self, n: usize) -> Result<Vec<f64>> {
        let x = match self.node_kind {
            NodeKind::Chebyshev => {
                chebyshev_nodes_variant(n, self.interval, self.chebyshev_variant)?
            }
            NodeKind::Uniform => uniform_nodes(n, self.interval)?,
            NodeKind::Halton => {
                let mut x: Vec<f64> = halton_nodes(n, 1, &[self.interval])?
                    .into_iter()
                    .map(|p| p[0])
                    .collect();
                x.sort_by(f64::total_cmp);
                x
            }
        };
        Ok(x)
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    /// A collocation system that could not be solved.
    Singular,
}

/// 17 significant digits, `inf`/`-inf`/`nan` for non-finite values.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => f.write_str(&format_float(*v)),
            Cell::Text(s) => f.write_str(s),
            Cell::Singular => f.write_str("singular"),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Header plus rows; serialized as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width differs from header"
        );
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Wall-clock split of one computation.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TimingRecord {
    pub label: String,
    pub build_s: f64,
    pub solve_s: f64,
    pub eval_s: f64,
}

/// Result of running an experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: Table,
    pub timings: Vec<TimingRecord>,
    pub summary: Option<Value>,
}

impl ExperimentOutput {
    /// JSON sidecar: config echo, library version, timings and the optional summary.
    pub fn sidecar(&self, config: &ExperimentConfig) -> Value {
        json!({
            "config": config,
            "version": env!("CARGO_PKG_VERSION"),
            "timings": self.timings,
            "summary": self.summary,
        })
    }
}

/// Builds a table whose rows may carry trailing timing columns.
struct Recorder {
    table: Table,
    with_times: bool,
    row_times: TimingRecord,
    records: Vec<TimingRecord>,
}

impl Recorder {
    fn new(cfg: &ExperimentConfig, header: &[&str]) -> Self {
        let mut cols: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        if cfg.timings {
            cols.extend(["build_s", "solve_s", "eval_s"].map(String::from));
        }
        Self {
            table: Table::new(cols),
            with_times: cfg.timings,
            row_times: Self::blank(),
            records: Vec::new(),
        }
    }

    fn blank() -> TimingRecord {
        TimingRecord {
            label: String::new(),
            build_s: 0.0,
            solve_s: 0.0,
            eval_s: 0.0,
        }
    }

    fn time(&mut self, label: String, phases: PhaseTimes, eval_s: f64) {
        self.row_times.build_s += phases.build_s;
        self.row_times.solve_s += phases.solve_s;
        self.row_times.eval_s += eval_s;
        self.records.push(TimingRecord {
            label,
            build_s: phases.build_s,
            solve_s: phases.solve_s,
            eval_s,
        });
    }

    fn push(&mut self, mut row: Vec<Cell>) {
        let t = std::mem::replace(&mut self.row_times, Self::blank());
        if self.with_times {
            row.extend([t.build_s, t.solve_s, t.eval_s].map(Cell::Float));
        }
        self.table.push(row);
    }

    fn finish(self, summary: Option<Value>) -> ExperimentOutput {
        ExperimentOutput {
            table: self.table,
            timings: self.records,
            summary,
        }
    }
}

fn sample(f: TestFunction, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| f.eval_1d(x)).collect()
}

struct Eval1D {
    points: Vec<f64>,
    cell: f64,
}

impl Eval1D {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            points: uniform_nodes(cfg.n_eval, cfg.interval)?,
            cell: uniform_cell_volume(&[cfg.n_eval], &[cfg.interval]),
        })
    }

    /// Error of `model` against `f`, recording the timings under `label`.
    fn error(
        &self,
        cfg: &ExperimentConfig,
        rec: &mut Recorder,
        label: String,
        model: &Interpolant1D,
        f: TestFunction,
    ) -> Result<f64> {
        let start = Instant::now();
        let s = model.evaluate(&self.points)?;
        rec.time(label, model.timings(), start.elapsed().as_secs_f64());
        cfg.metric.apply(&s, &sample(f, &self.points), self.cell)
    }
}

/// Runs a fit whose failure to solve is an expected outcome, recorded as `singular`.
fn singular_or(result: Result<f64>) -> Result<Cell> {
    match result {
        Ok(v) => Ok(Cell::Float(v)),
        Err(e) if e.is_singular() => Ok(Cell::Singular),
        Err(e) => Err(e),
    }
}

/// Table 1: rows `j_add`, columns `N`; `j_add = 0` uses the direct method.
pub fn run_table1(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if cfg.function != TestFunction::F2
        || cfg.interval != [-4.0, 4.0]
        || cfg.epsilon != 0.1
        || cfg.gamma != 1.0
    {
        log::warn!("table1 config differs from the reference setup (f2, [-4,4], eps=0.1, gamma=1)");
    }
    let names: Vec<String> = cfg.n_values.iter().map(|n| format!("N{n}")).collect();
    let mut header = vec!["j_add"];
    header.extend(names.iter().map(String::as_str));
    let mut rec = Recorder::new(cfg, &header);
    let eval = Eval1D::new(cfg)?;
    for &j in &cfg.j_add {
        let mut row = vec![Cell::from(j)];
        for &n in &cfg.n_values {
            let x = cfg.nodes_1d(n)?;
            let f = sample(cfg.function, &x);
            let model = if j == 0 {
                fit_hermitegf(&x, &f, cfg.gamma, cfg.epsilon, cfg.interval)?
            } else {
                fit_hermitegf_qr(&x, &x, &f, cfg.gamma, cfg.epsilon, cfg.interval, n + j)?
            };
            let err = eval.error(
                cfg,
                &mut rec,
                format!("j_add={j} N={n}"),
                &model,
                cfg.function,
            )?;
            row.push(err.into());
        }
        rec.push(row);
    }
    Ok(rec.finish(None))
}

/// Error against ε for RBF-Direct and HermiteGF (and HermiteGF-QR when `m_terms` is set).
pub fn run_eps_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let eps_values = cfg.epsilon_sweep()?;
    let mut header = vec!["n", "epsilon", "rbf_direct", "hermitegf_direct"];
    if cfg.m_terms.is_some() {
        header.push("hermitegf_qr");
    }
    let mut rec = Recorder::new(cfg, &header);
    let eval = Eval1D::new(cfg)?;
    for &n in &cfg.n_values {
        let x = cfg.nodes_1d(n)?;
        let f = sample(cfg.function, &x);
        for &eps in &eps_values {
            let rbf = fit_rbf_direct(&x, &x, &f, eps).and_then(|m| {
                eval.error(
                    cfg,
                    &mut rec,
                    format!("rbf n={n} eps={eps}"),
                    &m,
                    cfg.function,
                )
            });
            let mut row = vec![n.into(), eps.into(), singular_or(rbf)?];
            let m = fit_hermitegf(&x, &f, cfg.gamma, eps, cfg.interval)?;
            let label = format!("hermitegf n={n} eps={eps}");
            row.push(eval.error(cfg, &mut rec, label, &m, cfg.function)?.into());
            if let Some(mt) = cfg.m_terms {
                let m = fit_hermitegf_qr(&x, &x, &f, cfg.gamma, eps, cfg.interval, mt)?;
                let label = format!("hermitegf_qr n={n} eps={eps}");
                row.push(eval.error(cfg, &mut rec, label, &m, cfg.function)?.into());
            }
            rec.push(row);
        }
    }
    Ok(rec.finish(None))
}

fn collocation_condition(cfg: &ExperimentConfig, gamma: f64, x: &[f64]) -> Result<(f64, f64)> {
    let start = Instant::now();
    let basis = HermiteGFBasis::for_interval(gamma, cfg.epsilon, cfg.interval, x.len())?;
    let h = hermitegf_matrix(&basis, x)?;
    let built = start.elapsed().as_secs_f64();
    Ok((condition_number(&h), built))
}

/// Condition number of the HermiteGF collocation matrix per (γ, N).
pub fn run_cond_study(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut rec = Recorder::new(cfg, &["gamma", "n", "cond"]);
    for &gamma in &cfg.gammas {
        for &n in &cfg.n_values {
            let x = cfg.nodes_1d(n)?;
            let start = Instant::now();
            let (cond, built) = collocation_condition(cfg, gamma, &x)?;
            let total = start.elapsed().as_secs_f64();
            let phases = PhaseTimes {
                build_s: built,
                solve_s: total - built,
            };
            rec.time(format!("cond gamma={gamma} n={n}"), phases, 0.0);
            rec.push(vec![gamma.into(), n.into(), cond.into()]);
        }
    }
    Ok(rec.finish(None))
}

/// Error against N for several γL; singular collocation is recorded, not fatal.
pub fn run_gamma_study(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut rec = Recorder::new(cfg, &["function", "gamma_l", "gamma", "n", "error"]);
    let eval = Eval1D::new(cfg)?;
    let half = 0.5 * (cfg.interval[1] - cfg.interval[0]);
    for &f in &cfg.functions {
        for &gl in &cfg.gamma_l {
            let gamma = gl / half;
            for &n in &cfg.n_values {
                let x = cfg.nodes_1d(n)?;
                let err = fit_hermitegf(&x, &sample(f, &x), gamma, cfg.epsilon, cfg.interval)
                    .and_then(|m| {
                        eval.error(cfg, &mut rec, format!("{f} gamma_l={gl} n={n}"), &m, f)
                    });
                rec.push(vec![
                    f.name().into(),
                    gl.into(),
                    gamma.into(),
                    n.into(),
                    singular_or(err)?,
                ]);
            }
        }
    }
    Ok(rec.finish(None))
}

/// HermiteGF-tensor error against N per dimension.
pub fn run_tensor_scaling(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut rec = Recorder::new(cfg, &["d", "n", "error"]);
    let interp = |n: usize, d: usize| -> Result<(f64, PhaseTimes)> {
        let p = if d <= 2 {
            cfg.n_eval
        } else {
            cfg.n_eval_high_dim
        };
        let colloc = vec![cfg.nodes_1d(n)?; d];
        let eval = vec![uniform_nodes(p, cfg.interval)?; d];
        let f = |x: &[f64]| cfg.function.eval(x).expect("dimension validated");
        let values = NdTensor::from_grid(&colloc, f)?;
        let truth = NdTensor::from_grid(&eval, f)?;
        let op = TensorInterpolant::new(
            &colloc,
            &eval,
            cfg.gamma,
            &vec![cfg.epsilon; d],
            &vec![cfg.interval; d],
        )?;
        let (s, phases) = op.apply_timed(&values)?;
        let cell = uniform_cell_volume(&vec![p; d], &vec![cfg.interval; d]);
        Ok((cfg.metric.apply(s.data(), truth.data(), cell)?, phases))
    };
    for &d in &cfg.dims {
        for &n in &cfg.n_values {
            let (err, phases) = interp(n, d)?;
            // Operators include the evaluation grid, so applying them is the solve phase.
            rec.time(format!("tensor d={d} n={n}"), phases, 0.0);
            rec.push(vec![d.into(), n.into(), err.into()]);
        }
    }
    Ok(rec.finish(None))
}

/// Error and condition number against N for uniform collocation and several γ.
pub fn run_uniform_study(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut rec = Recorder::new(cfg, &["gamma", "n", "error", "cond"]);
    let eval = Eval1D::new(cfg)?;
    for &gamma in &cfg.gammas {
        for &n in &cfg.n_values {
            let x = cfg.nodes_1d(n)?;
            let f = sample(cfg.function, &x);
            let err = fit_hermitegf(&x, &f, gamma, cfg.epsilon, cfg.interval).and_then(|m| {
                eval.error(
                    cfg,
                    &mut rec,
                    format!("uniform gamma={gamma} n={n}"),
                    &m,
                    cfg.function,
                )
            });
            let (cond, _) = collocation_condition(cfg, gamma, &x)?;
            rec.push(vec![gamma.into(), n.into(), singular_or(err)?, cond.into()]);
        }
    }
    Ok(rec.finish(None))
}

/// Anisotropic fit on Halton nodes against isotropic fits.
///
/// Rows: the anisotropic fit, isotropic `E = ε² Id` fits on the same nodes,
/// and HermiteGF-tensor fits on a Chebyshev grid with `n_values[0]` points per
/// dimension.
pub fn run_aniso(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut rec = Recorder::new(cfg, &["model", "epsilon", "xi", "error"]);
    let boxes = [cfg.interval; 2];
    let f = |x: &[f64]| cfg.function.eval(x).expect("dimension validated");
    let nodes = halton_nodes(cfg.n_nodes, 2, &boxes)?;
    let values: Vec<f64> = nodes.iter().map(|x| f(x)).collect();
    let axis = uniform_nodes(cfg.n_eval, cfg.interval)?;
    let points: Vec<Vec<f64>> = axis
        .iter()
        .flat_map(|&y| axis.iter().map(move |&x| vec![x, y]))
        .collect();
    let truth: Vec<f64> = points.iter().map(|x| f(x)).collect();
    let cell = uniform_cell_volume(&[cfg.n_eval; 2], &boxes);

    let mut fit = |e: &ShapeMatrix, label: String| -> Result<f64> {
        let start = Instant::now();
        let model = fit_aniso(e, &nodes, &values)?;
        let solved = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let s = evaluate_aniso(&model, &points)?;
        let phases = PhaseTimes {
            build_s: 0.0,
            solve_s: solved,
        };
        rec.time(label, phases, start.elapsed().as_secs_f64());
        cfg.metric.apply(&s, &truth, cell)
    };

    let e = ShapeMatrix::test_family(cfg.aniso_epsilon, cfg.aniso_xi)?;
    let aniso = fit(&e, "anisotropic".into())?;
    let mut iso = Vec::new();
    for &eps in &cfg.iso_epsilons {
        iso.push((
            eps,
            fit(
                &ShapeMatrix::isotropic(2, eps)?,
                format!("isotropic eps={eps}"),
            )?,
        ));
    }

    let n = cfg.n_values[0];
    let colloc = vec![chebyshev_nodes_variant(n, cfg.interval, cfg.chebyshev_variant)?; 2];
    let grid_values = NdTensor::from_grid(&colloc, f)?;
    let eval = vec![axis.clone(), axis.clone()];
    let grid_truth = NdTensor::from_grid(&eval, f)?;
    let mut tensor = Vec::new();
    for &eps in &cfg.iso_epsilons {
        let op = TensorInterpolant::new(&colloc, &eval, cfg.gamma, &[eps, eps], &boxes)?;
        let (s, phases) = op.apply_timed(&grid_values)?;
        rec.time(format!("tensor_grid eps={eps}"), phases, 0.0);
        tensor.push((eps, cfg.metric.apply(s.data(), grid_truth.data(), cell)?));
    }

    rec.push(vec![
        "anisotropic".into(),
        cfg.aniso_epsilon.into(),
        cfg.aniso_xi.into(),
        aniso.into(),
    ]);
    for &(eps, err) in &iso {
        rec.push(vec!["isotropic".into(), eps.into(), 0.0.into(), err.into()]);
    }
    for &(eps, err) in &tensor {
        rec.push(vec![
            "tensor_grid".into(),
            eps.into(),
            0.0.into(),
            err.into(),
        ]);
    }

    let best = |v: &[(f64, f64)]| {
        v.iter().copied().fold(
            (f64::NAN, f64::INFINITY),
            |b, c| if c.1 < b.1 { c } else { b },
        )
    };
    let (iso_eps, iso_min) = best(&iso);
    let (grid_eps, grid_min) = best(&tensor);
    let summary = json!({
        "anisotropic_error": aniso,
        "isotropic_min_error": iso_min,
        "isotropic_min_epsilon": iso_eps,
        "beats_all_isotropic": aniso < iso_min,
        "tensor_grid_n": n,
        "tensor_grid_min_error": grid_min,
        "tensor_grid_min_epsilon": grid_eps,
        "beats_all_tensor_grid": aniso < grid_min,
    });
    Ok(rec.finish(Some(summary)))
}

/// Runs the configured experiment on a thread pool sized by `cfg.threads`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    pool.install(|| match cfg.experiment {
        ExperimentKind::Table1 => run_table1(cfg),
        ExperimentKind::EpsSweep => run_eps_sweep(cfg),
        ExperimentKind::Cond => run_cond_study(cfg),
        ExperimentKind::Gamma => run_gamma_study(cfg),
        ExperimentKind::Tensor => run_tensor_scaling(cfg),
        ExperimentKind::Uniform => run_uniform_study(cfg),
        ExperimentKind::Aniso => run_aniso(cfg),
    })
}
