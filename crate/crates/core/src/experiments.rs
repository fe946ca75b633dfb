//! Experiment runner: JSON config in, CSV curves and a JSON manifest out.
//!
//! Thresholds are given in dB in the config and converted here; everything
//! past [`ParamsConfig::to_params`] is linear.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::meta::{MetaModel, MetaMoments};
use crate::params::{db_to_linear, Allocation, Scheme, SystemParams, TrafficParams, UserClass};
use crate::performance::{delay_ccdf, rate_cdf};
use crate::ra::{
    brute_force_ra, csr, gain_eta_max, noma_gain, solve_p1, solve_p2, theta_hat, theta_nc, CellModel, Problem, RAResult,
};
use crate::sim::{estimate_areas_and_loads, estimate_meta, estimate_rate_delay, SimConfig};
use crate::validation::{run_all, Scale};
use crate::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    MomentsSweep,
    MetaCcdf,
    AreaDist,
    LoadPmf,
    RateOutage,
    DelayOutage,
    RateRegion,
    RaP1,
    RaP2,
    Validate,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::MomentsSweep,
        Experiment::MetaCcdf,
        Experiment::AreaDist,
        Experiment::LoadPmf,
        Experiment::RateOutage,
        Experiment::DelayOutage,
        Experiment::RateRegion,
        Experiment::RaP1,
        Experiment::RaP2,
        Experiment::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::MomentsSweep => "moments-sweep",
            Experiment::MetaCcdf => "meta-ccdf",
            Experiment::AreaDist => "area-dist",
            Experiment::LoadPmf => "load-pmf",
            Experiment::RateOutage => "rate-outage",
            Experiment::DelayOutage => "delay-outage",
            Experiment::RateRegion => "rate-region",
            Experiment::RaP1 => "ra-p1",
            Experiment::RaP2 => "ra-p2",
            Experiment::Validate => "validate",
        }
    }

    /// Sweep variables the experiment understands; the first is the default.
    pub fn sweep_vars(self) -> &'static [SweepVar] {
        use SweepVar::*;
        match self {
            Experiment::MomentsSweep => &[Theta, Eta, Tau],
            Experiment::RateRegion => &[Theta, Eta],
            Experiment::RaP1 | Experiment::RaP2 => &[Nu, Tau],
            Experiment::Validate => &[],
            _ => &[Threshold],
        }
    }

    /// Grid used when the config has no sweep.
    pub fn default_sweep(self) -> Option<SweepConfig> {
        let lin = |variable, start, stop, points| SweepConfig {
            variable,
            grid: None,
            start: Some(start),
            stop: Some(stop),
            points: Some(points),
        };
        Some(match self {
            Experiment::MomentsSweep | Experiment::RateRegion => lin(SweepVar::Theta, 0.01, 0.99, 99),
            Experiment::MetaCcdf => lin(SweepVar::Threshold, 0.0, 1.0, 101),
            Experiment::AreaDist => lin(SweepVar::Threshold, 0.0, 2.0, 81),
            Experiment::LoadPmf => lin(SweepVar::Threshold, 1.0, 20.0, 20),
            Experiment::RateOutage => lin(SweepVar::Threshold, 0.0, 1.6, 81),
            Experiment::DelayOutage => lin(SweepVar::Threshold, 1.0, 100.0, 100),
            Experiment::RaP1 | Experiment::RaP2 => SweepConfig {
                variable: SweepVar::Nu,
                grid: Some(vec![2.0, 5.0, 10.0, 20.0]),
                start: None,
                stop: None,
                points: None,
            },
            Experiment::Validate => return None,
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            RunError::Config(format!("unknown experiment `{s}`, expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// 1 config, 2 validation failure, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => 1,
            RunError::Validation(_) => 2,
            RunError::Model(ModelError::InvalidParams(_) | ModelError::Domain(_) | ModelError::Infeasible { .. }) => 1,
            RunError::Model(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    Theta,
    Eta,
    Tau,
    Nu,
    /// The x axis of a distribution: reliability, area, load, rate or delay.
    Threshold,
}

impl SweepVar {
    fn column(self) -> &'static str {
        match self {
            SweepVar::Theta => "theta_power_frac",
            SweepVar::Eta => "eta_time_frac",
            SweepVar::Tau => "tau_ratio",
            SweepVar::Nu => "nu_users_per_bs",
            SweepVar::Threshold => "threshold",
        }
    }
}

/// A grid given either explicitly or as `points` evenly spaced values from
/// `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl SweepConfig {
    pub fn values(&self) -> Result<Vec<f64>, RunError> {
        let v = match (&self.grid, self.start, self.stop, self.points) {
            (Some(g), None, None, None) => g.clone(),
            (None, Some(a), Some(b), Some(n)) if n >= 2 => {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }
            (None, Some(a), _, Some(1)) => vec![a],
            _ => return Err(RunError::Config("sweep needs either `grid` or `start`, `stop` and `points`".into())),
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(RunError::Config("sweep grid must be nonempty and finite".into()));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RunError::Config("sweep grid must be strictly increasing".into()));
        }
        Ok(v)
    }
}

/// System parameters with SIR thresholds in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub lambda: f64,
    pub nu: f64,
    pub alpha: f64,
    pub tau: f64,
    pub beta_c_db: f64,
    pub beta_e_db: f64,
    pub theta: f64,
    pub eta: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let p = SystemParams::default();
        ParamsConfig {
            lambda: p.lambda,
            nu: p.nu,
            alpha: p.alpha,
            tau: p.tau,
            beta_c_db: 3.0,
            beta_e_db: -3.0,
            theta: p.theta,
            eta: p.eta,
        }
    }
}

impl ParamsConfig {
    pub fn to_params(&self) -> SystemParams {
        SystemParams {
            lambda: self.lambda,
            nu: self.nu,
            alpha: self.alpha,
            tau: self.tau,
            beta_c: db_to_linear(self.beta_c_db),
            beta_e: db_to_linear(self.beta_e_db),
            theta: self.theta,
            eta: self.eta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ParamsConfig,
    pub traffic: TrafficParams,
    pub sim: SimConfig,
    /// Defaults to the experiment's own grid.
    pub sweep: Option<SweepConfig>,
    /// Add Monte Carlo columns next to the analytic ones.
    pub simulate: bool,
    /// Points of the brute-force allocation grid.
    pub grid_size: usize,
    /// Slots of the Geo/Geo/1 check in `validate`.
    pub queue_slots: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: ParamsConfig::default(),
            traffic: TrafficParams::default(),
            sim: SimConfig::default(),
            sweep: None,
            simulate: false,
            grid_size: 2000,
            queue_slots: 1_000_000,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Checks the config against `exp` and returns the sweep grid.
    pub fn validate(&self, exp: Experiment) -> Result<Option<(SweepVar, Vec<f64>)>, RunError> {
        let p = self.params.to_params();
        p.validate().map_err(|e| RunError::Config(format!("params: {e}")))?;
        self.traffic.validate().map_err(|e| RunError::Config(format!("traffic: {e}")))?;
        self.sim.validate().map_err(|e| RunError::Config(format!("sim: {e}")))?;
        if self.grid_size < 100 {
            return Err(RunError::Config(format!("grid_size {} below 100", self.grid_size)));
        }
        if self.queue_slots == 0 {
            return Err(RunError::Config("queue_slots must be positive".into()));
        }
        if exp == Experiment::Validate {
            if self.sweep.is_some() {
                return Err(RunError::Config("validate takes no sweep".into()));
            }
            return Ok(None);
        }
        let sweep = self.sweep.clone().or_else(|| exp.default_sweep()).expect("default sweep");
        if !exp.sweep_vars().contains(&sweep.variable) {
            return Err(RunError::Config(format!(
                "{exp} cannot sweep {:?}; allowed: {:?}",
                sweep.variable,
                exp.sweep_vars()
            )));
        }
        let grid = sweep.values()?;
        let bad = |what: &str| RunError::Config(format!("sweep values out of range for {what}"));
        match (exp, sweep.variable) {
            (_, SweepVar::Theta | SweepVar::Eta) if grid.iter().any(|&x| !(x > 0.0 && x < 1.0)) => {
                return Err(bad("a split in (0, 1)"))
            }
            (_, SweepVar::Tau) if grid.iter().any(|&x| !(x > 0.0 && x < 1.0)) => return Err(bad("tau in (0, 1)")),
            (_, SweepVar::Nu) if grid.iter().any(|&x| x <= 0.0) => return Err(bad("nu > 0")),
            (Experiment::LoadPmf, _) if grid.iter().any(|&x| x < 1.0 || x.fract() != 0.0) => {
                return Err(bad("integer loads >= 1"))
            }
            (Experiment::MetaCcdf, _) if grid.iter().any(|&x| !(0.0..=1.0).contains(&x)) => {
                return Err(bad("reliability in [0, 1]"))
            }
            _ => {}
        }
        Ok(Some((sweep.variable, grid)))
    }
}

/// Reads a JSON config and applies `key.path=value` overrides. Values are
/// parsed as JSON when possible and taken as strings otherwise.
pub fn load_config(path: &Path, sets: &[String]) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    let at = |e: serde_path_to_error::Error<serde_json::Error>| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        RunError::Config(format!("{}:{}:{}: field `{field}`: {inner}", path.display(), inner.line(), inner.column()))
    };
    if sets.is_empty() {
        return serde_path_to_error::deserialize(&mut serde_json::Deserializer::from_str(&text)).map_err(at);
    }
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| RunError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?;
    for s in sets {
        apply_set(&mut value, s)?;
    }
    serde_path_to_error::deserialize(value)
        .map_err(|e| RunError::Config(format!("field `{}`: {}", e.path(), e.inner())))
}

fn apply_set(root: &mut Value, assignment: &str) -> Result<(), RunError> {
    let (key, raw) =
        assignment.split_once('=').ok_or_else(|| RunError::Config(format!("--set `{assignment}` is not key=value")))?;
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let map = node
            .as_object_mut()
            .ok_or_else(|| RunError::Config(format!("--set {key}: `{}` is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            map.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert_with(|| json!({}));
    }
    Err(RunError::Config(format!("--set `{assignment}` has an empty key")))
}

/// One CSV file; every cell is preformatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Table {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub rows: usize,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputFile>,
    pub summary: Value,
}

/// Runs `exp` and writes its CSVs and `manifest.json` into
/// `cfg.output_dir`. A failed `validate` still writes its artifacts before
/// returning [`RunError::Validation`].
pub fn run(exp: Experiment, cfg: &ExperimentConfig) -> Result<Manifest, RunError> {
    let start = Instant::now();
    let sweep = cfg.validate(exp)?;
    let p = cfg.params.to_params();
    let (tables, summary) = match (exp, sweep) {
        (Experiment::Validate, _) => validate(cfg)?,
        (_, None) => unreachable!("every other experiment has a default sweep"),
        (Experiment::MomentsSweep, Some((var, grid))) => moments_sweep(&p, cfg, var, &grid)?,
        (Experiment::MetaCcdf, Some((_, grid))) => meta_ccdf(&p, cfg, &grid)?,
        (Experiment::AreaDist, Some((_, grid))) => area_dist(&p, cfg, &grid)?,
        (Experiment::LoadPmf, Some((_, grid))) => load_pmf(&p, cfg, &grid)?,
        (Experiment::RateOutage, Some((_, grid))) => rate_outage(&p, cfg, &grid)?,
        (Experiment::DelayOutage, Some((_, grid))) => delay_outage(&p, cfg, &grid)?,
        (Experiment::RateRegion, Some((_, grid))) => rate_region(&p, &grid)?,
        (Experiment::RaP1, Some((var, grid))) => ra(Problem::P1, &p, cfg, var, &grid)?,
        (Experiment::RaP2, Some((var, grid))) => ra(Problem::P2, &p, cfg, var, &grid)?,
    };

    let dir = &cfg.output_dir;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut outputs = Vec::new();
    for t in &tables {
        let file = format!("{}.csv", t.name);
        let path = dir.join(&file);
        let bytes = t.to_csv().map_err(|e| RunError::Io { path: path.clone(), source: e.into() })?;
        std::fs::write(&path, bytes).map_err(io(&path))?;
        outputs.push(OutputFile { file, rows: t.rows.len(), columns: t.columns.clone() });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: exp.name().into(),
        seed: cfg.sim.seed,
        config: ExperimentConfig { sweep: cfg.sweep.clone().or_else(|| exp.default_sweep()), ..cfg.clone() },
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs,
        summary,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(io(&path))?;

    if let Some(failed) = manifest.summary.get("failed").and_then(Value::as_array).filter(|f| !f.is_empty()) {
        let ids: Vec<_> = failed.iter().filter_map(Value::as_str).collect();
        return Err(RunError::Validation(format!("criteria {} outside tolerance", ids.join(", "))));
    }
    Ok(manifest)
}

type Output = (Vec<Table>, Value);

/// Moments, with zero success beyond the SIC limit.
fn moments_or_zero(meta: &MetaModel, class: UserClass, alloc: Allocation) -> Result<(f64, f64), ModelError> {
    match meta.moments(class, alloc) {
        Ok(MetaMoments { m1, m2, .. }) => Ok((m1, m2)),
        Err(ModelError::Infeasible { .. }) => Ok((0.0, 0.0)),
        Err(e) => Err(e),
    }
}

fn moments_sweep(p: &SystemParams, cfg: &ExperimentConfig, var: SweepVar, grid: &[f64]) -> Result<Output, RunError> {
    let point = |x: f64| match var {
        SweepVar::Theta => (*p, Allocation::Noma { theta: x }),
        SweepVar::Eta => (*p, Allocation::Oma { eta: x }),
        _ => (SystemParams { tau: x, ..*p }, Allocation::Noma { theta: p.theta }),
    };
    let mut cols =
        vec![var.column(), "cc_m1_prob", "cc_m2_prob_sq", "ce_m1_prob", "ce_m2_prob_sq", "csr_bits_per_slot_hz"];
    if cfg.simulate {
        cols.extend(["cc_m1_sim_prob", "cc_m2_sim_prob_sq", "ce_m1_sim_prob", "ce_m2_sim_prob_sq"]);
    }
    let mut table = Table::new("moments", &cols);
    let base = MetaModel::new(*p);
    let (mut best_cc, mut best_csr) = ((f64::NAN, -1.0), (f64::NAN, -1.0));
    for &x in grid {
        let (q, alloc) = point(x);
        let meta = base.with_params(q);
        let (c1, c2) = moments_or_zero(&meta, UserClass::Center, alloc)?;
        let (e1, e2) = moments_or_zero(&meta, UserClass::Edge, alloc)?;
        let sum = match csr(alloc, &meta) {
            Err(ModelError::Infeasible { .. }) => 0.0,
            r => r?,
        };
        if c1 > best_cc.1 {
            best_cc = (x, c1);
        }
        if sum > best_csr.1 {
            best_csr = (x, sum);
        }
        let mut row: Vec<String> = [x, c1, c2, e1, e2, sum].map(num).to_vec();
        if cfg.simulate {
            let est = estimate_meta(&q, &[alloc], &cfg.sim)?;
            row.extend([est[0].m1, est[0].m2, est[1].m1, est[1].m2].map(num));
        }
        table.push(row);
    }
    let summary = json!({
        "theta_hat": theta_hat(p.beta_c, p.beta_e),
        "theta_nc": theta_nc(p.beta_e),
        "cc_m1_peak_at": best_cc.0,
        "csr_peak_at": best_csr.0,
        "csr_peak_bits_per_slot_hz": best_csr.1,
    });
    Ok((vec![table], summary))
}

fn both_allocs(p: &SystemParams) -> [Allocation; 2] {
    [Allocation::Noma { theta: p.theta }, Allocation::Oma { eta: p.eta }]
}

/// Column names `{scheme}_{class}_{suffix}` in allocation-major order.
fn curve_columns(first: &str, suffix: &str, simulate: bool) -> Vec<String> {
    let mut cols = vec![first.to_string()];
    let tags: Vec<String> = [Scheme::Noma, Scheme::Oma]
        .iter()
        .flat_map(|s| UserClass::BOTH.map(|c| format!("{}_{}", s.label(), c.label())))
        .collect();
    cols.extend(tags.iter().map(|t| format!("{t}_{suffix}")));
    if simulate {
        cols.extend(tags.iter().map(|t| format!("{t}_sim_{suffix}")));
    }
    cols
}

fn table_from(name: &str, cols: Vec<String>) -> Table {
    Table { name: name.into(), columns: cols, rows: Vec::new() }
}

fn meta_ccdf(p: &SystemParams, cfg: &ExperimentConfig, grid: &[f64]) -> Result<Output, RunError> {
    let meta = MetaModel::new(*p);
    let allocs = both_allocs(p);
    let mut fits = Vec::new();
    let mut moments = Vec::new();
    for alloc in allocs {
        for class in UserClass::BOTH {
            fits.push(meta.fit(class, alloc)?);
            let m = meta.moments(class, alloc)?;
            moments.push(json!({"scheme": alloc.scheme().label(), "class": class.label(), "m1": m.m1, "m2": m.m2}));
        }
    }
    let sims = if cfg.simulate { estimate_meta(p, &allocs, &cfg.sim)? } else { Vec::new() };
    let mut table = table_from("meta_ccdf", curve_columns("reliability_prob", "ccdf_prob", cfg.simulate));
    for &x in grid {
        let mut row = vec![num(x)];
        row.extend(fits.iter().map(|f| num(f.ccdf(x))));
        row.extend(sims.iter().map(|s| num(s.ccdf(x))));
        table.push(row);
    }
    Ok((vec![table], json!({ "moments": moments })))
}

fn area_dist(p: &SystemParams, cfg: &ExperimentConfig, grid: &[f64]) -> Result<Output, RunError> {
    let model = CellModel::new(*p)?;
    let mut cols = vec!["area_sq_units", "cc_cdf_prob", "ce_cdf_prob"];
    if cfg.simulate {
        cols.extend(["cc_sim_cdf_prob", "ce_sim_cdf_prob"]);
    }
    let sims = if cfg.simulate {
        let s = estimate_areas_and_loads(p, &cfg.sim)?;
        UserClass::BOTH
            .map(|c| {
                let mut a = s.areas(c).to_vec();
                a.sort_by(f64::total_cmp);
                a
            })
            .to_vec()
    } else {
        Vec::new()
    };
    let mut table = Table::new("area_cdf", &cols);
    for &a in grid {
        let mut row = vec![num(a)];
        row.extend(UserClass::BOTH.map(|c| num(model.gamma(c).cdf(a))));
        row.extend(sims.iter().map(|s| num(s.partition_point(|&v| v <= a) as f64 / s.len() as f64)));
        table.push(row);
    }
    let stats: Vec<Value> = UserClass::BOTH
        .iter()
        .map(|&c| {
            let (st, g) = (model.area(c), model.gamma(c));
            json!({"class": c.label(), "mean": st.mean, "second_moment": st.second_moment, "gamma_shape": g.gamma2, "gamma_rate": g.gamma1})
        })
        .collect();
    Ok((vec![table], json!({ "areas": stats })))
}

fn load_pmf(p: &SystemParams, cfg: &ExperimentConfig, grid: &[f64]) -> Result<Output, RunError> {
    let model = CellModel::new(*p)?;
    let mut cols = vec!["n_users", "cc_pmf_prob", "ce_pmf_prob"];
    if cfg.simulate {
        cols.extend(["cc_sim_pmf_prob", "ce_sim_pmf_prob"]);
    }
    let top = grid.last().copied().unwrap_or(1.0) as usize;
    let hist = if cfg.simulate {
        let s = estimate_areas_and_loads(p, &cfg.sim)?;
        UserClass::BOTH.map(|c| s.load_histogram(c, top)).to_vec()
    } else {
        Vec::new()
    };
    let mut table = Table::new("load_pmf", &cols);
    for &x in grid {
        let n = x as usize;
        let mut row = vec![n.to_string()];
        row.extend(UserClass::BOTH.map(|c| num(model.load(c).prob(n))));
        row.extend(hist.iter().map(|h| num(h[n - 1])));
        table.push(row);
    }
    let loads: Vec<Value> = UserClass::BOTH
        .iter()
        .map(|&c| {
            let l = model.load(c);
            json!({"class": c.label(), "mean": l.mean(), "xi": l.xi, "n_max": l.n_max, "tail_mass": l.tail_mass})
        })
        .collect();
    Ok((vec![table], json!({ "nu": p.nu, "loads": loads })))
}

fn rate_outage(p: &SystemParams, cfg: &ExperimentConfig, grid: &[f64]) -> Result<Output, RunError> {
    let model = CellModel::new(*p)?;
    let mut curves = Vec::new();
    let mut rates = Vec::new();
    let mut sims = Vec::new();
    for alloc in both_allocs(p) {
        for class in UserClass::BOTH {
            curves.push((class, alloc, model.fit(class, alloc)?));
            rates.push(json!({"scheme": alloc.scheme().label(), "class": class.label(), "mean_rate": model.mean_rate(class, alloc)?}));
        }
        if cfg.simulate {
            sims.extend(estimate_rate_delay(p, alloc, &cfg.traffic, &cfg.sim)?);
        }
    }
    let mut table = table_from("rate_cdf", curve_columns("rate_bits_per_slot_hz", "cdf_prob", cfg.simulate));
    for &r in grid {
        let mut row = vec![num(r)];
        row.extend(curves.iter().map(|(c, a, f)| num(rate_cdf(*c, *a, r, model.meta(), model.load(*c), f))));
        row.extend(sims.iter().map(|s| num(s.rate_cdf(r))));
        table.push(row);
    }
    Ok((vec![table], json!({ "mean_rates_bits_per_slot_hz": rates })))
}

fn delay_outage(p: &SystemParams, cfg: &ExperimentConfig, grid: &[f64]) -> Result<Output, RunError> {
    let model = CellModel::new(*p)?;
    let t = &cfg.traffic;
    let mut curves = Vec::new();
    let mut sims = Vec::new();
    for alloc in both_allocs(p) {
        for class in UserClass::BOTH {
            curves.push((class, alloc, model.fit(class, alloc)?));
        }
        if cfg.simulate {
            sims.extend(estimate_rate_delay(p, alloc, t, &cfg.sim)?);
        }
    }
    let mut table = table_from("delay_outage", curve_columns("delay_slots", "outage_prob", cfg.simulate));
    for &d in grid {
        let mut row = vec![num(d)];
        row.extend(curves.iter().map(|(c, a, f)| num(delay_ccdf(*c, *a, d, t.arrival(*c), model.load(*c), f))));
        row.extend(sims.iter().map(|s| num(s.delay_outage(d))));
        table.push(row);
    }
    let at_target: Vec<Value> = curves
        .iter()
        .map(|(c, a, f)| {
            let d = t.delay_thresh(*c);
            json!({"scheme": a.scheme().label(), "class": c.label(), "threshold_slots": d,
                   "outage": delay_ccdf(*c, *a, d, t.arrival(*c), model.load(*c), f)})
        })
        .collect();
    Ok((vec![table], json!({ "outage_at_threshold": at_target })))
}

fn rate_region(p: &SystemParams, grid: &[f64]) -> Result<Output, RunError> {
    let model = CellModel::new(*p)?;
    let rate = |class, alloc| match model.mean_rate(class, alloc) {
        Err(ModelError::Infeasible { .. }) => Ok(0.0),
        r => r,
    };
    let mut noma =
        Table::new("rate_region_noma", &["theta_power_frac", "cc_rate_bits_per_slot_hz", "ce_rate_bits_per_slot_hz"]);
    let mut oma =
        Table::new("rate_region_oma", &["eta_time_frac", "cc_rate_bits_per_slot_hz", "ce_rate_bits_per_slot_hz"]);
    let mut gains = Table::new("noma_gains", &["eta_time_frac", "cc_gain_ratio", "ce_gain_ratio"]);
    for &x in grid {
        for (table, alloc) in [(&mut noma, Allocation::Noma { theta: x }), (&mut oma, Allocation::Oma { eta: x })] {
            table.push(vec![num(x), num(rate(UserClass::Center, alloc)?), num(rate(UserClass::Edge, alloc)?)]);
        }
        let (gc, ge) = match noma_gain(p.theta, x, model.meta()) {
            Err(ModelError::Infeasible { .. }) => (0.0, 0.0),
            r => r?,
        };
        gains.push(vec![num(x), num(gc), num(ge)]);
    }
    let summary = json!({ "gains_at_theta": p.theta, "eta_max_both_gains_above_one": gain_eta_max(model.meta())? });
    Ok((vec![noma, oma, gains], summary))
}

fn ra(
    problem: Problem,
    p: &SystemParams,
    cfg: &ExperimentConfig,
    var: SweepVar,
    grid: &[f64],
) -> Result<Output, RunError> {
    let (name, unit) = match problem {
        Problem::P1 => ("ra_p1", "csr_bits_per_slot_hz"),
        Problem::P2 => ("ra_p2", "sec_packets_per_slot"),
    };
    let grid_obj = format!("grid_{unit}");
    let cols = [var.column(), "feasible", "allocation_frac", unit, "grid_feasible", "grid_allocation_frac", &grid_obj];
    let mut tables = [Scheme::Noma, Scheme::Oma].map(|s| Table::new(&format!("{name}_{}", s.label()), &cols));
    let base = CellModel::new(*p)?;
    let mut noma_ge_oma = true;
    for &x in grid {
        let model = match var {
            SweepVar::Nu => base.with_nu(x)?,
            _ => CellModel::new(SystemParams { tau: x, ..*p })?,
        };
        let mut objs = Vec::new();
        for (table, scheme) in tables.iter_mut().zip([Scheme::Noma, Scheme::Oma]) {
            let rule: RAResult = match problem {
                Problem::P1 => solve_p1(scheme, &model, &cfg.traffic)?,
                Problem::P2 => solve_p2(scheme, &model, &cfg.traffic)?,
            };
            let grid = brute_force_ra(problem, scheme, &model, &cfg.traffic, cfg.grid_size)?;
            table.push(vec![
                num(x),
                rule.feasible.to_string(),
                num(rule.allocation),
                num(rule.objective),
                grid.feasible.to_string(),
                num(grid.allocation),
                num(grid.objective),
            ]);
            objs.push(rule);
        }
        if objs[1].feasible && !(objs[0].feasible && objs[0].objective >= objs[1].objective) {
            noma_ge_oma = false;
        }
    }
    Ok((tables.to_vec(), json!({ "noma_at_least_oma_wherever_oma_feasible": noma_ge_oma })))
}

fn validate(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let scale = Scale { sim: cfg.sim, queue_slots: cfg.queue_slots, grid_size: cfg.grid_size };
    let results = run_all(&scale)?;
    let mut table = Table::new("validation", &["criterion", "title", "value", "tolerance", "pass", "detail"]);
    for r in &results {
        log::info!("{r}");
        table.push(vec![
            r.id.into(),
            r.title.into(),
            num(r.value),
            num(r.tolerance),
            r.pass.to_string(),
            r.detail.clone(),
        ]);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    let summary =
        json!({ "passed": results.len() - failed.len(), "total": results.len(), "failed": failed, "results": results });
    Ok((vec![table], summary))
}
