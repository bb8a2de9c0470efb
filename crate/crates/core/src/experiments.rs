//! Reproducible Monte Carlo experiments that emit plot-ready tables.
//!
//! Every trial draws its randomness from
//! `SeedSpec::for_experiment(seed, label, trial)`. The label names the
//! experiment and, for scans, the point `N`. Per-trial results are
//! collected in trial-index order and reduced sequentially, so a table
//! depends only on the configuration and never on the worker count.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bridge::{i_phi_all, sample_bridge, shift_bridge, sigma2_eps, t_n_eps, z_n_eps, DyadicPhases, IForm};
use crate::circlepoly::{
    lambda1_sandwich, max_on_circle, randpoly_thresholds, t_n_functional, CirclePolynomial, MAX_GRID_PER_ROOT,
    MAX_TOL,
};
use crate::ensemble::{build_dirichlet_gram, build_generalized, sample_phases, Density, ExponentSequence, PhaseVector};
use crate::inverse::{inverse_trace, vandermonde_inverse};
use crate::moments::{count_solutions, mp_cdf, mp_density, CountMethod, SetPartition};
use crate::par::Execution;
use crate::seed::SeedSpec;
use crate::spectral::{eig_hermitian, eig_symmetric, gram, min_eig_2x2_bound, outer_gram, JACOBI_TOL};
use crate::stats::{mean, quantile, stderr, variance, Histogram};
use crate::{Error, Result};

/// Largest Gram order the dense eigensolver is asked to handle.
pub const EIG_BUDGET: usize = 1024;

/// Largest `N` for which the minimum-eigenvalue scan calls the eigensolver.
pub const MINEIG_SOLVER_MAX_N: usize = 64;

/// Slack on `log λ_1` when testing the sandwich, i.e. a relative tolerance
/// covering rounding in `λ_1` and in the bounds.
pub const SANDWICH_LOG_SLACK: f64 = 1e-9;

/// Bin count used when the MP histogram is compared with the density.
pub const MP_TV_BINS: usize = 40;

/// The available experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    AtomProbe,
    PolymaxBound,
    MpHist,
    CrossingCount,
    MaxeigScan,
    MineigScan,
    BridgeSim,
    TnClt,
    InverseProbe,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::AtomProbe,
        Experiment::PolymaxBound,
        Experiment::MpHist,
        Experiment::CrossingCount,
        Experiment::MaxeigScan,
        Experiment::MineigScan,
        Experiment::BridgeSim,
        Experiment::TnClt,
        Experiment::InverseProbe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::AtomProbe => "atom-probe",
            Experiment::PolymaxBound => "polymax-bound",
            Experiment::MpHist => "mp-hist",
            Experiment::CrossingCount => "crossing-count",
            Experiment::MaxeigScan => "maxeig-scan",
            Experiment::MineigScan => "mineig-scan",
            Experiment::BridgeSim => "bridge-sim",
            Experiment::TnClt => "tn-clt",
            Experiment::InverseProbe => "inverse-probe",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Exponent sequences selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSeq {
    Linear,
    Pow2,
    Square,
}

impl KSeq {
    pub fn sequence(self) -> ExponentSequence {
        match self {
            KSeq::Linear => ExponentSequence::Linear,
            KSeq::Pow2 => ExponentSequence::PowerOfTwo,
            KSeq::Square => ExponentSequence::Square,
        }
    }

    pub fn name(self) -> &'static str {
        self.sequence().name()
    }
}

impl FromStr for KSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KSeq::Linear),
            "pow2" => Ok(KSeq::Pow2),
            "square" => Ok(KSeq::Square),
            _ => Err(Error::Config(format!("unknown exponent sequence `{s}` (linear, pow2, square)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown output format `{s}` (csv, json)"))),
        }
    }
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub ns: Vec<usize>,
    /// Explicit number of phases; takes precedence over `beta`.
    pub l: Option<usize>,
    /// Aspect ratio, `L = round(β N^d)`.
    pub beta: Option<f64>,
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    pub eps: f64,
    /// `None` lets the experiment pick its own sequences.
    pub k_seq: Option<KSeq>,
    pub grid: usize,
    pub depth: u32,
    /// Inclusive range of exponents `p` in thresholds `10^{-p}`.
    pub p_range: (u32, u32),
    /// Histogram bin count; `None` means Freedman–Diaconis.
    pub bins: Option<usize>,
}

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = ExperimentConfig {
            experiment,
            ns: vec![100],
            l: None,
            beta: None,
            d: 1,
            trials: 200,
            seed: 1,
            eps: 0.5,
            k_seq: None,
            grid: 1 << 16,
            depth: 10,
            p_range: (0, 16),
            bins: None,
        };
        match experiment {
            Experiment::AtomProbe => c.ns = vec![200],
            Experiment::PolymaxBound => c.ns = vec![16, 32, 64, 128, 256],
            Experiment::MpHist => c.k_seq = Some(KSeq::Pow2),
            Experiment::CrossingCount => {
                c.ns = vec![10, 20, 30, 40, 50];
                c.trials = 1;
            }
            Experiment::MaxeigScan => c.ns = vec![32, 64, 128, 256],
            Experiment::MineigScan => c.ns = vec![2, 4, 8, 16, 32, 64, 100],
            Experiment::BridgeSim => {
                c.trials = 100;
                c.eps = 0.01;
            }
            Experiment::TnClt => {
                c.ns = vec![400];
                c.trials = 2000;
                c.eps = 0.1;
            }
            Experiment::InverseProbe => {
                c.ns = vec![32];
                c.trials = 1000;
            }
        }
        c
    }

    /// Number of phases at scale `n`.
    pub fn phases_for(&self, n: usize) -> usize {
        let rows = n.saturating_pow(self.d as u32);
        match (self.l, self.beta) {
            (Some(l), _) => l,
            (None, Some(b)) => ((b * rows as f64).round() as usize).max(1),
            (None, None) => rows,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.ns.is_empty() || self.ns.contains(&0) {
            return bad("--n needs one or more positive values".into());
        }
        if self.trials == 0 {
            return bad("--trials must be positive".into());
        }
        if self.l == Some(0) {
            return bad("--l must be positive".into());
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return bad(format!("--beta must be positive, got {b}"));
            }
        }
        if !(self.d >= 1 && self.d <= 3) {
            return bad(format!("--d must be 1, 2 or 3, got {}", self.d));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("--eps must be positive, got {}", self.eps));
        }
        if self.bins == Some(0) {
            return bad("--bins must be positive".into());
        }
        if self.p_range.0 > self.p_range.1 {
            return bad(format!("--p-range {}:{} is empty", self.p_range.0, self.p_range.1));
        }
        let square_only = |name: &str| -> Result<()> {
            if self.d != 1 || self.l.is_some() || self.beta.is_some() {
                return Err(Error::Config(format!("{name} uses square one-dimensional matrices (L = N, d = 1)")));
            }
            Ok(())
        };
        match self.experiment {
            Experiment::PolymaxBound | Experiment::MineigScan => {
                square_only(self.experiment.name())?;
                if self.eps >= 1.0 {
                    return bad("--eps must lie in (0, 1)".into());
                }
                if self.experiment == Experiment::MineigScan && self.ns.contains(&1) {
                    return bad("mineig-scan needs N >= 2".into());
                }
            }
            Experiment::MpHist | Experiment::TnClt | Experiment::InverseProbe | Experiment::CrossingCount => {
                square_only(self.experiment.name())?;
            }
            Experiment::BridgeSim => {
                if !self.grid.is_power_of_two() || self.grid < 2 {
                    return bad(format!("--grid must be a power of two, got {}", self.grid));
                }
                if (1usize << self.depth.min(63)) > self.grid {
                    return bad(format!("--depth {} needs a grid of at least 2^{}", self.depth, self.depth));
                }
                if self.eps >= PI || self.eps < TAU / self.grid as f64 {
                    return bad(format!("--eps must lie in [2π/grid, π), got {}", self.eps));
                }
            }
            Experiment::AtomProbe | Experiment::MaxeigScan => {}
        }
        if self.experiment == Experiment::TnClt && self.eps >= PI {
            return bad("--eps must lie in (0, π)".into());
        }
        if self.experiment == Experiment::InverseProbe && self.ns.contains(&1) {
            return bad("inverse-probe needs N >= 2".into());
        }
        Ok(())
    }

    /// `key: value` echo of every field.
    pub fn echo(&self) -> Vec<(String, String)> {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
        vec![
            ("experiment".into(), self.experiment.name().into()),
            ("n".into(), self.ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")),
            ("l".into(), opt(self.l.map(|l| l.to_string()))),
            ("beta".into(), opt(self.beta.map(|b| b.to_string()))),
            ("d".into(), self.d.to_string()),
            ("trials".into(), self.trials.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("eps".into(), self.eps.to_string()),
            ("k_seq".into(), opt(self.k_seq.map(|k| k.name().into()))),
            ("grid".into(), self.grid.to_string()),
            ("depth".into(), self.depth.to_string()),
            ("p_range".into(), format!("{}:{}", self.p_range.0, self.p_range.1)),
            ("bins".into(), opt(self.bins.map(|b| b.to_string()))),
        ]
    }

    fn label(&self, n: usize) -> String {
        format!("{}/n={n}", self.experiment.name())
    }

    fn trial_seed(&self, label: &str, t: usize) -> SeedSpec {
        SeedSpec::for_experiment(self.seed, label, t as u64)
    }
}

/// One table cell. Integers stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
}

impl Cell {
    pub fn as_f64(self) -> f64 {
        match self {
            Cell::Int(i) => i as f64,
            Cell::Float(x) => x,
        }
    }

    fn to_json(self) -> serde_json::Value {
        match self {
            Cell::Int(i) => i64::try_from(i).map_or_else(|_| serde_json::Value::String(i.to_string()), Into::into),
            Cell::Float(x) => serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) if x.is_nan() => f.write_str("nan"),
            Cell::Float(x) if x.is_infinite() => f.write_str(if x > 0.0 { "inf" } else { "-inf" }),
            Cell::Float(x) if x == 0.0 || (1e-4..1e15).contains(&x.abs()) => write!(f, "{x}"),
            Cell::Float(x) => write!(f, "{x:e}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<u128> for Cell {
    fn from(x: u128) -> Self {
        Cell::Int(i128::try_from(x).unwrap_or(i128::MAX))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

/// A named table with a column schema, numeric rows and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|&(n, u)| Column { name: n.into(), unit: u.into() }).collect(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Shape(format!(
                "row of {} cells for {} columns in table {}",
                row.len(),
                self.columns.len(),
                self.name
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// A column as floating-point values.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    /// Header `name [unit],...` followed by one line per row.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)).collect::<Vec<_>>().join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    /// Line-oriented `key: value` sidecar.
    pub fn to_meta(&self) -> String {
        self.meta.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }

    pub fn to_json(&self) -> String {
        let columns: Vec<_> = self
            .columns
            .iter()
            .map(|c| serde_json::json!({ "name": c.name, "unit": c.unit }))
            .collect();
        let rows: Vec<Vec<_>> = self.rows.iter().map(|r| r.iter().map(|c| c.to_json()).collect()).collect();
        let meta: serde_json::Map<_, _> =
            self.meta.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
        let doc = serde_json::json!({ "name": self.name, "columns": columns, "rows": rows, "meta": meta });
        let mut s = serde_json::to_string_pretty(&doc).expect("tables serialize");
        s.push('\n');
        s
    }

    /// Write the table into `dir`, returning the files created.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        match format {
            OutputFormat::Csv => {
                let data = dir.join(format!("{}.csv", self.name));
                let meta = dir.join(format!("{}.meta", self.name));
                fs::write(&data, self.to_csv())?;
                fs::write(&meta, self.to_meta())?;
                Ok(vec![data, meta])
            }
            OutputFormat::Json => {
                let data = dir.join(format!("{}.json", self.name));
                fs::write(&data, self.to_json())?;
                Ok(vec![data])
            }
        }
    }
}

/// Write all tables of one run.
pub fn write_tables(tables: &[ResultTable], dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for t in tables {
        out.extend(t.write(dir, format)?);
    }
    Ok(out)
}

/// Run the configured experiment.
pub fn run(config: &ExperimentConfig, exec: Execution) -> Result<Vec<ResultTable>> {
    config.validate()?;
    let mut tables = match config.experiment {
        Experiment::AtomProbe => vec![run_atom_probe(config, exec)?],
        Experiment::PolymaxBound => vec![run_polymax_bound(config, exec)?],
        Experiment::MpHist => run_mp_hist(config, exec)?,
        Experiment::CrossingCount => vec![run_crossing_count(config, exec)?],
        Experiment::MaxeigScan => vec![run_maxeig_scan(config, exec)?],
        Experiment::MineigScan => vec![run_mineig_scan(config, exec)?],
        Experiment::BridgeSim => run_bridge_sim(config, exec)?,
        Experiment::TnClt => vec![run_tn_clt(config, exec)?],
        Experiment::InverseProbe => vec![run_inverse_probe(config, exec)?],
    };
    for t in &mut tables {
        let mut meta = vec![
            ("table".to_string(), t.name.clone()),
            ("code_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ];
        meta.extend(config.echo());
        meta.push(("rows".into(), t.rows.len().to_string()));
        meta.append(&mut t.meta);
        t.meta = meta;
    }
    Ok(tables)
}

fn mean_se(xs: &[f64]) -> Result<(f64, f64)> {
    let se = if xs.len() > 1 { stderr(xs)? } else { f64::NAN };
    Ok((mean(xs)?, se))
}

fn ensure_eig_budget(order: usize) -> Result<()> {
    if order > EIG_BUDGET {
        return Err(Error::Budget(format!("Gram order {order} exceeds the eigensolver budget of {EIG_BUDGET}")));
    }
    Ok(())
}

/// Eigenvalues of `V*V` through its real Dirichlet form.
fn gram_spectrum(config: &ExperimentConfig, n: usize, seed: SeedSpec) -> Result<Vec<f64>> {
    let phases = sample_phases(config.phases_for(n), config.d, &Density::Uniform, seed)?;
    Ok(eig_symmetric(&build_dirichlet_gram(&phases, n), JACOBI_TOL)?.values().to_vec())
}

/// Fraction `G_N(10^{-p})` of Gram eigenvalues at or below `10^{-p}`.
pub fn run_atom_probe(config: &ExperimentConfig, exec: Execution) -> Result<ResultTable> {
    let mut t = ResultTable::new(
        config.experiment.name(),
        &[("n", "1"), ("l", "1"), ("p", "1"), ("threshold", "1"), ("g", "fraction"), ("g_se", "fraction")],
    );
    let ps: Vec<u32> = (config.p_range.0..=config.p_range.1).collect();
    for &n in &config.ns {
        let l = config.phases_for(n);
        ensure_eig_budget(l)?;
        let label = config.label(n);
        let per_trial: Vec<Vec<f64>> = exec.try_map(config.trials, |tr| {
            let spectrum = gram_spectrum(config, n, config.trial_seed(&label, tr))?;
            Ok::<_, Error>(
                ps.iter()
                    .map(|&p| (spectrum.partition_point(|&v| v <= 10f64.powi(-(p as i32)))) as f64 / l as f64)
                    .collect(),
            )
        })?;
        for (j, &p) in ps.iter().enumerate() {
            let g: Vec<f64> = per_trial.iter().map(|r| r[j]).collect();
            let (m, se) = mean_se(&g)?;
            t.push(vec![n.into(), l.into(), (p as usize).into(), 10f64.powi(-(p as i32)).into(), m.into(), se.into()])?;
        }
    }
    Ok(t)
}

/// Mean `2 log max|P|` against both thresholds, with exceedance frequencies.
pub fn run_polymax_bound(config: &ExperimentConfig, exec: Execution) -> Result<ResultTable> {
    let mut t = ResultTable::new(
        config.experiment.name(),
        &[
            ("n", "1"),
            ("mean_2logmax", "nat"),
            ("se_2logmax", "nat"),
            ("threshold_gamma_sqrt_pi", "nat"),
            ("threshold_sqrt_gamma_pi", "nat"),
            ("freq_gamma_sqrt_pi", "fraction"),
            ("freq_sqrt_gamma_pi", "fraction"),
        ],
    );
    for &n in &config.ns {
        let label = config.label(n);
        let values = exec.try_map(config.trials, |tr| two_log_max(n, config.trial_seed(&label, tr)))?;
        let (m, se) = mean_se(&values)?;
        let (t1, t2) = randpoly_thresholds(n, config.eps);
        let freq = |th: f64| values.iter().filter(|&&v| v >= th).count() as f64 / values.len() as f64;
        t.push(vec![n.into(), m.into(), se.into(), t1.into(), t2.into(), freq(t1).into(), freq(t2).into()])?;
    }
    Ok(t)
}

fn two_log_max(n: usize, seed: SeedSpec) -> Result<f64> {
    let phases = sample_phases(n, 1, &Density::Uniform, seed)?;
    let p = CirclePolynomial::from_phases(&phases)?;
    Ok(2.0 * max_on_circle(&p, MAX_GRID_PER_ROOT * n, MAX_TOL).value)
}

/// Eigenvalues of `VV*` for every trial of a generalized matrix, in trial
/// order.
pub fn generalized_spectra(k: &ExponentSequence, n: usize, trials: usize, seed: u64, label: &str, exec: Execution) -> Result<Vec<Vec<f64>>> {
    ensure_eig_budget(n)?;
    exec.try_map(trials, |tr| {
        let phases = sample_phases(n, 1, &Density::Uniform, SeedSpec::for_experiment(seed, label, tr as u64))?;
        let v = build_generalized(&phases, k, n)?;
        Ok(eig_hermitian(&outer_gram(&v), JACOBI_TOL)?.values().to_vec())
    })
}

/// Freedman–Diaconis bin count over `[0, hi]`.
fn fd_bins(xs: &[f64], hi: f64) -> Result<usize> {
    let iqr = quantile(xs, 0.75)? - quantile(xs, 0.25)?;
    let w = 2.0 * iqr / (xs.len() as f64).cbrt();
    Ok(if w > 0.0 { ((hi / w).ceil() as usize).clamp(1, 10_000) } else { 1 })
}

/// Total-variation distance between histogram masses and MP bin masses.
pub fn mp_tv_distance(h: &Histogram) -> f64 {
    let masses = h.masses();
    0.5 * (0..h.bins())
        .map(|b| {
            let (lo, hi) = h.edges(b);
            (masses[b] - (mp_cdf(hi) - mp_cdf(lo))).abs()
        })
        .sum::<f64>()
}

/// Eigenvalue histogram of `VV*` with the MP overlay, plus trace moments.
pub fn run_mp_hist(config: &ExperimentConfig, exec: Execution) -> Result<Vec<ResultTable>> {
    let k = config.k_seq.unwrap_or(KSeq::Pow2);
    let n = config.ns[0];
    let spectra = generalized_spectra(&k.sequence(), n, config.trials, config.seed, &config.label(n), exec)?;
    let all: Vec<f64> = spectra.iter().flatten().copied().collect();
    let top = all.iter().copied().fold(0.0_f64, f64::max);
    let hi = if top > 0.0 { top * (1.0 + 1e-9) } else { 1.0 };
    let bins = match config.bins {
        Some(b) => b,
        None => fd_bins(&all, hi)?,
    };
    let hist = Histogram::with_bins(&all, 0.0, hi, bins)?;
    let overlay = k == KSeq::Pow2;
    let mut cols = vec![("bin_lo", "1"), ("bin_hi", "1"), ("center", "1"), ("mass", "fraction"), ("density", "1/unit")];
    if overlay {
        cols.extend([("mp_density", "1/unit"), ("mp_mass", "fraction")]);
    }
    let mut h = ResultTable::new(config.experiment.name(), &cols);
    let masses = hist.masses();
    for (b, &mass) in masses.iter().enumerate() {
        let (lo, hi) = hist.edges(b);
        let c = 0.5 * (lo + hi);
        let mut row: Vec<Cell> = vec![lo.into(), hi.into(), c.into(), mass.into(), (mass / hist.width()).into()];
        if overlay {
            row.extend([Cell::from(mp_density(c)), Cell::from(mp_cdf(hi) - mp_cdf(lo))]);
        }
        h.push(row)?;
    }
    h.set_meta("bins", hist.bins());
    h.set_meta("eigenvalues", all.len());
    if overlay {
        h.set_meta("tv_to_mp", mp_tv_distance(&hist));
        let h40 = Histogram::with_bins(&all, 0.0, hi, MP_TV_BINS)?;
        h.set_meta("tv_to_mp_40_bins", mp_tv_distance(&h40));
    }

    let mut m = ResultTable::new(
        format!("{}.moments", config.experiment.name()),
        &[("r", "1"), ("moment", "1"), ("se", "1"), ("noncrossing_count", "1")],
    );
    for r in 1..=4usize {
        let per_trial: Vec<f64> = spectra
            .iter()
            .map(|s| s.iter().map(|x| x.powi(r as i32)).sum::<f64>() / s.len() as f64)
            .collect();
        let (mu, se) = mean_se(&per_trial)?;
        m.push(vec![r.into(), mu.into(), se.into(), catalan(r).into()])?;
    }
    Ok(vec![h, m])
}

fn catalan(r: usize) -> u128 {
    (0..r).fold(1u128, |c, i| c * 2 * (2 * i as u128 + 1) / (i as u128 + 2))
}

/// Exact four-cycle solution counts `|S_{ρ,N}|` and `|S_{ρ,N}| / N³`.
pub fn run_crossing_count(config: &ExperimentConfig, exec: Execution) -> Result<ResultTable> {
    let seqs: Vec<KSeq> = config.k_seq.map_or_else(|| vec![KSeq::Square, KSeq::Pow2], |k| vec![k]);
    let names: Vec<(String, String)> =
        seqs.iter().map(|k| (format!("count_{}", k.name()), format!("normalized_{}", k.name()))).collect();
    let mut cols = vec![("n", "1")];
    for (c, nm) in &names {
        cols.push((c.as_str(), "1"));
        cols.push((nm.as_str(), "1/N^3"));
    }
    let mut t = ResultTable::new(config.experiment.name(), &cols);
    let rho = SetPartition::four_cycle();
    for &n in &config.ns {
        let mut row = vec![n.into()];
        for k in &seqs {
            let c = count_solutions(&rho, n, &k.sequence(), CountMethod::Auto, exec)?;
            row.push(c.count.into());
            row.push(c.normalized.into());
        }
        t.push(row)?;
    }
    t.set_meta("partition", &rho);
    Ok(t)
}

/// `λ_L` statistics with the `log N^d` and `log N^d / log log N^d` ratios.
pub fn run_maxeig_scan(config: &ExperimentConfig, exec: Execution) -> Result<ResultTable> {
    let mut t = ResultTable::new(
        config.experiment.name(),
        &[
            ("n", "1"),
            ("l", "1"),
            ("mean_lmax", "1"),
            ("se_lmax", "1"),
            ("max_lmax", "1"),
            ("max_ratio_log", "1"),
            ("mean_ratio_loglog", "1"),
        ],
    );
    for &n in &config.ns {
        let l = config.phases_for(n);
        ensure_eig_budget(l)?;
        let label = config.label(n);
        let lmax = exec.try_map(config.trials, |tr| {
            Ok::<_, Error>(*gram_spectrum(config, n, config.trial_seed(&label, tr))?.last().expect("L >= 1"))
        })?;
        let (m, se) = mean_se(&lmax)?;
        let top = lmax.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_nd = config.d as f64 * (n as f64).ln();
        let loglog: Vec<f64> = lmax.iter().map(|v| v * log_nd.ln() / log_nd).collect();
        t.push(vec![n.into(), l.into(), m.into(), se.into(), top.into(), (top / log_nd).into(), mean(&loglog)?.into()])?;
    }
    Ok(t)
}

/// `λ_1(V*V) = 1/‖V^{-1}‖²` from the closed-form inverse. Unlike a direct
/// eigensolve, whose absolute error floor is about `ε‖V*V‖`, this keeps
/// relative accuracy when `λ_1` is tiny.
pub fn lambda1_via_inverse(phases: &PhaseVector) -> Result<f64> {
    let m = vandermonde_inverse(&phases.nodes()?)?.normalized();
    Ok(1.0 / eig_hermitian(&gram(&m), JACOBI_TOL)?.max())
}

/// Per-trial quantities of the minimum-eigenvalue scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MineigTrial {
    /// `log λ_1`, `NaN` above the solver cut-off.
    pub log_lambda1: f64,
    pub log_lower: f64,
    pub log_upper: f64,
    pub log_upper_4n2: f64,
    pub two_log_max: f64,
    /// `|λ_1 - (1 - |D_N|)|` for `N = 2`, `NaN` otherwise.
    pub err_2x2: f64,
    pub in_sandwich: bool,
}

pub fn mineig_trial(n: usize, seed: SeedSpec) -> Result<MineigTrial> {
    let phases = sample_phases(n, 1, &Density::Uniform, seed)?;
    let p = CirclePolynomial::from_phases(&phases)?;
    let grid = MAX_GRID_PER_ROOT * n;
    let s = lambda1_sandwich(&p, grid, MAX_TOL)?;
    let two_log_max = 2.0 * max_on_circle(&p, grid, MAX_TOL).value;
    let (mut log_lambda1, mut err_2x2, mut in_sandwich) = (f64::NAN, f64::NAN, true);
    if n <= MINEIG_SOLVER_MAX_N {
        let l1 = lambda1_via_inverse(&phases)?;
        log_lambda1 = l1.max(0.0).ln();
        in_sandwich = log_lambda1 >= s.log_lower - SANDWICH_LOG_SLACK && log_lambda1 <= s.log_best_upper() + SANDWICH_LOG_SLACK;
        if n == 2 {
            err_2x2 = (l1 - min_eig_2x2_bound(&phases, n)?).abs();
        }
    }
    Ok(MineigTrial {
        log_lambda1,
        log_lower: s.log_lower,
        log_upper: s.log_upper,
        log_upper_4n2: s.log_upper_4n2,
        two_log_max,
        err_2x2,
        in_sandwich,
    })
}

/// `log λ_1`, its polynomial sandwich and the exceedance frequency of
/// `2 log max|P| ≥ √(γπ) ε √N / 2`.
pub fn run_mineig_scan(config: &ExperimentConfig, exec: Execution) -> Result<ResultTable> {
    let mut t = ResultTable::new(
        config.experiment.name(),
        &[
            ("n", "1"),
            ("mean_log_lambda1", "nat"),
            ("mean_log_lower", "nat"),
            ("mean_log_upper", "nat"),
            ("mean_log_upper_4n2", "nat"),
            ("sandwich_violations", "trials"),
            ("freq_sqrt_gamma_pi", "fraction"),
            ("max_err_2x2", "1"),
        ],
    );
    for &n in &config.ns {
        let label = config.label(n);
        let trials = exec.try_map(config.trials, |tr| mineig_trial(n, config.trial_seed(&label, tr)))?;
        let col = |f: fn(&MineigTrial) -> f64| -> Result<f64> { mean(&trials.iter().map(f).collect::<Vec<_>>()) };
        let (_, th) = randpoly_thresholds(n, config.eps);
        let freq = trials.iter().filter(|x| x.two_log_max >= th).count() as f64 / trials.len() as f64;
        let violations = trials.iter().filter(|x| !x.in_sandwich).count();
        let err = trials.iter().map(|x| x.err_2x2).fold(f64::NAN, f64::max);
        t.push(vec![
            n.into(),
            col(|x| x.log_lambda1)?.into(),
            col(|x| x.log_lower)?.into(),
            col(|x| x.log_upper)?.into(),
            col(|x| x.log_upper_4n2)?.into(),
            violations.into(),
            freq.into(),
            err.into(),
        ])?;
    }
    Ok(t)
}

/// Bridge paths, `I_φ` at dyadic phases, `I*` and its CDF, and one trace.
pub fn run_bridge_sim(config: &ExperimentConfig, exec: Execution) -> Result<Vec<ResultTable>> {
    let name = config.experiment.name();
    let m = config.grid;
    let dy = DyadicPhases::new(config.depth)?;
    let idx: Vec<usize> = dy.phases().iter().map(|&phi| ((phi / TAU) * m as f64).round() as usize % m).collect();
    let label = format!("{name}/grid={m}");
    let paths = exec.try_map(config.trials, |tr| {
        let path = sample_bridge(m, config.trial_seed(&label, tr))?;
        let all = i_phi_all(&path, config.eps, IForm::Raw)?;
        Ok::<_, Error>((path, idx.iter().map(|&j| all[j]).collect::<Vec<f64>>(), all[m / 2]))
    })?;

    let mut summary = ResultTable::new(name, &[("path", "1"), ("i_pi", "1"), ("i_star", "1")]);
    let mut iphi = ResultTable::new(format!("{name}.iphi"), &[("path", "1"), ("r", "1"), ("phi", "rad"), ("i_phi", "1")]);
    let mut stars = Vec::with_capacity(paths.len());
    for (pi, (_, vals, i_pi)) in paths.iter().enumerate() {
        let star = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        stars.push(star);
        summary.push(vec![pi.into(), (*i_pi).into(), star.into()])?;
        for (r, (&phi, &v)) in dy.phases().iter().zip(vals).enumerate() {
            iphi.push(vec![pi.into(), r.into(), phi.into(), v.into()])?;
        }
    }
    let i_pis: Vec<f64> = paths.iter().map(|p| p.2).collect();
    let (mu, se) = mean_se(&i_pis)?;
    summary.set_meta("mean_i_pi", mu);
    summary.set_meta("se_i_pi", se);

    let mut cdf = ResultTable::new(format!("{name}.cdf"), &[("rank", "1"), ("i_star", "1"), ("cdf", "fraction")]);
    let mut sorted = stars.clone();
    sorted.sort_by(f64::total_cmp);
    for (r, &v) in sorted.iter().enumerate() {
        cdf.push(vec![(r + 1).into(), v.into(), ((r + 1) as f64 / sorted.len() as f64).into()])?;
    }

    let (path, _, _) = &paths[0];
    let shifted = shift_bridge(path, PI);
    let all = i_phi_all(path, config.eps, IForm::Raw)?;
    let mut trace = ResultTable::new(
        format!("{name}.trace"),
        &[("j", "1"), ("psi", "rad"), ("w", "1"), ("w_shifted_pi", "1"), ("i_phi", "1")],
    );
    for j in 0..=m {
        trace.push(vec![
            j.into(),
            (TAU * j as f64 / m as f64).into(),
            path.values()[j].into(),
            shifted.values()[j].into(),
            all[j % m].into(),
        ])?;
    }
    Ok(vec![summary, iphi, cdf, trace])
}

/// `T_N(φ)`, `T_{N,ε}(φ)` and `Z_{N,ε}(φ)` at `φ = π` per trial.
pub fn run_tn_clt(config: &ExperimentConfig, exec: Execution) -> Result<ResultTable> {
    let n = config.ns[0];
    let label = config.label(n);
    let phi = PI;
    let rows = exec.try_map(config.trials, |tr| {
        let phases = sample_phases(n, 1, &Density::Uniform, config.trial_seed(&label, tr))?;
        let angles = phases.angles()?;
        let p = CirclePolynomial::from_angles(angles.clone())?;
        Ok::<_, Error>([
            t_n_functional(&p, phi),
            t_n_eps(&angles, phi, config.eps)?,
            z_n_eps(&angles, phi, config.eps)?,
        ])
    })?;
    let mut t = ResultTable::new(
        config.experiment.name(),
        &[("trial", "1"), ("t_n", "nat"), ("t_n_eps", "nat"), ("z_n_eps", "nat")],
    );
    for (i, r) in rows.iter().enumerate() {
        t.push(vec![i.into(), r[0].into(), r[1].into(), r[2].into()])?;
    }
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let (tn, z) = (col(0), col(2));
    t.set_meta("phi", phi);
    t.set_meta("mean_t_n", mean(&tn)?);
    t.set_meta("var_t_n", if tn.len() > 1 { variance(&tn)? } else { f64::NAN });
    t.set_meta("reference_var_t_n", PI * PI / 3.0);
    t.set_meta("mean_z_n_eps", mean(&z)?);
    t.set_meta("var_z_n_eps", if z.len() > 1 { variance(&z)? } else { f64::NAN });
    t.set_meta("sigma2_eps", sigma2_eps(config.eps)?);
    Ok(t)
}

/// Per-trial `tr_N((V*V)^{-1})` and its running mean. The inverse moments
/// are infinite, so the running mean is a divergence probe only.
pub fn run_inverse_probe(config: &ExperimentConfig, exec: Execution) -> Result<ResultTable> {
    let n = config.ns[0];
    let label = config.label(n);
    let values = exec.try_map(config.trials, |tr| {
        inverse_trace(&sample_phases(n, 1, &Density::Uniform, config.trial_seed(&label, tr))?)
    })?;
    let mut t = ResultTable::new(config.experiment.name(), &[("trial", "1"), ("value", "1"), ("running_mean", "1")]);
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        acc += v;
        t.push(vec![i.into(), (*v).into(), (acc / (i + 1) as f64).into()])?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(e: Experiment) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(e);
        c.trials = 4;
        match e {
            Experiment::AtomProbe => c.ns = vec![8],
            Experiment::PolymaxBound | Experiment::MineigScan => c.ns = vec![2, 6],
            Experiment::MpHist => c.ns = vec![8],
            Experiment::CrossingCount => c.ns = vec![3, 5],
            Experiment::MaxeigScan => c.ns = vec![4, 8],
            Experiment::BridgeSim => {
                c.grid = 256;
                c.depth = 4;
                c.eps = 0.1;
            }
            Experiment::TnClt => c.ns = vec![16],
            Experiment::InverseProbe => c.ns = vec![6],
        }
        c
    }

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!(matches!("nope".parse::<Experiment>(), Err(Error::Config(_))));
    }

    #[test]
    fn every_experiment_runs_and_echoes_config() {
        for e in Experiment::ALL {
            let tables = run(&small(e), Execution::Sequential).unwrap();
            assert!(!tables.is_empty());
            for t in &tables {
                assert_eq!(t.meta_value("experiment"), Some(e.name()));
                assert_eq!(t.meta_value("seed"), Some("1"));
                assert!(t.rows.iter().all(|r| r.len() == t.columns.len()));
            }
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        for e in Experiment::ALL {
            let c = small(e);
            let bytes = |exec| -> Vec<String> {
                run(&c, exec).unwrap().iter().flat_map(|t| [t.to_csv(), t.to_meta(), t.to_json()]).collect()
            };
            assert_eq!(bytes(Execution::Sequential), bytes(Execution::Parallel), "{e}");
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new("x", &[("a", "1"), ("b", "rad")]);
        t.push(vec![Cell::Int(3), Cell::Float(0.5)]).unwrap();
        t.push(vec![Cell::Int(-1), Cell::Float(1e-12)]).unwrap();
        assert_eq!(t.to_csv(), "a [1],b [rad]\n3,0.5\n-1,1e-12\n");
        assert!(t.push(vec![Cell::Int(1)]).is_err());
        t.set_meta("k", 7);
        assert_eq!(t.to_meta(), "k: 7\n");
        assert!(t.to_json().contains("\"rad\""));
    }

    #[test]
    fn atom_probe_is_monotone_and_bounded() {
        let mut c = small(Experiment::AtomProbe);
        c.beta = Some(2.0);
        let t = run_atom_probe(&c, Execution::Sequential).unwrap();
        let g = t.column("g").unwrap();
        assert!(g.windows(2).all(|w| w[1] <= w[0]));
        assert!(g.iter().all(|&v| (0.0..=1.0).contains(&v)));
        // rank N out of L = 2N
        let p = t.column("p").unwrap();
        for (pv, gv) in p.iter().zip(&g) {
            if *pv <= 10.0 {
                assert!(*gv >= 0.5);
            }
        }
    }

    #[test]
    fn mp_hist_schema() {
        let mut c = small(Experiment::MpHist);
        let t = run_mp_hist(&c, Execution::Sequential).unwrap();
        let mass: f64 = t[0].column("mass").unwrap().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(t[0].column_index("mp_density").is_some());
        assert!((t[1].column("moment").unwrap()[0] - 1.0).abs() < 1e-9);
        c.k_seq = Some(KSeq::Linear);
        let t = run_mp_hist(&c, Execution::Sequential).unwrap();
        assert!(t[0].column_index("mp_density").is_none());
    }

    #[test]
    fn crossing_count_pow2_closed_form() {
        let mut c = small(Experiment::CrossingCount);
        c.ns = vec![4, 7, 12];
        let t = run_crossing_count(&c, Execution::Sequential).unwrap();
        for (n, cnt) in c.ns.iter().zip(t.column("count_pow2").unwrap()) {
            assert_eq!(cnt, (2 * n * n - n) as f64);
        }
    }

    #[test]
    fn maxeig_at_least_one() {
        let t = run_maxeig_scan(&small(Experiment::MaxeigScan), Execution::Sequential).unwrap();
        assert!(t.column("mean_lmax").unwrap().iter().all(|&v| v >= 1.0 - 1e-12));
    }

    #[test]
    fn mineig_two_by_two_closed_form() {
        let t = run_mineig_scan(&small(Experiment::MineigScan), Execution::Sequential).unwrap();
        assert!(t.column("max_err_2x2").unwrap()[0] < 1e-9);
        assert!(t.column("sandwich_violations").unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lambda1_routes_agree() {
        for t in 0..5 {
            let th: Vec<f64> = (0..12).map(|k| (k as f64 + 0.3 * ((t * 7 + k) % 5) as f64 / 5.0) / 12.0).collect();
            let p = PhaseVector::from_slice(&th).unwrap();
            let direct = eig_symmetric(&build_dirichlet_gram(&p, 12), JACOBI_TOL).unwrap().min();
            let via = lambda1_via_inverse(&p).unwrap();
            assert!((direct - via).abs() < 1e-10 * (1.0 + direct), "{direct} {via}");
        }
    }

    #[test]
    fn bridge_trace_shape() {
        let c = small(Experiment::BridgeSim);
        let t = run_bridge_sim(&c, Execution::Sequential).unwrap();
        let tr = &t[3];
        assert_eq!(tr.rows.len(), c.grid + 1);
        let w = tr.column("w").unwrap();
        assert_eq!((w[0], w[c.grid]), (0.0, 0.0));
        let (ip, is) = (t[0].column("i_pi").unwrap(), t[0].column("i_star").unwrap());
        assert!(ip.iter().zip(&is).all(|(a, b)| b >= a));
    }

    #[test]
    fn config_errors() {
        let mut c = ExperimentConfig::defaults(Experiment::PolymaxBound);
        c.eps = 1.5;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = ExperimentConfig::defaults(Experiment::BridgeSim);
        c.grid = 1000;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = ExperimentConfig::defaults(Experiment::AtomProbe);
        c.ns = vec![2000];
        assert!(matches!(run(&c, Execution::Sequential), Err(Error::Budget(_))));
    }
}
