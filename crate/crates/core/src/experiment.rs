//! Experiment configuration, presets, and the on-disk artifacts of a run.
//!
//! A sweep experiment writes three files into its output directory:
//! `<name>.csv` (one row per `tf`), `<name>.summary.json` (fitted against
//! predicted laws) and `<name>.network.json` (the adjacency matrix used).
//! The estimator calibration writes `<name>.csv` and `<name>.summary.json`
//! with its own schema.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{estimate_lambda_max, estimate_lambda_min};
use crate::gramian::DriverSet;
use crate::netgen::{self, generate_ba, weight_and_shift, DefinitenessClass, NetworkJson, WeightedNetwork};
use crate::par::Execution;
use crate::scaling::{self, check_law, predict, DriverRegime, LawCheck, Regime, SweepOptions, SweepRecord, Tolerances};
use crate::spectral::{eig_sym, SpectralDecomposition};
use crate::{Error, Magnitude, Result};

pub const DEFAULT_SEED: u64 = 1;
pub const CSV_HEADER: [&str; 9] =
    ["tf", "lower_exact", "upper_exact", "lower_est", "upper_est", "lower_trace_prior", "cond", "overflow_path", "error"];
pub const CALIBRATION_HEADER: [&str; 5] = ["index", "lambda_min", "lambda_min_est", "lambda_max", "lambda_max_est"];

const CALIBRATION_STREAM: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSpec {
    /// Barabási–Albert topology, uniform weights, diagonal `a + s_i`.
    Ba { n: usize, edges_per_new_node: usize, weight_interval: [f64; 2], a: f64, seed: u64 },
    /// A network JSON file as written by a previous run.
    File { path: PathBuf },
}

/// `"all"`, an explicit index list, or `{"count": k, "seed": s}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DriverSpec {
    Keyword(String),
    List(Vec<usize>),
    Random { count: usize, seed: u64 },
}

impl DriverSpec {
    pub fn all() -> Self {
        DriverSpec::Keyword("all".into())
    }

    pub fn resolve(&self, n: usize) -> Result<DriverSet> {
        match self {
            DriverSpec::Keyword(k) if k == "all" => Ok(DriverSet::all(n)),
            DriverSpec::Keyword(k) => Err(Error::config("drivers", format!("unknown keyword {k:?}; expected \"all\""))),
            DriverSpec::List(v) => DriverSet::new(n, v.clone()).map_err(|e| Error::config("drivers", e.to_string())),
            DriverSpec::Random { count, seed } => {
                DriverSet::random(*count, n, *seed).map_err(|e| Error::config("drivers", e.to_string()))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default = "default_true")]
    pub log: bool,
}

fn default_true() -> bool {
    true
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { min: 1e-4, max: 1e2, points: 49, log: true }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::config("grid.points", "tf grid is empty"));
        }
        if !(self.min.is_finite() && self.min > 0.0) {
            return Err(Error::config("grid.min", format!("must be positive, got {}", self.min)));
        }
        if !self.max.is_finite() || self.max < self.min || (self.points > 1 && self.max == self.min) {
            return Err(Error::config("grid.max", format!("must exceed grid.min = {}, got {}", self.min, self.max)));
        }
        Ok(())
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let last = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|k| {
                let u = k as f64 / last;
                if k == 0 {
                    self.min
                } else if k + 1 == self.points {
                    self.max
                } else if self.log {
                    10f64.powf(self.min.log10() + u * (self.max.log10() - self.min.log10()))
                } else {
                    self.min + u * (self.max - self.min)
                }
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub network: NetworkSpec,
    pub drivers: DriverSpec,
    #[serde(default)]
    pub grid: GridSpec,
    /// Compute lower bounds only.
    #[serde(default)]
    pub lower_only: bool,
    /// Output directory; not part of the config hash.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
        return Err(Error::config("name", format!("must be non-empty and use [A-Za-z0-9._-], got {name:?}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        check_name(&self.name)?;
        match &self.network {
            NetworkSpec::Ba { n, edges_per_new_node, weight_interval: [lo, hi], a, .. } => {
                if *edges_per_new_node == 0 {
                    return Err(Error::config("network.edges_per_new_node", "must be at least 1"));
                }
                if *n < edges_per_new_node + 1 {
                    return Err(Error::config("network.n", format!("must be at least edges_per_new_node + 1 = {}", edges_per_new_node + 1)));
                }
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::config("network.weight_interval", format!("need finite lo ≤ hi, got [{lo}, {hi}]")));
                }
                if !a.is_finite() {
                    return Err(Error::config("network.a", "must be finite"));
                }
            }
            NetworkSpec::File { path } => {
                if path.as_os_str().is_empty() {
                    return Err(Error::config("network.path", "empty path"));
                }
            }
        }
        match &self.drivers {
            DriverSpec::Keyword(k) if k != "all" => {
                return Err(Error::config("drivers", format!("unknown keyword {k:?}; expected \"all\"")))
            }
            DriverSpec::List(v) if v.is_empty() => return Err(Error::config("drivers", "empty driver list")),
            DriverSpec::Random { count: 0, .. } => return Err(Error::config("drivers.count", "must be at least 1")),
            _ => {}
        }
        self.grid.validate()?;
        self.tolerances.validate()
    }

    /// SHA-256 of the canonical JSON form with the output directory cleared.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        sha256_hex(serde_json::to_string(&c).expect("config serializes").as_bytes())
    }

    pub fn seed(&self) -> Option<u64> {
        match self.network {
            NetworkSpec::Ba { seed, .. } => Some(seed),
            NetworkSpec::File { .. } => None,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Network, spectrum, class and drivers of one experiment.
#[derive(Clone, Debug)]
pub struct Instance {
    pub network: WeightedNetwork,
    pub spec: SpectralDecomposition,
    pub class: DefinitenessClass,
    pub drivers: DriverSet,
}

pub fn build_network(spec: &NetworkSpec) -> Result<WeightedNetwork> {
    match spec {
        NetworkSpec::Ba { n, edges_per_new_node, weight_interval: [lo, hi], a, seed } => {
            let graph = generate_ba(*n, *edges_per_new_node, *seed)?;
            weight_and_shift(&graph, (*lo, *hi), *a, *seed)
        }
        NetworkSpec::File { path } => {
            let text = fs::read_to_string(path)?;
            let json: NetworkJson = serde_json::from_str(&text).map_err(|e| Error::config("network.path", e.to_string()))?;
            WeightedNetwork::from_json(&json)
        }
    }
}

pub fn build_instance(config: &ExperimentConfig) -> Result<Instance> {
    config.validate()?;
    let network = build_network(&config.network)?;
    let spec = eig_sym(network.entries())?;
    let class = netgen::classify_eigenvalues(spec.eigenvalues().as_slice(), netgen::DEFAULT_CLASSIFY_TOL);
    let drivers = config.drivers.resolve(network.n())?;
    Ok(Instance { network, spec, class, drivers })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessStats {
    pub cells: usize,
    pub estimated_at_least_prior: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    /// Largest `|est/exact − 1|` over the cells, per bound.
    pub max_rel_err_lower: Option<f64>,
    pub max_rel_err_upper: Option<f64>,
    /// Cells where an estimate falls on the wrong side of the exact bound.
    pub one_sided_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub n: usize,
    pub class: DefinitenessClass,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub drivers: Vec<usize>,
    pub driver_regime: DriverRegime,
    pub grid: GridSpec,
    pub cells: usize,
    pub failed_cells: usize,
    pub overflow_cells: usize,
    pub extended_precision_cells: usize,
    pub checks: Vec<LawCheck>,
    pub estimator: EstimatorStats,
    pub tightness: TightnessStats,
    /// At least `min_cell_success` of the cells succeeded.
    pub cells_ok: bool,
    /// Every law check passed.
    pub laws_ok: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub instance: Instance,
    pub records: Vec<SweepRecord>,
    pub summary: Summary,
}

pub fn run(config: &ExperimentConfig, execution: Execution) -> Result<ExperimentOutput> {
    let instance = build_instance(config)?;
    let grid = config.grid.values()?;
    let options = SweepOptions {
        execution,
        extended_precision_cond: config.tolerances.extended_precision_cond,
        lower_only: config.lower_only,
    };
    let records = scaling::sweep(&instance.spec, &instance.drivers, &grid, &options)?;
    let summary = summarize(config, &instance, &records)?;
    Ok(ExperimentOutput { config: config.clone(), instance, records, summary })
}

/// Predicted laws of `instance` for both regimes, lower then upper.
pub fn predicted_laws(instance: &Instance) -> Result<Vec<scaling::ScalingLaw>> {
    let lambdas = instance.spec.eigenvalues().as_slice();
    let regime = DriverRegime::of(&instance.drivers);
    let mut laws = Vec::new();
    for r in [Regime::SmallTf, Regime::LargeTf] {
        let (lo, up) = predict(instance.class, regime, r, lambdas)?;
        laws.push(lo);
        laws.push(up);
    }
    Ok(laws)
}

fn summarize(config: &ExperimentConfig, instance: &Instance, records: &[SweepRecord]) -> Result<Summary> {
    let tol = &config.tolerances;
    let radius = instance.spec.spectral_radius();
    let checks: Vec<LawCheck> = predicted_laws(instance)?
        .iter()
        .filter(|law| !(config.lower_only && law.bound == scaling::Bound::Upper))
        .map(|law| check_law(records, law, radius, tol))
        .collect();

    let mut estimator = EstimatorStats { max_rel_err_lower: None, max_rel_err_upper: None, one_sided_violations: 0 };
    let mut tight = TightnessStats { cells: 0, estimated_at_least_prior: 0, fraction: 0.0 };
    for r in records {
        if let (Some(ex), Some(est)) = (r.lower_exact, r.lower_est) {
            let e = est.rel_diff(ex);
            estimator.max_rel_err_lower = Some(estimator.max_rel_err_lower.map_or(e, |m| m.max(e)));
            if est.ln() > ex.ln() + 1e-9 {
                estimator.one_sided_violations += 1;
            }
        }
        if let (Some(ex), Some(est)) = (r.upper_exact, r.upper_est) {
            let e = est.rel_diff(ex);
            estimator.max_rel_err_upper = Some(estimator.max_rel_err_upper.map_or(e, |m| m.max(e)));
            if est.ln() < ex.ln() - 1e-9 {
                estimator.one_sided_violations += 1;
            }
        }
        if let (Some(est), Some(prior)) = (r.lower_est, r.lower_trace_prior) {
            tight.cells += 1;
            if est.ln() >= prior.ln() - 1e-12 {
                tight.estimated_at_least_prior += 1;
            }
        }
    }
    if tight.cells > 0 {
        tight.fraction = tight.estimated_at_least_prior as f64 / tight.cells as f64;
    }
    let failed = records.iter().filter(|r| !r.is_complete()).count();
    let cells = records.len();
    Ok(Summary {
        name: config.name.clone(),
        config_hash: config.hash(),
        seed: config.seed().or(Some(instance.network.seed())),
        n: instance.spec.n(),
        class: instance.class,
        lambda_min: instance.spec.lambda_min(),
        lambda_max: instance.spec.lambda_max(),
        drivers: instance.drivers.indices().to_vec(),
        driver_regime: DriverRegime::of(&instance.drivers),
        grid: config.grid,
        cells,
        failed_cells: failed,
        overflow_cells: records.iter().filter(|r| r.overflow_path).count(),
        extended_precision_cells: records.iter().filter(|r| r.extended_precision).count(),
        laws_ok: checks.iter().all(|c| c.pass),
        checks,
        estimator,
        tightness: tight,
        cells_ok: (cells - failed) as f64 >= tol.min_cell_success * cells as f64,
    })
}

fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn format_mag(m: Option<Magnitude>) -> String {
    m.map(|m| m.to_string()).unwrap_or_default()
}

/// Sweep records as CSV with the fixed header.
pub fn sweep_csv(records: &[SweepRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            format_f64(r.tf),
            format_mag(r.lower_exact),
            format_mag(r.upper_exact),
            format_mag(r.lower_est),
            format_mag(r.upper_est),
            format_mag(r.lower_trace_prior),
            format_mag(r.cond),
            r.overflow_path.to_string(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub network: Option<PathBuf>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

impl ExperimentOutput {
    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        sweep_csv(&self.records)
    }

    pub fn summary_bytes(&self) -> Result<Vec<u8>> {
        json_bytes(&self.summary)
    }

    pub fn network_bytes(&self) -> Result<Vec<u8>> {
        json_bytes(&self.instance.network.to_json())
    }

    pub fn write(&self, dir: &Path) -> Result<Artifacts> {
        fs::create_dir_all(dir)?;
        let name = &self.config.name;
        let a = Artifacts {
            csv: dir.join(format!("{name}.csv")),
            summary: dir.join(format!("{name}.summary.json")),
            network: Some(dir.join(format!("{name}.network.json"))),
        };
        // compute everything before touching the disk
        let (csv, summary, network) = (self.csv_bytes()?, self.summary_bytes()?, self.network_bytes()?);
        write_file(&a.csv, &csv)?;
        write_file(&a.summary, &summary)?;
        write_file(a.network.as_ref().expect("set above"), &network)?;
        Ok(a)
    }
}

/// Settings of the random SPD estimator calibration: matrix `i` (1-based) has
/// `λ_min = step·i` and each following eigenvalue is the previous one times a
/// uniform draw from `ratio`, in a Haar-random orthonormal basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    pub name: String,
    pub count: usize,
    pub n: usize,
    pub step: f64,
    pub ratio: [f64; 2],
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig { name: "fig2prime".into(), count: 25, n: 10, step: 4.0, ratio: [1.0, 3.0], seed: DEFAULT_SEED, output: None }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        check_name(&self.name)?;
        if self.count == 0 {
            return Err(Error::config("count", "must be at least 1"));
        }
        if self.n < 2 {
            return Err(Error::config("n", "must be at least 2"));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::config("step", "must be positive"));
        }
        let [lo, hi] = self.ratio;
        if !(lo >= 1.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::config("ratio", format!("need 1 ≤ lo ≤ hi, got [{lo}, {hi}]")));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        sha256_hex(serde_json::to_string(&c).expect("config serializes").as_bytes())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub index: usize,
    pub lambda_min: f64,
    pub lambda_min_est: f64,
    pub lambda_max: f64,
    pub lambda_max_est: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub count: usize,
    pub n: usize,
    pub median_rel_err_min: f64,
    pub median_rel_err_max: f64,
    /// Least-squares slope of estimated on true eigenvalues.
    pub slope_min: f64,
    pub slope_max: f64,
    /// Matrices where `f(tr M², tr M⁴)` fell below the true `λ_max`.
    pub max_estimate_below_truth: usize,
}

#[derive(Clone, Debug)]
pub struct CalibrationOutput {
    pub points: Vec<CalibrationPoint>,
    pub summary: CalibrationSummary,
}

/// Random symmetric positive definite matrix with the given eigenvalues.
pub fn random_spd<R: Rng>(eigenvalues: &[f64], rng: &mut R) -> DMatrix<f64> {
    let n = eigenvalues.len();
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let m = &q * DMatrix::from_diagonal(&DVector::from_column_slice(eigenvalues)) * q.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn calibrate(config: &CalibrationConfig) -> Result<CalibrationOutput> {
    config.validate()?;
    let mut rng = netgen::rng(config.seed, CALIBRATION_STREAM);
    let mut points = Vec::with_capacity(config.count);
    for i in 1..=config.count {
        let mut eigs = vec![config.step * i as f64];
        for _ in 1..config.n {
            let r = if config.ratio[0] == config.ratio[1] { config.ratio[0] } else { rng.random_range(config.ratio[0]..config.ratio[1]) };
            eigs.push(eigs[eigs.len() - 1] * r);
        }
        let m = random_spd(&eigs, &mut rng);
        let truth = eig_sym(&m)?;
        points.push(CalibrationPoint {
            index: i,
            lambda_min: truth.lambda_min(),
            lambda_min_est: estimate_lambda_min(&m)?,
            lambda_max: truth.lambda_max(),
            lambda_max_est: estimate_lambda_max(&m)?,
        });
    }
    let rel = |est: f64, t: f64| (est / t - 1.0).abs();
    let summary = CalibrationSummary {
        name: config.name.clone(),
        config_hash: config.hash(),
        seed: config.seed,
        count: config.count,
        n: config.n,
        median_rel_err_min: median(points.iter().map(|p| rel(p.lambda_min_est, p.lambda_min)).collect()),
        median_rel_err_max: median(points.iter().map(|p| rel(p.lambda_max_est, p.lambda_max)).collect()),
        slope_min: ols_slope(&points.iter().map(|p| (p.lambda_min, p.lambda_min_est)).collect::<Vec<_>>()),
        slope_max: ols_slope(&points.iter().map(|p| (p.lambda_max, p.lambda_max_est)).collect::<Vec<_>>()),
        max_estimate_below_truth: points.iter().filter(|p| p.lambda_max_est < p.lambda_max * (1.0 - 1e-9)).count(),
    };
    Ok(CalibrationOutput { points, summary })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

fn ols_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

impl CalibrationOutput {
    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CALIBRATION_HEADER).map_err(csv_err)?;
        for p in &self.points {
            w.write_record([
                p.index.to_string(),
                format_f64(p.lambda_min),
                format_f64(p.lambda_min_est),
                format_f64(p.lambda_max),
                format_f64(p.lambda_max_est),
            ])
            .map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    pub fn summary_bytes(&self) -> Result<Vec<u8>> {
        json_bytes(&self.summary)
    }

    pub fn write(&self, dir: &Path) -> Result<Artifacts> {
        fs::create_dir_all(dir)?;
        let name = &self.summary.name;
        let a = Artifacts {
            csv: dir.join(format!("{name}.csv")),
            summary: dir.join(format!("{name}.summary.json")),
            network: None,
        };
        let (csv, summary) = (self.csv_bytes()?, self.summary_bytes()?);
        write_file(&a.csv, &csv)?;
        write_file(&a.summary, &summary)?;
        Ok(a)
    }
}

/// Network sizes of the trace-prior comparison preset.
pub const FIG2_SIZES: [usize; 6] = [10, 20, 40, 60, 80, 100];

pub const PRESET_NAMES: [&str; 20] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "fig1f", "fig2-compare", "fig2prime", "fig4a", "fig4b", "fig4c",
    "fig4d", "fig4e", "fig4f", "fig5a", "fig5b", "fig5c", "fig5d", "fig5e", "fig5f",
];

/// What a preset runs: sweep experiments, the estimator calibration, or both.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub sweeps: Vec<ExperimentConfig>,
    pub calibration: Option<CalibrationConfig>,
}

fn ba(n: usize, weights: [f64; 2], a: f64) -> NetworkSpec {
    NetworkSpec::Ba { n, edges_per_new_node: 3, weight_interval: weights, a, seed: DEFAULT_SEED }
}

fn sweep_preset(name: &str, network: NetworkSpec, drivers: DriverSpec) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        network,
        drivers,
        grid: GridSpec::default(),
        lower_only: false,
        output: None,
        tolerances: Tolerances::default(),
    }
}

/// The configuration behind a figure panel. Panels `c` and `d` of the first
/// and last families share one instance; they differ only in the bound shown.
pub fn preset(name: &str) -> Result<Preset> {
    let random = |count| DriverSpec::Random { count, seed: DEFAULT_SEED };
    let single = |cfg| Ok(Preset { sweeps: vec![cfg], calibration: None });
    let (family, panel) = match name {
        "fig2-compare" => {
            let sweeps = FIG2_SIZES
                .iter()
                .map(|&n| {
                    let mut c = sweep_preset(&format!("fig2-compare-n{n}"), ba(n, [1.0, 3.0], -2.0), random(1));
                    c.lower_only = true;
                    c
                })
                .collect();
            return Ok(Preset { sweeps, calibration: None });
        }
        "fig2prime" => return Ok(Preset { sweeps: vec![], calibration: Some(CalibrationConfig::default()) }),
        _ if name.len() == 5 && name.starts_with("fig") => (&name[3..4], &name[4..5]),
        _ => return Err(Error::config("preset", format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", ")))),
    };
    let (drivers, weights, a) = match (family, panel) {
        ("1", p) => {
            let (w, a) = match p {
                "a" => ([0.0, 1.0], -5.0),
                "b" => ([0.0, 1.0], 0.0),
                "c" | "d" => ([0.0, 1.0], 5.0),
                "e" => ([-1.0, 0.0], 0.0),
                "f" => ([-1.0, 0.0], 5.0),
                _ => return Err(Error::config("preset", format!("unknown preset {name:?}"))),
            };
            (DriverSpec::all(), w, a)
        }
        ("4", p) => {
            let (w, a) = match p {
                "a" => ([0.0, 1.0], -5.0),
                "b" => ([0.0, 1.0], 0.0),
                "c" => ([0.0, 1.0], 5.0),
                "d" => ([1.0, 3.0], 5.0),
                "e" => ([-1.0, 0.0], 0.0),
                "f" => ([-5.0, -2.0], 3.0),
                _ => return Err(Error::config("preset", format!("unknown preset {name:?}"))),
            };
            (random(1), w, a)
        }
        ("5", p) => {
            let (w, a) = match p {
                "a" => ([0.0, 1.0], -5.0),
                "b" => ([0.0, 1.0], 0.0),
                "c" | "d" => ([0.0, 1.0], 5.0),
                "e" => ([-1.0, 0.0], 0.0),
                "f" => ([-1.0, 0.0], 5.0),
                _ => return Err(Error::config("preset", format!("unknown preset {name:?}"))),
            };
            (random(20), w, a)
        }
        _ => return Err(Error::config("preset", format!("unknown preset {name:?}"))),
    };
    single(sweep_preset(name, ba(50, weights, a), drivers))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values() {
        let g = GridSpec { min: 1e-3, max: 1e2, points: 6, log: true }.values().unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!((g[0], g[5]), (1e-3, 1e2));
        assert!((g[2] - 1e-1).abs() < 1e-15);
        let lin = GridSpec { min: 1.0, max: 4.0, points: 4, log: false }.values().unwrap();
        assert_eq!(lin, vec![1.0, 2.0, 3.0, 4.0]);
        let err = GridSpec { points: 0, ..GridSpec::default() }.values().unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "grid.points"));
    }

    #[test]
    fn all_presets_resolve() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            for c in &p.sweeps {
                c.validate().unwrap();
            }
            if let Some(c) = &p.calibration {
                c.validate().unwrap();
            }
        }
        assert!(preset("fig3a").is_err());
        assert!(preset("fig1g").is_err());
    }

    #[test]
    fn config_json_and_hash() {
        let text = r#"{"name":"t","network":{"generator":"ba","n":5,"edges_per_new_node":2,
            "weight_interval":[0,1],"a":-1,"seed":3},"drivers":{"count":2,"seed":4},
            "grid":{"min":0.1,"max":1,"points":4},"output":"/tmp/x"}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        c.validate().unwrap();
        assert!(c.grid.log);
        let mut moved = c.clone();
        moved.output = Some("/elsewhere".into());
        assert_eq!(c.hash(), moved.hash());
        let mut other = c.clone();
        other.grid.points = 5;
        assert_ne!(c.hash(), other.hash());
        assert!(ExperimentConfig::from_json(r#"{"name":"t","bogus":1}"#).is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = preset("fig1a").unwrap().sweeps.remove(0);
        c.drivers = DriverSpec::Keyword("some".into());
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "drivers"));
        let mut c = preset("fig1a").unwrap().sweeps.remove(0);
        c.network = NetworkSpec::Ba { n: 2, edges_per_new_node: 3, weight_interval: [0.0, 1.0], a: 0.0, seed: 1 };
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "network.n"));
        let mut c = preset("fig1a").unwrap().sweeps.remove(0);
        c.tolerances.min_r2 = 2.0;
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "tolerances.min_r2"));
    }

    #[test]
    fn random_spd_has_requested_spectrum() {
        let mut rng = netgen::rng(5, 0);
        let m = random_spd(&[1.0, 2.0, 7.0], &mut rng);
        let s = eig_sym(&m).unwrap();
        for (a, b) in s.eigenvalues().iter().zip([1.0, 2.0, 7.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_csv() {
        let c = ExperimentConfig {
            name: "scalar".into(),
            network: NetworkSpec::Ba { n: 1, edges_per_new_node: 0, weight_interval: [0.0, 0.0], a: 0.0, seed: 0 },
            drivers: DriverSpec::all(),
            grid: GridSpec { min: 1.0, max: 4.0, points: 3, log: true },
            lower_only: false,
            output: None,
            tolerances: Tolerances::default(),
        };
        assert!(c.validate().is_err());
        let spec = eig_sym(&DMatrix::zeros(1, 1)).unwrap();
        let recs = scaling::sweep(&spec, &DriverSet::all(1), &[1.0, 2.0, 4.0], &SweepOptions::default()).unwrap();
        let text = String::from_utf8(sweep_csv(&recs).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("2.0000000000000000e0,5.0000000000000000e-1,5.0000000000000000e-1,"));
        assert!(lines[2].ends_with(",false,"));
    }
}
