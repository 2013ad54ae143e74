use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use control_energy::acceptance::{self, format_line, AcceptanceOptions};
use control_energy::experiment::{self, calibrate, DriverSpec, ExperimentConfig, GridSpec, NetworkSpec};
use control_energy::gramian::{build_m, min_energy};
use control_energy::par::{self, Execution, THREADS_ENV};
use control_energy::scaling::{self, SweepOptions};
use control_energy::{Error, Magnitude, Result};
use nalgebra::DVector;
use serde_json::json;

#[derive(Parser)]
#[command(name = "control-energy", version, about = "Minimum control energy bounds on networks")]
struct Cli {
    /// Run sweep cells on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a weighted network and write its JSON.
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum energy to reach a unit target at one horizon.
    Energy {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        tf: f64,
        /// Comma-separated target, normalized to unit length; e_1 when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        target: Option<Vec<f64>>,
    },
    /// Exact, estimated and trace-prior bounds at one horizon.
    Bounds {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        tf: f64,
    },
    /// Sweep the horizon grid and write CSV, summary and network JSON.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run the acceptance criteria and print one line per criterion.
    Verify {
        /// Subset of criteria, e.g. `1,4,12`; all when absent.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        #[arg(long, default_value_t = experiment::DEFAULT_SEED)]
        seed: u64,
        /// Replace every predicted law by a wrong one (negative control).
        #[arg(long)]
        mis_specify: bool,
        /// Write the report JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a named figure preset and write its artifacts.
    Preset {
        name: String,
        #[arg(long, default_value = "out")]
        output: PathBuf,
        /// Override the network and driver seeds.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    /// Load the network from a JSON file instead of generating it.
    #[arg(long)]
    network: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    edges_per_new_node: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    weight_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    weight_hi: Option<f64>,
    /// Diagonal offset.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `all` or comma-separated 0-based node indices.
    #[arg(long)]
    drivers: Option<String>,
    /// Draw this many random drivers (seeded by `--driver-seed`).
    #[arg(long, conflicts_with = "drivers")]
    driver_count: Option<usize>,
    #[arg(long, requires = "driver_count")]
    driver_seed: Option<u64>,
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Linear instead of logarithmic grid spacing.
    #[arg(long)]
    linear: bool,
    #[arg(long)]
    lower_only: bool,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

impl ConfigArgs {
    fn any_ba_flag(&self) -> bool {
        self.n.is_some() || self.edges_per_new_node.is_some() || self.weight_lo.is_some() || self.weight_hi.is_some() || self.a.is_some()
    }

    /// The file config with flag overrides applied, validated.
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_json(&read_text(p)?)?,
            None => {
                let network = match (&self.network, self.n) {
                    (Some(path), _) => NetworkSpec::File { path: path.clone() },
                    (None, Some(n)) => NetworkSpec::Ba { n, edges_per_new_node: 3, weight_interval: [0.0, 1.0], a: 0.0, seed: experiment::DEFAULT_SEED },
                    (None, None) => return Err(Error::Config { field: "network".into(), reason: "give --config, --network or --n".into() }),
                };
                ExperimentConfig {
                    name: "run".into(),
                    network,
                    drivers: DriverSpec::all(),
                    grid: GridSpec::default(),
                    lower_only: false,
                    output: None,
                    tolerances: Default::default(),
                }
            }
        };
        if let Some(path) = &self.network {
            if self.any_ba_flag() {
                return Err(Error::Config { field: "network".into(), reason: "--network conflicts with generator flags".into() });
            }
            cfg.network = NetworkSpec::File { path: path.clone() };
        }
        match &mut cfg.network {
            NetworkSpec::Ba { n, edges_per_new_node, weight_interval, a, seed } => {
                set(n, self.n);
                set(edges_per_new_node, self.edges_per_new_node);
                set(&mut weight_interval[0], self.weight_lo);
                set(&mut weight_interval[1], self.weight_hi);
                set(a, self.a);
                set(seed, self.seed);
            }
            NetworkSpec::File { .. } if self.any_ba_flag() || self.seed.is_some() => {
                return Err(Error::Config { field: "network".into(), reason: "generator flags need a generated network".into() });
            }
            NetworkSpec::File { .. } => {}
        }
        if let Some(d) = &self.drivers {
            cfg.drivers = parse_drivers(d)?;
        }
        if let Some(count) = self.driver_count {
            cfg.drivers = DriverSpec::Random { count, seed: self.driver_seed.unwrap_or(experiment::DEFAULT_SEED) };
        }
        set(&mut cfg.name, self.name.clone());
        set(&mut cfg.grid.min, self.grid_min);
        set(&mut cfg.grid.max, self.grid_max);
        set(&mut cfg.grid.points, self.points);
        if self.linear {
            cfg.grid.log = false;
        }
        cfg.lower_only |= self.lower_only;
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn parse_drivers(s: &str) -> Result<DriverSpec> {
    if s == "all" {
        return Ok(DriverSpec::all());
    }
    s.split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(DriverSpec::List)
        .map_err(|e| Error::Config { field: "drivers".into(), reason: format!("{s:?}: {e}") })
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json value serializes")
}

fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"))
}

/// Exit 1 when too few cells succeeded.
fn run_sweep(cfg: &ExperimentConfig, execution: Execution, dir: &Path) -> Result<bool> {
    let out = experiment::run(cfg, execution)?;
    let files = out.write(dir)?;
    let s = &out.summary;
    let laws = s.checks.iter().filter(|c| c.pass).count();
    println!(
        "{}: class {}, {} cells ({} failed, {} overflow, {} extended precision), laws {}/{} → {}",
        s.name,
        s.class.label(),
        s.cells,
        s.failed_cells,
        s.overflow_cells,
        s.extended_precision_cells,
        laws,
        s.checks.len(),
        files.csv.display()
    );
    if !s.cells_ok {
        eprintln!("error: {}: only {}/{} cells succeeded", s.name, s.cells - s.failed_cells, s.cells);
    }
    Ok(s.cells_ok)
}

fn execute(cli: Cli) -> Result<bool> {
    let execution = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Generate { config, out } => {
            let cfg = config.resolve()?;
            let inst = experiment::build_instance(&cfg)?;
            let text = serde_json::to_string_pretty(&inst.network.to_json())? + "\n";
            match out {
                Some(p) => fs::write(&p, text)?,
                None => print!("{text}"),
            }
            let eigs = inst.spec.eigenvalues();
            eprintln!("n = {}, class {}, λ ∈ [{:.6}, {:.6}]", inst.network.n(), inst.class.label(), eigs.min(), eigs.max());
            Ok(true)
        }
        Command::Energy { config, tf, target } => {
            let inst = experiment::build_instance(&config.resolve()?)?;
            let n = inst.network.n();
            let x = match target {
                Some(v) => DVector::from_vec(v),
                None => DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 }),
            };
            if x.len() != n || x.norm() == 0.0 {
                return Err(Error::Config { field: "target".into(), reason: format!("need {n} entries, not all zero") });
            }
            let x = &x / x.norm();
            let m = build_m(&inst.spec, &inst.drivers, tf)?;
            let r = min_energy(&m, &x)?;
            println!("{}", pretty(&json!({ "tf": tf, "energy": r.energy, "cond": r.cond })));
            Ok(true)
        }
        Command::Bounds { config, tf } => {
            let inst = experiment::build_instance(&config.resolve()?)?;
            let records = scaling::sweep(&inst.spec, &inst.drivers, &[tf], &SweepOptions { execution, ..Default::default() })?;
            let r = &records[0];
            // values printed as decimal strings so magnitudes beyond f64 survive
            let mag = |m: Option<Magnitude>| m.map(|m| json!({ "value": m.to_string(), "ln": m.ln() }));
            println!(
                "{}",
                pretty(&json!({
                    "tf": r.tf,
                    "lower_exact": mag(r.lower_exact),
                    "upper_exact": mag(r.upper_exact),
                    "lower_est": mag(r.lower_est),
                    "upper_est": mag(r.upper_est),
                    "lower_trace_prior": mag(r.lower_trace_prior),
                    "cond": mag(r.cond),
                    "overflow_path": r.overflow_path,
                    "extended_precision": r.extended_precision,
                    "error": r.error,
                }))
            );
            Ok(r.is_complete())
        }
        Command::Sweep { config } => {
            let cfg = config.resolve()?;
            run_sweep(&cfg, execution, &output_dir(&cfg))
        }
        Command::Preset { name, output, seed } => {
            let p = experiment::preset(&name)?;
            let mut ok = true;
            for mut cfg in p.sweeps {
                if let Some(s) = seed {
                    reseed(&mut cfg, s);
                }
                ok &= run_sweep(&cfg, execution, &output)?;
            }
            if let Some(mut cal) = p.calibration {
                set(&mut cal.seed, seed);
                let out = calibrate(&cal)?;
                let files = out.write(&output)?;
                let s = &out.summary;
                println!(
                    "{}: median rel. err λ_min {:.4}, λ_max {:.4}; slopes {:.4}, {:.4} → {}",
                    s.name,
                    s.median_rel_err_min,
                    s.median_rel_err_max,
                    s.slope_min,
                    s.slope_max,
                    files.csv.display()
                );
            }
            Ok(ok)
        }
        Command::Verify { criteria, seed, mis_specify, report } => {
            let opts = AcceptanceOptions { execution, seed, mis_specify };
            let r = acceptance::run(&criteria, &opts)?;
            for o in &r.outcomes {
                println!("{}", format_line(o));
            }
            let passed = r.outcomes.iter().filter(|o| o.pass).count();
            println!("{passed}/{} criteria passed; report sha256 {}", r.outcomes.len(), r.hash());
            if let Some(p) = report {
                fs::write(p, serde_json::to_string_pretty(&r)? + "\n")?;
            }
            Ok(r.passed())
        }
    }
}

fn reseed(cfg: &mut ExperimentConfig, seed: u64) {
    if let NetworkSpec::Ba { seed: s, .. } = &mut cfg.network {
        *s = seed;
    }
    if let DriverSpec::Random { seed: s, .. } = &mut cfg.drivers {
        *s = seed;
    }
}

fn configure_threads() -> Result<()> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let threads = v.trim().parse::<usize>().map_err(|e| Error::Config { field: THREADS_ENV.into(), reason: format!("{v:?}: {e}") })?;
            par::configure_threads(threads)
        }
        Err(_) => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match configure_threads().and_then(|_| execute(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Io(_)) { 2 } else { 1 })
        }
    }
}
