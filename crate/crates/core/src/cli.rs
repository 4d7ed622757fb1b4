//! Command-line front end shared by the `qht` binary.
//!
//! Every subcommand merges an optional JSON config file with flags (flags
//! win), validates the result, and echoes it into its JSON output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimator::{
    delta_adaptive, delta_iterative, delta_star, estimate_quadratic_functional, regime, risk_bounds, solve_delta_opt,
    theoretical_rate, AdaptiveVariant, BandwidthRule, DtPolicy, EstimatorConfig, RateSide, Regime,
};
use crate::experiments::{rate_regression, run_mse_experiment, run_normality_check, ExperimentPlan};
use crate::rng::StreamKey;
use crate::states::{SmoothnessClass, StateModel};
use crate::tomography::{read_samples, simulate, write_samples, NoiseConfig};

#[derive(Parser, Debug)]
#[command(name = "qht", version, about = "Purity estimation for noisy quantum homodyne tomography")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the state catalog with purities and class thresholds.
    States(StatesArgs),
    /// Simulate noisy homodyne data to `<out>/samples.csv`.
    Simulate(SimulateArgs),
    /// Estimate the purity of a sample file.
    Estimate(EstimateArgs),
    /// Monte Carlo MSE and normality experiment.
    Experiment(ExperimentArgs),
    /// Bandwidths and rates from every applicable rule.
    Rates(RatesArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct StatesArgs {
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ClassArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Class radius `L`.
    #[arg(long = "l")]
    pub big_l: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimulateArgs {
    /// State, e.g. `vacuum`, `cat:1.5`, `squeezed:0.3,1`, `thermal:1`.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct EstimateArgs {
    /// Sample CSV (`y,phi`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Bandwidth rule: `fixed:D`, `delta_opt`, `delta_star`, `adaptive1`, `adaptive2[:A]`, `iterative[:K]`.
    #[arg(long)]
    pub rule: Option<String>,
    /// Shorthand for `--rule fixed:D`.
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub class: ClassArgs,
    /// Known state, to report the true purity and absolute error.
    #[arg(long)]
    pub state: Option<String>,
    /// Frequency grid spacing override.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Comma-separated, strictly increasing sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<u64>>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub rule: Option<String>,
    #[command(flatten)]
    pub class: ClassArgs,
    /// Sample size of the normality check (default: largest grid point).
    #[arg(long)]
    pub normality_n: Option<u64>,
    /// Replicates of the normality check (default: `--replicates`).
    #[arg(long)]
    pub normality_replicates: Option<usize>,
    /// Skip the normality check.
    #[arg(long)]
    pub no_normality: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RatesArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Constant `A` of the second adaptive rule (default `1.25 alpha`).
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

/// Config file contents; every key optional, unknown keys rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_rule: Option<BandwidthRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<SmoothnessClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normality_n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normality_replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive_a: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn apply_common(&mut self, c: &CommonArgs) {
        set(&mut self.seed, c.seed);
        set(&mut self.out, c.out.clone());
        set(&mut self.threads, c.threads);
    }

    fn apply_class(&mut self, c: &ClassArgs) -> Result<()> {
        if c.alpha.is_none() && c.r.is_none() && c.big_l.is_none() {
            return Ok(());
        }
        let base = self.class;
        let pick = |flag: Option<f64>, file: Option<f64>, name: &str| {
            flag.or(file).ok_or_else(|| Error::Config(format!("class needs --{name} (or a config class)")))
        };
        self.class = Some(SmoothnessClass {
            alpha: pick(c.alpha, base.map(|b| b.alpha), "alpha")?,
            r: pick(c.r, base.map(|b| b.r), "r")?,
            big_l: pick(c.big_l, base.map(|b| b.big_l).or(Some(1.0)), "l")?,
        });
        Ok(())
    }

    fn state(&self) -> Result<StateModel> {
        self.state.ok_or_else(|| Error::Config("missing state (--state or config 'state')".into()))
    }

    fn eta(&self) -> Result<f64> {
        let eta = self.eta.ok_or_else(|| Error::Config("missing eta (--eta or config 'eta')".into()))?;
        NoiseConfig::new(eta).map_err(|e| Error::Config(e.to_string()))?;
        Ok(eta)
    }

    fn class(&self) -> Result<Option<SmoothnessClass>> {
        match self.class {
            Some(c) => c.validate().map(|_| Some(c)).map_err(|e| Error::Config(e.to_string())),
            None => Ok(None),
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn parse_state(s: &str) -> Result<StateModel> {
    s.parse()
}

/// Parses `fixed:D`, `delta_opt`, `delta_star`, `adaptive1`, `adaptive2[:A]`, `iterative[:K]`.
pub fn parse_rule(s: &str) -> Result<BandwidthRule> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (s.trim(), None),
    };
    let num = |a: &str| a.parse::<f64>().map_err(|_| Error::Config(format!("bad number in rule '{s}'")));
    let rule = match (name.replace('-', "_").as_str(), arg) {
        ("fixed", Some(a)) => BandwidthRule::Fixed { delta: num(a)? },
        ("delta_opt", None) => BandwidthRule::DeltaOpt,
        ("delta_star", None) => BandwidthRule::DeltaStar,
        ("adaptive1", None) => BandwidthRule::Adaptive1,
        ("adaptive2", None) => BandwidthRule::Adaptive2 { a: 1.0 },
        ("adaptive2", Some(a)) => BandwidthRule::Adaptive2 { a: num(a)? },
        ("iterative", None) => BandwidthRule::Iterative { k: None },
        ("iterative", Some(a)) => BandwidthRule::Iterative {
            k: Some(a.parse().map_err(|_| Error::Config(format!("bad iteration count in rule '{s}'")))?),
        },
        _ => return Err(Error::Config(format!("unrecognized bandwidth rule '{s}'"))),
    };
    Ok(rule)
}

fn rule_from(cfg: &mut RunConfig, rule: &Option<String>, delta: Option<f64>) -> Result<()> {
    if let Some(r) = rule {
        cfg.bandwidth_rule = Some(parse_rule(r)?);
    }
    if let Some(d) = delta {
        cfg.bandwidth_rule = Some(BandwidthRule::Fixed { delta: d });
    }
    Ok(())
}

fn base_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_common(common);
    Ok(cfg)
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        // A second call in the same process (tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Run a parsed command line, writing human-facing output to `out`.
pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<()> {
    let mut cfg = base_config(&cli.common)?;
    match cli.command {
        Command::States(a) => cmd_states(&a, out),
        Command::Simulate(a) => {
            if let Some(s) = &a.state {
                cfg.state = Some(parse_state(s)?);
            }
            set(&mut cfg.eta, a.eta);
            set(&mut cfg.n, a.n);
            configure_threads(cfg.threads)?;
            cmd_simulate(&cfg, out)
        }
        Command::Estimate(a) => {
            set(&mut cfg.input, a.input.clone());
            set(&mut cfg.eta, a.eta);
            set(&mut cfg.dt, a.dt);
            rule_from(&mut cfg, &a.rule, a.delta)?;
            cfg.apply_class(&a.class)?;
            if let Some(s) = &a.state {
                cfg.state = Some(parse_state(s)?);
            }
            configure_threads(cfg.threads)?;
            cmd_estimate(&cfg, out)
        }
        Command::Experiment(a) => {
            if let Some(s) = &a.state {
                cfg.state = Some(parse_state(s)?);
            }
            set(&mut cfg.eta, a.eta);
            set(&mut cfg.n_grid, a.n_grid.clone());
            set(&mut cfg.replicates, a.replicates);
            set(&mut cfg.normality_n, a.normality_n);
            set(&mut cfg.normality_replicates, a.normality_replicates);
            rule_from(&mut cfg, &a.rule, None)?;
            cfg.apply_class(&a.class)?;
            configure_threads(cfg.threads)?;
            cmd_experiment(&cfg, !a.no_normality, out)
        }
        Command::Rates(a) => {
            set(&mut cfg.eta, a.eta);
            set(&mut cfg.n, a.n);
            set(&mut cfg.adaptive_a, a.a);
            cfg.apply_class(&a.class)?;
            cmd_rates(&cfg, a.json, out)
        }
    }
}

#[derive(Serialize)]
struct StateRow {
    state: String,
    parameters: StateModel,
    true_purity: f64,
    pure: bool,
    alpha_threshold: f64,
}

pub fn cmd_states<W: Write>(args: &StatesArgs, out: &mut W) -> Result<()> {
    let rows: Vec<StateRow> = StateModel::catalog()
        .iter()
        .map(|s| StateRow {
            state: s.to_string(),
            parameters: *s,
            true_purity: s.true_purity(),
            pure: s.is_pure(),
            alpha_threshold: s.class_alpha_threshold(),
        })
        .collect();
    if args.json {
        writeln!(out, "{}", to_json(&json!({ "states": rows }))?)?;
        return Ok(());
    }
    writeln!(out, "{:<16} {:<14} {:<6} class (r=2)", "state", "purity", "pure")?;
    for r in &rows {
        writeln!(out, "{:<16} {:<14.10} {:<6} alpha < {:.6}", r.state, r.true_purity, r.pure, r.alpha_threshold)?;
    }
    Ok(())
}

pub fn cmd_simulate<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<()> {
    let state = cfg.state()?;
    let eta = cfg.eta()?;
    let n = cfg.n.ok_or_else(|| Error::Config("missing n (--n or config 'n')".into()))?;
    if n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    let seed = cfg.seed.unwrap_or(0);
    let samples = simulate(&state, NoiseConfig::new(eta)?, n as usize, StreamKey::new(seed))?;
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;
    let path = dir.join("samples.csv");
    write_samples(&samples, &path)?;
    let checksum = sha256_hex(&fs::read(&path)?);
    let mut effective = cfg.clone();
    effective.seed = Some(seed);
    writeln!(out, "{}", to_json(&json!({ "path": path, "rows": n, "sha256": checksum, "config": effective }))?)?;
    Ok(())
}

pub fn cmd_estimate<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<()> {
    let input = cfg.input.clone().ok_or_else(|| Error::Config("missing input (--input or config 'input')".into()))?;
    let eta = cfg.eta()?;
    let rule = cfg.bandwidth_rule.ok_or_else(|| Error::Config("missing bandwidth rule (--rule or --delta)".into()))?;
    let class = cfg.class()?;
    let samples = read_samples(&input)?;
    let n = samples.len() as u64;
    let delta = rule.resolve(class.as_ref(), eta, n)?;
    let mut est_cfg = EstimatorConfig::new(eta, delta)?;
    if let Some(dt) = cfg.dt {
        est_cfg = est_cfg.with_dt_policy(DtPolicy::Spacing(dt));
    }
    let est = estimate_quadratic_functional(&samples, &est_cfg)?;
    let mut v = json!({
        "d2_hat": est.d2_hat,
        "delta": est.delta,
        "rule": rule.name(),
        "t_max": est.t_max,
        "nodes": est.nodes,
        "kernel_mass": est.kernel_mass,
        "eta": eta,
        "n": est.n,
    });
    if let Some(state) = cfg.state {
        let truth = state.true_purity();
        v["state"] = Value::String(state.to_string());
        v["true_purity"] = json!(truth);
        v["abs_error"] = json!((est.d2_hat - truth).abs());
    }
    v["config"] = serde_json::to_value(cfg)?;
    let text = to_json(&v)?;
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("estimate.json"), format!("{text}\n"))?;
    }
    writeln!(out, "{text}")?;
    Ok(())
}

pub fn cmd_experiment<W: Write>(cfg: &RunConfig, normality: bool, out: &mut W) -> Result<()> {
    let plan = ExperimentPlan {
        state: cfg.state()?,
        eta: cfg.eta()?,
        n_grid: cfg.n_grid.clone().ok_or_else(|| Error::Config("missing n_grid (--n-grid or config)".into()))?,
        replicates: cfg.replicates.ok_or_else(|| Error::Config("missing replicates".into()))?,
        bandwidth_rule: cfg.bandwidth_rule.ok_or_else(|| Error::Config("missing bandwidth rule (--rule)".into()))?,
        class: cfg.class()?,
        seed: cfg.seed.unwrap_or(0),
    };
    plan.validate().map_err(|e| Error::Config(e.to_string()))?;
    let summary = run_mse_experiment(&plan)?;
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;

    let mut mse =
        String::from("n,mean_estimate,bias,variance,mse,mse_stderr,theoretical_rate,bias_bound_sq,var_bound\n");
    for r in &summary.rows {
        let _ = writeln!(
            mse,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.mean_estimate,
            r.empirical_bias,
            r.empirical_variance,
            r.empirical_mse,
            r.mse_stderr,
            opt(r.theoretical_rate),
            opt(r.bias_bound_sq),
            opt(r.var_bound)
        );
    }
    fs::write(dir.join("mse.csv"), mse)?;

    let slope = rate_regression(&summary).ok();
    let mut report = json!({
        "truth": summary.truth,
        "rows": summary.rows,
        "rate_slope": slope,
    });
    if normality {
        let n = cfg.normality_n.unwrap_or(*plan.n_grid.last().unwrap_or(&2));
        let reps = cfg.normality_replicates.unwrap_or(plan.replicates);
        let seed = plan.seed ^ 0x4e4f_524d;
        let norm =
            run_normality_check(&plan.state, plan.eta, n, reps, &plan.bandwidth_rule, plan.class.as_ref(), seed)?;
        let mut csv = String::from("replicate,residual\n");
        for (i, z) in norm.residuals.iter().enumerate() {
            let _ = writeln!(csv, "{i},{z}");
        }
        fs::write(dir.join("normality.csv"), csv)?;
        report["ks_distance"] = json!(norm.ks_distance);
        report["skewness"] = json!(norm.skewness);
        report["excess_kurtosis"] = json!(norm.excess_kurtosis);
        report["normality"] = json!({
            "n": norm.n,
            "delta": norm.delta,
            "asymptotic_variance": norm.asymptotic_variance,
            "finite_n_variance": norm.finite_n_variance,
            "empirical_n_variance": norm.empirical_n_variance,
            "ks_distance_finite_n": norm.ks_distance_finite_n,
            "subtraction": "4*(d2)^2",
        });
    }
    let mut effective = cfg.clone();
    effective.seed = Some(plan.seed);
    report["config"] = serde_json::to_value(&effective)?;
    let text = to_json(&report)?;
    fs::write(dir.join("summary.json"), format!("{text}\n"))?;
    writeln!(out, "{text}")?;
    Ok(())
}

#[derive(Serialize)]
struct RateRow {
    rule: &'static str,
    delta: Option<f64>,
    regime: Regime,
    rate: f64,
    risk_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

pub fn cmd_rates<W: Write>(cfg: &RunConfig, as_json: bool, out: &mut W) -> Result<()> {
    let class = cfg.class()?.ok_or_else(|| Error::Config("rates needs --alpha and --r (and optionally --l)".into()))?;
    let eta = cfg.eta()?;
    let n = cfg.n.ok_or_else(|| Error::Config("missing n (--n or config 'n')".into()))?;
    // The second adaptive rule needs A above the largest admissible alpha.
    let a = cfg.adaptive_a.unwrap_or(1.25 * class.alpha);
    let reg = regime(&class, eta)?;
    let rate = theoretical_rate(&class, eta, n, RateSide::Upper)?;
    let mut deltas: Vec<(&'static str, Result<f64>)> = Vec::new();
    if class.r < 2.0 {
        deltas.push(("delta_opt", solve_delta_opt(&class, eta, n)));
    } else {
        deltas.push(("delta_star", delta_star(class.alpha, eta, n).map(|d| d.0)));
    }
    // Adaptive rules cover r < 1 (first) and r = 1 (both).
    if class.r <= 1.0 {
        deltas.push(("adaptive1", delta_adaptive(AdaptiveVariant::First, eta, n)));
    }
    if class.r == 1.0 {
        deltas.push(("adaptive2", delta_adaptive(AdaptiveVariant::Second { a }, eta, n)));
    }
    if class.r < 2.0 {
        deltas.push(("iterative", delta_iterative(&class, eta, n, None)));
    }
    let mut rows = Vec::new();
    for (rule, delta) in deltas {
        // A rule whose bandwidth does not exist at this n is reported, not fatal.
        let row = match delta {
            Ok(delta) => RateRow {
                rule,
                delta: Some(delta),
                regime: reg,
                rate,
                risk_bound: Some(risk_bounds(&class, eta, delta, n)?.total()),
                note: None,
            },
            Err(e @ (Error::SampleTooSmall(_) | Error::IterateCollapse { .. })) => {
                RateRow { rule, delta: None, regime: reg, rate, risk_bound: None, note: Some(e.to_string()) }
            }
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    if as_json {
        writeln!(out, "{}", to_json(&json!({ "rows": rows, "config": cfg }))?)?;
        return Ok(());
    }
    writeln!(
        out,
        "regime {} (eta={eta}, n={n}, alpha={}, r={}, L={})",
        reg.as_str(),
        class.alpha,
        class.r,
        class.big_l
    )?;
    writeln!(out, "{:<12} {:<22} {:<24} risk_bound", "rule", "delta", "rate")?;
    for r in &rows {
        let rate = if reg == Regime::R2Parametric { format!("1/n = {}", r.rate) } else { r.rate.to_string() };
        match (&r.delta, &r.note) {
            (Some(d), _) => writeln!(out, "{:<12} {:<22} {:<24} {}", r.rule, d, rate, opt(r.risk_bound))?,
            (None, note) => writeln!(out, "{:<12} n/a ({})", r.rule, note.as_deref().unwrap_or(""))?,
        }
    }
    Ok(())
}
