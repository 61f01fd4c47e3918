//! `rotor`: run and export rotor-walk experiments from the command line.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rotor::abelian::{
    holroyd_propp_check, random_graph, stabilize, FiniteRotorGraph, Schedule,
};
use rotor::experiments::{
    aggregate, ball_odometer, escape_only_series, escape_rate_series, geometric_checkpoints,
    EscapeOnlyTarget, ExperimentError,
};
use rotor::potential::calibration::calibrate;
use rotor::potential::{mc_alpha, Calibration};
use rotor::walk::{flux_residual, WalkConfig, WalkError};

use config::{
    order_strings, output_root, parse_checkpoints, parse_order, parse_rule, read_config_file,
    RunConfig,
};
use output::{atomic_write, cluster_pgm, field_csv, series_csv};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config: exit 2.
    Usage(String),
    /// Step budget exhausted: exit 3.
    Budget(String),
    /// An asserted property failed or an artifact could not be produced:
    /// exit 1.
    Failure(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Walk(WalkError::BudgetExceeded { limit }) => {
                CliError::Budget(format!("step budget of {limit} exceeded"))
            }
            other => CliError::Failure(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "rotor", version, about = "Deterministic rotor-walk experiments on Z^d")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Launch particles absorbed at the origin; measure the escape rate.
    EscapeRate(SeriesArgs),
    /// Launch particles that stop only on escape; measure u_n(0).
    EscapeOnly(SeriesArgs),
    /// Grow a rotor-router aggregation cluster.
    Aggregate(AggregateArgs),
    /// Stop particles on a ball boundary; export the odometer field.
    Ball(BallArgs),
    /// Finite-graph schedule-invariance and Holroyd-Propp fuzzing.
    Abelian(AbelianArgs),
    /// Monte-Carlo escape probability of simple random walk.
    McAlpha(McAlphaArgs),
    /// Fit lattice constants and write the calibration file.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Lattice dimension.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Cyclic order: `ccw`, `cw`, or an explicit cycle like
    /// `+e1,+e2,-e1,-e2`.
    #[arg(long)]
    order: String,
    /// Initial rotors: `rho0`, `uniform-up`, or `custom:<table-file>`.
    #[arg(long, default_value = "rho0")]
    rule: String,
    /// Output directory (default: `$ROTOR_OUT/<command>` or
    /// `runs/<command>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-particle step budget override.
    #[arg(long)]
    budget: Option<u64>,
    /// key=value config file supplying defaults for optional flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SeriesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Particles to launch (escape-rate) or escapes to collect
    /// (escape-only).
    #[arg(long)]
    n: Option<u64>,
    /// Comma-separated checkpoint list (default: geometric).
    #[arg(long)]
    checkpoints: Option<String>,
    /// Calibration file for the d >= 3 reference rate.
    #[arg(long)]
    calibration: Option<PathBuf>,
}

#[derive(Args)]
struct AggregateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Cluster size.
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Args)]
struct BallArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Particles to launch.
    #[arg(long)]
    n: Option<u64>,
    /// Ball radius.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args)]
struct AbelianArgs {
    /// Number of random instances.
    #[arg(long, default_value_t = 100)]
    fuzz: u64,
    #[arg(long, default_value_t = 12)]
    max_vertices: usize,
    #[arg(long, default_value_t = 8)]
    max_particles: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stabilize a single graph fixture instead of fuzzing.
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McAlphaArgs {
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Confinement radius; the run is repeated at twice this radius so
    /// the truncation drift is visible.
    #[arg(long, default_value_t = 1000.0)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 3)]
    d_max: usize,
    /// Accuracy/time dial; solves use radius 2*scale and the
    /// Monte-Carlo run scale^2 trials.
    #[arg(long, default_value_t = 20.0)]
    scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Budget(msg)) => {
            eprintln!("budget error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::EscapeRate(args) => cmd_series(args, false),
        Cmd::EscapeOnly(args) => cmd_series(args, true),
        Cmd::Aggregate(args) => cmd_aggregate(args),
        Cmd::Ball(args) => cmd_ball(args),
        Cmd::Abelian(args) => cmd_abelian(args),
        Cmd::McAlpha(args) => cmd_mc_alpha(args),
        Cmd::Calibrate(args) => cmd_calibrate(args),
    }
}

/// Resolved common options after config-file merging.
struct Resolved {
    cfg_file: std::collections::BTreeMap<String, String>,
    common_out: Option<PathBuf>,
}

impl Resolved {
    fn new(common: &CommonArgs) -> Result<Resolved, CliError> {
        let cfg_file = match &common.config {
            Some(path) => read_config_file(path)?,
            None => Default::default(),
        };
        Ok(Resolved {
            common_out: common.out.clone(),
            cfg_file,
        })
    }

    fn u64_opt(&self, flag: Option<u64>, key: &str) -> Result<Option<u64>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.cfg_file
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("config {key}={v:?} is not an integer")))
            })
            .transpose()
    }

    fn f64_opt(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.cfg_file
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("config {key}={v:?} is not a number")))
            })
            .transpose()
    }

    fn out_dir(&self, command: &str) -> PathBuf {
        if let Some(out) = &self.common_out {
            return out.clone();
        }
        if let Some(out) = self.cfg_file.get("out") {
            return PathBuf::from(out);
        }
        output_root().join(command)
    }
}

fn walk_config(budget: Option<u64>) -> WalkConfig {
    let mut cfg = WalkConfig::default();
    if let Some(b) = budget {
        cfg.step_budget = b;
    }
    cfg
}

fn write_sidecar(dir: &std::path::Path, config: &RunConfig) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(config)
        .map_err(|e| CliError::Failure(format!("sidecar serialization: {e}")))?;
    atomic_write(&dir.join("config.json"), json.as_bytes())
}

fn cmd_series(args: SeriesArgs, escape_only: bool) -> Result<(), CliError> {
    let res = Resolved::new(&args.common)?;
    let d = args.common.d;
    let order = parse_order(&args.common.order, d)?;
    let rule = parse_rule(&args.common.rule, d)?;
    let n = res.u64_opt(args.n, "n")?.unwrap_or(1000);
    let budget = res.u64_opt(args.common.budget, "budget")?;
    let checkpoints = match &args.checkpoints {
        Some(spec) => parse_checkpoints(spec)?,
        None => geometric_checkpoints(n),
    };
    let command = if escape_only { "escape-only" } else { "escape-rate" };
    let dir = res.out_dir(command);
    let cfg = walk_config(budget);
    let series = if escape_only {
        let (series, u_by_escape, _) = escape_only_series(
            order.clone(),
            rule,
            EscapeOnlyTarget::Escapes(n),
            &checkpoints,
            &cfg,
        )?;
        let rows: Vec<(Vec<i64>, u64)> = u_by_escape
            .iter()
            .enumerate()
            .map(|(i, &u)| (vec![i as i64 + 1], u))
            .collect();
        atomic_write(&dir.join("u_by_escape.csv"), field_csv(1, &rows).as_bytes())?;
        series
    } else {
        let (series, _) = escape_rate_series(order.clone(), rule, n, &checkpoints, &cfg)?;
        series
    };
    atomic_write(&dir.join("series.csv"), series_csv(&series).as_bytes())?;
    write_sidecar(
        &dir,
        &RunConfig {
            schema: 1,
            command: command.into(),
            d,
            order: args.common.order.clone(),
            resolved_order: order_strings(&order),
            rule: args.common.rule.clone(),
            n: Some(n),
            r: None,
            trials: None,
            radius: None,
            seed: None,
            checkpoints,
            step_budget: cfg.step_budget,
            output: dir.clone(),
        },
    )?;
    if let Some(last) = series.checkpoints.last() {
        let rate = rotor::experiments::primal_normalized(&series)
            .last()
            .map(|&(_, v)| v)
            .unwrap_or(f64::NAN);
        let reference = if d == 2 {
            format!("{:.6} (pi/2)", std::f64::consts::FRAC_PI_2)
        } else {
            let alpha = args
                .calibration
                .as_ref()
                .map(|p| -> Result<_, CliError> {
                    let text = std::fs::read_to_string(p)?;
                    Calibration::from_text(&text)
                        .map_err(|e| CliError::Usage(e.to_string()))
                        .map(|c| c.alpha(d))
                })
                .transpose()?
                .flatten();
            match alpha {
                Some((a, se)) => format!("{a:.6} +- {se:.6} (calibrated alpha_{d})"),
                None => format!("no calibrated alpha_{d} (pass --calibration)"),
            }
        };
        println!(
            "n={} I={} normalized_rate={:.6} reference={}",
            last.n, last.escaped, rate, reference
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_aggregate(args: AggregateArgs) -> Result<(), CliError> {
    let res = Resolved::new(&args.common)?;
    let d = args.common.d;
    let order = parse_order(&args.common.order, d)?;
    let rule = parse_rule(&args.common.rule, d)?;
    let n = res.u64_opt(args.n, "n")?.unwrap_or(1000);
    let budget = res.u64_opt(args.common.budget, "budget")?;
    let cfg = walk_config(budget);
    let dir = res.out_dir("aggregate");
    let (result, _) = aggregate(order.clone(), rule, n, &cfg)?;
    let rows: Vec<(Vec<i64>, u64)> = result.cluster.iter().map(|s| (s.clone(), 1)).collect();
    atomic_write(&dir.join("cluster.csv"), field_csv(d, &rows).as_bytes())?;
    if d == 2 {
        atomic_write(&dir.join("cluster.pgm"), cluster_pgm(&result.cluster).as_bytes())?;
    }
    write_sidecar(
        &dir,
        &RunConfig {
            schema: 1,
            command: "aggregate".into(),
            d,
            order: args.common.order.clone(),
            resolved_order: order_strings(&order),
            rule: args.common.rule.clone(),
            n: Some(n),
            r: None,
            trials: None,
            radius: None,
            seed: None,
            checkpoints: vec![],
            step_budget: cfg.step_budget,
            output: dir.clone(),
        },
    )?;
    println!(
        "n={} inradius={:.4} outradius={:.4}",
        n, result.inradius, result.outradius
    );
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_ball(args: BallArgs) -> Result<(), CliError> {
    let res = Resolved::new(&args.common)?;
    let d = args.common.d;
    let order = parse_order(&args.common.order, d)?;
    let rule = parse_rule(&args.common.rule, d)?;
    let n = res.u64_opt(args.n, "n")?.unwrap_or(1000);
    let r = res.f64_opt(args.r, "r")?.unwrap_or(20.0);
    if r < 1.0 {
        return Err(CliError::Usage(format!("--r must be >= 1, got {r}")));
    }
    let budget = res.u64_opt(args.common.budget, "budget")?;
    let cfg = walk_config(budget);
    let dir = res.out_dir("ball");
    let state = ball_odometer(order.clone(), rule, n, r, &cfg)?;
    let mut rows: Vec<(Vec<i64>, u64)> = state
        .materialized()
        .map(|(site, s)| (site, s.odometer as u64))
        .collect();
    rows.sort();
    atomic_write(&dir.join("odometer.csv"), field_csv(d, &rows).as_bytes())?;
    write_sidecar(
        &dir,
        &RunConfig {
            schema: 1,
            command: "ball".into(),
            d,
            order: args.common.order.clone(),
            resolved_order: order_strings(&order),
            rule: args.common.rule.clone(),
            n: Some(n),
            r: Some(r),
            trials: None,
            radius: None,
            seed: None,
            checkpoints: vec![],
            step_budget: cfg.step_budget,
            output: dir.clone(),
        },
    )?;
    let (max_res, _) = flux_residual(&state, r, false)
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let bound = 4 * d as i64 - 2;
    println!("n={} r={} max_flux_residual={} bound={}", n, r, max_res, bound);
    println!("wrote {}", dir.display());
    if max_res > bound {
        return Err(CliError::Failure(format!(
            "flux residual {max_res} exceeds the {bound} bound"
        )));
    }
    Ok(())
}

fn cmd_abelian(args: AbelianArgs) -> Result<(), CliError> {
    let dir = args.out.unwrap_or_else(|| output_root().join("abelian"));
    if let Some(path) = &args.fixture {
        let text = std::fs::read_to_string(path)?;
        let graph =
            FiniteRotorGraph::from_text(&text).map_err(|e| CliError::Usage(e.to_string()))?;
        let stab = stabilize(&graph, &Schedule::Fifo)
            .map_err(|e| CliError::Failure(e.to_string()))?;
        println!("placement: {:?}", stab.placement);
        println!("exits:     {:?}", stab.exits);
        println!("rotors:    {:?}", stab.rotors);
        return Ok(());
    }
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
    let mut report = String::from("# rotor-abelian-report schema=1\n");
    let mut violations = 0u64;
    for i in 0..args.fuzz {
        let graph = random_graph(&mut rng, args.max_vertices, args.max_particles);
        let reference =
            stabilize(&graph, &Schedule::Fifo).map_err(|e| CliError::Failure(e.to_string()))?;
        let mut schedules = vec![Schedule::Lifo, Schedule::RoundRobin];
        schedules.extend((0..20).map(|k| Schedule::Random(args.seed ^ (i * 31 + k))));
        let invariant = schedules.iter().all(|s| {
            stabilize(&graph, s).map(|out| out == reference).unwrap_or(false)
        });
        let y = vec![graph.vertex_count() - 1];
        let hp = holroyd_propp_check(&graph, &y)
            .map_err(|e| CliError::Failure(e.to_string()))?;
        if !invariant || !hp.verdict {
            violations += 1;
            report.push_str(&format!(
                "instance {i}: schedule_invariant={invariant} hp_verdict={}\n{}\n",
                hp.verdict,
                graph.to_text()
            ));
        }
    }
    report.push_str(&format!(
        "instances {} violations {}\n",
        args.fuzz, violations
    ));
    atomic_write(&dir.join("report.txt"), report.as_bytes())?;
    println!("instances={} violations={}", args.fuzz, violations);
    println!("wrote {}", dir.display());
    if violations > 0 {
        return Err(CliError::Failure(format!(
            "{violations} fuzzed instances violated the abelian/Holroyd-Propp properties"
        )));
    }
    Ok(())
}

fn cmd_mc_alpha(args: McAlphaArgs) -> Result<(), CliError> {
    let dir = args.out.unwrap_or_else(|| output_root().join("mc-alpha"));
    let mut text = String::from("# rotor-mc-alpha schema=1\n");
    for radius in [args.radius, 2.0 * args.radius] {
        let res = mc_alpha(args.d, args.trials, radius, args.seed)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        text.push_str(&format!(
            "d {} radius {} trials {} escaped {} estimate {:.9} std_error {:.9} seed {}\n",
            res.d, res.radius, res.trials, res.escaped, res.estimate, res.std_error, res.seed
        ));
        println!(
            "radius={} estimate={:.6} +- {:.6}",
            radius, res.estimate, res.std_error
        );
    }
    atomic_write(&dir.join("mc_alpha.txt"), text.as_bytes())?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let dir = args.out.unwrap_or_else(|| output_root().join("calibrate"));
    let cal = calibrate(args.d_max, args.scale, args.seed)
        .map_err(|e| CliError::Failure(e.to_string()))?;
    atomic_write(&dir.join("calibration.txt"), cal.to_text().as_bytes())?;
    println!("wrote {}", dir.display());
    Ok(())
}
