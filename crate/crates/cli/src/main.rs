#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

mod config;
mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use nehari_waves::flow::{continue_in_k, FlowSolver, RunSummary, SummaryRecord};
use nehari_waves::grid::{GridProfile, ModelParams};
use nehari_waves::io::{parse_profile_csv, profile_csv};
use nehari_waves::lattice::validate_wave_cells;
use nehari_waves::nehari::{ray_maximum, RayCoefficients, DEFAULT_RAY_TOL};

use config::{parse_list, parse_pairs, FileConfig, FlowArgs, ModelArgs, OutputArgs, RunConfig};

const DEFAULT_SWEEP: [f64; 4] = [0.01, 0.1, 1.0, 10.0];
const DEFAULT_PAIRS: [(f64, f64); 2] = [(4.0, 3.0), (3.0, 1.5)];

#[derive(Parser, Debug)]
#[command(name = "nehari-waves", version, about = "Traveling ground waves in FPU chains via constrained gradient flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute one ground wave.
    Solve(SolveArgs),
    /// Solve for a list of speeds and exponent pairs.
    Sweep(SweepArgs),
    /// Follow the ground wave to larger cells.
    #[command(name = "continue-k", alias = "continue-K")]
    ContinueK(ContinueArgs),
    /// Check a profile against the atomistic chain dynamics.
    Validate(ValidateArgs),
    /// Maximize the action along a ray.
    Rayfind(RayArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    flow: FlowArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated squared speeds [default: 0.01,0.1,1,10]
    #[arg(long)]
    sigma2_list: Option<String>,
    /// Comma-separated p:q pairs [default: 4:3,3:1.5]
    #[arg(long)]
    pairs: Option<String>,
    /// Parallel runs [default: available cores]
    #[arg(long, env = "NEHARI_WAVES_JOBS")]
    jobs: Option<usize>,
    #[command(flatten)]
    flow: FlowArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ContinueArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// First half period [default: --K]
    #[arg(long = "K-start")]
    k_start: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    factor: f64,
    #[arg(long, default_value_t = 3)]
    steps: usize,
    #[command(flatten)]
    flow: FlowArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Profile CSV (`phi,W[,AW]`).
    #[arg(long)]
    profile: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Time step [default: min(T/20000, 1e-3)]
    #[arg(long)]
    dt: Option<f64>,
    /// Final time [default: one transit 2K/σ]
    #[arg(long = "T")]
    t_final: Option<f64>,
    /// Copies of the profile cell in the chain.
    #[arg(long, default_value_t = 4)]
    cells: usize,
    /// Drift report path [default: OUT/drift.json]
    #[arg(long)]
    report: Option<PathBuf>,
    /// Output directory [default: .]
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file supplying sigma2, p, q.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RayArgs {
    #[arg(long)]
    c2: f64,
    #[arg(long)]
    cq: f64,
    #[arg(long)]
    cp: f64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = DEFAULT_RAY_TOL)]
    tol: f64,
}

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Ok,
    NotConverged,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::ContinueK(a) => cmd_continue_k(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Rayfind(a) => cmd_rayfind(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn tag(x: f64) -> String {
    format!("{x}")
}

/// Solves once and returns the centred profile, `𝒜W` and the summary.
fn run_one(params: ModelParams, cfg: &RunConfig) -> Result<(GridProfile, GridProfile, RunSummary)> {
    let solver = FlowSolver::new(params, cfg.spec, cfg.flow.clone())?;
    let (w, summary) = solver.solve()?;
    let aw = solver.functionals().operator().apply(&w)?;
    Ok((w, aw, summary))
}

fn print_summary(s: &RunSummary) {
    println!(
        "sigma2={} p={} q={} K={} N={}: {} after {} iterations, action={:.12e}, residual={:.3e}, amplitude={:.6}",
        s.params.sigma2,
        s.params.p,
        s.params.q,
        s.spec.half_period,
        s.spec.points,
        s.classification,
        s.iterations,
        s.ell,
        s.residual,
        s.amplitude
    );
}

fn cmd_solve(args: SolveArgs) -> Result<Outcome> {
    let cfg = RunConfig::resolve(&args.model, &args.flow, &args.output)?;
    let params = cfg.params()?;
    let (w, aw, summary) = run_one(params, &cfg)?;
    write_file(&cfg.out.join("profile.csv"), &profile_csv(&w, &aw)?)?;
    write_file(&cfg.summary_path(), &to_json(&summary.record())?)?;
    if cfg.plot {
        let title = format!("σ² = {}, p = {}, q = {}", params.sigma2, params.p, params.q);
        let panel = plot::profile_panel(title, &w.spec().phis(), w.values(), aw.values());
        write_file(&cfg.out.join("profile.svg"), &plot::render(&[panel], 1))?;
    }
    print_summary(&summary);
    Ok(if summary.converged { Outcome::Ok } else { Outcome::NotConverged })
}

#[derive(Serialize)]
#[serde(untagged)]
enum SweepEntry {
    Done(SummaryRecord),
    Failed { sigma2: f64, p: f64, q: f64, error: String },
}

fn cmd_sweep(args: SweepArgs) -> Result<Outcome> {
    let cfg = RunConfig::resolve(&ModelArgs::default(), &args.flow, &args.output)?;
    let file: &FileConfig = &cfg.file;
    let speeds = match &args.sigma2_list {
        Some(s) => parse_list(s)?,
        None => file.sigma2_list.clone().unwrap_or_else(|| DEFAULT_SWEEP.to_vec()),
    };
    let pairs = match &args.pairs {
        Some(s) => parse_pairs(s)?,
        None => file.pairs.clone().unwrap_or_else(|| DEFAULT_PAIRS.to_vec()),
    };
    let mut jobs_list = Vec::new();
    for &sigma2 in &speeds {
        for &(p, q) in &pairs {
            jobs_list.push(ModelParams::new(p, q, sigma2)?);
        }
    }
    let threads = args.jobs.or(file.jobs).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let results: Vec<Result<(GridProfile, GridProfile, RunSummary)>> =
        pool.install(|| jobs_list.par_iter().map(|params| run_one(*params, &cfg)).collect());

    let mut entries = Vec::new();
    let mut panels = Vec::new();
    let (mut failed, mut unconverged) = (false, false);
    for (params, result) in jobs_list.iter().zip(results) {
        let name = format!("sweep_s{}_p{}_q{}", tag(params.sigma2), tag(params.p), tag(params.q));
        let title = format!("σ² = {}, p = {}, q = {}", params.sigma2, params.p, params.q);
        match result {
            Ok((w, aw, summary)) => {
                write_file(&cfg.out.join(format!("{name}.csv")), &profile_csv(&w, &aw)?)?;
                print_summary(&summary);
                unconverged |= !summary.converged;
                panels.push(plot::profile_panel(title, &w.spec().phis(), w.values(), aw.values()));
                entries.push(SweepEntry::Done(summary.record()));
            }
            Err(e) => {
                eprintln!("run {name} failed: {e:#}");
                failed = true;
                panels.push(plot::Panel { title: format!("{title} (failed)"), series: Vec::new() });
                entries.push(SweepEntry::Failed {
                    sigma2: params.sigma2,
                    p: params.p,
                    q: params.q,
                    error: format!("{e:#}"),
                });
            }
        }
    }
    write_file(&cfg.summary_path(), &to_json(&entries)?)?;
    write_file(&cfg.out.join("sweep.svg"), &plot::render(&panels, pairs.len()))?;
    if failed {
        anyhow::bail!("at least one sweep run failed");
    }
    Ok(if unconverged { Outcome::NotConverged } else { Outcome::Ok })
}

fn cmd_continue_k(args: ContinueArgs) -> Result<Outcome> {
    let mut cfg = RunConfig::resolve(&args.model, &args.flow, &args.output)?;
    let params = cfg.params()?;
    if let Some(k) = args.k_start {
        cfg.spec = cfg.spec.with_half_period(k)?;
    }
    let (rows, last) = continue_in_k(&params, &cfg.flow, &cfg.spec, args.factor, args.steps)?;
    let mut table = String::from("K,N,ell,rel_change,tail_mass,padded_action,converged,iterations\n");
    let mut prev: Option<f64> = None;
    for row in &rows {
        let rel = prev.map(|l| ((row.ell - l) / l).abs());
        table.push_str(&format!(
            "{},{},{:.16e},{},{:.16e},{},{},{}\n",
            row.half_period,
            row.points,
            row.ell,
            rel.map(|r| format!("{r:.16e}")).unwrap_or_default(),
            row.tail_mass,
            row.padded_action.map(|a| format!("{a:.16e}")).unwrap_or_default(),
            row.summary.converged,
            row.summary.iterations
        ));
        println!(
            "K={} N={} ell={:.12e} tail_mass={:.3e} {}",
            row.half_period, row.points, row.ell, row.tail_mass, row.summary.classification
        );
        prev = Some(row.ell);
    }
    write_file(&cfg.out.join("continuation.csv"), &table)?;
    let records: Vec<SummaryRecord> = rows.iter().map(|r| r.summary.record()).collect();
    write_file(&cfg.summary_path(), &to_json(&records)?)?;
    let aw = nehari_waves::operator::AveragingOperator::new(*last.spec(), cfg.flow.operator_mode)?.apply(&last)?;
    write_file(&cfg.out.join("continuation_profile.csv"), &profile_csv(&last, &aw)?)?;
    let all = rows.iter().all(|r| r.summary.converged);
    Ok(if all { Outcome::Ok } else { Outcome::NotConverged })
}

fn cmd_validate(args: ValidateArgs) -> Result<Outcome> {
    let file = FileConfig::load(args.config.as_deref())?;
    let sigma2 = args.model.sigma2.or(file.sigma2).context("missing --sigma2")?;
    let p = args.model.p.or(file.p).context("missing --p")?;
    let q = args.model.q.or(file.q).context("missing --q")?;
    let params = ModelParams::new(p, q, sigma2)?;
    let text = fs::read_to_string(&args.profile).with_context(|| format!("reading {}", args.profile.display()))?;
    let table = parse_profile_csv(&text).with_context(|| format!("parsing {}", args.profile.display()))?;
    let t_final = args.t_final.unwrap_or(table.w.spec().period() / sigma2.sqrt());
    let dt = args.dt.unwrap_or((t_final / 20000.0).min(1e-3));
    let report = validate_wave_cells(&table.w, &params, dt, t_final, args.cells)?;
    let json = to_json(&report)?;
    let out = args.out.or(file.out).unwrap_or_else(|| PathBuf::from("."));
    write_file(&args.report.unwrap_or_else(|| out.join("drift.json")), &json)?;
    print!("{json}");
    Ok(Outcome::Ok)
}

fn cmd_rayfind(args: RayArgs) -> Result<Outcome> {
    let c = RayCoefficients::new(args.c2, args.cq, args.cp)?;
    let m = ray_maximum(&c, args.p, args.q, args.tol)?;
    println!("xi = {:.15}", m.xi);
    println!("lambda = {:.15}", m.value);
    println!("bracket = [{:.15}, {:.15}]", m.bracket.0, m.bracket.1);
    Ok(Outcome::Ok)
}
