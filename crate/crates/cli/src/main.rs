use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dualprox::engine::{
    dual_objective, read_trace, recover_primal, run, step_size_async, verify_trace, BoundSeries,
    DelaySchedule, RateBoundReport, RunConfig, DEFAULT_TOL,
};
use dualprox::problem::{instance_hash, lipschitz_constant, load_instance, save_instance};
use dualprox::repro::{run_all, ReproConfig};
use dualprox::scenarios::{build_market, ConsensusDoc, MarketParams};
use dualprox::Instance;

/// Slack below `-SLACK_TOL` counts as a violated bound.
const SLACK_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "dualprox", version, about = "Dual proximal gradient solvers for coupled multi-agent problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run DPG (sync) or Asyn-DPG (async) and write the trace.
    Run(RunArgs),
    /// Check the rate bounds on a written trace.
    Verify(VerifyArgs),
    /// Run the reproduction suite.
    Repro(ReproArgs),
    /// Write a built scenario as an instance JSON file.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Market,
    Consensus,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sync,
    Async,
}

#[derive(Args)]
#[group(id = "source", required = true, multiple = false)]
struct Source {
    /// Built-in scenario.
    #[arg(long, group = "source")]
    scenario: Option<Scenario>,
    /// Instance JSON file.
    #[arg(long, group = "source")]
    instance: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    source: Source,
    /// JSON overrides: market parameters, or the consensus graph and locals.
    #[arg(long, requires = "scenario")]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: ScenarioArgs,
    #[arg(long, value_enum, default_value = "sync")]
    mode: ModeArg,
    /// Delay bound D (async mode).
    #[arg(long, default_value_t = 0)]
    delay: usize,
    /// worst | zero | random:<seed>
    #[arg(long, default_value = "worst")]
    schedule: String,
    /// Maximum number of rounds.
    #[arg(long, default_value_t = 1_000_000)]
    iters: usize,
    /// Stop once |lambda(k+1) - lambda(k)|_inf <= tol; 0 runs all rounds.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Step-size margins in (0, 1], one value or one per agent (async).
    #[arg(long, value_delimiter = ',', default_value = "1")]
    margin: Vec<f64>,
    /// Reference optimal value for epsilon; the best observed value if absent.
    #[arg(long)]
    psi_star: Option<f64>,
    /// Initial dual point as a JSON array; zero if absent.
    #[arg(long)]
    lambda0: Option<PathBuf>,
    /// Output directory for the trace files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// File stem of the trace files.
    #[arg(long, default_value = "trace")]
    name: String,
    /// Run even if the step sizes break 1/c_i >= h (D+1)^2.
    #[arg(long)]
    allow_step_violation: bool,
    /// Update agents of a round in parallel.
    #[arg(long)]
    parallel: bool,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Trace CSV; its metadata sidecar must sit next to it.
    trace: PathBuf,
    /// Instance the trace was produced from; checked against the recorded hash.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Report path; defaults to <trace stem>.report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReproArgs {
    /// Multiply every market step size; above 1 breaks the step-size rule.
    #[arg(long, default_value_t = 1.0)]
    step_scale: f64,
    #[arg(long, default_value_t = ReproConfig::default().seed)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    input: ScenarioArgs,
    #[arg(long)]
    out: PathBuf,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn load(input: &ScenarioArgs) -> Result<Instance> {
    if let Some(path) = &input.source.instance {
        return load_instance(path).map_err(|e| anyhow!(e));
    }
    let inst = match input.source.scenario.expect("clap requires a source") {
        Scenario::Market => {
            let p: MarketParams = match &input.params {
                Some(path) => read_json(path)?,
                None => MarketParams::default(),
            };
            build_market(&p)?
        }
        Scenario::Consensus => {
            let doc: ConsensusDoc = match &input.params {
                Some(path) => read_json(path)?,
                None => ConsensusDoc::default(),
            };
            doc.build()?
        }
    };
    Ok(inst)
}

fn cmd_run(a: &RunArgs) -> Result<ExitCode> {
    let inst = load(&a.input)?;
    let h = lipschitz_constant(&inst)?.h;
    let n = inst.n_agents();
    let mut cfg = match a.mode {
        ModeArg::Sync => {
            if a.delay != 0 {
                bail!("--delay needs --mode async");
            }
            RunConfig::sync(h, a.iters)
        }
        ModeArg::Async => {
            let margins = match a.margin.len() {
                1 => vec![a.margin[0]; n],
                len if len == n => a.margin.clone(),
                len => bail!("{len} margins given for {n} agents"),
            };
            let steps = step_size_async(h, a.delay, &margins)?;
            let schedule = DelaySchedule::parse(&a.schedule, a.delay)?;
            RunConfig::asynchronous(h, schedule, steps, a.iters)
        }
    };
    cfg.tol = (a.tol > 0.0).then_some(a.tol);
    cfg.psi_star = a.psi_star;
    cfg.allow_step_violation = a.allow_step_violation;
    cfg.options.parallel = a.parallel;
    if let Some(p) = &a.lambda0 {
        cfg.lambda0 = Some(read_json(p)?);
    }
    let trace = run(&inst, &cfg)?;
    let (csv, meta) = trace.write(&a.out, &a.name)?;
    let dv = dual_objective(&inst, &trace.lambda_final)?;
    let rec = recover_primal(&inst, &trace.lambda_final)?;
    let eps = trace.epsilon(trace.len() - 1).to_scalar();
    if a.json {
        let out = json!({
            "instance_hash": trace.meta.instance_hash,
            "mode": trace.meta.mode,
            "schedule": trace.meta.schedule.kind.to_string(),
            "delay_bound": trace.meta.schedule.bound,
            "h": h,
            "step_sizes": trace.meta.step_sizes,
            "iterations": trace.iterations(),
            "stop_reason": trace.meta.stop_reason,
            "psi": dv.psi.to_scalar(),
            "p": dv.p.to_scalar(),
            "q": dv.q.to_scalar(),
            "psi_star": trace.meta.psi_star,
            "epsilon": eps,
            "x_hat": rec.x_hat,
            "mismatch": rec.mismatch,
            "max_residual": rec.max_residual(),
            "trace": csv,
            "meta": meta,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!(
            "{:?} run, {} rounds ({:?}), h = {h}",
            trace.meta.mode,
            trace.iterations(),
            trace.meta.stop_reason
        );
        println!("Psi = {} (P = {}, Q = {})", dv.psi, dv.p, dv.q);
        println!("epsilon = {eps:e} against Psi* = {} ({})", trace.meta.psi_star, trace.meta.psi_star_source);
        println!("x_hat = {:?}", rec.x_hat);
        println!("mismatch = {:e}, max residual = {:e}", rec.mismatch, rec.max_residual());
        println!("wrote {} and {}", csv.display(), meta.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn violations(rep: &RateBoundReport) -> Vec<String> {
    let mut out = Vec::new();
    let named = [
        ("sync_rate", rep.sync_rate.as_ref()),
        ("descent", rep.descent.as_ref()),
        ("delayed_rate", rep.delayed_rate.as_ref()),
        ("window_sum", Some(&rep.window_sum)),
        ("weighted_window_sum", Some(&rep.weighted_window_sum)),
    ];
    for (name, s) in named {
        if let Some(s) = s {
            if !s.holds(SLACK_TOL) {
                out.push(format!("{name}: slack {:e} at K = {}", s.min_slack, s.argmin_k));
            }
        }
    }
    out
}

fn cmd_verify(a: &VerifyArgs) -> Result<ExitCode> {
    let trace = read_trace(&a.trace)?;
    if let Some(p) = &a.instance {
        let inst: Instance = load_instance(p)?;
        let hash = instance_hash(&inst);
        if hash != trace.meta.instance_hash {
            bail!("instance hash {hash} does not match the trace ({})", trace.meta.instance_hash);
        }
        let psi = dual_objective(&inst, &trace.lambda_final)?.psi.to_scalar();
        let recorded = trace.final_psi().to_scalar();
        if (psi - recorded).abs() > 1e-9 * psi.abs().max(1.0) {
            bail!("recorded final Psi {recorded} differs from the instance value {psi}");
        }
    }
    let rep = verify_trace(&trace)?;
    let out = a.out.clone().unwrap_or_else(|| {
        let stem = a.trace.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
        a.trace.with_file_name(format!("{stem}.report.json"))
    });
    std::fs::write(&out, serde_json::to_string_pretty(&rep)?)
        .with_context(|| format!("cannot write {}", out.display()))?;
    let bad = violations(&rep);
    if a.json {
        let s = |b: Option<&BoundSeries>| b.map(|b| json!({"min_slack": b.min_slack, "argmin_k": b.argmin_k, "first_k": b.first_k}));
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "report": out,
                "mode": trace.meta.mode,
                "delay_bound": rep.delay_bound,
                "sync_rate": s(rep.sync_rate.as_ref()),
                "descent": s(rep.descent.as_ref()),
                "delayed_rate": s(rep.delayed_rate.as_ref()),
                "lambda_constant": rep.lambda_constant,
                "window_sum": s(Some(&rep.window_sum)),
                "weighted_window_sum": s(Some(&rep.weighted_window_sum)),
                "window_sum_sides": rep.window_sum_sides,
                "weighted_window_sum_sides": rep.weighted_window_sum_sides,
                "violations": bad,
            }))?
        );
    } else {
        let line = |name: &str, b: Option<&BoundSeries>| {
            if let Some(b) = b {
                println!("{name:<9} K >= {:<4} min slack {:e} at K = {}", b.first_k, b.min_slack, b.argmin_k);
            }
        };
        println!("{:?} trace, D = {}, {} records", trace.meta.mode, rep.delay_bound, trace.len());
        line("sync_rate", rep.sync_rate.as_ref());
        line("descent", rep.descent.as_ref());
        line("delayed_rate", rep.delayed_rate.as_ref());
        line("window_sum", Some(&rep.window_sum));
        line("weighted_window_sum", Some(&rep.weighted_window_sum));
        for v in &bad {
            println!("VIOLATED {v}");
        }
        println!("wrote {}", out.display());
    }
    Ok(if bad.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_repro(a: &ReproArgs) -> Result<ExitCode> {
    if !(a.step_scale > 0.0 && a.step_scale.is_finite()) {
        bail!("--step-scale must be positive");
    }
    let cfg = ReproConfig {
        step_scale: a.step_scale,
        seed: a.seed,
        ..ReproConfig::default()
    };
    let summary = run_all(&cfg);
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        for c in &summary.criteria {
            println!(
                "{:<4} {}  {}: {}",
                c.id,
                if c.passed { "PASS" } else { "FAIL" },
                c.title,
                c.detail
            );
        }
        let failed = summary.criteria.iter().filter(|c| !c.passed).count();
        println!("{} of {} criteria passed", summary.criteria.len() - failed, summary.criteria.len());
    }
    Ok(if summary.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_export(a: &ExportArgs) -> Result<ExitCode> {
    let inst = load(&a.input)?;
    save_instance(&inst, &a.out)?;
    println!("wrote {} ({})", a.out.display(), instance_hash(&inst));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Repro(a) => cmd_repro(a),
        Command::Export(a) => cmd_export(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
