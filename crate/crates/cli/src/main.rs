use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use eon_rsa::experiment::{GeneratorSpec, Inputs};
use eon_rsa::{
    validate_plan, DemandOrder, ExactLimits, ExperimentSpec, ImpairmentParams, Mode, Policy, RhoSpec, StateDump,
};

#[derive(Parser)]
#[command(name = "eon-rsa", version, about = "Impairment-aware RSA planner and experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan demand sets with the heuristic.
    Plan(RunArgs),
    /// Solve demand sets exactly (small instances only).
    Exact(RunArgs),
    /// Compare heuristic and exact objectives.
    GapStudy(RunArgs),
    /// Plan over a range of demand counts.
    Sweep(RunArgs),
    /// Check a state dump and recompute final-state SINR.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Msf,
    Mcdf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Proposed,
    DbpOnly,
    Blsa,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec file; the other flags override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Topology file or builtin:six-node / builtin:nsfnet.
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    params: Option<String>,
    /// Demand file (JSON list of {id, source, destination, rho}).
    #[arg(long, conflicts_with_all = ["gen_count", "gen_rho"])]
    demands: Option<String>,
    /// Number of generated demands.
    #[arg(long)]
    gen_count: Option<usize>,
    /// Generated slot demand: N or MIN-MAX.
    #[arg(long)]
    gen_rho: Option<String>,
    /// Base seed; replication i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, value_delimiter = ',')]
    ordering: Vec<OrderArg>,
    #[arg(long, value_enum, value_delimiter = ',')]
    policy: Vec<PolicyArg>,
    #[arg(long, value_enum, value_delimiter = ',')]
    impairments: Vec<OnOff>,
    #[arg(long)]
    replications: Option<usize>,
    /// Slots per link.
    #[arg(long)]
    slots: Option<usize>,
    /// Candidate paths per demand.
    #[arg(long)]
    k: Option<usize>,
    /// Demand counts for sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    loads: Vec<usize>,
    #[arg(long)]
    max_demands: Option<usize>,
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Wall-clock limit per exact solve, seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// State dump to check.
    dump: PathBuf,
    #[arg(long)]
    params: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Directory that relative input paths are resolved against.
fn config_dir() -> PathBuf {
    std::env::var_os("EON_RSA_CONFIG_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn build_spec(mode: Mode, a: &RunArgs, base: &Path) -> anyhow::Result<ExperimentSpec> {
    let mut spec = match &a.spec {
        Some(p) => {
            let p = if p.is_absolute() { p.clone() } else { base.join(p) };
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let mut s = ExperimentSpec::from_json(&text)?;
            s.mode = mode;
            s
        }
        None => {
            let Some(t) = &a.topology else { bail!("--topology is required without --spec") };
            ExperimentSpec::new(t.clone(), mode)
        }
    };
    if let Some(t) = &a.topology {
        spec.topology = t.clone();
    }
    if let Some(p) = &a.params {
        spec.params = Some(p.clone());
    }
    if let Some(d) = &a.demands {
        spec.demands = Some(d.clone());
        spec.generator = None;
    }
    if a.gen_count.is_some() || a.gen_rho.is_some() || (a.seed.is_some() && spec.demands.is_none()) {
        let prev = spec.generator.clone();
        let rho = match &a.gen_rho {
            Some(r) => RhoSpec::parse(r)?,
            None => prev.as_ref().map(|g| g.rho).unwrap_or(RhoSpec::Fixed(5)),
        };
        let count = a.gen_count.or(prev.as_ref().map(|g| g.count)).unwrap_or(0);
        let seed = a.seed.or(prev.as_ref().map(|g| g.seed)).unwrap_or(1);
        spec.generator = Some(GeneratorSpec { count, rho, seed });
        spec.demands = None;
    }
    if !a.ordering.is_empty() {
        spec.orderings = a
            .ordering
            .iter()
            .map(|o| match o {
                OrderArg::Msf => DemandOrder::Msf,
                OrderArg::Mcdf => DemandOrder::Mcdf,
            })
            .collect();
    }
    if !a.policy.is_empty() {
        spec.policies = a
            .policy
            .iter()
            .map(|p| match p {
                PolicyArg::Proposed => Policy::Proposed,
                PolicyArg::DbpOnly => Policy::DbpOnly,
                PolicyArg::Blsa => Policy::Blsa,
            })
            .collect();
    }
    if !a.impairments.is_empty() {
        spec.impairments = a.impairments.iter().map(|i| matches!(i, OnOff::On)).collect();
    }
    if let Some(r) = a.replications {
        spec.replications = r;
    }
    if let Some(n) = a.slots {
        spec.slots = n;
    }
    if let Some(k) = a.k {
        spec.k_paths = k;
    }
    if !a.loads.is_empty() {
        spec.sweep_counts = a.loads.clone();
    }
    let limits: &mut ExactLimits = &mut spec.exact_limits;
    if let Some(m) = a.max_demands {
        limits.max_demands = m;
    }
    if a.max_nodes.is_some() {
        limits.max_nodes_explored = a.max_nodes;
    }
    if a.time_limit.is_some() {
        limits.wall_clock_s = a.time_limit;
    }
    if let Some(o) = &a.out {
        spec.output = Some(o.to_string_lossy().into_owned());
    }
    spec.validate()?;
    Ok(spec)
}

fn run(mode: Mode, a: &RunArgs) -> anyhow::Result<()> {
    let base = config_dir();
    let spec = build_spec(mode, a, &base)?;
    let inputs: Inputs = spec.load_inputs(&base)?;
    log::info!("running {} with {} replication(s)", spec.mode, spec.replications);
    let report = eon_rsa::run_experiment(&spec, &inputs)?;
    let out = PathBuf::from(spec.output.clone().unwrap_or_else(|| "eon-rsa-out".into()));
    report.write(&out, &spec)?;
    for f in &report.failures {
        log::error!("{}: {} ({})", f.job, f.message, f.kind);
    }
    let bodies = report.bodies(spec.mode)?;
    let summary = match spec.mode {
        Mode::Plan | Mode::Sweep => "aggregate.csv",
        Mode::Exact => "exact.csv",
        Mode::GapStudy => "gap_summary.csv",
    };
    print!("{}", bodies[summary]);
    eprintln!("wrote {}", out.display());
    if !report.failures.is_empty() {
        bail!("{} job(s) failed; see failures.csv", report.failures.len());
    }
    Ok(())
}

fn validate(a: &ValidateArgs) -> anyhow::Result<bool> {
    let base = config_dir();
    let params = match &a.params {
        Some(p) => {
            let p = Path::new(p);
            ImpairmentParams::load(&if p.is_absolute() { p.to_path_buf() } else { base.join(p) })?
        }
        None => ImpairmentParams::default(),
    };
    let dump = StateDump::load(&a.dump)?;
    let report = validate_plan(&dump, &params)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &a.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(report.is_sound())
}

fn error_record(err: &anyhow::Error) -> serde_json::Value {
    let kind = err.downcast_ref::<eon_rsa::Error>().map(|e| e.kind()).unwrap_or("cli");
    serde_json::json!({ "error": { "kind": kind, "message": format!("{err:#}") } })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(a) => run(Mode::Plan, a).map(|_| true),
        Command::Exact(a) => run(Mode::Exact, a).map(|_| true),
        Command::GapStudy(a) => run(Mode::GapStudy, a).map(|_| true),
        Command::Sweep(a) => run(Mode::Sweep, a).map(|_| true),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::from(2)
        }
    }
}
