use anonbandit::decomp::{read_decomposition, read_graph, validate_decomposition};
use anonbandit::harness::{
    emit_csv, parse_settings, run_experiment, AggregateResult, HarnessError,
};
use anonbandit::{ExperimentConfig, InstanceSpec};
use anyhow::{Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "anonbandit",
    version,
    about = "Anonymous multi-armed bandit simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicated experiments and write regret curves
    Run(RunArgs),
    /// Check a decomposition against a batched graph
    ValidateDecomp(ValidateArgs),
    /// Sample an instance and write it as a fixture
    GenInstance(GenArgs),
}

/// Flags override values read from `--config`.
#[derive(Args)]
struct RunArgs {
    /// File of `key = value` lines using the flag names as keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instance spec such as `uniform:n=50,k=5,c=4,t=100000`, or `file:<fixture>`
    #[arg(long)]
    instance: Option<String>,
    /// Comma-separated subset of etc, alg1-greedy, alg1-random, alg1-lp, ucb
    #[arg(long)]
    algos: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for regret.csv and regret_final.csv
    #[arg(long)]
    out: Option<PathBuf>,
    /// `ci` runs T = 20000 with 5 replications
    #[arg(long, value_parser = ["full", "ci"])]
    scale: Option<String>,
    /// Keep every n-th round in the curve file
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    gamma_const: Option<f64>,
    #[arg(long)]
    etc_scale: Option<f64>,
    #[arg(long)]
    u_assumed: Option<usize>,
    #[arg(long)]
    batches: Option<usize>,
    /// `false` aborts batches whose graph is not U-batched
    #[arg(long)]
    robust: Option<bool>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Graph fixture: header `N K C D`, then one line of demanded arms per user
    #[arg(long)]
    graph: PathBuf,
    /// One assignment per line
    #[arg(long)]
    decomposition: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    instance: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, name) = match cli.command {
        Command::Run(args) => (run(args), "run"),
        Command::ValidateDecomp(args) => (validate(args), "validate-decomp"),
        Command::GenInstance(args) => (gen_instance(args), "gen-instance"),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let mut cmd = Cli::command();
            cmd.build();
            let usage = cmd
                .find_subcommand_mut(name)
                .map(|c| c.render_usage().to_string())
                .unwrap_or_default();
            eprintln!("error: {msg}\n\n{usage}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn harness_failure(e: HarnessError) -> Failure {
    match e {
        HarnessError::InvalidConfig(msg) => Failure::Usage(msg),
        other => Failure::Run(other.into()),
    }
}

fn settings(args: &RunArgs) -> Result<BTreeMap<String, String>, Failure> {
    let mut map = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_settings(&text).map_err(harness_failure)?
        }
        None => BTreeMap::new(),
    };
    let flags: [(&str, Option<String>); 12] = [
        ("instance", args.instance.clone()),
        ("algos", args.algos.clone()),
        ("reps", args.reps.map(|v| v.to_string())),
        ("seed", args.seed.map(|v| v.to_string())),
        ("out", args.out.as_ref().map(|p| p.display().to_string())),
        ("scale", args.scale.clone()),
        ("stride", args.stride.map(|v| v.to_string())),
        ("gamma-const", args.gamma_const.map(|v| v.to_string())),
        ("etc-scale", args.etc_scale.map(|v| v.to_string())),
        ("u-assumed", args.u_assumed.map(|v| v.to_string())),
        ("batches", args.batches.map(|v| v.to_string())),
        ("robust", args.robust.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            map.insert(key.to_string(), v);
        }
    }
    Ok(map)
}

fn run(args: RunArgs) -> Result<ExitCode, Failure> {
    let config = ExperimentConfig::from_settings(&settings(&args)?).map_err(harness_failure)?;
    let result = run_experiment(&config).map_err(harness_failure)?;
    if let Some(dir) = &config.output {
        let path = dir.join("regret.csv");
        emit_csv(&result, &path, config.stride).map_err(harness_failure)?;
        println!("wrote {}", path.display());
    }
    print_table(&config, &result);
    for failure in &result.failures {
        eprintln!("failed: {failure}");
    }
    if result.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(Failure::Run(anyhow::anyhow!(
            "{} of {} runs failed",
            result.failures.len(),
            config.algorithms.len() * config.replications
        )))
    }
}

fn print_table(config: &ExperimentConfig, result: &AggregateResult) {
    println!(
        "instance {}  replications {}  seed {}",
        config.instance, config.replications, config.root_seed
    );
    println!(
        "{:<14} {:>16} {:>12} {:>6}",
        "algorithm", "final regret", "95% ci", "runs"
    );
    let mut observed = false;
    for s in &result.summaries {
        let mut name = s.algorithm.name().to_string();
        if !s.algorithm.is_anonymous() {
            name.push('*');
            observed = true;
        }
        println!(
            "{:<14} {:>16.1} {:>12.1} {:>6}",
            name, s.final_mean, s.final_ci_half_width, s.replications
        );
    }
    if observed {
        println!("* not anonymous: observes individual rewards");
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn validate(args: ValidateArgs) -> Result<ExitCode, Failure> {
    let (graph, c) = read_graph(&read(&args.graph)?)
        .with_context(|| format!("graph {}", args.graph.display()))?;
    let decomposition = read_decomposition(
        &read(&args.decomposition)?,
        graph.n_users(),
        graph.n_arms(),
        c,
    )
    .with_context(|| format!("decomposition {}", args.decomposition.display()))?;
    let report = validate_decomposition(&graph, c, &decomposition);
    println!("assignments: {}", decomposition.len());
    print!("{report}");
    Ok(if report.valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn gen_instance(args: GenArgs) -> Result<ExitCode, Failure> {
    let spec: InstanceSpec = args.instance.parse().map_err(harness_failure)?;
    let instance = spec
        .generate(args.seed)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let text = instance.to_fixture();
    match &args.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
