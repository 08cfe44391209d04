use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ddtm_core::empirics::{monotonicity_report, read_user_records, Axis, Boundaries, DEFAULT_ALPHA};
use ddtm_core::experiments::{run_sweep_with, write_results, SweepOptions};
use ddtm_core::netgen::{build_network, network_stats, write_edge_list, write_metadata, NetworkMetadata, DEFAULT_GAMMA};
use ddtm_core::rng::{stream, SHARED_NETWORK_STREAM};
use ddtm_core::thresholds::RankOrder;
use ddtm_core::{sample_degree_targets, ExperimentPlan, Regime, ThresholdAssignment};

#[derive(Parser)]
#[command(name = "ddtm", version, about = "Degree-dependent threshold model simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte Carlo sweeps over the initial opinion probability.
    Simulate(SimulateArgs),
    /// Cluster user records by follower or following count and test retweet ratios.
    Analyze(AnalyzeArgs),
    /// Generate one network and write its edge list and metadata.
    Network(NetworkArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// TOML experiment plan; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Results CSV.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the plan's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the plan's runs per grid point.
    #[arg(long)]
    runs: Option<u32>,
    /// Worker threads (default: all cores). Does not change results.
    #[arg(long)]
    threads: Option<usize>,
    /// Write per-run attempt traces into this directory.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    /// CSV with user_id, follower_count, following_count, retweeted.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "follower")]
    axis: Axis,
    /// Cluster edges, e.g. `0,1000,10000,inf`.
    #[arg(long)]
    boundaries: Option<String>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Report CSV; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct NetworkArgs {
    #[arg(long, default_value = "in_dependent")]
    regime: Regime,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Degree on the fixed side.
    #[arg(long, default_value_t = 15)]
    fixed_degree: u32,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge list path; metadata goes next to it with a `.json` extension.
    #[arg(long)]
    out: PathBuf,
    /// Also write the per-node threshold audit with this many levels.
    #[arg(long, requires = "audit")]
    n_th: Option<u32>,
    #[arg(long, requires = "n_th")]
    audit: Option<PathBuf>,
    #[arg(long, default_value = "descending")]
    rank_order: RankOrderArg,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum RankOrderArg {
    Ascending,
    Descending,
}

impl From<RankOrderArg> for RankOrder {
    fn from(a: RankOrderArg) -> Self {
        match a {
            RankOrderArg::Ascending => RankOrder::Ascending,
            RankOrderArg::Descending => RankOrder::Descending,
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut plan = match &args.config {
        Some(path) => ExperimentPlan::load(path)?,
        None => ExperimentPlan::default(),
    };
    if let Some(seed) = args.seed {
        plan.master_seed = seed;
    }
    if let Some(runs) = args.runs {
        plan.runs = runs;
    }
    if args.threads == Some(0) {
        bail!("--threads must be at least 1");
    }
    let configs = plan.expand()?;
    let mut results = Vec::with_capacity(configs.len());
    for (k, cfg) in configs.iter().enumerate() {
        let trace_dir = args.trace_dir.as_ref().map(|d| {
            if configs.len() == 1 {
                d.clone()
            } else {
                d.join(format!("sweep_{k:03}"))
            }
        });
        if let Some(dir) = &trace_dir {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let opts = SweepOptions {
            threads: args.threads,
            trace_dir,
        };
        eprintln!(
            "sweep {}/{}: {} n={} fixed_degree={} n_th={} runs={}",
            k + 1,
            configs.len(),
            cfg.regime.as_str(),
            cfg.n,
            cfg.fixed_degree,
            cfg.n_th,
            cfg.runs
        );
        results.push(run_sweep_with(cfg, &opts)?);
    }
    write_results(&results, &args.out)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let boundaries = match &args.boundaries {
        Some(text) => Boundaries::parse(text)?,
        None => Boundaries::default_eight(),
    };
    let records = read_user_records(&args.input)?;
    let report = monotonicity_report(&records, args.axis, &boundaries, args.alpha)?;
    match &args.out {
        Some(path) => {
            report.write_csv(path)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(report.to_csv().as_bytes())?,
    }
    Ok(())
}

fn metadata_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn network(args: NetworkArgs) -> Result<()> {
    let side = args.regime.variable_side();
    let mut rng = stream(args.seed, SHARED_NETWORK_STREAM);
    let targets = sample_degree_targets(args.n, args.gamma, side, args.fixed_degree, &mut rng)?;
    let net = build_network(&targets, &mut rng);
    write_edge_list(&net, &args.out)?;
    let meta = NetworkMetadata::describe(&net, args.gamma, Some(args.seed));
    let meta_path = metadata_path(&args.out);
    write_metadata(&meta, &meta_path)?;
    if let (Some(n_th), Some(audit)) = (args.n_th, &args.audit) {
        let thr = ThresholdAssignment::for_network_ordered(&net, side, n_th, args.rank_order.into())?;
        thr.write_audit(net.degrees(side), audit)?;
    }
    let stats = network_stats(&net);
    eprintln!(
        "n={} edges={} distinct_pairs={} out_degree {}..{} in_degree {}..{}",
        stats.n, stats.edges, stats.distinct_pairs, stats.out.min, stats.out.max, stats.inward.min, stats.inward.max
    );
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Network(a) => network(a),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
