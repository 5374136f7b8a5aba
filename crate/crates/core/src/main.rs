use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qmoves::analysis::{
    cluster_records, fidelity_quantiles, kde_density, mean_iteration_time, qsl_sampling, ClusterPreset, KdeOptions,
    QslEstimate, QslOptions, SolutionRecord,
};
use qmoves::optim::StopSignal;
use qmoves::problems::{evaluate_fidelity, make_problem_ms, Level};
use qmoves::seeding::{binned_random_seed, random_seed, SeedKind, SeedProvenance};
use qmoves::service::{serve, Service, ServiceConfig};
use qmoves::store::{archive_path, run_batch, Archive, BatchConfig, BatchSeed, Manifest, Method};

#[derive(Parser)]
#[command(name = "qmoves", version, about = "Optimal control of ultracold-atom state transfers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize an archive of seeds with GRAPE or stochastic ascent.
    Optimize(OptimizeArgs),
    /// Generate random seeds and store them unoptimized.
    Seed(SeedArgs),
    /// Analyze solution archives.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Run the play service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct Output {
    /// Archive file to write; defaults to <data-dir>/<level>/<method>/<timestamp>.qmarchive.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    level: Level,
    /// Duration in ms; defaults to the duration of the seeds.
    #[arg(long = "T")]
    duration_ms: Option<f64>,
    /// grape, sa (one bin per sample) or sa<n_b>, e.g. sa40.
    #[arg(long, default_value = "grape")]
    method: String,
    /// Archive whose controls are used as seeds.
    #[arg(long)]
    seeds: PathBuf,
    /// JSON batch configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Initial wall seconds per seed.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Independent uniform draw at every step.
    Rs,
    /// One uniform draw per bin.
    Binned,
}

#[derive(Args)]
struct SeedArgs {
    #[arg(long)]
    level: Level,
    /// Duration in ms; defaults to the level's reference speed limit.
    #[arg(long = "T")]
    duration_ms: Option<f64>,
    #[arg(long, value_enum, default_value = "rs")]
    kind: Kind,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Bins for --kind binned.
    #[arg(long = "n-b", default_value_t = 40)]
    n_b: usize,
    /// Base RNG seed; seed i uses base + i.
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Inputs {
    /// Input archives; records of all of them are analyzed together.
    #[arg(long = "archive", required = true)]
    archives: Vec<PathBuf>,
    /// CSV output file; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Kernel density of log10(1 - F) per duration column.
    Density {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 0.08)]
        bandwidth: f64,
        #[arg(long, default_value_t = 40)]
        t_bins: usize,
    },
    /// DBSCAN clustering of control strategies.
    Cluster {
        #[command(flatten)]
        inputs: Inputs,
        /// bhw_paper, splitting_paper or shakeup_paper.
        #[arg(long)]
        preset: String,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        min_samples: Option<usize>,
    },
    /// Speed-limit estimates from subsampled solution sets.
    Qsl {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long = "Tref")]
        t_ref: f64,
        /// Solutions per trial; several values give several rows.
        #[arg(long, value_delimiter = ',', required = true)]
        samples: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// Fidelity quartiles over wall time across optimization runs.
    Quantiles {
        #[command(flatten)]
        inputs: Inputs,
        /// Time between rows in seconds.
        #[arg(long, default_value_t = 10.0)]
        step: f64,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Where session archives are stored.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Archives with reference solutions for the challenge curve.
    #[arg(long)]
    reference: Vec<PathBuf>,
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

fn parse_method(tag: &str) -> Option<(Method, Option<usize>)> {
    match tag {
        "grape" => Some((Method::Grape, None)),
        "sa" => Some((Method::Sa, None)),
        _ => tag.strip_prefix("sa")?.parse().ok().filter(|&n| n > 0).map(|n| (Method::Sa, Some(n))),
    }
}

fn settings(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    let mut s: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    s.insert("argv".into(), std::env::args().collect::<Vec<_>>().join(" "));
    s
}

fn save(archive: &Archive, output: &Output) -> anyhow::Result<PathBuf> {
    let path = output.out.clone().unwrap_or_else(|| {
        archive_path(&output.data_dir, archive.manifest.level, &archive.manifest.method, archive.manifest.created_ms)
    });
    archive.save(&path).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn load_records(paths: &[PathBuf]) -> anyhow::Result<Vec<SolutionRecord>> {
    let mut out = Vec::new();
    for p in paths {
        let a = Archive::load(p).with_context(|| format!("reading {}", p.display()))?;
        out.extend(a.into_records());
    }
    Ok(out)
}

fn writer(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn seed(args: &SeedArgs) -> anyhow::Result<()> {
    if args.count == 0 {
        usage_error("--count must be positive");
    }
    let t = args.duration_ms.unwrap_or_else(|| args.level.reference_qsl_ms());
    let problem = make_problem_ms(args.level, t)?;
    let kind = match args.kind {
        Kind::Rs => "rs",
        Kind::Binned => "binned",
    };
    let mut manifest = Manifest::new(args.level, "seed");
    manifest.settings = settings(&[
        ("T", problem.duration_ms().to_string()),
        ("kind", kind.into()),
        ("count", args.count.to_string()),
        ("n_b", args.n_b.to_string()),
        ("rng_seed", args.rng_seed.to_string()),
    ]);
    let mut archive = Archive::new(manifest);
    for i in 0..args.count {
        let s = args.rng_seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let control = match args.kind {
            Kind::Rs => random_seed(&problem, &mut rng),
            Kind::Binned => binned_random_seed(&problem, args.n_b, &mut rng)?,
        };
        let f = evaluate_fidelity(&problem, &control)?;
        let provenance = SeedProvenance::new(SeedKind::Rs, kind).with("rng_seed", s);
        let id = format!("{}-seed-{i:05}", args.level);
        archive.push(SolutionRecord::from_seed(id, &problem, control, f, provenance));
        archive.manifest.rng_seeds.push(s);
    }
    let path = save(&archive, &args.output)?;
    println!("{}", path.display());
    Ok(())
}

fn is_empty_file(p: &Path) -> bool {
    std::fs::metadata(p).map(|m| m.is_file() && m.len() == 0).unwrap_or(false)
}

fn optimize(args: &OptimizeArgs) -> anyhow::Result<()> {
    let Some((method, n_b)) = parse_method(&args.method) else {
        usage_error(format!("unknown method '{}'", args.method));
    };
    if is_empty_file(&args.seeds) {
        usage_error(format!("seed file {} is empty", args.seeds.display()));
    }
    let seeds = Archive::load(&args.seeds).with_context(|| format!("reading {}", args.seeds.display()))?;
    if seeds.is_empty() {
        usage_error(format!("seed file {} contains no seeds", args.seeds.display()));
    }
    if seeds.records().iter().any(|r| r.level != args.level) {
        usage_error(format!("seed file {} holds controls of another level", args.seeds.display()));
    }
    let t = args.duration_ms.unwrap_or(seeds.records()[0].duration_ms);
    let problem = make_problem_ms(args.level, t)?;

    let mut config: BatchConfig = match &args.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => BatchConfig::default(),
    };
    config.method = method;
    if method == Method::Sa {
        config.sa.n_b = n_b;
    }
    if let Some(w) = args.workers {
        config.workers = w;
    }
    if let Some(b) = args.budget {
        config.min_budget = b;
    }
    if let Some(m) = args.max_iterations {
        config.grape.max_iterations = Some(m);
        config.sa.max_iterations = Some(m);
    }

    let batch: Vec<BatchSeed> = seeds
        .records()
        .iter()
        .map(|r| BatchSeed {
            control: r.control.clone(),
            provenance: r.provenance.clone().with("seed_id", &r.id),
            rng_seed: r.provenance.metadata.get("rng_seed").and_then(|s| s.parse().ok()),
        })
        .collect();
    let progress = |i: usize, r: &qmoves::optim::IterationRecord| {
        info!("seed {i}: iteration {} F = {:.6}", r.iteration, r.fidelity);
    };
    let outcome = run_batch(&problem, &batch, &config, &StopSignal::new(), &progress)?;
    let mut archive = outcome.archive;
    let mut s = settings(&[
        ("seeds", args.seeds.display().to_string()),
        ("method", args.method.clone()),
        ("workers", config.workers.to_string()),
        ("budget", config.min_budget.to_string()),
    ]);
    if let Some(p) = &args.config {
        s.insert("config_file".into(), p.display().to_string());
    }
    if let Some(m) = args.max_iterations {
        s.insert("max_iterations".into(), m.to_string());
    }
    archive.manifest.settings.extend(s);
    let path = save(&archive, &args.output)?;
    let best = archive.records().iter().map(|r| r.fidelity).fold(f64::NAN, f64::max);
    eprintln!("{} runs, best F = {best:.6}", archive.len());
    println!("{}", path.display());
    Ok(())
}

fn analyze(cmd: &AnalyzeCommand) -> anyhow::Result<()> {
    match cmd {
        AnalyzeCommand::Density { inputs, bandwidth, t_bins } => {
            let records = load_records(&inputs.archives)?;
            let opts = KdeOptions { bandwidth: *bandwidth, t_bins: *t_bins, ..KdeOptions::default() };
            kde_density(&records, &opts)?.write_csv(writer(&inputs.out)?)?;
        }
        AnalyzeCommand::Cluster { inputs, preset, eps, min_samples } => {
            let Some(mut p) = ClusterPreset::by_name(preset) else {
                usage_error(format!("unknown preset '{preset}'"));
            };
            if let Some(e) = eps {
                p.eps = *e;
            }
            if let Some(m) = min_samples {
                p.min_samples = *m;
            }
            let records = load_records(&inputs.archives)?;
            let c = cluster_records(&records, &p)?;
            eprintln!("{} clusters, {} noise of {} selected", c.n_clusters, c.n_noise, c.indices.len());
            c.write_csv(&records, writer(&inputs.out)?)?;
        }
        AnalyzeCommand::Qsl { inputs, t_ref, samples, trials, rng_seed } => {
            let records = load_records(&inputs.archives)?;
            let points: Vec<(f64, f64)> =
                records.iter().filter(|r| r.error.is_none()).map(|r| (r.duration_ms, r.fidelity)).collect();
            let rows = samples
                .iter()
                .map(|&n| {
                    let opts = QslOptions { n_trials: *trials, seed: *rng_seed, ..QslOptions::new(*t_ref, n) };
                    qsl_sampling(&points, &opts)
                })
                .collect::<qmoves::Result<Vec<_>>>()?;
            QslEstimate::write_csv(&rows, writer(&inputs.out)?)?;
        }
        AnalyzeCommand::Quantiles { inputs, step } => {
            if !(*step > 0.0) {
                usage_error("--step must be positive");
            }
            let records = load_records(&inputs.archives)?;
            let runs: Vec<_> = records.into_iter().map(|r| r.telemetry).filter(|h| !h.is_empty()).collect();
            if runs.is_empty() {
                bail!("no optimization telemetry in the given archives");
            }
            let end = runs.iter().filter_map(|h| h.last()).map(|r| r.wall_s).fold(0.0, f64::max);
            let times: Vec<f64> = (0..=(end / step).ceil() as usize).map(|i| i as f64 * step).collect();
            if let Some(t) = mean_iteration_time(&runs) {
                eprintln!("mean iteration time {t:.4} s");
            }
            qmoves::analysis::quantiles::write_csv(&fidelity_quantiles(&runs, &times), writer(&inputs.out)?)?;
        }
    }
    Ok(())
}

fn run_server(args: &ServeArgs) -> anyhow::Result<()> {
    let reference = load_records(&args.reference)?;
    let config = ServiceConfig { data_dir: args.data_dir.clone(), reference, ..ServiceConfig::default() };
    let addr = std::net::SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(serve(Service::new(config), addr))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Optimize(a) => optimize(a),
        Command::Seed(a) => seed(a),
        Command::Analyze(c) => analyze(c),
        Command::Serve(a) => run_server(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
