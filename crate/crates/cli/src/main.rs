use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use madenet_core::harness::{
    emit_plots, files, gen_env_suite, load_env_suite, read_curves_csv, read_series_csv, read_summary_csv,
    read_trials_csv, run_trials_in_memory, summarize, write_curves_csv, write_series_csv, write_summary_csv,
    write_timing_csv, write_trials_csv, EvalConfig, HarnessError, Method, Policy,
};
use madenet_core::training::{train, train_decentralized_only, write_training_log, TrainConfig, TrainError};

mod settings;

use settings::Settings;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "madenet", version, about = "Multi-robot exploration: environments, training and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an environment suite with increasing clutter.
    GenEnvs(GenEnvsArgs),
    /// Train the centralized and decentralized networks.
    Train(TrainArgs),
    /// Train decentralized networks only, each with its own targets.
    TrainDt(TrainArgs),
    /// Run the evaluation protocol over a suite.
    Eval(EvalArgs),
    /// Aggregate trials.csv into summary.csv and curves.csv.
    Summarize(DirArgs),
    /// Render charts from summary.csv and curves.csv.
    Plot(DirArgs),
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct GenEnvsArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    density_min: Option<f64>,
    #[arg(long)]
    density_max: Option<f64>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Directory for weights and the training log.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    team_size: Option<usize>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Directory of env_*.grid files.
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Comma-separated methods (made-net, made-net-dt, nf, ub, pb, random).
    #[arg(long)]
    methods: Option<String>,
    /// Weights directory for made-net.
    #[arg(long)]
    made_net: Option<PathBuf>,
    /// Weights directory for made-net-dt.
    #[arg(long)]
    made_net_dt: Option<PathBuf>,
    /// Comma-separated communication success probabilities.
    #[arg(long)]
    csps: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// Record per-trial wall-clock in trials.csv.
    #[arg(long)]
    wall_clock: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Debug)]
struct DirArgs {
    /// Directory holding the input CSV files.
    #[arg(long)]
    input: PathBuf,
    /// Output directory; defaults to the input directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<TrainError> for Failure {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn settings(args: &ConfigArgs) -> Result<Settings, Failure> {
    let mut s = Settings::load(args.config.as_deref()).map_err(Failure::Config)?;
    s.apply(&args.set).map_err(Failure::Config)?;
    Ok(s)
}

fn gen_envs(args: GenEnvsArgs) -> Result<(), Failure> {
    let mut s = settings(&args.config)?;
    s.flag("count", args.count);
    s.flag("size", args.size);
    s.flag("density_min", args.density_min);
    s.flag("density_max", args.density_max);
    let (mut count, mut size, mut dmin, mut dmax) = (10usize, 20usize, 0.3f64, 0.7f64);
    s.update("count", &mut count).map_err(Failure::Config)?;
    s.update("size", &mut size).map_err(Failure::Config)?;
    s.update("density_min", &mut dmin).map_err(Failure::Config)?;
    s.update("density_max", &mut dmax).map_err(Failure::Config)?;
    s.finish().map_err(Failure::Config)?;
    let written = gen_env_suite(&args.out, count, size, dmin, dmax, args.seed)?;
    info!("wrote {} environments to {}", written.len(), args.out.display());
    Ok(())
}

fn train_config(args: &TrainArgs) -> Result<TrainConfig, Failure> {
    let mut s = settings(&args.config)?;
    s.flag("episodes", args.episodes);
    s.flag("team_size", args.team_size);
    let mut c = TrainConfig {
        seed: args.seed,
        ..TrainConfig::default()
    };
    let mut checkpoint_every = 0usize;
    (|| -> Result<(), String> {
        s.update("team_size", &mut c.team_size)?;
        s.update("width", &mut c.width)?;
        s.update("height", &mut c.height)?;
        s.update("density_min", &mut c.density_min)?;
        s.update("density_max", &mut c.density_max)?;
        s.update("episodes", &mut c.episodes)?;
        s.update("batch_size", &mut c.batch_size)?;
        s.update("seq_len", &mut c.seq_len)?;
        s.update("gamma", &mut c.gamma)?;
        s.update("epsilon_start", &mut c.epsilon_start)?;
        s.update("epsilon_end", &mut c.epsilon_end)?;
        s.update("epsilon_decay_fraction", &mut c.epsilon_decay_fraction)?;
        s.update("learning_rate", &mut c.learning_rate)?;
        s.update("target_sync", &mut c.target_sync)?;
        s.update("step_cap", &mut c.step_cap)?;
        s.update("replay_capacity", &mut c.replay_capacity)?;
        s.update("updates_per_episode", &mut c.updates_per_episode)?;
        s.update("reward_scale", &mut c.reward_scale)?;
        s.update("grad_clip", &mut c.grad_clip)?;
        s.update("csp", &mut c.csp)?;
        s.update("checkpoint_every", &mut checkpoint_every)?;
        Ok(())
    })()
    .map_err(Failure::Config)?;
    s.finish().map_err(Failure::Config)?;
    if checkpoint_every > 0 {
        c.checkpoint_every = checkpoint_every;
        c.checkpoint_dir = Some(args.out.join("checkpoints"));
    }
    c.validate()?;
    Ok(c)
}

fn run_training(args: TrainArgs, centralized: bool) -> Result<(), Failure> {
    let config = train_config(&args)?;
    info!(
        "training {} episodes on {}x{} with {} robots",
        config.episodes, config.width, config.height, config.team_size
    );
    let trained = if centralized {
        train(&config)?
    } else {
        train_decentralized_only(&config)?
    };
    let written = trained.save(&args.out)?;
    let log_path = args.out.join("training_log.csv");
    write_training_log(&log_path, &trained.log)?;
    info!(
        "{} updates; wrote {} weight files and {}",
        trained.updates,
        written.len(),
        log_path.display()
    );
    Ok(())
}

fn eval_config(args: &EvalArgs) -> Result<EvalConfig, Failure> {
    let mut s = settings(&args.config)?;
    s.flag("methods", args.methods.clone());
    s.flag("csps", args.csps.clone());
    s.flag("threads", args.threads);
    s.flag("made_net_weights", args.made_net.as_ref().map(|p| p.display().to_string()));
    s.flag("made_net_dt_weights", args.made_net_dt.as_ref().map(|p| p.display().to_string()));
    if args.wall_clock {
        s.flag("wall_clock", Some(true));
    }
    let mut c = EvalConfig {
        suite_dir: args.suite.clone(),
        out_dir: args.out.clone(),
        seed: args.seed,
        ..EvalConfig::default()
    };
    (|| -> Result<(), String> {
        c.made_net_weights = s.take("made_net_weights")?;
        c.made_net_dt_weights = s.take("made_net_dt_weights")?;
        c.methods = match s.take_list::<Method>("methods")? {
            Some(m) => m,
            None => Method::ALL
                .into_iter()
                .filter(|m| match m {
                    Method::MadeNet => c.made_net_weights.is_some(),
                    Method::MadeNetDt => c.made_net_dt_weights.is_some(),
                    _ => true,
                })
                .collect(),
        };
        if let Some(csps) = s.take_list("csps")? {
            c.csps = csps;
        }
        if let Some(corners) = s.take_list("corners")? {
            c.corners = corners;
        }
        s.update("team_size", &mut c.team_size)?;
        s.update("step_cap", &mut c.step_cap)?;
        s.update("threads", &mut c.threads)?;
        s.update("wall_clock", &mut c.wall_clock)?;
        s.update("ub_distance_weight", &mut c.ub.distance_weight)?;
        s.update("ub_coordination_penalty", &mut c.ub.coordination_penalty)?;
        s.update("pb_discount", &mut c.pb.discount)?;
        s.update("pb_tolerance", &mut c.pb.tolerance)?;
        s.update("pb_max_sweeps", &mut c.pb.max_sweeps)?;
        Ok(())
    })()
    .map_err(Failure::Config)?;
    s.finish().map_err(Failure::Config)?;
    c.validate()?;
    Ok(c)
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let config = eval_config(&args)?;
    // Inputs are checked before any trial runs.
    let setup = |e: HarnessError| Failure::Config(e.to_string());
    let envs = load_env_suite(&config.suite_dir).map_err(setup)?;
    let policies = config
        .methods
        .iter()
        .map(|&m| Policy::for_method(m, &config).map(|p| (m, p)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(setup)?;
    info!(
        "{} environments, {} methods, {} corners, {} csps",
        envs.len(),
        policies.len(),
        config.corners.len(),
        config.csps.len()
    );
    let (records, timing) = run_trials_in_memory(&envs, &policies, &config)?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Failure::Runtime(format!("{}: {e}", config.out_dir.display())))?;
    write_trials_csv(&config.out_dir.join(files::TRIALS), &records)?;
    write_series_csv(&config.out_dir.join(files::SERIES), &records)?;
    write_timing_csv(&config.out_dir.join(files::TIMING), &timing)?;
    info!("wrote {} records to {}", records.len(), config.out_dir.display());
    Ok(())
}

fn out_dir(args: &DirArgs) -> &Path {
    args.out.as_deref().unwrap_or(&args.input)
}

fn summarize_cmd(args: DirArgs) -> Result<(), Failure> {
    let mut records = read_trials_csv(&args.input.join(files::TRIALS))?;
    let series = args.input.join(files::SERIES);
    if series.exists() {
        read_series_csv(&series, &mut records)?;
    } else {
        log::warn!("{} not found; curves will be empty", series.display());
    }
    let (summary, curves) = summarize(&records);
    let out = out_dir(&args);
    std::fs::create_dir_all(out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    write_summary_csv(&out.join(files::SUMMARY), &summary)?;
    write_curves_csv(&out.join(files::CURVES), &curves)?;
    info!("{} summary rows, {} curve rows", summary.len(), curves.len());
    Ok(())
}

fn plot_cmd(args: DirArgs) -> Result<(), Failure> {
    let summary = read_summary_csv(&args.input.join(files::SUMMARY))?;
    let curves_path = args.input.join(files::CURVES);
    let curves = if curves_path.exists() {
        read_curves_csv(&curves_path)?
    } else {
        Vec::new()
    };
    if curves.is_empty() {
        info!("no curve data; coverage charts skipped");
    }
    let written = emit_plots(out_dir(&args), &summary, &curves)?;
    for p in &written {
        info!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::GenEnvs(a) => gen_envs(a),
        Command::Train(a) => run_training(a, true),
        Command::TrainDt(a) => run_training(a, false),
        Command::Eval(a) => eval(a),
        Command::Summarize(a) => summarize_cmd(a),
        Command::Plot(a) => plot_cmd(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
