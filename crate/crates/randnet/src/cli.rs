//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 for usage and validation errors, 2 for file
//! errors. Every command writes its result to `--out`.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use randnet_core::crossval::{run_cv, train_elm, CvConfig, Topology};
use randnet_core::rng::WeightDistribution;
use randnet_core::simulation::{run_mspe_distribution_experiment, SimConfig};
use randnet_core::training::Role;
use randnet_core::twostage::{run_two_stage, TwoStageConfig};
use randnet_core::vipv::{run_vipv_pipeline, Side, VipvConfig};

use crate::config::{config_args, find_config, parse_config};
use crate::dataset::{csv_io, read_dataset, read_inputs};
use crate::error::{CliError, Result};
use crate::json;
use crate::model_file::{parse_activation, read_model, write_model};
use crate::report::{write_simulation, write_vipv_table, CvReport, IntervalReport, VipvOutput};
use crate::sensor_log::load_sensor_log;

#[derive(Debug, Parser)]
#[command(
    name = "randnet",
    version,
    about = "Randomized neural networks with cross-validation over weight draws"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one weight draw on a training set and save the model.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Train(TrainArgs),
    /// Predict with a saved model.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Predict(PredictArgs),
    /// Select the best of J weight draws on a validation set.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Cv(CvArgs),
    /// Fixed-width confidence interval for the mean validation error.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Interval(IntervalArgs),
    /// Error distribution over weight draws on synthetic data, per width.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Side-sensor irradiance prediction from vehicle sensor logs.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Vipv(VipvArgs),
}

#[derive(Debug, Args)]
pub struct Runtime {
    /// Flat `key = value` file of flag values; explicit flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Seed {
    /// Master seed of the random streams.
    #[arg(long, env = "RANDNET_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct Network {
    /// Hidden widths, comma separated for several layers.
    #[arg(long, value_parser = parse_widths, default_value = "10")]
    pub hidden: ::std::vec::Vec<usize>,
    /// sigmoid, relu, leaky_relu or leaky_relu:<slope>.
    #[arg(long, default_value = "sigmoid")]
    pub activation: String,
    /// Ridge parameter; 0 gives least squares.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_name = "CSV")]
    pub train: PathBuf,
    #[command(flatten)]
    pub network: Network,
    /// Index of the weight draw, counted from 0.
    #[arg(long, default_value_t = 0)]
    pub draw: usize,
    #[command(flatten)]
    pub seed: Seed,
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
    #[command(flatten)]
    pub runtime: Runtime,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "JSON")]
    pub model: PathBuf,
    /// Inputs, optionally followed by a target column that is ignored.
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    #[command(flatten)]
    pub runtime: Runtime,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long, value_name = "CSV")]
    pub train: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub val: PathBuf,
    #[command(flatten)]
    pub network: Network,
    /// Number of weight draws.
    #[arg(long = "J", default_value_t = 100)]
    pub draws: usize,
    #[command(flatten)]
    pub seed: Seed,
    /// Selected model.
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
    /// Errors of all draws and their summary.
    #[arg(long, value_name = "JSON")]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub runtime: Runtime,
}

#[derive(Debug, Args)]
pub struct IntervalArgs {
    #[arg(long, value_name = "CSV")]
    pub train: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub val: PathBuf,
    #[command(flatten)]
    pub network: Network,
    /// Half-width of the interval.
    #[arg(long)]
    pub d: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Minimal first-stage number of draws.
    #[arg(long = "min-j0", default_value_t = 10)]
    pub min_j0: usize,
    /// Pilot draws for the first variance estimate.
    #[arg(long, default_value_t = 3)]
    pub pilot: usize,
    /// Largest admissible number of draws.
    #[arg(long = "max-draws", default_value_t = 1_000_000)]
    pub max_draws: usize,
    #[command(flatten)]
    pub seed: Seed,
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
    #[command(flatten)]
    pub runtime: Runtime,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub nv: usize,
    #[arg(long, default_value_t = 5)]
    pub q: usize,
    /// Widths as a list of values and inclusive ranges, e.g. 2:10,15,20.
    #[arg(long, value_parser = parse_grid, default_value = "2:10,15,20")]
    pub h: ::std::vec::Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    #[arg(long = "noise-sd", default_value_t = 1.0)]
    pub noise_sd: f64,
    /// Hidden width of the generating network.
    #[arg(long = "generator-width", default_value_t = 10)]
    pub generator_width: usize,
    #[command(flatten)]
    pub seed: Seed,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    #[command(flatten)]
    pub runtime: Runtime,
}

#[derive(Debug, Args)]
pub struct VipvArgs {
    #[arg(long, value_name = "CSV")]
    pub train: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub test: PathBuf,
    /// 1-based inclusive rows a:b of the test log used for validation.
    #[arg(long = "val-window", value_parser = parse_window)]
    pub val_window: Option<(usize, usize)>,
    /// Hidden widths, comma separated for several layers.
    #[arg(long, value_parser = parse_widths, default_value = "4")]
    pub hidden: ::std::vec::Vec<usize>,
    #[arg(long, default_value = "sigmoid")]
    pub activation: String,
    #[arg(long, default_value_t = 0.2)]
    pub lambda: f64,
    #[arg(long = "J", default_value_t = 100)]
    pub draws: usize,
    /// Share of training rows dropped as target extremes.
    #[arg(long, default_value_t = 0.05)]
    pub trim: f64,
    /// left, right or back.
    #[arg(long, default_value = "left")]
    pub side: String,
    #[command(flatten)]
    pub seed: Seed,
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
    /// Method table; defaults to the report path with a .csv extension.
    #[arg(long, value_name = "CSV")]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub runtime: Runtime,
}

fn parse_widths(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|w| match w.trim().parse::<usize>() {
            Ok(0) => Err("widths must be ≥ 1".to_string()),
            Ok(v) => Ok(v),
            Err(_) => Err(format!("{w:?} is not a width")),
        })
        .collect()
}

fn parse_grid(s: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let num = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("{v:?} is not a width"));
        match item.split_once(':') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty range {item}"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(item)?),
        }
    }
    Ok(out)
}

fn parse_window(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected a:b")?;
    let a: usize = a.trim().parse().map_err(|_| format!("{a:?} is not a row number"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("{b:?} is not a row number"))?;
    if a == 0 || b < a {
        return Err(format!("expected 1 ≤ a ≤ b, got {a}:{b}"));
    }
    Ok((a, b))
}

impl Command {
    fn runtime(&self) -> &Runtime {
        match self {
            Command::Train(a) => &a.runtime,
            Command::Predict(a) => &a.runtime,
            Command::Cv(a) => &a.runtime,
            Command::Interval(a) => &a.runtime,
            Command::Simulate(a) => &a.runtime,
            Command::Vipv(a) => &a.runtime,
        }
    }
}

fn cv_config(network: &Network, draws: usize, seed: u64) -> Result<CvConfig> {
    let cfg = CvConfig {
        draws,
        topology: Topology {
            widths: network.hidden.clone(),
            activation: parse_activation(&network.activation)?,
        },
        weight_dist: WeightDistribution::default(),
        lambda: network.lambda,
        seed,
    };
    cfg.validate_model()?;
    Ok(cfg)
}

fn train(a: &TrainArgs) -> Result<()> {
    let cfg = cv_config(&a.network, 1, a.seed.seed)?;
    let data = read_dataset(&a.train, Role::Training)?;
    let model = train_elm(&data, &cfg, a.draw)?;
    write_model(&a.out, &model)
}

fn predict(a: &PredictArgs) -> Result<()> {
    let model = read_model(&a.model)?;
    let inputs = read_inputs(&a.input, model.net.input_dim())?;
    let pred = model.predict(&inputs)?;
    let mut w = csv::Writer::from_path(&a.out).map_err(|e| csv_io(&a.out, e))?;
    w.write_record(["prediction"]).map_err(|e| csv_io(&a.out, e))?;
    for v in pred.as_slice() {
        w.write_record([v.to_string()]).map_err(|e| csv_io(&a.out, e))?;
    }
    w.flush().map_err(|e| CliError::io(&a.out, e))
}

fn cv(a: &CvArgs) -> Result<()> {
    let cfg = cv_config(&a.network, a.draws, a.seed.seed)?;
    cfg.validate()?;
    let training = read_dataset(&a.train, Role::Training)?;
    let validation = read_dataset(&a.val, Role::Validation)?;
    let r = run_cv(&training, &validation, &cfg)?;
    write_model(&a.out, &r.selected)?;
    if let Some(path) = &a.report {
        json::write(path, &CvReport::new(r.z, r.best, r.mean_mspe, cfg.seed)?)?;
    }
    Ok(())
}

fn interval(a: &IntervalArgs) -> Result<()> {
    let cv = cv_config(&a.network, 1, a.seed.seed)?;
    let ts = TwoStageConfig {
        half_width: a.d,
        alpha: a.alpha,
        min_initial: a.min_j0,
        pilot: a.pilot,
        max_draws: a.max_draws,
    };
    ts.validate()?;
    let training = read_dataset(&a.train, Role::Training)?;
    let validation = read_dataset(&a.val, Role::Validation)?;
    let r = run_two_stage(&training, &validation, &cv, &ts)?;
    json::write(&a.out, &IntervalReport::new(r, a.d, a.alpha, cv.seed))
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = SimConfig {
        n: a.n,
        n_val: a.nv,
        q: a.q,
        h_grid: a.h.clone(),
        runs: a.runs,
        noise_sd: a.noise_sd,
        seed: a.seed.seed,
        generator_width: a.generator_width,
    };
    cfg.validate()?;
    let rows = run_mspe_distribution_experiment(&cfg)?;
    write_simulation(&a.out, &rows)
}

fn vipv(a: &VipvArgs) -> Result<()> {
    let network = Network {
        hidden: a.hidden.clone(),
        activation: a.activation.clone(),
        lambda: a.lambda,
    };
    let cfg = VipvConfig {
        cv: cv_config(&network, a.draws, a.seed.seed)?,
        trim_fraction: a.trim,
        side: a.side.parse::<Side>()?,
        val_window: a.val_window,
    };
    cfg.validate()?;
    let train = load_sensor_log(&a.train)?;
    let test = load_sensor_log(&a.test)?;
    let report = run_vipv_pipeline(&train.records, &test.records, &cfg)?;
    let out = VipvOutput::new(report, cfg.cv.seed, train.dropped, test.dropped);
    json::write(&a.out, &out)?;
    let table = a.table.clone().unwrap_or_else(|| a.out.with_extension("csv"));
    write_vipv_table(&table, &out)
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Cv(a) => cv(a),
        Command::Interval(a) => interval(a),
        Command::Simulate(a) => simulate(a),
        Command::Vipv(a) => vipv(a),
    }
}

/// Inserts the entries of a `--config` file right after the subcommand name.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = find_config(&args) else {
        return Ok(args);
    };
    let Some(pos) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 1)
    else {
        return Ok(args);
    };
    let name = args[pos].to_string_lossy().into_owned();
    let root = Cli::command();
    let Some(sub) = root.find_subcommand(&name) else {
        return Ok(args);
    };
    let valid: Vec<&str> = sub.get_arguments().filter_map(|a| a.get_long()).collect();
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let injected = config_args(&path, &parse_config(&path, &text)?, &valid)?;
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn parse(args: Vec<OsString>) -> std::result::Result<Cli, ExitCode> {
    let args = expand_config(args).map_err(report)?;
    let matches = Cli::command().try_get_matches_from(args).map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    })?;
    Cli::from_arg_matches(&matches).map_err(|e| {
        let _ = e.print();
        ExitCode::from(1)
    })
}

fn report(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}

fn run_with_threads(command: &Command) -> Result<()> {
    match command.runtime().threads {
        None => dispatch(command),
        Some(0) => Err(CliError::invalid("threads", "must be ≥ 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::invalid("threads", e.to_string()))?
            .install(|| dispatch(command)),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cli = match parse(args.into_iter().map(Into::into).collect()) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    match run_with_threads(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}
