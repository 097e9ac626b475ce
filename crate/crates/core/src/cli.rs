//! Experiment runner behind the `fsdgpm` binary.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::checkpoint::{self, Checkpoint};
use crate::data::{find_mnist, make_permuted_stream, make_synthetic_stream, TaskStream};
use crate::error::{Error, Result};
use crate::landscape::{alpha_grid, scan_all, write_csv};
use crate::metrics::{mean_std, AccuracyMatrix};
use crate::nn::HeadMode;
use crate::numerics::{derive_seed, Rng};
use crate::trainers::{train_stream, Event, Method, TrainerConfig};

pub const RESULTS_SCHEMA: &str = "fsdgpm-results-v1";
pub const SUMMARY_SCHEMA: &str = "fsdgpm-summary-v1";
pub const DATA_DIR_ENV: &str = "FSDGPM_DATA_DIR";
pub const DEFAULT_DATA_DIR: &str = "data/mnist";

const LANDSCAPE_STREAM: u64 = 0x4c41_4e44;
const MNIST_TEST_ROWS: usize = 10_000;
const MNIST_CLASSES: usize = 10;

#[derive(Debug, Parser)]
#[command(
    name = "fsdgpm",
    version,
    about = "Continual learning with flattened-sharpness gradient projection"
)]
pub struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a method on a task stream and write results JSON.
    Train(RunArgs),
    /// Scan the loss landscape of a checkpoint.
    Landscape(LandscapeArgs),
    /// Summarize results files as mean ± std per method.
    Report(ReportArgs),
}

#[derive(Debug, Default, Clone, Args)]
pub struct RunArgs {
    /// key=value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<String>,
    /// pmnist or synthetic.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub tasks: Option<usize>,
    #[arg(long)]
    pub train_per_task: Option<usize>,
    #[arg(long)]
    pub test_per_task: Option<usize>,
    #[arg(long = "seed")]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub glances: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub fs_lr: Option<f64>,
    #[arg(long)]
    pub lambda_lr: Option<f64>,
    #[arg(long)]
    pub fs_steps: Option<usize>,
    #[arg(long)]
    pub mem_size: Option<usize>,
    #[arg(long)]
    pub ns: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub eps_inc: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub alpha_steps: Option<usize>,
    #[arg(long)]
    pub directions: Option<usize>,
    /// Hidden widths, comma separated.
    #[arg(long)]
    pub hidden: Option<String>,
    /// single or multi.
    #[arg(long)]
    pub heads: Option<String>,
    #[arg(long)]
    pub synthetic_dims: Option<usize>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fail instead of falling back to synthetic data.
    #[arg(long)]
    pub strict_data: bool,
    /// Write a checkpoint after every task.
    #[arg(long)]
    pub checkpoints: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LandscapeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Overrides the task count parsed from the checkpoint name.
    #[arg(long)]
    pub tasks_seen: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(required = true)]
    pub results: Vec<PathBuf>,
    /// Directory for summary.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Pmnist,
    Synthetic,
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pmnist" => Ok(DatasetKind::Pmnist),
            "synthetic" => Ok(DatasetKind::Synthetic),
            _ => Err(Error::Usage(format!(
                "unknown dataset '{s}' (expected pmnist or synthetic)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    Single,
    Multi,
}

impl FromStr for HeadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(HeadKind::Single),
            "multi" => Ok(HeadKind::Multi),
            _ => Err(Error::Usage(format!(
                "unknown head mode '{s}' (expected single or multi)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub trainer: TrainerConfig,
    pub dataset: DatasetKind,
    pub task_count: usize,
    pub train_per_task: usize,
    /// `None` takes every test row up to the standard 10000.
    pub test_per_task: Option<usize>,
    pub hidden: Vec<usize>,
    pub heads: HeadKind,
    pub synthetic_dims: usize,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seeds: Vec<u64>,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_steps: usize,
    pub directions: usize,
    pub strict_data: bool,
    pub checkpoints: bool,
}

impl RunConfig {
    /// Permuted-MNIST defaults for `method`.
    pub fn pmnist(method: Method) -> Self {
        RunConfig {
            trainer: TrainerConfig::pmnist(method),
            dataset: DatasetKind::Pmnist,
            task_count: 20,
            train_per_task: 1000,
            test_per_task: None,
            hidden: vec![100, 100],
            heads: HeadKind::Single,
            synthetic_dims: 64,
            data_dir: PathBuf::from(DEFAULT_DATA_DIR),
            out_dir: PathBuf::from("results"),
            seeds: vec![0],
            alpha_min: -1.0,
            alpha_max: 1.0,
            alpha_steps: 25,
            directions: 10,
            strict_data: false,
            checkpoints: false,
        }
    }

    pub fn head_mode(&self) -> HeadMode {
        match self.heads {
            HeadKind::Single => HeadMode::Single,
            HeadKind::Multi => HeadMode::Multi {
                task_count: self.task_count,
                classes_per_task: MNIST_CLASSES,
            },
        }
    }

    pub fn layer_dims(&self, input_dim: usize) -> Vec<usize> {
        let out = match self.heads {
            HeadKind::Single => MNIST_CLASSES,
            HeadKind::Multi => MNIST_CLASSES * self.task_count,
        };
        let mut dims = vec![input_dim];
        dims.extend(&self.hidden);
        dims.push(out);
        dims
    }

    pub fn validate(&self) -> Result<()> {
        self.trainer.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Usage("at least one seed is required".into()));
        }
        if self.task_count == 0 || self.train_per_task == 0 {
            return Err(Error::Usage("tasks and train-per-task must be positive".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Usage("hidden widths must be positive".into()));
        }
        alpha_grid(self.alpha_min, self.alpha_max, self.alpha_steps)?;
        Ok(())
    }
}

/// Parsed `key=value` lines; `#` starts a comment, keys ignore `-`/`_`.
#[derive(Debug, Default)]
pub struct ConfigFile {
    path: String,
    entries: HashMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::format(path, "line", format!("line {} is not key=value", n + 1)))?;
            entries.insert(normalize_key(k), v.trim().to_string());
        }
        Ok(ConfigFile {
            path: path.display().to_string(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ConfigFile::parse(&text, path)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize_key(key)).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Usage(format!("{}: invalid value '{v}' for {key}", self.path))),
        }
    }

    fn get_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        match self.raw(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Usage(format!("{}: invalid list entry '{s}' for {key}", self.path)))
                })
                .collect(),
        }
    }
}

fn pick<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

fn parse_usage<T: FromStr<Err = Error>>(value: &str) -> Result<T> {
    value.parse()
}

fn parse_hidden(s: &str) -> Result<Vec<usize>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|w| {
            w.trim()
                .parse()
                .map_err(|_| Error::Usage(format!("invalid hidden width '{w}'")))
        })
        .collect()
}

/// Layers flags over the config file over method defaults. `env_data_dir`
/// is used when neither names a data directory.
pub fn resolve(args: &RunArgs, env_data_dir: Option<PathBuf>) -> Result<RunConfig> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let method_name = pick(args.method.clone(), &file, "method")?.unwrap_or_else(|| "fsdgpm".into());
    let method: Method = method_name.parse()?;
    let mut cfg = RunConfig::pmnist(method);

    if let Some(d) = pick(args.dataset.clone(), &file, "dataset")? {
        cfg.dataset = parse_usage(&d)?;
    }
    if let Some(h) = pick(args.heads.clone(), &file, "heads")? {
        cfg.heads = parse_usage(&h)?;
    }
    if let Some(h) = pick(args.hidden.clone(), &file, "hidden")? {
        cfg.hidden = parse_hidden(&h)?;
    }
    macro_rules! set {
        ($field:expr, $flag:expr, $key:literal) => {
            if let Some(v) = pick($flag, &file, $key)? {
                $field = v;
            }
        };
    }
    set!(cfg.task_count, args.tasks, "tasks");
    set!(cfg.train_per_task, args.train_per_task, "train_per_task");
    cfg.test_per_task = pick(args.test_per_task, &file, "test_per_task")?;
    set!(cfg.synthetic_dims, args.synthetic_dims, "synthetic_dims");
    set!(cfg.trainer.epochs, args.epochs, "epochs");
    set!(cfg.trainer.batch_size, args.batch_size, "batch_size");
    set!(cfg.trainer.glances, args.glances, "glances");
    set!(cfg.trainer.lr, args.lr, "lr");
    set!(cfg.trainer.fs_lr, args.fs_lr, "fs_lr");
    set!(cfg.trainer.lambda_lr, args.lambda_lr, "lambda_lr");
    set!(cfg.trainer.fs_steps, args.fs_steps, "fs_steps");
    set!(cfg.trainer.mem_capacity, args.mem_size, "mem_size");
    set!(cfg.trainer.n_s, args.ns, "ns");
    set!(cfg.trainer.eps, args.eps, "eps");
    set!(cfg.trainer.eps_increment, args.eps_inc, "eps_inc");
    set!(cfg.alpha_min, args.alpha_min, "alpha_min");
    set!(cfg.alpha_max, args.alpha_max, "alpha_max");
    set!(cfg.alpha_steps, args.alpha_steps, "alpha_steps");
    set!(cfg.directions, args.directions, "directions");
    set!(cfg.out_dir, args.out.clone(), "out");

    cfg.data_dir = match pick(args.data_dir.clone(), &file, "data_dir")? {
        Some(d) => d,
        None => env_data_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR)),
    };
    cfg.seeds = if args.seeds.is_empty() {
        file.get_list("seed")?
    } else {
        args.seeds.clone()
    };
    if cfg.seeds.is_empty() {
        cfg.seeds = vec![0];
    }
    cfg.strict_data = args.strict_data || file.get::<bool>("strict_data")?.unwrap_or(false);
    cfg.checkpoints = args.checkpoints || file.get::<bool>("checkpoints")?.unwrap_or(false);
    cfg.validate()?;
    Ok(cfg)
}

/// Builds the task stream for `seed`, falling back to synthetic data when
/// MNIST is missing and fallback is allowed.
pub fn load_stream(cfg: &RunConfig, seed: u64) -> Result<TaskStream> {
    let synthetic = || {
        make_synthetic_stream(
            cfg.task_count,
            cfg.synthetic_dims,
            MNIST_CLASSES,
            cfg.train_per_task,
            seed,
        )
    };
    match cfg.dataset {
        DatasetKind::Synthetic => synthetic(),
        DatasetKind::Pmnist => match find_mnist(&cfg.data_dir) {
            Some(paths) => {
                let (train, test) = paths.load()?;
                let test_rows = cfg.test_per_task.unwrap_or(test.len().min(MNIST_TEST_ROWS));
                make_permuted_stream(&train, &test, cfg.task_count, cfg.train_per_task, test_rows, seed)
            }
            None if cfg.strict_data => Err(Error::io(
                &cfg.data_dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "MNIST IDX files not found"),
            )),
            None => {
                warn!(
                    "MNIST not found in {}; using a synthetic {}-dim stream instead",
                    cfg.data_dir.display(),
                    cfg.synthetic_dims
                );
                synthetic()
            }
        },
    }
}

/// One seeded run as written to disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema: String,
    pub method: String,
    pub seed: u64,
    pub dataset: String,
    pub config: RunConfig,
    pub accuracy_matrix: Vec<Vec<Option<f64>>>,
    pub acc: f64,
    pub bwt: Option<f64>,
    pub task_wallclock_secs: Vec<f64>,
    pub final_buffer_size: usize,
    pub rank_history: Vec<Vec<usize>>,
    pub mean_lambda_history: Vec<Option<f64>>,
}

impl RunResult {
    pub fn matrix(&self) -> Result<AccuracyMatrix> {
        let t = self.accuracy_matrix.len();
        let mut m = AccuracyMatrix::new(t);
        for (i, row) in self.accuracy_matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    m.set(i, j, *v)?;
                }
            }
        }
        Ok(m)
    }
}

pub fn results_file_name(method: Method, seed: u64) -> String {
    format!("results_{method}_seed{seed}.json")
}

/// Trains every seed and writes one results JSON per seed into `out_dir`.
pub fn run_train(cfg: &RunConfig) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let method = cfg.trainer.method;
    let mut results = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let stream = load_stream(cfg, seed)?;
        let trainer_cfg = cfg.trainer.clone().with_seed(seed);
        let ckpt_dir = cfg.out_dir.join("checkpoints");
        let mut observer = |event: Event<'_>| -> Result<()> {
            if let Event::TaskFinished { task, trainer } = event {
                if cfg.checkpoints {
                    let path = ckpt_dir.join(checkpoint::file_name(method.name(), seed, task));
                    Checkpoint::from_parts(trainer.network(), trainer.memory()).write(&path)?;
                }
            }
            Ok(())
        };
        let outcome = train_stream(
            &trainer_cfg,
            &stream,
            &cfg.layer_dims(stream.input_dim),
            cfg.head_mode(),
            &mut observer,
        )?;
        let acc = outcome.matrix.acc()?;
        let bwt = outcome.matrix.bwt().ok();
        let mut echo = cfg.clone();
        echo.seeds = vec![seed];
        echo.trainer.seed = seed;
        let result = RunResult {
            schema: RESULTS_SCHEMA.into(),
            method: method.name().into(),
            seed,
            dataset: dataset_label(cfg, &stream),
            config: echo,
            accuracy_matrix: outcome.matrix.rows().to_vec(),
            acc,
            bwt,
            task_wallclock_secs: outcome.history.iter().map(|h| h.wallclock_secs).collect(),
            final_buffer_size: outcome.trainer.buffer().len(),
            rank_history: outcome.history.iter().map(|h| h.ranks.clone()).collect(),
            mean_lambda_history: outcome.history.iter().map(|h| h.mean_lambda).collect(),
        };
        let path = cfg.out_dir.join(results_file_name(method, seed));
        write_json(&path, &result)?;
        info!(
            "{method} seed {seed}: ACC {:.2} BWT {} -> {}",
            acc * 100.0,
            bwt.map_or("-".into(), |b| format!("{:.2}", b * 100.0)),
            path.display()
        );
        results.push(result);
    }
    Ok(results)
}

fn dataset_label(cfg: &RunConfig, stream: &TaskStream) -> String {
    match cfg.dataset {
        DatasetKind::Pmnist if stream.tasks.first().is_some_and(|t| t.permutation.is_some()) => "pmnist".into(),
        _ => "synthetic".into(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Scans a checkpoint and writes `<out_dir>/<checkpoint stem>.landscape.csv`.
pub fn run_landscape(cfg: &RunConfig, checkpoint_path: &Path, tasks_seen: Option<usize>) -> Result<PathBuf> {
    let ck = Checkpoint::read(checkpoint_path)?;
    let parsed = checkpoint::parse_file_name(checkpoint_path);
    let tasks_seen = tasks_seen.or(parsed.as_ref().map(|p| p.2 + 1)).ok_or_else(|| {
        Error::Usage(format!(
            "cannot infer tasks seen from {}; pass --tasks-seen",
            checkpoint_path.display()
        ))
    })?;
    let seed = parsed.as_ref().map_or(cfg.seeds[0], |p| p.1);
    let method = parsed
        .as_ref()
        .map_or(cfg.trainer.method.name().to_string(), |p| p.0.clone());
    let stream = load_stream(cfg, seed)?;
    if tasks_seen > stream.len() {
        return Err(Error::Usage(format!(
            "checkpoint covers {tasks_seen} tasks but the stream has {}",
            stream.len()
        )));
    }
    let net = ck.network(cfg.head_mode())?;
    if net.input_dim() != stream.input_dim {
        return Err(Error::format(
            checkpoint_path,
            "cols",
            format!(
                "network takes {} inputs, stream has {}",
                net.input_dim(),
                stream.input_dim
            ),
        ));
    }
    let grid = alpha_grid(cfg.alpha_min, cfg.alpha_max, cfg.alpha_steps)?;
    let mut rng = Rng::new(derive_seed(seed, LANDSCAPE_STREAM));
    let profiles = scan_all(&net, &stream.tasks, tasks_seen, cfg.directions, &grid, &mut rng)?;

    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let stem = checkpoint_path
        .file_stem()
        .map_or("checkpoint".into(), |s| s.to_string_lossy().into_owned());
    let out = cfg.out_dir.join(format!("{stem}.landscape.csv"));
    let file = fs::File::create(&out).map_err(|e| Error::io(&out, e))?;
    write_csv(BufWriter::new(file), &method, &profiles).map_err(|e| Error::io(&out, e))?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub runs: usize,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub bwt_mean: Option<f64>,
    pub bwt_std: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    /// Fixed-width table in percent, `mean ± std`.
    pub fn table(&self) -> String {
        let mut out = format!("{:<12} {:>4} {:>16} {:>16}\n", "method", "runs", "ACC (%)", "BWT (%)");
        for r in &self.rows {
            let bwt = match (r.bwt_mean, r.bwt_std) {
                (Some(m), Some(s)) => format!("{m:.2} ± {s:.2}"),
                _ => "-".into(),
            };
            let acc = format!("{:.2} ± {:.2}", r.acc_mean, r.acc_std);
            out.push_str(&format!("{:<12} {:>4} {:>16} {:>16}\n", r.method, r.runs, acc, bwt));
        }
        out
    }
}

pub fn read_result(path: &Path) -> Result<RunResult> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::format(path, "json", e.to_string()))?;
    match value.get("schema").and_then(|s| s.as_str()) {
        Some(RESULTS_SCHEMA) => {}
        Some(other) => return Err(Error::format(path, "schema", format!("unsupported schema '{other}'"))),
        None => return Err(Error::format(path, "schema", "missing schema field")),
    }
    serde_json::from_value(value).map_err(|e| Error::format(path, "results", e.to_string()))
}

/// Per-method mean ± sample std of ACC and BWT, in percent.
pub fn summarize(results: &[RunResult]) -> Summary {
    let mut groups: BTreeMap<&str, Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        groups.entry(&r.method).or_default().push(r);
    }
    let rows = groups
        .into_iter()
        .map(|(method, runs)| {
            let accs: Vec<f64> = runs.iter().map(|r| r.acc * 100.0).collect();
            let bwts: Vec<f64> = runs.iter().filter_map(|r| r.bwt.map(|b| b * 100.0)).collect();
            let (acc_mean, acc_std) = mean_std(&accs).unwrap_or((f64::NAN, f64::NAN));
            let bwt = if bwts.len() == runs.len() {
                mean_std(&bwts)
            } else {
                None
            };
            SummaryRow {
                method: method.to_string(),
                runs: runs.len(),
                acc_mean,
                acc_std,
                bwt_mean: bwt.map(|b| b.0),
                bwt_std: bwt.map(|b| b.1),
            }
        })
        .collect();
    Summary {
        schema: SUMMARY_SCHEMA.into(),
        rows,
    }
}

/// Reads `paths`, prints the table and writes `summary.json` into `out_dir`.
pub fn run_report(paths: &[PathBuf], out_dir: &Path) -> Result<Summary> {
    let results = paths.iter().map(|p| read_result(p)).collect::<Result<Vec<_>>>()?;
    let summary = summarize(&results);
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn env_data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// Executes a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let cfg = resolve(&args, env_data_dir())?;
            for r in run_train(&cfg)? {
                println!(
                    "{} seed {}: ACC {:.2} BWT {}",
                    r.method,
                    r.seed,
                    r.acc * 100.0,
                    r.bwt.map_or("-".into(), |b| format!("{:.2}", b * 100.0))
                );
            }
            Ok(())
        }
        Command::Landscape(args) => {
            let cfg = resolve(&args.run, env_data_dir())?;
            let out = run_landscape(&cfg, &args.checkpoint, args.tasks_seen)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Report(args) => {
            let out = args.out.unwrap_or_else(|| PathBuf::from("."));
            let summary = run_report(&args.results, &out)?;
            print!("{}", summary.table());
            Ok(())
        }
    }
}
