//! Command-line interface.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mobiuse_core::ring::zero_points;
use mobiuse_core::{
    bern_stats, BernSampler, FilterIndex, Geometry, MetricReport, ModelState, NormKind, RingSpec, Split, SurfaceParams, TrainConfig,
    Trainer, TripleStore,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checkpoint;
use crate::dataset::{load_dir, stats_table, write_dir, LoadMode};
use crate::error::{Error, Result};
use crate::mesh::{self, Surface};
use crate::parallel;
use crate::report;
use crate::synthetic::{translation_graph, SyntheticConfig};

#[derive(Debug, Parser)]
#[command(name = "mobiuse", version, about = "Knowledge graph embeddings on Möbius rings, tori and R^n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset split.
    Eval(EvalArgs),
    /// Search the margin × learning-rate grid, keeping the best validation cell.
    Grid(GridArgs),
    /// Print dataset counts.
    Stats(DataArgs),
    /// Write a point cloud of the torus or the twisted surface.
    ExportMesh(MeshArgs),
    /// List the points of a ring that are identified with the origin.
    ZeroPoints(ZeroArgs),
    /// Write a synthetic translation dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryName {
    Mobius,
    Torus,
    Transe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormName {
    L1,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitName {
    Valid,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Kv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SurfaceName {
    Mobius,
    Torus,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Directory holding train.txt, valid.txt and test.txt.
    #[arg(long, env = "MOBIUSE_DATA")]
    pub data: PathBuf,
    /// Skip valid/test triples with entities or relations absent from train
    /// instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

impl DataArgs {
    fn load(&self) -> Result<TripleStore> {
        let mode = if self.lenient { LoadMode::Lenient } else { LoadMode::Strict };
        let (store, report) = load_dir(&self.data, mode)?;
        if report.skipped() > 0 {
            log::warn!("skipped {} held-out triples with entities or relations unseen in train", report.skipped());
        }
        Ok(store)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    #[arg(long, value_enum, default_value = "mobius")]
    pub geometry: GeometryName,
    /// First ring modulus (Möbius only; default 2).
    #[arg(long)]
    pub q: Option<u32>,
    /// Second ring modulus (Möbius only; default 1).
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long, value_enum, default_value = "l1")]
    pub norm: NormName,
}

impl GeometryArgs {
    pub fn resolve(&self) -> Result<Geometry> {
        let norm = match self.norm {
            NormName::L1 => NormKind::L1,
            NormName::L2 => NormKind::L2,
        };
        let geometry = match self.geometry {
            GeometryName::Mobius => {
                let (q, p) = (self.q.unwrap_or(2), self.p.unwrap_or(1));
                let spec = RingSpec::new(q, p).map_err(|e| Error::Usage(format!("--q {q} --p {p}: {e}")))?;
                Geometry::mobius(spec)
            }
            other => {
                if self.q.is_some() || self.p.is_some() {
                    return Err(Error::Usage("--q/--p only apply to --geometry mobius".into()));
                }
                if other == GeometryName::Torus {
                    Geometry::torus()
                } else {
                    Geometry::euclidean()
                }
            }
        };
        Ok(geometry.with_norm(norm))
    }
}

#[derive(Debug, Clone, Args)]
pub struct HyperArgs {
    /// Embedding dimension n.
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long = "batch", default_value_t = 100)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for evaluation (0: all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Margin γ.
    #[arg(long, default_value_t = 500.0)]
    pub gamma: f64,
    /// Learning rate α.
    #[arg(long, default_value_t = 0.0005)]
    pub alpha: f64,
    /// Report filtered validation metrics every this many epochs (0: never).
    #[arg(long, default_value_t = 0)]
    pub eval_every: usize,
    /// Lock-free multi-threaded updates (not reproducible).
    #[arg(long)]
    pub hogwild: bool,
    /// Checkpoint path.
    #[arg(long, default_value = "model.ckpt")]
    pub out: PathBuf,
    /// Training log path (default: the checkpoint path with `.log` appended).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitName,
    /// Rank against every corruption instead of the filtered set.
    #[arg(long)]
    pub raw: bool,
    #[arg(long, value_enum, default_value = "table")]
    pub format: ReportFormat,
    /// Fail unless the checkpoint was trained in this geometry.
    #[arg(long, value_enum)]
    pub geometry: Option<GeometryName>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long, value_enum, default_value = "l1")]
    pub norm: NormName,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Margins to try (default: 2000 1000 500 200 100).
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub gammas: Vec<f64>,
    /// Learning rates to try (default: 0.002 0.001 0.0005 0.0002 0.0001).
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub alphas: Vec<f64>,
    /// Where to write the best model.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MeshArgs {
    #[arg(long, value_enum, default_value = "mobius")]
    pub surface: SurfaceName,
    /// Samples along θ.
    #[arg(long, default_value_t = 128, allow_negative_numbers = true)]
    pub theta_steps: i64,
    /// Samples along ω.
    #[arg(long, default_value_t = 32, allow_negative_numbers = true)]
    pub omega_steps: i64,
    /// Major radius R.
    #[arg(long = "big-r", default_value_t = 2.0)]
    pub big_r: f64,
    /// Minor radius r.
    #[arg(long = "small-r", default_value_t = 1.0)]
    pub small_r: f64,
    /// Emit only the closed curve at this fixed ω.
    #[arg(long, allow_negative_numbers = true)]
    pub curve_omega: Option<f64>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ZeroArgs {
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    #[arg(long, default_value_t = 1)]
    pub p: u32,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub entities: u32,
    #[arg(long, default_value_t = 10)]
    pub relations: u32,
    #[arg(long, default_value_t = 0.1)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 0.0)]
    pub valid_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Grid(a) => cmd_grid(&a, out),
        Command::Stats(a) => {
            let mode = if a.lenient { LoadMode::Lenient } else { LoadMode::Strict };
            let (store, report) = load_dir(&a.data, mode)?;
            let name = a.data.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            write_out(out, &stats_table(&name, &store, &report))
        }
        Command::ExportMesh(a) => cmd_export_mesh(&a, out),
        Command::ZeroPoints(a) => {
            let spec = RingSpec::new(a.q, a.p).map_err(|e| Error::Usage(format!("--q {} --p {}: {e}", a.q, a.p)))?;
            let mut text = String::new();
            for z in zero_points(spec) {
                text.push_str(&format!("{} {}\n", z.x1, z.x2));
            }
            write_out(out, &text)
        }
        Command::Synth(a) => {
            let store = translation_graph(&SyntheticConfig {
                entities: a.entities,
                relations: a.relations,
                test_fraction: a.test_fraction,
                valid_fraction: a.valid_fraction,
                seed: a.seed,
            })?;
            write_dir(&a.out, &store)
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(Error::io("<stdout>"))
}

fn metrics(state: &ModelState, store: &TripleStore, split: Split, filter: Option<&FilterIndex>, threads: usize) -> Result<MetricReport> {
    parallel::evaluate(state, store.split(split), filter, threads)
}

/// Trains one model on `store`. `log` receives one line per epoch.
pub fn train_model(
    store: &TripleStore,
    geometry: Geometry,
    dim: usize,
    config: TrainConfig,
    hogwild_threads: Option<usize>,
    eval_threads: usize,
    log: &mut dyn Write,
) -> Result<ModelState> {
    let mut state = ModelState::new(geometry, dim, store.num_entities(), store.num_relations(), config.seed)?;
    if config.epochs == 0 {
        return Ok(state);
    }
    let stats = bern_stats(store);
    let train_filter = FilterIndex::train_only(store);
    let sampler = BernSampler::new(&stats, &train_filter, store.num_entities())?;
    let full_filter = (config.eval_every > 0 && !store.split(Split::Valid).is_empty()).then(|| FilterIndex::from_store(store));
    let mut on_epoch = |epoch: usize, loss: f64, state: &ModelState| -> Result<()> {
        let mut line = format!("epoch={epoch} loss={loss}");
        if let Some(filter) = &full_filter {
            if epoch.is_multiple_of(config.eval_every) {
                let r = metrics(state, store, Split::Valid, Some(filter), eval_threads)?;
                line.push_str(&format!(" valid_mrr={} valid_mr={} valid_hit@10={}", r.mrr, r.mr, r.hits_at(10).unwrap_or(0.0)));
            }
        }
        log::info!("{line}");
        writeln!(log, "{line}").map_err(Error::io("<log>"))?;
        Ok(())
    };
    match hogwild_threads {
        None => {
            let mut trainer = Trainer::new(config)?;
            while trainer.epoch() < config.epochs {
                let loss = trainer.train_epoch(&mut state, store.train(), &sampler)?;
                on_epoch(trainer.epoch(), loss, &state)?;
            }
        }
        Some(threads) => {
            let mut seeds = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
            for epoch in 1..=config.epochs {
                let seed = rand::Rng::gen::<u64>(&mut seeds);
                let loss = parallel::hogwild_epoch(&mut state, store.train(), &sampler, &config, seed, threads)?;
                on_epoch(epoch, loss, &state)?;
            }
        }
    }
    Ok(state)
}

fn train_config(hyper: &HyperArgs, gamma: f64, alpha: f64, eval_every: usize) -> Result<TrainConfig> {
    let config = TrainConfig {
        gamma,
        alpha,
        epochs: hyper.epochs,
        batch_size: hyper.batch_size,
        seed: hyper.seed,
        eval_every,
    };
    config.validate().map_err(|e| Error::Usage(e.to_string()))?;
    if hyper.dim == 0 {
        return Err(Error::Usage("--dim must be at least 1".into()));
    }
    Ok(config)
}

fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let geometry = a.geometry.resolve()?;
    let config = train_config(&a.hyper, a.gamma, a.alpha, a.eval_every)?;
    let store = a.data.load()?;
    let log_path = a.log.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".log");
        PathBuf::from(p)
    });
    let mut log = BufWriter::new(File::create(&log_path).map_err(Error::io(&log_path))?);
    writeln!(
        log,
        "geometry={geometry} dim={} gamma={} alpha={} epochs={} batch={} seed={} entities={} relations={} train={}",
        a.hyper.dim,
        config.gamma,
        config.alpha,
        config.epochs,
        config.batch_size,
        config.seed,
        store.num_entities(),
        store.num_relations(),
        store.train().len()
    )
    .map_err(Error::io(&log_path))?;
    let hogwild = a.hogwild.then(|| if a.hyper.threads == 0 { rayon::current_num_threads() } else { a.hyper.threads });
    let state = train_model(&store, geometry, a.hyper.dim, config, hogwild, a.hyper.threads, &mut log)?;
    log.flush().map_err(Error::io(&log_path))?;
    checkpoint::save(&state, &a.out)?;
    write_out(out, &format!("wrote {} ({geometry}, {} epochs)\n", a.out.display(), config.epochs))
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let state = match a.geometry {
        Some(g) => {
            let expected = GeometryArgs {
                geometry: g,
                q: a.q,
                p: a.p,
                norm: a.norm,
            }
            .resolve()?;
            checkpoint::load_expecting(&a.checkpoint, expected)?
        }
        None => checkpoint::load(&a.checkpoint)?,
    };
    let store = a.data.load()?;
    check_sizes(&state, &store, &a.checkpoint)?;
    let split = match a.split {
        SplitName::Valid => Split::Valid,
        SplitName::Test => Split::Test,
    };
    let filter = (!a.raw).then(|| FilterIndex::from_store(&store));
    let r = metrics(&state, &store, split, filter.as_ref(), a.threads)?;
    let text = match a.format {
        ReportFormat::Table => report::table(&[(&state.geometry().to_string(), &r)]),
        ReportFormat::Kv => report::key_value(&r),
    };
    write_out(out, &text)
}

fn check_sizes(state: &ModelState, store: &TripleStore, path: &Path) -> Result<()> {
    if state.num_entities() != store.num_entities() || state.num_relations() != store.num_relations() {
        return Err(Error::DatasetMismatch(format!(
            "{} has {} entities and {} relations, the dataset has {} and {}",
            path.display(),
            state.num_entities(),
            state.num_relations(),
            store.num_entities(),
            store.num_relations()
        )));
    }
    Ok(())
}

fn cmd_grid(a: &GridArgs, out: &mut dyn Write) -> Result<()> {
    let geometry = a.geometry.resolve()?;
    let gammas = if a.gammas.is_empty() { TrainConfig::GAMMA_GRID.to_vec() } else { a.gammas.clone() };
    let alphas = if a.alphas.is_empty() { TrainConfig::ALPHA_GRID.to_vec() } else { a.alphas.clone() };
    for &g in &gammas {
        for &al in &alphas {
            train_config(&a.hyper, g, al, 0)?;
        }
    }
    let store = a.data.load()?;
    if store.split(Split::Valid).is_empty() {
        return Err(Error::DatasetMismatch("grid search needs a non-empty validation split".into()));
    }
    let filter = FilterIndex::from_store(&store);
    let mut best: Option<(f64, f64, MetricReport, ModelState)> = None;
    let mut text = String::from("gamma alpha valid_mrr valid_mr valid_hit@10\n");
    for &gamma in &gammas {
        for &alpha in &alphas {
            let config = train_config(&a.hyper, gamma, alpha, 0)?;
            let state = train_model(&store, geometry, a.hyper.dim, config, None, a.hyper.threads, &mut std::io::sink())?;
            let r = metrics(&state, &store, Split::Valid, Some(&filter), a.hyper.threads)?;
            log::info!("gamma={gamma} alpha={alpha} valid_mrr={}", r.mrr);
            text.push_str(&format!("{gamma} {alpha} {:.4} {:.2} {:.4}\n", r.mrr, r.mr, r.hits_at(10).unwrap_or(0.0)));
            if best.as_ref().is_none_or(|b| r.mrr > b.2.mrr) {
                best = Some((gamma, alpha, r, state));
            }
        }
    }
    let (gamma, alpha, r, state) = best.expect("grids are non-empty");
    text.push_str(&format!("best gamma={gamma} alpha={alpha} valid_mrr={}\n", r.mrr));
    if let Some(path) = &a.out {
        checkpoint::save(&state, path)?;
    }
    write_out(out, &text)
}

fn cmd_export_mesh(a: &MeshArgs, out: &mut dyn Write) -> Result<()> {
    if a.theta_steps <= 0 || a.omega_steps <= 0 {
        return Err(Error::Usage("mesh resolution must be positive".into()));
    }
    let params = SurfaceParams::new(a.big_r, a.small_r).map_err(|e| Error::Usage(e.to_string()))?;
    let surface = match a.surface {
        SurfaceName::Mobius => Surface::Mobius,
        SurfaceName::Torus => Surface::Torus,
    };
    let points = match a.curve_omega {
        Some(omega) => mesh::curve(surface, &params, omega, a.theta_steps as usize),
        None => mesh::grid(surface, &params, a.theta_steps as usize, a.omega_steps as usize),
    };
    let text = mesh::to_text(&points);
    match &a.out {
        Some(path) => std::fs::write(path, text).map_err(Error::io(path)),
        None => write_out(out, &text),
    }
}
