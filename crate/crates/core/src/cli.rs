//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::certify::{self, Tolerances};
use crate::cv::{self, CvGrid, CvSolver, CvSource};
use crate::data::{self, Amplitude, CsvOptions, LabelMap, SynthSpec};
use crate::dataset::Dataset;
use crate::error::{Error, ErrorClass, Result};
use crate::model::predict;
use crate::model_file::ModelFile;
use crate::penalty::PenaltySpec;
use crate::presets::{self, Preset};
use crate::solver::{self, initial_point, Init, SolverConfig, StepsizeRule, DEFAULT_ETA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "firmlogit",
    version,
    about = "Sparse logistic regression with MCP regularization"
)]
pub struct Cli {
    /// Seed for every random choice (initialization, splits, synthetic data)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for grid runs (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Suppress informational output on stderr
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write it as TOML
    Train(TrainArgs),
    /// Predict labels with a saved model
    Predict(PredictArgs),
    /// Check local optimality of a saved model on its training data
    Certify(CertifyArgs),
    /// Grid search over beta and zeta
    Cv(CvArgs),
    /// Write a synthetic dataset and its ground-truth model
    Generate(GenerateArgs),
    /// Run a pinned experiment preset
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Sparse,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset file
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Zero-based label column for CSV input (default: last)
    #[arg(long)]
    pub label_col: Option<usize>,
    /// Label encoding: `01`, `pm1`, `none` or `NEG,POS` for two literal strings
    #[arg(long, default_value = "01")]
    pub labels: String,
}

impl DataArgs {
    fn label_map(&self) -> Result<LabelMap> {
        match self.labels.as_str() {
            "01" => Ok(LabelMap::ZeroOne),
            "pm1" => Ok(LabelMap::PlusMinusOne),
            "none" => Ok(LabelMap::Absent),
            other => match other.split_once(',') {
                Some((n, p)) if !n.is_empty() && !p.is_empty() => Ok(LabelMap::Strings {
                    negative: n.to_string(),
                    positive: p.to_string(),
                }),
                _ => Err(Error::InvalidConfig(format!(
                    "--labels must be 01, pm1, none or NEG,POS; got {other:?}"
                ))),
            },
        }
    }

    fn load(&self, add_intercept: bool) -> Result<Dataset> {
        let labels = self.label_map()?;
        match self.format {
            Format::Csv => data::load_csv(
                &self.data,
                &CsvOptions {
                    label_column: self.label_col,
                    labels,
                    add_intercept,
                    ..Default::default()
                },
            ),
            Format::Sparse => {
                data::load_sparse_classification_format(&self.data, &labels, None, add_intercept)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum InitKind {
    Zero,
    Random,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Regularization weight
    #[arg(long)]
    pub beta: f64,
    /// Nonconvexity parameter (0 gives the l1 penalty)
    #[arg(long)]
    pub zeta: f64,
    /// Constant stepsize (default: 0.99 of the admissible bound)
    #[arg(long, conflicts_with = "backtracking")]
    pub alpha: Option<f64>,
    /// Use backtracking stepsizes
    #[arg(long)]
    pub backtracking: bool,
    /// Backtracking reduction factor
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    /// Initial backtracking stepsize (default: 0.49/(beta*zeta), or 1 when zeta = 0)
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Nesterov acceleration
    #[arg(long)]
    pub accelerate: bool,
    #[arg(long, default_value_t = solver::DEFAULT_EPS_TOL)]
    pub eps_tol: f64,
    /// Also require the last step norm to be at most this before stopping
    #[arg(long)]
    pub step_tol: Option<f64>,
    #[arg(long, default_value_t = solver::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value = "zero")]
    pub init: InitKind,
    /// Append a constant-one feature (exempt from centering)
    #[arg(long)]
    pub add_intercept: bool,
    /// Subtract column means before training
    #[arg(long)]
    pub center: bool,
    /// Model file to write
    #[arg(long)]
    pub out: PathBuf,
    /// Optional iteration trace CSV
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// The dataset has no label column
    #[arg(long)]
    pub no_labels: bool,
    /// Predictions CSV (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Training data in raw form; the model's centering is reapplied
    #[command(flatten)]
    pub data: DataArgs,
    /// Gradient magnitude accepted as zero (default: 1e-6 (1 + ||X||))
    #[arg(long)]
    pub grad_tol: Option<f64>,
    /// Required gap below beta on zero coordinates (default: 1e-9 beta)
    #[arg(long)]
    pub margin: Option<f64>,
    /// Fail when the beta threshold cannot be computed (uncentered model)
    #[arg(long)]
    pub require_threshold: bool,
    /// Report file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum SynthKind {
    /// Rank-deficient subspace data, magnitudes in [5, 15]
    Subspace,
    /// Gaussian data with standard-normal nonzeros
    Gaussian,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kind: SynthKind,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,
    /// Nonzeros of the ground truth
    #[arg(long)]
    pub k: Option<usize>,
    /// Inner dimension of X = AB/||AB|| (0 draws X iid normal)
    #[arg(long)]
    pub latent_dim: Option<usize>,
    /// `normal` or `LO:HI` for magnitudes uniform on [LO, HI] with random signs
    #[arg(long)]
    pub amplitude: Option<String>,
    /// Label noise standard deviation
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Keep test labels noise-free
    #[arg(long)]
    pub clean_test: bool,
}

impl SynthArgs {
    fn spec(&self, seed: u64) -> Result<SynthSpec> {
        let mut s = match self.kind {
            SynthKind::Subspace => SynthSpec::subspace(seed),
            SynthKind::Gaussian => SynthSpec::gaussian(seed),
        };
        if let Some(d) = self.d {
            s.d = d;
        }
        if let Some(n) = self.n_train {
            s.n_train = n;
        }
        if let Some(n) = self.n_test {
            s.n_test = n;
        }
        if let Some(k) = self.k {
            s.k = k;
        }
        if let Some(r) = self.latent_dim {
            s.latent_dim = (r > 0).then_some(r);
        }
        if let Some(a) = &self.amplitude {
            s.amplitude = parse_amplitude(a)?;
        }
        s.noise_sigma = self.noise;
        s.noisy_test = !self.clean_test;
        s.validate()?;
        Ok(s)
    }
}

fn parse_amplitude(text: &str) -> Result<Amplitude> {
    if text == "normal" {
        return Ok(Amplitude::StandardNormal);
    }
    let bad = || Error::InvalidConfig(format!("--amplitude must be normal or LO:HI, got {text:?}"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    Ok(Amplitude::UniformRange(
        lo.parse().map_err(|_| bad())?,
        hi.parse().map_err(|_| bad())?,
    ))
}

#[derive(Debug, Args)]
pub struct CvArgs {
    /// Dataset to split repeatedly; without it synthetic data are drawn
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub label_col: Option<usize>,
    #[arg(long, default_value = "01")]
    pub labels: String,
    #[arg(long)]
    pub add_intercept: bool,
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Comma-separated beta values
    #[arg(long, value_delimiter = ',', conflicts_with = "beta_log_range")]
    pub betas: Option<Vec<f64>>,
    /// `LO:HI:COUNT` for COUNT values 10^e with e evenly spaced in [LO, HI]
    #[arg(long)]
    pub beta_log_range: Option<String>,
    /// Comma-separated zeta values
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.1,1")]
    pub zetas: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Test share of each random split (file input)
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Carve a validation part out of the training side and score cells on it
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    /// Constant stepsize; replaced per cell by the default when inadmissible
    #[arg(long, conflicts_with = "backtracking")]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub backtracking: bool,
    #[arg(long)]
    pub accelerate: bool,
    #[arg(long, default_value_t = solver::DEFAULT_EPS_TOL)]
    pub eps_tol: f64,
    #[arg(long, default_value_t = solver::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Error grid CSV (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-fit CSV
    #[arg(long)]
    pub cells: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Directory for train.csv, test.csv and theta0.csv
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PresetArg {
    Fig1,
    Fig2,
    Fig3,
    Table3,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub preset: PresetArg,
    #[arg(long, default_value = "results")]
    pub out_dir: PathBuf,
}

/// Output sinks, so tests can capture them.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, io: &mut Io) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(if e.use_stderr() { &mut *io.err } else { &mut *io.out }, "{}", e.render());
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // a second call in the same process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match dispatch(&cli, io) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            match e.class() {
                ErrorClass::Config => EXIT_USAGE,
                ErrorClass::Data => EXIT_DATA,
                ErrorClass::Numerical => EXIT_NUMERICAL,
            }
        }
    }
}

/// Informational messages on stderr, silenced by `--quiet`.
struct Log<'a> {
    quiet: bool,
    err: &'a mut dyn Write,
}

impl Log<'_> {
    fn info(&mut self, msg: impl AsRef<str>) {
        if !self.quiet {
            let _ = writeln!(self.err, "{}", msg.as_ref());
        }
    }
}

fn dispatch(cli: &Cli, io: &mut Io) -> Result<()> {
    let out = &mut *io.out;
    let mut log = Log {
        quiet: cli.quiet,
        err: &mut *io.err,
    };
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Train(a) => train(a, seed, &mut log),
        Command::Predict(a) => predict_cmd(a, out, &mut log),
        Command::Certify(a) => certify_cmd(a, out),
        Command::Cv(a) => cv_cmd(a, seed, out, &mut log),
        Command::Generate(a) => generate(a, seed, &mut log),
        Command::Reproduce(a) => {
            let preset = match a.preset {
                PresetArg::Fig1 => Preset::Fig1,
                PresetArg::Fig2 => Preset::Fig2,
                PresetArg::Fig3 => Preset::Fig3,
                PresetArg::Table3 => Preset::Table3,
            };
            for p in presets::reproduce(preset, &a.out_dir, cli.seed)? {
                log.info(format!("wrote {}", p.display()));
            }
            Ok(())
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_to(path: Option<&Path>, stdout: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            body(&mut w).map_err(|e| Error::io(p, e))?;
            w.flush().map_err(|e| Error::io(p, e))
        }
        None => body(stdout).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn train(a: &TrainArgs, seed: u64, log: &mut Log) -> Result<()> {
    let raw = a.data.load(false)?;
    let data = match (a.center, a.add_intercept) {
        (true, true) => raw.centered().with_intercept(),
        (true, false) => raw.centered(),
        (false, true) => raw.with_intercept(),
        (false, false) => raw,
    };
    let spec = PenaltySpec::mcp(a.zeta, a.beta)?;
    let mut config = if a.backtracking {
        let mut c = SolverConfig::default_backtracking(&spec);
        if let StepsizeRule::Backtracking { alpha0, .. } = &mut c.stepsize {
            if let Some(v) = a.alpha0 {
                *alpha0 = v;
            }
        }
        if let StepsizeRule::Backtracking { eta, .. } = &mut c.stepsize {
            *eta = a.eta;
        }
        c
    } else {
        match a.alpha {
            Some(alpha) => SolverConfig::with_rule(StepsizeRule::Constant(alpha)),
            None => SolverConfig::default_constant(&spec, &data),
        }
    };
    config = config
        .accelerated(a.accelerate)
        .eps_tol(a.eps_tol)
        .step_tol(a.step_tol)
        .max_iters(a.max_iters)
        .record_trace(a.trace.is_some());
    config.validate(&spec, &data)?;

    let init = match a.init {
        InitKind::Zero => Init::Zero,
        InitKind::Random => Init::SmallRandom(seed),
    };
    if init == Init::Zero && data.is_centered() && !data.has_intercept() {
        let threshold = certify::beta_threshold(&data, &spec)?;
        if spec.beta > threshold {
            log.info(format!(
                "warning: beta = {} exceeds the zero-solution threshold {threshold}; \
                 zero is a local minimum and a zero start stays there",
                spec.beta
            ));
        }
    }
    let theta0 = initial_point(init, data.n_features());
    let res = solver::fit(&data, &spec, &config, theta0.view())?;
    ModelFile::from_fit(&res, &spec, &config, &data).save(&a.out)?;
    if let Some(path) = &a.trace {
        let mut w = create(path)?;
        solver::write_trace_csv(&mut w, &res.trace).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    log.info(format!(
        "{} after {} iterations: objective {}, step {:.3e}, residual {:.3e}, nonzeros {}",
        if res.converged { "converged" } else { "stopped" },
        res.iterations,
        res.objective,
        res.step_norm,
        res.residual,
        res.theta.iter().filter(|v| **v != 0.0).count()
    ));
    if res.possible_separable_escape() {
        log.info("warning: ||theta|| > 1e3, the data are probably separable");
    }
    Ok(())
}

fn predict_cmd(a: &PredictArgs, out: &mut dyn Write, log: &mut Log) -> Result<()> {
    let model = ModelFile::load(&a.model)?;
    let raw = if a.no_labels {
        DataArgs {
            labels: "none".into(),
            ..a.data.clone()
        }
        .load(false)?
    } else {
        a.data.load(false)?
    };
    let data = model.prepare(raw)?;
    let theta = model.theta();
    let mut wrong = 0usize;
    write_to(a.out.as_deref(), out, |w| {
        writeln!(w, "index,label,prob")?;
        for (i, (x, y)) in data.features().outer_iter().zip(data.labels()).enumerate() {
            let p = predict(theta.view(), x).expect("dimensions checked by prepare");
            if f64::from(p.label) != *y {
                wrong += 1;
            }
            writeln!(w, "{i},{},{}", p.label, p.prob)?;
        }
        Ok(())
    })?;
    if !a.no_labels {
        log.info(format!(
            "error rate {} ({wrong}/{})",
            wrong as f64 / data.n_samples() as f64,
            data.n_samples()
        ));
    }
    Ok(())
}

fn certify_cmd(a: &CertifyArgs, out: &mut dyn Write) -> Result<()> {
    let model = ModelFile::load(&a.model)?;
    if a.require_threshold && !model.centered {
        return Err(Error::Uncentered);
    }
    let data = model.prepare(a.data.load(false)?)?;
    let spec = model.spec()?;
    let mut tols = Tolerances::defaults(spec.beta, &data);
    if let Some(g) = a.grad_tol {
        tols.grad_tol = g;
    }
    if let Some(m) = a.margin {
        tols.margin = m;
    }
    let theta = model.theta();
    let report = certify::check_mcp_local_opt(theta.view(), &spec, &data, tols)?;
    write_to(a.out.as_deref(), out, |w| {
        report.write_text(&mut *w)?;
        if report.problem_nonconvex {
            writeln!(w, "# problem certified nonconvex (rank-deficient data matrix)")?;
        }
        match report.mcp_iff_verdict {
            Some(true) => writeln!(w, "# verdict: strict local minimum (exact MCP characterization)")?,
            Some(false) => writeln!(w, "# verdict: not a local minimum (exact MCP characterization)")?,
            None => writeln!(
                w,
                "# verdict: exact MCP test not applicable (needs beta*zeta > ||X||^2/8); \
                 sufficient = {}, necessary = {}",
                report.satisfies_sufficient, report.satisfies_necessary
            )?,
        }
        if report.threshold_regime == Some(certify::ThresholdRegime::Indeterminate) {
            writeln!(w, "# beta equals the zero-solution threshold: indeterminate")?;
        }
        if report.possible_separable_escape {
            writeln!(w, "# possible separable-escape: ||theta|| > 1e3, no finite certificate")?;
        }
        Ok(())
    })
}

fn cv_cmd(a: &CvArgs, seed: u64, out: &mut dyn Write, log: &mut Log) -> Result<()> {
    let betas = match (&a.betas, &a.beta_log_range) {
        (Some(b), _) => b.clone(),
        (None, Some(r)) => {
            let parts: Vec<&str> = r.split(':').collect();
            let bad = || Error::InvalidConfig(format!("--beta-log-range must be LO:HI:COUNT, got {r:?}"));
            if parts.len() != 3 {
                return Err(bad());
            }
            CvGrid::log_spaced(
                parts[0].parse().map_err(|_| bad())?,
                parts[1].parse().map_err(|_| bad())?,
                parts[2].parse().map_err(|_| bad())?,
            )
        }
        (None, None) => CvGrid::log_spaced(-2.8, 0.6, 7),
    };
    let grid = CvGrid::new(betas, a.zetas.clone(), a.repeats, seed)?;
    let source = match &a.data {
        Some(path) => {
            let args = DataArgs {
                data: path.clone(),
                format: a.format,
                label_col: a.label_col,
                labels: a.labels.clone(),
            };
            CvSource::Split {
                data: args.load(a.add_intercept)?,
                test_fraction: a.test_fraction,
                validation_fraction: a.validation_fraction,
            }
        }
        None => CvSource::Synthetic(a.synth.spec(seed)?),
    };
    let solver = CvSolver {
        alpha: a.alpha,
        backtracking: a.backtracking,
        accelerate: a.accelerate,
        eps_tol: a.eps_tol,
        max_iters: a.max_iters,
    };
    let folds = cv::folds(&grid, &source)?;
    let cells = cv::run_cells(&grid, &folds, &solver)?;
    let errors = cv::aggregate(&cells);
    let corrected = cells.iter().filter(|c| c.stepsize_corrected).count();
    if corrected > 0 {
        log.info(format!(
            "notice: --alpha was not admissible in {corrected} of {} fits; used 0.99 of each cell's bound",
            cells.len()
        ));
    }
    write_to(a.out.as_deref(), out, |w| errors.write_csv(w))?;
    if let Some(p) = &a.cells {
        let mut w = create(p)?;
        cv::write_cells_csv(&cells, &mut w).map_err(|e| Error::io(p, e))?;
        w.flush().map_err(|e| Error::io(p, e))?;
    }
    let s = errors.summary();
    let scored_on = if a.validation_fraction.is_some() { "validation" } else { "test" };
    for (name, row) in [("zeta = 0", s.best_l1), ("zeta > 0", s.best_weakly_convex)] {
        if let Some(r) = row {
            let mut line = format!(
                "best {name}: beta {}, zeta {}, mean {scored_on} error {}",
                r.beta, r.zeta, r.mean_test_error
            );
            if a.validation_fraction.is_some() {
                let spec = PenaltySpec::mcp(r.zeta, r.beta)?;
                let held = cv::held_out_errors(&folds, &spec, &solver)?;
                line.push_str(&format!(", held-out test error {held}"));
            }
            log.info(line);
        }
    }
    Ok(())
}

fn generate(a: &GenerateArgs, seed: u64, log: &mut Log) -> Result<()> {
    let spec = a.synth.spec(seed)?;
    let (train, test, theta0) = data::gen_noisy(&spec)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let paths = [
        a.out_dir.join("train.csv"),
        a.out_dir.join("test.csv"),
        a.out_dir.join("theta0.csv"),
    ];
    data::save_csv(&train, &paths[0])?;
    data::save_csv(&test, &paths[1])?;
    data::save_vector(&theta0, &paths[2])?;
    for p in &paths {
        log.info(format!("wrote {}", p.display()));
    }
    Ok(())
}
