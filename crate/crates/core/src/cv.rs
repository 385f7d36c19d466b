//! Grid search over `(β, ζ)` with repeated synthetic draws or random splits.
//!
//! Every `(β, ζ)` cell sees the same data for a given repeat. Cells run in
//! parallel and results are collected in `(β, ζ, repeat)` order.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::data::{self, SynthSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::error_rate;
use crate::penalty::PenaltySpec;
use crate::solver::{
    fit, initial_point, max_constant_stepsize, Init, SolverConfig, StepsizeRule, DEFAULT_EPS_TOL,
    DEFAULT_MAX_ITERS, DEFAULT_STEP_FRACTION,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CvGrid {
    pub betas: Vec<f64>,
    pub zetas: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
}

impl CvGrid {
    /// Sorts and validates the parameter lists.
    pub fn new(mut betas: Vec<f64>, mut zetas: Vec<f64>, repeats: usize, seed: u64) -> Result<Self> {
        if betas.is_empty() || zetas.is_empty() {
            return Err(Error::InvalidConfig("beta and zeta lists must be non-empty".into()));
        }
        if repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be at least 1".into()));
        }
        if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidConfig(format!("beta {b} is not positive")));
        }
        if let Some(z) = zetas.iter().find(|z| !(**z >= 0.0 && z.is_finite())) {
            return Err(Error::InvalidConfig(format!("zeta {z} is negative")));
        }
        betas.sort_by(f64::total_cmp);
        zetas.sort_by(f64::total_cmp);
        Ok(CvGrid {
            betas,
            zetas,
            repeats,
            seed,
        })
    }

    /// `count` values `10^e` with `e` evenly spaced from `lo` to `hi`.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![10f64.powf(lo)],
            _ => (0..count)
                .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
                .collect(),
        }
    }

    fn cells(&self) -> Vec<(f64, f64)> {
        self.betas
            .iter()
            .flat_map(|&b| self.zetas.iter().map(move |&z| (b, z)))
            .collect()
    }
}

/// Where the data for each repeat come from.
#[derive(Debug, Clone)]
pub enum CvSource {
    /// A fresh draw per repeat with seed `grid.seed + repeat`.
    Synthetic(SynthSpec),
    /// A fresh seeded split of a raw dataset per repeat. With a
    /// `validation_fraction`, cells are scored on a validation part carved
    /// out of the training side and the test side is held out for
    /// [`held_out_errors`].
    Split {
        data: Dataset,
        test_fraction: f64,
        validation_fraction: Option<f64>,
    },
}

/// Per-cell solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSolver {
    /// A fixed stepsize; cells where it is not admissible fall back to the
    /// default admissible one. `None` always uses the default.
    pub alpha: Option<f64>,
    pub backtracking: bool,
    pub accelerate: bool,
    pub eps_tol: f64,
    pub max_iters: usize,
}

impl Default for CvSolver {
    fn default() -> Self {
        CvSolver {
            alpha: None,
            backtracking: false,
            accelerate: false,
            eps_tol: DEFAULT_EPS_TOL,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

impl CvSolver {
    /// Solver config for one cell and whether the requested stepsize had to
    /// be replaced.
    pub fn config_for(&self, spec: &PenaltySpec, data: &Dataset) -> (SolverConfig, bool) {
        let (rule, corrected) = if self.backtracking {
            (SolverConfig::default_backtracking(spec).stepsize, false)
        } else {
            let bound = max_constant_stepsize(spec, data);
            match self.alpha {
                Some(a) if a > 0.0 && a < bound => (StepsizeRule::Constant(a), false),
                Some(_) => (StepsizeRule::Constant(DEFAULT_STEP_FRACTION * bound), true),
                None => (StepsizeRule::Constant(DEFAULT_STEP_FRACTION * bound), false),
            }
        };
        let cfg = SolverConfig::with_rule(rule)
            .accelerated(self.accelerate)
            .eps_tol(self.eps_tol)
            .max_iters(self.max_iters)
            .record_trace(false);
        (cfg, corrected)
    }
}

/// Outcome of one `(β, ζ, repeat)` fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRecord {
    pub beta: f64,
    pub zeta: f64,
    pub repeat: usize,
    pub test_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stepsize_corrected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub beta: f64,
    pub zeta: f64,
    pub mean_test_error: f64,
    /// Sample standard deviation of the test error over repeats.
    pub std_error: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorGrid {
    pub rows: Vec<ErrorRow>,
}

pub const ERROR_GRID_HEADER: &str = "beta,zeta,mean_test_error,std_error,mean_iterations";
pub const CELL_HEADER: &str = "beta,zeta,repeat,test_error,iterations,converged,stepsize_corrected";

/// Train/score pairs for one repeat, plus the held-out set when a
/// validation split is used.
pub struct Fold {
    pub train: Dataset,
    pub score: Dataset,
    pub held_out: Option<Dataset>,
}

/// Materializes the data of every repeat.
pub fn folds(grid: &CvGrid, source: &CvSource) -> Result<Vec<Fold>> {
    (0..grid.repeats)
        .map(|r| {
            let seed = grid.seed.wrapping_add(r as u64);
            match source {
                CvSource::Synthetic(spec) => {
                    let (train, test, _) = data::gen_noisy(&spec.clone().with_seed(seed))?;
                    Ok(Fold {
                        train,
                        score: test,
                        held_out: None,
                    })
                }
                CvSource::Split {
                    data: raw,
                    test_fraction,
                    validation_fraction: None,
                } => {
                    let (train, test) = data::train_test_split(raw, *test_fraction, seed)?;
                    Ok(Fold {
                        train,
                        score: test,
                        held_out: None,
                    })
                }
                CvSource::Split {
                    data: raw,
                    test_fraction,
                    validation_fraction: Some(vf),
                } => {
                    let (rest, test) = data::split_indices(raw.n_samples(), *test_fraction, seed)?;
                    let (fit_idx, val_idx) = data::split_indices(rest.len(), *vf, seed ^ 0x5a5a)?;
                    let pick = |ix: &[usize]| -> Vec<usize> { ix.iter().map(|&i| rest[i]).collect() };
                    let train_raw = raw.select(&pick(&fit_idx));
                    let train = train_raw.centered();
                    let val = raw.select(&pick(&val_idx)).centered_with(train.center_vector())?;
                    let test = raw.select(&test).centered_with(train.center_vector())?;
                    Ok(Fold {
                        train,
                        score: val,
                        held_out: Some(test),
                    })
                }
            }
        })
        .collect()
}

fn fit_and_score(
    fold: &Fold,
    spec: &PenaltySpec,
    solver: &CvSolver,
    target: &Dataset,
) -> Result<(f64, usize, bool, bool)> {
    let (cfg, corrected) = solver.config_for(spec, &fold.train);
    let theta0 = initial_point(Init::Zero, fold.train.n_features());
    let res = fit(&fold.train, spec, &cfg, theta0.view())?;
    Ok((error_rate(res.theta.view(), target)?, res.iterations, res.converged, corrected))
}

/// Fits every `(β, ζ, repeat)` and scores it on the fold's scoring set.
pub fn run_cells(grid: &CvGrid, folds: &[Fold], solver: &CvSolver) -> Result<Vec<CellRecord>> {
    let tasks: Vec<(f64, f64, usize)> = grid
        .cells()
        .into_iter()
        .flat_map(|(b, z)| (0..folds.len()).map(move |r| (b, z, r)))
        .collect();
    tasks
        .into_par_iter()
        .map(|(beta, zeta, repeat)| {
            let spec = PenaltySpec::mcp(zeta, beta)?;
            let fold = &folds[repeat];
            let (test_error, iterations, converged, stepsize_corrected) =
                fit_and_score(fold, &spec, solver, &fold.score)?;
            Ok(CellRecord {
                beta,
                zeta,
                repeat,
                test_error,
                iterations,
                converged,
                stepsize_corrected,
            })
        })
        .collect()
}

/// Averages cell records over repeats, one row per `(β, ζ)` in input order.
pub fn aggregate(records: &[CellRecord]) -> ErrorGrid {
    let mut rows: Vec<ErrorRow> = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let (b, z) = (records[i].beta, records[i].zeta);
        let group: Vec<&CellRecord> = records[i..]
            .iter()
            .take_while(|r| r.beta == b && r.zeta == z)
            .collect();
        let n = group.len() as f64;
        let mean = group.iter().map(|r| r.test_error).sum::<f64>() / n;
        let var = if group.len() > 1 {
            group.iter().map(|r| (r.test_error - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        rows.push(ErrorRow {
            beta: b,
            zeta: z,
            mean_test_error: mean,
            std_error: var.sqrt(),
            mean_iterations: group.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
        });
        i += group.len();
    }
    ErrorGrid { rows }
}

/// Full grid run.
pub fn run_grid(grid: &CvGrid, source: &CvSource, solver: &CvSolver) -> Result<(ErrorGrid, Vec<CellRecord>)> {
    let folds = folds(grid, source)?;
    let records = run_cells(grid, &folds, solver)?;
    Ok((aggregate(&records), records))
}

/// Lowest-error rows at `ζ = 0` and at `ζ > 0`. Ties keep the earlier row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvSummary {
    pub best_l1: Option<ErrorRow>,
    pub best_weakly_convex: Option<ErrorRow>,
}

impl ErrorGrid {
    pub fn summary(&self) -> CvSummary {
        let best = |pred: &dyn Fn(&ErrorRow) -> bool| {
            self.rows
                .iter()
                .filter(|r| pred(r))
                .fold(None::<ErrorRow>, |acc, r| match acc {
                    Some(a) if a.mean_test_error <= r.mean_test_error => Some(a),
                    _ => Some(*r),
                })
        };
        CvSummary {
            best_l1: best(&|r| r.zeta == 0.0),
            best_weakly_convex: best(&|r| r.zeta > 0.0),
        }
    }

    /// Rows with the given `β`, in `ζ` order.
    pub fn at_beta(&self, beta: f64) -> impl Iterator<Item = &ErrorRow> {
        self.rows.iter().filter(move |r| r.beta == beta)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{ERROR_GRID_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.beta, r.zeta, r.mean_test_error, r.std_error, r.mean_iterations
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidData(e.to_string()))?;
            if i == 0 {
                if line.trim() != ERROR_GRID_HEADER {
                    return Err(Error::InvalidData(format!("unexpected header {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidData(format!("line {}: {e}", i + 1)))?;
            if v.len() != 5 {
                return Err(Error::InvalidData(format!("line {}: expected 5 fields", i + 1)));
            }
            rows.push(ErrorRow {
                beta: v[0],
                zeta: v[1],
                mean_test_error: v[2],
                std_error: v[3],
                mean_iterations: v[4],
            });
        }
        Ok(ErrorGrid { rows })
    }
}

pub fn write_cells_csv<W: Write>(records: &[CellRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CELL_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.beta, r.zeta, r.repeat, r.test_error, r.iterations, r.converged, r.stepsize_corrected
        )?;
    }
    Ok(())
}

/// Mean held-out test error of a chosen `(β, ζ)` over the folds, for
/// sources with a validation split.
pub fn held_out_errors(folds: &[Fold], spec: &PenaltySpec, solver: &CvSolver) -> Result<f64> {
    let mut total = 0.0;
    for fold in folds {
        let Some(test) = fold.held_out.as_ref() else {
            return Err(Error::InvalidConfig(
                "held-out evaluation needs a validation split".into(),
            ));
        };
        total += fit_and_score(fold, spec, solver, test)?.0;
    }
    Ok(total / folds.len() as f64)
}
