//! Pinned experiment presets. Each writes plot-ready CSV files into an
//! output directory.
//!
//! * `fig1` / `fig2`: subspace data (`d = 50`, `N = 1000`, `K = 8`),
//!   `β = 1.2`, `ζ = 0.1`, several constant stepsizes below the bound,
//!   without / with acceleration, plus a `ζ = 0` reference solution.
//! * `fig3`: mean test error over a `(β, ζ)` grid on Gaussian data.
//! * `table3`: best `ζ = 0` versus best `ζ > 0` error per noise level.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::cv::{self, CvGrid, CvSolver, CvSource};
use crate::data::{self, SynthSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::ModelVector;
use crate::penalty::PenaltySpec;
use crate::solver::{fit, FitResult, SolverConfig, StepsizeRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Table3,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Table3 => "table3",
        }
    }

    pub fn default_seed(&self) -> u64 {
        match self {
            Preset::Fig1 | Preset::Fig2 => 1,
            Preset::Fig3 => 2024,
            Preset::Table3 => 77,
        }
    }
}

pub const SUBSPACE_BETA: f64 = 1.2;
pub const SUBSPACE_ZETA: f64 = 0.1;
pub const SUBSPACE_STEPSIZES: [f64; 3] = [1.0, 2.0, 4.0];
pub const SUBSPACE_ITERS: usize = 3000;
pub const NOISE_LEVELS: [f64; 6] = [0.01, 0.03, 0.05, 0.1, 0.3, 0.5];

/// `β` grid `10^{-2.8}, ..., 10^{0.6}` and `ζ ∈ {0, 0.01, 0.1, 1}`.
pub fn gaussian_grid(repeats: usize, seed: u64) -> Result<CvGrid> {
    CvGrid::new(CvGrid::log_spaced(-2.8, 0.6, 7), vec![0.0, 0.01, 0.1, 1.0], repeats, seed)
}

/// `β ∈ {10^{-3}, ..., 10}` and `ζ ∈ {0, 0.01, 0.1, 1, 10}`.
pub fn noise_grid(repeats: usize, seed: u64) -> Result<CvGrid> {
    CvGrid::new(
        CvGrid::log_spaced(-3.0, 1.0, 5),
        vec![0.0, 0.01, 0.1, 1.0, 10.0],
        repeats,
        seed,
    )
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn io_at(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

/// Plain and accelerated runs on one subspace instance.
pub struct SubspaceRuns {
    pub data: Dataset,
    pub theta0: ModelVector,
    pub runs: Vec<(f64, FitResult)>,
    /// `ζ = 0` solution run to a tight tolerance.
    pub l1: FitResult,
}

pub fn subspace_runs(seed: u64, accelerate: bool, stepsizes: &[f64], max_iters: usize) -> Result<SubspaceRuns> {
    let (data, _, theta0) = data::gen_separable(&SynthSpec::subspace(seed))?;
    let spec = PenaltySpec::mcp(SUBSPACE_ZETA, SUBSPACE_BETA)?;
    let zero = ModelVector::zeros(data.n_features());
    let runs = stepsizes
        .iter()
        .map(|&alpha| {
            let cfg = SolverConfig::with_rule(StepsizeRule::Constant(alpha))
                .accelerated(accelerate)
                .max_iters(max_iters);
            Ok((alpha, fit(&data, &spec, &cfg, zero.view())?))
        })
        .collect::<Result<Vec<_>>>()?;
    let l1_spec = PenaltySpec::mcp(0.0, SUBSPACE_BETA)?;
    let l1_cfg = SolverConfig::default_constant(&l1_spec, &data)
        .accelerated(true)
        .eps_tol(1e-12)
        .max_iters(50_000)
        .record_trace(false);
    let l1 = fit(&data, &l1_spec, &l1_cfg, zero.view())?;
    Ok(SubspaceRuns {
        data,
        theta0,
        runs,
        l1,
    })
}

fn unit(v: &ModelVector) -> ModelVector {
    let n = v.dot(v).sqrt();
    if n > 0.0 {
        v / n
    } else {
        v.clone()
    }
}

fn write_subspace(runs: &SubspaceRuns, out_dir: &Path, tag: &str) -> Result<Vec<PathBuf>> {
    let trace_path = out_dir.join(format!("{tag}_objective.csv"));
    let mut w = create(&trace_path)?;
    let err = io_at(&trace_path);
    writeln!(w, "stepsize,iter,objective").map_err(&err)?;
    for (alpha, res) in &runs.runs {
        for t in &res.trace {
            writeln!(w, "{alpha},{},{}", t.iter, t.objective).map_err(&err)?;
        }
    }
    w.flush().map_err(&err)?;

    let est_path = out_dir.join(format!("{tag}_theta.csv"));
    let mut w = create(&est_path)?;
    let err = io_at(&est_path);
    let cols: Vec<String> = runs.runs.iter().map(|(a, _)| format!("alpha_{a}")).collect();
    writeln!(w, "index,ground_truth,{},l1", cols.join(",")).map_err(&err)?;
    let truth = unit(&runs.theta0);
    let ests: Vec<ModelVector> = runs.runs.iter().map(|(_, r)| unit(&r.theta)).collect();
    let l1 = unit(&runs.l1.theta);
    for j in 0..truth.len() {
        let vals: Vec<String> = ests.iter().map(|e| e[j].to_string()).collect();
        writeln!(w, "{j},{},{},{}", truth[j], vals.join(","), l1[j]).map_err(&err)?;
    }
    w.flush().map_err(&err)?;
    Ok(vec![trace_path.clone(), est_path.clone()])
}

/// Iterations needed to bring the objective within `rel_gap` of the better
/// of the two final values at the same stepsize, for plain and accelerated
/// runs. The threshold is per stepsize since the runs may settle at
/// different local minima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub stepsize: f64,
    pub threshold: f64,
    pub plain_iters: Option<usize>,
    pub accelerated_iters: Option<usize>,
    pub plain_final: f64,
    pub accelerated_final: f64,
}

pub const BENCH_HEADER: &str =
    "stepsize,threshold,plain_iters,accelerated_iters,plain_final,accelerated_final";

pub fn acceleration_benchmark(seed: u64, stepsizes: &[f64], max_iters: usize, rel_gap: f64) -> Result<Vec<BenchRow>> {
    let plain = subspace_runs(seed, false, stepsizes, max_iters)?;
    let accel = subspace_runs(seed, true, stepsizes, max_iters)?;
    let lowest = |r: &FitResult| r.trace.iter().map(|t| t.objective).fold(f64::INFINITY, f64::min);
    Ok(plain
        .runs
        .iter()
        .zip(&accel.runs)
        .map(|((alpha, p), (_, a))| {
            let start = p.trace[0].objective;
            let best = lowest(p).min(lowest(a));
            let threshold = best + rel_gap * (start - best);
            let hit = |r: &FitResult| r.trace.iter().find(|t| t.objective <= threshold).map(|t| t.iter);
            BenchRow {
                stepsize: *alpha,
                threshold,
                plain_iters: hit(p),
                accelerated_iters: hit(a),
                plain_final: p.objective,
                accelerated_final: a.objective,
            }
        })
        .collect())
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], mut out: W) -> std::io::Result<()> {
    let opt = |v: Option<usize>| v.map_or_else(|| "never".to_string(), |n| n.to_string());
    writeln!(out, "{BENCH_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.stepsize,
            r.threshold,
            opt(r.plain_iters),
            opt(r.accelerated_iters),
            r.plain_final,
            r.accelerated_final
        )?;
    }
    Ok(())
}

/// One row of the noise-level table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRow {
    pub noise: f64,
    pub l1_error: f64,
    pub weakly_convex_error: f64,
    pub l1_beta: f64,
    pub wc_beta: f64,
    pub wc_zeta: f64,
}

pub const NOISE_HEADER: &str = "noise,l1_error,weakly_convex_error,l1_beta,wc_beta,wc_zeta";

pub fn noise_table(levels: &[f64], grid: &CvGrid, solver: &CvSolver) -> Result<Vec<NoiseRow>> {
    levels
        .iter()
        .map(|&noise| {
            let source = CvSource::Synthetic(SynthSpec::gaussian(0).with_noise(noise));
            let (errors, _) = cv::run_grid(grid, &source, solver)?;
            let s = errors.summary();
            let (l1, wc) = match (s.best_l1, s.best_weakly_convex) {
                (Some(l), Some(w)) => (l, w),
                _ => {
                    return Err(Error::InvalidConfig(
                        "grid needs zeta = 0 and some zeta > 0".into(),
                    ))
                }
            };
            Ok(NoiseRow {
                noise,
                l1_error: l1.mean_test_error,
                weakly_convex_error: wc.mean_test_error,
                l1_beta: l1.beta,
                wc_beta: wc.beta,
                wc_zeta: wc.zeta,
            })
        })
        .collect()
}

pub fn write_noise_csv<W: Write>(rows: &[NoiseRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{NOISE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.noise, r.l1_error, r.weakly_convex_error, r.l1_beta, r.wc_beta, r.wc_zeta
        )?;
    }
    Ok(())
}

/// Runs a preset and returns the files written.
pub fn reproduce(preset: Preset, out_dir: &Path, seed: Option<u64>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let seed = seed.unwrap_or(preset.default_seed());
    match preset {
        Preset::Fig1 | Preset::Fig2 => {
            let accelerate = preset == Preset::Fig2;
            let runs = subspace_runs(seed, accelerate, &SUBSPACE_STEPSIZES, SUBSPACE_ITERS)?;
            write_subspace(&runs, out_dir, preset.name())
        }
        Preset::Fig3 => {
            let grid = gaussian_grid(10, seed)?;
            let (errors, cells) = cv::run_grid(
                &grid,
                &CvSource::Synthetic(SynthSpec::gaussian(0)),
                &CvSolver::default(),
            )?;
            let grid_path = out_dir.join("fig3_error_grid.csv");
            let cells_path = out_dir.join("fig3_cells.csv");
            let mut w = create(&grid_path)?;
            errors.write_csv(&mut w).map_err(io_at(&grid_path))?;
            w.flush().map_err(io_at(&grid_path))?;
            let mut w = create(&cells_path)?;
            cv::write_cells_csv(&cells, &mut w).map_err(io_at(&cells_path))?;
            w.flush().map_err(io_at(&cells_path))?;
            Ok(vec![grid_path, cells_path])
        }
        Preset::Table3 => {
            let rows = noise_table(&NOISE_LEVELS, &noise_grid(10, seed)?, &CvSolver::default())?;
            let path = out_dir.join("table3.csv");
            let mut w = create(&path)?;
            write_noise_csv(&rows, &mut w).map_err(io_at(&path))?;
            w.flush().map_err(io_at(&path))?;
            Ok(vec![path])
        }
    }
}
