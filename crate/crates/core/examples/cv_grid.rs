//! Test error over a (β, ζ) grid on Gaussian sparse-model data, averaged
//! over repeated draws. Prints the error grid CSV and, per β, whether some
//! ζ > 0 beats ζ = 0.
//!
//! cargo run --release --example cv_grid -- [repeats] [max_iters]

use std::time::Instant;

use firmlogit::cv::{run_grid, CvGrid, CvSolver, CvSource};
use firmlogit::data::SynthSpec;

fn main() -> firmlogit::Result<()> {
    let mut args = std::env::args().skip(1);
    let repeats = args.next().map_or(10, |a| a.parse().expect("repeats"));
    let max_iters = args.next().map_or(10_000, |a| a.parse().expect("max_iters"));

    let grid = CvGrid::new(
        CvGrid::log_spaced(-2.8, 0.6, 7),
        vec![0.0, 0.01, 0.1, 1.0],
        repeats,
        2024,
    )?;
    let solver = CvSolver {
        max_iters,
        ..Default::default()
    };
    let start = Instant::now();
    let (errors, cells) = run_grid(&grid, &CvSource::Synthetic(SynthSpec::gaussian(0)), &solver)?;
    errors.write_csv(std::io::stdout().lock()).expect("stdout");

    let converged = cells.iter().filter(|c| c.converged).count();
    println!("# {converged}/{} fits converged in {:.1?}", cells.len(), start.elapsed());
    for &beta in &grid.betas {
        let rows: Vec<_> = errors.at_beta(beta).collect();
        let l1 = rows.iter().find(|r| r.zeta == 0.0).unwrap().mean_test_error;
        let wc = rows
            .iter()
            .filter(|r| r.zeta > 0.0)
            .map(|r| r.mean_test_error)
            .fold(f64::INFINITY, f64::min);
        println!("# beta = {beta:.4e}: l1 {l1:.4}, best zeta>0 {wc:.4}, {}", if wc <= l1 { "weakly convex wins" } else { "l1 wins" });
    }
    Ok(())
}
