//! Best ℓ1 (ζ = 0) versus best weakly convex (ζ > 0) test error on noisy,
//! non-separable Gaussian data, for several label-noise levels.
//!
//! cargo run --release --example noise_sweep -- [repeats]

use firmlogit::cv::CvSolver;
use firmlogit::presets::{noise_grid, noise_table, write_noise_csv, NOISE_LEVELS};

fn main() -> firmlogit::Result<()> {
    let repeats = std::env::args().nth(1).map_or(10, |a| a.parse().expect("repeats"));
    let rows = noise_table(&NOISE_LEVELS, &noise_grid(repeats, 77)?, &CvSolver::default())?;
    write_noise_csv(&rows, std::io::stdout().lock()).expect("stdout");
    Ok(())
}
