//! Iterations needed by plain and Nesterov-accelerated proximal gradient to
//! bring the objective within a relative gap of the best value reached, on
//! the rank-deficient separable instance.
//!
//! cargo run --release --example accelerated -- [seed] [rel_gap]

use firmlogit::presets::{acceleration_benchmark, write_bench_csv, SUBSPACE_ITERS, SUBSPACE_STEPSIZES};

fn main() -> firmlogit::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map_or(1, |a| a.parse().expect("seed"));
    let rel_gap = args.next().map_or(1e-3, |a| a.parse().expect("rel_gap"));
    let rows = acceleration_benchmark(seed, &SUBSPACE_STEPSIZES, SUBSPACE_ITERS, rel_gap)?;
    write_bench_csv(&rows, std::io::stdout().lock()).expect("stdout");
    Ok(())
}
