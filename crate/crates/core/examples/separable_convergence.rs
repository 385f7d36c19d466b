//! Proximal gradient on rank-deficient separable data (d = 50, N = 1000,
//! latent dimension 45) with β = 1.2, ζ = 0.1 and constant stepsizes 1, 2
//! and 4. Prints the objective every 250 iterations and compares the
//! normalized estimates with the normalized ground truth.
//!
//! cargo run --release --example separable_convergence -- [seed] [--accelerate]

use firmlogit::presets::{subspace_runs, SUBSPACE_ITERS, SUBSPACE_STEPSIZES};
use firmlogit::solver::max_constant_stepsize;
use firmlogit::{ModelVector, PenaltySpec};

fn unit(v: &ModelVector) -> ModelVector {
    v / v.dot(v).sqrt().max(f64::MIN_POSITIVE)
}

fn main() -> firmlogit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let accelerate = args.iter().any(|a| a == "--accelerate");
    let seed = args.iter().find_map(|a| a.parse().ok()).unwrap_or(1);

    let runs = subspace_runs(seed, accelerate, &SUBSPACE_STEPSIZES, SUBSPACE_ITERS)?;
    let spec = PenaltySpec::mcp(0.1, 1.2)?;
    println!(
        "# ||X|| = {:.6}, admissible constant stepsizes: alpha < {:.4}",
        runs.data.operator_norm(),
        max_constant_stepsize(&spec, &runs.data)
    );
    println!("iter,{}", SUBSPACE_STEPSIZES.map(|a| format!("alpha_{a}")).join(","));
    for k in (0..=SUBSPACE_ITERS).step_by(250) {
        let row: Vec<String> = runs
            .runs
            .iter()
            .map(|(_, r)| r.trace.get(k).map_or(String::new(), |t| t.objective.to_string()))
            .collect();
        println!("{k},{}", row.join(","));
    }

    let truth = unit(&runs.theta0);
    let support = |v: &ModelVector| v.iter().filter(|x| x.abs() > 1e-6).count();
    println!("# ground truth has {} nonzeros", support(&runs.theta0));
    for (alpha, r) in &runs.runs {
        let est = unit(&r.theta);
        println!(
            "# alpha {alpha}: cosine with truth {:.4}, nonzeros {}, ||theta|| {:.2}",
            est.dot(&truth),
            support(&r.theta),
            r.theta.dot(&r.theta).sqrt()
        );
    }
    println!(
        "# l1 reference: cosine with truth {:.4}, nonzeros {}",
        unit(&runs.l1.theta).dot(&truth),
        support(&runs.l1.theta)
    );
    Ok(())
}
