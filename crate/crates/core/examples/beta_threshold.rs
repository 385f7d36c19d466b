//! On centered data, θ = 0 stops being critical once β drops below
//! ‖Σ_{y=1} x‖_∞. Sweeps β across that threshold and reports, for each
//! value, whether 0 is critical and what a solver started at 0 returns.
//!
//! cargo run --example beta_threshold -- [seed]

use firmlogit::certify::{beta_threshold, check_critical_point, ThresholdRegime};
use firmlogit::data::{gen_noisy, SynthSpec};
use firmlogit::{fit, PenaltySpec, SolverConfig};
use ndarray::Array1;

fn main() -> firmlogit::Result<()> {
    let seed = std::env::args().nth(1).map_or(5, |a| a.parse().expect("seed"));
    let spec = SynthSpec {
        d: 20,
        n_train: 100,
        ..SynthSpec::gaussian(seed).with_noise(0.5)
    };
    let data = gen_noisy(&spec)?.0.centered();
    let zeta = 0.05;
    let thr = beta_threshold(&data, &PenaltySpec::mcp(zeta, 1.0)?)?;
    println!("# threshold {thr:.6}");
    println!("ratio,beta,regime,zero_critical,nonzeros,objective");
    for ratio in [0.5, 0.9, 0.99, 1.0, 1.01, 1.1, 2.0] {
        let pen = PenaltySpec::mcp(zeta, ratio * thr)?;
        let zero = Array1::zeros(data.n_features());
        let critical = check_critical_point(zero.view(), &pen, &data, 0.0)?;
        let res = fit(&data, &pen, &SolverConfig::default_constant(&pen, &data), zero.view())?;
        println!(
            "{ratio},{},{},{critical},{},{}",
            pen.beta,
            ThresholdRegime::classify(pen.beta, thr).as_str(),
            res.theta.iter().filter(|v| **v != 0.0).count(),
            res.objective
        );
    }
    Ok(())
}
