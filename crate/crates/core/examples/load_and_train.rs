//! Loads a labeled CSV (or LIBSVM-style sparse file with `--sparse`),
//! splits it, trains ℓ1 and MCP models with backtracking, and saves the
//! MCP model as TOML. Without a path a small synthetic CSV is written to a
//! temporary directory first.
//!
//! cargo run --release --example load_and_train -- [path] [--sparse]

use std::path::PathBuf;

use firmlogit::data::{self, CsvOptions, LabelMap, SynthSpec};
use firmlogit::model::error_rate;
use firmlogit::model_file::ModelFile;
use firmlogit::{fit, PenaltySpec, SolverConfig};
use ndarray::Array1;

fn main() -> firmlogit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let sparse = args.iter().any(|a| a == "--sparse");
    let out_dir = std::env::temp_dir().join("firmlogit-example");
    std::fs::create_dir_all(&out_dir).map_err(|e| firmlogit::Error::io(&out_dir, e))?;

    let path = match args.iter().find(|a| !a.starts_with("--")) {
        Some(p) => PathBuf::from(p),
        None => {
            let p = out_dir.join("synthetic.csv");
            let (train, _, _) = data::gen_noisy(&SynthSpec::gaussian(11).with_noise(0.5))?;
            data::save_csv(&train, &p)?;
            p
        }
    };
    let raw = if sparse {
        data::load_sparse_classification_format(&path, &LabelMap::PlusMinusOne, None, false)?
    } else {
        data::load_csv(&path, &CsvOptions::default())?
    };
    println!("# {}: {} samples, {} features", path.display(), raw.n_samples(), raw.n_features());

    let (train, test) = data::train_test_split(&raw, 0.3, 1)?;
    let zero = Array1::zeros(train.n_features());
    for (name, zeta) in [("l1", 0.0), ("mcp", 0.05)] {
        let pen = PenaltySpec::mcp(zeta, 1.0)?;
        let cfg = SolverConfig::default_backtracking(&pen);
        let res = fit(&train, &pen, &cfg, zero.view())?;
        println!(
            "{name}: {} iterations, objective {:.6}, nonzeros {}, test error {:.4}",
            res.iterations,
            res.objective,
            res.theta.iter().filter(|v| **v != 0.0).count(),
            error_rate(res.theta.view(), &test)?
        );
        if zeta > 0.0 {
            let model_path = out_dir.join("model.toml");
            ModelFile::from_fit(&res, &pen, &cfg, &train).save(&model_path)?;
            println!("# saved {}", model_path.display());
        }
    }
    Ok(())
}
