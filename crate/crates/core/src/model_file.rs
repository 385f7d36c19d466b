//! Human-readable TOML model files.

use std::path::Path;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::ModelVector;
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::solver::{FitResult, SolverConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub penalty: PenaltyKind,
    pub beta: f64,
    pub zeta: f64,
    pub stepsize: String,
    pub accelerated: bool,
    pub iterations: usize,
    pub objective: f64,
    pub converged: bool,
}

/// `θ` plus the preprocessing needed to map raw inputs onto its frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub dimension: usize,
    pub theta: Vec<f64>,
    /// Subtracted from raw features before prediction when `centered`.
    pub center: Vec<f64>,
    pub centered: bool,
    /// Whether the last weight belongs to an appended constant-one feature.
    pub intercept: bool,
    pub training: TrainingInfo,
}

impl ModelFile {
    pub fn from_fit(fit: &FitResult, spec: &PenaltySpec, config: &SolverConfig, data: &Dataset) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            dimension: fit.theta.len(),
            theta: fit.theta.to_vec(),
            center: data.center_vector().to_vec(),
            centered: data.is_centered(),
            intercept: data.has_intercept(),
            training: TrainingInfo {
                penalty: spec.kind,
                beta: spec.beta,
                zeta: spec.zeta,
                stepsize: config.stepsize.to_string(),
                accelerated: config.accelerate,
                iterations: fit.iterations,
                objective: fit.objective,
                converged: fit.converged,
            },
        }
    }

    pub fn theta(&self) -> ModelVector {
        Array1::from(self.theta.clone())
    }

    pub fn spec(&self) -> Result<PenaltySpec> {
        PenaltySpec::new(self.training.penalty, self.training.zeta, self.training.beta)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ModelFile(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let m: ModelFile = toml::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))?;
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::ModelFile(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.theta.len() != self.dimension || self.center.len() != self.dimension {
            return Err(Error::ModelFile(format!(
                "dimension {} disagrees with theta ({}) or center ({}) length",
                self.dimension,
                self.theta.len(),
                self.center.len()
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Maps a raw (uncentered, intercept-free) dataset onto the model frame.
    pub fn prepare(&self, raw: Dataset) -> Result<Dataset> {
        let data = if self.intercept { raw.with_intercept() } else { raw };
        if data.n_features() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: data.n_features(),
            });
        }
        if self.centered {
            data.centered_with(ArrayView1::from(&self.center))
        } else {
            Ok(data)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{fit, Init, initial_point};
    use ndarray::array;

    fn trained() -> (ModelFile, Dataset) {
        let raw = Dataset::new(
            array![[1.0, 2.0], [2.0, 0.5], [0.0, 1.0], [3.0, 3.0]],
            array![1.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let data = raw.clone().with_intercept().centered();
        let spec = PenaltySpec::mcp(0.1, 0.3).unwrap();
        let cfg = SolverConfig::default_constant(&spec, &data);
        let res = fit(&data, &spec, &cfg, initial_point(Init::Zero, 3).view()).unwrap();
        (ModelFile::from_fit(&res, &spec, &cfg, &data), raw)
    }

    #[test]
    fn toml_round_trip_is_exact() {
        let (mut m, _) = trained();
        m.theta[0] = 1.0 / 3.0;
        m.center[1] = -0.0;
        let back = ModelFile::from_toml(&m.to_toml().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.center[1].to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn prepare_reproduces_training_frame() {
        let (m, raw) = trained();
        let frame = m.prepare(raw.clone()).unwrap();
        let direct = raw.with_intercept().centered();
        assert_eq!(frame.features(), direct.features());
    }

    #[test]
    fn rejects_bad_files() {
        let (m, _) = trained();
        let text = m.to_toml().unwrap().replace("format_version = 1", "format_version = 9");
        assert!(matches!(ModelFile::from_toml(&text), Err(Error::ModelFile(_))));
        assert!(ModelFile::from_toml("dimension = 2").is_err());
        let wide = Dataset::new(array![[1.0, 2.0, 3.0]], array![1.0]).unwrap();
        assert!(matches!(m.prepare(wide), Err(Error::DimensionMismatch { .. })));
    }
}
