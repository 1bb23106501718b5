//! JSON run configuration. Every key is optional; unknown keys are errors.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::{NeuronParams, WeightLevel};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::experiments::{default_noise_rates, select_low_overlap, Implementation, NoiseModel, NoiseWindow, SweepConfig};
use crate::io::idx::{load_idx, DEFAULT_THRESHOLD};
use crate::io::patterns::{load_pattern_set, PatternSet};
use crate::montecarlo::McConfig;
use crate::network::HardwareConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkOptions {
    pub zero_diagonal: bool,
    /// Software threshold on the integer dendritic sum.
    pub theta: f64,
    pub max_iters: usize,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            zero_diagonal: true,
            theta: 0.0,
            max_iters: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextSource {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdxSource {
    pub images: PathBuf,
    #[serde(default = "default_threshold")]
    pub threshold: u8,
    /// Explicit image indices. When absent, `count` low-overlap images are
    /// chosen automatically.
    #[serde(default)]
    pub indices: Option<Vec<usize>>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_pair_candidates")]
    pub pair_candidates: usize,
}

fn default_threshold() -> u8 {
    DEFAULT_THRESHOLD
}

fn default_count() -> usize {
    3
}

fn default_pair_candidates() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase")]
pub enum PatternSource {
    Text(TextSource),
    Idx(IdxSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub noise_rates: Vec<f64>,
    pub trials_per_point: usize,
    pub implementations: Vec<Implementation>,
    pub noise_model: NoiseModel,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            noise_rates: default_noise_rates(),
            trials_per_point: 1000,
            implementations: vec![Implementation::Software, Implementation::Hardware],
            noise_model: NoiseModel::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub n_samples: usize,
    pub levels: Vec<WeightLevel>,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            levels: WeightLevel::positive_levels(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceParams,
    /// Defaults to halfway between nominal `R_P` and `R_AP`.
    pub r_fixed_ohm: Option<f64>,
    pub neuron: NeuronParams,
    pub network: NetworkOptions,
    pub patterns: Option<PatternSource>,
    pub sweep: SweepSection,
    pub mc: McSection,
    pub compare: NoiseWindow,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Directory relative pattern paths resolve against; set by `load`.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.hardware().validate()?;
        if self.network.max_iters == 0 {
            return Err(Error::param("network.max_iters", "must be at least 1"));
        }
        if self.compare.lo > self.compare.hi {
            return Err(Error::param("compare", "lo must not exceed hi"));
        }
        Ok(())
    }

    pub fn hardware(&self) -> HardwareConfig {
        HardwareConfig {
            device: self.device,
            r_fixed_ohm: self.r_fixed_ohm,
            neuron: self.neuron,
        }
    }

    pub fn mc_config(&self) -> McConfig {
        McConfig {
            n_samples: self.mc.n_samples,
            device: self.device,
            r_fixed_ohm: self.r_fixed_ohm,
            levels: self.mc.levels.clone(),
            seed: self.seed,
        }
    }

    pub fn sweep_config(&self, patterns: Vec<crate::network::Pattern>) -> SweepConfig {
        SweepConfig {
            patterns,
            noise_rates: self.sweep.noise_rates.clone(),
            trials_per_point: self.sweep.trials_per_point,
            implementations: self.sweep.implementations.clone(),
            seed: self.seed,
            max_iters: self.network.max_iters,
            zero_diagonal: self.network.zero_diagonal,
            theta: self.network.theta,
            hardware: self.hardware(),
            noise_model: self.sweep.noise_model,
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Load the configured patterns along with their grid shape.
    pub fn load_patterns(&self) -> Result<PatternSet> {
        match &self.patterns {
            None => Err(Error::Config("no `patterns` source configured".into())),
            Some(PatternSource::Text(src)) => load_pattern_set(self.resolve(&src.path)),
            Some(PatternSource::Idx(src)) => {
                let all = load_idx(self.resolve(&src.images), src.threshold)?;
                let indices = match &src.indices {
                    Some(ix) => ix.clone(),
                    None => select_low_overlap(&all.patterns, src.count, src.pair_candidates)?,
                };
                let patterns = indices
                    .iter()
                    .map(|&i| {
                        all.patterns.get(i).cloned().ok_or_else(|| {
                            Error::Config(format!("image index {i} out of range ({} images)", all.patterns.len()))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                if patterns.is_empty() {
                    return Err(Error::NoPatterns);
                }
                Ok(PatternSet {
                    rows: all.rows,
                    cols: all.cols,
                    patterns,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_defaults() {
        let cfg = RunConfig::from_json_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.sweep.noise_rates.len(), 21);
        assert!(cfg.network.zero_diagonal);
    }

    #[test]
    fn misspelled_keys_rejected() {
        for text in [
            r#"{"seeed": 1}"#,
            r#"{"device": {"tmr": 2.0}}"#,
            r#"{"network": {"zero_diag": false}}"#,
            r#"{"sweep": {"trials": 5}}"#,
            r#"{"patterns": {"format": "text", "path": "x", "pth": "y"}}"#,
            r#"{"patterns": {"format": "idx", "images": "x", "treshold": 3}}"#,
        ] {
            assert!(RunConfig::from_json_str(text).is_err(), "{text}");
        }
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig {
            seed: 42,
            patterns: Some(PatternSource::Idx(IdxSource {
                images: "imgs".into(),
                threshold: 100,
                indices: Some(vec![1, 2]),
                count: 2,
                pair_candidates: 10,
            })),
            ..Default::default()
        };
        let back = RunConfig::from_json_str(&cfg.to_json_pretty()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::from_json_str(r#"{"r_fixed_ohm": -5}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"network": {"max_iters": 0}}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"compare": {"lo": 0.5, "hi": 0.1}}"#).is_err());
    }

    #[test]
    fn relative_paths_follow_config_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("p.txt"), "#.\n.#\n").unwrap();
        let cfg_path = dir.path().join("c.json");
        fs::write(&cfg_path, r#"{"patterns": {"format": "text", "path": "p.txt"}}"#).unwrap();
        let set = RunConfig::load(&cfg_path).unwrap().load_patterns().unwrap();
        assert_eq!(set.patterns.len(), 1);
    }
}
