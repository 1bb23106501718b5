//! Synapse output spread under device process variation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Synapse, WeightLevel};
use crate::device::{DeviceParams, MtjInstance, MtjState};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n_samples: usize,
    pub device: DeviceParams,
    /// Defaults to halfway between nominal `R_P` and `R_AP`. Not varied.
    pub r_fixed_ohm: Option<f64>,
    pub levels: Vec<WeightLevel>,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            device: DeviceParams::default(),
            r_fixed_ohm: None,
            levels: WeightLevel::positive_levels(),
            seed: 0,
        }
    }
}

impl McConfig {
    pub fn r_fixed(&self) -> f64 {
        self.r_fixed_ohm
            .unwrap_or_else(|| self.device.midpoint_r_fixed_ohm())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::param("n_samples", "must be at least 1"));
        }
        if self.levels.is_empty() {
            return Err(Error::param("levels", "at least one level required"));
        }
        self.device.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub level: WeightLevel,
    pub samples: Vec<f64>,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

impl LevelStats {
    fn from_samples(level: WeightLevel, samples: Vec<f64>) -> Self {
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        Self {
            level,
            q1: quantile_sorted(&sorted, 0.25),
            median: quantile_sorted(&sorted, 0.5),
            q3: quantile_sorted(&sorted, 0.75),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub levels: Vec<LevelStats>,
}

/// Quantile by linear interpolation between order statistics; `sorted` must
/// be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One varied synapse at `level`: four independently sampled weight devices.
fn sample_fraction(cfg: &McConfig, base: &Synapse, level_idx: usize, sample_idx: usize) -> f64 {
    let mut rng = stream(cfg.seed, Domain::WeightMc, level_idx as u64, sample_idx as u64, 0);
    let mut syn = *base;
    for m in syn.weight_mtjs.iter_mut() {
        *m = MtjInstance::sample(&cfg.device, MtjState::P, &mut rng);
    }
    syn.program(cfg.levels[level_idx]).divider_fraction()
}

pub fn run_weight_mc(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let base = Synapse::nominal(&cfg.device, cfg.r_fixed())?;
    let levels = (0..cfg.levels.len())
        .map(|li| {
            let samples: Vec<f64> = (0..cfg.n_samples)
                .into_par_iter()
                .map(|si| sample_fraction(cfg, &base, li, si))
                .collect();
            LevelStats::from_samples(cfg.levels[li], samples)
        })
        .collect();
    Ok(McReport { levels })
}

/// `q1(k+1) - q3(k)` for each adjacent pair; positive means the
/// interquartile ranges are disjoint.
pub fn iqr_separation(report: &McReport) -> Vec<f64> {
    report
        .levels
        .windows(2)
        .map(|w| w[1].q1 - w[0].q3)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> McConfig {
        McConfig {
            n_samples: 400,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 0.25), 1.75);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn zero_sigma_is_degenerate() {
        let cfg = McConfig {
            n_samples: 20,
            device: DeviceParams::default().without_variation(),
            ..Default::default()
        };
        let report = run_weight_mc(&cfg).unwrap();
        let base = Synapse::nominal(&cfg.device, cfg.r_fixed()).unwrap();
        for stats in &report.levels {
            let nominal = base.program(stats.level).divider_fraction();
            assert!(stats.samples.iter().all(|&s| s == nominal));
        }
        let margins = iqr_separation(&report);
        // differences of the nodal-oracle level fractions
        let want = [0.073_149_128_746_873_1, 0.118_684_461_391_801_8, 0.048_957_923_712_151_1, 0.059_586_104_186_715_6];
        for (got, want) in margins.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        for (got, listed) in margins.iter().zip([0.0732, 0.1187, 0.0490, 0.0596]) {
            assert!((got - listed).abs() < 5e-4);
        }
    }

    #[test]
    fn level_two_median_near_half() {
        let report = run_weight_mc(&small(3)).unwrap();
        assert!((report.levels[2].median - 0.5).abs() < 0.01);
    }

    #[test]
    fn medians_increase_and_quartiles_ordered() {
        let report = run_weight_mc(&small(4)).unwrap();
        for s in &report.levels {
            assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
            assert!(s.samples.iter().all(|&x| x > 0.0 && x < 1.0));
        }
        assert!(report.levels.windows(2).all(|w| w[0].median < w[1].median));
        assert!(iqr_separation(&report).iter().all(|&m| m > 0.0));
    }

    #[test]
    fn single_level_has_no_margins() {
        let cfg = McConfig {
            n_samples: 10,
            levels: vec![WeightLevel::positive_levels()[1]],
            ..Default::default()
        };
        assert!(iqr_separation(&run_weight_mc(&cfg).unwrap()).is_empty());
    }

    #[test]
    fn reproducible_across_pools() {
        let cfg = small(9);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_weight_mc(&cfg)).unwrap();
        let b = many.install(|| run_weight_mc(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_zero_samples() {
        let cfg = McConfig {
            n_samples: 0,
            ..Default::default()
        };
        assert!(run_weight_mc(&cfg).is_err());
    }
}
