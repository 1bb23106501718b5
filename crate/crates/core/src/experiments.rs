//! Noisy-recall experiments comparing software and hardware networks.
//!
//! A sweep presents every stored pattern, corrupted at each noise rate, to
//! the selected implementations. Trial `t` of cell `(pattern, rate)` draws
//! its corruption from its own stream, so the software and hardware
//! networks see identical inputs and the report does not depend on thread
//! count.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{quantize, recall, train, Dynamics, HardwareConfig, HardwareNetwork, Pattern, SoftwareNetwork};
use crate::rng::{stream, Domain};
use crate::stats::{mann_whitney_u, Alternative, UTestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Implementation {
    Software,
    Hardware,
}

impl Implementation {
    pub fn as_str(self) -> &'static str {
        match self {
            Implementation::Software => "software",
            Implementation::Hardware => "hardware",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// Flip exactly `round(rate * n)` distinct positions.
    #[default]
    Exact,
    /// Flip each position independently with probability `rate`.
    Bernoulli,
}

fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::param("noise_rate", format!("must lie in [0, 1], got {rate}")));
    }
    Ok(())
}

pub fn inject_noise<R: Rng + ?Sized>(p: &Pattern, rate: f64, rng: &mut R) -> Result<Pattern> {
    inject_noise_with(p, rate, NoiseModel::Exact, rng)
}

pub fn inject_noise_with<R: Rng + ?Sized>(p: &Pattern, rate: f64, model: NoiseModel, rng: &mut R) -> Result<Pattern> {
    check_rate(rate)?;
    let mut out = p.clone();
    let n = p.len();
    match model {
        NoiseModel::Exact => {
            let flips = ((rate * n as f64).round() as usize).min(n);
            for idx in sample(rng, n, flips) {
                out.flip(idx);
            }
        }
        NoiseModel::Bernoulli => {
            for idx in 0..n {
                if rng.random_bool(rate) {
                    out.flip(idx);
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of one noisy recall trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub success: bool,
    pub converged: bool,
    pub two_cycle: bool,
    pub iterations: usize,
}

fn run_trial<D: Dynamics + ?Sized>(net: &D, input: &Pattern, target: &Pattern, max_iters: usize) -> Result<TrialOutcome> {
    let r = recall(net, input, max_iters)?;
    Ok(TrialOutcome {
        success: r.converged && r.final_state == *target,
        converged: r.converged,
        two_cycle: r.two_cycle,
        iterations: r.iterations,
    })
}

/// Fraction of trials that converge exactly onto `target`.
pub fn recall_rate<D: Dynamics + ?Sized, R: Rng + ?Sized>(
    net: &D,
    target: &Pattern,
    rate: f64,
    trials: usize,
    max_iters: usize,
    rng: &mut R,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let mut hits = 0usize;
    for _ in 0..trials {
        let input = inject_noise(target, rate, rng)?;
        if run_trial(net, &input, target, max_iters)?.success {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// Default noise axis: 0.00 to 1.00 in steps of 0.05.
pub fn default_noise_rates() -> Vec<f64> {
    (0..=20).map(|k| f64::from(k) / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub patterns: Vec<Pattern>,
    pub noise_rates: Vec<f64>,
    pub trials_per_point: usize,
    pub implementations: Vec<Implementation>,
    pub seed: u64,
    pub max_iters: usize,
    pub zero_diagonal: bool,
    /// Software threshold on `x_j`.
    pub theta: f64,
    pub hardware: HardwareConfig,
    pub noise_model: NoiseModel,
}

impl SweepConfig {
    pub fn new(patterns: Vec<Pattern>) -> Self {
        Self {
            patterns,
            noise_rates: default_noise_rates(),
            trials_per_point: 1000,
            implementations: vec![Implementation::Software, Implementation::Hardware],
            seed: 0,
            max_iters: 100,
            zero_diagonal: true,
            theta: 0.0,
            hardware: HardwareConfig::default(),
            noise_model: NoiseModel::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patterns.is_empty() {
            return Err(Error::NoPatterns);
        }
        if self.trials_per_point == 0 {
            return Err(Error::param("trials_per_point", "must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        if self.implementations.is_empty() {
            return Err(Error::param("implementations", "select at least one"));
        }
        if self.noise_rates.is_empty() {
            return Err(Error::param("noise_rates", "at least one rate required"));
        }
        self.noise_rates.iter().try_for_each(|&r| check_rate(r))?;
        self.hardware.validate()
    }
}

/// Counts for one (implementation, pattern, noise rate) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub implementation: Implementation,
    pub pattern: usize,
    pub noise_rate: f64,
    pub trials: usize,
    pub successes: usize,
    pub converged: usize,
    pub two_cycle: usize,
    pub total_iterations: usize,
}

impl SweepCell {
    pub fn recall_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub pattern: usize,
    pub noise_rate: f64,
    /// `R(hardware) - R(software)`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub implementations: Vec<Implementation>,
    pub noise_rates: Vec<f64>,
    pub n_patterns: usize,
    /// Ordered by implementation, then pattern, then rate.
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn cell(&self, imp: Implementation, pattern: usize, rate_idx: usize) -> Option<&SweepCell> {
        let k = self.implementations.iter().position(|&i| i == imp)?;
        let nr = self.noise_rates.len();
        self.cells.get((k * self.n_patterns + pattern) * nr + rate_idx)
    }

    /// Recall rate along the noise axis for one pattern.
    pub fn curve(&self, imp: Implementation, pattern: usize) -> Option<Vec<f64>> {
        (0..self.noise_rates.len())
            .map(|r| self.cell(imp, pattern, r).map(SweepCell::recall_rate))
            .collect()
    }

    pub fn has(&self, imp: Implementation) -> bool {
        self.implementations.contains(&imp)
    }

    /// Per-cell `R(hardware) - R(software)`; empty unless both ran.
    pub fn delta(&self) -> Vec<DeltaRow> {
        if !(self.has(Implementation::Software) && self.has(Implementation::Hardware)) {
            return Vec::new();
        }
        let mut rows = Vec::new();
        for p in 0..self.n_patterns {
            for (r, &rate) in self.noise_rates.iter().enumerate() {
                let hw = self.cell(Implementation::Hardware, p, r).expect("hardware cell");
                let sw = self.cell(Implementation::Software, p, r).expect("software cell");
                rows.push(DeltaRow {
                    pattern: p,
                    noise_rate: rate,
                    delta: hw.recall_rate() - sw.recall_rate(),
                });
            }
        }
        rows
    }
}

enum Net {
    Software(SoftwareNetwork),
    Hardware(Box<HardwareNetwork>),
}

impl Net {
    fn dynamics(&self) -> &dyn Dynamics {
        match self {
            Net::Software(n) => n,
            Net::Hardware(n) => n.as_ref(),
        }
    }
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let weights = train(&cfg.patterns, cfg.zero_diagonal)?;
    let mut implementations = cfg.implementations.clone();
    implementations.sort();
    implementations.dedup();
    let nets: Vec<Net> = implementations
        .iter()
        .map(|imp| {
            Ok(match imp {
                Implementation::Software => Net::Software(SoftwareNetwork::new(weights.clone(), cfg.theta)),
                Implementation::Hardware => Net::Hardware(Box::new(quantize(&weights, &cfg.hardware)?)),
            })
        })
        .collect::<Result<_>>()?;

    let np = cfg.patterns.len();
    let nr = cfg.noise_rates.len();
    let nt = cfg.trials_per_point;
    let outcomes: Vec<Vec<TrialOutcome>> = (0..np * nr * nt)
        .into_par_iter()
        .map(|flat| {
            let (cell, t) = (flat / nt, flat % nt);
            let (p, r) = (cell / nr, cell % nr);
            let target = &cfg.patterns[p];
            let mut rng = stream(cfg.seed, Domain::Noise, p as u64, r as u64, t as u64);
            let input = inject_noise_with(target, cfg.noise_rates[r], cfg.noise_model, &mut rng)?;
            nets.iter()
                .map(|net| run_trial(net.dynamics(), &input, target, cfg.max_iters))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(implementations.len() * np * nr);
    for (k, &imp) in implementations.iter().enumerate() {
        for p in 0..np {
            for (r, &rate) in cfg.noise_rates.iter().enumerate() {
                let base = (p * nr + r) * nt;
                let mut cell = SweepCell {
                    implementation: imp,
                    pattern: p,
                    noise_rate: rate,
                    trials: nt,
                    successes: 0,
                    converged: 0,
                    two_cycle: 0,
                    total_iterations: 0,
                };
                for o in &outcomes[base..base + nt] {
                    let o = o[k];
                    cell.successes += usize::from(o.success);
                    cell.converged += usize::from(o.converged);
                    cell.two_cycle += usize::from(o.two_cycle);
                    cell.total_iterations += o.iterations;
                }
                cells.push(cell);
            }
        }
    }
    Ok(SweepReport {
        implementations,
        noise_rates: cfg.noise_rates.clone(),
        n_patterns: np,
        cells,
    })
}

/// Inclusive range of noise rates whose cells enter the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for NoiseWindow {
    fn default() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }
}

impl NoiseWindow {
    fn contains(&self, rate: f64) -> bool {
        rate >= self.lo - 1e-9 && rate <= self.hi + 1e-9
    }
}

/// One-sided U test of per-cell recall rates, software first and hardware
/// second, alternative "hardware greater".
pub fn compare_implementations(report: &SweepReport, window: NoiseWindow) -> Result<UTestResult> {
    for imp in [Implementation::Software, Implementation::Hardware] {
        if !report.has(imp) {
            return Err(Error::Config(format!("comparison needs a {} run", imp.as_str())));
        }
    }
    let collect = |imp| -> Vec<f64> {
        (0..report.n_patterns)
            .flat_map(|p| {
                report
                    .noise_rates
                    .iter()
                    .enumerate()
                    .filter(|(_, &rate)| window.contains(rate))
                    .map(move |(r, _)| report.cell(imp, p, r).expect("cell").recall_rate())
            })
            .collect()
    };
    let software = collect(Implementation::Software);
    let hardware = collect(Implementation::Hardware);
    if software.is_empty() {
        return Err(Error::Config(format!("no noise rates inside [{}, {}]", window.lo, window.hi)));
    }
    mann_whitney_u(&software, &hardware, Alternative::Greater)
}

/// Indices of `k` patterns with low mutual overlap.
///
/// The score of a set is the largest, over its members, of the summed
/// absolute overlaps `|p_k . p_l|` with the other members. Starting from each of the
/// `pair_candidates` least-overlapping pairs, the set is grown greedily by
/// the pattern that keeps the score lowest; the best set found wins, ties
/// going to the lexicographically smallest index list.
pub fn select_low_overlap(patterns: &[Pattern], k: usize, pair_candidates: usize) -> Result<Vec<usize>> {
    let n = patterns.len();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("must be in 1..={n}, got {k}")));
    }
    if k == 1 {
        return Ok(vec![0]);
    }
    let dim = patterns[0].len();
    if let Some(p) = patterns.iter().find(|p| p.len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            actual: p.len(),
        });
    }
    let packed: Vec<Vec<u64>> = patterns
        .iter()
        .map(|p| {
            let mut words = vec![0u64; dim.div_ceil(64)];
            for (i, &v) in p.values().iter().enumerate() {
                if v > 0 {
                    words[i / 64] |= 1 << (i % 64);
                }
            }
            words
        })
        .collect();
    let overlap: Vec<i32> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let diff: u32 = packed[i].iter().zip(&packed[j]).map(|(a, b)| (a ^ b).count_ones()).sum();
            (dim as i32 - 2 * diff as i32).abs()
        })
        .collect();
    let ov = |i: usize, j: usize| overlap[i * n + j];

    let mut pairs: Vec<(i32, usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (ov(i, j), i, j))
        .collect();
    let keep = pair_candidates.clamp(1, pairs.len());
    if keep < pairs.len() {
        pairs.select_nth_unstable(keep - 1);
        pairs.truncate(keep);
    }
    pairs.sort_unstable();

    let grown: Vec<(i64, Vec<usize>)> = pairs
        .par_iter()
        .map(|&(_, a, b)| {
            let mut set = vec![a, b];
            let mut sums: Vec<i64> = vec![i64::from(ov(a, b)); 2];
            while set.len() < k {
                let mut best: Option<(i64, usize)> = None;
                for c in 0..n {
                    if set.contains(&c) {
                        continue;
                    }
                    let to_c: i64 = set.iter().map(|&s| i64::from(ov(s, c))).sum();
                    let score = sums
                        .iter()
                        .zip(&set)
                        .map(|(&s, &m)| s + i64::from(ov(m, c)))
                        .max()
                        .unwrap_or(0)
                        .max(to_c);
                    if best.is_none_or(|(b, _)| score < b) {
                        best = Some((score, c));
                    }
                }
                let (_, c) = best.expect("k <= n leaves a candidate");
                for (s, &m) in sums.iter_mut().zip(&set) {
                    *s += i64::from(ov(m, c));
                }
                sums.push(set.iter().map(|&s| i64::from(ov(s, c))).sum());
                set.push(c);
            }
            set.sort_unstable();
            (sums.into_iter().max().unwrap_or(0), set)
        })
        .collect();
    Ok(grown.into_iter().min().expect("at least one pair").1)
}
