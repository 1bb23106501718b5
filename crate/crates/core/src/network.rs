//! Hopfield network: Hebbian training, hardware quantization and recall.
//!
//! Two interchangeable dynamics share one recall loop:
//! [`SoftwareNetwork`] evaluates `x_j = sum_i w_ij y_i` on integer weights,
//! [`HardwareNetwork`] pushes the same state through converter, synapse
//! divider and comparator for every connection. Both update all neurons
//! synchronously.

use serde::{Deserialize, Serialize};

use crate::circuit::{convert, neuron_fire_at, NeuronParams, Sign, Synapse, WeightLevel};
use crate::device::DeviceParams;
use crate::error::{Error, Result};

/// Bipolar state vector, every entry `-1` or `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern(Vec<i8>);

impl Pattern {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::param(
                "pattern",
                format!("entry {pos} is {}, expected -1 or +1", values[pos]),
            ));
        }
        Ok(Self(values))
    }

    /// Bit `true` maps to `+1`.
    pub fn from_bits(bits: &[bool]) -> Self {
        Self(bits.iter().map(|&b| if b { 1 } else { -1 }).collect())
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.0.iter().map(|&v| v > 0).collect()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[must_use]
    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    /// Flip the sign at `index`.
    pub fn flip(&mut self, index: usize) {
        self.0[index] = -self.0[index];
    }

    pub fn hamming(&self, other: &Pattern) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Inner product with `other`.
    pub fn dot(&self, other: &Pattern) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| i64::from(a) * i64::from(b))
            .sum()
    }
}

/// Symmetric integer Hebbian weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMatrix {
    n: usize,
    m: usize,
    zero_diagonal: bool,
    w: Vec<i32>,
}

impl WeightMatrix {
    /// Build from row-major entries, checking every invariant.
    pub fn from_parts(n: usize, m: usize, zero_diagonal: bool, w: Vec<i32>) -> Result<Self> {
        if w.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                actual: w.len(),
            });
        }
        let bound = i32::try_from(m).map_err(|_| Error::param("m", "too large"))?;
        for i in 0..n {
            for j in 0..n {
                let v = w[i * n + j];
                if v != w[j * n + i] {
                    return Err(Error::param("weights", format!("not symmetric at ({i}, {j})")));
                }
                if v.abs() > bound {
                    return Err(Error::param("weights", format!("|w[{i}][{j}]| = {} exceeds m = {m}", v.abs())));
                }
            }
            if zero_diagonal && w[i * n + i] != 0 {
                return Err(Error::param("weights", format!("diagonal entry {i} is nonzero")));
            }
        }
        Ok(Self {
            n,
            m,
            zero_diagonal,
            w,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored patterns.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn zero_diagonal(&self) -> bool {
        self.zero_diagonal
    }

    pub fn get(&self, i: usize, j: usize) -> i32 {
        self.w[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[i32] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[i32] {
        &self.w
    }

    pub fn max_abs(&self) -> u32 {
        self.w.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }
}

/// Hebbian learning: `W = sum_k P_k P_k^T`, diagonal optionally zeroed.
pub fn train(patterns: &[Pattern], zero_diagonal: bool) -> Result<WeightMatrix> {
    let first = patterns.first().ok_or(Error::NoPatterns)?;
    let n = first.len();
    if n == 0 {
        return Err(Error::param("pattern", "empty pattern"));
    }
    for p in patterns {
        if p.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: p.len(),
            });
        }
    }
    let mut w = vec![0i32; n * n];
    for p in patterns {
        let v = p.values();
        for i in 0..n {
            let row = &mut w[i * n..(i + 1) * n];
            let vi = i32::from(v[i]);
            for (wij, &vj) in row.iter_mut().zip(v) {
                *wij += vi * i32::from(vj);
            }
        }
    }
    if zero_diagonal {
        for i in 0..n {
            w[i * n + i] = 0;
        }
    }
    WeightMatrix::from_parts(n, patterns.len(), zero_diagonal, w)
}

/// Maps an integer weight onto a hardware level.
///
/// Zero is disconnected. Nonzero magnitudes in `[1, w_max]` are rescaled
/// linearly onto levels 0..=4 and rounded half away from zero; if
/// `w_max <= 1` every nonzero weight gets level 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizationMap {
    pub w_max: u32,
}

impl QuantizationMap {
    pub fn for_matrix(w: &WeightMatrix) -> Self {
        Self { w_max: w.max_abs() }
    }

    pub fn map(&self, w: i32) -> Option<WeightLevel> {
        if w == 0 {
            return None;
        }
        let sign = if w > 0 { Sign::Positive } else { Sign::Negative };
        let level = if self.w_max <= 1 {
            WeightLevel::MAX_LEVEL
        } else {
            let mag = f64::from(w.unsigned_abs().min(self.w_max));
            let scaled = 4.0 * (mag - 1.0) / (f64::from(self.w_max) - 1.0);
            scaled.round() as u8
        };
        Some(WeightLevel::new(level, sign).expect("level within 0..=4"))
    }
}

/// Electrical settings used when realizing weights in hardware.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareConfig {
    pub device: DeviceParams,
    /// Defaults to halfway between nominal `R_P` and `R_AP`.
    pub r_fixed_ohm: Option<f64>,
    pub neuron: NeuronParams,
}

impl HardwareConfig {
    pub fn r_fixed(&self) -> f64 {
        self.r_fixed_ohm
            .unwrap_or_else(|| self.device.midpoint_r_fixed_ohm())
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.neuron.validate()?;
        let r = self.r_fixed();
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::param("r_fixed_ohm", format!("must be finite and > 0, got {r}")));
        }
        Ok(())
    }
}

/// An n x n grid of programmed synapses feeding n threshold neurons.
///
/// Alongside the devices the network keeps what the sense path reads once
/// after programming: each synapse's divider fraction and sign bit, laid out
/// column-major so one neuron's inputs are contiguous.
#[derive(Debug, Clone)]
pub struct HardwareNetwork {
    n: usize,
    synapses: Vec<Synapse>,
    disconnected: Vec<bool>,
    intended: Vec<Option<WeightLevel>>,
    neuron_params: NeuronParams,
    quantization: QuantizationMap,
    col_fraction: Vec<f64>,
    col_sign: Vec<bool>,
    col_connected: Vec<bool>,
}

impl HardwareNetwork {
    /// Program nominal devices from integer weights.
    pub fn from_weights(w: &WeightMatrix, cfg: &HardwareConfig) -> Result<Self> {
        cfg.validate()?;
        let n = w.n();
        let quantization = QuantizationMap::for_matrix(w);
        let blank = Synapse::nominal(&cfg.device, cfg.r_fixed())?;
        let mut synapses = Vec::with_capacity(n * n);
        let mut disconnected = Vec::with_capacity(n * n);
        let mut intended = Vec::with_capacity(n * n);
        for &wij in w.entries() {
            let level = quantization.map(wij);
            synapses.push(match level {
                Some(l) => blank.program(l),
                None => blank,
            });
            disconnected.push(level.is_none());
            intended.push(level);
        }
        let mut net = Self {
            n,
            synapses,
            disconnected,
            intended,
            neuron_params: cfg.neuron,
            quantization,
            col_fraction: Vec::new(),
            col_sign: Vec::new(),
            col_connected: Vec::new(),
        };
        net.read_out();
        Ok(net)
    }

    fn read_out(&mut self) {
        let n = self.n;
        self.col_fraction = vec![0.0; n * n];
        self.col_sign = vec![false; n * n];
        self.col_connected = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                let syn = &self.synapses[i * n + j];
                let c = j * n + i;
                self.col_fraction[c] = syn.divider_fraction();
                self.col_sign[c] = syn.read_sign();
                self.col_connected[c] = !self.disconnected[i * n + j];
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Synapse `S_ij`, connecting presynaptic neuron `i` to neuron `j`.
    pub fn synapse(&self, i: usize, j: usize) -> &Synapse {
        &self.synapses[i * self.n + j]
    }

    pub fn is_connected(&self, i: usize, j: usize) -> bool {
        !self.disconnected[i * self.n + j]
    }

    pub fn intended_level(&self, i: usize, j: usize) -> Option<WeightLevel> {
        self.intended[i * self.n + j]
    }

    pub fn neuron_params(&self) -> &NeuronParams {
        &self.neuron_params
    }

    pub fn quantization(&self) -> QuantizationMap {
        self.quantization
    }

    /// Check that every connected synapse reads back its intended level.
    pub fn verify_readback(&self) -> Result<()> {
        for (idx, (syn, want)) in self.synapses.iter().zip(&self.intended).enumerate() {
            if let Some(want) = want {
                if syn.read_level() != Some(*want) {
                    return Err(Error::param(
                        "synapse",
                        format!("({}, {}) reads back {:?}, intended {want:?}", idx / self.n, idx % self.n, syn.read_level()),
                    ));
                }
            }
        }
        Ok(())
    }

    /// One synchronous update on binary neuron outputs.
    pub fn step_bits(&self, y_bits: &[bool]) -> Result<Vec<bool>> {
        let n = self.n;
        if y_bits.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: y_bits.len(),
            });
        }
        let mut psps = Vec::with_capacity(n);
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let col = j * n..(j + 1) * n;
            psps.clear();
            for (((&bit, &conn), &sign), &frac) in y_bits
                .iter()
                .zip(&self.col_connected[col.clone()])
                .zip(&self.col_sign[col.clone()])
                .zip(&self.col_fraction[col])
            {
                if conn {
                    psps.push(frac * convert(bit, sign).volts());
                }
            }
            out.push(neuron_fire_at(&psps, &self.neuron_params, j)?);
        }
        Ok(out)
    }
}

pub fn quantize(w: &WeightMatrix, cfg: &HardwareConfig) -> Result<HardwareNetwork> {
    HardwareNetwork::from_weights(w, cfg)
}

pub fn step_hardware(net: &HardwareNetwork, y_bits: &[bool]) -> Result<Vec<bool>> {
    net.step_bits(y_bits)
}

/// One synchronous update: `y'_j = +1` iff `sum_i w_ij y_i >= theta`.
pub fn step_software(w: &WeightMatrix, y: &Pattern, theta: f64) -> Result<Pattern> {
    let n = w.n();
    if y.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: y.len(),
        });
    }
    // symmetric, so column j equals row j
    let out = (0..n)
        .map(|j| {
            let x: i64 = w
                .row(j)
                .iter()
                .zip(y.values())
                .map(|(&wij, &yi)| i64::from(wij) * i64::from(yi))
                .sum();
            if x as f64 >= theta {
                1
            } else {
                -1
            }
        })
        .collect();
    Ok(Pattern(out))
}

/// Anything that can advance a bipolar state by one synchronous step.
pub trait Dynamics: Sync {
    fn dim(&self) -> usize;
    fn step(&self, state: &Pattern) -> Result<Pattern>;
}

#[derive(Debug, Clone)]
pub struct SoftwareNetwork {
    pub weights: WeightMatrix,
    pub theta: f64,
}

impl SoftwareNetwork {
    pub fn new(weights: WeightMatrix, theta: f64) -> Self {
        Self { weights, theta }
    }
}

impl Dynamics for SoftwareNetwork {
    fn dim(&self) -> usize {
        self.weights.n()
    }

    fn step(&self, state: &Pattern) -> Result<Pattern> {
        step_software(&self.weights, state, self.theta)
    }
}

impl Dynamics for HardwareNetwork {
    fn dim(&self) -> usize {
        self.n
    }

    fn step(&self, state: &Pattern) -> Result<Pattern> {
        Ok(Pattern::from_bits(&self.step_bits(&state.to_bits())?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecallResult {
    pub final_state: Pattern,
    pub iterations: usize,
    pub converged: bool,
    pub two_cycle: bool,
}

/// Iterate until a fixed point, a period-2 cycle, or `max_iters` steps.
pub fn recall<D: Dynamics + ?Sized>(net: &D, y0: &Pattern, max_iters: usize) -> Result<RecallResult> {
    if max_iters == 0 {
        return Err(Error::param("max_iters", "must be at least 1"));
    }
    if y0.len() != net.dim() {
        return Err(Error::Dimension {
            expected: net.dim(),
            actual: y0.len(),
        });
    }
    let mut prev: Option<Pattern> = None;
    let mut cur = y0.clone();
    for it in 1..=max_iters {
        let next = net.step(&cur)?;
        if next == cur {
            return Ok(RecallResult {
                final_state: next,
                iterations: it,
                converged: true,
                two_cycle: false,
            });
        }
        if prev.as_ref() == Some(&next) {
            return Ok(RecallResult {
                final_state: next,
                iterations: it,
                converged: false,
                two_cycle: true,
            });
        }
        prev = Some(std::mem::replace(&mut cur, next));
    }
    Ok(RecallResult {
        final_state: cur,
        iterations: max_iters,
        converged: false,
        two_cycle: false,
    })
}
