//! Voltage converter, five-MTJ synapse and threshold neuron.
//!
//! All voltages are normalized to a supply of 1 V. The synapse is a divider:
//! the converter output drives `R_fixed`, which feeds two parallel branches of
//! two series MTJs each (`R1`-`R3` and `R2`-`R4`) returning to ground. The
//! postsynaptic potential is the voltage across the MTJ network.

use serde::{Deserialize, Serialize};

use crate::device::{DeviceParams, MtjInstance, MtjState};
use crate::error::{Error, Result};

/// Converter output, `-V_DD` or `+V_DD` with `V_DD = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BipolarVolt {
    Negative,
    Positive,
}

impl BipolarVolt {
    pub fn volts(self) -> f64 {
        match self {
            BipolarVolt::Negative => -1.0,
            BipolarVolt::Positive => 1.0,
        }
    }

    #[must_use]
    pub fn negate(self) -> Self {
        match self {
            BipolarVolt::Negative => BipolarVolt::Positive,
            BipolarVolt::Positive => BipolarVolt::Negative,
        }
    }
}

/// Binary-to-bipolar conversion: `+1` iff exactly one input is high.
///
/// `v_ws` is the sign bit read from the synapse (0 = positive weight), so an
/// active presynaptic neuron through a positive synapse yields `+1`.
pub fn convert(v_in: bool, v_ws: bool) -> BipolarVolt {
    if v_in ^ v_ws {
        BipolarVolt::Positive
    } else {
        BipolarVolt::Negative
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

/// One of the five canonical 2x2 configurations plus a sign.
///
/// `level` counts the AP devices in the weight matrix: 0 is `4R_P`, 4 is
/// `4R_AP`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawWeightLevel")]
pub struct WeightLevel {
    level: u8,
    pub sign: Sign,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeightLevel {
    level: u8,
    sign: Sign,
}

impl TryFrom<RawWeightLevel> for WeightLevel {
    type Error = Error;

    fn try_from(raw: RawWeightLevel) -> Result<Self> {
        WeightLevel::new(raw.level, raw.sign)
    }
}

impl WeightLevel {
    pub const MAX_LEVEL: u8 = 4;

    pub fn new(level: u8, sign: Sign) -> Result<Self> {
        if level > Self::MAX_LEVEL {
            return Err(Error::param("level", format!("must be 0..=4, got {level}")));
        }
        Ok(Self { level, sign })
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    /// All ten (level, sign) combinations.
    pub fn all() -> impl Iterator<Item = WeightLevel> {
        [Sign::Positive, Sign::Negative].into_iter().flat_map(|sign| {
            (0..=Self::MAX_LEVEL).map(move |level| WeightLevel { level, sign })
        })
    }

    /// The five positive levels, 0 through 4.
    pub fn positive_levels() -> Vec<WeightLevel> {
        (0..=Self::MAX_LEVEL)
            .map(|level| WeightLevel {
                level,
                sign: Sign::Positive,
            })
            .collect()
    }

    /// Device states for R1..R4. AP is filled in index order so that level 2
    /// puts one AP device in each branch.
    pub fn canonical_states(&self) -> [MtjState; 4] {
        std::array::from_fn(|k| {
            if k < self.level as usize {
                MtjState::AP
            } else {
                MtjState::P
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synapse {
    /// R1, R2, R3, R4. R1 and R3 share one branch, R2 and R4 the other.
    pub weight_mtjs: [MtjInstance; 4],
    pub sign_mtj: MtjInstance,
    pub r_fixed_ohm: f64,
}

impl Synapse {
    pub fn new(weight_mtjs: [MtjInstance; 4], sign_mtj: MtjInstance, r_fixed_ohm: f64) -> Result<Self> {
        if !(r_fixed_ohm.is_finite() && r_fixed_ohm > 0.0) {
            return Err(Error::param("r_fixed_ohm", format!("must be finite and > 0, got {r_fixed_ohm}")));
        }
        Ok(Self {
            weight_mtjs,
            sign_mtj,
            r_fixed_ohm,
        })
    }

    /// All five devices nominal and in P (level 0, positive).
    pub fn nominal(params: &DeviceParams, r_fixed_ohm: f64) -> Result<Self> {
        let p = MtjInstance::nominal(params, MtjState::P);
        Self::new([p; 4], p, r_fixed_ohm)
    }

    pub fn resistances(&self) -> [f64; 4] {
        self.weight_mtjs.map(|m| m.resistance())
    }

    pub fn divider_fraction(&self) -> f64 {
        let [r1, r2, r3, r4] = self.resistances();
        let prod = (r1 + r3) * (r2 + r4);
        prod / (self.r_fixed_ohm * (r1 + r2 + r3 + r4) + prod)
    }

    pub fn psp(&self, v_conv: BipolarVolt) -> f64 {
        self.divider_fraction() * v_conv.volts()
    }

    /// Functional configuration mode: write the canonical states for `w`.
    #[must_use]
    pub fn program(&self, w: WeightLevel) -> Self {
        let states = w.canonical_states();
        let mut out = *self;
        for (mtj, state) in out.weight_mtjs.iter_mut().zip(states) {
            *mtj = mtj.with_state(state);
        }
        out.sign_mtj = out.sign_mtj.with_state(match w.sign {
            Sign::Positive => MtjState::P,
            Sign::Negative => MtjState::AP,
        });
        out
    }

    /// Sense-amplifier read of the sign device: `false` for positive.
    pub fn read_sign(&self) -> bool {
        self.sign_mtj.state == MtjState::AP
    }

    /// Recover the programmed level from the device states.
    ///
    /// Returns `None` if the weight devices are not in a canonical
    /// configuration.
    pub fn read_level(&self) -> Option<WeightLevel> {
        let ap = self
            .weight_mtjs
            .iter()
            .filter(|m| m.state == MtjState::AP)
            .count() as u8;
        let sign = if self.read_sign() {
            Sign::Negative
        } else {
            Sign::Positive
        };
        let w = WeightLevel { level: ap, sign };
        let states = self.weight_mtjs.map(|m| m.state);
        (states == w.canonical_states()).then_some(w)
    }
}

pub fn divider_fraction(syn: &Synapse) -> f64 {
    syn.divider_fraction()
}

pub fn psp(syn: &Synapse, v_conv: BipolarVolt) -> f64 {
    syn.psp(v_conv)
}

pub fn program_weight(syn: &Synapse, w: WeightLevel) -> Synapse {
    syn.program(w)
}

pub fn read_sign(syn: &Synapse) -> bool {
    syn.read_sign()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdderMode {
    #[default]
    Sum,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuronParams {
    pub v_ref: f64,
    pub adder_mode: AdderMode,
}

impl Default for NeuronParams {
    fn default() -> Self {
        Self {
            v_ref: 0.0,
            adder_mode: AdderMode::Sum,
        }
    }
}

impl NeuronParams {
    pub fn validate(&self) -> Result<()> {
        if !self.v_ref.is_finite() {
            return Err(Error::param("v_ref", "must be finite"));
        }
        Ok(())
    }
}

/// Comparator against `v_ref`; a tie fires.
///
/// `neuron` only labels the error for an empty input.
pub fn neuron_fire_at(psps: &[f64], params: &NeuronParams, neuron: usize) -> Result<bool> {
    if psps.is_empty() {
        return Err(Error::DisconnectedNeuron { neuron });
    }
    let sum: f64 = psps.iter().sum();
    let s = match params.adder_mode {
        AdderMode::Sum => sum,
        AdderMode::Average => sum / psps.len() as f64,
    };
    Ok(s >= params.v_ref)
}

pub fn neuron_fire(psps: &[f64], params: &NeuronParams) -> Result<bool> {
    neuron_fire_at(psps, params, 0)
}
