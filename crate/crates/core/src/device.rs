//! Behavioral magnetic tunnel junction model.
//!
//! An MTJ is a two-state resistor. The parallel (P) state is the low
//! resistance `R_P`; the antiparallel (AP) state is `R_P * (1 + TMR)`.
//! Process variation perturbs tunnel-barrier thickness, free-layer thickness
//! and TMR with independent Gaussians. Barrier thickness enters the
//! resistance through `R_P = R_P0 * exp(beta * (t_tb - t_tb0))`; free-layer
//! thickness is recorded but has no electrical effect here.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Device geometry, TMR and their process-variation sigmas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    pub t_fl_nm: f64,
    pub sigma_t_fl_nm: f64,
    pub cd_nm: f64,
    pub t_tb_nm: f64,
    pub sigma_t_tb_nm: f64,
    pub tmr_ratio: f64,
    pub sigma_tmr: f64,
    pub r_p_nominal_ohm: f64,
    pub barrier_sensitivity_per_nm: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            t_fl_nm: 1.3,
            sigma_t_fl_nm: 0.03 * 1.3,
            cd_nm: 32.0,
            t_tb_nm: 0.85,
            sigma_t_tb_nm: 0.03 * 0.85,
            tmr_ratio: 2.49,
            sigma_tmr: 0.03 * 2.49,
            r_p_nominal_ohm: 1000.0,
            barrier_sensitivity_per_nm: 2.0,
        }
    }
}

impl DeviceParams {
    /// Same nominals, every sigma set to zero.
    pub fn without_variation(self) -> Self {
        Self {
            sigma_t_fl_nm: 0.0,
            sigma_t_tb_nm: 0.0,
            sigma_tmr: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_fl_nm", self.t_fl_nm),
            ("cd_nm", self.cd_nm),
            ("t_tb_nm", self.t_tb_nm),
            ("tmr_ratio", self.tmr_ratio),
            ("r_p_nominal_ohm", self.r_p_nominal_ohm),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        let non_negative = [
            ("sigma_t_fl_nm", self.sigma_t_fl_nm),
            ("sigma_t_tb_nm", self.sigma_t_tb_nm),
            ("sigma_tmr", self.sigma_tmr),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !self.barrier_sensitivity_per_nm.is_finite() {
            return Err(Error::param(
                "barrier_sensitivity_per_nm",
                "must be finite",
            ));
        }
        Ok(())
    }

    /// Nominal AP-state resistance, `R_P0 * (1 + TMR)`.
    pub fn r_ap_nominal_ohm(&self) -> f64 {
        self.r_p_nominal_ohm * (1.0 + self.tmr_ratio)
    }

    /// Fixed divider resistor halfway between the nominal P and AP resistances.
    pub fn midpoint_r_fixed_ohm(&self) -> f64 {
        0.5 * (self.r_p_nominal_ohm + self.r_ap_nominal_ohm())
    }
}

/// Magnetic state. P is logic 0, AP is logic 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MtjState {
    P,
    AP,
}

impl MtjState {
    pub fn bit(self) -> u8 {
        match self {
            MtjState::P => 0,
            MtjState::AP => 1,
        }
    }
}

/// One physical device: its sampled parameters plus its current state.
///
/// `R_AP` is never stored; it is always derived from `r_p_ohm` and
/// `tmr_ratio`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MtjInstance {
    pub state: MtjState,
    pub t_tb_nm: f64,
    pub t_fl_nm: f64,
    pub tmr_ratio: f64,
    pub r_p_ohm: f64,
}

impl MtjInstance {
    /// A device at exactly the nominal parameters.
    pub fn nominal(params: &DeviceParams, state: MtjState) -> Self {
        Self {
            state,
            t_tb_nm: params.t_tb_nm,
            t_fl_nm: params.t_fl_nm,
            tmr_ratio: params.tmr_ratio,
            r_p_ohm: params.r_p_nominal_ohm,
        }
    }

    /// A device drawn under process variation.
    ///
    /// Each Gaussian draw that comes out non-positive is redrawn.
    pub fn sample<R: Rng + ?Sized>(params: &DeviceParams, state: MtjState, rng: &mut R) -> Self {
        let t_tb_nm = positive_gaussian(params.t_tb_nm, params.sigma_t_tb_nm, rng);
        let t_fl_nm = positive_gaussian(params.t_fl_nm, params.sigma_t_fl_nm, rng);
        let tmr_ratio = positive_gaussian(params.tmr_ratio, params.sigma_tmr, rng);
        let r_p_ohm = params.r_p_nominal_ohm
            * (params.barrier_sensitivity_per_nm * (t_tb_nm - params.t_tb_nm)).exp();
        Self {
            state,
            t_tb_nm,
            t_fl_nm,
            tmr_ratio,
            r_p_ohm,
        }
    }

    pub fn resistance(&self) -> f64 {
        match self.state {
            MtjState::P => self.r_p_ohm,
            MtjState::AP => self.r_ap_ohm(),
        }
    }

    pub fn r_ap_ohm(&self) -> f64 {
        self.r_p_ohm * (1.0 + self.tmr_ratio)
    }

    /// Ideal write: only the magnetic state changes.
    #[must_use]
    pub fn with_state(self, target: MtjState) -> Self {
        Self {
            state: target,
            ..self
        }
    }
}

fn positive_gaussian<R: Rng + ?Sized>(mean: f64, sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return mean;
    }
    let dist = Normal::new(mean, sigma).expect("sigma validated as finite and non-negative");
    loop {
        let v = dist.sample(rng);
        if v > 0.0 {
            return v;
        }
    }
}

pub fn nominal_instance(params: &DeviceParams, state: MtjState) -> MtjInstance {
    MtjInstance::nominal(params, state)
}

pub fn sample_instance<R: Rng + ?Sized>(
    params: &DeviceParams,
    state: MtjState,
    rng: &mut R,
) -> MtjInstance {
    MtjInstance::sample(params, state, rng)
}

pub fn resistance(inst: &MtjInstance) -> f64 {
    inst.resistance()
}

pub fn set_state(inst: MtjInstance, target: MtjState) -> MtjInstance {
    inst.with_state(target)
}
