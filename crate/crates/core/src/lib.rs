//! Behavioral simulator for a Hopfield associative memory built from
//! magnetic tunnel junction synapses.
//!
//! Layers, bottom up: [`device`] models a single MTJ, [`circuit`] the
//! five-MTJ synapse and threshold neuron, [`network`] Hebbian training and
//! recall in software and hardware form, [`montecarlo`] process-variation
//! spread of synapse outputs, [`experiments`] noisy-recall sweeps and
//! their statistical comparison, and [`io`] the file formats.

pub mod circuit;
pub mod device;
pub mod error;
pub mod experiments;
pub mod io;
pub mod montecarlo;
pub mod network;
pub mod rng;
pub mod stats;

pub use circuit::{convert, AdderMode, BipolarVolt, NeuronParams, Sign, Synapse, WeightLevel};
pub use device::{DeviceParams, MtjInstance, MtjState};
pub use error::{Error, Result};
pub use experiments::{
    compare_implementations, inject_noise, recall_rate, select_low_overlap, sweep, Implementation, NoiseModel,
    NoiseWindow, SweepConfig, SweepReport,
};
pub use io::RunConfig;
pub use montecarlo::{iqr_separation, run_weight_mc, McConfig, McReport};
pub use network::{
    quantize, recall, train, Dynamics, HardwareConfig, HardwareNetwork, Pattern, RecallResult, SoftwareNetwork,
    WeightMatrix,
};
pub use stats::{mann_whitney_u, spearman, Alternative, UTestResult};
