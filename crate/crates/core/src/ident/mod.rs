//! Stage-wise identification: hysteresis, creep and electromechanical fits,
//! plus the metrics used to score them.

mod creep;
pub mod dataset;
mod em;
mod frf;
mod hyst;
pub(crate) mod lm;
pub mod metrics;
mod pipeline;
mod refine;

use serde::{Deserialize, Serialize};

use crate::hysteresis::BoucWenParams;
use crate::linmod::TransferFunction;

pub use creep::fit_creep;
pub use dataset::{
    add_noise, measure_snr_db, synthesize_dataset, Axis, DatasetConfig, Manifest, Record, RecordEntry, RecordSet, Role,
};
pub use em::fit_em_tf;
pub use frf::estimate_frf;
pub use hyst::{fit_complement, fit_hysteresis};
pub use metrics::{fitting_degree, fitting_degree_frf, normalize_unit, rmse_relative};
pub use pipeline::{
    combined_rmse, evaluate_held_out, identify_pipeline, identify_pipeline_with, EmDegrees, HeldOutScore,
    PipelineConfig, PipelineResult,
};
pub use refine::refine_axis;

/// Starting point of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    Hysteresis(BoucWenParams),
    Coefficients(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub tolerance_step: f64,
    pub tolerance_cost: f64,
    pub initial_params: Option<InitialGuess>,
    pub damping_init: f64,
    pub seed: u64,
    /// Jittered restarts of the hysteresis fit, including the base guess.
    pub multi_starts: usize,
    pub substeps: usize,
    pub u_max: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance_step: 1e-10,
            tolerance_cost: 1e-12,
            initial_params: None,
            damping_init: 1e-3,
            seed: 0,
            multi_starts: 5,
            substeps: crate::hysteresis::DEFAULT_SUBSTEPS,
            u_max: 100.0,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error;
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be at least 1"));
        }
        if !(self.tolerance_step > 0.0) || !(self.tolerance_cost > 0.0) {
            return Err(Error::param("tolerance_step", "tolerances must be positive"));
        }
        if !(self.damping_init > 0.0) {
            return Err(Error::param("damping_init", "must be positive"));
        }
        if self.multi_starts == 0 || self.substeps == 0 {
            return Err(Error::param("multi_starts", "must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn lm(&self) -> lm::LmSettings {
        lm::LmSettings {
            max_iterations: self.max_iterations,
            tolerance_step: self.tolerance_step,
            tolerance_cost: self.tolerance_cost,
            damping_init: self.damping_init,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedParams {
    Hysteresis(BoucWenParams),
    TransferFunction(TransferFunction),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub stage: String,
    pub params: FittedParams,
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual_norm: f64,
    /// Gain divided out of a canonical-form creep fit.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fitting_degree: Option<f64>,
}

impl FitReport {
    pub fn hysteresis(&self) -> Option<BoucWenParams> {
        match &self.params {
            FittedParams::Hysteresis(p) => Some(*p),
            _ => None,
        }
    }

    pub fn transfer_function(&self) -> Option<&TransferFunction> {
        match &self.params {
            FittedParams::TransferFunction(g) => Some(g),
            _ => None,
        }
    }
}
