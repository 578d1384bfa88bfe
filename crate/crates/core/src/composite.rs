//! Hammerstein chain per axis (push-pull hysteresis, creep, electromechanics)
//! and the dual-axis plant with cross-coupling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hysteresis::{check_range, pair_params, BoucWenParams, PeaPair, DEFAULT_SUBSTEPS};
use crate::linmod::{DiscreteLti, TransferFunction};
use crate::signal::SampledSignal;

pub const MODEL_VERSION: &str = "pfsm-model-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisModel {
    pub psi1: BoucWenParams,
    pub crp: TransferFunction,
    pub em_direct: TransferFunction,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
}

fn default_substeps() -> usize {
    DEFAULT_SUBSTEPS
}

impl AxisModel {
    pub fn validate(&self) -> Result<()> {
        self.psi1.validate()?;
        if self.substeps == 0 {
            return Err(Error::param("substeps", "must be at least 1"));
        }
        if self.crp.dc_gain()? == 0.0 {
            return Err(Error::param("crp", "static gain must be nonzero"));
        }
        Ok(())
    }
}

/// Two-axis plant; `em_xy` maps the X-axis post-creep voltage to θY.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMimo", into = "RawMimo")]
pub struct MimoModel {
    pub x: AxisModel,
    pub y: AxisModel,
    pub em_xy: TransferFunction,
    pub em_yx: TransferFunction,
    pub u_max: f64,
    pub k_amp: f64,
}

#[derive(Serialize, Deserialize)]
struct RawMimo {
    version: String,
    x: AxisModel,
    y: AxisModel,
    em_xy: TransferFunction,
    em_yx: TransferFunction,
    u_max: f64,
    k_amp: f64,
}

impl TryFrom<RawMimo> for MimoModel {
    type Error = Error;

    fn try_from(raw: RawMimo) -> Result<Self> {
        if raw.version != MODEL_VERSION {
            return Err(Error::Config(format!(
                "unsupported model version `{}`, expected `{MODEL_VERSION}`",
                raw.version
            )));
        }
        let m = MimoModel {
            x: raw.x,
            y: raw.y,
            em_xy: raw.em_xy,
            em_yx: raw.em_yx,
            u_max: raw.u_max,
            k_amp: raw.k_amp,
        };
        m.validate()?;
        Ok(m)
    }
}

impl From<MimoModel> for RawMimo {
    fn from(m: MimoModel) -> Self {
        RawMimo {
            version: MODEL_VERSION.to_owned(),
            x: m.x,
            y: m.y,
            em_xy: m.em_xy,
            em_yx: m.em_yx,
            u_max: m.u_max,
            k_amp: m.k_amp,
        }
    }
}

impl MimoModel {
    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()?;
        if !(self.u_max > 0.0) || !self.u_max.is_finite() {
            return Err(Error::param("u_max", format!("must be positive, got {}", self.u_max)));
        }
        if !(self.k_amp > 0.0) || !self.k_amp.is_finite() {
            return Err(Error::param("k_amp", format!("must be positive, got {}", self.k_amp)));
        }
        Ok(())
    }

    /// Same model with both cross-coupling paths removed.
    pub fn without_coupling(&self) -> Self {
        Self {
            em_xy: TransferFunction::gain(0.0),
            em_yx: TransferFunction::gain(0.0),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Two-axis plant with the identified reference coefficients.
pub fn reference_plant() -> MimoModel {
    let tf = |num: &[f64], den: &[f64]| {
        TransferFunction::new(num.to_vec(), den.to_vec()).expect("reference coefficients are proper")
    };
    MimoModel {
        x: AxisModel {
            psi1: BoucWenParams::reference_x1(),
            crp: tf(&[1.0, 3.787, 1.678, 0.0217], &[1.0, 3.750, 1.637, 0.0200]),
            em_direct: tf(
                &[1.541e11, 9.166e13, 1.377e16, 2.343e17],
                &[1.0, 1.14e6, 8.23e9, 1.55e13, 7.43e15, 1.06e18, 1.61e19],
            ),
            substeps: DEFAULT_SUBSTEPS,
        },
        y: AxisModel {
            psi1: BoucWenParams::reference_y1(),
            crp: tf(&[1.0, 5.381, 4.014, 0.2482], &[1.0, 5.338, 3.933, 0.2379]),
            em_direct: tf(
                &[9.848e10, 7.65e13, 1.636e16, 2.645e17],
                &[1.0, 7.41e5, 5.46e9, 1.06e13, 6.05e15, 1.21e18, 1.72e19],
            ),
            substeps: DEFAULT_SUBSTEPS,
        },
        em_xy: tf(
            &[9.018e4, -2.825e7, 1.205e12, 4.351e13],
            &[1.0, 1.7e5, 2.824e9, 8.891e12, 1.204e16, 5.145e17],
        ),
        em_yx: tf(
            &[4.583, 1.301e6, 1.145e9, 1.447e13],
            &[1.0, 4.423e5, 6.35e9, 1.764e13, 2.293e16],
        ),
        u_max: 100.0,
        k_amp: 10.0,
    }
}

/// Units of a drive signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputUnit {
    /// Amplifier output, 0..u_max.
    #[default]
    Drive,
    /// Amplifier input; multiplied by `k_amp`.
    Command,
}

impl std::str::FromStr for InputUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drive" => Ok(Self::Drive),
            "command" => Ok(Self::Command),
            other => Err(Error::Config(format!("unknown unit `{other}` (drive|command)"))),
        }
    }
}

impl InputUnit {
    pub fn to_drive(self, u: &SampledSignal, k_amp: f64) -> SampledSignal {
        match self {
            Self::Drive => u.clone(),
            Self::Command => u.map(|v| v * k_amp),
        }
    }
}

/// Intermediate voltages of one axis at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisSample {
    pub delta_vh: f64,
    pub delta_vc: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
struct AxisSim {
    pair: Option<PeaPair>,
    psi1: BoucWenParams,
    psi2: BoucWenParams,
    substeps: usize,
    crp: DiscreteLti,
    em: DiscreteLti,
}

impl AxisSim {
    fn new(axis: &AxisModel, u_max: f64, dt: f64) -> Result<Self> {
        Ok(Self {
            pair: None,
            psi1: axis.psi1,
            psi2: pair_params(&axis.psi1, u_max),
            substeps: axis.substeps,
            crp: DiscreteLti::from_tf(&axis.crp, dt)?,
            em: DiscreteLti::from_tf(&axis.em_direct, dt)?,
        })
    }

    fn voltages(&mut self, u: f64, u_max: f64, dt: f64) -> Result<(f64, f64)> {
        let pair = self
            .pair
            .get_or_insert_with(|| PeaPair::new(self.psi1, self.psi2, u_max, u));
        let dvh = pair.step(u, dt, self.substeps)?;
        let dvc = self.crp.step(dvh);
        Ok((dvh, dvc))
    }
}

/// Streaming dual-axis simulation; the first sample defines the rest point
/// of the hysteresis states.
#[derive(Debug, Clone)]
pub struct MimoSimulator {
    x: AxisSim,
    y: AxisSim,
    xy: DiscreteLti,
    yx: DiscreteLti,
    u_max: f64,
    dt: f64,
    index: usize,
}

impl MimoSimulator {
    pub fn new(model: &MimoModel, dt: f64) -> Result<Self> {
        model.validate()?;
        Ok(Self {
            x: AxisSim::new(&model.x, model.u_max, dt)?,
            y: AxisSim::new(&model.y, model.u_max, dt)?,
            xy: DiscreteLti::from_tf(&model.em_xy, dt)?,
            yx: DiscreteLti::from_tf(&model.em_yx, dt)?,
            u_max: model.u_max,
            dt,
            index: 0,
        })
    }

    fn check(&self, value: f64) -> Result<()> {
        if (0.0..=self.u_max).contains(&value) {
            Ok(())
        } else {
            Err(Error::Domain {
                index: self.index,
                value,
                max: self.u_max,
            })
        }
    }

    fn reindex(&self, e: Error) -> Error {
        match e {
            Error::Numeric { reason, .. } => Error::Numeric {
                index: self.index,
                reason,
            },
            other => other,
        }
    }

    pub fn step_detailed(&mut self, ux: f64, uy: f64) -> Result<(AxisSample, AxisSample)> {
        self.check(ux)?;
        self.check(uy)?;
        let (u_max, dt) = (self.u_max, self.dt);
        let (xh, xc) = self.x.voltages(ux, u_max, dt).map_err(|e| self.reindex(e))?;
        let (yh, yc) = self.y.voltages(uy, u_max, dt).map_err(|e| self.reindex(e))?;
        let tx = self.x.em.step(xc) + self.yx.step(yc);
        let ty = self.y.em.step(yc) + self.xy.step(xc);
        if !tx.is_finite() || !ty.is_finite() {
            return Err(Error::Numeric {
                index: self.index,
                reason: "response is not finite".into(),
            });
        }
        self.index += 1;
        Ok((
            AxisSample {
                delta_vh: xh,
                delta_vc: xc,
                theta: tx,
            },
            AxisSample {
                delta_vh: yh,
                delta_vc: yc,
                theta: ty,
            },
        ))
    }

    /// Advances both axes one sample and returns `(θX, θY)`.
    pub fn step(&mut self, ux: f64, uy: f64) -> Result<(f64, f64)> {
        let (x, y) = self.step_detailed(ux, uy)?;
        Ok((x.theta, y.theta))
    }
}

/// Single-axis response θ to the drive `u`.
pub fn simulate_siso(axis: &AxisModel, u: &SampledSignal, u_max: f64) -> Result<SampledSignal> {
    axis.validate()?;
    if !(u_max > 0.0) {
        return Err(Error::param("u_max", format!("must be positive, got {u_max}")));
    }
    check_range(u.samples(), u_max)?;
    let mut sim = AxisSim::new(axis, u_max, u.dt())?;
    let mut out = Vec::with_capacity(u.len());
    for (k, &uk) in u.samples().iter().enumerate() {
        let (_, dvc) = sim.voltages(uk, u_max, u.dt()).map_err(|e| match e {
            Error::Numeric { reason, .. } => Error::Numeric { index: k, reason },
            other => other,
        })?;
        let theta = sim.em.step(dvc);
        if !theta.is_finite() {
            return Err(Error::Numeric {
                index: k,
                reason: "response is not finite".into(),
            });
        }
        out.push(theta);
    }
    u.with_samples(out)
}

/// Dual-axis response `(θX, θY)`.
pub fn simulate_mimo(
    model: &MimoModel,
    ux: &SampledSignal,
    uy: &SampledSignal,
) -> Result<(SampledSignal, SampledSignal)> {
    ux.check_same_grid(uy)?;
    check_range(ux.samples(), model.u_max)?;
    check_range(uy.samples(), model.u_max)?;
    let mut sim = MimoSimulator::new(model, ux.dt())?;
    let mut tx = Vec::with_capacity(ux.len());
    let mut ty = Vec::with_capacity(ux.len());
    for (&a, &b) in ux.samples().iter().zip(uy.samples()) {
        let (x, y) = sim.step(a, b)?;
        tx.push(x);
        ty.push(y);
    }
    Ok((ux.with_samples(tx)?, ux.with_samples(ty)?))
}
