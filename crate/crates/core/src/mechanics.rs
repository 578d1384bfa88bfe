//! Spring-damper mechanics of one tilt axis: push-pull actuators, flexure
//! hinges, platform and adhesive-mounted mirror.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linmod::StateSpaceModel;

/// Independent parameters for both actuator branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalParamsFull {
    pub m1: f64,
    pub m2: f64,
    #[serde(rename = "kP1")]
    pub k_p1: f64,
    #[serde(rename = "kP2")]
    pub k_p2: f64,
    #[serde(rename = "kH1")]
    pub k_h1: f64,
    #[serde(rename = "kH2")]
    pub k_h2: f64,
    #[serde(rename = "kA1")]
    pub k_a1: f64,
    #[serde(rename = "kA2")]
    pub k_a2: f64,
    #[serde(rename = "bP1")]
    pub b_p1: f64,
    #[serde(rename = "bP2")]
    pub b_p2: f64,
    #[serde(rename = "bH1")]
    pub b_h1: f64,
    #[serde(rename = "bH2")]
    pub b_h2: f64,
    #[serde(rename = "bA1")]
    pub b_a1: f64,
    #[serde(rename = "bA2")]
    pub b_a2: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "JP")]
    pub j_p: f64,
    #[serde(rename = "JM")]
    pub j_m: f64,
}

/// Parameters when both actuator branches are identical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalParamsSym {
    pub m: f64,
    #[serde(rename = "kP")]
    pub k_p: f64,
    #[serde(rename = "kH")]
    pub k_h: f64,
    #[serde(rename = "kA")]
    pub k_a: f64,
    #[serde(rename = "bP")]
    pub b_p: f64,
    #[serde(rename = "bH")]
    pub b_h: f64,
    #[serde(rename = "bA")]
    pub b_a: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "JP")]
    pub j_p: f64,
    #[serde(rename = "JM")]
    pub j_m: f64,
}

/// Inverse piezoelectric conversion `F = C_PEA k_F v_C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpeGain {
    pub c_pea: f64,
    pub k_f: f64,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

// Coupling stiffness and damping may be zero (decoupled structure).
fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be non-negative, got {v}")))
    }
}

impl MechanicalParamsSym {
    /// Desk-scale values with resonances in the kHz band.
    pub fn desk_scale() -> Self {
        Self {
            m: 5e-3,
            k_p: 2e7,
            b_p: 50.0,
            k_h: 5e6,
            b_h: 20.0,
            k_a: 1e7,
            b_a: 30.0,
            l: 0.01,
            j_p: 2e-7,
            j_m: 1e-7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("m", self.m)?;
        positive("JP", self.j_p)?;
        positive("JM", self.j_m)?;
        positive("L", self.l)?;
        positive("kP", self.k_p)?;
        non_negative("kH", self.k_h)?;
        non_negative("kA", self.k_a)?;
        non_negative("bP", self.b_p)?;
        non_negative("bH", self.b_h)?;
        non_negative("bA", self.b_a)
    }

    /// Both branches set to these values.
    pub fn to_full(&self) -> MechanicalParamsFull {
        MechanicalParamsFull {
            m1: self.m,
            m2: self.m,
            k_p1: self.k_p,
            k_p2: self.k_p,
            k_h1: self.k_h,
            k_h2: self.k_h,
            k_a1: self.k_a,
            k_a2: self.k_a,
            b_p1: self.b_p,
            b_p2: self.b_p,
            b_h1: self.b_h,
            b_h2: self.b_h,
            b_a1: self.b_a,
            b_a2: self.b_a,
            l1: self.l,
            l2: self.l,
            j_p: self.j_p,
            j_m: self.j_m,
        }
    }
}

impl MechanicalParamsFull {
    pub fn validate(&self) -> Result<()> {
        positive("m1", self.m1)?;
        positive("m2", self.m2)?;
        positive("JP", self.j_p)?;
        positive("JM", self.j_m)?;
        positive("L1", self.l1)?;
        positive("L2", self.l2)?;
        positive("kP1", self.k_p1)?;
        positive("kP2", self.k_p2)?;
        for (name, v) in [
            ("kH1", self.k_h1),
            ("kH2", self.k_h2),
            ("kA1", self.k_a1),
            ("kA2", self.k_a2),
            ("bP1", self.b_p1),
            ("bP2", self.b_p2),
            ("bH1", self.b_h1),
            ("bH2", self.b_h2),
            ("bA1", self.b_a1),
            ("bA2", self.b_a2),
        ] {
            non_negative(name, v)?;
        }
        Ok(())
    }
}

/// Two-input (F1, F2) model, states `[x1, ẋ1, x2, ẋ2, θP, θ̇P, θ, θ̇]`, output θ.
pub fn build_miso_ss(p: &MechanicalParamsFull) -> Result<StateSpaceModel> {
    p.validate()?;
    let mut a = DMatrix::<f64>::zeros(8, 8);
    // actuators
    a[(0, 1)] = 1.0;
    a[(1, 0)] = -(p.k_p1 + p.k_h1) / p.m1;
    a[(1, 1)] = -(p.b_p1 + p.b_h1) / p.m1;
    a[(2, 3)] = 1.0;
    a[(3, 2)] = -(p.k_p2 + p.k_h2) / p.m2;
    a[(3, 3)] = -(p.b_p2 + p.b_h2) / p.m2;
    a[(1, 4)] = p.k_h1 * p.l1 / p.m1;
    a[(1, 5)] = p.b_h1 * p.l1 / p.m1;
    a[(3, 4)] = -p.k_h2 * p.l2 / p.m2;
    a[(3, 5)] = -p.b_h2 * p.l2 / p.m2;
    // platform driven by the actuators
    a[(5, 0)] = p.k_h1 * p.l1 / p.j_p;
    a[(5, 1)] = p.b_h1 * p.l1 / p.j_p;
    a[(5, 2)] = -p.k_h2 * p.l2 / p.j_p;
    a[(5, 3)] = -p.b_h2 * p.l2 / p.j_p;
    // platform and mirror
    let (l1s, l2s) = (p.l1 * p.l1, p.l2 * p.l2);
    let ka = p.k_a1 * l1s + p.k_a2 * l2s;
    let ba = p.b_a1 * l1s + p.b_a2 * l2s;
    a[(4, 5)] = 1.0;
    a[(5, 4)] = -((p.k_h1 + p.k_a1) * l1s + (p.k_h2 + p.k_a2) * l2s) / p.j_p;
    a[(5, 5)] = -((p.b_h1 + p.b_a1) * l1s + (p.b_h2 + p.b_a2) * l2s) / p.j_p;
    a[(5, 6)] = ka / p.j_p;
    a[(5, 7)] = ba / p.j_p;
    a[(6, 7)] = 1.0;
    a[(7, 4)] = ka / p.j_m;
    a[(7, 5)] = ba / p.j_m;
    a[(7, 6)] = -ka / p.j_m;
    a[(7, 7)] = -ba / p.j_m;

    let mut b = DMatrix::<f64>::zeros(8, 2);
    b[(1, 0)] = 1.0 / p.m1;
    b[(3, 1)] = 1.0 / p.m2;
    let mut c = DMatrix::<f64>::zeros(1, 8);
    c[(0, 6)] = 1.0;
    StateSpaceModel::strictly_proper(a, b, c)
}

/// Differential-force model, states `[x1−x2, ẋ1−ẋ2, θP, θ̇P, θ, θ̇]`, output θ.
pub fn build_siso_ss(p: &MechanicalParamsSym) -> Result<StateSpaceModel> {
    p.validate()?;
    let l2 = p.l * p.l;
    let mut a = DMatrix::<f64>::zeros(6, 6);
    a[(0, 1)] = 1.0;
    a[(1, 0)] = -(p.k_p + p.k_h) / p.m;
    a[(1, 1)] = -(p.b_p + p.b_h) / p.m;
    a[(1, 2)] = 2.0 * p.k_h * p.l / p.m;
    a[(1, 3)] = 2.0 * p.b_h * p.l / p.m;
    a[(2, 3)] = 1.0;
    a[(3, 0)] = p.k_h * p.l / p.j_p;
    a[(3, 1)] = p.b_h * p.l / p.j_p;
    a[(3, 2)] = -2.0 * (p.k_h + p.k_a) * l2 / p.j_p;
    a[(3, 3)] = -2.0 * (p.b_h + p.b_a) * l2 / p.j_p;
    a[(3, 4)] = 2.0 * p.k_a * l2 / p.j_p;
    a[(3, 5)] = 2.0 * p.b_a * l2 / p.j_p;
    a[(4, 5)] = 1.0;
    a[(5, 2)] = 2.0 * p.k_a * l2 / p.j_m;
    a[(5, 3)] = 2.0 * p.b_a * l2 / p.j_m;
    a[(5, 4)] = -2.0 * p.k_a * l2 / p.j_m;
    a[(5, 5)] = -2.0 * p.b_a * l2 / p.j_m;

    let mut b = DMatrix::<f64>::zeros(6, 1);
    b[(1, 0)] = 1.0 / p.m;
    let mut c = DMatrix::<f64>::zeros(1, 6);
    c[(0, 4)] = 1.0;
    StateSpaceModel::strictly_proper(a, b, c)
}

/// `C_PEA · k_F` in N/V.
pub fn ipe_gain(g: &IpeGain) -> Result<f64> {
    positive("c_pea", g.c_pea)?;
    positive("k_f", g.k_f)?;
    Ok(g.c_pea * g.k_f)
}
