use serde::{Deserialize, Serialize};

use super::dataset::{Axis, Record, RecordSet, Role};
use super::refine::{neutral_creep, refine_axis};
use super::{estimate_frf, fit_creep, fit_em_tf, fit_hysteresis, FitOptions, FitReport};
use crate::composite::{simulate_mimo, AxisModel, MimoModel};
use crate::error::{Error, Result};
use crate::hysteresis::{pea_pair_delta, BoucWenParams, Variant};
use crate::linmod::{log_space, simulate_tf, TransferFunction};
use crate::signal::SampledSignal;

/// Numerator and denominator degrees of the four electromechanical fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmDegrees {
    pub xx: (usize, usize),
    pub xy: (usize, usize),
    pub yy: (usize, usize),
    pub yx: (usize, usize),
}

impl Default for EmDegrees {
    fn default() -> Self {
        Self {
            xx: (3, 6),
            xy: (3, 5),
            yy: (3, 6),
            yx: (3, 4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub variant: Variant,
    pub creep_order: usize,
    pub em_degrees: EmDegrees,
    pub frf_fmin: f64,
    pub frf_fmax: f64,
    pub frf_points: usize,
    pub k_amp: f64,
    /// Joint hysteresis/creep refinement passes after the staged fits; 0
    /// keeps the staged result.
    pub refine_passes: usize,
    pub fit: FitOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            variant: Variant::AsymmetricRateIndependent,
            creep_order: 3,
            em_degrees: EmDegrees::default(),
            frf_fmin: 1.0,
            frf_fmax: 2000.0,
            frf_points: 200,
            k_amp: 10.0,
            refine_passes: 2,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub model: MimoModel,
    pub reports: Vec<FitReport>,
}

fn suffix(axis: Axis) -> &'static str {
    match axis {
        Axis::X => "x",
        Axis::Y => "y",
    }
}

struct AxisFit {
    psi1: BoucWenParams,
    crp: TransferFunction,
    em_direct: TransferFunction,
    em_cross: TransferFunction,
}

/// Direct and cross electromechanical fits from one axis's chirp record.
fn fit_em_pair(
    psi1: &BoucWenParams,
    crp: &TransferFunction,
    rec: &Record,
    axis: Axis,
    freqs: &[f64],
    cfg: &PipelineConfig,
) -> Result<[(TransferFunction, FitReport); 2]> {
    let (direct, cross) = match axis {
        Axis::X => (cfg.em_degrees.xx, cfg.em_degrees.xy),
        Axis::Y => (cfg.em_degrees.yy, cfg.em_degrees.yx),
    };
    let dvh = pea_pair_delta(psi1, rec.input(axis), cfg.fit.u_max, cfg.fit.substeps)?;
    let dvc = simulate_tf(crp, &dvh)?;
    let own = fit_em_tf(
        &estimate_frf(&dvc, rec.theta(axis), freqs)?,
        direct.0,
        direct.1,
        &cfg.fit,
    )?;
    let other = fit_em_tf(
        &estimate_frf(&dvc, rec.theta(axis.other()), freqs)?,
        cross.0,
        cross.1,
        &cfg.fit,
    )?;
    Ok([own, other])
}

/// Runs the hysteresis, creep and electromechanical stages in order,
/// then `refine_passes` joint refinements, and assembles the two-axis model.
pub fn identify_pipeline(data: &RecordSet, cfg: &PipelineConfig) -> Result<PipelineResult> {
    identify_pipeline_with(data, cfg, |_| {})
}

/// [`identify_pipeline`] that hands every stage report to `sink` as soon as
/// the stage finishes, so earlier reports survive a later failure.
///
/// The staged pass follows the frequency separation of the three blocks,
/// but a 5 Hz carrier still sees a few degrees of electromechanical phase,
/// which the normalized hysteresis fit reads as loop shape. Each refinement
/// pass therefore refits hysteresis and creep together through the current
/// electromechanical model ([`refine_axis`]) and then refits that model.
/// The first pass starts from the staged hysteresis parameters, an
/// electromechanical fit taken directly on `Δv_h` and a neutral creep model,
/// since the staged creep fit inherits the hysteresis bias.
pub fn identify_pipeline_with(
    data: &RecordSet,
    cfg: &PipelineConfig,
    mut sink: impl FnMut(&FitReport),
) -> Result<PipelineResult> {
    cfg.fit.validate()?;
    let missing: Vec<&str> = [Axis::X, Axis::Y]
        .into_iter()
        .flat_map(|a| [Role::hysteresis(a), Role::creep(a), Role::chirp(a)])
        .filter(|r| !data.contains(*r))
        .map(Role::name)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!(
            "dataset is missing record(s): {}",
            missing.join(", ")
        )));
    }
    let freqs = log_space(cfg.frf_fmin, cfg.frf_fmax, cfg.frf_points)?;
    let (u_max, substeps) = (cfg.fit.u_max, cfg.fit.substeps);

    let mut reports = Vec::new();
    let mut emit = |mut r: FitReport, stage: String| {
        r.stage = stage;
        sink(&r);
        reports.push(r);
    };

    let mut fits = Vec::new();
    for axis in [Axis::X, Axis::Y] {
        let tag = suffix(axis);

        let rec = data.get(Role::hysteresis(axis))?;
        let hyst = fit_hysteresis(rec.input(axis), rec.theta(axis), cfg.variant, &cfg.fit)?;
        let psi1 = hyst.hysteresis().expect("hysteresis stage reports parameters");
        emit(hyst, format!("hysteresis_{tag}"));

        let rec = data.get(Role::creep(axis))?;
        let dvh = pea_pair_delta(&psi1, rec.input(axis), u_max, substeps)?;
        let (crp, report) = fit_creep(&dvh, rec.theta(axis), cfg.creep_order, &cfg.fit)?;
        emit(report, format!("creep_{tag}"));

        let [(em_direct, own), (em_cross, other)] =
            fit_em_pair(&psi1, &crp, data.get(Role::chirp(axis))?, axis, &freqs, cfg)?;
        emit(own, format!("em_{tag}{tag}"));
        emit(other, format!("em_{tag}{}", suffix(axis.other())));
        fits.push(AxisFit {
            psi1,
            crp,
            em_direct,
            em_cross,
        });
    }

    for pass in 1..=cfg.refine_passes {
        for (fit, axis) in fits.iter_mut().zip([Axis::X, Axis::Y]) {
            let tag = suffix(axis);
            let (hyst, creep, chirp) = (
                data.get(Role::hysteresis(axis))?,
                data.get(Role::creep(axis))?,
                data.get(Role::chirp(axis))?,
            );
            let (crp_seed, em_seed) = if pass == 1 {
                let dvh = pea_pair_delta(&fit.psi1, chirp.input(axis), u_max, substeps)?;
                let (deg_n, deg_d) = if axis == Axis::X {
                    cfg.em_degrees.xx
                } else {
                    cfg.em_degrees.yy
                };
                let (em, _) = fit_em_tf(&estimate_frf(&dvh, chirp.theta(axis), &freqs)?, deg_n, deg_d, &cfg.fit)?;
                (neutral_creep(cfg.creep_order), em)
            } else {
                (fit.crp.clone(), fit.em_direct.clone())
            };
            let (psi1, crp, report) = refine_axis(
                (hyst.input(axis), hyst.theta(axis)),
                (creep.input(axis), creep.theta(axis)),
                &fit.psi1,
                &crp_seed,
                &em_seed,
                &cfg.fit,
            )?;
            emit(report, format!("refine{pass}_{tag}"));
            let [(em_direct, own), (em_cross, other)] = fit_em_pair(&psi1, &crp, chirp, axis, &freqs, cfg)?;
            emit(own, format!("refine{pass}_em_{tag}{tag}"));
            emit(other, format!("refine{pass}_em_{tag}{}", suffix(axis.other())));
            *fit = AxisFit {
                psi1,
                crp,
                em_direct,
                em_cross,
            };
        }
    }

    let y = fits.pop().expect("two axes");
    let x = fits.pop().expect("two axes");
    let axis_model = |f: AxisFit| AxisModel {
        psi1: f.psi1,
        crp: f.crp,
        em_direct: f.em_direct,
        substeps,
    };
    let (em_xy, em_yx) = (x.em_cross.clone(), y.em_cross.clone());
    let model = MimoModel {
        x: axis_model(x),
        y: axis_model(y),
        em_xy,
        em_yx,
        u_max,
        k_amp: cfg.k_amp,
    };
    model.validate()?;
    Ok(PipelineResult { model, reports })
}

/// Relative RMSE over both angle channels together.
pub fn combined_rmse(pred: (&SampledSignal, &SampledSignal), meas: (&SampledSignal, &SampledSignal)) -> Result<f64> {
    pred.0.check_same_grid(meas.0)?;
    pred.1.check_same_grid(meas.1)?;
    let mut err = 0.0;
    let mut energy = 0.0;
    for (p, m) in [pred.0, pred.1].into_iter().zip([meas.0, meas.1]) {
        for (a, b) in p.samples().iter().zip(m.samples()) {
            err += (a - b) * (a - b);
            energy += b * b;
        }
    }
    if energy == 0.0 {
        return Err(Error::UndefinedMetric("measurement is identically zero"));
    }
    Ok((err / energy).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeldOutScore {
    pub role: Role,
    /// Combined two-axis relative RMSE.
    pub rmse: f64,
    /// Same with the cross-axis transfer functions removed.
    pub rmse_without_coupling: f64,
}

/// Scores `model` on every held-out record present in `data`.
pub fn evaluate_held_out(model: &MimoModel, data: &RecordSet) -> Result<Vec<HeldOutScore>> {
    let ablated = model.without_coupling();
    let mut out = Vec::new();
    for role in Role::HELD_OUT {
        if !data.contains(role) {
            continue;
        }
        let rec = data.get(role)?;
        let meas = (&rec.theta_x, &rec.theta_y);
        let (px, py) = simulate_mimo(model, &rec.ux, &rec.uy)?;
        let (ax, ay) = simulate_mimo(&ablated, &rec.ux, &rec.uy)?;
        out.push(HeldOutScore {
            role,
            rmse: combined_rmse((&px, &py), meas)?,
            rmse_without_coupling: combined_rmse((&ax, &ay), meas)?,
        });
    }
    if out.is_empty() {
        return Err(Error::Config("dataset has no held-out records".into()));
    }
    Ok(out)
}
