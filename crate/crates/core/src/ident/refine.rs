use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::creep::edge_mask;
use super::hyst::{typical as typical_hysteresis, EXTREME_WINDOW, SCREEN_ITERATIONS};
use super::lm::minimize;
use super::metrics::normalize_smoothed;
use super::{FitOptions, FitReport, FittedParams};
use crate::error::{Error, Result};
use crate::hysteresis::{check_range, pair_delta_samples, BoucWenParams};
use crate::linmod::{DiscreteLti, TransferFunction};
use crate::signal::SampledSignal;

/// Step the hysteresis record is decimated to.
const HYST_DT: f64 = 1e-4;
const LOG_GAIN_LIMIT: f64 = 30.0;
/// Admissible creep zero and pole magnitudes, rad/s.
const CORNER_RANGE: (f64, f64) = (1e-5, 1e5);

/// Scatter around an estimate that is already roughly right.
fn jitter(base: &BoucWenParams, rng: &mut ChaCha8Rng) -> BoucWenParams {
    let mut spread = |sigma: f64| (sigma * rng.sample::<f64, _>(StandardNormal)).exp();
    let mut p = *base;
    p.alpha = base.alpha * spread(0.2);
    p.beta = base.beta * spread(0.5);
    p.gamma = base.gamma * spread(0.5);
    p.delta = base.delta * spread(0.5);
    p.n = rng.gen_range(1.0..2.0);
    if rng.gen_bool(0.5) {
        p.gamma = -p.gamma;
    }
    p
}

/// Creep model with coincident zeros and poles spread over the creep band:
/// unity at every frequency, and free of any bias from a hysteresis estimate.
pub(crate) fn neutral_creep(order: usize) -> TransferFunction {
    let corners: Vec<f64> = (0..order)
        .map(|i| {
            let frac = if order > 1 { i as f64 / (order - 1) as f64 } else { 0.5 };
            0.01 * 300f64.powf(frac)
        })
        .collect();
    TransferFunction::from_zero_pole_pairs(&corners, &corners).expect("positive corners")
}

fn run(tf: &TransferFunction, x: &[f64], dt: f64) -> Result<Vec<f64>> {
    let mut sys = DiscreteLti::from_tf(tf, dt)?;
    let mut out = Vec::with_capacity(x.len());
    for (k, &v) in x.iter().enumerate() {
        let y = sys.step(v);
        if !y.is_finite() || y.abs() > 1e100 {
            return Err(Error::Numeric {
                index: k,
                reason: "simulated output diverged".into(),
            });
        }
        out.push(y);
    }
    Ok(out)
}

/// Joint refit of one axis's hysteresis and creep parameters with the
/// electromechanical transfer function `em` held fixed.
///
/// Two residual blocks share the parameters: the normalized hysteresis record
/// seen through `creep · em`, and the raw creep record. Each block is scaled
/// to a relative RMSE so neither dominates by sample count. Returns the
/// refined parameters, the creep model in canonical form and a report whose
/// `rmse` is the root of the summed squared block errors.
pub fn refine_axis(
    hyst: (&SampledSignal, &SampledSignal),
    creep: (&SampledSignal, &SampledSignal),
    psi: &BoucWenParams,
    crp: &TransferFunction,
    em: &TransferFunction,
    opts: &FitOptions,
) -> Result<(BoucWenParams, TransferFunction, FitReport)> {
    opts.validate()?;
    psi.validate()?;
    hyst.0.check_same_grid(hyst.1)?;
    creep.0.check_same_grid(creep.1)?;
    check_range(hyst.0.samples(), opts.u_max)?;
    check_range(creep.0.samples(), opts.u_max)?;
    let order = crp.order();
    if crp.num().len() != order + 1 || order == 0 {
        return Err(Error::param("crp", "creep model must be biproper"));
    }
    let (u_max, substeps) = (opts.u_max, opts.substeps);
    // the hysteresis record only has to resolve the carrier here
    let factor = ((HYST_DT / hyst.0.dt()).round() as usize).max(1);
    let (hu, ht) = (hyst.0.decimate(factor)?, hyst.1.decimate(factor)?);
    let (uh, dth) = (hu.samples(), hu.dt());
    let (uc, dtc) = (creep.0.samples(), creep.0.dt());
    let th_n = normalize_smoothed(ht.samples(), EXTREME_WINDOW)?;
    let keep = edge_mask(creep.0);
    let tc: Vec<f64> = creep
        .1
        .samples()
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(v, _)| *v)
        .collect();
    let wh = 1.0 / (th_n.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let wc = 1.0 / (tc.iter().map(|v| v * v).sum::<f64>()).sqrt();
    if !wc.is_finite() {
        return Err(Error::UndefinedMetric("creep record is identically zero"));
    }

    let variant = psi.variant;
    let np = psi.to_vec().len();
    // gain and real zero/pole magnitudes, all on a log scale
    let split = |p: &[f64]| -> Result<(BoucWenParams, TransferFunction)> {
        let bw = BoucWenParams::from_slice(variant, &p[..np]);
        bw.validate()?;
        let z: Vec<f64> = p[np + 1..np + 1 + order].iter().map(|v| v.exp()).collect();
        let q: Vec<f64> = p[np + 1 + order..].iter().map(|v| v.exp()).collect();
        Ok((bw, TransferFunction::from_zero_pole_pairs(&z, &q)?.scaled(p[np].exp())))
    };
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let (bw, g) = split(p)?;
        let chain = g.series(em);
        let dv = pair_delta_samples(&bw, uh, dth, u_max, substeps)?;
        let yh = normalize_smoothed(&run(&chain, &dv, dth)?, EXTREME_WINDOW)?;
        let dv = pair_delta_samples(&bw, uc, dtc, u_max, substeps)?;
        let yc = run(&chain, &dv, dtc)?;
        let mut r: Vec<f64> = yh.iter().zip(&th_n).map(|(a, b)| wh * (a - b)).collect();
        r.extend(
            yc.iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .zip(&tc)
                .map(|((a, _), b)| wc * (a - b)),
        );
        Ok(r)
    };
    let project = |p: &mut [f64]| {
        if !(p[np - 1] >= 1.0) {
            p[np - 1] = 1.0;
        }
        p[np] = p[np].clamp(-LOG_GAIN_LIMIT, LOG_GAIN_LIMIT);
        for v in &mut p[np + 1..] {
            *v = v.clamp(CORNER_RANGE.0.ln(), CORNER_RANGE.1.ln());
        }
    };

    let gain = crp.high_frequency_gain();
    if !(gain > 0.0) {
        return Err(Error::param("crp", "creep model needs a positive high-frequency gain"));
    }
    let magnitudes = |r: Vec<num_complex::Complex64>| -> Vec<f64> {
        let mut m: Vec<f64> = r.iter().map(|c| c.norm().max(1e-12).ln()).collect();
        m.sort_by(f64::total_cmp);
        m
    };
    let mut p0 = psi.to_vec();
    p0.push(gain.ln());
    p0.extend(magnitudes(crp.zeros()));
    p0.extend(magnitudes(crp.poles()));
    let mut typ = typical_hysteresis(variant);
    typ.resize(p0.len(), 1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![p0.clone()];
    while starts.len() < opts.multi_starts {
        let mut q = jitter(psi, &mut rng).to_vec();
        q.extend_from_slice(&p0[np..]);
        starts.push(q);
    }
    let mut spent = 0;
    let mut start = p0;
    if starts.len() > 1 {
        let mut screen = opts.lm();
        screen.max_iterations = SCREEN_ITERATIONS.min(opts.max_iterations);
        let mut best = f64::INFINITY;
        for s in &starts {
            let Ok(out) = minimize(residual, s, &typ, project, &screen) else {
                continue;
            };
            spent += out.iterations;
            if out.cost < best {
                best = out.cost;
                start = out.params;
            }
        }
    }
    let out = minimize(residual, &start, &typ, project, &opts.lm())?;
    let (bw, g) = split(&out.params)?;
    let (canon, gain) = g.monic();
    let report = FitReport {
        stage: "refine".into(),
        params: FittedParams::Hysteresis(bw),
        rmse: (2.0 * out.cost).sqrt(),
        iterations: spent + out.iterations,
        converged: out.converged,
        residual_norm: (2.0 * out.cost).sqrt(),
        gain: Some(gain),
        fitting_degree: None,
    };
    Ok((bw, canon, report))
}
