use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lm::{minimize, LmOutcome};
use super::metrics::{normalize_slice, normalize_smoothed, rmse_relative_slice};
use super::{FitOptions, FitReport, FittedParams, InitialGuess};
use crate::error::{Error, Result};
use crate::hysteresis::{check_range, complement_params, integrate_into, BoucWenParams, Variant};
use crate::signal::SampledSignal;

/// Iterations given to every start before only the best one is refined.
pub(super) const SCREEN_ITERATIONS: usize = 12;

/// Moving-average width used to locate the extremes of both normalized
/// sequences. The same operator is applied to measurement and simulation, so
/// noiseless data still matches exactly.
pub(super) const EXTREME_WINDOW: usize = 101;

fn simulate_normalized(p: &BoucWenParams, u: &[f64], dt: f64, substeps: usize) -> Result<Vec<f64>> {
    p.validate()?;
    let mut v = Vec::with_capacity(u.len());
    integrate_into(p, u, dt, substeps, |_, _, vh| v.push(vh))?;
    normalize_smoothed(&v, EXTREME_WINDOW)
}

pub(super) fn typical(variant: Variant) -> Vec<f64> {
    if variant.has_asymmetry() {
        vec![0.1, 1e-2, 1e-2, 1e-3, 1.0]
    } else {
        vec![0.1, 1e-2, 1e-2, 1.0]
    }
}

fn base_guess(variant: Variant, u_norm: &[f64], theta_norm: &[f64]) -> BoucWenParams {
    let n = u_norm.len() as f64;
    let (mu, mt) = (u_norm.iter().sum::<f64>() / n, theta_norm.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&x, &y) in u_norm.iter().zip(theta_norm) {
        sxy += (x - mu) * (y - mt);
        sxx += (x - mu) * (x - mu);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 1.0 };
    BoucWenParams::from_slice(
        variant,
        &if variant.has_asymmetry() {
            vec![slope - 1.0, 1e-2, 1e-2, 0.0, 1.5]
        } else {
            vec![slope - 1.0, 1e-2, 1e-2, 1.5]
        },
    )
}

pub(super) fn jitter(base: &BoucWenParams, rng: &mut ChaCha8Rng) -> BoucWenParams {
    let mut p = *base;
    p.alpha = base.alpha - rng.gen_range(0.0..0.6);
    p.beta = base.beta * rng.gen_range(0.3..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    p.gamma = base.gamma * rng.gen_range(0.3..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    if p.variant.has_asymmetry() {
        p.delta = base.delta + rng.gen_range(-3e-3..3e-3);
    }
    p.n = rng.gen_range(1.0..2.0);
    p
}

/// Least-squares fit of one actuator's parameters so that its normalized
/// `v_h` trajectory matches the normalized measurement.
pub fn fit_hysteresis(
    u: &SampledSignal,
    theta: &SampledSignal,
    variant: Variant,
    opts: &FitOptions,
) -> Result<FitReport> {
    opts.validate()?;
    u.check_same_grid(theta)?;
    check_range(u.samples(), opts.u_max)?;
    let theta_n = normalize_smoothed(theta.samples(), EXTREME_WINDOW)?;
    let u_n = normalize_slice(u.samples())?;
    let (us, dt, substeps) = (u.samples(), u.dt(), opts.substeps);

    let base = match &opts.initial_params {
        Some(InitialGuess::Hysteresis(p)) => BoucWenParams { variant, ..*p },
        Some(InitialGuess::Coefficients(c)) => {
            let want = if variant.has_asymmetry() { 5 } else { 4 };
            if c.len() != want {
                return Err(Error::Config(format!(
                    "{variant:?} fit expects {want} initial values, got {}",
                    c.len()
                )));
            }
            BoucWenParams::from_slice(variant, c)
        }
        None => base_guess(variant, &u_n, &theta_n),
    };
    let base = if variant == Variant::Classic {
        BoucWenParams { delta: 0.0, ..base }
    } else {
        base
    };
    base.validate()?;

    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let params = BoucWenParams::from_slice(variant, p);
        let g = simulate_normalized(&params, us, dt, substeps)?;
        Ok(g.iter().zip(&theta_n).map(|(a, b)| a - b).collect())
    };
    let project = |p: &mut [f64]| {
        let last = p.len() - 1;
        if !(p[last] >= 1.0) {
            p[last] = 1.0;
        }
    };
    let typ = typical(variant);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![base];
    while starts.len() < opts.multi_starts {
        starts.push(jitter(&base, &mut rng));
    }

    let mut screen = opts.lm();
    let mut best: Option<LmOutcome> = None;
    let mut spent = 0;
    if starts.len() > 1 {
        screen.max_iterations = SCREEN_ITERATIONS.min(opts.max_iterations);
        for s in &starts {
            let Ok(out) = minimize(residual, &s.to_vec(), &typ, project, &screen) else {
                continue;
            };
            spent += out.iterations;
            if best.as_ref().map_or(true, |b| out.cost < b.cost) {
                best = Some(out);
            }
        }
    }
    let start = match &best {
        Some(b) => b.params.clone(),
        None => base.to_vec(),
    };
    let out = minimize(residual, &start, &typ, project, &opts.lm())?;
    let iterations = spent + out.iterations;
    let params = BoucWenParams::from_slice(variant, &out.params);
    let pred: Vec<f64> = out.residuals.iter().zip(&theta_n).map(|(r, t)| r + t).collect();
    let rmse = rmse_relative_slice(&pred, &theta_n)?;
    Ok(FitReport {
        stage: "hysteresis".into(),
        params: FittedParams::Hysteresis(params),
        rmse,
        iterations,
        converged: out.converged,
        residual_norm: (2.0 * out.cost).sqrt(),
        gain: None,
        fitting_degree: None,
    })
}

/// Parameters of the second actuator from the first one's.
pub fn fit_complement(psi1: &BoucWenParams, u_max: f64) -> Result<BoucWenParams> {
    complement_params(psi1, u_max)
}
