use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::lm::minimize;
use super::metrics::fitting_degree_frf;
use super::{FitOptions, FitReport, FittedParams};
use crate::error::{Error, Result};
use crate::linmod::{poly, FrequencyResponse, TransferFunction};

/// Condition number above which the weighted system is solved with
/// Tikhonov regularization.
const COND_LIMIT: f64 = 1e13;

/// Columns of powers `s^0..s^deg` times `factor`.
fn powers(s: Complex64, deg: usize, factor: Complex64, out: &mut Vec<Complex64>) {
    let mut p = factor;
    for _ in 0..=deg {
        out.push(p);
        p *= s;
    }
}

/// Weighted complex least squares with real/imaginary rows stacked and
/// unit-norm columns. Returns the solution in the unscaled variables.
fn solve_stacked(rows: &[Vec<Complex64>], rhs: &[Complex64]) -> Result<Vec<f64>> {
    let (m, ncol) = (rows.len(), rows[0].len());
    let mut a = DMatrix::<f64>::zeros(2 * m, ncol);
    let mut b = DVector::<f64>::zeros(2 * m);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            a[(2 * i, j)] = v.re;
            a[(2 * i + 1, j)] = v.im;
        }
        b[2 * i] = rhs[i].re;
        b[2 * i + 1] = rhs[i].im;
    }
    let scale: Vec<f64> = (0..ncol).map(|j| a.column(j).norm()).collect();
    if let Some(j) = scale.iter().position(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::Fit(format!("column {j} of the rational fit is degenerate")));
    }
    for j in 0..ncol {
        a.column_mut(j).unscale_mut(scale[j]);
    }
    let svd = a.clone().svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    let cond = smax / smin;
    let x = if cond.is_finite() && cond < COND_LIMIT {
        svd.solve(&b, 0.0).map_err(|e| Error::Fit(e.to_string()))?
    } else {
        let lambda = smax * smax / COND_LIMIT;
        let mut normal = a.tr_mul(&a);
        for j in 0..ncol {
            normal[(j, j)] += lambda;
        }
        let rhs = a.tr_mul(&b);
        normal
            .cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or_else(|| Error::Fit(format!("rational fit is rank deficient (condition number {cond:.3e})")))?
    };
    let out: Vec<f64> = x.iter().zip(&scale).map(|(v, s)| v / s).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit(format!(
            "rational fit produced non-finite coefficients (condition number {cond:.3e})"
        )));
    }
    Ok(out)
}

/// Lowest power first, as used internally here.
fn eval_low(c: &[f64], s: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * s + v)
}

fn unpack(p: &[f64], num_degree: usize) -> (Vec<f64>, Vec<f64>) {
    let num = p[..=num_degree].to_vec();
    let den = std::iter::once(1.0)
        .chain(p[num_degree + 1..].iter().copied())
        .collect();
    (num, den)
}

/// Numerator minimizing `Σ|N/D − H|²` for a fixed denominator.
fn refit_numerator(s: &[Complex64], h: &[Complex64], den_low: &[f64], num_degree: usize) -> Result<Vec<f64>> {
    let dvals: Vec<Complex64> = s.iter().map(|&sk| eval_low(den_low, sk)).collect();
    let rows: Vec<Vec<Complex64>> = dvals
        .iter()
        .zip(s)
        .map(|(d, &sk)| {
            let mut row = Vec::with_capacity(num_degree + 1);
            powers(sk, num_degree, Complex64::new(1.0, 0.0) / d, &mut row);
            row
        })
        .collect();
    solve_stacked(&rows, h)
}

/// Mirrors right half-plane roots; the constant coefficient stays 1.
fn reflect_unstable(den_low: &[f64]) -> (Vec<f64>, bool) {
    let high: Vec<f64> = den_low.iter().rev().copied().collect();
    let roots = poly::roots(&high);
    if roots.iter().all(|r| r.re < 0.0) {
        return (den_low.to_vec(), false);
    }
    let scale = roots.iter().map(|r| r.norm()).fold(0.0, f64::max).max(1.0);
    let fixed: Vec<Complex64> = roots
        .iter()
        .map(|r| {
            let re = if r.re < 0.0 {
                r.re
            } else {
                -r.re.abs().max(1e-9 * scale)
            };
            Complex64::new(re, r.im)
        })
        .collect();
    let lead = high.iter().copied().find(|&c| c != 0.0).unwrap_or(1.0);
    let mut low: Vec<f64> = poly::from_roots(&fixed).into_iter().rev().map(|c| c * lead).collect();
    let c0 = low[0];
    for c in &mut low {
        *c /= c0;
    }
    low.resize(den_low.len(), 0.0);
    (low, true)
}

struct Candidate {
    num_low: Vec<f64>,
    den_low: Vec<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
}

/// Real poles log-spaced over the band, optionally jittered, as a starting
/// denominator in the scaled variable.
fn start_denominator(degree: usize, f_lo: f64, f_hi: f64, w0: f64, jitter: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let spread = Normal::new(0.0, 0.5).expect("valid sigma");
    let roots: Vec<Complex64> = (0..degree)
        .map(|i| {
            let frac = if degree > 1 {
                i as f64 / (degree - 1) as f64
            } else {
                0.5
            };
            let mut f = f_lo * (f_hi / f_lo).powf(frac);
            if jitter {
                f *= f64::exp(spread.sample(rng));
            }
            Complex64::new(-2.0 * std::f64::consts::PI * f / w0, 0.0)
        })
        .collect();
    let mut low: Vec<f64> = poly::from_roots(&roots).into_iter().rev().collect();
    let c0 = low[0];
    for c in &mut low {
        *c /= c0;
    }
    low
}

/// SK iterations from `init` (flat weights when `None`), a least-squares
/// polish of the result, and stability enforcement.
fn candidate(
    s: &[Complex64],
    h: &[Complex64],
    num_degree: usize,
    den_degree: usize,
    init: Option<Vec<f64>>,
    opts: &FitOptions,
) -> Result<Candidate> {
    // den_low holds a_0..a_n with a_0 = 1: a finite static gain is assumed
    let mut den_low = init.clone().unwrap_or_else(|| {
        let mut d = vec![0.0; den_degree + 1];
        d[0] = 1.0;
        d
    });
    let mut weights: Vec<f64> = match &init {
        Some(d) => s.iter().map(|&sk| 1.0 / eval_low(d, sk).norm()).collect(),
        None => vec![1.0; s.len()],
    };
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations.min(200) {
        iterations += 1;
        let mut rows = Vec::with_capacity(s.len());
        let mut rhs = Vec::with_capacity(s.len());
        for k in 0..s.len() {
            let w = Complex64::new(weights[k], 0.0);
            let mut row = Vec::with_capacity(num_degree + 1 + den_degree);
            powers(s[k], num_degree, w, &mut row);
            let mut tail = Vec::with_capacity(den_degree + 1);
            powers(s[k], den_degree, -w * h[k], &mut tail);
            row.extend_from_slice(&tail[1..]);
            rows.push(row);
            rhs.push(w * h[k]);
        }
        let x = solve_stacked(&rows, &rhs)?;
        let next: Vec<f64> = std::iter::once(1.0)
            .chain(x[num_degree + 1..].iter().copied())
            .collect();
        let change = next
            .iter()
            .zip(&den_low)
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1e-300))
            .fold(0.0, f64::max);
        den_low = next;
        weights = s.iter().map(|&sk| 1.0 / eval_low(&den_low, sk).norm()).collect();
        if change < opts.tolerance_step {
            converged = true;
            break;
        }
    }
    let mut num_low = refit_numerator(s, h, &den_low, num_degree)?;

    // the SK fixed point is not the least-squares optimum once the data are
    // noisy, so polish on the actual complex residual
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let (nl, dl) = unpack(p, num_degree);
        let mut r = Vec::with_capacity(2 * s.len());
        for (k, &sk) in s.iter().enumerate() {
            let e = eval_low(&nl, sk) / eval_low(&dl, sk) - h[k];
            r.push(e.re);
            r.push(e.im);
        }
        Ok(r)
    };
    let p0: Vec<f64> = num_low.iter().chain(&den_low[1..]).copied().collect();
    let typical: Vec<f64> = p0.iter().map(|v| v.abs().max(1e-12)).collect();
    if let Ok(out) = minimize(residual, &p0, &typical, |_| {}, &opts.lm()) {
        if out.params.iter().all(|v| v.is_finite()) {
            (num_low, den_low) = unpack(&out.params, num_degree);
        }
    }

    let (den_low, reflected) = reflect_unstable(&den_low);
    if reflected {
        num_low = refit_numerator(s, h, &den_low, num_degree)?;
    }
    let cost = s
        .iter()
        .zip(h)
        .map(|(&sk, hk)| (eval_low(&num_low, sk) / eval_low(&den_low, sk) - hk).norm_sqr())
        .sum();
    Ok(Candidate {
        num_low,
        den_low,
        cost,
        iterations,
        converged,
    })
}

/// Sanathanan–Koerner rational fit of `frf` with numerator degree
/// `num_degree` and denominator degree `den_degree`. Unstable poles are
/// reflected into the left half-plane and the numerator refitted. Several
/// starting denominators are tried and the lowest residual kept.
pub fn fit_em_tf(
    frf: &FrequencyResponse,
    num_degree: usize,
    den_degree: usize,
    opts: &FitOptions,
) -> Result<(TransferFunction, FitReport)> {
    opts.validate()?;
    if num_degree >= den_degree {
        return Err(Error::param(
            "num_degree",
            format!("must be below den_degree ({num_degree} >= {den_degree})"),
        ));
    }
    let need = 4 * (num_degree + den_degree);
    if frf.len() < need {
        return Err(Error::param(
            "frf",
            format!("{} points, need at least {need}", frf.len()),
        ));
    }
    let (f_lo, f_hi) = (frf.freqs()[0], frf.freqs()[frf.len() - 1]);
    let w0 = 2.0 * std::f64::consts::PI * (f_lo * f_hi).sqrt();
    let s: Vec<Complex64> = frf
        .freqs()
        .iter()
        .map(|&f| Complex64::new(0.0, 2.0 * std::f64::consts::PI * f / w0))
        .collect();
    let h = frf.values();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<Candidate> = None;
    let mut last_err = None;
    for start in 0..opts.multi_starts {
        let init = if start == 0 {
            None
        } else {
            Some(start_denominator(den_degree, f_lo, f_hi, w0, start > 1, &mut rng))
        };
        match candidate(&s, h, num_degree, den_degree, init, opts) {
            Ok(c) => {
                if best.as_ref().map_or(true, |b| c.cost < b.cost) {
                    best = Some(c);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let Some(Candidate {
        num_low,
        den_low: full,
        iterations,
        converged,
        ..
    }) = best
    else {
        return Err(last_err.unwrap_or_else(|| Error::Fit("no rational fit succeeded".into())));
    };

    // back from s' = s / w0
    let num: Vec<f64> = num_low
        .iter()
        .enumerate()
        .map(|(j, c)| c / w0.powi(j as i32))
        .rev()
        .collect();
    let den: Vec<f64> = full
        .iter()
        .enumerate()
        .map(|(j, c)| c / w0.powi(j as i32))
        .rev()
        .collect();
    let g = TransferFunction::new(num, den)?;
    if !g.is_stable() {
        return Err(Error::Fit("rational fit could not be stabilized".into()));
    }

    let fitted = g.freq_response(frf.freqs())?;
    let err: f64 = fitted.values().iter().zip(h).map(|(a, b)| (a - b).norm_sqr()).sum();
    let energy: f64 = h.iter().map(|v| v.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(Error::UndefinedMetric("frequency response is identically zero"));
    }
    let fit = fitting_degree_frf(frf, &fitted).ok();
    let report = FitReport {
        stage: "em".into(),
        params: FittedParams::TransferFunction(g.clone()),
        rmse: (err / energy).sqrt(),
        iterations,
        converged,
        residual_norm: err.sqrt(),
        gain: None,
        fitting_degree: fit,
    };
    Ok((g, report))
}
