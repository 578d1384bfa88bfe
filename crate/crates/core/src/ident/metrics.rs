use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linmod::FrequencyResponse;
use crate::signal::SampledSignal;

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Alignment(format!("lengths differ: {a} vs {b}")));
    }
    Ok(())
}

/// `sqrt(Σ(pred − meas)² / Σ meas²)` over raw samples.
pub fn rmse_relative_slice(pred: &[f64], meas: &[f64]) -> Result<f64> {
    check_len(pred.len(), meas.len())?;
    let energy: f64 = meas.iter().map(|m| m * m).sum();
    if energy == 0.0 {
        return Err(Error::UndefinedMetric("measurement is identically zero"));
    }
    let err: f64 = pred.iter().zip(meas).map(|(p, m)| (p - m) * (p - m)).sum();
    Ok((err / energy).sqrt())
}

/// Relative RMSE of a prediction against a measurement on the same grid.
pub fn rmse_relative(pred: &SampledSignal, meas: &SampledSignal) -> Result<f64> {
    pred.check_same_grid(meas)?;
    rmse_relative_slice(pred.samples(), meas.samples())
}

pub(crate) fn normalize_slice(x: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if !(hi > lo) {
        return Err(Error::DegenerateRange("signal is constant"));
    }
    let span = hi - lo;
    Ok(x.iter().map(|&v| (v - lo) / span).collect())
}

/// [`normalize_slice`] with the extremes taken from a centered moving
/// average of `window` samples, so isolated noise peaks do not set the range.
pub(crate) fn normalize_smoothed(x: &[f64], window: usize) -> Result<Vec<f64>> {
    let half = window.min(x.len()).saturating_sub(1) / 2;
    if half == 0 {
        return normalize_slice(x);
    }
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    for &v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    let width = (2 * half + 1) as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in half..x.len() - half {
        let m = (prefix[k + half + 1] - prefix[k - half]) / width;
        lo = lo.min(m);
        hi = hi.max(m);
    }
    if !(hi > lo) {
        return Err(Error::DegenerateRange("signal is constant"));
    }
    Ok(x.iter().map(|&v| (v - lo) / (hi - lo)).collect())
}

/// Affine map of the signal's range onto `[0, 1]`.
pub fn normalize_unit(x: &SampledSignal) -> Result<SampledSignal> {
    x.with_samples(normalize_slice(x.samples())?)
}

/// `100 (1 − ‖y − ŷ‖ / ‖y − mean(y)‖)` on complex samples.
pub fn fitting_degree_complex(y: &[Complex64], yhat: &[Complex64]) -> Result<f64> {
    check_len(y.len(), yhat.len())?;
    if y.is_empty() {
        return Err(Error::UndefinedMetric("empty reference"));
    }
    let mean = y.iter().sum::<Complex64>() / y.len() as f64;
    let spread: f64 = y.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>().sqrt();
    if spread == 0.0 {
        return Err(Error::UndefinedMetric("reference has zero variance"));
    }
    let err: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    Ok(100.0 * (1.0 - err / spread))
}

/// Fitting degree of a time-domain prediction.
pub fn fitting_degree(y: &SampledSignal, yhat: &SampledSignal) -> Result<f64> {
    y.check_same_grid(yhat)?;
    let a: Vec<Complex64> = y.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let b: Vec<Complex64> = yhat.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fitting_degree_complex(&a, &b)
}

/// Fitting degree of a frequency response against a reference response.
pub fn fitting_degree_frf(y: &FrequencyResponse, yhat: &FrequencyResponse) -> Result<f64> {
    if y.freqs() != yhat.freqs() {
        return Err(Error::Alignment("frequency grids differ".into()));
    }
    fitting_degree_complex(y.values(), yhat.values())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(v: &[f64]) -> SampledSignal {
        SampledSignal::new(0.0, 1.0, v.to_vec()).unwrap()
    }

    #[test]
    fn rmse_examples() {
        let m = sig(&[1.0, -2.0, 3.0]);
        assert_eq!(rmse_relative(&m, &m).unwrap(), 0.0);
        assert_eq!(rmse_relative(&m.map(|v| 2.0 * v), &m).unwrap(), 1.0);
        assert_eq!(
            rmse_relative(&sig(&[1.0, 1.0]), &sig(&[1.0, -1.0])).unwrap(),
            2f64.sqrt()
        );
        assert!(matches!(
            rmse_relative(&sig(&[1.0, 1.0]), &sig(&[0.0, 0.0])),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize_unit(&sig(&[0.0, 5.0, 10.0])).unwrap().samples(),
            &[0.0, 0.5, 1.0]
        );
        assert_eq!(
            normalize_unit(&sig(&[-2.0, 0.0, 2.0])).unwrap().samples(),
            &[0.0, 0.5, 1.0]
        );
        let unit = sig(&[0.0, 0.25, 1.0]);
        assert_eq!(normalize_unit(&unit).unwrap(), unit);
        assert!(matches!(
            normalize_unit(&sig(&[3.0, 3.0])),
            Err(Error::DegenerateRange(_))
        ));
    }

    #[test]
    fn fitting_degree_examples() {
        let y = sig(&[0.0, 2.0]);
        assert_eq!(fitting_degree(&y, &y).unwrap(), 100.0);
        assert_eq!(fitting_degree(&y, &sig(&[1.0, 1.0])).unwrap(), 0.0);
        let fd = fitting_degree(&y, &sig(&[0.0, 1.0])).unwrap();
        assert!((fd - 100.0 * (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-12);
        assert!(fitting_degree(&sig(&[1.0, 1.0]), &y).is_err());
    }
}
