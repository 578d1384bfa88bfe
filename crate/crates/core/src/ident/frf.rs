use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linmod::FrequencyResponse;
use crate::signal::SampledSignal;

/// Welch segment length: frequency resolution of half the lowest requested
/// frequency, capped by the record length.
fn segment_length(n: usize, fs: f64, fmin: f64) -> usize {
    let want = (2.0 * fs / fmin).ceil();
    let want = if want >= n as f64 {
        n
    } else {
        (want as usize).next_power_of_two()
    };
    want.min(n)
}

fn segment_starts(n: usize, len: usize) -> Vec<usize> {
    let hop = (len / 2).max(1);
    let mut starts: Vec<usize> = (0..).map(|k| k * hop).take_while(|&s| s + len <= n).collect();
    if let Some(&last) = starts.last() {
        if last + len < n {
            starts.push(n - len);
        }
    }
    starts
}

/// H1 estimate `Pyu / Puu` by Welch averaging (Hann window, 50% overlap),
/// linearly interpolated from the spectral bins onto `freqs`. Coherence is
/// attached so low-confidence points can be spotted.
pub fn estimate_frf(u: &SampledSignal, y: &SampledSignal, freqs: &[f64]) -> Result<FrequencyResponse> {
    u.check_same_grid(y)?;
    let fs = 1.0 / u.dt();
    if freqs.is_empty() {
        return Err(Error::param("freqs", "empty frequency grid"));
    }
    if let Some(&bad) = freqs.iter().find(|&&f| !(f > 0.0 && f < fs / 2.0)) {
        return Err(Error::param("freqs", format!("{bad} Hz outside (0, {} Hz)", fs / 2.0)));
    }
    let n = u.len();
    if n < 16 {
        return Err(Error::param(
            "u",
            format!("record of {n} samples too short for spectral estimation"),
        ));
    }
    let fmin = freqs.iter().copied().fold(f64::INFINITY, f64::min);
    let len = segment_length(n, fs, fmin);
    let window: Vec<f64> = (0..len)
        .map(|k| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / len as f64).cos())
        .collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);

    let bins = len / 2 + 1;
    let (mut puu, mut pyy) = (vec![0.0; bins], vec![0.0; bins]);
    let mut pyu = vec![Complex64::new(0.0, 0.0); bins];
    let load = |x: &[f64]| -> Vec<Complex64> {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        x.iter()
            .zip(&window)
            .map(|(v, w)| Complex64::new((v - mean) * w, 0.0))
            .collect()
    };
    // the record is taken to start from rest, so it is extended backwards
    // with zeros and its first samples get full window weight
    let lead = len / 2;
    let extend = |x: &[f64]| -> Vec<f64> { std::iter::repeat(0.0).take(lead).chain(x.iter().copied()).collect() };
    let (ue, ye) = (extend(u.samples()), extend(y.samples()));
    for start in segment_starts(ue.len(), len) {
        let mut bu = load(&ue[start..start + len]);
        let mut by = load(&ye[start..start + len]);
        fft.process(&mut bu);
        fft.process(&mut by);
        for k in 0..bins {
            puu[k] += bu[k].norm_sqr();
            pyy[k] += by[k].norm_sqr();
            pyu[k] += by[k] * bu[k].conj();
        }
    }

    let h: Vec<Complex64> = (0..bins)
        .map(|k| {
            if puu[k] > 0.0 {
                pyu[k] / puu[k]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let coh: Vec<f64> = (0..bins)
        .map(|k| {
            let d = puu[k] * pyy[k];
            if d > 0.0 {
                (pyu[k].norm_sqr() / d).min(1.0)
            } else {
                0.0
            }
        })
        .collect();

    let df = fs / len as f64;
    let mut values = Vec::with_capacity(freqs.len());
    let mut coherence = Vec::with_capacity(freqs.len());
    for &f in freqs {
        let x = f / df;
        let i = (x.floor() as usize).min(bins - 2);
        let w = x - i as f64;
        values.push(h[i] * (1.0 - w) + h[i + 1] * w);
        coherence.push(coh[i] * (1.0 - w) + coh[i + 1] * w);
    }
    FrequencyResponse::new(freqs.to_vec(), values)?.with_coherence(coherence)
}
