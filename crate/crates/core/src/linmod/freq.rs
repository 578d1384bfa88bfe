use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{csv_io, read_numeric_csv};

/// Complex response samples of one channel on a frequency grid (Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    freqs: Vec<f64>,
    values: Vec<Complex64>,
    pole_hit: Vec<bool>,
    coherence: Option<Vec<f64>>,
}

/// Coherence below this marks an estimate as low confidence.
pub const LOW_COHERENCE: f64 = 0.5;

impl FrequencyResponse {
    pub fn new(freqs: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        let hits = vec![false; freqs.len()];
        Self::with_pole_hits(freqs, values, hits)
    }

    pub(crate) fn with_pole_hits(freqs: Vec<f64>, values: Vec<Complex64>, pole_hit: Vec<bool>) -> Result<Self> {
        validate_grid(&freqs)?;
        if values.len() != freqs.len() || pole_hit.len() != freqs.len() {
            return Err(Error::Alignment(format!(
                "{} frequencies but {} values",
                freqs.len(),
                values.len()
            )));
        }
        Ok(Self {
            freqs,
            values,
            pole_hit,
            coherence: None,
        })
    }

    pub fn with_coherence(mut self, coherence: Vec<f64>) -> Result<Self> {
        if coherence.len() != self.freqs.len() {
            return Err(Error::Alignment("coherence length".into()));
        }
        self.coherence = Some(coherence);
        Ok(self)
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Points where the evaluation landed on a pole.
    pub fn pole_hits(&self) -> &[bool] {
        &self.pole_hit
    }

    pub fn any_pole_hit(&self) -> bool {
        self.pole_hit.iter().any(|&h| h)
    }

    pub fn coherence(&self) -> Option<&[f64]> {
        self.coherence.as_deref()
    }

    /// Flags estimates with coherence below [`LOW_COHERENCE`].
    pub fn low_confidence(&self) -> Vec<bool> {
        match &self.coherence {
            Some(c) => c.iter().map(|&g| !(g >= LOW_COHERENCE)).collect(),
            None => vec![false; self.freqs.len()],
        }
    }

    pub fn magnitude_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| 20.0 * v.norm().log10()).collect()
    }

    /// Phase in degrees, unwrapped along the grid.
    pub fn phase_deg(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut prev: Option<f64> = None;
        for v in &self.values {
            let mut p = v.arg().to_degrees();
            if let Some(q) = prev {
                while p - q > 180.0 {
                    p -= 360.0;
                }
                while p - q < -180.0 {
                    p += 360.0;
                }
            }
            out.push(p);
            prev = Some(p);
        }
        out
    }

    pub fn bode(&self) -> BodeTable {
        BodeTable {
            freq_hz: self.freqs.clone(),
            mag_db: self.magnitude_db(),
            phase_deg: self.phase_deg(),
        }
    }

    pub fn from_bode(table: &BodeTable) -> Result<Self> {
        let values = table
            .mag_db
            .iter()
            .zip(&table.phase_deg)
            .map(|(&m, &p)| Complex64::from_polar(10f64.powf(m / 20.0), p.to_radians()))
            .collect();
        Self::new(table.freq_hz.clone(), values)
    }
}

fn validate_grid(freqs: &[f64]) -> Result<()> {
    if freqs.is_empty() {
        return Err(Error::param("freqs", "empty frequency grid"));
    }
    if freqs.iter().any(|&f| !(f > 0.0) || !f.is_finite()) {
        return Err(Error::param("freqs", "frequencies must be positive and finite"));
    }
    if freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("freqs", "frequencies must be strictly increasing"));
    }
    Ok(())
}

/// `points` logarithmically spaced frequencies from `fmin` to `fmax`.
pub fn log_space(fmin: f64, fmax: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::param("points", format!("need at least 2, got {points}")));
    }
    if !(fmin > 0.0) || !(fmax > fmin) {
        return Err(Error::param(
            "fmin",
            format!("need 0 < fmin < fmax, got {fmin}, {fmax}"),
        ));
    }
    let (a, b) = (fmin.log10(), fmax.log10());
    let mut out: Vec<f64> = (0..points)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (points - 1) as f64))
        .collect();
    out[0] = fmin;
    out[points - 1] = fmax;
    Ok(out)
}

/// Bode data in the `freq_hz,mag_db,phase_deg` CSV layout.
#[derive(Debug, Clone, PartialEq)]
pub struct BodeTable {
    pub freq_hz: Vec<f64>,
    pub mag_db: Vec<f64>,
    pub phase_deg: Vec<f64>,
}

impl BodeTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["freq_hz", "mag_db", "phase_deg"]).map_err(csv_io)?;
        for ((f, m), p) in self.freq_hz.iter().zip(&self.mag_db).zip(&self.phase_deg) {
            w.write_record([format!("{f:.16e}"), format!("{m:.16e}"), format!("{p:.16e}")])
                .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let table = read_numeric_csv(reader, &["freq_hz", "mag_db", "phase_deg"])?;
        let mut cols = table.columns.into_iter();
        let freq_hz = cols.next().unwrap_or_default();
        validate_grid(&freq_hz)?;
        Ok(Self {
            freq_hz,
            mag_db: cols.next().unwrap_or_default(),
            phase_deg: cols.next().unwrap_or_default(),
        })
    }
}
