//! Excitation signals and uniformly sampled time series.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniformly sampled record. Sample `k` sits at `t0 + k * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    t0: f64,
    dt: f64,
    samples: Vec<f64>,
}

impl SampledSignal {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::param("t0", "must be finite"));
        }
        if samples.len() < 2 {
            return Err(Error::param(
                "samples",
                format!("need at least 2 samples, got {}", samples.len()),
            ));
        }
        Ok(Self { t0, dt, samples })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|k| self.time(k))
    }

    /// New signal on the same grid with different values.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != self.samples.len() {
            return Err(Error::Alignment(format!(
                "expected {} samples, got {}",
                self.samples.len(),
                samples.len()
            )));
        }
        Ok(Self {
            t0: self.t0,
            dt: self.dt,
            samples,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    /// True when both signals share t0, dt and length.
    pub fn same_grid(&self, other: &SampledSignal) -> bool {
        self.samples.len() == other.samples.len() && self.dt == other.dt && self.t0 == other.t0
    }

    pub fn check_same_grid(&self, other: &SampledSignal) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Alignment(format!(
                "grids differ: (t0={}, dt={}, n={}) vs (t0={}, dt={}, n={})",
                self.t0,
                self.dt,
                self.len(),
                other.t0,
                other.dt,
                other.len()
            )))
        }
    }

    /// Keeps every `factor`-th sample starting at sample 0.
    pub fn decimate(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::param("factor", "must be at least 1"));
        }
        let samples: Vec<f64> = self.samples.iter().step_by(factor).copied().collect();
        Self::new(self.t0, self.dt * factor as f64, samples)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Writes the `t,value` CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "value"]).map_err(csv_io)?;
        for (k, v) in self.samples.iter().enumerate() {
            w.write_record([format!("{:.16e}", self.time(k)), format!("{v:.16e}")])
                .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `t,value` CSV. The time column must be uniform.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let table = read_numeric_csv(reader, &["t", "value"])?;
        let (t0, dt) = uniform_grid(&table.columns[0], &table.lines)?;
        Self::new(t0, dt, table.columns.into_iter().nth(1).unwrap_or_default())
    }
}

/// Numeric table read from a CSV file with a fixed header.
pub(crate) struct NumericTable {
    pub columns: Vec<Vec<f64>>,
    pub lines: Vec<u64>,
}

pub(crate) fn csv_io(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format {
            line,
            reason: format!("{other:?}"),
        },
    }
}

pub(crate) fn read_numeric_csv<R: Read>(reader: R, header: &[&str]) -> Result<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found: Vec<String> = rdr.headers().map_err(csv_io)?.iter().map(str::to_owned).collect();
    if found.len() != header.len() || found.iter().zip(header).any(|(a, b)| a != b) {
        return Err(Error::Format {
            line: 1,
            reason: format!("expected header {}, found {}", header.join(","), found.join(",")),
        });
    }
    let mut columns = vec![Vec::new(); header.len()];
    let mut lines = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_io)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(Error::Format {
                line,
                reason: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            let v: f64 = field.parse().map_err(|_| Error::Format {
                line,
                reason: format!("cannot parse `{field}` as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Format {
                    line,
                    reason: format!("non-finite value `{field}`"),
                });
            }
            col.push(v);
        }
        lines.push(line);
    }
    if lines.len() < 2 {
        return Err(Error::Format {
            line: lines.last().copied().unwrap_or(1),
            reason: "need at least two data rows".into(),
        });
    }
    Ok(NumericTable { columns, lines })
}

/// Recovers (t0, dt) from a time column, rejecting non-uniform spacing.
pub(crate) fn uniform_grid(t: &[f64], lines: &[u64]) -> Result<(f64, f64)> {
    let t0 = t[0];
    let dt = t[1] - t0;
    if !(dt > 0.0) {
        return Err(Error::Format {
            line: lines[1],
            reason: "time column must be increasing".into(),
        });
    }
    for (k, (&tk, &line)) in t.iter().zip(lines).enumerate() {
        if (tk - (t0 + k as f64 * dt)).abs() > 1e-6 * dt {
            return Err(Error::Format {
                line,
                reason: format!("non-uniform time step at t={tk}"),
            });
        }
    }
    Ok((t0, dt))
}

/// Sum-of-sinusoids term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub amp: f64,
    pub freq: f64,
    pub phase: f64,
    pub kind: ToneKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToneKind {
    Sin,
    Cos,
}

impl Tone {
    pub fn sin(amp: f64, freq: f64) -> Self {
        Self {
            amp,
            freq,
            phase: 0.0,
            kind: ToneKind::Sin,
        }
    }

    pub fn cos(amp: f64, freq: f64, phase: f64) -> Self {
        Self {
            amp,
            freq,
            phase,
            kind: ToneKind::Cos,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let arg = 2.0 * PI * self.freq * t + self.phase;
        match self.kind {
            ToneKind::Sin => self.amp * arg.sin(),
            ToneKind::Cos => self.amp * arg.cos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    /// `sin(2π f_carrier t) · cos(2π f_envelope t)`.
    ModulatedSine { carrier: f64, envelope: f64 },
    /// +1 on the first half of each period, -1 on the second.
    Square { period: f64 },
    /// Linear sweep `cos(2π(f0 t + (f1-f0) t²/(2D)) + phase0)`.
    LinearChirp { f0: f64, f1: f64, phase0: f64 },
    /// Tone sum; `amplitude` is ignored.
    MultiSine { terms: Vec<Tone> },
}

/// Recipe for a deterministic excitation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(flatten)]
    pub kind: SignalKind,
    pub offset: f64,
    pub amplitude: f64,
    pub duration: f64,
    pub dt: f64,
}

/// Number of samples of a `duration` record at step `dt`, endpoint included.
pub fn sample_count(duration: f64, dt: f64) -> usize {
    let ratio = duration / dt;
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.floor()
    };
    steps as usize + 1
}

impl SignalSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::param(
                "duration",
                format!("must be positive, got {}", self.duration),
            ));
        }
        if sample_count(self.duration, self.dt) < 2 {
            return Err(Error::param("dt", "duration shorter than one step"));
        }
        if !self.offset.is_finite() || !self.amplitude.is_finite() {
            return Err(Error::param("amplitude", "offset and amplitude must be finite"));
        }
        let nyquist = self.nyquist();
        let check = |name: &'static str, f: f64| -> Result<()> {
            if !f.is_finite() || f < 0.0 {
                return Err(Error::param(name, format!("frequency {f} Hz must be non-negative")));
            }
            if f >= nyquist {
                return Err(Error::param(
                    name,
                    format!("{f} Hz is at or above the Nyquist frequency {nyquist} Hz"),
                ));
            }
            Ok(())
        };
        match &self.kind {
            SignalKind::ModulatedSine { carrier, envelope } => {
                check("carrier", *carrier)?;
                check("envelope", *envelope)?;
            }
            SignalKind::Square { period } => {
                if !(*period > 0.0) || !period.is_finite() {
                    return Err(Error::param("period", format!("must be positive, got {period}")));
                }
            }
            SignalKind::LinearChirp { f0, f1, phase0 } => {
                if !(*f0 > 0.0) {
                    return Err(Error::param("f0", format!("must be positive, got {f0}")));
                }
                if !(f1 > f0) {
                    return Err(Error::param("f1", format!("sweep end {f1} must exceed start {f0}")));
                }
                if !phase0.is_finite() {
                    return Err(Error::param("phase0", "must be finite"));
                }
                check("f1", *f1)?;
            }
            SignalKind::MultiSine { terms } => {
                for term in terms {
                    check("freq", term.freq)?;
                    if !term.amp.is_finite() || !term.phase.is_finite() {
                        return Err(Error::param("terms", "amplitude and phase must be finite"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn nyquist(&self) -> f64 {
        0.5 / self.dt
    }

    /// Highest frequency the record contains by construction.
    pub fn max_frequency(&self) -> f64 {
        match &self.kind {
            SignalKind::ModulatedSine { carrier, envelope } => carrier + envelope,
            SignalKind::Square { period } => 1.0 / period,
            SignalKind::LinearChirp { f1, .. } => *f1,
            SignalKind::MultiSine { terms } => terms.iter().map(|t| t.freq).fold(0.0, f64::max),
        }
    }

    pub fn len(&self) -> usize {
        sample_count(self.duration, self.dt)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value at time `t`; no validation.
    pub fn value_at(&self, t: f64) -> f64 {
        match &self.kind {
            SignalKind::ModulatedSine { carrier, envelope } => {
                self.offset + self.amplitude * (2.0 * PI * carrier * t).sin() * (2.0 * PI * envelope * t).cos()
            }
            SignalKind::Square { period } => self.offset + self.amplitude * square_unit(t, *period),
            SignalKind::LinearChirp { f0, f1, phase0 } => {
                let k = (f1 - f0) / (2.0 * self.duration);
                self.offset + self.amplitude * (2.0 * PI * (f0 * t + k * t * t) + phase0).cos()
            }
            SignalKind::MultiSine { terms } => self.offset + terms.iter().map(|term| term.eval(t)).sum::<f64>(),
        }
    }

    pub fn sample(&self, k: usize) -> f64 {
        self.value_at(k as f64 * self.dt)
    }

    pub fn generate(&self) -> Result<SampledSignal> {
        self.validate()?;
        let samples = (0..self.len()).map(|k| self.sample(k)).collect();
        SampledSignal::new(0.0, self.dt, samples)
    }
}

/// +1 on `[0, P/2)`, -1 on `[P/2, P)`; switching instants take the new value.
fn square_unit(t: f64, period: f64) -> f64 {
    let half_periods = 2.0 * t / period;
    let nearest = half_periods.round();
    let h = if (half_periods - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest
    } else {
        half_periods.floor()
    };
    if (h as i64).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn gen_modulated_sine(
    offset: f64,
    amp: f64,
    f_carrier: f64,
    f_env: f64,
    duration: f64,
    dt: f64,
) -> Result<SampledSignal> {
    SignalSpec {
        kind: SignalKind::ModulatedSine {
            carrier: f_carrier,
            envelope: f_env,
        },
        offset,
        amplitude: amp,
        duration,
        dt,
    }
    .generate()
}

pub fn gen_square(offset: f64, amp: f64, period: f64, duration: f64, dt: f64) -> Result<SampledSignal> {
    SignalSpec {
        kind: SignalKind::Square { period },
        offset,
        amplitude: amp,
        duration,
        dt,
    }
    .generate()
}

#[allow(clippy::too_many_arguments)]
pub fn gen_chirp(
    offset: f64,
    amp: f64,
    f0: f64,
    f1: f64,
    duration: f64,
    phase0: f64,
    dt: f64,
) -> Result<SampledSignal> {
    SignalSpec {
        kind: SignalKind::LinearChirp { f0, f1, phase0 },
        offset,
        amplitude: amp,
        duration,
        dt,
    }
    .generate()
}

pub fn gen_multisine(offset: f64, terms: &[Tone], duration: f64, dt: f64) -> Result<SampledSignal> {
    SignalSpec {
        kind: SignalKind::MultiSine { terms: terms.to_vec() },
        offset,
        amplitude: 0.0,
        duration,
        dt,
    }
    .generate()
}

/// Standard excitations used for identification and evaluation.
pub mod presets {
    use super::*;

    /// Hysteresis excitation: 50 + 40 sin(2π f t) cos(0.5π t) over 1 s at 10 µs.
    pub fn modulated(carrier: f64) -> SignalSpec {
        SignalSpec {
            kind: SignalKind::ModulatedSine {
                carrier,
                envelope: 0.25,
            },
            offset: 50.0,
            amplitude: 40.0,
            duration: 1.0,
            dt: 1e-5,
        }
    }

    /// Creep excitation: 50 ± 30 V square wave, 80 s period, 160 s.
    pub fn creep_square(dt: f64) -> SignalSpec {
        SignalSpec {
            kind: SignalKind::Square { period: 80.0 },
            offset: 50.0,
            amplitude: 30.0,
            duration: 160.0,
            dt,
        }
    }

    /// Electromechanical excitation: 50 + 40 V sweep from 1 Hz to 2 kHz.
    pub fn em_chirp(duration: f64, dt: f64) -> SignalSpec {
        SignalSpec {
            kind: SignalKind::LinearChirp {
                f0: 1.0,
                f1: 2000.0,
                phase0: -PI / 2.0,
            },
            offset: 50.0,
            amplitude: 40.0,
            duration,
            dt,
        }
    }

    /// uc(t) = 50 + 10 sin(40πt) + 20 sin(80πt) + 15 sin(240πt), 50 ms.
    pub fn composite_uc(dt: f64) -> SignalSpec {
        multisine(
            vec![Tone::sin(10.0, 20.0), Tone::sin(20.0, 40.0), Tone::sin(15.0, 120.0)],
            0.05,
            dt,
        )
    }

    /// upa1(t) = 50 + 15 sin(60πt) + 25 sin(100πt), 200 ms.
    pub fn pair_a1(dt: f64) -> SignalSpec {
        multisine(vec![Tone::sin(15.0, 30.0), Tone::sin(25.0, 50.0)], 0.2, dt)
    }

    /// upa2(t) = 50 + 40 sin(80πt), 200 ms.
    pub fn pair_a2(dt: f64) -> SignalSpec {
        multisine(vec![Tone::sin(40.0, 40.0)], 0.2, dt)
    }

    /// Mixed sine/cosine combination with distinct phases, 200 ms.
    pub fn pair_b1(dt: f64) -> SignalSpec {
        multisine(
            vec![
                Tone::cos(12.0, 25.0, 0.4),
                Tone {
                    amp: 18.0,
                    freq: 45.0,
                    phase: -0.7,
                    kind: ToneKind::Sin,
                },
                Tone::cos(8.0, 85.0, 1.9),
            ],
            0.2,
            dt,
        )
    }

    /// Companion of [`pair_b1`], 200 ms.
    pub fn pair_b2(dt: f64) -> SignalSpec {
        multisine(
            vec![
                Tone {
                    amp: 20.0,
                    freq: 35.0,
                    phase: 0.3,
                    kind: ToneKind::Sin,
                },
                Tone::cos(10.0, 60.0, -1.2),
                Tone {
                    amp: 6.0,
                    freq: 110.0,
                    phase: 2.2,
                    kind: ToneKind::Sin,
                },
            ],
            0.2,
            dt,
        )
    }

    fn multisine(terms: Vec<Tone>, duration: f64, dt: f64) -> SignalSpec {
        SignalSpec {
            kind: SignalKind::MultiSine { terms },
            offset: 50.0,
            amplitude: 0.0,
            duration,
            dt,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn modulated_sine_examples() {
        let s = gen_modulated_sine(50.0, 40.0, 5.0, 0.25, 0.1, 0.05).unwrap();
        assert_eq!(s.samples()[0], 50.0);
        let expected = 50.0 + 40.0 * (0.025 * PI).cos();
        assert!((s.samples()[1] - expected).abs() < 1e-9);
        assert!((s.samples()[1] - 89.8766).abs() < 1e-4);

        let flat = gen_modulated_sine(50.0, 0.0, 5.0, 0.25, 1.0, 1e-3).unwrap();
        assert!(flat.samples().iter().all(|&v| v == 50.0));
    }

    #[test]
    fn nyquist_is_enforced() {
        let err = gen_modulated_sine(50.0, 40.0, 600.0, 0.25, 1.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::Parameter { name: "carrier", .. }));
        let err = gen_chirp(50.0, 40.0, 1.0, 500.0, 1.0, 0.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::Parameter { name: "f1", .. }));
        let err = gen_multisine(0.0, &[Tone::sin(1.0, 500.0)], 1.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::Parameter { name: "freq", .. }));
    }

    #[test]
    fn square_wave_halves() {
        let s = gen_square(50.0, 30.0, 80.0, 160.0, 1.0).unwrap();
        assert_eq!(s.len(), 161);
        assert_eq!(s.samples()[1], 80.0);
        assert_eq!(s.samples()[41], 20.0);
        // switching instants take the new half-period value
        assert_eq!(s.samples()[0], 80.0);
        assert_eq!(s.samples()[40], 20.0);
        assert_eq!(s.samples()[80], 80.0);
        let flat = gen_square(50.0, 0.0, 80.0, 10.0, 1.0).unwrap();
        assert!(flat.samples().iter().all(|&v| v == 50.0));
    }

    #[test]
    fn square_wave_edges_at_fine_step() {
        let s = gen_square(50.0, 30.0, 80.0, 160.0, 5e-3).unwrap();
        assert_eq!(s.len(), 32001);
        assert_eq!(s.samples()[7999], 80.0);
        assert_eq!(s.samples()[8000], 20.0);
        assert_eq!(s.samples()[16000], 80.0);
    }

    #[test]
    fn chirp_examples() {
        let s = gen_chirp(50.0, 40.0, 1.0, 2000.0, 1.0, -PI / 2.0, 1e-4).unwrap();
        assert!((s.samples()[0] - 50.0).abs() < 1e-12);
        let s = gen_chirp(50.0, 40.0, 1.0, 2000.0, 1.0, 0.0, 1e-4).unwrap();
        assert_eq!(s.samples()[0], 90.0);
        assert!(gen_chirp(50.0, 40.0, 10.0, 10.0, 1.0, 0.0, 1e-4).is_err());
    }

    #[test]
    fn chirp_instantaneous_frequency_endpoints() {
        // phase derivative / 2π at both ends of the sweep
        let (f0, f1, d) = (1.0, 2000.0, 60.0);
        let phase = |t: f64| f0 * t + (f1 - f0) * t * t / (2.0 * d);
        let h = 1e-6;
        let start = (phase(h) - phase(0.0)) / h;
        let end = (phase(d) - phase(d - h)) / h;
        assert!((start - f0).abs() < 1e-2);
        assert!((end - f1).abs() < 1e-2);
    }

    #[test]
    fn multisine_examples() {
        let uc = presets::composite_uc(1.0 / 1600.0).generate().unwrap();
        assert_eq!(uc.samples()[0], 50.0);
        assert!((uc.samples()[20] - 60.0).abs() < 1e-9);

        let single = gen_multisine(5.0, &[Tone::sin(40.0, 40.0)], 0.1, 1.0 / 1600.0).unwrap();
        assert!((single.samples()[10] - 45.0).abs() < 1e-12);

        let flat = gen_multisine(7.0, &[], 1.0, 0.1).unwrap();
        assert!(flat.samples().iter().all(|&v| v == 7.0));
    }

    #[test]
    fn inclusive_sample_count() {
        assert_eq!(sample_count(1.0, 1e-5), 100_001);
        assert_eq!(sample_count(160.0, 5e-3), 32_001);
        assert_eq!(sample_count(1.0, 0.3), 4);
        assert_eq!(sample_count(0.05, 1e-5), 5001);
    }

    #[test]
    fn invalid_grid_rejected() {
        assert!(SampledSignal::new(0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(SampledSignal::new(0.0, 1.0, vec![1.0]).is_err());
        assert!(gen_square(0.0, 1.0, 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn csv_rejects_malformed_rows() {
        let text = "t,value\n0,1\n0.1,abc\n";
        match SampledSignal::read_csv(text.as_bytes()) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = "t,value\n0,1\n0.1,2\n0.5,3\n";
        assert!(matches!(
            SampledSignal::read_csv(text.as_bytes()),
            Err(Error::Format { line: 4, .. })
        ));
        assert!(SampledSignal::read_csv("time,v\n0,1\n1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn time_axis_is_multiplicative(dt in 1e-6f64..1.0, n in 2usize..2000) {
            let s = SampledSignal::new(0.0, dt, vec![0.0; n]).unwrap();
            for (k, t) in s.times().enumerate() {
                prop_assert_eq!(t, k as f64 * dt);
            }
        }

        #[test]
        fn csv_round_trip_is_bit_exact(
            values in proptest::collection::vec(-1e6f64..1e6, 2..200),
            dt in 1e-6f64..10.0,
        ) {
            let s = SampledSignal::new(0.0, dt, values).unwrap();
            let mut buf = Vec::new();
            s.write_csv(&mut buf).unwrap();
            let back = SampledSignal::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn generation_is_deterministic(carrier in 0.5f64..100.0, amp in 0.0f64..40.0) {
            let spec = SignalSpec {
                kind: SignalKind::ModulatedSine { carrier, envelope: 0.25 },
                offset: 50.0,
                amplitude: amp,
                duration: 0.2,
                dt: 1e-4,
            };
            let a = spec.generate().unwrap();
            let b = spec.generate().unwrap();
            prop_assert!(a.samples().iter().zip(b.samples()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}
