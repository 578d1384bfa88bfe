//! Identification and evaluation record sets: synthesis from a plant model,
//! sensor noise, and the manifest/CSV layout on disk.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::composite::{MimoModel, MimoSimulator};
use crate::error::{Error, Result};
use crate::signal::{csv_io, presets, read_numeric_csv, uniform_grid, SampledSignal, SignalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    HysteresisX,
    HysteresisY,
    CreepX,
    CreepY,
    ChirpX,
    ChirpY,
    HeldOutUcX,
    HeldOutUcY,
    HeldOutPairA,
    HeldOutPairB,
}

impl Role {
    pub const ALL: [Role; 10] = [
        Role::HysteresisX,
        Role::HysteresisY,
        Role::CreepX,
        Role::CreepY,
        Role::ChirpX,
        Role::ChirpY,
        Role::HeldOutUcX,
        Role::HeldOutUcY,
        Role::HeldOutPairA,
        Role::HeldOutPairB,
    ];

    pub const HELD_OUT: [Role; 4] = [
        Role::HeldOutUcX,
        Role::HeldOutUcY,
        Role::HeldOutPairA,
        Role::HeldOutPairB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Role::HysteresisX => "hysteresis_x",
            Role::HysteresisY => "hysteresis_y",
            Role::CreepX => "creep_x",
            Role::CreepY => "creep_y",
            Role::ChirpX => "chirp_x",
            Role::ChirpY => "chirp_y",
            Role::HeldOutUcX => "held_out_uc_x",
            Role::HeldOutUcY => "held_out_uc_y",
            Role::HeldOutPairA => "held_out_pair_a",
            Role::HeldOutPairB => "held_out_pair_b",
        }
    }

    pub fn hysteresis(axis: Axis) -> Role {
        match axis {
            Axis::X => Role::HysteresisX,
            Axis::Y => Role::HysteresisY,
        }
    }

    pub fn creep(axis: Axis) -> Role {
        match axis {
            Axis::X => Role::CreepX,
            Axis::Y => Role::CreepY,
        }
    }

    pub fn chirp(axis: Axis) -> Role {
        match axis {
            Axis::X => Role::ChirpX,
            Axis::Y => Role::ChirpY,
        }
    }

    pub fn is_held_out(self) -> bool {
        Role::HELD_OUT.contains(&self)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Role::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown record role `{s}`")))
    }
}

const RECORD_HEADER: [&str; 5] = ["t", "ux", "uy", "theta_x", "theta_y"];

/// One dual-axis experiment: both drive voltages and both angles.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub ux: SampledSignal,
    pub uy: SampledSignal,
    pub theta_x: SampledSignal,
    pub theta_y: SampledSignal,
}

impl Record {
    pub fn new(ux: SampledSignal, uy: SampledSignal, theta_x: SampledSignal, theta_y: SampledSignal) -> Result<Self> {
        ux.check_same_grid(&uy)?;
        ux.check_same_grid(&theta_x)?;
        ux.check_same_grid(&theta_y)?;
        Ok(Self {
            ux,
            uy,
            theta_x,
            theta_y,
        })
    }

    pub fn dt(&self) -> f64 {
        self.ux.dt()
    }

    pub fn len(&self) -> usize {
        self.ux.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ux.is_empty()
    }

    pub fn input(&self, axis: Axis) -> &SampledSignal {
        match axis {
            Axis::X => &self.ux,
            Axis::Y => &self.uy,
        }
    }

    pub fn theta(&self, axis: Axis) -> &SampledSignal {
        match axis {
            Axis::X => &self.theta_x,
            Axis::Y => &self.theta_y,
        }
    }

    /// `t,ux,uy,theta_x,theta_y` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(RECORD_HEADER).map_err(csv_io)?;
        let cols = [&self.ux, &self.uy, &self.theta_x, &self.theta_y];
        for k in 0..self.len() {
            let mut row = vec![format!("{:.16e}", self.ux.time(k))];
            row.extend(cols.iter().map(|c| format!("{:.16e}", c.samples()[k])));
            w.write_record(&row).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let table = read_numeric_csv(reader, &RECORD_HEADER)?;
        let (t0, dt) = uniform_grid(&table.columns[0], &table.lines)?;
        let mut cols = table.columns.into_iter().skip(1);
        let mut next = || SampledSignal::new(t0, dt, cols.next().unwrap_or_default());
        Record::new(next()?, next()?, next()?, next()?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub role: Role,
    pub path: PathBuf,
}

/// `{records: [{role, path}]}`; relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub records: Vec<RecordEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Records keyed by role.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordSet {
    records: BTreeMap<Role, Record>,
}

impl RecordSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, role: Role, record: Record) {
        self.records.insert(role, record);
    }

    pub fn remove(&mut self, role: Role) -> Option<Record> {
        self.records.remove(&role)
    }

    pub fn contains(&self, role: Role) -> bool {
        self.records.contains_key(&role)
    }

    /// The record for `role`, or a configuration error naming it.
    pub fn get(&self, role: Role) -> Result<&Record> {
        self.records
            .get(&role)
            .ok_or_else(|| Error::Config(format!("dataset has no `{role}` record")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Role, &Record)> {
        self.records.iter().map(|(r, rec)| (*r, rec))
    }

    pub fn load(manifest_path: &Path) -> Result<Self> {
        let manifest = Manifest::read(manifest_path)?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let mut set = RecordSet::new();
        for entry in &manifest.records {
            let path = if entry.path.is_absolute() {
                entry.path.clone()
            } else {
                base.join(&entry.path)
            };
            let file = File::open(&path)
                .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
            set.insert(entry.role, Record::read_csv(BufReader::new(file))?);
        }
        Ok(set)
    }

    /// Writes `<role>.csv` files and `manifest.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<Manifest> {
        std::fs::create_dir_all(dir)?;
        let mut manifest = Manifest::default();
        for (role, record) in self.iter() {
            let name = PathBuf::from(format!("{role}.csv"));
            let mut w = BufWriter::new(File::create(dir.join(&name))?);
            record.write_csv(&mut w)?;
            w.flush()?;
            manifest.records.push(RecordEntry { role, path: name });
        }
        manifest.write(&dir.join("manifest.json"))?;
        Ok(manifest)
    }
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt()
}

/// White Gaussian noise at `snr_db` below the signal's RMS. A zero signal is
/// returned unchanged.
pub fn add_noise(x: &SampledSignal, snr_db: f64, rng: &mut impl Rng) -> Result<SampledSignal> {
    if snr_db.is_nan() {
        return Err(Error::param("snr_db", "is NaN"));
    }
    let sigma = rms(x.samples()) * 10f64.powf(-snr_db / 20.0);
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    x.with_samples(
        x.samples()
            .iter()
            .map(|&v| v + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
}

/// `20 log10(rms(clean) / rms(noisy − clean))`; infinite when identical.
pub fn measure_snr_db(clean: &SampledSignal, noisy: &SampledSignal) -> Result<f64> {
    clean.check_same_grid(noisy)?;
    let err: Vec<f64> = noisy
        .samples()
        .iter()
        .zip(clean.samples())
        .map(|(a, b)| a - b)
        .collect();
    let (s, n) = (rms(clean.samples()), rms(&err));
    if s == 0.0 {
        return Err(Error::UndefinedMetric("clean signal is identically zero"));
    }
    Ok(if n == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (s / n).log10()
    })
}

/// Recipe for a synthetic record set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    /// Sensor SNR in dB on every angle channel; `None` is noiseless.
    pub noise_db: Option<f64>,
    pub seed: u64,
    /// Simulation step; every record is simulated at this rate.
    pub sim_dt: f64,
    pub carrier_hz: f64,
    pub creep_dt: f64,
    pub chirp_duration: f64,
    pub chirp_dt: f64,
    /// Drive level of a silent axis.
    pub silent_level: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            noise_db: None,
            seed: 0,
            sim_dt: 1e-5,
            carrier_hz: 5.0,
            creep_dt: 5e-3,
            chirp_duration: 60.0,
            chirp_dt: 1e-4,
            silent_level: 50.0,
        }
    }
}

fn ratio(dt: f64, sim_dt: f64, name: &'static str) -> Result<usize> {
    let r = dt / sim_dt;
    let n = r.round();
    if !(n >= 1.0) || (r - n).abs() > 1e-6 * n {
        return Err(Error::param(
            name,
            format!("{dt} is not a multiple of the simulation step {sim_dt}"),
        ));
    }
    Ok(n as usize)
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sim_dt > 0.0) {
            return Err(Error::param("sim_dt", "must be positive"));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(Error::param("carrier_hz", "must be positive"));
        }
        if !(self.chirp_duration > 0.0) {
            return Err(Error::param("chirp_duration", "must be positive"));
        }
        if let Some(db) = self.noise_db {
            if db.is_nan() {
                return Err(Error::param("noise_db", "is NaN"));
            }
        }
        ratio(self.creep_dt, self.sim_dt, "creep_dt")?;
        ratio(self.chirp_dt, self.sim_dt, "chirp_dt")?;
        Ok(())
    }
}

/// Streams both inputs through the plant, keeping every `keep`-th sample.
fn run(model: &MimoModel, ux: &SignalSpec, uy: &SignalSpec, keep: usize) -> Result<Record> {
    let dt = ux.dt;
    let n = ux.len().max(uy.len());
    let mut sim = MimoSimulator::new(model, dt)?;
    let cap = n / keep + 1;
    let mut cols = [
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
    ];
    for k in 0..n {
        let (a, b) = (ux.sample(k), uy.sample(k));
        let (tx, ty) = sim.step(a, b)?;
        if k % keep == 0 {
            for (c, v) in cols.iter_mut().zip([a, b, tx, ty]) {
                c.push(v);
            }
        }
    }
    let step = dt * keep as f64;
    let [a, b, c, d] = cols;
    Record::new(
        SampledSignal::new(0.0, step, a)?,
        SampledSignal::new(0.0, step, b)?,
        SampledSignal::new(0.0, step, c)?,
        SampledSignal::new(0.0, step, d)?,
    )
}

fn silent(level: f64, like: &SignalSpec) -> SignalSpec {
    SignalSpec {
        kind: crate::signal::SignalKind::MultiSine { terms: Vec::new() },
        offset: level,
        amplitude: 0.0,
        duration: like.duration,
        dt: like.dt,
    }
}

/// Simulates the identification records (per axis: modulated sine, square
/// wave, chirp, each with the other axis silent) and the held-out records.
pub fn synthesize_dataset(model: &MimoModel, cfg: &DatasetConfig) -> Result<RecordSet> {
    cfg.validate()?;
    let dt = cfg.sim_dt;
    let hyst = SignalSpec {
        dt,
        ..presets::modulated(cfg.carrier_hz)
    };
    let creep = presets::creep_square(dt);
    let chirp = presets::em_chirp(cfg.chirp_duration, dt);
    let creep_keep = ratio(cfg.creep_dt, dt, "creep_dt")?;
    let chirp_keep = ratio(cfg.chirp_dt, dt, "chirp_dt")?;

    let single = |axis: Axis, spec: &SignalSpec, keep: usize| {
        let quiet = silent(cfg.silent_level, spec);
        match axis {
            Axis::X => run(model, spec, &quiet, keep),
            Axis::Y => run(model, &quiet, spec, keep),
        }
    };

    let mut set = RecordSet::new();
    for axis in [Axis::X, Axis::Y] {
        set.insert(Role::hysteresis(axis), single(axis, &hyst, 1)?);
        set.insert(Role::creep(axis), single(axis, &creep, creep_keep)?);
        set.insert(Role::chirp(axis), single(axis, &chirp, chirp_keep)?);
    }
    let uc = presets::composite_uc(dt);
    set.insert(Role::HeldOutUcX, single(Axis::X, &uc, 1)?);
    set.insert(Role::HeldOutUcY, single(Axis::Y, &uc, 1)?);
    set.insert(
        Role::HeldOutPairA,
        run(model, &presets::pair_a1(dt), &presets::pair_a2(dt), 1)?,
    );
    set.insert(
        Role::HeldOutPairB,
        run(model, &presets::pair_b1(dt), &presets::pair_b2(dt), 1)?,
    );

    if let Some(db) = cfg.noise_db {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for role in Role::ALL {
            if let Some(rec) = set.records.get_mut(&role) {
                rec.theta_x = add_noise(&rec.theta_x, db, &mut rng)?;
                rec.theta_y = add_noise(&rec.theta_y, db, &mut rng)?;
            }
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_names_round_trip() {
        for r in Role::ALL {
            assert_eq!(r.name().parse::<Role>().unwrap(), r);
            assert_eq!(serde_json::to_string(&r).unwrap(), format!("\"{}\"", r.name()));
        }
        assert!("chirp_z".parse::<Role>().is_err());
    }

    #[test]
    fn record_csv_round_trip() {
        let s = |v: Vec<f64>| SampledSignal::new(0.0, 1e-5, v).unwrap();
        let rec = Record::new(
            s(vec![50.0, 51.5, 52.25]),
            s(vec![50.0, 50.0, 50.0]),
            s(vec![0.0, 1.0 / 3.0, -2e-7]),
            s(vec![0.0, 1e-300, 3.0]),
        )
        .unwrap();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        assert_eq!(Record::read_csv(&buf[..]).unwrap(), rec);
    }

    #[test]
    fn missing_role_is_named() {
        let err = RecordSet::new().get(Role::ChirpY).unwrap_err();
        assert!(err.to_string().contains("chirp_y"), "{err}");
    }

    #[test]
    fn noise_level_matches_request() {
        let x = SampledSignal::new(0.0, 1.0, (0..20000).map(|k| (k as f64 * 0.01).sin() + 0.3).collect()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noisy = add_noise(&x, 40.0, &mut rng).unwrap();
        assert!((measure_snr_db(&x, &noisy).unwrap() - 40.0).abs() < 0.2);
        assert_eq!(measure_snr_db(&x, &x).unwrap(), f64::INFINITY);
    }

    #[test]
    fn step_ratio_checked() {
        assert_eq!(ratio(5e-3, 1e-5, "creep_dt").unwrap(), 500);
        assert!(ratio(1.5e-5, 1e-5, "creep_dt").is_err());
        let cfg = DatasetConfig {
            chirp_dt: 3e-6,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
