use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use pfsm_core::composite::{reference_plant, simulate_mimo, InputUnit, MimoModel};
use pfsm_core::hysteresis::Variant;
use pfsm_core::ident::{
    evaluate_held_out, identify_pipeline_with, rmse_relative, synthesize_dataset, DatasetConfig, HeldOutScore,
    PipelineConfig, RecordSet,
};
use pfsm_core::linmod::log_space;
use pfsm_core::signal::{SampledSignal, SignalKind, SignalSpec, Tone, ToneKind};
use pfsm_core::Error;
use serde_json::json;

use crate::{BodeArgs, Channel, CliError, CliResult, EvalArgs, GenArgs, IdentifyArgs, Kind, ModelSource};
use crate::{SimulateArgs, SynthArgs, Unit, VariantArg};

fn at(path: &Path) -> impl FnOnce(Error) -> CliError + '_ {
    move |source| CliError::At {
        path: path.display().to_string(),
        source,
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| at(path)(Error::Io(e)))
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| at(path)(Error::Io(e)))
}

fn make_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| at(dir)(Error::Io(e)))
}

fn read_signal(path: &Path) -> CliResult<SampledSignal> {
    let file = File::open(path).map_err(|e| at(path)(Error::Io(e)))?;
    SampledSignal::read_csv(BufReader::new(file)).map_err(at(path))
}

fn write_signal(path: &Path, s: &SampledSignal) -> CliResult {
    let mut w = create(path)?;
    s.write_csv(&mut w).map_err(at(path))?;
    w.flush().map_err(|e| at(path)(Error::Io(e)))
}

fn load_model(src: &ModelSource) -> CliResult<MimoModel> {
    match &src.model {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| at(path)(Error::Io(e)))?;
            MimoModel::from_json(&text).map_err(at(path))
        }
        None => Ok(reference_plant()),
    }
}

/// Core parameter names in terms of the flags that set them.
fn flag_error(e: Error) -> CliError {
    match e {
        Error::Parameter { name, reason } => {
            let flag = match name {
                "duration" => "--dur",
                "envelope" => "--env",
                "amplitude" => "--amp/--offset",
                "freq" | "terms" => "--term",
                "dt" => "--dt",
                "carrier" => "--carrier",
                "period" => "--period",
                "f0" => "--f0",
                "f1" => "--f1",
                "phase0" => "--phase0",
                other => other,
            };
            CliError::Usage(format!("{flag}: {reason}"))
        }
        other => other.into(),
    }
}

fn parse_term(text: &str) -> CliResult<Tone> {
    let bad = |why: &str| CliError::Usage(format!("--term `{text}`: {why} (amp:freq[:phase[:sin|cos]])"));
    let parts: Vec<&str> = text.split(':').collect();
    if !(2..=4).contains(&parts.len()) {
        return Err(bad("expected 2 to 4 fields"));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("`{s}` is not a number")))
    };
    let kind = match parts.get(3).map(|s| s.trim()) {
        None | Some("sin") => ToneKind::Sin,
        Some("cos") => ToneKind::Cos,
        Some(other) => return Err(bad(&format!("unknown tone kind `{other}`"))),
    };
    Ok(Tone {
        amp: num(parts[0])?,
        freq: num(parts[1])?,
        phase: parts.get(2).map(|p| num(p)).transpose()?.unwrap_or(0.0),
        kind,
    })
}

pub fn gen(a: GenArgs) -> CliResult {
    let (kind, amp) = match a.kind {
        Kind::ModulatedSine => (
            SignalKind::ModulatedSine {
                carrier: a.carrier,
                envelope: a.env,
            },
            40.0,
        ),
        Kind::Square => (SignalKind::Square { period: a.period }, 30.0),
        Kind::Chirp => (
            SignalKind::LinearChirp {
                f0: a.f0,
                f1: a.f1,
                phase0: a.phase0,
            },
            40.0,
        ),
        Kind::Multisine => {
            if a.terms.is_empty() {
                return Err(CliError::Usage("multisine needs at least one --term".into()));
            }
            let terms = a.terms.iter().map(|t| parse_term(t)).collect::<CliResult<_>>()?;
            (SignalKind::MultiSine { terms }, 0.0)
        }
    };
    if !matches!(a.kind, Kind::Multisine) && !a.terms.is_empty() {
        return Err(CliError::Usage("--term only applies to --kind multisine".into()));
    }
    let spec = SignalSpec {
        kind,
        offset: a.offset.unwrap_or(50.0),
        amplitude: a.amp.unwrap_or(amp),
        duration: a.dur,
        dt: a.dt,
    };
    let signal = spec.generate().map_err(flag_error)?;
    write_signal(&a.out, &signal)?;
    let (lo, hi) = signal.min_max();
    println!(
        "{} samples, range [{lo:.4}, {hi:.4}], max frequency {} Hz of Nyquist {} Hz",
        signal.len(),
        spec.max_frequency(),
        spec.nyquist()
    );
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> CliResult {
    let model = load_model(&a.source)?;
    let unit = match a.unit {
        Unit::Drive => InputUnit::Drive,
        Unit::Command => InputUnit::Command,
    };
    let load = |p: &Option<std::path::PathBuf>| -> CliResult<Option<SampledSignal>> {
        p.as_deref()
            .map(|p| read_signal(p).map(|s| unit.to_drive(&s, model.k_amp)))
            .transpose()
    };
    let (ux, uy) = (load(&a.ux)?, load(&a.uy)?);
    let hold = |s: &SampledSignal| s.map(|_| model.u_max / 2.0);
    let (ux, uy) = match (ux, uy) {
        (Some(x), Some(y)) => (x, y),
        (Some(x), None) => {
            let y = hold(&x);
            (x, y)
        }
        (None, Some(y)) => (hold(&y), y),
        (None, None) => return Err(CliError::Usage("give at least one of --ux, --uy".into())),
    };
    let (tx, ty) = simulate_mimo(&model, &ux, &uy)?;
    make_dir(&a.out_dir)?;
    write_signal(&a.out_dir.join("theta_x.csv"), &tx)?;
    write_signal(&a.out_dir.join("theta_y.csv"), &ty)?;

    let mut summary = json!({
        "samples": tx.len(),
        "dt": tx.dt(),
        "theta_x_range": tx.min_max(),
        "theta_y_range": ty.min_max(),
    });
    for (key, path, pred) in [("rmse_x", &a.ref_x, &tx), ("rmse_y", &a.ref_y, &ty)] {
        if let Some(path) = path {
            let meas = read_signal(path)?;
            let e = rmse_relative(pred, &meas).map_err(at(path))?;
            println!("{key} {e:.6}");
            summary[key] = json!(e);
        }
    }
    let text = serde_json::to_string_pretty(&summary).map_err(Error::from)?;
    write_text(&a.out_dir.join("summary.json"), &text)?;
    println!("{} samples written to {}", tx.len(), a.out_dir.display());
    Ok(())
}

fn print_scores(scores: &[HeldOutScore]) {
    println!("{:<16} {:>12} {:>16}", "record", "rmse", "without_coupling");
    for s in scores {
        println!(
            "{:<16} {:>12.6} {:>16.6}",
            s.role.name(),
            s.rmse,
            s.rmse_without_coupling
        );
    }
}

pub fn identify(a: IdentifyArgs) -> CliResult {
    let data = RecordSet::load(&a.manifest).map_err(at(&a.manifest))?;
    let mut cfg = PipelineConfig {
        variant: match a.variant {
            VariantArg::Classic => Variant::Classic,
            VariantArg::AsymmetricSign => Variant::AsymmetricSign,
            VariantArg::Improved => Variant::AsymmetricRateIndependent,
        },
        creep_order: a.creep_order,
        refine_passes: a.refine_passes,
        ..PipelineConfig::default()
    };
    cfg.fit.seed = a.seed;

    let reports_dir = a.out_dir.join("reports");
    make_dir(&reports_dir)?;
    let mut sink_err: Option<CliError> = None;
    let result = identify_pipeline_with(&data, &cfg, |r| {
        if sink_err.is_some() {
            return;
        }
        eprintln!("{:<20} rmse {:.6}", r.stage, r.rmse);
        let path = reports_dir.join(format!("{}.json", r.stage));
        let out = serde_json::to_string_pretty(r).map_err(|e| CliError::from(Error::from(e)));
        if let Err(e) = out.and_then(|text| write_text(&path, &text)) {
            sink_err = Some(e);
        }
    });
    if let Some(e) = sink_err {
        return Err(e);
    }
    let result = result?;
    let model_path = a.out_dir.join("model.json");
    write_text(&model_path, &result.model.to_json()?)?;
    println!("model written to {}", model_path.display());

    if data.iter().any(|(role, _)| role.is_held_out()) {
        let scores = evaluate_held_out(&result.model, &data)?;
        print_scores(&scores);
        let text = serde_json::to_string_pretty(&scores).map_err(Error::from)?;
        write_text(&a.out_dir.join("held_out.json"), &text)?;
    }
    Ok(())
}

pub fn eval(a: EvalArgs) -> CliResult {
    let model = load_model(&a.source)?;
    let data = RecordSet::load(&a.manifest).map_err(at(&a.manifest))?;
    let scores = evaluate_held_out(&model, &data)?;
    print_scores(&scores);
    if let Some(out) = &a.out {
        let text = serde_json::to_string_pretty(&scores).map_err(Error::from)?;
        write_text(out, &text)?;
    }
    Ok(())
}

pub fn bode(a: BodeArgs) -> CliResult {
    let model = load_model(&a.source)?;
    let tf = match a.channel {
        Channel::Xx => &model.x.em_direct,
        Channel::Xy => &model.em_xy,
        Channel::Yy => &model.y.em_direct,
        Channel::Yx => &model.em_yx,
        Channel::CrpX => &model.x.crp,
        Channel::CrpY => &model.y.crp,
    };
    let freqs = log_space(a.fmin, a.fmax, a.points).map_err(|e| match e {
        Error::Parameter { name, reason } => CliError::Usage(format!("--{name}: {reason}")),
        other => other.into(),
    })?;
    let response = tf.freq_response(&freqs)?;
    if response.any_pole_hit() {
        eprintln!("warning: frequency grid touches a pole; those rows are not finite");
    }
    let mut w = create(&a.out)?;
    response.bode().write_csv(&mut w).map_err(at(&a.out))?;
    w.flush().map_err(|e| at(&a.out)(Error::Io(e)))?;
    println!("{} points written to {}", freqs.len(), a.out.display());
    Ok(())
}

pub fn synthesize(a: SynthArgs) -> CliResult {
    let cfg = DatasetConfig {
        noise_db: a.noise_db,
        seed: a.seed,
        chirp_duration: a.chirp_duration,
        carrier_hz: a.carrier,
        ..DatasetConfig::default()
    };
    let data = synthesize_dataset(&reference_plant(), &cfg)?;
    let manifest = data.save(&a.out_dir).map_err(at(&a.out_dir))?;
    println!(
        "{} records written to {}",
        manifest.records.len(),
        a.out_dir.join("manifest.json").display()
    );
    Ok(())
}
