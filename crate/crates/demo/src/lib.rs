//! Browser bindings for the static demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented
//! per function. The `*_data` functions are the plain Rust versions.

use pfsm_core::composite::{reference_plant, simulate_mimo};
use pfsm_core::hysteresis::{simulate_hysteresis, BoucWenParams, Variant, DEFAULT_SUBSTEPS};
use pfsm_core::linmod::log_space;
use pfsm_core::signal::{SignalKind, SignalSpec, Tone};
use pfsm_core::{Error, Result};
use wasm_bindgen::prelude::*;

const DT: f64 = 1e-4;

fn variant(name: &str) -> Result<Variant> {
    match name {
        "classic" => Ok(Variant::Classic),
        "asymmetric-sign" => Ok(Variant::AsymmetricSign),
        "improved" => Ok(Variant::AsymmetricRateIndependent),
        other => Err(Error::Config(format!("unknown variant `{other}`"))),
    }
}

/// Single-actuator loop under a 4 s modulated sine: `[u0, v0, u1, v1, ..]`.
pub fn hysteresis_loop_data(variant_name: &str, amplitude: f64, carrier: f64) -> Result<Vec<f64>> {
    let mut psi = BoucWenParams::reference_x1();
    psi.variant = variant(variant_name)?;
    if psi.variant == Variant::Classic {
        psi.delta = 0.0;
    }
    let u = SignalSpec {
        kind: SignalKind::ModulatedSine {
            carrier,
            envelope: 0.125,
        },
        offset: 50.0,
        amplitude,
        duration: 4.0,
        dt: DT,
    }
    .generate()?;
    let v = simulate_hysteresis(&psi, &u, DEFAULT_SUBSTEPS)?;
    Ok(u.samples()
        .iter()
        .zip(v.samples())
        .flat_map(|(&a, &b)| [a, b])
        .collect())
}

/// Reference-plant channel response: `[f.., mag_db.., phase_deg..]`.
pub fn bode_data(channel: &str, fmin: f64, fmax: f64, points: usize) -> Result<Vec<f64>> {
    let m = reference_plant();
    let tf = match channel {
        "xx" => &m.x.em_direct,
        "xy" => &m.em_xy,
        "yy" => &m.y.em_direct,
        "yx" => &m.em_yx,
        "crp_x" => &m.x.crp,
        "crp_y" => &m.y.crp,
        other => return Err(Error::Config(format!("unknown channel `{other}`"))),
    };
    let freqs = log_space(fmin, fmax, points)?;
    let r = tf.freq_response(&freqs)?;
    let mut out = freqs;
    out.extend(r.magnitude_db());
    out.extend(r.phase_deg());
    Ok(out)
}

/// Mirror tilt for sinusoidal drives about 50 V: `[θx0, θy0, θx1, θy1, ..]`.
pub fn trajectory_data(
    amp_x: f64,
    freq_x: f64,
    amp_y: f64,
    freq_y: f64,
    coupled: bool,
    duration: f64,
) -> Result<Vec<f64>> {
    let drive = |amplitude: f64, freq: f64| {
        SignalSpec {
            kind: SignalKind::MultiSine {
                terms: vec![Tone::sin(amplitude, freq)],
            },
            offset: 50.0,
            amplitude: 0.0,
            duration,
            dt: DT,
        }
        .generate()
    };
    let model = if coupled {
        reference_plant()
    } else {
        reference_plant().without_coupling()
    };
    let (tx, ty) = simulate_mimo(&model, &drive(amp_x, freq_x)?, &drive(amp_y, freq_y)?)?;
    Ok(tx
        .samples()
        .iter()
        .zip(ty.samples())
        .flat_map(|(&a, &b)| [a, b])
        .collect())
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn hysteresis_loop(variant: &str, amplitude: f64, carrier: f64) -> std::result::Result<Vec<f64>, JsError> {
    hysteresis_loop_data(variant, amplitude, carrier).map_err(js)
}

#[wasm_bindgen]
pub fn bode(channel: &str, fmin: f64, fmax: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    bode_data(channel, fmin, fmax, points).map_err(js)
}

#[wasm_bindgen]
pub fn trajectory(
    amp_x: f64,
    freq_x: f64,
    amp_y: f64,
    freq_y: f64,
    coupled: bool,
    duration: f64,
) -> std::result::Result<Vec<f64>, JsError> {
    trajectory_data(amp_x, freq_x, amp_y, freq_y, coupled, duration).map_err(js)
}
