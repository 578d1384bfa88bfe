use std::f64::consts::PI;

use pfsm_core::signal::*;
use proptest::prelude::*;

#[test]
fn modulated_sine_matches_formula() {
    let s = gen_modulated_sine(50.0, 40.0, 5.0, 0.25, 0.1, 1e-3).unwrap();
    assert_eq!(s.samples()[0], 50.0);
    let v = s.samples()[50];
    assert!((v - 89.876_6).abs() < 1e-4, "{v}");
    let flat = gen_modulated_sine(50.0, 0.0, 5.0, 0.25, 0.1, 1e-3).unwrap();
    assert!(flat.samples().iter().all(|&x| x == 50.0));
}

#[test]
fn square_wave_levels() {
    let s = gen_square(50.0, 30.0, 80.0, 160.0, 1.0).unwrap();
    assert_eq!(s.len(), 161);
    assert_eq!(s.samples()[1], 80.0);
    assert_eq!(s.samples()[41], 20.0);
    // switching instants take the new half-period's value
    assert_eq!(s.samples()[40], 20.0);
    assert_eq!(s.samples()[80], 80.0);
}

#[test]
fn chirp_start_values_and_degenerate_sweep() {
    let s = gen_chirp(50.0, 40.0, 1.0, 2000.0, 1.0, -PI / 2.0, 1e-4).unwrap();
    assert!((s.samples()[0] - 50.0).abs() < 1e-12);
    let s = gen_chirp(50.0, 40.0, 1.0, 2000.0, 1.0, 0.0, 1e-4).unwrap();
    assert_eq!(s.samples()[0], 90.0);
    assert!(gen_chirp(50.0, 40.0, 10.0, 10.0, 1.0, 0.0, 1e-4).is_err());
    assert!(gen_chirp(50.0, 40.0, 1.0, 6000.0, 1.0, 0.0, 1e-4).is_err());
}

#[test]
fn multisine_uc_values() {
    let uc = presets::composite_uc(1.0 / 1600.0).generate().unwrap();
    assert_eq!(uc.samples()[0], 50.0);
    assert!((uc.samples()[20] - 60.0).abs() < 1e-12);
    let one = gen_multisine(0.0, &[Tone::sin(40.0, 40.0)], 0.01, 1.0 / 1600.0).unwrap();
    assert!((one.samples()[10] - 40.0).abs() < 1e-12);
    let none = gen_multisine(7.0, &[], 0.01, 1e-3).unwrap();
    assert!(none.samples().iter().all(|&x| x == 7.0));
}

#[test]
fn sample_count_includes_endpoint() {
    let s = gen_modulated_sine(50.0, 40.0, 5.0, 0.25, 1.0, 1e-5).unwrap();
    assert_eq!(s.len(), 100_001);
    assert_eq!(sample_count(160.0, 5e-3), 32_001);
}

#[test]
fn csv_rejects_bad_header_and_rows() {
    assert!(SampledSignal::read_csv("x,y\n0,1\n1,2\n".as_bytes()).is_err());
    match SampledSignal::read_csv("t,value\n0,1\n1,oops\n".as_bytes()) {
        Err(pfsm_core::Error::Format { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

proptest! {
    #[test]
    fn chirp_frequency_is_linear_in_time(f0 in 0.5f64..50.0, span in 1.0f64..400.0, dur in 0.1f64..2.0) {
        let f1 = f0 + span;
        let dt = 1e-4;
        let s = gen_chirp(0.0, 1.0, f0, f1, dur, 0.0, dt).unwrap();
        // the phase derivative from the formula, compared against a central
        // difference of the unwrapped phase at the midpoint
        let phase = |t: f64| 2.0 * PI * (f0 * t + (f1 - f0) * t * t / (2.0 * dur));
        let tm = dur / 2.0;
        let inst = (phase(tm + 1e-6) - phase(tm - 1e-6)) / (2e-6 * 2.0 * PI);
        prop_assert!((inst - (f0 + f1) / 2.0).abs() < 1e-4 * f1);
        let k = s.len() / 3;
        prop_assert!((s.samples()[k] - phase(s.time(k)).cos()).abs() < 1e-9);
    }

    #[test]
    fn nyquist_guard(f in 0.1f64..2000.0) {
        let dt = 1e-3;
        let r = gen_multisine(0.0, &[Tone::sin(1.0, f)], 0.1, dt);
        prop_assert_eq!(r.is_ok(), f < 0.5 / dt);
    }
}
