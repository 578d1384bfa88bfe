use pfsm_core::composite::{reference_plant, simulate_mimo, simulate_siso, AxisModel, MimoModel};
use pfsm_core::hysteresis::BoucWenParams;
use pfsm_core::linmod::TransferFunction;
use pfsm_core::signal::{presets, SampledSignal};
use proptest::prelude::*;

fn constant(v: f64, n: usize, dt: f64) -> SampledSignal {
    SampledSignal::new(0.0, dt, vec![v; n]).unwrap()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn linear_model(alpha: f64) -> MimoModel {
    let psi = BoucWenParams::improved(alpha, 0.0, 0.0, 0.0, 1.5);
    let p = reference_plant();
    MimoModel {
        x: AxisModel {
            psi1: psi,
            ..p.x.clone()
        },
        y: AxisModel {
            psi1: psi,
            ..p.y.clone()
        },
        ..p
    }
}

#[test]
fn midpoint_input_rests() {
    let p = reference_plant();
    let u = constant(50.0, 2000, 5e-3);
    let (tx, ty) = simulate_mimo(&p, &u, &u).unwrap();
    assert!(max_abs(tx.samples()) < 1e-9);
    assert!(max_abs(ty.samples()) < 1e-9);
    let t = simulate_siso(&p.x, &u, 100.0).unwrap();
    assert!(max_abs(t.samples()) < 1e-9);
}

#[test]
fn linearized_axis_with_unity_dynamics() {
    let alpha = -0.37;
    let axis = AxisModel {
        psi1: BoucWenParams::improved(alpha, 0.0, 0.0, 0.0, 1.5),
        crp: TransferFunction::unity(),
        em_direct: TransferFunction::unity(),
        substeps: 4,
    };
    let u = presets::modulated(5.0).generate().unwrap();
    let theta = simulate_siso(&axis, &u, 100.0).unwrap();
    for (t, &v) in theta.samples().iter().zip(u.samples()) {
        let expect = (1.0 + alpha) * (2.0 * v - 100.0);
        assert!((t - expect).abs() < 1e-10, "{t} vs {expect}");
    }
}

#[test]
fn silent_axis_superposition() {
    let p = reference_plant();
    let ux = presets::pair_a1(1e-5).generate().unwrap();
    let uy = ux.map(|_| 50.0);
    let (tx, ty) = simulate_mimo(&p, &ux, &uy).unwrap();
    let siso = simulate_siso(&p.x, &ux, 100.0).unwrap();
    assert_eq!(tx.samples(), siso.samples());
    assert!(max_abs(ty.samples()) > 0.0);
    assert!(max_abs(ty.samples()) < max_abs(tx.samples()));
}

#[test]
fn ablated_model_is_two_siso_runs() {
    let p = reference_plant().without_coupling();
    let ux = presets::pair_a1(1e-5).generate().unwrap();
    let uy = presets::pair_a2(1e-5).generate().unwrap();
    let (tx, ty) = simulate_mimo(&p, &ux, &uy).unwrap();
    assert_eq!(tx.samples(), simulate_siso(&p.x, &ux, 100.0).unwrap().samples());
    assert_eq!(ty.samples(), simulate_siso(&p.y, &uy, 100.0).unwrap().samples());
}

#[test]
fn grid_mismatch_is_rejected() {
    let p = reference_plant();
    let a = constant(50.0, 10, 1e-3);
    let b = constant(50.0, 11, 1e-3);
    assert!(simulate_mimo(&p, &a, &b).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linear_tail_superposes(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let model = linear_model(-0.3);
        let n = 3000;
        let dt = 1e-4;
        let wave = |amp: f64, f: f64| {
            let s: Vec<f64> = (0..n).map(|k| 50.0 + amp * (2.0 * std::f64::consts::PI * f * k as f64 * dt).sin()).collect();
            SampledSignal::new(0.0, dt, s).unwrap()
        };
        let (x1, y1) = (wave(20.0, 30.0), wave(15.0, 45.0));
        let run = |sx: f64, sy: f64| {
            let ux = x1.map(|v| 50.0 + sx * (v - 50.0));
            let uy = y1.map(|v| 50.0 + sy * (v - 50.0));
            simulate_mimo(&model, &ux, &uy).unwrap()
        };
        let (fx, fy) = run(1.0, 0.0);
        let (gx, gy) = run(0.0, 1.0);
        let (hx, hy) = run(a, b);
        for k in 0..n {
            let ex = a * fx.samples()[k] + b * gx.samples()[k];
            let ey = a * fy.samples()[k] + b * gy.samples()[k];
            let sx = max_abs(fx.samples()) + max_abs(gx.samples());
            let sy = max_abs(fy.samples()) + max_abs(gy.samples());
            prop_assert!((hx.samples()[k] - ex).abs() <= 1e-10 * sx);
            prop_assert!((hy.samples()[k] - ey).abs() <= 1e-10 * sy);
        }
    }
}
