use nalgebra::DMatrix;
use pfsm_core::linmod::{log_space, simulate_lti, simulate_ss, simulate_tf, Lti, StateSpaceModel, TransferFunction};
use pfsm_core::signal::{presets, SampledSignal};
use proptest::prelude::*;

fn tf(num: &[f64], den: &[f64]) -> TransferFunction {
    TransferFunction::new(num.to_vec(), den.to_vec()).unwrap()
}

fn crp_x() -> TransferFunction {
    tf(&[1.0, 3.787, 1.678, 0.0217], &[1.0, 3.750, 1.637, 0.0200])
}

fn em_xx() -> TransferFunction {
    tf(
        &[1.541e11, 9.166e13, 1.377e16, 2.343e17],
        &[1.0, 1.14e6, 8.23e9, 1.55e13, 7.43e15, 1.06e18, 1.61e19],
    )
}

fn rel_coeff_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

// Exact response to the piecewise-linear interpolation of the samples, from
// the exponential of the input-augmented system matrix.
fn foh_oracle(g: &TransferFunction, u: &SampledSignal) -> Vec<f64> {
    let ss = g.to_state_space();
    let n = ss.states();
    let t = u.dt();
    let mut aug = DMatrix::<f64>::zeros(n + 2, n + 2);
    aug.view_mut((0, 0), (n, n)).copy_from(ss.a());
    aug.view_mut((0, n), (n, 1)).copy_from(ss.b());
    aug[(n, n + 1)] = 1.0;
    let e = (aug * t).exp();
    let phi = e.view((0, 0), (n, n)).into_owned();
    let g1 = e.view((0, n), (n, 1)).into_owned();
    let g2 = e.view((0, n + 1), (n, 1)).into_owned() / t;
    let (c, d) = (ss.c().clone(), ss.d()[(0, 0)]);
    let s = u.samples();
    let mut x = nalgebra::DVector::<f64>::zeros(n);
    let mut y = Vec::with_capacity(s.len());
    for k in 0..s.len() {
        y.push((&c * &x)[(0, 0)] + d * s[k]);
        if k + 1 < s.len() {
            x = &phi * &x + &g1 * s[k] + &g2 * (s[k + 1] - s[k]);
        }
    }
    y
}

#[test]
fn unity_is_bit_exact() {
    let u = presets::modulated(5.0).generate().unwrap();
    let y = simulate_tf(&TransferFunction::unity(), &u).unwrap();
    assert_eq!(y.samples(), u.samples());
    assert_eq!(y.dt(), u.dt());
}

#[test]
fn first_order_final_value() {
    let u = SampledSignal::new(0.0, 1e-3, vec![1.0; 20_001]).unwrap();
    let y = simulate_lti(Lti::Tf(&tf(&[1.0], &[1.0, 1.0])), &u).unwrap();
    assert!((y.samples().last().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn crp_x_negligible_above_10hz() {
    let g = crp_x();
    let fr = g.freq_response(&log_space(10.0, 1e5, 200).unwrap()).unwrap();
    for (m, p) in fr.magnitude_db().iter().zip(fr.phase_deg()) {
        assert!(m.abs() <= 0.05, "{m} dB");
        assert!(p.abs() < 1.0, "{p} deg");
    }
}

#[test]
fn crp_square_matches_exact_oracle() {
    let mut spec = presets::creep_square(5e-3);
    spec.duration = 80.0;
    let u = spec.generate().unwrap();
    let g = crp_x();
    let y = simulate_tf(&g, &u).unwrap();
    let oracle = foh_oracle(&g, &u);
    let worst = y
        .samples()
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs() / b.abs())
        .fold(0.0f64, f64::max);
    assert!(worst <= 1e-6, "max relative deviation {worst:e}");

    // after the upward step settles, the drift is monotone toward the higher level
    let half = u.len() / 2;
    let settle = (1.0 / 5e-3) as usize;
    let seg = &y.samples()[settle..half];
    assert!(seg.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    let dc = g.dc_gain().unwrap();
    assert!(seg[seg.len() - 1] < dc * 80.0);
}

#[test]
fn series_examples() {
    let g = tf(&[1.0], &[1.0, 1.0]).series(&tf(&[1.0], &[1.0, 2.0]));
    assert_eq!(g.den(), &[1.0, 3.0, 2.0]);
    assert_eq!(g.num(), &[1.0]);
    let chain = crp_x().series(&em_xx());
    assert_eq!(chain.order(), 9);
    assert_eq!(crp_x().series(&TransferFunction::unity()), crp_x());
}

#[test]
fn tf_from_ss_small_cases() {
    let m = |r, c, v: &[f64]| DMatrix::from_row_slice(r, c, v);
    let ss = StateSpaceModel::strictly_proper(m(1, 1, &[-1.0]), m(1, 1, &[1.0]), m(1, 1, &[1.0])).unwrap();
    let g = ss.tf(0, 0).unwrap();
    assert!(rel_coeff_err(g.den(), &[1.0, 1.0]) < 1e-15);
    assert!(rel_coeff_err(g.num(), &[1.0]) < 1e-15);

    let ss = StateSpaceModel::strictly_proper(
        m(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        m(2, 1, &[0.0, 1.0]),
        m(1, 2, &[1.0, 0.0]),
    )
    .unwrap();
    let g = ss.tf(0, 0).unwrap();
    assert_eq!(g.den(), &[1.0, 0.0, 0.0]);
    assert_eq!(g.num_degree(), 0);
    assert!((g.num().last().unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn tustin_is_second_order() {
    let g = tf(&[1.0, 2.0], &[1.0, 2.0, 10.0]);
    let run = |dt: f64| {
        let n = (4.0 / dt).round() as usize + 1;
        let u: Vec<f64> = (0..n)
            .map(|k| (2.0 * std::f64::consts::PI * k as f64 * dt).sin())
            .collect();
        simulate_tf(&g, &SampledSignal::new(0.0, dt, u).unwrap())
            .unwrap()
            .into_samples()
    };
    let (y1, y2, y4) = (run(1e-2), run(5e-3), run(2.5e-3));
    let e1 = y1
        .iter()
        .enumerate()
        .map(|(k, v)| (v - y2[2 * k]).abs())
        .fold(0.0, f64::max);
    let e2 = y2
        .iter()
        .enumerate()
        .map(|(k, v)| (v - y4[2 * k]).abs())
        .fold(0.0, f64::max);
    assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
}

#[test]
fn mimo_ss_simulation_splits_channels() {
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
    let b = DMatrix::identity(2, 2);
    let c = DMatrix::identity(2, 2);
    let ss = StateSpaceModel::strictly_proper(a, b, c).unwrap();
    let u1 = SampledSignal::new(0.0, 1e-3, vec![1.0; 5001]).unwrap();
    let u0 = u1.map(|_| 0.0);
    let y = simulate_ss(&ss, &[&u1, &u0]).unwrap();
    assert!(y[1].samples().iter().all(|&v| v == 0.0));
    assert!((y[0].samples().last().unwrap() - 1.0).abs() < 1e-2);
    let other = SampledSignal::new(0.0, 2e-3, vec![0.0; 5001]).unwrap();
    assert!(simulate_ss(&ss, &[&u1, &other]).is_err());
}

fn stable_ss(n: usize, seed: &[f64]) -> StateSpaceModel {
    let mut it = seed.iter().copied().cycle();
    let mut a = DMatrix::from_fn(n, n, |_, _| 0.0);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 0.3 * it.next().unwrap();
        }
        a[(i, i)] -= 1.0 + (i as f64) * 3.0 + it.next().unwrap().abs();
    }
    let b = DMatrix::from_fn(n, 2, |_, _| it.next().unwrap());
    let c = DMatrix::from_fn(2, n, |_, _| it.next().unwrap());
    let d = DMatrix::from_fn(2, 2, |_, _| it.next().unwrap());
    StateSpaceModel::new(a, b, c, d).unwrap()
}

fn proper_tf() -> impl Strategy<Value = TransferFunction> {
    (
        1usize..4,
        prop::collection::vec(0.1f64..5.0, 8),
        prop::collection::vec(0.2f64..3.0, 4),
    )
        .prop_map(|(order, poles, zeros)| {
            let den = poles[..order]
                .iter()
                .fold(vec![1.0], |acc, &p| pfsm_core::linmod::poly::mul(&acc, &[1.0, p]));
            let num = zeros[..order]
                .iter()
                .fold(vec![1.0], |acc, &z| pfsm_core::linmod::poly::mul(&acc, &[1.0, z]));
            TransferFunction::new(num, den).unwrap()
        })
}

proptest! {
    #[test]
    fn ss_and_its_tf_agree(n in 1usize..7, seed in prop::collection::vec(-1.0f64..1.0, 64), i in 0usize..2, o in 0usize..2) {
        let ss = stable_ss(n, &seed);
        let g = ss.tf(i, o).unwrap();
        prop_assert_eq!(g.order(), n);
        let freqs = log_space(0.01, 100.0, 50).unwrap();
        let a = ss.freq_response(&freqs, i, o).unwrap();
        let b = g.freq_response(&freqs).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).norm() <= 1e-8 * x.norm().max(1e-300), "{} vs {}", x, y);
        }
    }

    #[test]
    fn series_is_associative(g1 in proper_tf(), g2 in proper_tf(), g3 in proper_tf()) {
        let l = g1.series(&g2).series(&g3);
        let r = g1.series(&g2.series(&g3));
        prop_assert!(rel_coeff_err(l.num(), r.num()) <= 1e-12);
        prop_assert!(rel_coeff_err(l.den(), r.den()) <= 1e-12);
    }

    #[test]
    fn dc_gain_multiplies(g1 in proper_tf(), g2 in proper_tf()) {
        let prod = g1.series(&g2).dc_gain().unwrap();
        let expect = g1.dc_gain().unwrap() * g2.dc_gain().unwrap();
        prop_assert!((prod - expect).abs() <= 1e-12 * expect.abs());
    }
}
