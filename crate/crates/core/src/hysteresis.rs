//! Bouc-Wen hysteresis operators for a push-pull piezoelectric pair.
//!
//! All variants share `v_h = u + h` and integrate the hysteresis component
//! `h` along the input path with explicit Euler sub-steps:
//!
//! ```text
//! dh = α du − β |du| |h|^(n−1) h − γ du |h|^n + asym
//! ```
//!
//! where `asym` is zero for [`Variant::Classic`], `δ u sgn(du) dt` for
//! [`Variant::AsymmetricSign`] and `δ u du` for
//! [`Variant::AsymmetricRateIndependent`]. Only the sign variant depends on
//! the time step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

pub const DEFAULT_SUBSTEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Classic,
    AsymmetricSign,
    AsymmetricRateIndependent,
}

impl Variant {
    pub const ALL: [Variant; 3] = [
        Variant::Classic,
        Variant::AsymmetricSign,
        Variant::AsymmetricRateIndependent,
    ];

    pub fn has_asymmetry(self) -> bool {
        self != Variant::Classic
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classic" => Ok(Variant::Classic),
            "asymmetric-sign" | "asymmetric_sign" => Ok(Variant::AsymmetricSign),
            "improved" | "asymmetric-rate-independent" | "asymmetric_rate_independent" => {
                Ok(Variant::AsymmetricRateIndependent)
            }
            other => Err(Error::param("variant", format!("unknown variant `{other}`"))),
        }
    }
}

/// The `[α, β, γ, δ, n]` parameter vector of one actuator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoucWenParams {
    pub variant: Variant,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub n: f64,
}

impl BoucWenParams {
    pub fn classic(alpha: f64, beta: f64, gamma: f64, n: f64) -> Self {
        Self {
            variant: Variant::Classic,
            alpha,
            beta,
            gamma,
            delta: 0.0,
            n,
        }
    }

    pub fn asymmetric_sign(alpha: f64, beta: f64, gamma: f64, delta: f64, n: f64) -> Self {
        Self {
            variant: Variant::AsymmetricSign,
            alpha,
            beta,
            gamma,
            delta,
            n,
        }
    }

    pub fn improved(alpha: f64, beta: f64, gamma: f64, delta: f64, n: f64) -> Self {
        Self {
            variant: Variant::AsymmetricRateIndependent,
            alpha,
            beta,
            gamma,
            delta,
            n,
        }
    }

    /// Identified X-axis actuator parameters (PEA1).
    pub fn reference_x1() -> Self {
        Self::improved(-0.3767, 0.0197, -0.0173, -0.0012, 1.16)
    }

    /// Identified Y-axis actuator parameters (PEA1).
    pub fn reference_y1() -> Self {
        Self::improved(-0.3824, 0.0209, -0.0181, -0.0012, 1.13)
    }

    /// X-axis set identified from the 5 Hz excitation, whose exponent
    /// (1.26) differs from the [`reference_x1`](Self::reference_x1) set.
    pub fn tabulated_x1_5hz() -> Self {
        Self::improved(-0.3767, 0.0197, -0.0173, -1.2e-3, 1.26)
    }

    /// X-axis set identified from the 10 Hz excitation.
    pub fn tabulated_x1_10hz() -> Self {
        Self::improved(-0.3764, 0.0192, -0.0164, -1.3e-3, 1.28)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("n", self.n),
        ] {
            if !v.is_finite() {
                return Err(Error::Parameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        if self.n < 1.0 {
            return Err(Error::param("n", format!("exponent must be >= 1, got {}", self.n)));
        }
        if self.variant == Variant::Classic && self.delta != 0.0 {
            return Err(Error::param("delta", "classic variant has no asymmetry term"));
        }
        Ok(())
    }

    /// Parameter vector in the fitted order: `[α, β, γ, n]` for the classic
    /// variant and `[α, β, γ, δ, n]` otherwise.
    pub fn to_vec(&self) -> Vec<f64> {
        if self.variant.has_asymmetry() {
            vec![self.alpha, self.beta, self.gamma, self.delta, self.n]
        } else {
            vec![self.alpha, self.beta, self.gamma, self.n]
        }
    }

    pub fn from_slice(variant: Variant, p: &[f64]) -> Self {
        if variant.has_asymmetry() {
            Self {
                variant,
                alpha: p[0],
                beta: p[1],
                gamma: p[2],
                delta: p[3],
                n: p[4],
            }
        } else {
            Self {
                variant,
                alpha: p[0],
                beta: p[1],
                gamma: p[2],
                delta: 0.0,
                n: p[3],
            }
        }
    }

    /// `dh` for one Euler sub-step starting at `(u, h)`.
    #[inline]
    fn increment(&self, h: f64, u: f64, du: f64, dt: f64) -> f64 {
        let abs_h = h.abs();
        // |h|^(n-1) h and |h|^n both vanish at h = 0.
        let (odd, even) = if abs_h == 0.0 {
            (0.0, 0.0)
        } else {
            let p = abs_h.powf(self.n - 1.0);
            (p * h, p * abs_h)
        };
        let base = self.alpha * du - self.beta * du.abs() * odd - self.gamma * du * even;
        match self.variant {
            Variant::Classic => base,
            Variant::AsymmetricSign => base + self.delta * u * signum0(du) * dt,
            Variant::AsymmetricRateIndependent => base + self.delta * u * du,
        }
    }
}

fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Internal state of one hysteresis operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisState {
    pub h: f64,
    pub u_prev: f64,
}

impl HysteresisState {
    /// Unpolarized rest at input `u0`.
    pub fn at_rest(u0: f64) -> Self {
        Self { h: 0.0, u_prev: u0 }
    }

    pub fn output(&self) -> f64 {
        self.u_prev + self.h
    }

    /// Advances to `u_next` over `dt` seconds and returns `v_h = u_next + h`.
    pub fn step(&mut self, params: &BoucWenParams, u_next: f64, dt: f64, substeps: usize) -> Result<f64> {
        if substeps == 0 {
            return Err(Error::param("substeps", "must be at least 1"));
        }
        if !u_next.is_finite() {
            return Err(Error::Numeric {
                index: 0,
                reason: format!("input {u_next}"),
            });
        }
        let du = u_next - self.u_prev;
        if du != 0.0 {
            let m = substeps as f64;
            let du_sub = du / m;
            let dt_sub = dt / m;
            let mut h = self.h;
            for j in 0..substeps {
                let u = self.u_prev + du_sub * j as f64;
                h += params.increment(h, u, du_sub, dt_sub);
            }
            if !h.is_finite() {
                return Err(Error::Numeric {
                    index: 0,
                    reason: format!("hysteresis state {h}"),
                });
            }
            self.h = h;
        }
        self.u_prev = u_next;
        Ok(u_next + self.h)
    }
}

/// Free-function form of [`HysteresisState::step`].
pub fn step_hysteresis(
    params: &BoucWenParams,
    state: HysteresisState,
    u_next: f64,
    dt: f64,
    substeps: usize,
) -> Result<(HysteresisState, f64)> {
    let mut next = state;
    let v = next.step(params, u_next, dt, substeps)?;
    Ok((next, v))
}

/// Hysteresis component `h` over a record, starting from `h(0) = 0`.
pub fn simulate_component(params: &BoucWenParams, u: &SampledSignal, substeps: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let mut out = Vec::with_capacity(u.len());
    integrate_into(params, u.samples(), u.dt(), substeps, |_, h, _| out.push(h))?;
    Ok(out)
}

/// `v_h = u + h` over a record, starting from `h(0) = 0`.
pub fn simulate_hysteresis(params: &BoucWenParams, u: &SampledSignal, substeps: usize) -> Result<SampledSignal> {
    params.validate()?;
    let mut out = Vec::with_capacity(u.len());
    integrate_into(params, u.samples(), u.dt(), substeps, |_, _, v| out.push(v))?;
    u.with_samples(out)
}

/// Runs the operator over raw samples, calling `sink(k, h, v_h)` per sample.
pub(crate) fn integrate_into(
    params: &BoucWenParams,
    u: &[f64],
    dt: f64,
    substeps: usize,
    mut sink: impl FnMut(usize, f64, f64),
) -> Result<()> {
    let Some(&u0) = u.first() else {
        return Ok(());
    };
    if !u0.is_finite() {
        return Err(Error::Numeric {
            index: 0,
            reason: format!("input {u0}"),
        });
    }
    let mut state = HysteresisState::at_rest(u0);
    sink(0, 0.0, u0);
    for (k, &uk) in u.iter().enumerate().skip(1) {
        let v = state.step(params, uk, dt, substeps).map_err(|e| match e {
            Error::Numeric { reason, .. } => Error::Numeric { index: k, reason },
            other => other,
        })?;
        sink(k, state.h, v);
    }
    Ok(())
}

/// Parameters of the complementary actuator driven by `u_max − u`, chosen so
/// that its hysteresis component is the negative of the first one's.
pub fn complement_params(psi1: &BoucWenParams, u_max: f64) -> Result<BoucWenParams> {
    if psi1.variant != Variant::AsymmetricRateIndependent {
        return Err(Error::UnsupportedVariant(psi1.variant));
    }
    Ok(BoucWenParams {
        variant: psi1.variant,
        alpha: psi1.alpha + u_max * psi1.delta,
        beta: psi1.beta,
        gamma: psi1.gamma,
        delta: -psi1.delta,
        n: psi1.n,
    })
}

/// Parameters of the second actuator for any variant. The improved variant
/// uses [`complement_params`]; the other variants have no exact complement
/// and mirror the first actuator's parameters.
pub fn pair_params(psi1: &BoucWenParams, u_max: f64) -> BoucWenParams {
    match psi1.variant {
        Variant::AsymmetricRateIndependent => complement_params(psi1, u_max).expect("variant checked"),
        _ => *psi1,
    }
}

pub(crate) fn check_range(u: &[f64], u_max: f64) -> Result<()> {
    for (index, &value) in u.iter().enumerate() {
        if !(0.0..=u_max).contains(&value) {
            return Err(Error::Domain {
                index,
                value,
                max: u_max,
            });
        }
    }
    Ok(())
}

/// Differential hysteresis voltage of a push-pull pair:
/// `Δv_h = v_h1(u) − v_h2(u_max − u)`.
pub fn pea_pair_delta(psi1: &BoucWenParams, u: &SampledSignal, u_max: f64, substeps: usize) -> Result<SampledSignal> {
    let out = pair_delta_samples(psi1, u.samples(), u.dt(), u_max, substeps)?;
    u.with_samples(out)
}

pub(crate) fn pair_delta_samples(
    psi1: &BoucWenParams,
    u: &[f64],
    dt: f64,
    u_max: f64,
    substeps: usize,
) -> Result<Vec<f64>> {
    if !(u_max > 0.0) {
        return Err(Error::param("u_max", format!("must be positive, got {u_max}")));
    }
    psi1.validate()?;
    check_range(u, u_max)?;
    let psi2 = pair_params(psi1, u_max);
    let mut pair = PeaPair::new(*psi1, psi2, u_max, u.first().copied().unwrap_or(u_max / 2.0));
    let mut out = Vec::with_capacity(u.len());
    if let Some(&u0) = u.first() {
        out.push(pair.output(u0));
    }
    for (k, &uk) in u.iter().enumerate().skip(1) {
        out.push(pair.step(uk, dt, substeps).map_err(|e| match e {
            Error::Numeric { reason, .. } => Error::Numeric { index: k, reason },
            other => other,
        })?);
    }
    Ok(out)
}

/// Streaming push-pull pair.
#[derive(Debug, Clone)]
pub struct PeaPair {
    psi1: BoucWenParams,
    psi2: BoucWenParams,
    u_max: f64,
    pea1: HysteresisState,
    pea2: HysteresisState,
}

impl PeaPair {
    pub fn new(psi1: BoucWenParams, psi2: BoucWenParams, u_max: f64, u0: f64) -> Self {
        Self {
            psi1,
            psi2,
            u_max,
            pea1: HysteresisState::at_rest(u0),
            pea2: HysteresisState::at_rest(u_max - u0),
        }
    }

    fn output(&self, u: f64) -> f64 {
        (u + self.pea1.h) - ((self.u_max - u) + self.pea2.h)
    }

    pub fn components(&self) -> (f64, f64) {
        (self.pea1.h, self.pea2.h)
    }

    /// Advances both actuators and returns `Δv_h`.
    pub fn step(&mut self, u: f64, dt: f64, substeps: usize) -> Result<f64> {
        let v1 = self.pea1.step(&self.psi1, u, dt, substeps)?;
        let v2 = self.pea2.step(&self.psi2, self.u_max - u, dt, substeps)?;
        Ok(v1 - v2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{gen_modulated_sine, presets};
    use proptest::prelude::*;

    fn ramp(from: f64, to: f64, n: usize) -> SampledSignal {
        let samples = (0..n).map(|k| from + (to - from) * k as f64 / (n - 1) as f64).collect();
        SampledSignal::new(0.0, 1e-3, samples).unwrap()
    }

    #[test]
    fn linear_case_integrates_exactly() {
        let p = BoucWenParams::improved(-0.4, 0.0, 0.0, 0.0, 1.5);
        let mut state = HysteresisState::at_rest(0.0);
        let v = state.step(&p, 10.0, 1e-3, 4).unwrap();
        assert!((state.h + 4.0).abs() < 1e-12);
        assert!((v - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_increment_keeps_state() {
        let p = BoucWenParams::reference_x1();
        let state = HysteresisState { h: 3.5, u_prev: 42.0 };
        for variant in Variant::ALL {
            let p = BoucWenParams {
                variant,
                delta: if variant == Variant::Classic { 0.0 } else { p.delta },
                ..p
            };
            let (next, v) = step_hysteresis(&p, state, 42.0, 1e-3, 4).unwrap();
            assert_eq!(next, state);
            assert_eq!(v, 45.5);
        }
    }

    #[test]
    fn zero_h_with_small_exponent_is_finite() {
        let p = BoucWenParams::improved(-0.3, 0.02, -0.01, 0.0, 1.0);
        let mut s = HysteresisState::at_rest(0.0);
        assert!(s.step(&p, 1.0, 1e-3, 1).unwrap().is_finite());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let p = BoucWenParams::reference_x1();
        let mut s = HysteresisState::at_rest(0.0);
        assert!(matches!(s.step(&p, f64::NAN, 1e-3, 4), Err(Error::Numeric { .. })));
        assert!(s.step(&p, 1.0, 1e-3, 0).is_err());
        let bad = BoucWenParams { n: 0.5, ..p };
        assert!(simulate_hysteresis(&bad, &ramp(0.0, 1.0, 3), 4).is_err());
        let bad = BoucWenParams {
            variant: Variant::Classic,
            ..p
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn constant_input_passes_through() {
        let u = SampledSignal::new(0.0, 1e-3, vec![37.0; 50]).unwrap();
        let v = simulate_hysteresis(&BoucWenParams::reference_x1(), &u, 4).unwrap();
        assert_eq!(v, u);
    }

    #[test]
    fn first_output_equals_first_input() {
        let u = presets::modulated(5.0).generate().unwrap();
        let v = simulate_hysteresis(&BoucWenParams::reference_x1(), &u, 4).unwrap();
        assert_eq!(v.samples()[0], u.samples()[0]);
        assert_eq!(v.dt(), u.dt());
        assert_eq!(v.t0(), u.t0());
    }

    #[test]
    fn time_dilation_leaves_component_unchanged() {
        let u = presets::modulated(5.0).generate().unwrap();
        let slow = SampledSignal::new(0.0, u.dt() * 10.0, u.samples().to_vec()).unwrap();
        let p = BoucWenParams::reference_x1();
        let a = simulate_component(&p, &u, 4).unwrap();
        let b = simulate_component(&p, &slow, 4).unwrap();
        assert_eq!(a, b);
        let c = BoucWenParams::classic(-0.4056, 5.6e-3, -4.2e-3, 1.69);
        assert_eq!(
            simulate_component(&c, &u, 4).unwrap(),
            simulate_component(&c, &slow, 4).unwrap()
        );
    }

    #[test]
    fn sign_variant_depends_on_rate() {
        let u = presets::modulated(5.0).generate().unwrap();
        let slow = SampledSignal::new(0.0, u.dt() * 10.0, u.samples().to_vec()).unwrap();
        let p = BoucWenParams::asymmetric_sign(-0.3683, 8.5e-3, -4.8e-3, -4.2e-5, 1.41);
        let a = simulate_component(&p, &u, 4).unwrap();
        let b = simulate_component(&p, &slow, 4).unwrap();
        assert!(a.iter().zip(&b).any(|(x, y)| (x - y).abs() > 1e-6));
    }

    #[test]
    fn complement_relations() {
        let psi1 = BoucWenParams::reference_x1();
        let psi2 = complement_params(&psi1, 100.0).unwrap();
        assert!((psi2.alpha - -0.4967).abs() < 1e-12);
        assert_eq!(psi2.beta, 0.0197);
        assert_eq!(psi2.gamma, -0.0173);
        assert_eq!(psi2.delta, 0.0012);
        assert_eq!(psi2.n, 1.16);

        let sym = BoucWenParams { delta: 0.0, ..psi1 };
        assert_eq!(complement_params(&sym, 100.0).unwrap(), sym);

        let classic = BoucWenParams::classic(-0.4, 0.01, 0.01, 1.5);
        assert!(matches!(
            complement_params(&classic, 100.0),
            Err(Error::UnsupportedVariant(Variant::Classic))
        ));
    }

    #[test]
    fn pair_delta_midpoint_is_zero() {
        let u = SampledSignal::new(0.0, 1e-3, vec![50.0; 100]).unwrap();
        let d = pea_pair_delta(&BoucWenParams::reference_x1(), &u, 100.0, 4).unwrap();
        assert!(d.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pair_delta_range_checked() {
        let u = ramp(50.0, 101.0, 10);
        assert!(matches!(
            pea_pair_delta(&BoucWenParams::reference_x1(), &u, 100.0, 4),
            Err(Error::Domain { index: 9, .. })
        ));
    }

    #[test]
    fn pair_delta_matches_doubled_single_actuator() {
        let u = presets::modulated(5.0).generate().unwrap();
        let psi = BoucWenParams::reference_x1();
        let delta = pea_pair_delta(&psi, &u, 100.0, 4).unwrap();
        let single = simulate_hysteresis(&psi, &u, 4).unwrap();
        let worst = delta
            .samples()
            .iter()
            .zip(single.samples())
            .map(|(d, v)| (d - (2.0 * v - 100.0)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "worst {worst}");
    }

    #[test]
    fn classic_loop_is_centrally_symmetric() {
        // steady loop under 50 + 40 sin: h(100 - u) on the falling branch
        // mirrors -h(u) on the rising branch.
        let p = BoucWenParams::classic(-0.4056, 5.6e-3, -4.2e-3, 1.69);
        let n_per = 20_000;
        let periods = 4;
        let dt = 1.0 / n_per as f64;
        let u: Vec<f64> = (0..=n_per * periods)
            .map(|k| 50.0 + 40.0 * (2.0 * std::f64::consts::PI * k as f64 * dt).sin())
            .collect();
        let sig = SampledSignal::new(0.0, dt, u.clone()).unwrap();
        let h = simulate_component(&p, &sig, 4).unwrap();
        let base = n_per * (periods - 1);
        let quarter = n_per / 4;
        let mut worst: f64 = 0.0;
        for j in 0..=n_per / 2 {
            // rising branch point at phase -π/2 + θ, matched falling point at π/2 + θ
            let rising = base - quarter + j;
            let falling = base + quarter + j;
            assert!((u[falling] - (100.0 - u[rising])).abs() < 1e-9);
            worst = worst.max((h[falling] + h[rising]).abs());
        }
        let scale = h[base..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-3 * scale, "worst {worst} scale {scale}");
    }

    #[test]
    fn substep_refinement_is_first_order() {
        // coarse grid so the increment per sample is large
        let u = gen_modulated_sine(50.0, 40.0, 5.0, 0.25, 1.0, 1e-3).unwrap();
        let p = BoucWenParams::reference_x1();
        let final_h = |m| *simulate_component(&p, &u, m).unwrap().last().unwrap();
        let reference = final_h(1024);
        let e1 = (final_h(4) - reference).abs();
        let e2 = (final_h(8) - reference).abs();
        let e3 = (final_h(16) - reference).abs();
        assert!(e1 / e2 >= 1.9, "ratio {}", e1 / e2);
        assert!(e2 / e3 >= 1.9, "ratio {}", e2 / e3);
    }

    #[test]
    fn params_json_field_names() {
        let p = BoucWenParams::reference_x1();
        let json = serde_json::to_value(p).unwrap();
        assert_eq!(json["variant"], "asymmetric_rate_independent");
        for key in ["alpha", "beta", "gamma", "delta", "n"] {
            assert!(json.get(key).is_some());
        }
        let back: BoucWenParams = serde_json::from_value(json).unwrap();
        assert_eq!(back, p);
    }

    proptest! {
        #[test]
        fn complement_is_involution(
            alpha in -1.0f64..0.0, beta in 0.0f64..0.05, gamma in -0.05f64..0.05,
            delta in -0.005f64..0.005, n in 1.0f64..2.0, u_max in 10.0f64..200.0,
        ) {
            let p = BoucWenParams::improved(alpha, beta, gamma, delta, n);
            let twice = complement_params(&complement_params(&p, u_max).unwrap(), u_max).unwrap();
            prop_assert!((twice.alpha - p.alpha).abs() <= 1e-15 * (1.0 + p.alpha.abs() + (u_max * delta).abs()));
            prop_assert_eq!(twice.delta, p.delta);
            prop_assert_eq!((twice.beta, twice.gamma, twice.n), (p.beta, p.gamma, p.n));
        }

        #[test]
        fn complement_components_cancel(
            amp in 5.0f64..45.0, carrier in 1.0f64..20.0,
            alpha in -0.6f64..-0.1, delta in -0.002f64..0.0,
        ) {
            let psi1 = BoucWenParams::improved(alpha, 0.02, -0.017, delta, 1.2);
            let psi2 = complement_params(&psi1, 100.0).unwrap();
            let u = gen_modulated_sine(50.0, amp, carrier, 0.25, 0.5, 1e-4).unwrap();
            let u2 = u.map(|v| 100.0 - v);
            let h1 = simulate_component(&psi1, &u, 4).unwrap();
            let h2 = simulate_component(&psi2, &u2, 4).unwrap();
            let scale = h1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let worst = h1.iter().zip(&h2).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
            prop_assert!(worst <= 1e-12 * scale.max(1.0), "worst {}", worst);
        }
    }
}
