use nalgebra::{DMatrix, DVector};

use super::ss::StateSpaceModel;
use super::tf::TransferFunction;
use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Bilinear (Tustin) discretization of a continuous model, stepped one sample
/// at a time from zero initial state.
#[derive(Debug, Clone)]
pub struct DiscreteLti {
    ad: DMatrix<f64>,
    bh: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    x: DVector<f64>,
    u_prev: DVector<f64>,
    tmp: DVector<f64>,
    usum: DVector<f64>,
    started: bool,
    dt: f64,
}

impl DiscreteLti {
    pub fn new(model: &StateSpaceModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        let model = model.balanced();
        let n = model.states();
        let half = dt / 2.0;
        let ident = DMatrix::<f64>::identity(n, n);
        let m = &ident - model.a() * half;
        let nmat = &ident + model.a() * half;
        let (ad, bh) = if n == 0 {
            (nmat, model.b().clone())
        } else {
            let singular = || Error::Numeric {
                index: 0,
                reason: "I − A·dt/2 is singular".into(),
            };
            let lu = m.lu();
            (
                lu.solve(&nmat).ok_or_else(singular)?,
                lu.solve(&(model.b() * half)).ok_or_else(singular)?,
            )
        };
        let inputs = model.inputs();
        Ok(Self {
            ad,
            bh,
            c: model.c().clone(),
            d: model.d().clone(),
            x: DVector::zeros(n),
            u_prev: DVector::zeros(inputs),
            tmp: DVector::zeros(n),
            usum: DVector::zeros(inputs),
            started: false,
            dt,
        })
    }

    pub fn from_tf(tf: &TransferFunction, dt: f64) -> Result<Self> {
        if tf.num().iter().chain(tf.den()).any(|c| !c.is_finite()) {
            return Err(Error::param("tf", "coefficients must be finite"));
        }
        Self::new(&tf.to_state_space(), dt)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn inputs(&self) -> usize {
        self.bh.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn reset(&mut self) {
        self.x.fill(0.0);
        self.u_prev.fill(0.0);
        self.started = false;
    }

    /// Advances to the next sample and writes `y_k` into `y`.
    pub fn step_into(&mut self, u: &[f64], y: &mut [f64]) {
        debug_assert_eq!(u.len(), self.inputs());
        debug_assert_eq!(y.len(), self.outputs());
        if self.started {
            for (s, (&a, &b)) in self.usum.iter_mut().zip(self.u_prev.iter().zip(u)) {
                *s = a + b;
            }
            self.tmp.gemv(1.0, &self.ad, &self.x, 0.0);
            self.tmp.gemv(1.0, &self.bh, &self.usum, 1.0);
            std::mem::swap(&mut self.x, &mut self.tmp);
        }
        self.started = true;
        self.u_prev.as_mut_slice().copy_from_slice(u);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..self.x.len() {
                acc += self.c[(i, j)] * self.x[j];
            }
            for (j, &uj) in u.iter().enumerate() {
                acc += self.d[(i, j)] * uj;
            }
            *yi = acc;
        }
    }

    /// Single-input single-output step.
    pub fn step(&mut self, u: f64) -> f64 {
        let mut y = [0.0];
        self.step_into(&[u], &mut y);
        y[0]
    }
}

/// Response of a SISO transfer function to a sampled input.
pub fn simulate_tf(tf: &TransferFunction, u: &SampledSignal) -> Result<SampledSignal> {
    let mut sys = DiscreteLti::from_tf(tf, u.dt())?;
    let mut out = Vec::with_capacity(u.len());
    for (k, &v) in u.samples().iter().enumerate() {
        let y = sys.step(v);
        if !y.is_finite() {
            return Err(Error::Numeric {
                index: k,
                reason: "response is not finite".into(),
            });
        }
        out.push(y);
    }
    u.with_samples(out)
}

/// Response of a state-space model; one signal per input, all on the same grid.
pub fn simulate_ss(model: &StateSpaceModel, inputs: &[&SampledSignal]) -> Result<Vec<SampledSignal>> {
    if inputs.len() != model.inputs() {
        return Err(Error::Alignment(format!(
            "model has {} inputs, got {} signals",
            model.inputs(),
            inputs.len()
        )));
    }
    let first = inputs
        .first()
        .ok_or_else(|| Error::Alignment("state-space model without inputs".into()))?;
    for s in &inputs[1..] {
        first.check_same_grid(s)?;
    }
    let mut sys = DiscreteLti::new(model, first.dt())?;
    let mut outs = vec![Vec::with_capacity(first.len()); model.outputs()];
    let mut u = vec![0.0; model.inputs()];
    let mut y = vec![0.0; model.outputs()];
    for k in 0..first.len() {
        for (ui, s) in u.iter_mut().zip(inputs) {
            *ui = s.samples()[k];
        }
        sys.step_into(&u, &mut y);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                index: k,
                reason: "response is not finite".into(),
            });
        }
        for (o, &v) in outs.iter_mut().zip(&y) {
            o.push(v);
        }
    }
    outs.into_iter().map(|o| first.with_samples(o)).collect()
}

/// Either model form, for [`simulate_lti`].
pub enum Lti<'a> {
    Tf(&'a TransferFunction),
    Ss(&'a StateSpaceModel),
}

/// SISO response of either model form (first input to first output for
/// state-space models).
pub fn simulate_lti(sys: Lti<'_>, u: &SampledSignal) -> Result<SampledSignal> {
    match sys {
        Lti::Tf(tf) => simulate_tf(tf, u),
        Lti::Ss(ss) => {
            let mut outs = simulate_ss(ss, &[u])?;
            Ok(outs.swap_remove(0))
        }
    }
}
