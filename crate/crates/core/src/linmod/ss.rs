use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::freq::FrequencyResponse;
use super::tf::TransferFunction;
use crate::error::{Error, Result};

/// Continuous-time `ẋ = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl StateSpaceModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::param("A", format!("must be square, got {}x{}", n, a.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::param("B", format!("needs {n} rows, got {}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::param("C", format!("needs {n} columns, got {}", c.ncols())));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::param(
                "D",
                format!("needs {}x{}, got {}x{}", c.nrows(), b.ncols(), d.nrows(), d.ncols()),
            ));
        }
        let all = a.iter().chain(b.iter()).chain(c.iter()).chain(d.iter());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::param("A", "matrix entries must be finite"));
        }
        Ok(Self { a, b, c, d })
    }

    /// `D = 0`.
    pub fn strictly_proper(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let d = DMatrix::zeros(c.nrows(), b.ncols());
        Self::new(a, b, c, d)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.states() == 0 {
            return Vec::new();
        }
        match nalgebra::Schur::try_new(self.a.clone(), f64::EPSILON, 10_000) {
            Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
            None => vec![Complex64::new(f64::NAN, f64::NAN); self.states()],
        }
    }

    /// Diagonal similarity transform that equalizes row and column norms.
    pub fn balanced(&self) -> Self {
        let (a, scale) = balance_matrix(&self.a);
        let mut b = self.b.clone();
        let mut c = self.c.clone();
        for (i, &s) in scale.iter().enumerate() {
            b.row_mut(i).unscale_mut(s);
            c.column_mut(i).scale_mut(s);
        }
        Self {
            a,
            b,
            c,
            d: self.d.clone(),
        }
    }

    fn check_channel(&self, input: usize, output: usize) -> Result<()> {
        if input >= self.inputs() {
            return Err(Error::param("input", format!("index {input} >= {}", self.inputs())));
        }
        if output >= self.outputs() {
            return Err(Error::param("output", format!("index {output} >= {}", self.outputs())));
        }
        Ok(())
    }

    /// `C (sI − A)⁻¹ B + D` at one complex frequency; `None` on a pole.
    pub fn transfer_matrix(&self, s: Complex64) -> Option<DMatrix<Complex64>> {
        let n = self.states();
        let cd = self.d.map(|v| Complex64::new(v, 0.0));
        if n == 0 {
            return Some(cd);
        }
        let m = DMatrix::<Complex64>::identity(n, n) * s - self.a.map(|v| Complex64::new(v, 0.0));
        let bc = self.b.map(|v| Complex64::new(v, 0.0));
        let x = m.lu().solve(&bc)?;
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return None;
        }
        Some(self.c.map(|v| Complex64::new(v, 0.0)) * x + cd)
    }

    /// Frequency response of one input/output channel.
    pub fn freq_response(&self, freqs: &[f64], input: usize, output: usize) -> Result<FrequencyResponse> {
        self.check_channel(input, output)?;
        let mut values = Vec::with_capacity(freqs.len());
        let mut hits = Vec::with_capacity(freqs.len());
        for &f in freqs {
            let s = Complex64::new(0.0, 2.0 * std::f64::consts::PI * f);
            match self.transfer_matrix(s) {
                Some(g) => {
                    values.push(g[(output, input)]);
                    hits.push(false);
                }
                None => {
                    values.push(Complex64::new(f64::INFINITY, 0.0));
                    hits.push(true);
                }
            }
        }
        FrequencyResponse::with_pole_hits(freqs.to_vec(), values, hits)
    }

    /// Transfer function of one channel via Faddeev–LeVerrier on the balanced,
    /// frequency-scaled realization.
    pub fn tf(&self, input: usize, output: usize) -> Result<TransferFunction> {
        self.check_channel(input, output)?;
        let n = self.states();
        let dval = self.d[(output, input)];
        if n == 0 {
            return TransferFunction::new(vec![dval], vec![1.0]);
        }
        let bal = self.balanced();
        let norm = bal.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let omega = if norm > 0.0 {
            2f64.powi(norm.log2().round() as i32)
        } else {
            1.0
        };
        let a = &bal.a / omega;
        let b = bal.b.column(input).into_owned();
        let c = bal.c.row(output).into_owned();

        // det(sI − A') = Σ coef[k] s'^k, adj(sI − A') = Σ_{k=1..n} M_k s'^(n−k)
        let mut char_low = vec![0.0; n + 1];
        char_low[n] = 1.0;
        let mut num_scaled = vec![0.0; n]; // coefficient of s'^(n−k), k = 1..n
        let ident = DMatrix::<f64>::identity(n, n);
        let mut m_k = ident.clone();
        for k in 1..=n {
            if k > 1 {
                m_k = &a * &m_k + &ident * char_low[n - k + 1];
            }
            let cmb: f64 = (&c * (&m_k * &b))[(0, 0)];
            num_scaled[k - 1] = cmb;
            let am = &a * &m_k;
            char_low[n - k] = -am.trace() / k as f64;
        }
        // unscale: s' = s / ω
        let den: Vec<f64> = (0..=n).map(|p| char_low[n - p] * omega.powi(p as i32)).collect();
        let mut num = vec![0.0; n + 1];
        for k in 1..=n {
            num[k] = num_scaled[k - 1] * omega.powi(k as i32 - 1);
        }
        let num = super::poly::add(&num, &super::poly::scale(&den, dval));
        TransferFunction::new(num, den)
    }
}

/// Parlett–Reinsch balancing with power-of-two scale factors.
/// Returns `(T⁻¹ A T, diag(T))`.
pub fn balance_matrix(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut scale = DVector::from_element(n, 1.0);
    const RADIX: f64 = 2.0;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += a[(j, i)].abs();
                    row += a[(i, j)].abs();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut g = row / RADIX;
            while col < g {
                f *= RADIX;
                col *= RADIX * RADIX;
            }
            g = row * RADIX;
            while col > g {
                f /= RADIX;
                col /= RADIX * RADIX;
            }
            if (col + row) / f < 0.95 * total {
                converged = false;
                scale[i] *= f;
                // A <- D^-1 A D with D_ii = f
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    (a, scale)
}
