//! Real polynomials stored highest power first.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn eval(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

pub fn eval_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (o, &x) in out[n - a.len()..].iter_mut().zip(a) {
        *o += x;
    }
    for (o, &x) in out[n - b.len()..].iter_mut().zip(b) {
        *o += x;
    }
    out
}

pub fn scale(a: &[f64], k: f64) -> Vec<f64> {
    a.iter().map(|&x| x * k).collect()
}

/// Drops exact leading zeros, keeping at least one coefficient.
pub fn trim(mut a: Vec<f64>) -> Vec<f64> {
    let lead = a.iter().position(|&c| c != 0.0).unwrap_or(a.len().saturating_sub(1));
    a.drain(..lead);
    if a.is_empty() {
        a.push(0.0);
    }
    a
}

/// Degree ignoring leading zeros; the zero polynomial has degree 0.
pub fn degree(a: &[f64]) -> usize {
    let lead = a.iter().position(|&c| c != 0.0).unwrap_or(a.len().saturating_sub(1));
    a.len().saturating_sub(lead + 1)
}

/// `(x + c)^k` expanded, highest power first.
pub fn binomial_power(lead: f64, c: f64, k: usize) -> Vec<f64> {
    (0..k).fold(vec![1.0], |acc, _| mul(&acc, &[lead, c]))
}

/// Roots via the eigenvalues of the companion matrix. NaN roots signal that
/// the eigenvalue iteration did not converge.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let p = trim(coeffs.to_vec());
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    // trailing zeros are roots at the origin
    let zeros_at_origin = p.iter().rev().take_while(|&&c| c == 0.0).count();
    let core = &p[..p.len() - zeros_at_origin];
    let m = core.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    if m == 0 {
        return out;
    }
    let lead = core[0];
    let mut comp = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        comp[(0, j)] = -core[j + 1] / lead;
    }
    for i in 1..m {
        comp[(i, i - 1)] = 1.0;
    }
    let comp = super::ss::balance_matrix(&comp).0;
    let nan = Complex64::new(f64::NAN, f64::NAN);
    if comp.iter().any(|v| !v.is_finite()) {
        out.resize(n, nan);
        return out;
    }
    // unbounded QR iterations can spin forever on degenerate companions
    match nalgebra::Schur::try_new(comp, f64::EPSILON, 10_000) {
        Some(schur) => out.extend(schur.complex_eigenvalues().iter().copied()),
        None => out.resize(n, nan),
    }
    out
}

/// Monic real polynomial with the given roots; complex roots are expected in
/// conjugate pairs and only their real product is kept.
pub fn from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
        for (i, &c) in acc.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        acc = next;
    }
    acc.into_iter().map(|c| c.re).collect()
}
