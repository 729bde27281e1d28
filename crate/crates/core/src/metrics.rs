//! Success probability and fidelity of a truncated operation.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{degenerate, invalid, Result};
use crate::target::GateTarget;

/// `P = (1/d)·Tr(V†V) = (1/d)·Σ|V_mn|²`.
pub fn success_probability(v: &Array2<Complex64>) -> f64 {
    let d = v.nrows();
    v.iter().map(|z| z.norm_sqr()).sum::<f64>() / d as f64
}

/// `F = |Tr(V†U)|² / (P·d²)`.
pub fn fidelity(v: &Array2<Complex64>, target: &GateTarget) -> Result<f64> {
    fidelity_against(v, target.matrix())
}

pub fn fidelity_against(v: &Array2<Complex64>, u: &Array2<Complex64>) -> Result<f64> {
    if v.dim() != u.dim() || v.nrows() != v.ncols() {
        return Err(invalid(format!("shape {:?} does not match target {:?}", v.dim(), u.dim())));
    }
    let d = v.nrows() as f64;
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if norm == 0.0 {
        return Err(degenerate("fidelity of the zero matrix is undefined (P = 0)"));
    }
    let overlap: Complex64 = v.iter().zip(u.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(overlap.norm_sqr() / (norm * d))
}

/// Both metrics at once.
pub fn gate_metrics(v: &Array2<Complex64>, target: &GateTarget) -> Result<(f64, f64)> {
    Ok((fidelity(v, target)?, success_probability(v)))
}

/// Lower bound `(d−1)/(2d−1)` on the scatter probability of a uniform d-mode
/// mixer built from one modulator.
pub fn scatter_bound(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(invalid("d must be positive"));
    }
    Ok((d - 1) as f64 / (2 * d - 1) as f64)
}

/// The matching success ceiling `d/(2d−1)`.
pub fn single_eom_ceiling(d: usize) -> Result<f64> {
    Ok(1.0 - scatter_bound(d)?)
}
