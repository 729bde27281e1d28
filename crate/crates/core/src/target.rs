//! Target gates.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::matrix::unitarity_defect;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Hadamard,
    Dft(usize),
    Custom(String),
}

/// A d×d unitary the cascade should realize on the computational window.
#[derive(Debug, Clone, PartialEq)]
pub struct GateTarget {
    kind: TargetKind,
    matrix: Array2<Complex64>,
}

impl GateTarget {
    /// `(1/√2)[[1, 1], [1, −1]]`.
    pub fn hadamard() -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let matrix = ndarray::arr2(&[[s, s], [s, -s]]);
        Self { kind: TargetKind::Hadamard, matrix }
    }

    /// `U[j][k] = exp(2πi·jk/d)/√d`.
    pub fn dft(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("DFT target needs d >= 2, got {d}")));
        }
        let norm = 1.0 / (d as f64).sqrt();
        let matrix = Array2::from_shape_fn((d, d), |(j, k)| {
            // reduce jk mod d first so the phase stays exact for large d
            let e = ((j * k) % d) as f64;
            Complex64::from_polar(norm, 2.0 * PI * e / d as f64)
        });
        Ok(Self { kind: TargetKind::Dft(d), matrix })
    }

    pub fn custom(label: impl Into<String>, matrix: Array2<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(invalid("target must be a non-empty square matrix"));
        }
        let defect = unitarity_defect(&matrix);
        if defect >= 1e-12 {
            return Err(invalid(format!("target is not unitary (defect {defect:.3e})")));
        }
        Ok(Self { kind: TargetKind::Custom(label.into()), matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn kind(&self) -> &TargetKind {
        &self.kind
    }

    pub fn label(&self) -> String {
        match &self.kind {
            TargetKind::Hadamard => "hadamard".into(),
            TargetKind::Dft(d) => format!("dft({d})"),
            TargetKind::Custom(s) => s.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_entries() {
        let h = GateTarget::hadamard();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h.matrix()[[1, 1]].re + s).abs() < 1e-15);
        assert!(unitarity_defect(h.matrix()) < 1e-12);
    }

    #[test]
    fn tritter_entry() {
        let u = GateTarget::dft(3).unwrap();
        let want = Complex64::from_polar(1.0 / 3f64.sqrt(), 4.0 * PI / 3.0);
        assert!((u.matrix()[[1, 2]] - want).norm() < 1e-15);
        assert!((u.matrix()[[2, 2]] - Complex64::from_polar(1.0 / 3f64.sqrt(), 2.0 * PI / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn dft2_is_hadamard() {
        let a = GateTarget::dft(2).unwrap();
        let b = GateTarget::hadamard();
        let diff = (a.matrix() - b.matrix()).mapv(|z| z.norm()).fold(0.0f64, |m, &x| m.max(x));
        assert!(diff < 1e-15);
    }

    #[test]
    fn all_dfts_unitary() {
        for d in 2..=9 {
            assert!(unitarity_defect(GateTarget::dft(d).unwrap().matrix()) < 1e-12);
        }
        assert!(GateTarget::dft(1).is_err());
    }

    #[test]
    fn custom_rejects_non_unitary() {
        let m = Array2::from_elem((2, 2), Complex64::new(0.5, 0.0));
        assert!(GateTarget::custom("x", m).is_err());
    }
}
