//! Complex matrices on the mode lattice.

use std::f64::consts::PI;

use ndarray::{s, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::ModeLattice;

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `A†·B`.
pub fn adjoint_mul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|z| z.conj()).dot(b)
}

/// `‖A†A − I‖_max`.
pub fn unitarity_defect(a: &Array2<Complex64>) -> f64 {
    let g = adjoint_mul(a, a);
    let n = g.nrows();
    max_abs_diff(&g, &Array2::eye(n))
}

/// The unitary M-point DFT matrix `F[j][k] = exp(−2πi·jk/M)/√M`.
pub fn dft_matrix(m: usize) -> Result<Array2<Complex64>> {
    if m == 0 {
        return Err(invalid("DFT size must be positive"));
    }
    let norm = 1.0 / (m as f64).sqrt();
    Ok(Array2::from_shape_fn((m, m), |(j, k)| {
        let e = ((j * k) % m) as f64;
        Complex64::from_polar(norm, -2.0 * PI * e / m as f64)
    }))
}

/// Frequency-basis operator of a component or cascade over the full lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    entries: Array2<Complex64>,
    lattice: ModeLattice,
    unitary: bool,
}

impl TransferMatrix {
    pub fn new(entries: Array2<Complex64>, lattice: ModeLattice, unitary: bool) -> Result<Self> {
        let m = lattice.mode_count();
        if entries.dim() != (m, m) {
            return Err(invalid(format!("matrix is {:?}, lattice has {m} modes", entries.dim())));
        }
        Ok(Self { entries, lattice, unitary })
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn lattice(&self) -> &ModeLattice {
        &self.lattice
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// The d×d block on the computational window.
    pub fn truncate(&self) -> Array2<Complex64> {
        let w = self.lattice.window();
        self.entries.slice(s![w.clone(), w]).to_owned()
    }

    /// Largest column 2-norm.
    pub fn max_column_norm(&self) -> f64 {
        self.entries
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn to_document(&self) -> MatrixDocument {
        MatrixDocument::from_matrix(&self.entries).with_lattice(self.lattice).with_unitary(self.unitary)
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// JSON form of a complex matrix: row-major `[re, im]` pairs plus metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<ModeLattice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<String>,
}

impl MatrixDocument {
    pub fn from_matrix(m: &Array2<Complex64>) -> Self {
        let entries = m
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| [round_sig(z.re, 12), round_sig(z.im, 12)]).collect())
            .collect();
        Self { rows: m.nrows(), cols: m.ncols(), entries, lattice: None, unitary: None, gauge: None }
    }

    pub fn with_lattice(mut self, lattice: ModeLattice) -> Self {
        self.lattice = Some(lattice);
        self
    }

    pub fn with_unitary(mut self, unitary: bool) -> Self {
        self.unitary = Some(unitary);
        self
    }

    pub fn with_gauge(mut self, gauge: impl Into<String>) -> Self {
        self.gauge = Some(gauge.into());
        self
    }

    pub fn to_matrix(&self) -> Result<Array2<Complex64>> {
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(invalid("matrix document shape does not match its entries"));
        }
        Ok(Array2::from_shape_fn((self.rows, self.cols), |(i, j)| {
            let [re, im] = self.entries[i][j];
            Complex64::new(re, im)
        }))
    }
}
