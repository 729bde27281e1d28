//! Unitary DFT on the mode lattice, `F[j][k] = exp(−2πi·jk/M)/√M`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward (`F`) and inverse (`F†`) unitary transforms for one lattice size.
///
/// Buffers may hold several length-`M` vectors back to back; each is
/// transformed independently.
#[derive(Clone)]
pub struct UnitaryFft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for UnitaryFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnitaryFft").field("len", &self.len).finish()
    }
}

impl UnitaryFft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            scale: 1.0 / (len as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `x ← F·x` for each chunk.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        buf.iter_mut().for_each(|z| *z *= self.scale);
    }

    /// `x ← F†·x` for each chunk.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        buf.iter_mut().for_each(|z| *z *= self.scale);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_definition() {
        let m = 6;
        let f = UnitaryFft::new(m);
        let x: Vec<Complex64> = (0..m).map(|k| Complex64::new(k as f64, 1.0 - k as f64 * 0.5)).collect();
        let mut y = x.clone();
        f.forward(&mut y);
        for (j, yj) in y.iter().enumerate() {
            let acc: Complex64 = x
                .iter()
                .enumerate()
                .map(|(k, xk)| {
                    let ang = -2.0 * std::f64::consts::PI * (j * k) as f64 / m as f64;
                    Complex64::from_polar(1.0 / (m as f64).sqrt(), ang) * xk
                })
                .sum();
            assert!((acc - yj).norm() < 1e-12);
        }
        f.inverse(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
