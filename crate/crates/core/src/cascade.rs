//! EOM / pulse-shaper / EOM cascades in the frequency basis.
//!
//! A modulator is diagonal in time, so its frequency-basis operator is the
//! conjugation `F·D·F†`, and the full cascade is `V = F D₃ F† D₂ F D₁ F†`.
//! With `F[j][k] = exp(−2πi·jk/M)/√M` and time samples `t_j = j·T/M`, entry
//! `(m, n)` of `F·D·F†` is `(1/T)∫ e^{iφ(t)} e^{−i(m−n)Δωt} dt`, so a
//! positive-amplitude sinewave couples mode `n` to `n+1` with coefficient
//! `J₁(β)·e^{iθ}`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::drive::FourierDrive;
use crate::error::{invalid, Result};
use crate::fourier::UnitaryFft;
use crate::lattice::ModeLattice;
use crate::matrix::TransferMatrix;
use crate::shaper::ShaperPattern;

/// Diagonal of the time-basis modulator operator: `exp(iφ(t_j))`.
pub fn eom_diagonal(drive: &FourierDrive, m: usize) -> Result<Vec<Complex64>> {
    drive.validate_for(m)?;
    Ok(drive.samples(m).into_iter().map(|x| Complex64::from_polar(1.0, x)).collect())
}

/// Diagonal of the frequency-basis shaper operator: `a_n·exp(iψ_n)`.
pub fn shaper_diagonal(shaper: &ShaperPattern) -> Vec<Complex64> {
    shaper.phases().iter().zip(shaper.amplitudes()).map(|(&p, &a)| Complex64::from_polar(a, p)).collect()
}

/// Fourier coefficients `c_k`, `k = 0..M` (negative `k` stored at `M + k`), of
/// the modulator operator: entry `(m, n)` of its frequency matrix is
/// `c_{(m−n) mod M}`.
pub fn drive_coefficients(drive: &FourierDrive, m: usize) -> Result<Vec<Complex64>> {
    let mut c = eom_diagonal(drive, m)?;
    // (1/M) Σ_j D_j e^{−2πi k j/M} is the unnormalized forward FFT over M
    UnitaryFft::new(m).forward(&mut c);
    let s = 1.0 / (m as f64).sqrt();
    c.iter_mut().for_each(|z| *z *= s);
    Ok(c)
}

/// Single-modulator operator in the frequency basis (circulant on the lattice).
pub fn toeplitz_from_drive(drive: &FourierDrive, lattice: &ModeLattice) -> Result<TransferMatrix> {
    let m = lattice.mode_count();
    let c = drive_coefficients(drive, m)?;
    let entries = Array2::from_shape_fn((m, m), |(r, col)| c[(r + m - col) % m]);
    TransferMatrix::new(entries, *lattice, true)
}

/// `V = F·D₃·F†·D₂·F·D₁·F†`.
pub fn compose_cascade(
    first: &FourierDrive,
    shaper: &ShaperPattern,
    second: &FourierDrive,
    lattice: &ModeLattice,
) -> Result<TransferMatrix> {
    Cascade::new(first, shaper, second, lattice)?.transfer_matrix()
}

/// A cascade prepared for repeated propagation of input fields.
#[derive(Debug, Clone)]
pub struct Cascade {
    lattice: ModeLattice,
    fft: UnitaryFft,
    first: Vec<Complex64>,
    shaper: Vec<Complex64>,
    second: Vec<Complex64>,
    lossless: bool,
}

impl Cascade {
    pub fn new(
        first: &FourierDrive,
        shaper: &ShaperPattern,
        second: &FourierDrive,
        lattice: &ModeLattice,
    ) -> Result<Self> {
        let m = lattice.mode_count();
        if shaper.len() != m {
            return Err(invalid(format!("shaper has {} modes, lattice has {m}", shaper.len())));
        }
        Ok(Self {
            lattice: *lattice,
            fft: UnitaryFft::new(m),
            first: eom_diagonal(first, m)?,
            shaper: shaper_diagonal(shaper),
            second: eom_diagonal(second, m)?,
            lossless: shaper.is_lossless(),
        })
    }

    pub fn lattice(&self) -> &ModeLattice {
        &self.lattice
    }

    /// Applies the cascade in place to one or more stacked length-M fields.
    pub fn apply(&self, buf: &mut [Complex64]) {
        let m = self.lattice.mode_count();
        assert_eq!(buf.len() % m, 0, "buffer is not a whole number of fields");
        let diag = |buf: &mut [Complex64], d: &[Complex64]| {
            for chunk in buf.chunks_exact_mut(m) {
                chunk.iter_mut().zip(d).for_each(|(x, y)| *x *= y);
            }
        };
        self.fft.inverse(buf);
        diag(buf, &self.first);
        self.fft.forward(buf);
        diag(buf, &self.shaper);
        self.fft.inverse(buf);
        diag(buf, &self.second);
        self.fft.forward(buf);
    }

    /// Output field for a single input field over the lattice.
    pub fn propagate(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut buf = input.to_vec();
        self.apply(&mut buf);
        buf
    }

    /// Columns of `V` for the given input modes.
    pub fn columns(&self, inputs: impl IntoIterator<Item = usize>) -> Array2<Complex64> {
        let m = self.lattice.mode_count();
        let inputs: Vec<usize> = inputs.into_iter().collect();
        let mut buf = vec![Complex64::new(0.0, 0.0); m * inputs.len()];
        for (c, &n) in inputs.iter().enumerate() {
            buf[c * m + n] = Complex64::new(1.0, 0.0);
        }
        self.apply(&mut buf);
        Array2::from_shape_fn((m, inputs.len()), |(r, c)| buf[c * m + r])
    }

    /// The d×d block on the computational window, without forming all of `V`.
    pub fn window_block(&self) -> Array2<Complex64> {
        let w = self.lattice.window();
        let cols = self.columns(w.clone());
        cols.slice(ndarray::s![w, ..]).to_owned()
    }

    pub fn transfer_matrix(&self) -> Result<TransferMatrix> {
        let m = self.lattice.mode_count();
        TransferMatrix::new(self.columns(0..m), self.lattice, self.lossless)
    }
}
