//! Electro-optic drive waveforms as truncated Fourier series.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// One sinewave component `amplitude · sin(index·Δω·t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub index: usize,
    pub amplitude: f64,
    pub phase: f64,
}

/// Temporal phase `φ(t) = Σ_k β_k sin(k·Δω·t + θ_k)` applied by one modulator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FourierDrive {
    harmonics: Vec<Harmonic>,
}

impl FourierDrive {
    pub fn new(harmonics: Vec<Harmonic>) -> Result<Self> {
        for w in harmonics.windows(2) {
            if w[1].index <= w[0].index {
                return Err(invalid("harmonic indices must be strictly increasing"));
            }
        }
        for h in &harmonics {
            if h.index == 0 {
                return Err(invalid("harmonic index must be positive"));
            }
            if !(h.amplitude >= 0.0) || !h.amplitude.is_finite() {
                return Err(invalid(format!("harmonic {} amplitude must be finite and >= 0", h.index)));
            }
            if !(h.phase > -PI && h.phase <= PI) {
                return Err(invalid(format!("harmonic {} phase outside (-pi, pi]", h.index)));
            }
        }
        Ok(Self { harmonics })
    }

    /// The undriven modulator.
    pub fn zero() -> Self {
        Self::default()
    }

    /// A single tone at the fundamental.
    pub fn single_tone(amplitude: f64, phase: f64) -> Result<Self> {
        Self::from_components(&[amplitude], &[phase])
    }

    /// Harmonics `1..=p` from raw, unconstrained optimizer values.
    ///
    /// Negative amplitudes are folded into a π phase shift and phases are
    /// wrapped, so any real input maps to a valid drive.
    pub fn from_components(amplitudes: &[f64], phases: &[f64]) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(invalid("amplitude and phase lists differ in length"));
        }
        let harmonics = amplitudes
            .iter()
            .zip(phases)
            .enumerate()
            .map(|(i, (&a, &th))| {
                let (a, th) = if a < 0.0 { (-a, th + PI) } else { (a, th) };
                Harmonic { index: i + 1, amplitude: a, phase: wrap_phase(th) }
            })
            .collect();
        Self::new(harmonics)
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn max_index(&self) -> usize {
        self.harmonics.last().map_or(0, |h| h.index)
    }

    /// Checks the Nyquist margin `2·k_max < M/2` for an `m`-point lattice.
    pub fn validate_for(&self, m: usize) -> Result<()> {
        if m == 0 {
            return Err(invalid("lattice size must be positive"));
        }
        let k = self.max_index();
        if k > 0 && 4 * k >= m {
            return Err(invalid(format!("harmonic {k} violates the Nyquist margin for M = {m}")));
        }
        Ok(())
    }

    /// φ at time `t` expressed as a fraction of the drive period.
    pub fn phase_at(&self, t: f64) -> f64 {
        self.harmonics.iter().map(|h| h.amplitude * (2.0 * PI * h.index as f64 * t + h.phase).sin()).sum()
    }

    /// φ sampled at `t_j = j·T/m`, `j = 0..m`.
    pub fn samples(&self, m: usize) -> Vec<f64> {
        (0..m).map(|j| self.phase_at(j as f64 / m as f64)).collect()
    }
}
