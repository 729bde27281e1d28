//! Line-by-line pulse shaper patterns.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::drive::wrap_phase;
use crate::error::{invalid, Result};

/// Per-mode spectral phase and amplitude transmission over the whole lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShaperPattern {
    phases: Vec<f64>,
    amplitudes: Vec<f64>,
}

impl ShaperPattern {
    /// All-pass, zero-phase pattern.
    pub fn flat(m: usize) -> Self {
        Self { phases: vec![0.0; m], amplitudes: vec![1.0; m] }
    }

    /// Lossless pattern; phases are wrapped into `(-π, π]`.
    pub fn from_phases(phases: Vec<f64>) -> Self {
        let m = phases.len();
        Self { phases: phases.into_iter().map(wrap_phase).collect(), amplitudes: vec![1.0; m] }
    }

    /// Zero phase everywhere except the modes starting at `start`.
    pub fn windowed(m: usize, start: usize, phases: &[f64]) -> Result<Self> {
        if start + phases.len() > m {
            return Err(invalid(format!("shaper window [{start}, {}) exceeds {m} modes", start + phases.len())));
        }
        let mut full = vec![0.0; m];
        full[start..start + phases.len()].copy_from_slice(phases);
        Ok(Self::from_phases(full))
    }

    pub fn with_amplitudes(mut self, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != self.phases.len() {
            return Err(invalid("amplitude mask length differs from phase pattern"));
        }
        if amplitudes.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(invalid("shaper amplitudes must lie in [0, 1]"));
        }
        self.amplitudes = amplitudes;
        Ok(self)
    }

    /// Blocks every mode outside `band`.
    pub fn passband(mut self, band: Range<usize>) -> Self {
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if !band.contains(&i) {
                *a = 0.0;
            }
        }
        self
    }

    /// Cyclic shift towards higher mode index by `s`.
    pub fn shifted(&self, s: usize) -> Self {
        let m = self.len();
        let mut phases = vec![0.0; m];
        let mut amplitudes = vec![0.0; m];
        for i in 0..m {
            phases[(i + s) % m] = self.phases[i];
            amplitudes[(i + s) % m] = self.amplitudes[i];
        }
        Self { phases, amplitudes }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn is_lossless(&self) -> bool {
        self.amplitudes.iter().all(|&a| a == 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windowed_places_phases() {
        let s = ShaperPattern::windowed(8, 3, &[1.0, -1.0]).unwrap();
        assert_eq!(s.phases(), &[0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0]);
        assert!(ShaperPattern::windowed(8, 7, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn passband_marks_lossy() {
        let s = ShaperPattern::flat(8);
        assert!(s.is_lossless());
        let s = s.passband(2..6);
        assert!(!s.is_lossless());
        assert_eq!(s.amplitudes(), &[0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
        assert!(ShaperPattern::flat(8).passband(0..8).is_lossless());
    }

    #[test]
    fn amplitude_range_checked() {
        assert!(ShaperPattern::flat(2).with_amplitudes(vec![1.0, 1.5]).is_err());
        assert!(ShaperPattern::flat(2).with_amplitudes(vec![1.0]).is_err());
    }

    #[test]
    fn shift_wraps() {
        let s = ShaperPattern::from_phases(vec![1.0, 2.0, 3.0]).shifted(1);
        assert_eq!(s.phases(), &[3.0, 1.0, 2.0]);
    }
}
