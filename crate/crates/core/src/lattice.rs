//! The discretized frequency-bin space.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A finite, cyclic lattice of `mode_count` frequency bins with a
/// `computational_dim`-wide window of computational modes.
///
/// All math is index based; `spacing` (rad/s) is carried for reporting only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeLattice {
    mode_count: usize,
    spacing: f64,
    computational_dim: usize,
    window_offset: usize,
}

impl ModeLattice {
    /// Lattice with the computational window centered at `mode_count / 2`.
    pub fn centered(mode_count: usize, computational_dim: usize) -> Result<Self> {
        let offset = mode_count.saturating_sub(computational_dim) / 2;
        Self::new(mode_count, computational_dim, offset)
    }

    pub fn new(mode_count: usize, computational_dim: usize, window_offset: usize) -> Result<Self> {
        if computational_dim == 0 {
            return Err(invalid("computational dimension must be positive"));
        }
        if mode_count < 2 * computational_dim || !mode_count.is_multiple_of(2) {
            return Err(invalid(format!(
                "mode count {mode_count} must be even and at least twice d = {computational_dim}"
            )));
        }
        if window_offset + computational_dim > mode_count {
            return Err(invalid(format!(
                "window [{window_offset}, {}) exceeds lattice of {mode_count} modes",
                window_offset + computational_dim
            )));
        }
        Ok(Self { mode_count, spacing: 2.0 * std::f64::consts::PI * 25e9, computational_dim, window_offset })
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    /// Same lattice with the computational window moved to `offset`.
    pub fn with_offset(self, offset: usize) -> Result<Self> {
        Self::new(self.mode_count, self.computational_dim, offset).map(|l| l.with_spacing(self.spacing))
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dim(&self) -> usize {
        self.computational_dim
    }

    pub fn offset(&self) -> usize {
        self.window_offset
    }

    /// Lattice indices of the computational modes.
    pub fn window(&self) -> std::ops::Range<usize> {
        self.window_offset..self.window_offset + self.computational_dim
    }

    /// A `width`-mode band centered on the computational window, clamped to
    /// the lattice.
    pub fn centered_band(&self, width: usize) -> std::ops::Range<usize> {
        let width = width.min(self.mode_count);
        let center2 = 2 * self.window_offset + self.computational_dim;
        let start = (center2.saturating_sub(width) / 2).min(self.mode_count - width);
        start..start + width
    }

    /// The same window geometry on a lattice with `factor` times as many modes,
    /// keeping the window centered the same distance from the middle.
    pub fn scaled(&self, factor: usize) -> Result<Self> {
        let m = self.mode_count * factor;
        let shift = (m - self.mode_count) / 2;
        Self::new(m, self.computational_dim, self.window_offset + shift).map(|l| l.with_spacing(self.spacing))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_window() {
        let l = ModeLattice::centered(128, 2).unwrap();
        assert_eq!(l.window(), 63..65);
        let l = ModeLattice::centered(128, 3).unwrap();
        assert_eq!(l.window(), 62..65);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(ModeLattice::new(7, 2, 0).is_err());
        assert!(ModeLattice::new(6, 4, 0).is_err());
        assert!(ModeLattice::new(8, 2, 7).is_err());
        assert!(ModeLattice::new(8, 0, 0).is_err());
    }

    #[test]
    fn band_is_centered_and_clamped() {
        let l = ModeLattice::centered(128, 2).unwrap();
        assert_eq!(l.centered_band(8), 60..68);
        assert_eq!(l.centered_band(2), 63..65);
        assert_eq!(l.centered_band(500), 0..128);
        let l = ModeLattice::new(16, 2, 0).unwrap();
        assert_eq!(l.centered_band(6), 0..6);
    }

    #[test]
    fn scaled_keeps_relative_position() {
        let l = ModeLattice::centered(128, 3).unwrap();
        let l2 = l.scaled(2).unwrap();
        assert_eq!(l2.mode_count(), 256);
        assert_eq!(l2.offset(), 62 + 64);
    }
}
