use std::f64::consts::PI;
use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::drive::{wrap_phase, FourierDrive};
use crate::error::{invalid, Result};
use crate::lattice::ModeLattice;
use crate::shaper::ShaperPattern;
use crate::target::GateTarget;

/// Weight of the quadratic fidelity penalty in [`objective`](super::objective).
pub const PENALTY_WEIGHT: f64 = 1e4;

/// What the search maximizes, subject to the fidelity floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Merit {
    #[default]
    SuccessProbability,
    FidelityTimesSuccess,
}

impl Merit {
    /// Value of `−merit` and its partials with respect to `P` and `F`.
    pub(crate) fn negated(self, p: f64, f: f64) -> (f64, f64, f64) {
        match self {
            Merit::SuccessProbability => (-p, -1.0, 0.0),
            Merit::FidelityTimesSuccess => (-p * f, -f, -p),
        }
    }
}

/// How restart amplitudes are drawn; phases are always uniform in `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StartDistribution {
    /// Every harmonic amplitude uniform in `[0, π]`.
    #[default]
    Uniform,
    /// Harmonic `h` amplitude uniform in `[0, π/h]`, which keeps many-harmonic
    /// starts from scattering light far outside the shaper window.
    Decaying,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    pub target: GateTarget,
    pub lattice: ModeLattice,
    /// Harmonics per modulator.
    pub harmonics: usize,
    pub fidelity_floor: f64,
    /// Number of free shaper modes centered on the computational window.
    pub shaper_window: usize,
    pub restarts: usize,
    /// L-BFGS iterations allowed per restart.
    pub iteration_budget: usize,
    pub master_seed: u64,
    pub merit: Merit,
    pub start: StartDistribution,
}

impl DesignProblem {
    /// Defaults: M = 128, F ≥ 0.9999, 32 free shaper modes, 20 restarts.
    pub fn new(target: GateTarget, harmonics: usize) -> Result<Self> {
        let lattice = ModeLattice::centered(128, target.dim())?;
        let problem = Self {
            target,
            lattice,
            harmonics,
            fidelity_floor: 0.9999,
            shaper_window: 32,
            restarts: 20,
            iteration_budget: 4000,
            master_seed: 0,
            merit: Merit::SuccessProbability,
            start: StartDistribution::Uniform,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fidelity_floor > 0.0 && self.fidelity_floor < 1.0) {
            return Err(invalid(format!("fidelity floor {} outside (0, 1)", self.fidelity_floor)));
        }
        if self.harmonics == 0 {
            return Err(invalid("at least one harmonic per modulator is required"));
        }
        let m = self.lattice.mode_count();
        if self.shaper_window > m {
            return Err(invalid(format!("shaper window {} exceeds {m} modes", self.shaper_window)));
        }
        if self.shaper_window < self.lattice.dim() {
            return Err(invalid("shaper window must cover the computational window"));
        }
        if self.lattice.dim() != self.target.dim() {
            return Err(invalid(format!(
                "target is {}x{}, lattice window has {} modes",
                self.target.dim(),
                self.target.dim(),
                self.lattice.dim()
            )));
        }
        if 4 * self.harmonics >= m {
            return Err(invalid(format!("{} harmonics violate the Nyquist margin for M = {m}", self.harmonics)));
        }
        if self.restarts == 0 || self.iteration_budget == 0 {
            return Err(invalid("restarts and iteration budget must be positive"));
        }
        Ok(())
    }

    /// Lattice indices of the free shaper modes.
    pub fn shaper_band(&self) -> Range<usize> {
        self.lattice.centered_band(self.shaper_window)
    }

    pub fn parameter_count(&self) -> usize {
        self.shaper_window + 4 * self.harmonics
    }

    /// A random starting point: uniform phases in (−π, π], amplitudes drawn
    /// per [`StartDistribution`].
    pub fn random_start<R: Rng>(&self, rng: &mut R) -> ParameterVector {
        let p = self.harmonics;
        let mut values = Vec::with_capacity(self.parameter_count());
        let phase = |rng: &mut R| wrap_phase(rng.random_range(-PI..PI));
        for _ in 0..self.shaper_window {
            values.push(phase(rng));
        }
        for _ in 0..2 {
            for h in 1..=p {
                let top = match self.start {
                    StartDistribution::Uniform => PI,
                    StartDistribution::Decaying => PI / h as f64,
                };
                values.push(rng.random_range(0.0..=top));
            }
            for _ in 0..p {
                values.push(phase(rng));
            }
        }
        ParameterVector { values, shaper_window: self.shaper_window, harmonics: p }
    }
}

/// Flat optimizer state: `[shaper phases | eom1 amplitudes | eom1 phases |
/// eom2 amplitudes | eom2 phases]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    values: Vec<f64>,
    shaper_window: usize,
    harmonics: usize,
}

impl ParameterVector {
    pub fn from_values(values: Vec<f64>, shaper_window: usize, harmonics: usize) -> Result<Self> {
        if values.len() != shaper_window + 4 * harmonics {
            return Err(invalid(format!(
                "expected {} parameters, got {}",
                shaper_window + 4 * harmonics,
                values.len()
            )));
        }
        Ok(Self { values, shaper_window, harmonics })
    }

    pub fn for_problem(values: Vec<f64>, problem: &DesignProblem) -> Result<Self> {
        Self::from_values(values, problem.shaper_window, problem.harmonics)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn shaper_window(&self) -> usize {
        self.shaper_window
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    pub fn shaper_phases(&self) -> &[f64] {
        &self.values[..self.shaper_window]
    }

    fn eom(&self, which: usize) -> (&[f64], &[f64]) {
        let p = self.harmonics;
        let base = self.shaper_window + which * 2 * p;
        (&self.values[base..base + p], &self.values[base + p..base + 2 * p])
    }

    pub fn first_drive(&self) -> FourierDrive {
        let (a, t) = self.eom(0);
        FourierDrive::from_components(a, t).expect("component lists have equal length")
    }

    pub fn second_drive(&self) -> FourierDrive {
        let (a, t) = self.eom(1);
        FourierDrive::from_components(a, t).expect("component lists have equal length")
    }

    /// Canonical form: amplitudes ≥ 0 and every phase in (−π, π].
    pub fn normalized(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        values.extend(self.shaper_phases().iter().map(|&x| wrap_phase(x)));
        for drive in [self.first_drive(), self.second_drive()] {
            values.extend(drive.harmonics().iter().map(|h| h.amplitude));
            values.extend(drive.harmonics().iter().map(|h| h.phase));
        }
        Self { values, shaper_window: self.shaper_window, harmonics: self.harmonics }
    }

    /// The shaper pattern on `lattice_modes` modes with the free phases starting at `start`.
    pub fn shaper(&self, lattice_modes: usize, start: usize) -> Result<ShaperPattern> {
        ShaperPattern::windowed(lattice_modes, start, self.shaper_phases())
    }

    /// Drives and shaper for `problem`'s lattice.
    pub fn components(&self, problem: &DesignProblem) -> Result<(FourierDrive, ShaperPattern, FourierDrive)> {
        if self.shaper_window != problem.shaper_window || self.harmonics != problem.harmonics {
            return Err(invalid("parameter layout does not match the problem"));
        }
        let shaper = self.shaper(problem.lattice.mode_count(), problem.shaper_band().start)?;
        Ok((self.first_drive(), shaper, self.second_drive()))
    }
}
