//! Single-photon-level fringes: gated detectors, Poisson counts, dark counts.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::apparatus::{acquisition_rng, ProbeState, VirtualApparatus};
use super::reconstruct::phase_grid;
use crate::error::{degenerate, invalid, Result};
use crate::matrix::round_sig;
use crate::par::{map_indexed, Exec};

/// Default number of phase samples in a counting scan.
pub const DEFAULT_COUNTING_SAMPLES: usize = 20;

/// Points on which a fitted fringe is evaluated for its extremes.
const FINE_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub efficiency: f64,
    /// Gates per second.
    pub gate_rate: f64,
    /// Seconds per gate; informational, checked against the gate period.
    pub gate_duration: f64,
    /// Dark counts per second.
    pub dark_rate: f64,
}

impl Default for Detector {
    /// 20% efficiency, 1.25 MHz gating with 1 ns gates, 20 dark counts/s.
    fn default() -> Self {
        Self { efficiency: 0.2, gate_rate: 1.25e6, gate_duration: 1e-9, dark_rate: 20.0 }
    }
}

impl Detector {
    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(invalid(format!("detector efficiency {} outside (0, 1]", self.efficiency)));
        }
        if !(self.gate_rate > 0.0) || !(self.gate_duration > 0.0) || self.gate_duration * self.gate_rate > 1.0 {
            return Err(invalid("gates must be positive and shorter than the gate period"));
        }
        if !(self.dark_rate >= 0.0) {
            return Err(invalid("dark count rate must be non-negative"));
        }
        Ok(())
    }
}

/// Two-mode or all-mode superposition whose relative phase is scanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Superposition {
    /// Modes 0 and `n` with relative phase `φ`.
    Pair(usize),
    /// Every window mode `n` with phase `n·φ`.
    Ramp,
}

impl Superposition {
    /// Unit-power probe at phase `phi`.
    pub fn probe(self, d: usize, phi: f64) -> Result<ProbeState> {
        match self {
            Superposition::Pair(n) => ProbeState::pair(d, n, 0.5, phi),
            Superposition::Ramp => ProbeState::ramp(d, 1.0 / d as f64, phi),
        }
    }

    /// Highest fringe harmonic the superposition produces.
    pub fn harmonics(self, d: usize) -> usize {
        match self {
            Superposition::Pair(_) => 1,
            Superposition::Ramp => d - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingSettings {
    /// Mean photons per gate at the gate input.
    pub mean_photons: f64,
    pub detector: Detector,
    pub dwell_seconds: f64,
    pub repeats: usize,
    pub samples: usize,
}

impl Default for CountingSettings {
    /// 0.1 photons per gate, five 5-second dwells at each of 20 phases.
    fn default() -> Self {
        Self {
            mean_photons: 0.1,
            detector: Detector::default(),
            dwell_seconds: 5.0,
            repeats: 5,
            samples: DEFAULT_COUNTING_SAMPLES,
        }
    }
}

impl CountingSettings {
    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        if !(self.mean_photons > 0.0) || !(self.dwell_seconds > 0.0) {
            return Err(invalid("mean photon number and dwell time must be positive"));
        }
        if self.repeats == 0 || self.samples < 2 {
            return Err(invalid("need at least one repeat and two phase samples"));
        }
        Ok(())
    }
}

/// Counts per window output mode over the phase grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTrace {
    pub phi: Vec<f64>,
    /// Raw counts `[mode][k][repeat]`.
    pub counts: Vec<Vec<Vec<u64>>>,
    /// Mean dark counts per dwell measured with the input blocked, `[mode]`.
    pub dark_mean: Vec<f64>,
    /// Dark-subtracted mean counts per dwell, `[mode][k]`; may be negative.
    pub mean: Vec<Vec<f64>>,
    /// Sample standard deviation over repeats, `[mode][k]`.
    pub std_dev: Vec<Vec<f64>>,
    /// Expected counts per dwell including dark counts, `[mode][k]`.
    pub expected: Vec<Vec<f64>>,
}

impl CountTrace {
    /// CSV rows `phi,mode,repeat,counts`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,mode,repeat,counts\n");
        for (m, per_phase) in self.counts.iter().enumerate() {
            for (phi, reps) in self.phi.iter().zip(per_phase) {
                for (r, c) in reps.iter().enumerate() {
                    out.push_str(&format!("{},{m},{r},{c}\n", round_sig(*phi, 9)));
                }
            }
        }
        out
    }

    /// Visibility of each mode's dark-subtracted mean trace.
    pub fn visibilities(&self, harmonics: usize) -> Result<Vec<f64>> {
        self.mean.iter().map(|t| visibility(t, harmonics)).collect()
    }
}

fn draw(rng: &mut impl rand::Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

/// Monte Carlo photon counting while scanning the phase of `input`.
///
/// Phase sample `k`, repeat `r` draws from acquisition stream
/// `k·repeats + r`; the dark measurement of mode `m` uses stream
/// `K·repeats + m`.
pub fn photon_counting_scan(
    app: &VirtualApparatus,
    input: Superposition,
    settings: &CountingSettings,
    exec: Exec,
) -> Result<CountTrace> {
    settings.validate()?;
    let lattice = *app.lattice();
    let d = lattice.dim();
    let CountingSettings { mean_photons, detector, dwell_seconds, repeats, samples } = *settings;
    if samples < 2 * input.harmonics(d) + 2 {
        return Err(invalid(format!("{samples} samples cannot resolve the fringe harmonics")));
    }
    let phi = phase_grid(samples);
    let gates = detector.gate_rate * dwell_seconds;
    let dark = detector.dark_rate * dwell_seconds;

    // expected counts per dwell, [k][m]
    let expected: Vec<Vec<f64>> = phi
        .iter()
        .map(|&p| {
            let probe = input.probe(d, p)?;
            let field = app.output_field(&probe)?;
            let input_power = probe.total_power();
            Ok((0..d)
                .map(|m| {
                    let q = field[lattice.offset() + m].norm_sqr() / input_power;
                    let lambda = mean_photons * app.insertion_loss() * q * detector.efficiency;
                    gates * (1.0 - (-lambda).exp()) + dark
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let draws: Vec<Vec<u64>> = map_indexed(samples * repeats, exec, |i| {
        let mut rng = acquisition_rng(app.seed(), i as u64);
        expected[i / repeats].iter().map(|&mean| draw(&mut rng, mean)).collect()
    });
    let dark_mean: Vec<f64> = (0..d)
        .map(|m| {
            let mut rng = acquisition_rng(app.seed(), (samples * repeats + m) as u64);
            (0..repeats).map(|_| draw(&mut rng, dark) as f64).sum::<f64>() / repeats as f64
        })
        .collect();

    let counts: Vec<Vec<Vec<u64>>> = (0..d)
        .map(|m| (0..samples).map(|k| (0..repeats).map(|r| draws[k * repeats + r][m]).collect()).collect())
        .collect();
    let stats = |m: usize, k: usize| {
        let c = &counts[m][k];
        let n = c.len() as f64;
        let mean = c.iter().map(|&v| v as f64).sum::<f64>() / n;
        let var = if c.len() > 1 { c.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        (mean - dark_mean[m], var.sqrt())
    };
    let mean = (0..d).map(|m| (0..samples).map(|k| stats(m, k).0).collect()).collect();
    let std_dev = (0..d).map(|m| (0..samples).map(|k| stats(m, k).1).collect()).collect();
    let expected = (0..d).map(|m| (0..samples).map(|k| expected[k][m]).collect()).collect();
    Ok(CountTrace { phi, counts, dark_mean, mean, std_dev, expected })
}

/// Coefficients `(A_n, B_n)` of `Σ_{n=0..=harmonics} A_n cos(nφ + B_n)` fitted
/// to uniformly sampled data by discrete-Fourier extraction.
pub fn fit_series(samples: &[f64], harmonics: usize) -> Result<Vec<(f64, f64)>> {
    let k = samples.len();
    if 2 * harmonics >= k {
        return Err(invalid(format!("{harmonics} harmonics are not resolvable from {k} samples")));
    }
    Ok((0..=harmonics)
        .map(|n| {
            let z: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, y)| Complex64::from_polar(*y, -2.0 * PI * ((n * j) % k) as f64 / k as f64))
                .sum();
            if n == 0 {
                (z.re / k as f64, 0.0)
            } else {
                let z = z * (2.0 / k as f64);
                (z.norm(), z.arg())
            }
        })
        .collect())
}

/// `(y_max − y_min)/(y_max + y_min)` of the fitted Fourier series with
/// harmonics `0..=harmonics`, evaluated on a fine grid.
pub fn visibility(samples: &[f64], harmonics: usize) -> Result<f64> {
    if samples.iter().all(|y| *y == 0.0) {
        return Err(degenerate("visibility of an all-zero trace is undefined"));
    }
    let series = fit_series(samples, harmonics.max(1))?;
    let (lo, hi) = (0..FINE_GRID).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
        let phi = 2.0 * PI * i as f64 / FINE_GRID as f64;
        let y: f64 = series.iter().enumerate().map(|(n, (a, b))| a * (n as f64 * phi + b).cos()).sum();
        (lo.min(y), hi.max(y))
    });
    if hi + lo == 0.0 {
        return Err(degenerate("fitted fringe averages to zero"));
    }
    Ok((hi - lo) / (hi + lo))
}
