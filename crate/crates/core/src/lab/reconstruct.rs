//! Recovering the window block of a multiport from power measurements alone.
//!
//! Moduli come from single-mode probes normalized by total throughput, so
//! insertion loss cancels. Phases come from two-mode probes `(0, n)` whose
//! relative phase is scanned: output `m` then follows
//! `r_m0² + r_mn² + 2·r_m0·r_mn·cos(φ + φ_mn − φ_m0)`, and the first-harmonic
//! phase of that fringe fixes each entry in the gauge where the first row and
//! column are real.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use super::apparatus::{ProbeState, Spectrum, VirtualApparatus};
use crate::drive::wrap_phase;
use crate::error::{degenerate, invalid, Result};
use crate::lattice::ModeLattice;
use crate::matrix::{round_sig, MatrixDocument};
use crate::metrics::{fidelity, success_probability};
use crate::target::GateTarget;

/// Fitted amplitudes below this fraction of the offset carry no phase.
const FLAT_FRINGE: f64 = 1e-12;

/// Gauge label stored with reconstructed matrices.
pub const GAUGE: &str = "first row and first column real";

/// Default number of phase samples in a characterization scan.
pub const DEFAULT_SCAN_SAMPLES: usize = 16;

/// Output-mode traces over a uniform grid `φ_k = 2πk/K`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeTrace {
    phi: Vec<f64>,
    /// `values[m][k]` for window output mode `m`.
    values: Vec<Vec<f64>>,
}

/// `offset + amplitude·cos(n·φ + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
}

/// `φ_k = 2πk/K`, `k = 0..K`.
pub fn phase_grid(samples: usize) -> Vec<f64> {
    (0..samples).map(|k| 2.0 * PI * k as f64 / samples as f64).collect()
}

impl FringeTrace {
    /// Traces sampled on [`phase_grid`]; every trace must have the same length.
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let k = values.first().map_or(0, Vec::len);
        if k < 2 || values.iter().any(|v| v.len() != k) {
            return Err(invalid("fringe traces need equal lengths of at least two samples"));
        }
        Ok(Self { phi: phase_grid(k), values })
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn samples(&self) -> usize {
        self.phi.len()
    }

    pub fn modes(&self) -> usize {
        self.values.len()
    }

    pub fn trace(&self, mode: usize) -> &[f64] {
        &self.values[mode]
    }

    pub fn fit(&self, mode: usize, harmonic: usize) -> Result<FringeFit> {
        fit_fringe(self.trace(mode), harmonic)
    }

    /// CSV rows `phi,mode,value` with 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,mode,value\n");
        for (m, trace) in self.values.iter().enumerate() {
            for (phi, y) in self.phi.iter().zip(trace) {
                out.push_str(&format!("{},{m},{}\n", round_sig(*phi, 9), round_sig(*y, 9)));
            }
        }
        out
    }
}

/// Discrete-Fourier extraction of one harmonic from uniformly sampled data:
/// `offset` is the mean and `amplitude·e^{i·phase} = (2/K)·Σ y_k e^{−inφ_k}`.
pub fn fit_fringe(samples: &[f64], harmonic: usize) -> Result<FringeFit> {
    let k = samples.len();
    if harmonic == 0 || 2 * harmonic >= k {
        return Err(invalid(format!("harmonic {harmonic} is not resolvable from {k} samples")));
    }
    let offset = samples.iter().sum::<f64>() / k as f64;
    let z: Complex64 = samples
        .iter()
        .enumerate()
        .map(|(j, y)| Complex64::from_polar(*y, -2.0 * PI * ((harmonic * j) % k) as f64 / k as f64))
        .sum::<Complex64>()
        * (2.0 / k as f64);
    let amplitude = z.norm();
    let phase = if amplitude < FLAT_FRINGE * offset.abs() || amplitude == 0.0 { 0.0 } else { z.arg() };
    Ok(FringeFit { offset, amplitude, phase })
}

/// `r_mn = √(power in window mode m under probe n / total power under probe n)`.
pub fn reconstruct_amplitudes(spectra: &[Spectrum], lattice: &ModeLattice) -> Result<Array2<f64>> {
    let d = lattice.dim();
    if spectra.len() != d {
        return Err(invalid(format!("need one spectrum per window mode ({d}), got {}", spectra.len())));
    }
    let mut r = Array2::zeros((d, d));
    for (n, s) in spectra.iter().enumerate() {
        let total = s.total();
        if total <= 0.0 {
            return Err(degenerate(format!("probe {n} delivered no power")));
        }
        for m in 0..d {
            r[[m, n]] = (s.powers()[lattice.offset() + m].max(0.0) / total).sqrt();
        }
    }
    Ok(r)
}

/// Scans the relative phase of the probe pair `(0, n)` over `samples` points;
/// acquisition `k` of the scan uses stream `first_acquisition + k`.
pub fn phase_scan(
    app: &VirtualApparatus,
    n: usize,
    samples: usize,
    power: f64,
    first_acquisition: u64,
) -> Result<FringeTrace> {
    let lattice = app.lattice();
    let d = lattice.dim();
    if n == 0 || n >= d {
        return Err(invalid(format!("pair partner {n} must lie in 1..{d}")));
    }
    if samples < 2 * d {
        return Err(invalid(format!("{samples} samples cannot resolve a {d}-mode fringe")));
    }
    let mut values = vec![Vec::with_capacity(samples); d];
    for (k, phi) in phase_grid(samples).into_iter().enumerate() {
        let s = app.measure_spectrum(&ProbeState::pair(d, n, power, phi)?, first_acquisition + k as u64)?;
        for (m, trace) in values.iter_mut().enumerate() {
            trace.push(s.powers()[lattice.offset() + m]);
        }
    }
    FringeTrace::new(values)
}

/// A window block recovered from measurements, in the fixed phase gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedMultiport {
    pub entries: Array2<Complex64>,
    pub moduli: Array2<f64>,
    pub phases: Array2<f64>,
    pub success_probability: f64,
    pub fidelity: f64,
}

impl ReconstructedMultiport {
    pub fn to_document(&self) -> MatrixDocument {
        MatrixDocument::from_matrix(&self.entries).with_gauge(GAUGE)
    }
}

/// The full characterization: `d` single-mode probes (acquisitions `0..d`),
/// then a `samples`-point scan against mode 0 for every other input.
pub fn reconstruct(app: &VirtualApparatus, target: &GateTarget, samples: usize) -> Result<ReconstructedMultiport> {
    let lattice = *app.lattice();
    let d = lattice.dim();
    if target.dim() != d {
        return Err(invalid(format!("target is {}-dimensional, window has {d} modes", target.dim())));
    }
    let power = 1.0;
    let spectra = (0..d)
        .map(|n| app.measure_spectrum(&ProbeState::single_mode(d, n, power)?, n as u64))
        .collect::<Result<Vec<_>>>()?;
    let moduli = reconstruct_amplitudes(&spectra, &lattice)?;

    let mut phases = Array2::zeros((d, d));
    for n in 1..d {
        let first = (d + (n - 1) * samples) as u64;
        let trace = phase_scan(app, n, samples, power, first)?;
        let reference = trace.fit(0, 1)?.phase;
        for m in 1..d {
            phases[[m, n]] = wrap_phase(trace.fit(m, 1)?.phase - reference);
        }
    }
    let entries = Array2::from_shape_fn((d, d), |(m, n)| Complex64::from_polar(moduli[[m, n]], phases[[m, n]]));
    Ok(ReconstructedMultiport {
        success_probability: success_probability(&entries),
        fidelity: fidelity(&entries, target)?,
        entries,
        moduli,
        phases,
    })
}

/// `V` with the phases of its first row and column removed.
pub fn gauge_fixed(v: &Array2<Complex64>) -> Array2<Complex64> {
    let (rows, cols) = v.dim();
    let unit = |z: Complex64| if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) };
    let row: Vec<Complex64> = (0..rows).map(|m| unit(v[[m, 0]]).conj()).collect();
    let corner = unit(v[[0, 0]]);
    let col: Vec<Complex64> = (0..cols).map(|n| unit(v[[0, n]]).conj() * corner).collect();
    Array2::from_shape_fn((rows, cols), |(m, n)| v[[m, n]] * row[m] * col[n])
}
