//! A hidden multiport behind a lossy, noisy, frequency-resolved power meter.

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::lattice::ModeLattice;
use crate::matrix::{round_sig, TransferMatrix};

/// Multiplicative noise draws beyond this many standard deviations are redrawn.
const NOISE_CUTOFF: f64 = 5.0;

/// The RNG stream consumed by one acquisition.
pub fn acquisition_rng(seed: u64, acquisition: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(acquisition);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualApparatus {
    truth: TransferMatrix,
    insertion_loss: f64,
    osa_noise_sigma: f64,
    seed: u64,
}

impl VirtualApparatus {
    /// `insertion_loss` is the power transmissivity `η ∈ (0, 1]`; the relative
    /// power noise `osa_noise_sigma` must lie in `[0, 0.1)`.
    pub fn new(truth: TransferMatrix, insertion_loss: f64, osa_noise_sigma: f64, seed: u64) -> Result<Self> {
        if !(insertion_loss > 0.0 && insertion_loss <= 1.0) {
            return Err(invalid(format!("transmissivity {insertion_loss} outside (0, 1]")));
        }
        if !(0.0..0.1).contains(&osa_noise_sigma) {
            return Err(invalid(format!("noise level {osa_noise_sigma} outside [0, 0.1)")));
        }
        Ok(Self { truth, insertion_loss, osa_noise_sigma, seed })
    }

    /// A noiseless, lossless apparatus.
    pub fn ideal(truth: TransferMatrix) -> Self {
        Self { truth, insertion_loss: 1.0, osa_noise_sigma: 0.0, seed: 0 }
    }

    /// The same apparatus drawing noise from another seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn truth(&self) -> &TransferMatrix {
        &self.truth
    }

    pub fn lattice(&self) -> &ModeLattice {
        self.truth.lattice()
    }

    pub fn insertion_loss(&self) -> f64 {
        self.insertion_loss
    }

    pub fn osa_noise_sigma(&self) -> f64 {
        self.osa_noise_sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Output field amplitudes over the whole lattice, before loss and noise.
    pub fn output_field(&self, probe: &ProbeState) -> Result<Vec<Complex64>> {
        let lattice = self.lattice();
        if probe.len() != lattice.dim() {
            return Err(invalid(format!("probe has {} modes, window has {}", probe.len(), lattice.dim())));
        }
        let v = self.truth.entries();
        let offset = lattice.offset();
        Ok((0..lattice.mode_count())
            .map(|m| probe.amplitudes().iter().enumerate().map(|(n, x)| v[[m, offset + n]] * x).sum())
            .collect())
    }

    /// Per-mode output powers `η·|Vx|²·(1+ε)` over the whole lattice.
    ///
    /// Each acquisition draws its noise from its own stream, so results do
    /// not depend on the order acquisitions are made in.
    pub fn measure_spectrum(&self, probe: &ProbeState, acquisition: u64) -> Result<Spectrum> {
        let field = self.output_field(probe)?;
        let mut powers: Vec<f64> = field.iter().map(|z| self.insertion_loss * z.norm_sqr()).collect();
        if self.osa_noise_sigma > 0.0 {
            let mut rng = acquisition_rng(self.seed, acquisition);
            let normal = Normal::new(0.0, self.osa_noise_sigma).expect("σ validated at construction");
            let limit = NOISE_CUTOFF * self.osa_noise_sigma;
            for p in &mut powers {
                let eps = loop {
                    let e = normal.sample(&mut rng);
                    if e.abs() <= limit {
                        break e;
                    }
                };
                *p *= 1.0 + eps;
            }
        }
        Ok(Spectrum { powers, acquisition })
    }
}

/// A full-lattice operator whose window block is `block`.
///
/// Light missing from column `n` of the block is routed to one dedicated
/// mode outside the window (below it when there is room, otherwise above),
/// so throughput normalization sees the block's loss as scattering. Modes
/// outside the window are otherwise left untouched.
pub fn embed_block(block: &Array2<Complex64>, lattice: &ModeLattice) -> Result<TransferMatrix> {
    let (d, m, offset) = (lattice.dim(), lattice.mode_count(), lattice.offset());
    if block.dim() != (d, d) {
        return Err(invalid(format!("block is {:?}, window has {d} modes", block.dim())));
    }
    let spill: Vec<usize> = if offset >= d {
        (0..d).map(|n| offset - 1 - n).collect()
    } else if offset + 2 * d <= m {
        (0..d).map(|n| offset + d + n).collect()
    } else {
        return Err(invalid("no room outside the window for scattered light"));
    };
    let mut v = Array2::eye(m);
    for n in 0..d {
        let column = block.column(n);
        let kept: f64 = column.iter().map(|z| z.norm_sqr()).sum();
        if kept > 1.0 + 1e-9 {
            return Err(invalid(format!("block column {n} has norm² {kept} > 1")));
        }
        v[[offset + n, offset + n]] = Complex64::new(0.0, 0.0);
        for (r, z) in column.iter().enumerate() {
            v[[offset + r, offset + n]] = *z;
        }
        v[[spill[n], spill[n]]] = Complex64::new(0.0, 0.0);
        v[[spill[n], offset + n]] = Complex64::new((1.0 - kept).max(0.0).sqrt(), 0.0);
    }
    TransferMatrix::new(v, *lattice, false)
}

/// Coherent probe amplitudes on the computational window: `√p_m·e^{iφ_m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeState {
    amplitudes: Vec<Complex64>,
}

impl ProbeState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return Err(invalid("probe must excite at least one mode"));
        }
        Ok(Self { amplitudes })
    }

    /// Power `power` in window mode `n` only.
    pub fn single_mode(d: usize, n: usize, power: f64) -> Result<Self> {
        if n >= d {
            return Err(invalid(format!("mode {n} outside the {d}-mode window")));
        }
        let mut a = vec![Complex64::new(0.0, 0.0); d];
        a[n] = Complex64::new(power.sqrt(), 0.0);
        Self::new(a)
    }

    /// `[√p, 0, …, √p·e^{iφ}, …, 0]` with the second component at mode `n`.
    pub fn pair(d: usize, n: usize, power: f64, phi: f64) -> Result<Self> {
        if n == 0 || n >= d {
            return Err(invalid(format!("pair partner {n} must lie in 1..{d}")));
        }
        let mut a = vec![Complex64::new(0.0, 0.0); d];
        a[0] = Complex64::new(power.sqrt(), 0.0);
        a[n] = Complex64::from_polar(power.sqrt(), phi);
        Self::new(a)
    }

    /// Equal power in every window mode with a linear phase ramp `e^{inφ}`.
    pub fn ramp(d: usize, power: f64, phi: f64) -> Result<Self> {
        Self::new((0..d).map(|n| Complex64::from_polar(power.sqrt(), n as f64 * phi)).collect())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Measured per-mode powers over the whole lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    powers: Vec<f64>,
    acquisition: u64,
}

impl Spectrum {
    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn acquisition(&self) -> u64 {
        self.acquisition
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }

    /// CSV rows `mode,power,repeat` with 9 significant digits.
    pub fn to_csv(&self, repeat: usize) -> String {
        let mut out = String::from("mode,power,repeat\n");
        for (m, p) in self.powers.iter().enumerate() {
            out.push_str(&format!("{m},{},{repeat}\n", round_sig(*p, 9)));
        }
        out
    }
}
