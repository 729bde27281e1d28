//! Uniform mixers built from one modulator alone.
//!
//! A single modulator is Toeplitz in frequency, so a uniform `d`-mode mixer
//! needs `2d−1` sideband coefficients of equal modulus. The search maximizes
//! the balanced success `d·min_{|n|<d} |c_n|²`, which can never exceed
//! `d/(2d−1)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lbfgs::{self, LbfgsOptions};
use super::search::restart_rng;
use crate::cascade::drive_coefficients;
use crate::drive::{wrap_phase, FourierDrive};
use crate::error::{invalid, Result};
use crate::metrics::single_eom_ceiling;
use crate::par::{map_indexed, Exec};

/// Sharpness schedule of the soft minimum, loosest first.
const SHARPNESS: [f64; 6] = [30.0, 100.0, 300.0, 1e3, 3e3, 1e4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleEomProblem {
    pub dim: usize,
    pub harmonics: usize,
    pub mode_count: usize,
    pub restarts: usize,
    /// L-BFGS iterations allowed per restart, shared by all sharpness stages.
    pub iteration_budget: usize,
    pub master_seed: u64,
}

impl SingleEomProblem {
    /// Defaults: M = 128, 20 restarts.
    pub fn new(dim: usize, harmonics: usize) -> Result<Self> {
        let p = Self { dim, harmonics, mode_count: 128, restarts: 20, iteration_budget: 3000, master_seed: 0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(invalid("a mixer needs at least two modes"));
        }
        if self.harmonics == 0 || 4 * self.harmonics >= self.mode_count {
            return Err(invalid(format!("{} harmonics do not fit M = {}", self.harmonics, self.mode_count)));
        }
        if 2 * self.dim > self.mode_count {
            return Err(invalid("lattice too small for the sidebands of a uniform mixer"));
        }
        if self.restarts == 0 || self.iteration_budget == 0 {
            return Err(invalid("restarts and iteration budget must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleEomResult {
    pub dim: usize,
    pub drive: FourierDrive,
    /// `d·min |c_n|²` over the `2d−1` coefficients a uniform mixer uses.
    pub balanced_success: f64,
    /// `P` of the truncated Toeplitz block, balanced or not.
    pub success_probability: f64,
    /// `d/(2d−1)`.
    pub ceiling: f64,
    /// `|c_n|²` for `n = −(d−1)..=d−1`.
    pub coefficient_powers: Vec<f64>,
    pub winner: usize,
    /// Balanced success reached by each restart.
    pub restarts: Vec<f64>,
}

/// `|c_n|²` for `n = −(d−1)..=d−1`.
pub fn coefficient_powers(drive: &FourierDrive, dim: usize, mode_count: usize) -> Result<Vec<f64>> {
    let c = drive_coefficients(drive, mode_count)?;
    Ok(sideband_range(dim).map(|n| c[n.rem_euclid(mode_count as isize) as usize].norm_sqr()).collect())
}

/// `d·min_{|n|<d} |c_n|²` for one modulator driven by `drive`.
pub fn balanced_success(drive: &FourierDrive, dim: usize, mode_count: usize) -> Result<f64> {
    let q = coefficient_powers(drive, dim, mode_count)?;
    Ok(dim as f64 * q.iter().copied().fold(f64::INFINITY, f64::min))
}

fn sideband_range(dim: usize) -> std::ops::RangeInclusive<isize> {
    let r = dim as isize - 1;
    -r..=r
}

/// Window success of the `d×d` Toeplitz block with entries `c_{a−b}`.
fn window_success(powers: &[f64], dim: usize) -> f64 {
    let r = dim - 1;
    let mut total = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            total += powers[a + r - b];
        }
    }
    total / dim as f64
}

/// Soft-minimum objective over the sideband powers of a single drive.
struct Softmin {
    m: usize,
    dim: usize,
    harmonics: usize,
    /// `sin`/`cos` tables `[h][j]` of `2π(h+1)j/M`.
    sin: Vec<Vec<f64>>,
    cos: Vec<Vec<f64>>,
}

impl Softmin {
    fn new(problem: &SingleEomProblem) -> Self {
        let m = problem.mode_count;
        let table = |f: fn(f64) -> f64| {
            (1..=problem.harmonics).map(|h| (0..m).map(|j| f(2.0 * PI * (h * j) as f64 / m as f64)).collect()).collect()
        };
        Self { m, dim: problem.dim, harmonics: problem.harmonics, sin: table(f64::sin), cos: table(f64::cos) }
    }

    fn phases(&self, x: &[f64]) -> Vec<f64> {
        let p = self.harmonics;
        (0..self.m)
            .map(|j| {
                (0..p)
                    .map(|h| {
                        let (s, c) = (self.sin[h][j], self.cos[h][j]);
                        // sin(ωt + θ) = sin ωt cos θ + cos ωt sin θ
                        x[h] * (s * x[p + h].cos() + c * x[p + h].sin())
                    })
                    .sum()
            })
            .collect()
    }

    /// `(1/κ)·ln Σ exp(−κ q_n)` (the negated soft minimum) and its gradient.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64], kappa: f64) -> f64 {
        let (m, p) = (self.m, self.harmonics);
        let phi = self.phases(x);
        let field: Vec<Complex64> = phi.iter().map(|&v| Complex64::from_polar(1.0, v)).collect();
        let bands: Vec<isize> = sideband_range(self.dim).collect();
        let basis = |n: isize, j: usize| {
            let k = (n.rem_euclid(m as isize) as usize * j) % m;
            Complex64::from_polar(1.0, -2.0 * PI * k as f64 / m as f64)
        };
        let coeffs: Vec<Complex64> = bands
            .iter()
            .map(|&n| field.iter().enumerate().map(|(j, z)| z * basis(n, j)).sum::<Complex64>() / m as f64)
            .collect();
        let q: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
        let qmin = q.iter().copied().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = q.iter().map(|v| (-kappa * (v - qmin)).exp()).collect();
        let total: f64 = weights.iter().sum();
        let value = -qmin + total.ln() / kappa;

        // ∂value/∂q_n = −w_n; ∂q_n/∂φ_j = (2/M)·Re(i·e^{iφ_j}·conj(c_n)·e^{−2πinj/M})
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (j, z) in field.iter().enumerate() {
            let mix: Complex64 =
                bands.iter().zip(&coeffs).zip(&weights).map(|((&n, c), w)| c.conj() * basis(n, j) * (w / total)).sum();
            let dphi = -(2.0 / m as f64) * (Complex64::i() * z * mix).re;
            for h in 0..p {
                let (s, c) = (self.sin[h][j], self.cos[h][j]);
                let (st, ct) = x[p + h].sin_cos();
                grad[h] += dphi * (s * ct + c * st);
                grad[p + h] += dphi * x[h] * (c * ct - s * st);
            }
        }
        value
    }
}

fn run_restart(problem: &SingleEomProblem, objective: &Softmin, index: usize) -> (FourierDrive, f64) {
    let mut rng = restart_rng(problem.master_seed, index);
    let p = problem.harmonics;
    // amplitude range π/h keeps the initial spectrum from spreading far past
    // the 2d−1 sidebands the mixer can use
    let mut x: Vec<f64> = (1..=p).map(|h| rng.random_range(0.0..=PI / h as f64)).collect();
    x.extend((0..p).map(|_| wrap_phase(rng.random_range(-PI..PI))));
    let mut used = 0;
    let per_stage = (problem.iteration_budget / SHARPNESS.len()).max(1);
    for kappa in SHARPNESS {
        let remaining = problem.iteration_budget.saturating_sub(used);
        if remaining == 0 {
            break;
        }
        let opts = LbfgsOptions { max_iterations: remaining.min(per_stage), ..LbfgsOptions::default() };
        let out = lbfgs::minimize(|x, g| objective.value_and_gradient(x, g, kappa), &x, &opts);
        used += out.iterations;
        x = out.x;
    }
    let drive = FourierDrive::from_components(&x[..p], &x[p..]).expect("component lists have equal length");
    let score = balanced_success(&drive, problem.dim, problem.mode_count).unwrap_or(0.0);
    (drive, score)
}

/// Multi-start search for the most efficient single-modulator uniform mixer.
pub fn single_eom_search(problem: &SingleEomProblem, exec: Exec) -> Result<SingleEomResult> {
    problem.validate()?;
    let objective = Softmin::new(problem);
    let outcomes = map_indexed(problem.restarts, exec, |i| run_restart(problem, &objective, i));
    let winner = outcomes.iter().enumerate().fold(0, |best, (i, o)| if o.1 > outcomes[best].1 { i } else { best });
    let drive = outcomes[winner].0.clone();
    let powers = coefficient_powers(&drive, problem.dim, problem.mode_count)?;
    Ok(SingleEomResult {
        dim: problem.dim,
        balanced_success: outcomes[winner].1,
        success_probability: window_success(&powers, problem.dim),
        ceiling: single_eom_ceiling(problem.dim)?,
        coefficient_powers: powers,
        drive,
        winner,
        restarts: outcomes.into_iter().map(|o| o.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmin_gradient_matches_differences() {
        let problem = SingleEomProblem { mode_count: 64, ..SingleEomProblem::new(3, 2).unwrap() };
        let s = Softmin::new(&problem);
        let x = [0.9, 0.4, 0.3, -1.1];
        let mut g = [0.0; 4];
        s.value_and_gradient(&x, &mut g, 200.0);
        let mut scratch = [0.0; 4];
        for i in 0..4 {
            let h = 1e-6;
            let (mut a, mut b) = (x, x);
            a[i] += h;
            b[i] -= h;
            let fd = (s.value_and_gradient(&a, &mut scratch, 200.0) - s.value_and_gradient(&b, &mut scratch, 200.0))
                / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7 * fd.abs().max(1.0), "component {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn single_tone_balance_is_bessel_limited() {
        // J₀(β) = J₁(β) at β ≈ 1.43470, where both equal ≈ 0.547946
        let drive = FourierDrive::single_tone(1.434_695_650_819_565, 0.0).unwrap();
        let b = balanced_success(&drive, 2, 128).unwrap();
        assert!((b - 2.0 * 0.547_946_449_517_280_8_f64.powi(2)).abs() < 1e-10, "{b}");
    }

    #[test]
    fn window_success_of_identity() {
        assert_eq!(window_success(&[0.0, 1.0, 0.0], 2), 1.0);
    }

    #[test]
    fn search_stays_below_ceiling() {
        let problem = SingleEomProblem { restarts: 4, iteration_budget: 600, ..SingleEomProblem::new(2, 2).unwrap() };
        let r = single_eom_search(&problem, Exec::Sequential).unwrap();
        assert!(r.balanced_success <= 2.0 / 3.0 + 1e-12);
        assert!(r.balanced_success > 0.58, "{r:?}");
        assert!(r.restarts.iter().all(|&v| v <= r.balanced_success));
    }
}
