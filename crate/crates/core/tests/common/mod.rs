//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's FFT path: matrices are built from
//! their defining formulas with dense products.
#![allow(dead_code)]

use std::f64::consts::PI;

use ndarray::{arr2, Array2};
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `F[j][k] = e^{−2πi·jk/M}/√M` from the definition.
pub fn dense_dft(m: usize) -> Array2<Complex64> {
    let s = 1.0 / (m as f64).sqrt();
    Array2::from_shape_fn((m, m), |(j, k)| Complex64::from_polar(s, -2.0 * PI * ((j * k) % m) as f64 / m as f64))
}

/// `φ(t_j)` for `φ(t) = Σ β_h sin(2π·h·j/M + θ_h)`, harmonics numbered from 1.
pub fn drive_phase(amps: &[f64], phases: &[f64], m: usize, j: usize) -> f64 {
    amps.iter()
        .zip(phases)
        .enumerate()
        .map(|(h, (b, th))| b * (2.0 * PI * ((h + 1) * j) as f64 / m as f64 + th).sin())
        .sum()
}

pub fn diag(values: impl Iterator<Item = Complex64>) -> Array2<Complex64> {
    let v: Vec<Complex64> = values.collect();
    let mut out = Array2::zeros((v.len(), v.len()));
    for (i, z) in v.into_iter().enumerate() {
        out[[i, i]] = z;
    }
    out
}

pub fn adjoint(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|z| z.conj())
}

/// `F·D₃·F†·D₂·F·D₁·F†` by dense products.
pub fn dense_cascade(
    first: (&[f64], &[f64]),
    shaper_phases: &[f64],
    second: (&[f64], &[f64]),
    m: usize,
) -> Array2<Complex64> {
    let f = dense_dft(m);
    let fh = adjoint(&f);
    let d1 = diag((0..m).map(|j| Complex64::from_polar(1.0, drive_phase(first.0, first.1, m, j))));
    let d2 = diag(shaper_phases.iter().map(|&p| Complex64::from_polar(1.0, p)));
    let d3 = diag((0..m).map(|j| Complex64::from_polar(1.0, drive_phase(second.0, second.1, m, j))));
    f.dot(&d3).dot(&fh).dot(&d2).dot(&f).dot(&d1).dot(&fh)
}

/// `J_n(x)` from its power series (adequate for `|x| ≲ 10`).
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let k = n.unsigned_abs();
    let mut term = (x / 2.0).powi(k as i32);
    for i in 1..=k {
        term /= i as f64;
    }
    let mut sum = term;
    for s in 1..200 {
        term *= -(x * x / 4.0) / (s as f64 * (s + k) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    if n < 0 && k % 2 == 1 {
        -sum
    } else {
        sum
    }
}

/// `(1/T)∫ e^{iφ(t)} e^{−i·n·Δω·t} dt` for a single tone, by the trapezoid rule
/// on `samples` points (spectrally accurate for periodic integrands).
pub fn tone_coefficient(beta: f64, theta: f64, n: i32, samples: usize) -> Complex64 {
    (0..samples)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / samples as f64;
            Complex64::from_polar(1.0, beta * (t + theta).sin() - n as f64 * t)
        })
        .sum::<Complex64>()
        / samples as f64
}

/// `V` with the phases of its first row and column removed.
pub fn gauge_fix(v: &Array2<Complex64>) -> Array2<Complex64> {
    let d = v.nrows();
    let mut out = v.clone();
    for m in 0..d {
        let ph = v[[m, 0]].arg();
        for n in 0..d {
            out[[m, n]] *= Complex64::from_polar(1.0, -ph);
        }
    }
    let row0: Vec<f64> = (0..d).map(|n| out[[0, n]].arg()).collect();
    for m in 0..d {
        for n in 0..d {
            out[[m, n]] *= Complex64::from_polar(1.0, -row0[n]);
        }
    }
    out
}

pub fn max_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `P = (1/d)Σ|V|²` and `F = |Σ conj(V)·U|²/(d·Σ|V|²)` written out directly.
pub fn metrics_oracle(v: &Array2<Complex64>, u: &Array2<Complex64>) -> (f64, f64) {
    let d = v.nrows() as f64;
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let overlap: Complex64 = v.iter().zip(u).map(|(a, b)| a.conj() * b).sum();
    (overlap.norm_sqr() / (d * norm), norm / d)
}

/// The measured beamsplitter matrix reported with the experiment.
#[allow(clippy::approx_constant)] // measured phases, not constants
pub fn paper_v2() -> Array2<Complex64> {
    let p = |x: f64, ph: f64| Complex64::from_polar(x.sqrt(), ph);
    arr2(&[[p(0.4871, 0.0), p(0.4869, 0.0)], [p(0.4866, 0.0), p(0.4871, 3.1400)]])
}

/// The measured tritter matrix reported with the experiment.
#[allow(clippy::approx_constant)] // measured values, not constants
pub fn paper_v3() -> Array2<Complex64> {
    let p = |x: f64, ph: f64| Complex64::from_polar(x.sqrt(), ph);
    arr2(&[
        [p(0.3261, 0.0), p(0.3126, 0.0), p(0.3062, 0.0)],
        [p(0.3183, 0.0), p(0.3290, 2.0925), p(0.3339, 4.1775)],
        [p(0.3202, 0.0), p(0.3476, 4.1365), p(0.3256, 2.0425)],
    ])
}

/// `(1/√2)[[1, 1], [1, −1]]`.
pub fn hadamard() -> Array2<Complex64> {
    let s = 1.0 / 2f64.sqrt();
    arr2(&[[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]])
}

/// `U[j][k] = e^{2πi·jk/d}/√d`.
pub fn dft_target(d: usize) -> Array2<Complex64> {
    let s = 1.0 / (d as f64).sqrt();
    Array2::from_shape_fn((d, d), |(j, k)| Complex64::from_polar(s, 2.0 * PI * ((j * k) % d) as f64 / d as f64))
}

/// A full-lattice matrix whose window block is `block`, with each column's
/// missing norm parked in a mode outside the window.
pub fn embed_block(block: &Array2<Complex64>, m: usize, offset: usize) -> Array2<Complex64> {
    let d = block.nrows();
    let mut out = Array2::zeros((m, m));
    for j in 0..m {
        out[[j, j]] = c(1.0, 0.0);
    }
    for n in 0..d {
        out[[offset + n, offset + n]] = c(0.0, 0.0);
        let mut kept = 0.0;
        for r in 0..d {
            out[[offset + r, offset + n]] = block[[r, n]];
            kept += block[[r, n]].norm_sqr();
        }
        // park the remainder two modes below the window, one slot per column
        let spill = offset - 2 - n;
        out[[spill, offset + n]] = c((1.0 - kept).max(0.0).sqrt(), 0.0);
        out[[spill, spill]] = c(0.0, 0.0);
    }
    out
}

/// Weak-duality upper bound on `2·min(|c₋₁|², |c₀|², |c₁|²)` over every
/// unimodular `f(t) = e^{iφ(t)}`.
///
/// For weights `λ₁, λ₀, λ₁ ≥ 0` and any phases, `Σ λ_k|c_k| ≤ max_ψ ⟨|g_ψ|⟩`
/// with `g_ψ(t) = λ₁e^{−it} + λ₀ + λ₁e^{i(t+ψ)}` (global phase and time shift
/// remove all but one relative phase), so `min|c_k| ≤ max_ψ⟨|g_ψ|⟩/(2λ₁+λ₀)`.
pub fn single_modulator_dual_bound(side_weight: f64, samples: usize, phase_steps: usize) -> f64 {
    let (l1, l0) = (side_weight, 1.0 - 2.0 * side_weight);
    let mean_abs = |psi: f64| {
        (0..samples)
            .map(|j| {
                let t = 2.0 * PI * (j as f64 + 0.5) / samples as f64;
                (Complex64::from_polar(l1, -t) + l0 + Complex64::from_polar(l1, t + psi)).norm()
            })
            .sum::<f64>()
            / samples as f64
    };
    let best = (0..=phase_steps).map(|i| mean_abs(PI * i as f64 / phase_steps as f64)).fold(0.0, f64::max);
    2.0 * best * best
}
