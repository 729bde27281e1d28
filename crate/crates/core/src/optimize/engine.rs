//! Window-block evaluation of the cascade with adjoint gradients.
//!
//! Only the d input columns of the computational window are propagated, and
//! the gradient of any smooth function of `(P, F)` is obtained with one
//! backward pass through the same FFT chain.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use super::problem::DesignProblem;
use crate::fourier::UnitaryFft;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct Evaluator {
    m: usize,
    d: usize,
    window_start: usize,
    shaper_start: usize,
    shaper_len: usize,
    harmonics: usize,
    target: Array2<Complex64>,
    fft: UnitaryFft,
    /// `F†·e_n` for each window input, stacked.
    inputs: Vec<Complex64>,
    /// `sin(2π·h·j/M)` and `cos(..)` for h = 1..=p, row per harmonic.
    sin_table: Vec<f64>,
    cos_table: Vec<f64>,
}

/// Forward-pass intermediates.
struct Forward {
    second: Vec<Complex64>,
    shaper: Vec<Complex64>,
    after_first: Vec<Complex64>,
    after_shaper: Vec<Complex64>,
    after_second: Vec<Complex64>,
    block: Array2<Complex64>,
}

/// Metrics of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub fidelity: f64,
    pub success: f64,
}

impl Evaluator {
    pub fn new(problem: &DesignProblem) -> Self {
        let lattice = problem.lattice;
        let m = lattice.mode_count();
        let d = lattice.dim();
        let fft = UnitaryFft::new(m);
        let mut inputs = vec![ZERO; d * m];
        for (c, n) in lattice.window().enumerate() {
            inputs[c * m + n] = Complex64::new(1.0, 0.0);
        }
        fft.inverse(&mut inputs);
        let p = problem.harmonics;
        let mut sin_table = vec![0.0; p * m];
        let mut cos_table = vec![0.0; p * m];
        for h in 0..p {
            for j in 0..m {
                let e = ((h + 1) * j) % m;
                let ang = 2.0 * PI * e as f64 / m as f64;
                sin_table[h * m + j] = ang.sin();
                cos_table[h * m + j] = ang.cos();
            }
        }
        let band = problem.shaper_band();
        Self {
            m,
            d,
            window_start: lattice.offset(),
            shaper_start: band.start,
            shaper_len: band.len(),
            harmonics: p,
            target: problem.target.matrix().clone(),
            fft,
            inputs,
            sin_table,
            cos_table,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.shaper_len + 4 * self.harmonics
    }

    fn drive_phase(&self, amps: &[f64], phases: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut phi = vec![0.0; m];
        for h in 0..self.harmonics {
            let (a, (s, c)) = (amps[h], phases[h].sin_cos());
            let st = &self.sin_table[h * m..(h + 1) * m];
            let ct = &self.cos_table[h * m..(h + 1) * m];
            for j in 0..m {
                phi[j] += a * (st[j] * c + ct[j] * s);
            }
        }
        phi
    }

    fn forward(&self, x: &[f64]) -> Forward {
        let (m, d, p, w) = (self.m, self.d, self.harmonics, self.shaper_len);
        let unit = |phi: Vec<f64>| phi.into_iter().map(|v| Complex64::from_polar(1.0, v)).collect::<Vec<_>>();
        let first = unit(self.drive_phase(&x[w..w + p], &x[w + p..w + 2 * p]));
        let second = unit(self.drive_phase(&x[w + 2 * p..w + 3 * p], &x[w + 3 * p..w + 4 * p]));
        let mut shaper = vec![Complex64::new(1.0, 0.0); m];
        for (k, &v) in x[..w].iter().enumerate() {
            shaper[self.shaper_start + k] = Complex64::from_polar(1.0, v);
        }
        let scale = |buf: &mut [Complex64], diag: &[Complex64]| {
            for chunk in buf.chunks_exact_mut(m) {
                chunk.iter_mut().zip(diag).for_each(|(a, b)| *a *= b);
            }
        };
        let mut buf = self.inputs.clone();
        scale(&mut buf, &first);
        let after_first = buf.clone();
        self.fft.forward(&mut buf);
        scale(&mut buf, &shaper);
        let after_shaper = buf.clone();
        self.fft.inverse(&mut buf);
        scale(&mut buf, &second);
        let after_second = buf.clone();
        self.fft.forward(&mut buf);
        let ws = self.window_start;
        let block = Array2::from_shape_fn((d, d), |(r, c)| buf[c * m + ws + r]);
        Forward { second, shaper, after_first, after_shaper, after_second, block }
    }

    /// The d×d window block for parameters `x`.
    pub fn block(&self, x: &[f64]) -> Array2<Complex64> {
        self.forward(x).block
    }

    pub fn metrics(&self, x: &[f64]) -> Metrics {
        metrics_of(&self.forward(x).block, &self.target)
    }

    /// Evaluates `L(P, F)` given by `merit`, which returns `(L, ∂L/∂P, ∂L/∂F)`,
    /// and writes `∇L` into `grad`.
    pub fn value_and_gradient<G>(&self, x: &[f64], grad: &mut [f64], merit: G) -> (f64, Metrics)
    where
        G: Fn(f64, f64) -> (f64, f64, f64),
    {
        let (m, d, p, w) = (self.m, self.d, self.harmonics, self.shaper_len);
        let fw = self.forward(x);
        let v = &fw.block;
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let overlap: Complex64 = v.iter().zip(self.target.iter()).map(|(a, b)| a.conj() * b).sum();
        let df = d as f64;
        let success = norm / df;
        let fidelity = if norm > 0.0 { overlap.norm_sqr() / (norm * df) } else { 0.0 };
        let (value, dl_dp, dl_df) = merit(success, fidelity);

        // G = ∂L/∂conj(V)
        let mut adj = vec![ZERO; d * m];
        if norm > 0.0 {
            let t2 = overlap.norm_sqr();
            for r in 0..d {
                for c in 0..d {
                    let vv = v[[r, c]];
                    let dp = vv / df;
                    let dfid = overlap.conj() * self.target[[r, c]] / (norm * df) - vv * (t2 / (norm * norm * df));
                    adj[c * m + self.window_start + r] = dp * dl_dp + dfid * dl_df;
                }
            }
        }

        let phase_grad = |adj: &[Complex64], state: &[Complex64]| -> Vec<f64> {
            let mut g = vec![0.0; m];
            for chunk in 0..d {
                let a = &adj[chunk * m..(chunk + 1) * m];
                let s = &state[chunk * m..(chunk + 1) * m];
                for j in 0..m {
                    g[j] += -2.0 * (a[j].conj() * s[j]).im;
                }
            }
            g
        };
        let unscale = |buf: &mut [Complex64], diag: &[Complex64]| {
            for chunk in buf.chunks_exact_mut(m) {
                chunk.iter_mut().zip(diag).for_each(|(a, b)| *a *= b.conj());
            }
        };

        self.fft.inverse(&mut adj);
        let g_second = phase_grad(&adj, &fw.after_second);
        unscale(&mut adj, &fw.second);
        self.fft.forward(&mut adj);
        let g_shaper = phase_grad(&adj, &fw.after_shaper);
        unscale(&mut adj, &fw.shaper);
        self.fft.inverse(&mut adj);
        let g_first = phase_grad(&adj, &fw.after_first);

        grad[..w].copy_from_slice(&g_shaper[self.shaper_start..self.shaper_start + w]);
        self.chain_drive(&g_first, &x[w..w + 2 * p], &mut grad[w..w + 2 * p]);
        self.chain_drive(&g_second, &x[w + 2 * p..w + 4 * p], &mut grad[w + 2 * p..w + 4 * p]);
        (value, Metrics { fidelity, success })
    }

    /// Maps `∂L/∂φ(t_j)` onto the harmonic amplitudes and phases.
    fn chain_drive(&self, dphi: &[f64], params: &[f64], out: &mut [f64]) {
        let (m, p) = (self.m, self.harmonics);
        for h in 0..p {
            let (a, (s, c)) = (params[h], params[p + h].sin_cos());
            let st = &self.sin_table[h * m..(h + 1) * m];
            let ct = &self.cos_table[h * m..(h + 1) * m];
            let (mut ga, mut gt) = (0.0, 0.0);
            for j in 0..m {
                let sin_full = st[j] * c + ct[j] * s;
                let cos_full = ct[j] * c - st[j] * s;
                ga += dphi[j] * sin_full;
                gt += dphi[j] * a * cos_full;
            }
            out[h] = ga;
            out[p + h] = gt;
        }
    }
}

pub(crate) fn metrics_of(v: &Array2<Complex64>, u: &Array2<Complex64>) -> Metrics {
    let d = v.nrows() as f64;
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let overlap: Complex64 = v.iter().zip(u.iter()).map(|(a, b)| a.conj() * b).sum();
    let fidelity = if norm > 0.0 { overlap.norm_sqr() / (norm * d) } else { 0.0 };
    Metrics { fidelity, success: norm / d }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::compose_cascade;
    use crate::matrix::max_abs_diff;
    use crate::optimize::problem::ParameterVector;
    use crate::target::GateTarget;
    use rand::SeedableRng;

    fn problem(d: usize, p: usize) -> DesignProblem {
        let target = if d == 2 { GateTarget::hadamard() } else { GateTarget::dft(d).unwrap() };
        let mut pr = DesignProblem::new(target, p).unwrap();
        pr.lattice = crate::lattice::ModeLattice::centered(64, d).unwrap();
        pr.shaper_window = 12;
        pr
    }

    #[test]
    fn block_matches_composed_cascade() {
        let pr = problem(3, 2);
        let ev = Evaluator::new(&pr);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let x = pr.random_start(&mut rng);
        let (d1, s, d2) = x.components(&pr).unwrap();
        let v = compose_cascade(&d1, &s, &d2, &pr.lattice).unwrap().truncate();
        assert!(max_abs_diff(&v, &ev.block(x.values())) < 1e-13);
    }

    #[test]
    fn gradient_matches_central_differences() {
        for (d, p) in [(2, 1), (3, 2)] {
            let pr = problem(d, p);
            let ev = Evaluator::new(&pr);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(d as u64);
            let x = pr.random_start(&mut rng).values().to_vec();
            // a mixed merit exercises both the P and F branches
            let merit = |pp: f64, ff: f64| (-pp * ff + 3.0 * (0.9 - ff).powi(2), -ff, -pp - 6.0 * (0.9 - ff));
            let mut g = vec![0.0; x.len()];
            ev.value_and_gradient(&x, &mut g, merit);
            let h = 1e-6;
            for i in 0..x.len() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let mut scratch = vec![0.0; x.len()];
                let fp = ev.value_and_gradient(&xp, &mut scratch, merit).0;
                let fm = ev.value_and_gradient(&xm, &mut scratch, merit).0;
                let fd = (fp - fm) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-7 * (1.0 + fd.abs()), "d={d} param {i}: fd {fd} vs adjoint {}", g[i]);
            }
        }
    }

    #[test]
    fn zero_parameters_give_identity() {
        let pr = problem(2, 1);
        let ev = Evaluator::new(&pr);
        let x = ParameterVector::from_values(vec![0.0; pr.parameter_count()], pr.shaper_window, 1).unwrap();
        let mm = ev.metrics(x.values());
        assert!((mm.success - 1.0).abs() < 1e-14);
        // Tr(H) = 0
        assert!(mm.fidelity < 1e-28);
    }
}
