//! Limited-memory BFGS with a strong-Wolfe line search.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop when `‖∇f‖_∞` falls below this.
    pub gradient_tolerance: f64,
    /// Stop when the relative decrease of `f` stays below this for a few steps.
    pub value_tolerance: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { memory: 12, max_iterations: 1000, gradient_tolerance: 1e-10, value_tolerance: 1e-15 }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, which writes the gradient into its second argument and
/// returns the value.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &LbfgsOptions) -> LbfgsOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut evaluations = 1;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut stalls = 0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        if !fx.is_finite() {
            break;
        }
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax < opts.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        // two-loop recursion
        let mut dir: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &dir);
            dir.iter_mut().zip(y).for_each(|(d, yi)| *d -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            dir.iter_mut().for_each(|d| *d *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(d, si)| *d += (a - b) * si);
        }
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let initial = if history.is_empty() { (1.0 / gmax).min(1.0) } else { 1.0 };

        let search = line_search(&mut f, &x, fx, &g, &dir, slope, initial);
        evaluations += search.evaluations;
        let Some((step, fnew, gnew)) = search.accepted else {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        };
        let s: Vec<f64> = dir.iter().map(|d| d * step).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        x.iter_mut().zip(&s).for_each(|(xi, si)| *xi += si);
        let rel = (fx - fnew).abs() / fx.abs().max(fnew.abs()).max(1.0);
        fx = fnew;
        g = gnew;
        let sy = dot(&s, &y);
        if sy > 1e-16 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        if rel < opts.value_tolerance {
            stalls += 1;
            if stalls >= 5 {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    LbfgsOutcome { x, value: fx, iterations, evaluations, converged }
}

struct Search {
    accepted: Option<(f64, f64, Vec<f64>)>,
    evaluations: usize,
}

/// A trial point: step, value, gradient, directional derivative.
type Trial = (f64, f64, Vec<f64>, f64);

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

fn line_search<F>(f: &mut F, x: &[f64], f0: f64, g0: &[f64], dir: &[f64], slope0: f64, initial: f64) -> Search
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x.len();
    let mut evaluations = 0;
    let mut xt = vec![0.0; n];
    let mut probe = |a: f64| -> Trial {
        xt.iter_mut().zip(x.iter().zip(dir)).for_each(|(t, (xi, di))| *t = xi + a * di);
        let mut gt = vec![0.0; n];
        let ft = f(&xt, &mut gt);
        evaluations += 1;
        let st = dot(&gt, dir);
        (a, ft, gt, st)
    };

    let mut prev: Trial = (0.0, f0, g0.to_vec(), slope0);
    let mut a = initial;
    let mut accepted = None;
    for i in 0..30 {
        let t = probe(a);
        if !t.1.is_finite() || t.1 > f0 + C1 * a * slope0 || (i > 0 && t.1 >= prev.1) {
            accepted = zoom(&mut probe, f0, slope0, prev, t);
            break;
        }
        if t.3.abs() <= -C2 * slope0 {
            accepted = Some((t.0, t.1, t.2));
            break;
        }
        if t.3 >= 0.0 {
            accepted = zoom(&mut probe, f0, slope0, t, prev);
            break;
        }
        prev = t;
        a *= 2.0;
    }
    Search { accepted, evaluations }
}

fn zoom<P>(probe: &mut P, f0: f64, slope0: f64, mut lo: Trial, mut hi: Trial) -> Option<(f64, f64, Vec<f64>)>
where
    P: FnMut(f64) -> Trial,
{
    // best point satisfying sufficient decrease, used if curvature never holds
    let mut best: Option<(f64, f64, Vec<f64>)> = (lo.0 > 0.0).then(|| (lo.0, lo.1, lo.2.clone()));
    for _ in 0..40 {
        let (a_lo, f_lo, s_lo) = (lo.0, lo.1, lo.3);
        let (a_hi, f_hi) = (hi.0, hi.1);
        let (left, right) = if a_lo < a_hi { (a_lo, a_hi) } else { (a_hi, a_lo) };
        if right - left < 1e-16 * right.abs().max(1.0) {
            break;
        }
        // safeguarded quadratic interpolation from (f_lo, s_lo, f_hi)
        let width = a_hi - a_lo;
        let denom = 2.0 * (f_hi - f_lo - s_lo * width);
        let mut a = a_lo - s_lo * width * width / denom;
        let margin = 0.1 * (right - left);
        if !a.is_finite() || a < left + margin || a > right - margin {
            a = 0.5 * (a_lo + a_hi);
        }
        let t = probe(a);
        if !t.1.is_finite() || t.1 > f0 + C1 * a * slope0 || t.1 >= f_lo {
            hi = t;
        } else {
            if t.3.abs() <= -C2 * slope0 {
                return Some((t.0, t.1, t.2));
            }
            if best.as_ref().is_none_or(|b| t.1 < b.1) {
                best = Some((t.0, t.1, t.2.clone()));
            }
            if t.3 * (a_hi - a_lo) >= 0.0 {
                hi = lo;
            }
            lo = t;
        }
    }
    best
}
