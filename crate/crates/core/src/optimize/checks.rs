//! Post-hoc validation of designed gates: passband truncation, parallel
//! operation, and the dimension-scaling study.

use ndarray::{s, Array2, Axis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::problem::{DesignProblem, Merit, StartDistribution};
use super::search::{optimize_with, DesignResult};
use crate::cascade::compose_cascade;
use crate::error::{invalid, Result};
use crate::lattice::ModeLattice;
use crate::matrix::round_sig;
use crate::metrics::{fidelity_against, gate_metrics, success_probability};
use crate::par::Exec;
use crate::shaper::ShaperPattern;
use crate::target::GateTarget;

/// Whether `a` and `b` agree to `digits` significant digits, i.e. differ by at
/// most half a unit in the last kept digit of the larger magnitude.
pub fn agrees_to_digits(a: f64, b: f64, digits: u32) -> bool {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        return true;
    }
    let exponent = scale.log10().floor() as i32;
    (a - b).abs() <= 0.5 * 10f64.powi(exponent + 1 - digits as i32)
}

/// `(F, P)` with the shaper blocking every mode outside a `kept_modes`-wide
/// band centered on the computational window.
pub fn passband_truncation_check(result: &DesignResult, kept_modes: usize) -> Result<(f64, f64)> {
    let problem = result.problem.to_problem()?;
    let lattice = problem.lattice;
    if kept_modes < lattice.dim() {
        return Err(invalid(format!("{kept_modes} kept modes cannot hold the {}-mode window", lattice.dim())));
    }
    if kept_modes > lattice.mode_count() {
        return Err(invalid(format!("{kept_modes} kept modes exceed the {}-mode lattice", lattice.mode_count())));
    }
    let (first, shaper, second) = result.parameters.components(&problem)?;
    let shaper = shaper.passband(lattice.centered_band(kept_modes));
    let v = compose_cascade(&first, &shaper, &second, &lattice)?;
    gate_metrics(&v.truncate(), &problem.target)
}

/// Collective `(F, P)` of two copies of the designed gate run in parallel,
/// with `separation` initially empty modes between the windows.
///
/// Both gates share the modulators; each shaper mode takes its phase from the
/// copy whose window is nearer. The `2d×2d` block on the two windows is scored
/// against the block-diagonal target `U ⊕ U`.
pub fn parallel_gate_metrics(result: &DesignResult, separation: usize) -> Result<(f64, f64)> {
    let problem = result.problem.to_problem()?;
    let lattice = problem.lattice;
    let (m, d) = (lattice.mode_count(), lattice.dim());
    let span = 2 * d + separation;
    if span + problem.shaper_window > m {
        return Err(invalid(format!("{m} modes cannot hold two windows {separation} modes apart")));
    }
    let first_start = (m - span) / 2;
    let second_start = first_start + d + separation;

    let (first, shaper, second) = result.parameters.components(&problem)?;
    let place = |start: usize| shaper.shifted((start + m - lattice.offset()) % m);
    let (low, high) = (place(first_start), place(second_start));
    // twice the midpoint between the last mode of the low gate and the first of the high gate
    let split2 = first_start + d - 1 + second_start;
    let phases = (0..m).map(|n| if 2 * n <= split2 { low.phases()[n] } else { high.phases()[n] }).collect();
    let combined = ShaperPattern::from_phases(phases);

    let v = compose_cascade(&first, &combined, &second, &lattice)?;
    let modes: Vec<usize> = (first_start..first_start + d).chain(second_start..second_start + d).collect();
    let block = v.entries().select(Axis(0), &modes).select(Axis(1), &modes);
    let target = block_diagonal(problem.target.matrix());
    Ok((fidelity_against(&block, &target)?, success_probability(&block)))
}

fn block_diagonal(u: &Array2<Complex64>) -> Array2<Complex64> {
    let d = u.nrows();
    let mut out = Array2::zeros((2 * d, 2 * d));
    out.slice_mut(s![..d, ..d]).assign(u);
    out.slice_mut(s![d.., d..]).assign(u);
    out
}

/// Search settings shared by every row of the scaling study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingOptions {
    pub mode_count: usize,
    pub shaper_window: usize,
    /// Relaxed floor: the study maximizes `F·P` subject to `F ≥ floor`.
    pub fidelity_floor: f64,
    pub restarts: usize,
    pub iteration_budget: usize,
    pub master_seed: u64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            mode_count: 128,
            shaper_window: 32,
            fidelity_floor: 0.99,
            restarts: 200,
            iteration_budget: 4000,
            master_seed: 0,
        }
    }
}

/// The design problem for the `d`-point DFT with `d−1` harmonics per modulator,
/// started from [`StartDistribution::Decaying`] amplitudes.
pub fn scaling_problem(d: usize, options: &ScalingOptions) -> Result<DesignProblem> {
    let problem = DesignProblem {
        target: GateTarget::dft(d)?,
        lattice: ModeLattice::centered(options.mode_count, d)?,
        harmonics: d - 1,
        fidelity_floor: options.fidelity_floor,
        shaper_window: options.shaper_window,
        restarts: options.restarts,
        iteration_budget: options.iteration_budget,
        master_seed: options.master_seed,
        merit: Merit::FidelityTimesSuccess,
        start: StartDistribution::Decaying,
    };
    problem.validate()?;
    Ok(problem)
}

/// Designs the `d`-point DFT for `d = 2..=d_max`.
pub fn scaling_study(d_max: usize, options: &ScalingOptions, exec: Exec) -> Result<Vec<DesignResult>> {
    if !(2..=7).contains(&d_max) {
        return Err(invalid(format!("scaling study covers 2 ≤ d ≤ 7, got d_max = {d_max}")));
    }
    (2..=d_max).map(|d| optimize_with(&scaling_problem(d, options)?, exec)).collect()
}

/// One line of the scaling table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub d: usize,
    pub harmonics: usize,
    pub fidelity: f64,
    pub success_probability: f64,
    pub product: f64,
    pub converged: bool,
}

impl ScalingRow {
    pub const CSV_HEADER: &'static str = "d,p,fidelity,success_probability,product,converged";

    pub fn from_result(result: &DesignResult) -> Self {
        Self {
            d: result.problem.lattice.dim(),
            harmonics: result.problem.harmonics,
            fidelity: result.fidelity,
            success_probability: result.success_probability,
            product: result.fidelity * result.success_probability,
            converged: result.converged,
        }
    }

    /// Comma-separated values with 9 significant digits.
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.d,
            self.harmonics,
            round_sig(self.fidelity, 9),
            round_sig(self.success_probability, 9),
            round_sig(self.product, 9),
            self.converged
        )
    }
}
