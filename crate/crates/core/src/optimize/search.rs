//! Multi-start constrained search over shaper phases and drive harmonics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::engine::Evaluator;
use super::lbfgs::{self, LbfgsOptions};
use super::problem::{DesignProblem, Merit, ParameterVector, StartDistribution, PENALTY_WEIGHT};
use crate::cascade::compose_cascade;
use crate::drive::FourierDrive;
use crate::error::{invalid, Result};
use crate::lattice::ModeLattice;
use crate::matrix::MatrixDocument;
use crate::metrics::gate_metrics;
use crate::par::{map_indexed, Exec};
use crate::target::{GateTarget, TargetKind};

/// The local searches aim this far above the floor so the returned point is
/// feasible after the multiplier iteration settles.
const FLOOR_MARGIN: f64 = 1e-8;
const MAX_OUTER: usize = 20;

/// `−merit + λ·max(0, floor − F)²` with `λ = 10⁴`.
pub fn objective(params: &ParameterVector, problem: &DesignProblem) -> Result<f64> {
    problem.validate()?;
    if params.len() != problem.parameter_count()
        || params.shaper_window() != problem.shaper_window
        || params.harmonics() != problem.harmonics
    {
        return Err(invalid(format!(
            "parameter vector has {} entries, problem expects {}",
            params.len(),
            problem.parameter_count()
        )));
    }
    let m = Evaluator::new(problem).metrics(params.values());
    Ok(penalized(problem, m.success, m.fidelity))
}

fn penalized(problem: &DesignProblem, success: f64, fidelity: f64) -> f64 {
    let (base, _, _) = problem.merit.negated(success, fidelity);
    let gap = (problem.fidelity_floor - fidelity).max(0.0);
    base + PENALTY_WEIGHT * gap * gap
}

/// Serializable snapshot of a [`DesignProblem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub target: TargetKind,
    pub target_matrix: MatrixDocument,
    pub lattice: ModeLattice,
    pub harmonics: usize,
    pub fidelity_floor: f64,
    pub shaper_window: usize,
    pub shaper_start: usize,
    pub restarts: usize,
    pub iteration_budget: usize,
    pub master_seed: u64,
    pub merit: Merit,
    #[serde(default)]
    pub start: StartDistribution,
}

impl ProblemRecord {
    pub fn from_problem(p: &DesignProblem) -> Self {
        Self {
            target: p.target.kind().clone(),
            target_matrix: MatrixDocument::from_matrix(p.target.matrix()),
            lattice: p.lattice,
            harmonics: p.harmonics,
            fidelity_floor: p.fidelity_floor,
            shaper_window: p.shaper_window,
            shaper_start: p.shaper_band().start,
            restarts: p.restarts,
            iteration_budget: p.iteration_budget,
            master_seed: p.master_seed,
            merit: p.merit,
            start: p.start,
        }
    }

    pub fn to_problem(&self) -> Result<DesignProblem> {
        let target = match &self.target {
            TargetKind::Hadamard => GateTarget::hadamard(),
            TargetKind::Dft(d) => GateTarget::dft(*d)?,
            TargetKind::Custom(label) => GateTarget::custom(label.clone(), self.target_matrix.to_matrix()?)?,
        };
        let p = DesignProblem {
            target,
            lattice: self.lattice,
            harmonics: self.harmonics,
            fidelity_floor: self.fidelity_floor,
            shaper_window: self.shaper_window,
            restarts: self.restarts,
            iteration_budget: self.iteration_budget,
            master_seed: self.master_seed,
            merit: self.merit,
            start: self.start,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub objective: f64,
    pub fidelity: f64,
    pub success_probability: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AliasingReport {
    pub mode_count: usize,
    pub fidelity: f64,
    pub success_probability: f64,
    pub delta_fidelity: f64,
    pub delta_success: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub problem: ProblemRecord,
    pub parameters: ParameterVector,
    pub first_drive: FourierDrive,
    pub second_drive: FourierDrive,
    pub fidelity: f64,
    pub success_probability: f64,
    pub objective: f64,
    /// Whether the winner meets the fidelity floor.
    pub converged: bool,
    pub winner: usize,
    pub restarts: Vec<RestartSummary>,
    pub aliasing: AliasingReport,
}

impl DesignResult {
    /// F and P of the stored parameters, recomputed from the full cascade.
    pub fn recompute(&self) -> Result<(f64, f64)> {
        let problem = self.problem.to_problem()?;
        evaluate_parameters(&self.parameters, &problem)
    }
}

/// F and P of `params` on `problem`'s lattice via [`compose_cascade`].
pub fn evaluate_parameters(params: &ParameterVector, problem: &DesignProblem) -> Result<(f64, f64)> {
    let (d1, shaper, d2) = params.components(problem)?;
    let v = compose_cascade(&d1, &shaper, &d2, &problem.lattice)?;
    gate_metrics(&v.truncate(), &problem.target)
}

/// The same solution on a lattice `factor` times larger.
pub fn aliasing_check(params: &ParameterVector, problem: &DesignProblem, factor: usize) -> Result<AliasingReport> {
    let (f0, p0) = evaluate_parameters(params, problem)?;
    let big = problem.lattice.scaled(factor)?;
    let shift = big.offset() - problem.lattice.offset();
    let shaper = params.shaper(big.mode_count(), problem.shaper_band().start + shift)?;
    let v = compose_cascade(&params.first_drive(), &shaper, &params.second_drive(), &big)?;
    let (f1, p1) = gate_metrics(&v.truncate(), &problem.target)?;
    Ok(AliasingReport {
        mode_count: big.mode_count(),
        fidelity: f1,
        success_probability: p1,
        delta_fidelity: f1 - f0,
        delta_success: p1 - p0,
    })
}

struct RestartOutcome {
    params: ParameterVector,
    summary: RestartSummary,
}

/// The RNG stream for one restart.
pub fn restart_rng(master_seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(restart as u64);
    rng
}

/// One local search: augmented-Lagrangian outer loop around L-BFGS.
fn run_restart(problem: &DesignProblem, evaluator: &Evaluator, index: usize) -> RestartOutcome {
    let mut rng = restart_rng(problem.master_seed, index);
    let start = problem.random_start(&mut rng);
    let mut x = start.values().to_vec();
    let floor = (problem.fidelity_floor + FLOOR_MARGIN).min(1.0);
    let merit = problem.merit;

    let mut multiplier = 0.0;
    let mut weight = 2.0 * PENALTY_WEIGHT;
    let mut iterations = 0;
    let mut evaluations = 0;
    let mut last_violation = f64::INFINITY;
    let per_outer = (problem.iteration_budget / 6).max(100);
    for outer in 0..MAX_OUTER {
        let remaining = problem.iteration_budget.saturating_sub(iterations);
        if remaining == 0 {
            break;
        }
        let opts = LbfgsOptions {
            max_iterations: remaining.min(per_outer),
            gradient_tolerance: (1e-5 * 0.1f64.powi(outer as i32)).max(1e-10),
            ..LbfgsOptions::default()
        };
        let (mu, rho) = (multiplier, weight);
        let out = lbfgs::minimize(
            |x, g| {
                evaluator
                    .value_and_gradient(x, g, |p, f| {
                        let (base, dp, df) = merit.negated(p, f);
                        let shifted = (mu + rho * (floor - f)).max(0.0);
                        (base + (shifted * shifted - mu * mu) / (2.0 * rho), dp, df - shifted)
                    })
                    .0
            },
            &x,
            &opts,
        );
        iterations += out.iterations;
        evaluations += out.evaluations;
        x = out.x;
        let violation = floor - evaluator.metrics(&x).fidelity;
        let next = (multiplier + weight * violation).max(0.0);
        let settled = (next - multiplier).abs() <= 1e-9 * multiplier.max(1.0);
        multiplier = next;
        if violation <= 0.0 && settled && out.converged {
            break;
        }
        if violation > 0.0 && violation > 0.25 * last_violation {
            weight *= 10.0;
        }
        last_violation = violation.max(0.0);
    }

    let params = ParameterVector::for_problem(x, problem).expect("layout fixed by problem").normalized();
    let m = evaluator.metrics(params.values());
    RestartOutcome {
        summary: RestartSummary {
            index,
            objective: penalized(problem, m.success, m.fidelity),
            fidelity: m.fidelity,
            success_probability: m.success,
            iterations,
            evaluations,
        },
        params,
    }
}

/// Runs all restarts on the default executor.
pub fn optimize(problem: &DesignProblem) -> Result<DesignResult> {
    optimize_with(problem, Exec::default())
}

pub fn optimize_with(problem: &DesignProblem, exec: Exec) -> Result<DesignResult> {
    problem.validate()?;
    let evaluator = Evaluator::new(problem);
    let outcomes = map_indexed(problem.restarts, exec, |i| run_restart(problem, &evaluator, i));

    // lowest objective wins; the earlier restart wins exact ties
    let winner = outcomes.iter().enumerate().fold(0, |best, (i, o)| {
        if o.summary.objective < outcomes[best].summary.objective {
            i
        } else {
            best
        }
    });
    let best = &outcomes[winner];
    let (fidelity, success) = evaluate_parameters(&best.params, problem)?;
    let aliasing = aliasing_check(&best.params, problem, 2)?;
    Ok(DesignResult {
        problem: ProblemRecord::from_problem(problem),
        first_drive: best.params.first_drive(),
        second_drive: best.params.second_drive(),
        parameters: best.params.clone(),
        fidelity,
        success_probability: success,
        objective: best.summary.objective,
        converged: fidelity >= problem.fidelity_floor,
        winner,
        restarts: outcomes.into_iter().map(|o| o.summary).collect(),
        aliasing,
    })
}
