//! Scenario pipelines: each fills a bundle with its documents and CSV tables.

use std::f64::consts::PI;

use freqgate::cascade::drive_coefficients;
use freqgate::lab::{
    embed_block, phase_scan, photon_counting_scan, reconstruct, ProbeState, Superposition, VirtualApparatus,
};
use freqgate::matrix::round_sig;
use freqgate::optimize::{
    optimize_with, parallel_gate_metrics, scaling_study, single_eom_search, DesignResult, ScalingRow, SingleEomResult,
};
use freqgate::par::Exec;
use freqgate::{
    compose_cascade, gate_metrics, scatter_bound, single_eom_ceiling, FourierDrive, GateTarget, TransferMatrix,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundle::BundleBuilder;
use crate::config::{ScenarioConfig, ScenarioKind, TruthSpec};
use crate::error::CliError;

/// Significant digits kept in CSV files.
pub const CSV_DIGITS: usize = 9;

/// Modes on either side of the window included in exported spectra.
const SPECTRUM_MARGIN: usize = 8;

pub struct Outcome {
    pub files: BundleBuilder,
    /// Whether every optimization in the run met its fidelity floor.
    pub converged: Option<bool>,
}

fn num(x: f64) -> f64 {
    round_sig(x, CSV_DIGITS)
}

pub fn run(config: &ScenarioConfig, exec: Exec) -> Result<Outcome, CliError> {
    config.validate()?;
    match config.scenario {
        ScenarioKind::Design => design(config, exec),
        ScenarioKind::Characterize => characterize(config, exec),
        ScenarioKind::GuardbandSweep => guardband(config, exec),
        ScenarioKind::Visibility => visibility(config, exec),
        ScenarioKind::Scaling => scaling(config, exec),
        ScenarioKind::BoundCheck => bound_check(config, exec),
        ScenarioKind::BesselCheck => bessel_check(config),
    }
}

/// Output spectra of every single-mode input around the window, as
/// `input,mode,relative_mode,power`.
pub fn spectra_csv(truth: &TransferMatrix) -> String {
    let lattice = truth.lattice();
    let (m, offset, d) = (lattice.mode_count(), lattice.offset(), lattice.dim());
    let lo = offset.saturating_sub(SPECTRUM_MARGIN);
    let hi = (offset + d + SPECTRUM_MARGIN).min(m);
    let mut out = String::from("input,mode,relative_mode,power\n");
    for n in 0..d {
        for r in lo..hi {
            let p = truth.entries()[[r, offset + n]].norm_sqr();
            out.push_str(&format!("{n},{r},{},{}\n", r as i64 - offset as i64, num(p)));
        }
    }
    out
}

fn design_cascade(result: &DesignResult) -> Result<TransferMatrix, CliError> {
    let problem = result.problem.to_problem()?;
    let (d1, shaper, d2) = result.parameters.components(&problem)?;
    Ok(compose_cascade(&d1, &shaper, &d2, &problem.lattice)?)
}

fn add_design(files: &mut BundleBuilder, result: &DesignResult) -> Result<TransferMatrix, CliError> {
    files.add_json("design_result.json", result);
    let mut csv = String::from("restart,objective,fidelity,success_probability,iterations,evaluations\n");
    for s in &result.restarts {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.index,
            num(s.objective),
            num(s.fidelity),
            num(s.success_probability),
            s.iterations,
            s.evaluations
        ));
    }
    files.add_text("restarts.csv", csv);
    let truth = design_cascade(result)?;
    files.add_json("window_matrix.json", &freqgate::MatrixDocument::from_matrix(&truth.truncate()));
    files.add_text("spectra.csv", spectra_csv(&truth));
    Ok(truth)
}

fn design(config: &ScenarioConfig, exec: Exec) -> Result<Outcome, CliError> {
    let result = optimize_with(&config.design_problem()?, exec)?;
    let mut files = BundleBuilder::default();
    add_design(&mut files, &result)?;
    Ok(Outcome { files, converged: Some(result.converged) })
}

/// The hidden matrix for lab scenarios, plus whether a design run converged.
fn truth(
    config: &ScenarioConfig,
    target: &GateTarget,
    files: &mut BundleBuilder,
    exec: Exec,
) -> Result<(TransferMatrix, Option<bool>), CliError> {
    let lattice = config.lattice.build(target.dim())?;
    match &config.apparatus.truth {
        TruthSpec::Design => {
            let result = optimize_with(&config.design_problem()?, exec)?;
            let t = add_design(files, &result)?;
            Ok((t, Some(result.converged)))
        }
        TruthSpec::Target => Ok((embed_block(target.matrix(), &lattice)?, None)),
        TruthSpec::Matrix { matrix } => Ok((embed_block(&matrix.to_matrix()?, &lattice)?, None)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub fidelity: f64,
    pub success_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub std_dev: f64,
}

impl Statistic {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Self { mean, std_dev: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationReport {
    pub target: String,
    pub insertion_loss: f64,
    pub osa_noise_sigma: f64,
    pub scan_samples: usize,
    /// Metrics of the hidden matrix's window block, for comparison.
    pub truth_fidelity: f64,
    pub truth_success_probability: f64,
    pub runs: Vec<RunMetrics>,
    pub fidelity: Statistic,
    pub success_probability: Statistic,
    /// Reconstruction from the first run.
    pub matrix: freqgate::MatrixDocument,
}

fn characterize(config: &ScenarioConfig, exec: Exec) -> Result<Outcome, CliError> {
    let target = config.target.build()?;
    let mut files = BundleBuilder::default();
    let (truth, converged) = truth(config, &target, &mut files, exec)?;
    let a = &config.apparatus;
    let (truth_fidelity, truth_success_probability) = gate_metrics(&truth.truncate(), &target)?;
    let base = VirtualApparatus::new(truth, a.insertion_loss, a.osa_noise_sigma, a.seed)?;

    let mut runs = Vec::with_capacity(a.repeats);
    let mut first = None;
    for r in 0..a.repeats as u64 {
        let app = base.reseeded(a.seed + r);
        let rec = reconstruct(&app, &target, a.scan_samples)?;
        runs.push(RunMetrics {
            seed: a.seed + r,
            fidelity: rec.fidelity,
            success_probability: rec.success_probability,
        });
        first.get_or_insert(rec);
    }
    let first = first.expect("at least one repeat");

    // the first run's raw data: single-mode spectra and the phase scans behind it
    let d = target.dim();
    let lattice = *base.lattice();
    let mut spectra = String::from("input,mode,power\n");
    for n in 0..d {
        let s = base.measure_spectrum(&ProbeState::single_mode(d, n, 1.0)?, n as u64)?;
        for (m, p) in s.powers().iter().enumerate() {
            spectra.push_str(&format!("{n},{m},{}\n", num(*p)));
        }
    }
    let mut fringes = String::from("pair,phi,mode,power\n");
    for n in 1..d {
        let trace = phase_scan(&base, n, a.scan_samples, 1.0, (d + (n - 1) * a.scan_samples) as u64)?;
        for m in 0..d {
            for (phi, y) in trace.phi().iter().zip(trace.trace(m)) {
                fringes.push_str(&format!("{n},{},{},{}\n", num(*phi), lattice.offset() + m, num(*y)));
            }
        }
    }
    files.add_text("osa_spectra.csv", spectra);
    files.add_text("fringes.csv", fringes);

    let fs: Vec<f64> = runs.iter().map(|r| r.fidelity).collect();
    let ps: Vec<f64> = runs.iter().map(|r| r.success_probability).collect();
    files.add_json(
        "characterization.json",
        &CharacterizationReport {
            target: target.label(),
            insertion_loss: a.insertion_loss,
            osa_noise_sigma: a.osa_noise_sigma,
            scan_samples: a.scan_samples,
            truth_fidelity,
            truth_success_probability,
            fidelity: Statistic::of(&fs),
            success_probability: Statistic::of(&ps),
            runs,
            matrix: first.to_document(),
        },
    );
    Ok(Outcome { files, converged })
}

fn guardband(config: &ScenarioConfig, exec: Exec) -> Result<Outcome, CliError> {
    let result = optimize_with(&config.design_problem()?, exec)?;
    let mut files = BundleBuilder::default();
    add_design(&mut files, &result)?;
    let mut csv = String::from("separation,fidelity,success_probability\n");
    for &sep in &config.guardband.separations {
        let (f, p) = parallel_gate_metrics(&result, sep)?;
        csv.push_str(&format!("{sep},{},{}\n", num(f), num(p)));
    }
    files.add_text("guardband.csv", csv);
    Ok(Outcome { files, converged: Some(result.converged) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityReport {
    pub target: String,
    pub input: Superposition,
    pub harmonics: usize,
    pub insertion_loss: f64,
    pub seeds: Vec<u64>,
    /// `visibilities[run][mode]`.
    pub visibilities: Vec<Vec<f64>>,
    pub lowest: f64,
    /// Mean dark-subtracted signal rate over the fringe, counts/s, first run.
    pub mean_signal_rate: Vec<f64>,
}

fn visibility(config: &ScenarioConfig, exec: Exec) -> Result<Outcome, CliError> {
    let target = config.target.build()?;
    let mut files = BundleBuilder::default();
    let (truth, converged) = truth(config, &target, &mut files, exec)?;
    let d = target.dim();
    let a = &config.apparatus;
    let settings = config.detector.settings();
    let input = config.detector.input_for(d);
    let harmonics = input.harmonics(d);
    let base = VirtualApparatus::new(truth, a.insertion_loss, 0.0, a.seed)?;

    let seeds: Vec<u64> = (0..a.repeats as u64).map(|r| a.seed + r).collect();
    let mut visibilities = Vec::with_capacity(seeds.len());
    let mut csv = String::from("seed,mode,visibility\n");
    let mut mean_signal_rate = Vec::new();
    for (i, &seed) in seeds.iter().enumerate() {
        let trace = photon_counting_scan(&base.reseeded(seed), input, &settings, exec)?;
        let v = trace.visibilities(harmonics)?;
        for (m, x) in v.iter().enumerate() {
            csv.push_str(&format!("{seed},{m},{}\n", num(*x)));
        }
        if i == 0 {
            files.add_text("counts.csv", trace.to_csv());
            let mut means = String::from("phi,mode,mean,std_dev,expected\n");
            for m in 0..d {
                for k in 0..trace.phi.len() {
                    means.push_str(&format!(
                        "{},{m},{},{},{}\n",
                        num(trace.phi[k]),
                        num(trace.mean[m][k]),
                        num(trace.std_dev[m][k]),
                        num(trace.expected[m][k])
                    ));
                }
            }
            files.add_text("fringe_means.csv", means);
            mean_signal_rate =
                trace.mean.iter().map(|t| t.iter().sum::<f64>() / t.len() as f64 / settings.dwell_seconds).collect();
        }
        visibilities.push(v);
    }
    files.add_text("visibility.csv", csv);
    let lowest = visibilities.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    files.add_json(
        "visibility.json",
        &VisibilityReport {
            target: target.label(),
            input,
            harmonics,
            insertion_loss: a.insertion_loss,
            seeds,
            visibilities,
            lowest,
            mean_signal_rate,
        },
    );
    Ok(Outcome { files, converged })
}

fn scaling(config: &ScenarioConfig, exec: Exec) -> Result<Outcome, CliError> {
    let results = scaling_study(config.scaling.d_max, &config.scaling_options(), exec)?;
    let mut files = BundleBuilder::default();
    let rows: Vec<ScalingRow> = results.iter().map(ScalingRow::from_result).collect();
    let mut csv = format!("{}\n", ScalingRow::CSV_HEADER);
    for r in &rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    files.add_text("scaling.csv", csv);
    files.add_json("scaling.json", &rows);
    files.add_json("scaling_results.json", &results);
    Ok(Outcome { files, converged: Some(results.iter().all(|r| r.converged)) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub d: usize,
    pub scatter_bound: f64,
    pub ceiling: f64,
    pub best_balanced_success: f64,
    pub best_harmonics: usize,
}

fn bound_check(config: &ScenarioConfig, exec: Exec) -> Result<Outcome, CliError> {
    let mut rows: Vec<BoundRow> = Vec::new();
    let mut searches: Vec<SingleEomResult> = Vec::new();
    for problem in config.bound_problems()? {
        let r = single_eom_search(&problem, exec)?;
        match rows.iter_mut().find(|row| row.d == problem.dim) {
            Some(row) if r.balanced_success > row.best_balanced_success => {
                row.best_balanced_success = r.balanced_success;
                row.best_harmonics = problem.harmonics;
            }
            Some(_) => {}
            None => rows.push(BoundRow {
                d: problem.dim,
                scatter_bound: scatter_bound(problem.dim)?,
                ceiling: single_eom_ceiling(problem.dim)?,
                best_balanced_success: r.balanced_success,
                best_harmonics: problem.harmonics,
            }),
        }
        searches.push(r);
    }
    let mut csv = String::from("d,scatter_bound,ceiling,best_single_eom_p,harmonics\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.d,
            num(r.scatter_bound),
            num(r.ceiling),
            num(r.best_balanced_success),
            r.best_harmonics
        ));
    }
    let mut files = BundleBuilder::default();
    files.add_text("bound.csv", csv);
    files.add_json("bound.json", &rows);
    files.add_json("single_eom_searches.json", &searches);
    Ok(Outcome { files, converged: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesselSummary {
    pub mode_count: usize,
    pub quadrature_samples: usize,
    pub max_abs_difference: f64,
}

/// `(1/N)Σ_j e^{iβ sin t_j} e^{−i n t_j}` on `N` uniform points.
fn quadrature(beta: f64, n: i64, samples: usize) -> Complex64 {
    (0..samples)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / samples as f64;
            Complex64::from_polar(1.0, beta * t.sin() - n as f64 * t)
        })
        .sum::<Complex64>()
        / samples as f64
}

fn bessel_check(config: &ScenarioConfig) -> Result<Outcome, CliError> {
    let b = &config.bessel;
    let m = config.lattice.mode_count;
    let order = b.max_order as i64;
    let mut csv = String::from("beta,order,re,im,quadrature_re,quadrature_im,abs_difference\n");
    let mut worst = 0.0f64;
    for &beta in &b.betas {
        let c = drive_coefficients(&FourierDrive::single_tone(beta, 0.0)?, m)?;
        for n in -order..=order {
            let z = c[n.rem_euclid(m as i64) as usize];
            let q = quadrature(beta, n, b.quadrature_samples);
            let diff = (z - q).norm();
            worst = worst.max(diff);
            csv.push_str(&format!(
                "{},{n},{},{},{},{},{}\n",
                num(beta),
                num(z.re),
                num(z.im),
                num(q.re),
                num(q.im),
                num(diff)
            ));
        }
    }
    let mut files = BundleBuilder::default();
    files.add_text("bessel.csv", csv);
    files.add_json(
        "bessel.json",
        &BesselSummary { mode_count: m, quadrature_samples: b.quadrature_samples, max_abs_difference: worst },
    );
    Ok(Outcome { files, converged: None })
}
