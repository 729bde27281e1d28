//! Declarative scenario files: one JSON document per run.

use std::path::PathBuf;

use clap::ValueEnum;
use freqgate::lab::{CountingSettings, Detector, Superposition};
use freqgate::optimize::{DesignProblem, Merit, ScalingOptions, SingleEomProblem, StartDistribution};
use freqgate::{GateTarget, MatrixDocument, ModeLattice};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Design,
    Characterize,
    GuardbandSweep,
    Visibility,
    Scaling,
    BoundCheck,
    BesselCheck,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Design => "design",
            ScenarioKind::Characterize => "characterize",
            ScenarioKind::GuardbandSweep => "guardband-sweep",
            ScenarioKind::Visibility => "visibility",
            ScenarioKind::Scaling => "scaling",
            ScenarioKind::BoundCheck => "bound-check",
            ScenarioKind::BesselCheck => "bessel-check",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    #[default]
    Hadamard,
    Dft {
        d: usize,
    },
    Custom {
        label: String,
        matrix: MatrixDocument,
    },
}

impl TargetSpec {
    pub fn build(&self) -> freqgate::Result<GateTarget> {
        match self {
            TargetSpec::Hadamard => Ok(GateTarget::hadamard()),
            TargetSpec::Dft { d } => GateTarget::dft(*d),
            TargetSpec::Custom { label, matrix } => GateTarget::custom(label.clone(), matrix.to_matrix()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    pub mode_count: usize,
    /// First window mode; centered when absent.
    pub window_offset: Option<usize>,
    pub spacing_ghz: f64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self { mode_count: 128, window_offset: None, spacing_ghz: 25.0 }
    }
}

impl LatticeSpec {
    pub fn build(&self, d: usize) -> freqgate::Result<ModeLattice> {
        let lattice = match self.window_offset {
            Some(offset) => ModeLattice::new(self.mode_count, d, offset)?,
            None => ModeLattice::centered(self.mode_count, d)?,
        };
        Ok(lattice.with_spacing(2.0 * std::f64::consts::PI * self.spacing_ghz * 1e9))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSpec {
    /// Harmonics per modulator; `max(1, d − 1)` when absent.
    pub harmonics: Option<usize>,
    pub fidelity_floor: f64,
    pub shaper_window: usize,
    pub restarts: usize,
    pub iteration_budget: usize,
    pub master_seed: u64,
    pub merit: Merit,
    pub start: StartDistribution,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        Self {
            harmonics: None,
            fidelity_floor: 0.9999,
            shaper_window: 32,
            restarts: 20,
            iteration_budget: 4000,
            master_seed: 0,
            merit: Merit::SuccessProbability,
            start: StartDistribution::Uniform,
        }
    }
}

/// Which matrix the virtual apparatus hides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TruthSpec {
    /// The cascade found by optimizing the configured target.
    #[default]
    Design,
    /// The ideal target on the window, identity elsewhere.
    Target,
    /// A measured window block; missing column norm counts as scattering.
    Matrix { matrix: MatrixDocument },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApparatusSpec {
    pub truth: TruthSpec,
    pub insertion_loss: f64,
    pub osa_noise_sigma: f64,
    pub seed: u64,
    /// Phase samples per characterization scan.
    pub scan_samples: usize,
    /// Independent reconstructions or counting runs, seeded `seed, seed + 1, …`.
    pub repeats: usize,
}

impl Default for ApparatusSpec {
    fn default() -> Self {
        Self {
            truth: TruthSpec::Design,
            insertion_loss: 0.0562,
            osa_noise_sigma: 0.0,
            seed: 0,
            scan_samples: freqgate::lab::DEFAULT_SCAN_SAMPLES,
            repeats: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSpec {
    pub mean_photons: f64,
    pub efficiency: f64,
    pub gate_rate_hz: f64,
    pub gate_duration_s: f64,
    pub dark_rate_hz: f64,
    pub dwell_seconds: f64,
    pub repeats: usize,
    pub samples: usize,
    /// Probe superposition; a `(0, 1)` pair for two modes and the phase ramp
    /// otherwise when absent.
    pub input: Option<Superposition>,
}

impl Default for DetectorSpec {
    fn default() -> Self {
        let s = CountingSettings::default();
        Self {
            mean_photons: s.mean_photons,
            efficiency: s.detector.efficiency,
            gate_rate_hz: s.detector.gate_rate,
            gate_duration_s: s.detector.gate_duration,
            dark_rate_hz: s.detector.dark_rate,
            dwell_seconds: s.dwell_seconds,
            repeats: s.repeats,
            samples: s.samples,
            input: None,
        }
    }
}

impl DetectorSpec {
    pub fn input_for(&self, d: usize) -> Superposition {
        self.input.unwrap_or(if d == 2 { Superposition::Pair(1) } else { Superposition::Ramp })
    }

    pub fn settings(&self) -> CountingSettings {
        CountingSettings {
            mean_photons: self.mean_photons,
            detector: Detector {
                efficiency: self.efficiency,
                gate_rate: self.gate_rate_hz,
                gate_duration: self.gate_duration_s,
                dark_rate: self.dark_rate_hz,
            },
            dwell_seconds: self.dwell_seconds,
            repeats: self.repeats,
            samples: self.samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuardbandSpec {
    pub separations: Vec<usize>,
}

impl Default for GuardbandSpec {
    fn default() -> Self {
        Self { separations: (0..=16).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSpec {
    pub d_max: usize,
    pub fidelity_floor: f64,
    pub restarts: usize,
    pub iteration_budget: usize,
}

impl Default for ScalingSpec {
    fn default() -> Self {
        let o = ScalingOptions::default();
        Self { d_max: 7, fidelity_floor: o.fidelity_floor, restarts: o.restarts, iteration_budget: o.iteration_budget }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundSpec {
    pub d_min: usize,
    pub d_max: usize,
    /// Harmonic counts tried for every dimension; the best result is kept.
    pub harmonics: Vec<usize>,
    pub restarts: usize,
    pub iteration_budget: usize,
}

impl Default for BoundSpec {
    fn default() -> Self {
        Self { d_min: 2, d_max: 5, harmonics: vec![1, 2, 4, 8], restarts: 12, iteration_budget: 3000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BesselSpec {
    pub betas: Vec<f64>,
    pub max_order: usize,
    pub quadrature_samples: usize,
}

impl Default for BesselSpec {
    fn default() -> Self {
        Self { betas: vec![0.25, 0.817, 1.4347, 2.405, 3.0], max_order: 8, quadrature_samples: 4096 }
    }
}

/// One scenario with every spec it may consult; unused specs are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub target: TargetSpec,
    #[serde(default)]
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub apparatus: ApparatusSpec,
    #[serde(default)]
    pub detector: DetectorSpec,
    #[serde(default)]
    pub guardband: GuardbandSpec,
    #[serde(default)]
    pub scaling: ScalingSpec,
    #[serde(default)]
    pub bound: BoundSpec,
    #[serde(default)]
    pub bessel: BesselSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        let mut config = Self {
            scenario,
            target: TargetSpec::default(),
            lattice: LatticeSpec::default(),
            optimizer: OptimizerSpec::default(),
            apparatus: ApparatusSpec::default(),
            detector: DetectorSpec::default(),
            guardband: GuardbandSpec::default(),
            scaling: ScalingSpec::default(),
            bound: BoundSpec::default(),
            bessel: BesselSpec::default(),
            output_dir: None,
        };
        if scenario == ScenarioKind::Visibility {
            config.apparatus.repeats = 10;
        }
        config
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("cannot parse scenario: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    /// `--seed` replaces both the optimizer and the apparatus seeds.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.optimizer.master_seed = seed;
        self.apparatus.seed = seed;
        self
    }

    /// The seed recorded in the manifest.
    pub fn seed(&self) -> u64 {
        match self.scenario {
            ScenarioKind::Characterize | ScenarioKind::Visibility => self.apparatus.seed,
            _ => self.optimizer.master_seed,
        }
    }

    pub fn design_problem(&self) -> freqgate::Result<DesignProblem> {
        let target = self.target.build()?;
        let d = target.dim();
        let o = &self.optimizer;
        let lattice = self.lattice.build(d)?;
        let problem = DesignProblem {
            harmonics: o.harmonics.unwrap_or(d.saturating_sub(1).max(1)),
            target,
            lattice,
            fidelity_floor: o.fidelity_floor,
            shaper_window: o.shaper_window,
            restarts: o.restarts,
            iteration_budget: o.iteration_budget,
            master_seed: o.master_seed,
            merit: o.merit,
            start: o.start,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn scaling_options(&self) -> ScalingOptions {
        ScalingOptions {
            mode_count: self.lattice.mode_count,
            shaper_window: self.optimizer.shaper_window,
            fidelity_floor: self.scaling.fidelity_floor,
            restarts: self.scaling.restarts,
            iteration_budget: self.scaling.iteration_budget,
            master_seed: self.optimizer.master_seed,
        }
    }

    pub fn bound_problems(&self) -> freqgate::Result<Vec<SingleEomProblem>> {
        let b = &self.bound;
        let mut out = Vec::new();
        for d in b.d_min..=b.d_max {
            for &p in &b.harmonics {
                let mut problem = SingleEomProblem::new(d, p)?;
                problem.mode_count = self.lattice.mode_count;
                problem.restarts = b.restarts;
                problem.iteration_budget = b.iteration_budget;
                problem.master_seed = self.optimizer.master_seed;
                problem.validate()?;
                out.push(problem);
            }
        }
        Ok(out)
    }

    /// Checks every spec the scenario consults before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: freqgate::Error| CliError::Config(e.to_string());
        let bad = |msg: String| Err(CliError::Config(msg));
        match self.scenario {
            ScenarioKind::Design | ScenarioKind::GuardbandSweep => {
                let problem = self.design_problem().map_err(cfg)?;
                if self.scenario == ScenarioKind::GuardbandSweep {
                    if self.guardband.separations.is_empty() {
                        return bad("guardband sweep needs at least one separation".into());
                    }
                    let widest = self.guardband.separations.iter().max().copied().unwrap_or(0);
                    if 2 * problem.target.dim() + widest + problem.shaper_window > problem.lattice.mode_count() {
                        return bad(format!("separation {widest} does not fit two gates on the lattice"));
                    }
                }
            }
            ScenarioKind::Characterize | ScenarioKind::Visibility => {
                let target = self.target.build().map_err(cfg)?;
                if let TruthSpec::Design = self.apparatus.truth {
                    self.design_problem().map_err(cfg)?;
                } else {
                    self.lattice.build(target.dim()).map_err(cfg)?;
                }
                if let TruthSpec::Matrix { matrix } = &self.apparatus.truth {
                    let m = matrix.to_matrix().map_err(cfg)?;
                    if m.dim() != (target.dim(), target.dim()) {
                        return bad(format!("truth matrix is {:?}, target is {}-dimensional", m.dim(), target.dim()));
                    }
                }
                let a = &self.apparatus;
                if !(a.insertion_loss > 0.0 && a.insertion_loss <= 1.0) || !(0.0..0.1).contains(&a.osa_noise_sigma) {
                    return bad("apparatus loss must lie in (0, 1] and noise in [0, 0.1)".into());
                }
                if a.repeats == 0 {
                    return bad("apparatus repeats must be positive".into());
                }
                if self.scenario == ScenarioKind::Characterize && a.scan_samples < 2 * target.dim() {
                    return bad(format!(
                        "{} scan samples cannot resolve a {}-mode fringe",
                        a.scan_samples,
                        target.dim()
                    ));
                }
                if self.scenario == ScenarioKind::Visibility {
                    self.detector.settings().validate().map_err(cfg)?;
                    let d = target.dim();
                    match self.detector.input_for(d) {
                        Superposition::Pair(n) if n == 0 || n >= d => {
                            return bad(format!("pair partner {n} outside 1..{d}"));
                        }
                        input if self.detector.samples < 2 * input.harmonics(d) + 2 => {
                            return bad(format!("{} phase samples cannot resolve the fringe", self.detector.samples));
                        }
                        _ => {}
                    }
                }
            }
            ScenarioKind::Scaling => {
                if !(2..=7).contains(&self.scaling.d_max) {
                    return bad(format!("scaling d_max {} outside 2..=7", self.scaling.d_max));
                }
                for d in 2..=self.scaling.d_max {
                    freqgate::optimize::scaling_problem(d, &self.scaling_options()).map_err(cfg)?;
                }
            }
            ScenarioKind::BoundCheck => {
                if self.bound.d_min < 2 || self.bound.d_min > self.bound.d_max || self.bound.harmonics.is_empty() {
                    return bad("bound check needs 2 ≤ d_min ≤ d_max and at least one harmonic count".into());
                }
                self.bound_problems().map_err(cfg)?;
            }
            ScenarioKind::BesselCheck => {
                let b = &self.bessel;
                if b.betas.is_empty() || b.betas.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return bad("bessel check needs finite, non-negative modulation indices".into());
                }
                if b.quadrature_samples < 2 * b.max_order + 2 || 2 * b.max_order + 2 > self.lattice.mode_count {
                    return bad("bessel check order exceeds the quadrature or lattice resolution".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_every_kind() {
        for kind in ScenarioKind::value_variants() {
            let mut c = ScenarioConfig::new(*kind);
            c.target = TargetSpec::Dft { d: 3 };
            c.apparatus.truth = TruthSpec::Target;
            c.output_dir = Some("out".into());
            assert_eq!(ScenarioConfig::parse(&c.to_json()).unwrap(), c);
            c.validate().unwrap();
        }
    }

    #[test]
    fn minimal_document_fills_defaults() {
        let c = ScenarioConfig::parse(r#"{"scenario": "design"}"#).unwrap();
        assert_eq!(c, ScenarioConfig::new(ScenarioKind::Design));
        let p = c.design_problem().unwrap();
        assert_eq!((p.harmonics, p.lattice.mode_count(), p.restarts), (1, 128, 20));
    }

    #[test]
    fn malformed_documents_are_config_errors() {
        for text in [
            "",
            "{",
            r#"{"scenario": "teleport"}"#,
            r#"{"scenario": "design", "lattice": {"modes": 64}}"#,
            r#"{"target": {"kind": "hadamard"}}"#,
        ] {
            assert!(matches!(ScenarioConfig::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn validation_catches_bad_specs() {
        let mut c = ScenarioConfig::new(ScenarioKind::Design);
        c.optimizer.fidelity_floor = 1.5;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::new(ScenarioKind::Scaling);
        c.scaling.d_max = 8;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::new(ScenarioKind::Characterize);
        c.apparatus.osa_noise_sigma = 0.2;
        assert!(c.validate().is_err());
    }

    #[test]
    fn seed_override_reaches_both_generators() {
        let c = ScenarioConfig::new(ScenarioKind::Visibility).with_seed(9);
        assert_eq!((c.optimizer.master_seed, c.apparatus.seed, c.seed()), (9, 9, 9));
    }
}
