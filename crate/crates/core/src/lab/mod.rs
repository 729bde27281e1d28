//! A virtual characterization bench: coherent-state probing of a hidden
//! multiport through a lossy, noisy spectrum analyzer, reconstruction of its
//! window block, and Monte Carlo photon counting.

mod apparatus;
mod counting;
mod reconstruct;

pub use apparatus::{acquisition_rng, embed_block, ProbeState, Spectrum, VirtualApparatus};
pub use counting::{
    fit_series, photon_counting_scan, visibility, CountTrace, CountingSettings, Detector, Superposition,
    DEFAULT_COUNTING_SAMPLES,
};
pub use reconstruct::{
    fit_fringe, gauge_fixed, phase_grid, phase_scan, reconstruct, reconstruct_amplitudes, FringeFit, FringeTrace,
    ReconstructedMultiport, DEFAULT_SCAN_SAMPLES, GAUGE,
};
