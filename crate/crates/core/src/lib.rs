//! Electro-optic frequency-bin gates: cascade modeling, drive optimization and
//! a simulated characterization lab.

// Validation writes `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascade;
pub mod drive;
mod error;
pub mod fourier;
pub mod lab;
pub mod lattice;
pub mod matrix;
pub mod metrics;
pub mod optimize;
pub mod par;
pub mod rf;
pub mod shaper;
pub mod target;

pub use cascade::{compose_cascade, eom_diagonal, shaper_diagonal, toeplitz_from_drive, Cascade};
pub use drive::{FourierDrive, Harmonic};
pub use error::{Error, Result};
pub use lattice::ModeLattice;
pub use matrix::{dft_matrix, MatrixDocument, TransferMatrix};
pub use metrics::{fidelity, gate_metrics, scatter_bound, single_eom_ceiling, success_probability};
pub use shaper::ShaperPattern;
pub use target::{GateTarget, TargetKind};
