//! Ptychographic phase retrieval from locally supported measurements.
//!
//! The pipeline lifts the quadratic measurements to a linear map on banded
//! Hermitian matrices, inverts that map through its block-diagonal SVD with
//! an optional truncation threshold, restores Fourier coefficients lost to
//! small singular values by subspace completion, and finishes with angular
//! synchronization.
//!
//! ```
//! use ptychosc::{build_masks, forward_measure, random_signal, relative_error};
//! use ptychosc::{run_blockpr_sc, BlockSvd, MagnitudeMode, WindowSpec};
//!
//! let window = WindowSpec::gaussian(16, 4, 0.3).unwrap();
//! let x0 = random_signal(16, 1);
//! let y = forward_measure(x0.as_slice(), &build_masks(&window)).unwrap();
//! let svd = BlockSvd::new(&window, 0.0).unwrap();
//! let rec = run_blockpr_sc(&y, &svd, MagnitudeMode::Block).unwrap();
//! assert!(rec.complete);
//! assert!(relative_error(&rec.signal, &x0).unwrap() < 1e-8);
//! ```

pub mod banded;
pub mod completion;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod masks;
pub mod signal;
pub mod spectral;
pub mod sync;

pub use num_complex::Complex64;

pub use banded::{BandShape, BandedHermitian, DiagonalSet, VecIndex};
pub use completion::{complete, extract_known_coefficients, CompletionOutcome, CompletionProblem};
pub use error::{Error, Result};
pub use experiments::{
    random_signal, relative_error, run_blockpr, run_blockpr_sc, run_sweep, run_wirtinger_flow, Algorithm,
    ExperimentConfig, Reconstruction, SweepResult, WirtingerConfig,
};
pub use fourier::{dft, idft, Dft};
pub use masks::{add_noise, build_masks, forward_measure, MaskSet, MeasurementGrid, WindowKind, WindowSpec};
pub use signal::Signal;
pub use spectral::{singular_value_table, BlockSvd, LostIndexSet};
pub use sync::{assemble_signal, MagnitudeMode, PhaseMatrix};
