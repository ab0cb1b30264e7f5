//! Sierpinski-type Moran measures: exact zero structure of mask
//! polynomials, Hadamard-triple spectra, orthogonality and completeness
//! checks, and the divisibility criteria that decide spectrality.

pub mod analyzer;
pub mod decider;
pub mod error;
pub mod exact;
pub mod mask;
pub mod pairs;
pub mod render;
pub mod report;
pub mod spec_file;
pub mod spectrum;
pub mod system;

pub use error::{Error, Result};
