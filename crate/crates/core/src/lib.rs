//! Synchronous NPA hierarchy toolkit.
//!
//! Canonicalizes words over projections ([`words`]), builds and validates
//! moment-matrix certificates ([`certificate`]), searches for certificates by
//! alternating projections ([`solver`]), detects rank loops across levels
//! ([`hierarchy`]), and runs the matricially-spanning test ([`spanning`]) used
//! for SIC-POVM and MUB existence questions ([`applications`]).

pub mod applications;
pub mod certificate;
pub mod cli;
pub mod error;
pub mod hierarchy;
pub mod linalg;
pub mod solver;
pub mod spanning;
pub mod words;

pub use certificate::{Certificate, ClassTable, Correlation, Mode, ValidationReport, ValidationTolerances};
pub use error::{Error, Result};
pub use words::{CanonicalClass, Symmetry, Word};
