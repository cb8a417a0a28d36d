//! Boundary strata of spaces of twisted k-differentials, their weighted class
//! decomposition, local double-ramification invariants, toric chart equations
//! and genus-0 k-residues. All arithmetic is exact.

pub mod archive;
pub mod drl;
pub mod error;
pub mod graph;
pub mod interval;
pub mod iso;
pub mod laurent;
pub mod rational;
pub mod residue;
pub mod series;
pub mod strata;
pub mod sweep;
pub mod toric;
pub mod twist;

pub use error::{DrcError, Result};
