//! Monte Carlo experiments on single-qubit Pauli tomography.

mod binning;
mod csv;
mod sampling;
mod scan;
mod sweep;

pub use binning::*;
pub use csv::*;
pub use sampling::*;
pub use scan::*;
pub use sweep::*;
