//! High-gain parametric down-conversion in linearly chirped quasi-phase-matched
//! crystals: exact Bogoliubov transfer coefficients from parabolic cylinder
//! functions, the spectra and squeezing they imply, and a second-harmonic
//! correlator that reads out the squeezing bandwidth.

pub mod dispersion;
pub mod error;
pub mod oracle;
pub mod pdc;
pub mod phase;
pub mod report;
pub mod scenario;
pub mod shg;
pub mod specfun;
pub mod validate;

pub use error::{Error, Result};
