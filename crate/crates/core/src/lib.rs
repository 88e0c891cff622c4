//! Radially layered approximate electromagnetic cloaking experiments.
//!
//! The crate builds three families of media on the ball of radius 3: the
//! anisotropic transformation-based reference cloak, its de-regularized
//! near-cloak limit, and isotropic two-phase laminates whose homogenized
//! limit reproduces the anisotropic profile. Cloaking quality is measured
//! through the modal impedance spectrum (boundary log-derivatives of the
//! regular Maxwell mode solutions), compared against vacuum.

pub mod cell;
pub mod cli;
pub mod error;
pub mod laminate;
pub mod measure;
pub mod params;
pub mod radial;
pub mod special;

pub use error::{Error, Result};
pub use params::{CloakGeometry, HiddenObject, InnerShellMode, RadialMedium, RadialTensor};
pub use radial::{modal_dtn, vacuum_dtn, Mode, Polarization};
