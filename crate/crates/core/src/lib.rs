pub mod boundary;
pub mod error;
pub mod forward;
pub mod kernels;
pub mod probing;
pub mod reconstruction;
pub mod special;

pub use boundary::{BoundaryTrace, FourierCoeffs, SobolevParams};
pub use error::{DsmError, Result};
pub use probing::{BackgroundMedium, Direction, ProbeKind, ProbePoint, ProbeSpectrum};
