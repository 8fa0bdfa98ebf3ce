//! Numerical verification of McShane-type identities for cusped
//! nonorientable hyperbolic surfaces.

pub mod curves;
pub mod domain;
pub mod identity;
pub mod limitset;
pub mod mobius;
pub mod repbuild;
pub mod surface;

pub use mobius::{ComplexLength, MatrixRep, Point, C64};
pub use repbuild::{build_family, Representation, SurfaceId};
pub use surface::{GroupWord, SurfacePresentation, SurfaceSpec};
