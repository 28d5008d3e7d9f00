//! Horocycle flows on flat projective bundles over Schottky surfaces.
//!
//! The crate is organized bottom-up:
//!
//! - [`hyperbolic`]: PSL(2,R), the upper half-plane, flows and the Busemann cocycle.
//! - [`projective`]: `P^n`, the sine metric, a dense eigensolver and proximality.
//! - [`fuchsian`]: free words and Schottky groups with certified ping-pong.
//! - [`representation`]: representations into PSL(n+1,R), symmetric powers,
//!   limit maps and the Lorentz model.
//! - [`bundle`]: the flat bundle, minimal-set samplers and the experiments.

pub mod acceptance;
pub mod bundle;
pub mod catalog;
pub mod error;
pub mod fuchsian;
pub mod hausdorff;
pub mod hyperbolic;
pub mod projective;
pub mod representation;
pub mod stats;

pub use error::{Error, Result};
pub use fuchsian::{FreeWord, LimitSetSample, SchottkyGroup};
pub use hyperbolic::{busemann, BoundaryPoint, HPoint, IsometryClass, Psl2Element};
pub use projective::{delta, ProjMat, ProjPoint, ProximalData};
pub use representation::{LimitMap, Representation};
