//! Symbolic calculus of variations on jet bundles.
//!
//! * [`jet`]: charts, multi-indices and exact scalar expressions.
//! * [`forms`]: differential forms in the contact basis.
//! * [`varcalc`]: Euler–Lagrange forms, Lepage equivalents, homotopy operator.
//! * [`geomver`]: numeric verification along sections and at jet points.

mod error;
pub mod jet;

pub use error::JetError;
pub mod forms;
pub mod geomver;
#[doc(hidden)]
pub mod testing;
pub mod varcalc;
