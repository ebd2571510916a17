//! Symbolic core: exact symbols, densities, resolvent expansions and
//! Laurent transitions for constant-coefficient pseudodifferential models.

pub mod angular;
pub mod densities;
pub mod error;
pub mod laurent;
pub mod parse;
pub mod resolvent;
pub mod scalar;
pub mod symbol;

pub use angular::{AngularPoly, Parity, SpherePoly};
pub use error::{Error, Result};
pub use scalar::{Precision, ScalarValue};
pub use symbol::{ClassicalSymbol, Degree, HomogeneousTerm, LogPolyhomSymbol};
