//! Independent numeric checks for the exact pipeline: direct quadrature of
//! resolvent traces, lattice sums over ℤⁿ and least-squares fitting of
//! large-|λ| asymptotic ladders.

pub mod error;
pub mod fit;
pub mod lattice;
pub mod quad;
pub mod trace;

pub use error::{OracleError, Result};
pub use fit::{
    fit_expansion, fit_radius_constant, model_ladder, FitOptions, FitReport, FitRow, FitStatus,
    RadiusFit, RaySampler, Sample, Slot, Verdict,
};
pub use lattice::{lattice_trace, LatticeValue};
pub use trace::{numeric_trace, QuadOptions, TraceValue};
