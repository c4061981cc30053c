//! Two-qubit numerics for CHSH violations and non-stabilizer resources.
//!
//! The crate is organised bottom-up: [`qcore`] provides fixed-size complex
//! linear algebra, [`resources`] the stabilizer-entropy family of monotones,
//! [`chsh`] the Pauli CHSH operators and their theorem checks, [`ensembles`]
//! Haar sampling and Clifford enumeration, [`twirling`] isospectral twirling
//! statistics and [`stats`] the Haar outcome distribution and binned
//! estimators. [`experiments`] wires them into tabular reports.

pub mod chsh;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod qcore;
pub mod resources;
pub mod stats;
pub mod twirling;

pub use chsh::{ChshSpec, HurwitzCoords};
pub use ensembles::{EnsembleSpec, GroupKind, GroupTag, Method};
pub use error::{Error, Result};
pub use qcore::{DensityMatrix, Pauli, PauliString, Qubit, StateVec, UnitaryOp, C64};
pub use resources::{LogBase, ResourceReport};
pub use stats::BinnedConditional;
pub use twirling::{CliffordCQuantities, Core, FormFactors, TwirlStats};
