//! Bipartite quantum correlation measures.
//!
//! The crate computes entropies, the two inequivalent quantum mutual
//! informations, measurement-minimized conditional entropy, classical
//! correlations and quantum discord, and relative-entropy distances to the
//! product, separable and classically-correlated state sets. The `channels`
//! module supplies local Kraus maps for testing monotonicity of these
//! measures under local operations.
//!
//! All entropic quantities are in bits.

pub mod campaign;
pub mod channels;
pub mod discord;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod optim;
pub mod relent;
pub mod report;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Subsystem, C64};
pub use states::{DensityMatrix, PureState};
