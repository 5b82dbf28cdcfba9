//! Polya urn with UP, DOWN and composite DOWN/UP transitions on the lattice
//! of integer compositions.
//!
//! * [`polya`]: exact log-space probabilities (Polya pmf, sequence
//!   probabilities, symmetric Dirichlet density).
//! * [`simplex`]: enumeration and dense ranking of the simplex `C_n`.
//! * [`kernels`]: transition probabilities and samplers.
//! * [`verify`]: enumeration-based checks of stationarity, detailed balance,
//!   measure preservation and cross-level balance.
//! * [`simulate`]: growth and two-phase (growth, then fluctuation) market runs.
//! * [`analysis`]: capital distribution curves, stability statistics, CSV,
//!   JSON lines and SVG output.

pub mod analysis;
pub mod error;
pub mod kernels;
pub mod polya;
pub mod simplex;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
pub use kernels::StepKind;
pub use polya::{Composition, ModelParams};
pub use simplex::SimplexIndex;
