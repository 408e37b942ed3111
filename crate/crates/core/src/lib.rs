//! Odd integers whose Collatz trajectory rises and falls in prescribed runs.
//!
//! Given run lengths `v_1, ..., v_L`, [`forge::forge`] builds an odd `m` with
//!
//! ```text
//! m < C(m) < ... < C^v_1(m) > ... > C^(v_1+v_2)(m) < ...
//! ```
//!
//! by solving a bidiagonal linear Diophantine system for odd positive
//! multipliers ([`chain`]). The [`dynamics`] module iterates the Collatz map
//! and its generalization `((q-1)m + r) / p^e`, records trajectories, and
//! checks or extracts run patterns.

pub mod chain;
pub mod cli;
pub mod dynamics;
pub mod forge;
pub mod pattern;

pub use chain::{ChainError, ChainSystem, CornerMinors, KernelVector, SolutionCertificate};
pub use dynamics::{DynamicsError, DynamicsParams, PatternCheck, Trajectory};
pub use forge::{ForgeError, Witness};
pub use pattern::{Direction, Pattern, PatternError, PatternRle};
