//! Constrained Hamiltonian mechanics.
//!
//! The pipeline runs from a (possibly singular) Lagrangian through the
//! Dirac–Bergmann constraint chain, gauge fixing and Dirac-bracket reduction,
//! to classical integration and grid quantization in which secondary
//! constraints are imposed on the initial data instead of on the bracket.

pub mod catalog;
pub mod constraints;
pub mod dynamics;
pub mod pipeline;
pub mod quantum;
pub mod reduction;
pub mod report;
pub mod symbolic;
pub mod system_file;
