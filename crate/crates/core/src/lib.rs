//! Finite-scale machinery for topological full groups of Z^d subshifts.
//!
//! Every construction here comes with a certificate that can be re-checked
//! from its output alone. Ratios and inequalities are decided in exact
//! rational arithmetic; logarithms only appear in reported entropy values,
//! where they are kept as explicit `count`/`area` pairs.

pub mod coe;
pub mod cli;
pub mod entropy_builder;
pub mod error;
pub mod fullgroup;
pub mod gamma;
pub mod lattice;
pub mod rational;
pub mod subshift;
pub mod tilings;
pub mod toeplitz_delta;

pub use error::{LabError, LabResult};
pub use lattice::{FiniteRegion, LatticePoint, MetricContext};
pub use subshift::{Point, PointOracle, Sym};
