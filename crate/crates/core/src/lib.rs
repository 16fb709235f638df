//! Distributed knowledge in multi-agent epistemic logic, read as what a
//! group could come to know by sharing what its members know.
//!
//! Twelve readings of `D_G φ` are supported, one per [`semantics::Variant`].
//! On finite models they fall into two classes: the intersection reading and
//! the ten formula-sharing readings (see [`oracle::differential_run`]).

#![allow(clippy::needless_range_loop)]

pub mod bisim;
pub mod formula;
pub mod gallery;
pub mod kripke;
pub mod oracle;
pub mod semantics;
pub mod worldset;

pub use bisim::{bisimilar, characteristic_formula, partition, Partition};
pub use formula::{Formula, FormulaError, Group};
pub use kripke::{Frame, KripkeModel, ModelError, ModelSpec, PointedModel};
pub use semantics::{eval, extension, Variant};
pub use worldset::WorldSet;
