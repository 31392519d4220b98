//! Deformations of cyclic quotient surface singularities over a truncated
//! complete DVR: equations, t-adic normal forms, shifting normalization,
//! generic-fiber classification and a finite-field Jacobian oracle.

pub mod campaign;
pub mod chain;
pub mod deform;
pub mod error;
pub mod fiber;
pub mod field;
pub mod job;
pub mod lattice;
pub mod oracle;
pub mod parse;
pub mod scalars;
pub mod series;
pub mod shift;

pub use deform::{complete_to_flat, Completion, GeneratorSet, Obstruction};
pub use chain::{hj_expand, hj_value, reduce_chain, Chain, Reduced};
pub use error::{Error, Result};
pub use field::{Field, FieldElem, FieldSpec};
pub use lattice::LatticeModel;
pub use scalars::{DvrKind, DvrSpec, Scalar};
pub use series::{Series, SeriesRing, XMonomial};
