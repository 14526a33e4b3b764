//! Discrete logarithms in small-characteristic finite fields by index
//! calculus over the `h_1 x^q - h_0` representation.

pub mod descent;
pub mod dlog;
pub mod error;
pub mod field;
pub mod intmath;
pub mod lattice;
pub mod oracle;
pub mod poly;
pub mod quotient;
pub mod relations;
pub mod select;

pub use error::{Error, Result};
pub use field::{build_field, build_standalone, build_tower, Fq2, TowerParams};
pub use poly::{Factorization, LinearSplit, Poly};
pub use quotient::QuotientRing;
pub use select::{search_good, search_good_filtered, FieldSetup};
pub use relations::{CosetMode, CosetRep, FactorBase, RelationMatrix, RelationRow};
pub use lattice::{IntMatrix, InvariantDecomposition, ModSplitResult};
