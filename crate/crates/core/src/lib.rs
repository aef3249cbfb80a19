//! Shape systems over F_p^n built from stars of 3-term arithmetic
//! progressions: detection, the packing/lifting/multicolor machinery of the
//! k-star bound, the Λ-constant optimizer, and exact extremal search.

pub mod bounds;
pub mod cli;
pub mod detector;
pub mod error;
pub mod field_space;
pub mod search;
pub mod systems;

pub use error::{Error, Result};
pub use field_space::{FieldSpace, Point, PointSet};
pub use systems::{Classification, ShapeSystem, SystemKind};
