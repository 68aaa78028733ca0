//! Exact computations with the universal formal group law over the rational
//! complex cobordism ring: Buchstaber and abelian classifying maps, the
//! Krichever–Hoehn and Schreieder genera, W-theory coefficients and
//! polynomial generators of `MSU_*[1/2]`.

pub mod arith;
pub mod cache;
pub mod combinat;
pub mod error;
pub mod expr;
pub mod fgl;
pub mod genera;
pub mod graded;
pub mod report;
pub mod series;
pub mod su;
pub mod verify;

pub use error::{Error, Result};
