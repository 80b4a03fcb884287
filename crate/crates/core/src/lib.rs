//! Toolkit for multilinear arithmetic formulas and algebraic branching
//! programs over prime fields.
//!
//! The crate provides:
//!
//! * exact prime-field arithmetic and a dense multilinear polynomial
//!   representation used as the semantic oracle for every model
//!   ([`field`], [`poly`]),
//! * IRs and structural validators for formulas and layered ABPs,
//!   including read-once, oblivious, interval and strict-interval
//!   restrictions ([`models`]),
//! * generators for explicit hard polynomial families and seeded random
//!   model instances ([`hardpoly`]),
//! * partition / pairing samplers and the combinatorial measures built
//!   on them ([`partitions`]),
//! * the partial derivative matrix and its rank ([`rank`]),
//! * semantics-preserving transformations: strict-interval ABP to ROABP
//!   conversion and interval-preserving depth reduction ([`transforms`]),
//! * deterministic white-box identity testing for ROABPs ([`pit`]).

pub mod error;
pub mod field;
pub mod hardpoly;
pub mod models;
pub mod partitions;
pub mod pit;
pub mod poly;
pub mod rank;
pub mod transforms;

pub use error::Error;
pub use field::FieldElem;
pub use poly::MultilinearPoly;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
