//! Computational universal algebra: Bulatov higher commutators for finite
//! algebras, and a bounded verifier for an explicit infinite simple algebra
//! whose descending central series drops to zero exactly after step `n`.

pub mod elements;
pub mod syntax;
pub mod terms;
pub mod cli;
pub mod cubes;
pub mod finengine;
pub mod verifier;
