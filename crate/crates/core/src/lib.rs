//! Integer data hiding for SQLJ and Java sources.
//!
//! Integer literals are replaced by arithmetic expressions built around an
//! opaque two-argument function `F(a, b) = a % b`, so the constants no longer
//! appear in the source text while the program computes the same values.
//!
//! The pipeline is `lex -> find sites -> hide -> emit -> verify -> measure`,
//! one module per stage.

pub mod adversary;
pub mod cli;
pub mod emitter;
pub mod hider;
pub mod site_finder;
pub mod source_model;
