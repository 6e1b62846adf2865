//! Workbench for conditional-term-rewriting complexity: a labeled cost
//! semantics for conditional systems, a transformation to context-sensitive
//! unconditional rewriting, and interpretation-based complexity bounds.

#[cfg(test)]
mod fixtures;
mod fnv;

pub mod cctrs;
pub mod cs;
pub mod interp;
pub mod labeled;
pub mod rewrite;
pub mod term;
pub mod transform;

pub use cctrs::{Cctrs, CctrsError, ValidateMode, ValidationReport};
pub use labeled::{Cost, LabeledTerm};
pub use rewrite::{SearchBudget, Searched};
pub use term::{Position, Signature, Subst, Symbol, Term, Var};
pub use transform::{TransformedTrs};
