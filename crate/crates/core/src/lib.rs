//! Computational workbench for finite and finitely presented categories.

pub mod big_list;
pub mod constructions;
pub mod descent;
pub mod descent_colimits;
pub mod dsl;
pub mod emit;
pub mod error;
pub mod fincat;
pub mod fixtures;
pub mod fibration;
pub mod functor;
pub mod generate;
pub mod join;
pub mod gluing;
pub mod kelly;
pub mod presentation;
pub mod presheaf;
pub mod search;
pub mod suites;
pub mod universe;

pub use error::{CatError, LawViolation};
pub use fincat::{check_fincat, ArrId, Arrow, Budget, FinCat, ObjId, RawCat};
pub use functor::{Functor, NatTrans};
