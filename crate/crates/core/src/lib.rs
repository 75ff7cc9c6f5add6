//! Exact invariants and constructions for grid posets `[k_1] x ... x [k_n]`
//! and forbidden induced subposets: width and dimension of finite posets,
//! chain decompositions of grids, d-dimensional 0-1 pattern containment,
//! block-decomposition upper bounds for `P`-free subsets, and Lubell mass.
//!
//! Every expensive search takes a budget and reports
//! [`Error::BudgetExceeded`] instead of running unbounded.

pub mod chains;
pub mod error;
pub mod extremal;
pub mod grid;
pub mod lubell;
pub mod matching;
pub mod par;
pub mod patterns;
pub mod poset;

pub use error::{Error, Result};
pub use par::Exec;
