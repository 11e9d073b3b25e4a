//! Key-polynomial chains for rank-one valuations on K[x].
//!
//! A chain `Q₁ = x, Q₂, …` with values `βᵢ = ν′(Qᵢ)` determines truncations
//! `νᵢ` that approximate a target valuation `ν′` given by an oracle. The crate
//! builds such chains from an oracle, computes standard expansions, Newton
//! polygons and initial forms, and analyses the resulting numerical characters.

pub mod analysis;
pub mod augment;
pub mod chain;
pub mod error;
pub mod fixtures;
pub mod graded;
pub mod limits;
pub mod oracle;
pub mod poly;
pub mod scalars;

pub use error::{Error, Result};
