//! Commutator methods for unitary operators on desk-scale sections.

pub mod cayley;
pub mod error;
pub mod lap;
pub mod linalg;
pub mod models;
pub mod mourre;
pub mod operator;
pub mod regularity;

pub use error::{Error, Result};
