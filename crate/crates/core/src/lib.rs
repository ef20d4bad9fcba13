//! Exact cluster-algebra engine.
//!
//! Quiver mutation, cluster variables as exact Laurent polynomials, c- and
//! g-vectors, maximal green sequences, q-characters of Kirillov-Reshetikhin
//! modules computed as cluster variables, and cluster Donaldson-Thomas
//! transformations.

pub mod error;
pub mod greenseq;
pub mod krchar;
pub mod dt;
pub mod laurent;
pub mod quiver;
pub mod seed;

pub use error::{EngineError, Result};
pub use laurent::{LaurentPoly, Monomial, Var};
pub use quiver::{DynkinType, Family, Quiver, VertexId};
pub use seed::{Color, Seed, Tracking, TropicalData};
