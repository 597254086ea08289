//! Exact computations on finite G-spaces.
//!
//! Covers Arens–Eells norms of molecules with transport-plan and
//! 1-Lipschitz dual certificates, isometric equivariant embeddings into the
//! molecule space, and quotients by invariant pseudometrics with their
//! bonding maps. It also assembles inverse systems indexed by
//! (pseudometric, tube radius) pairs.
//!
//! All arithmetic is over arbitrary-precision rationals and every identity
//! is checked exactly.
#![allow(clippy::needless_range_loop)]

pub mod ae_norm;
pub mod error;
pub mod fixtures;
pub mod gspace;
pub mod instance;
pub mod inverse_system;
pub mod molecule;
pub mod properties;
pub mod quotient;
pub mod rational;
pub mod report;
pub mod sampling;
pub mod transport;

pub use error::{Error, Result};
pub use rational::Rational;
pub use report::{ValidationReport, Violation};
