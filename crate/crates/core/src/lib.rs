//! Exact arithmetic on Kummer towers of local fields, with the Galois
//! oscillation invariant, optimal lower-level approximation, ramification
//! data, twist-recurrent sequences, and integral-cohomology diagnostics.
//!
//! The tower is K_n = K(pi_n) with pi_n^{p^n} = pi for a fixed uniformizer pi
//! of a p-adic field K with residue field k of order p^f and absolute
//! ramification index e.  Elements are represented exactly modulo a tracked
//! precision cutoff, so every reported valuation is either exact or an honest
//! lower bound, never a rounded guess.

pub mod apf;
pub mod ax;
pub mod cohomology;
pub mod error;
mod linalg;
pub mod oracle;
pub mod residue;
pub mod tower;
pub mod twistrec;
pub mod unramified;
pub mod valuation;

pub use error::{Error, Result};
pub use residue::{ResidueElement, ResidueField};
pub use tower::{TowerConfig, TowerElement};
pub use unramified::{BaseRing, Unram};
pub use valuation::Valuation;
