//! Security accounting for BB84-type key distribution.
//!
//! The crate is split by concern:
//!
//! * [`entropy_rates`] – binary entropy, error-correction leak accounting,
//!   final key length and the net-key feasibility region.
//! * [`distance_guessing`] – variational distance, guessing probability and
//!   the distance/guessing relation over classical observation ensembles.
//! * [`markov_cascade`] – failure probability after one or two Markov
//!   inequality layers, with numeric optimizers.
//! * [`gf2`] – GF(2) linear block codes and Toeplitz hashing.
//! * [`breach`] – an observation structure aligned with a public code that
//!   reveals the corrected key while the sifted key stays hard to guess.
//! * [`pipeline`] – a seeded end-to-end BB84 run with a secret-bit ledger.

pub mod breach;
pub mod distance_guessing;
pub mod entropy_rates;
mod error;
pub mod gf2;
pub mod markov_cascade;
pub mod pipeline;

pub use error::{Error, Result};
