//! Right-censoring assumptions for competing risks, checked exactly on finite
//! discrete worlds.
//!
//! The crate is organised in layers:
//!
//! * [`stepfn`]: atomic measures, right-continuous step functions and
//!   Lebesgue–Stieltjes integrals against them.
//! * [`prodint`]: scalar and matrix product integrals over atomic hazards.
//! * [`model`]: finite joint laws of `(T, D, C)` and their derived functionals.
//! * [`props`]: decision procedures for every censoring assumption, plus the
//!   identities that tie them together.
//! * [`estim`]: Nelson–Aalen, Kaplan–Meier and Aalen–Johansen estimators.
//! * [`latent`]: the latent censoring and event-time constructions.
//! * [`bench`]: the uniform-square example worlds, the assumption table and the
//!   consistency experiment.
//! * [`random`]: seeded random worlds with prescribed dependence structure.
//! * [`cli`]: the `censoring` command line and its file formats.

pub mod bench;
pub mod cli;
pub mod error;
pub mod estim;
pub mod latent;
pub mod model;
pub mod prodint;
pub mod props;
pub mod random;
pub mod stepfn;

pub use error::{Error, Result};
