//! Simulation of a single-photon source built from a two-level quantum dot
//! coupled to a lossy single-mode cavity.
//!
//! The crate has two layers that describe the same device:
//!
//! - [`rates`]: the closed-form incoherent (Purcell-regime) model — effective
//!   transfer rate, single-photon efficiency, generalized Purcell factor,
//!   quality factors and the two-variable rate equations.
//! - [`lindblad`]: the full Lindblad master equation on the truncated
//!   QD ⊗ Fock space, used to validate the closed forms.
//!
//! Supporting modules supply the parameter bundle and unit conventions
//! ([`params`]), cavity loss/coupling rates from geometry ([`geometry`]) and
//! the temperature → pure-dephasing map ([`dephasing`]). All rates are
//! energies in μeV with ħ = 1; time is measured in ħ/μeV.

pub mod dephasing;
pub mod error;
pub mod geometry;
pub mod lindblad;
pub mod params;
pub mod rates;
pub mod validation;

pub use error::Error;
pub use params::SystemParams;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
