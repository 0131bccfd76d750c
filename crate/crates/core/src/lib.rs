//! Iterative measurement-based state transfer of `(d-1)`-level states across
//! uniform ferromagnetic chains of `d`-level particles.
//!
//! The chain Hamiltonian is `H = -J Σ_k P_{k,k+1} + B Σ_k S^z_k` with `P` the
//! nearest-neighbour swap. A payload `Σ_{μ≥1} a_μ|μ⟩` is written on site 1,
//! the chain evolves, and site N is measured with `O = Σ_{μ≥1}|μ⟩⟨μ|`. A
//! positive outcome leaves the payload on site N up to a known phase; a
//! negative one collapses the excitation back onto sites `1..N-1` and the
//! cycle repeats.
//!
//! - [`spin`]: spin matrices, swap expansion in `S·S`, conserved charges.
//! - [`sector`]: one-excitation Hamiltonian and propagators.
//! - [`protocol`]: the iterative protocol itself.
//! - [`oracle`]: brute-force `d^N` simulator used as ground truth.
//! - [`validation`]: oracle cross-checks.
//! - [`analysis`]: sweeps and fits.
//! - [`cli`]: the `qudit-transfer` command line.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod protocol;
pub mod report;
pub mod sector;
pub mod spin;
pub mod validation;

pub use error::{Error, Result};
pub use protocol::{LogicalPayload, Outcome, OutcomeSource, ProtocolConfig, ProtocolResult, Strategy};
pub use sector::{ChainSpec, PropagatorMode, SectorDynamics};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

/// Largest modulus over a collection of complex numbers (`0` when empty).
pub fn max_modulus<'a>(values: impl IntoIterator<Item = &'a C64>) -> f64 {
    values.into_iter().map(|c| c.norm()).fold(0.0, f64::max)
}
