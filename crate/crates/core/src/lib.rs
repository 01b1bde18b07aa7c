//! Measurement-device-independent (MDI) characterization of quantum resources.
//!
//! The crate simulates the Alice-vs-Eve measurement game behind MDI
//! entanglement witnessing: witness operators are decomposed into trusted
//! local input states, probability tables are generated under honest or
//! adversarial measurement strategies, and certified lower bounds on
//! entanglement and channel quantumness are extracted from those tables,
//! either by direct contraction or through a small dense SDP engine.
//!
//! Module map:
//! - [`mat`]: dense complex-matrix kernel (Kronecker products, partial
//!   trace/transpose, Hermitian eigendecomposition, PSD projection).
//! - [`bases`]: generalized Gell-Mann bases, trusted local state sets,
//!   Heisenberg-Weyl unitaries, generalized Bell projectors and the
//!   per-setting transform matrices.
//! - [`quantum`]: density matrices, POVMs, channels as Choi states,
//!   separable constructions with explicit certificates, seeded generators.
//! - [`decomp`]: local state decompositions of observables and MDI-value
//!   evaluation from probability tables.
//! - [`game`]: honest and adversarial measurement strategies and the
//!   exact Born-rule protocol simulator.
//! - [`witness`]: linear, nonlinear and multicopy MDI witnesses plus
//!   witness-based entanglement lower bounds.
//! - [`sdp`]: ADMM splitting solver and the optimization-based quantifiers.
//! - [`memory`]: the single-Bell-measurement protocol for quantum memories.
//! - [`qkd`]: MDI-QKD as a quantumness quantification protocol.

pub mod bases;
pub mod decomp;
pub mod error;
pub mod game;
pub mod mat;
pub mod memory;
pub mod par;
pub mod qkd;
pub mod quantum;
pub mod report;
pub mod rng;
pub mod sdp;
pub mod witness;

pub use error::Error;

/// Library version, embedded into reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
