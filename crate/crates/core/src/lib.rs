//! Finite-blocklength analysis and blocklength minimization for two-user
//! uplink multiple access.
//!
//! The crate models a two-user uplink in the finite-blocklength (FBL) regime
//! using the normal approximation `R ≈ log2(1+γ) − sqrt(V/n)·Q⁻¹(ε)·log2(e)`
//! and covers four access schemes:
//!
//! * **RSMA** — user 1's message is split into two independently encoded
//!   streams, decoded in the fixed order `s11 → s2 → s12`;
//! * **NOMA** — power-domain superposition with SIC, both decoding orders;
//! * **FDMA / TDMA** — orthogonal splits with a bandwidth/time fraction `α`.
//!
//! On top of the rate primitives sit achievable-rate-region tracing
//! ([`region`]), effective-throughput and message-error aggregation
//! ([`reliability`]), a successive-convex-approximation solver that minimizes
//! the transmission blocklength subject to per-user effective-throughput
//! thresholds ([`solver`]), and a brute-force grid oracle ([`oracle`]) used to
//! cross-check the solver. The [`experiments`] module drives parameter sweeps
//! and emits CSV/JSON for plotting; `rsma-fbl` is the CLI front end.

pub mod channel;
pub mod error;
pub mod experiments;
pub mod fbl;
pub mod oracle;
pub mod region;
pub mod reliability;
pub mod scenario;
pub mod solver;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
