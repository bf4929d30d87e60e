//! Quantum limits and classical benchmarks for the amplification of
//! Gaussian-distributed coherent states.
//!
//! Every fidelity formula lives in [`closed_forms`]. The other modules check
//! those formulas by independent routes:
//!
//! - [`channels`] simulates the optimal devices (two-mode squeezer, noiseless
//!   filters, heterodyne measure-and-prepare, pure loss) in truncated Fock space.
//! - [`a_operator`] builds the performance operator for a thermal reference
//!   state and computes its operator norm, trace powers and injective cross norm.
//! - [`montecarlo`] samples the Gaussian prior and heterodyne outcomes directly.
//!
//! Conventions: the prior is `p(α) = λ exp(-λ|α|²)` with respect to `d²α/π`,
//! so the mean photon number is `1/λ`. Two-mode operators use the flattened
//! index `m * dim_in + p` with `m` the output-mode level.

pub mod a_operator;
pub mod channels;
pub mod closed_forms;
mod error;
pub mod fock;
pub mod montecarlo;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
