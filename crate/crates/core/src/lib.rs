//! Distributed circulant network-channel codes for cooperative relaying.
//!
//! A round of cooperation runs in two phases: every user broadcasts a source
//! packet, then every user relays an XOR of (circularly shifted) packets it
//! decoded. Viewed from the destination the round is one sparse-graph code of
//! length `2mN`. The crate covers the whole chain:
//!
//! - [`construction`]: topologies, retrieval sets, CWC/DPEG selection, bitmap headers.
//! - [`codes`]: base matrices, lifting, network encoding, girth tools.
//! - [`channel`]: BPSK over block or IID Rayleigh fading, LLR demapping.
//! - [`decoder`]: sum-product decoding and the joint/sequential/iterative strategies.
//! - [`de`]: Gaussian-approximation density evolution.
//! - [`harness`]: Monte Carlo sweeps and CSV output.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod alist;
pub mod channel;
pub mod codes;
pub mod construction;
pub mod de;
pub mod decoder;
mod error;
pub mod gf2;
pub mod harness;
pub mod seed;
pub mod sparse;

pub use error::{Error, Result};
pub use sparse::SparseBinMatrix;
