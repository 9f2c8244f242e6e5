//! Key binding for binarized biometric features with 5G NR LDPC codes.
//!
//! The crate covers the whole fuzzy-commitment chain:
//!
//! * [`ldpc`]: base-graph lifting, systematic encoding, syndromes, alist I/O.
//! * [`decoder`]: sum-product and min-sum family decoders over a BSC, including
//!   a trainable min-sum with per-iteration normalizing and offset factors.
//! * [`pipeline`]: quantization, LSSC binarization, permutation and masking of
//!   512-dimensional feature vectors.
//! * [`commitment`]: enrollment and key retrieval.
//! * [`simulation`]: channel sampling, synthetic populations, frame error rates.
//! * [`metrics`]: GMR/FMR, decidability, entropy, security strength, unlinkability.
//! * [`experiments`]: batched enrollment and retrieval trials over populations.
//! * [`cli`]: the `keybind` command line.

pub mod bits;
pub mod cli;
pub mod commitment;
pub mod decoder;
pub mod error;
pub mod experiments;
pub mod ldpc;
pub mod metrics;
pub mod pipeline;
pub mod prng;
pub mod simulation;

pub use bits::BitVector;
pub use error::{Error, Result};
