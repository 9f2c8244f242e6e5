//! GF(2) LDPC code construction: base graphs, circulant lifting, parity-check
//! and generator matrices, syndromes and the Tanner graph used by the decoders.

mod alist;
mod base_graph;
mod code;
mod generator;
mod parity;
mod tanner;

pub use alist::{load_alist, parse_alist, save_alist, write_alist};
pub use base_graph::{load_base_graph, parse_base_graph, BaseGraph, BaseGraphEntry};
pub use code::{LdpcCode, BG2_CSV, BG2_LIFTING};
pub use generator::{derive_generator, GeneratorMatrix};
pub use parity::{lift, ParityCheck};
pub use tanner::TannerGraph;
