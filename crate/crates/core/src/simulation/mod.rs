//! Channel sampling, synthetic populations and frame-error-rate estimation.

mod bsc;
mod fer;
mod population;

pub use bsc::{bsc_flip, flip_with, BscSampler};
pub use fer::{fer_point, monte_carlo_fer, FerPoint, FerReport};
pub use population::{synth_embeddings, PairIndex, SynthConfig, SynthPopulation};
