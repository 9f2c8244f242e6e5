//! Iterative message-passing decoders over a binary symmetric channel.
//!
//! All variants share one flooding engine; they differ only in the
//! check-node rule. The trainable min-sum variant can be unrolled into a
//! forward trace, differentiated, and fitted greedily one iteration at a time.

mod channel;
mod engine;
mod neural;
mod params;
mod train;

pub use channel::{init_llr, ChannelConfig, LlrVector, DEFAULT_DECODE_P};
pub use engine::{cn_update, decode, vn_update, DecodeOptions, DecodeResult};
pub use neural::{backward, loss_bce, unroll_forward, ForwardTrace, Gradients, LayerTrace};
pub use params::{DecoderParams, ParamMode, Variant, PARAMS_VERSION};
pub use train::{train_greedy, train_greedy_with, LayerReport, TrainConfig};
