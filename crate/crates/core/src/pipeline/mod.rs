//! Real-valued features to ECC-ready binary templates: equal-probability
//! quantization, LSSC binarization, a global bit permutation and random
//! masking with a searched zero fraction.

mod config;
mod features;
mod kappa;
mod lssc;
mod mask;
mod quantizer;

pub use config::{transform, Pipeline, PipelineConfig};
pub use features::{parse_embeddings, read_embeddings, FeatureVector, LabeledEmbedding};
pub use kappa::{inter_class_pairs, search_kappa, KappaSearch};
pub use lssc::{lssc_encode, BinaryTemplate, Stage};
pub use mask::{apply_mask, gen_mask, mask_uniforms, MaskBits, Permutation};
pub use quantizer::{fit_quantizer, QuantizedVector, QuantizerTable};
