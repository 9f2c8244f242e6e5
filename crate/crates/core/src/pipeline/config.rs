use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prng::PRNG_ID;

use super::features::FeatureVector;
use super::lssc::{lssc_encode, BinaryTemplate, Stage};
use super::mask::{apply_mask, gen_mask, MaskBits, Permutation};
use super::quantizer::QuantizerTable;

const CONFIG_VERSION: u32 = 1;

/// Everything needed to regenerate the permutation and the mask bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub version: u32,
    pub q: usize,
    pub m: usize,
    pub perm_seed: u64,
    pub mask_seed: u64,
    pub kappa: f64,
    /// Masked inter-class distance threshold, as a fraction of template length.
    pub tau: f64,
    pub quantile: f64,
    pub prng: String,
}

impl PipelineConfig {
    pub fn new(q: usize, perm_seed: u64, mask_seed: u64, kappa: f64, tau: f64, quantile: f64) -> Result<Self> {
        let c = PipelineConfig {
            version: CONFIG_VERSION,
            q,
            m: q.saturating_sub(1),
            perm_seed,
            mask_seed,
            kappa,
            tau,
            quantile,
            prng: PRNG_ID.to_string(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Version {
                found: self.version,
                expected: CONFIG_VERSION,
            });
        }
        if self.q < 2 || self.m != self.q - 1 {
            return Err(Error::Validation(format!("need q >= 2 and m = q - 1 (q = {}, m = {})", self.q, self.m)));
        }
        if !(0.0..=1.0).contains(&self.kappa) || !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Validation("kappa and tau must lie in [0, 1]".into()));
        }
        if self.prng != PRNG_ID {
            return Err(Error::Validation(format!("unsupported PRNG {:?}", self.prng)));
        }
        Ok(())
    }

    pub fn template_len(&self) -> usize {
        FeatureVector::DIM * self.m
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: PipelineConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// A fitted pipeline with its permutation and mask materialized.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: PipelineConfig,
    pub table: QuantizerTable,
    permutation: Permutation,
    mask: MaskBits,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, table: QuantizerTable) -> Result<Self> {
        config.validate()?;
        if table.q != config.q {
            return Err(Error::Validation(format!(
                "quantizer table has q = {}, pipeline q = {}",
                table.q, config.q
            )));
        }
        let len = config.template_len();
        let permutation = Permutation::new(config.perm_seed, len);
        let mask = gen_mask(config.kappa, config.mask_seed, len)?;
        Ok(Pipeline {
            config,
            table,
            permutation,
            mask,
        })
    }

    pub fn mask(&self) -> &MaskBits {
        &self.mask
    }

    /// Quantize, LSSC-encode and permute (no mask).
    pub fn permuted(&self, v: &FeatureVector) -> Result<BinaryTemplate> {
        let z = self.table.quantize(v)?;
        self.permutation.permute(&lssc_encode(&z)?)
    }

    pub fn transform(&self, v: &FeatureVector) -> Result<BinaryTemplate> {
        let t = apply_mask(&self.permuted(v)?, &self.mask)?;
        debug_assert_eq!(t.stage, Stage::Masked);
        Ok(t)
    }
}

/// One-shot transform of a feature vector into a masked template.
pub fn transform(v: &FeatureVector, cfg: &PipelineConfig, table: &QuantizerTable) -> Result<BinaryTemplate> {
    Pipeline::new(cfg.clone(), table.clone())?.transform(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::quantizer::fit_quantizer;
    use crate::prng::SplitMix64;

    fn setup() -> (PipelineConfig, QuantizerTable) {
        let mut rng = SplitMix64::new(6);
        let data: Vec<FeatureVector> = (0..500)
            .map(|_| FeatureVector::new((0..512).map(|_| rng.next_gaussian()).collect()).unwrap())
            .collect();
        let table = fit_quantizer(&data, 4).unwrap();
        (PipelineConfig::new(4, 11, 12, 0.3, 0.235, 0.95).unwrap(), table)
    }

    #[test]
    fn output_length_and_determinism() {
        let (cfg, table) = setup();
        let v = FeatureVector::new((0..512).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let a = transform(&v, &cfg, &table).unwrap();
        let b = transform(&v, &cfg, &table).unwrap();
        assert_eq!(a.len(), 1536);
        assert_eq!(a.stage, Stage::Masked);
        assert_eq!(a.bits.as_bytes(), b.bits.as_bytes());
    }

    #[test]
    fn one_level_change_moves_at_most_one_bit() {
        let (cfg, table) = setup();
        let p = Pipeline::new(cfg, table.clone()).unwrap();
        let base: Vec<f64> = table.boundaries.iter().map(|c| c[1] - 1e-3).collect();
        let mut moved = base.clone();
        moved[100] = table.boundaries[100][1] + 1e-3; // label 2 -> 3
        let a = p.transform(&FeatureVector::new(base).unwrap()).unwrap();
        let b = p.transform(&FeatureVector::new(moved).unwrap()).unwrap();
        assert!(a.bits.hamming(&b.bits).unwrap() <= 1);
    }

    #[test]
    fn config_validation() {
        assert!(PipelineConfig::new(1, 0, 0, 0.1, 0.2, 0.95).is_err());
        let mut c = PipelineConfig::new(4, 0, 0, 0.1, 0.2, 0.95).unwrap();
        c.m = 2;
        assert!(c.validate().is_err());
        let c = PipelineConfig::new(4, 0, 0, 0.1, 0.2, 0.95).unwrap();
        assert_eq!(PipelineConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
    }

    #[test]
    fn table_q_must_match() {
        let (mut cfg, table) = setup();
        cfg.q = 8;
        cfg.m = 7;
        assert!(Pipeline::new(cfg, table).is_err());
    }
}
