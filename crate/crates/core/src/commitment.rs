//! Fuzzy commitment over `m` LDPC blocks.
//!
//! A masked template of `512 * m` bits is cut into `m` blocks of 512 bits,
//! each padded with eight zeros to the 520-bit code length. Block `j` is
//! XORed with the codeword of the `j`-th 100-bit subkey; the stored record
//! keeps those differences and the SHA-256 digest of the whole key.

use std::path::Path;

use rand::rngs::OsRng;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::BitVector;
use crate::decoder::{decode, init_llr, ChannelConfig, DecodeOptions, DecoderParams};
use crate::error::{Error, Result};
use crate::ldpc::LdpcCode;
use crate::pipeline::{BinaryTemplate, FeatureVector, PipelineConfig, Stage};
use crate::prng::SplitMix64;

pub const COMMITMENT_VERSION: u32 = 1;
pub const HASH_ALG: &str = "sha-256";
/// Message length of the bundled code.
pub const SUBKEY_BITS: usize = 100;
/// Zero bits appended to each 512-bit feature block.
pub const PAD_BITS: usize = 8;
pub const BLOCK_BITS: usize = FeatureVector::DIM + PAD_BITS;

/// Where key bits come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeySource {
    /// The operating system's CSPRNG.
    Os,
    /// Reproducible keys for tests and experiments. Not secret.
    Test(u64),
}

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    bits: BitVector,
}

impl SecretKey {
    pub fn new(bits: BitVector) -> Result<Self> {
        if bits.is_empty() || bits.len() % SUBKEY_BITS != 0 {
            return Err(Error::Argument(format!(
                "key length {} is not a positive multiple of {SUBKEY_BITS}",
                bits.len()
            )));
        }
        Ok(SecretKey { bits })
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    /// Number of 100-bit subkeys.
    pub fn m(&self) -> usize {
        self.bits.len() / SUBKEY_BITS
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.bits.as_bytes()).into()
    }
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SecretKey({} bits)", self.bits.len())
    }
}

pub fn generate_key(m: usize, source: KeySource) -> Result<SecretKey> {
    if m == 0 {
        return Err(Error::Argument("m must be at least 1".into()));
    }
    let len = SUBKEY_BITS * m;
    let bits = match source {
        KeySource::Os => {
            let mut bytes = vec![0u8; len.div_ceil(8)];
            OsRng
                .try_fill_bytes(&mut bytes)
                .map_err(|e| Error::Entropy(e.to_string()))?;
            let rem = len % 8;
            if rem != 0 {
                *bytes.last_mut().expect("non-empty") &= (1u8 << rem) - 1;
            }
            BitVector::from_bytes(bytes, len)?
        }
        KeySource::Test(seed) => {
            let mut rng = SplitMix64::new(seed);
            BitVector::from_bools((0..len).map(|_| rng.next_bool()))
        }
    };
    SecretKey::new(bits)
}

/// Cuts a `512 * m`-bit template into `m` zero-padded 520-bit blocks.
pub fn split_and_pad(template: &BitVector, m: usize) -> Result<Vec<BitVector>> {
    if m == 0 || template.len() != FeatureVector::DIM * m {
        return Err(Error::Argument(format!(
            "template has {} bits, expected 512 * {m}",
            template.len()
        )));
    }
    Ok((0..m)
        .map(|j| {
            let mut b = template.slice(j * FeatureVector::DIM, (j + 1) * FeatureVector::DIM);
            b.extend_from(&BitVector::zeros(PAD_BITS));
            b
        })
        .collect())
}

/// Inverse of [`split_and_pad`]: drops the pads and concatenates.
pub fn join_blocks(blocks: &[BitVector]) -> BitVector {
    BitVector::concat(blocks.iter().map(|b| b.slice(0, FeatureVector::DIM)).collect::<Vec<_>>().iter())
}

/// Deployment parameters a probe must share with the enrolled record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitMeta {
    pub q: usize,
    pub m: usize,
    pub perm_seed: u64,
    pub mask_seed: u64,
    pub kappa: f64,
    pub code_id: String,
    /// Decoder used at enrollment time. Informational: it does not affect
    /// the stored record.
    pub decoder_params_id: String,
}

impl CommitMeta {
    pub fn from_pipeline(cfg: &PipelineConfig, code: &LdpcCode, params: &DecoderParams) -> Self {
        CommitMeta {
            q: cfg.q,
            m: cfg.m,
            perm_seed: cfg.perm_seed,
            mask_seed: cfg.mask_seed,
            kappa: cfg.kappa,
            code_id: code.id().to_string(),
            decoder_params_id: params.id(),
        }
    }

    /// Metadata for templates that did not come out of a fitted pipeline
    /// (synthetic populations).
    pub fn bare(m: usize, code: &LdpcCode, params: &DecoderParams) -> Self {
        CommitMeta {
            q: m + 1,
            m,
            perm_seed: 0,
            mask_seed: 0,
            kappa: 0.0,
            code_id: code.id().to_string(),
            decoder_params_id: params.id(),
        }
    }

    /// Fields that must match for retrieval to proceed.
    fn mismatch(&self, other: &CommitMeta) -> Option<String> {
        let pairs = [
            ("q", self.q.to_string(), other.q.to_string()),
            ("m", self.m.to_string(), other.m.to_string()),
            ("perm_seed", self.perm_seed.to_string(), other.perm_seed.to_string()),
            ("mask_seed", self.mask_seed.to_string(), other.mask_seed.to_string()),
            ("kappa", format!("{:?}", self.kappa), format!("{:?}", other.kappa)),
            ("code_id", self.code_id.clone(), other.code_id.clone()),
        ];
        pairs
            .into_iter()
            .find(|(_, a, b)| a != b)
            .map(|(name, a, b)| format!("{name} differs: enrolled {a}, probe {b}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commitment {
    pub version: u32,
    pub key_hash: [u8; 32],
    /// `m * 520` bits: template blocks XOR codewords.
    pub delta: BitVector,
    pub meta: CommitMeta,
}

#[derive(Serialize, Deserialize)]
struct CommitmentRecord {
    version: u32,
    hash_alg: String,
    key_hash_hex: String,
    delta_hex: String,
    q: usize,
    m: usize,
    perm_seed: u64,
    mask_seed: u64,
    kappa: f64,
    code_id: String,
    decoder_params_id: String,
}

impl Commitment {
    pub fn m(&self) -> usize {
        self.meta.m
    }

    pub fn delta_blocks(&self) -> Vec<BitVector> {
        (0..self.m())
            .map(|j| self.delta.slice(j * BLOCK_BITS, (j + 1) * BLOCK_BITS))
            .collect()
    }

    /// True iff `key` hashes to the stored digest.
    pub fn verify_key(&self, key: &SecretKey) -> bool {
        key.digest() == self.key_hash
    }

    pub fn to_json(&self) -> Result<String> {
        let r = CommitmentRecord {
            version: self.version,
            hash_alg: HASH_ALG.to_string(),
            key_hash_hex: hex::encode(self.key_hash),
            delta_hex: self.delta.to_hex(),
            q: self.meta.q,
            m: self.meta.m,
            perm_seed: self.meta.perm_seed,
            mask_seed: self.meta.mask_seed,
            kappa: self.meta.kappa,
            code_id: self.meta.code_id.clone(),
            decoder_params_id: self.meta.decoder_params_id.clone(),
        };
        Ok(serde_json::to_string_pretty(&r)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: CommitmentRecord = serde_json::from_str(text)?;
        if r.version != COMMITMENT_VERSION {
            return Err(Error::Version {
                found: r.version,
                expected: COMMITMENT_VERSION,
            });
        }
        if r.hash_alg != HASH_ALG {
            return Err(Error::Validation(format!("unsupported hash algorithm {:?}", r.hash_alg)));
        }
        let hash = hex::decode(&r.key_hash_hex).map_err(|e| Error::Parse(format!("key_hash_hex: {e}")))?;
        let key_hash: [u8; 32] = hash
            .try_into()
            .map_err(|_| Error::Parse("key_hash_hex must hold 32 bytes".into()))?;
        if r.m == 0 {
            return Err(Error::Validation("m must be at least 1".into()));
        }
        let delta = BitVector::from_hex(&r.delta_hex, r.m * BLOCK_BITS)?;
        Ok(Commitment {
            version: r.version,
            key_hash,
            delta,
            meta: CommitMeta {
                q: r.q,
                m: r.m,
                perm_seed: r.perm_seed,
                mask_seed: r.mask_seed,
                kappa: r.kappa,
                code_id: r.code_id,
                decoder_params_id: r.decoder_params_id,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn check_code(code: &LdpcCode) -> Result<()> {
    if code.n() != BLOCK_BITS || code.k() != SUBKEY_BITS {
        return Err(Error::Argument(format!(
            "commitments need a ({BLOCK_BITS}, {SUBKEY_BITS}) code, got ({}, {})",
            code.n(),
            code.k()
        )));
    }
    Ok(())
}

pub fn enroll(template: &BinaryTemplate, key: &SecretKey, code: &LdpcCode, meta: CommitMeta) -> Result<Commitment> {
    check_code(code)?;
    if template.stage != Stage::Masked {
        return Err(Error::Argument(format!("enrollment needs a masked template, got {:?}", template.stage)));
    }
    let m = meta.m;
    if template.m() != m || key.m() != m {
        return Err(Error::Argument(format!(
            "template m = {}, key m = {}, metadata m = {m}",
            template.m(),
            key.m()
        )));
    }
    let blocks = split_and_pad(&template.bits, m)?;
    let mut delta = BitVector::zeros(0);
    for (j, block) in blocks.iter().enumerate() {
        let sub = key.bits.slice(j * SUBKEY_BITS, (j + 1) * SUBKEY_BITS);
        delta.extend_from(&block.xor(&code.encode(&sub)?)?);
    }
    Ok(Commitment {
        version: COMMITMENT_VERSION,
        key_hash: key.digest(),
        delta,
        meta,
    })
}

/// Result of one retrieval attempt. A failed attempt carries no key bits.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalOutcome {
    pub success: bool,
    pub key: Option<SecretKey>,
    /// Decoder iterations spent on each block.
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
}

impl RetrievalOutcome {
    /// Whether the attempt had succeeded once every block had run at most
    /// `iteration` decoder iterations.
    pub fn success_by(&self, iteration: usize) -> bool {
        self.success && self.iterations.iter().all(|&i| i <= iteration)
    }

    /// Smallest iteration cap under which the attempt succeeds.
    pub fn success_iteration(&self) -> Option<usize> {
        self.success.then(|| self.iterations.iter().copied().max().unwrap_or(0))
    }
}

/// De-commits with a probe template. `probe_meta` describes how the probe
/// was produced; any mismatch with the enrolled metadata is refused rather
/// than reported as a failed match.
pub fn retrieve(
    probe: &BinaryTemplate,
    probe_meta: &CommitMeta,
    commitment: &Commitment,
    code: &LdpcCode,
    params: &DecoderParams,
    channel: ChannelConfig,
) -> Result<RetrievalOutcome> {
    check_code(code)?;
    if let Some(why) = commitment.meta.mismatch(probe_meta) {
        return Err(Error::Refused(why));
    }
    if probe.stage != Stage::Masked || probe.m() != commitment.m() {
        return Err(Error::Refused(format!(
            "probe is a {:?} template with m = {}, record has m = {}",
            probe.stage,
            probe.m(),
            commitment.m()
        )));
    }
    let blocks = split_and_pad(&probe.bits, commitment.m())?;
    let mut key_bits = BitVector::zeros(0);
    let mut iterations = Vec::with_capacity(blocks.len());
    let mut converged = Vec::with_capacity(blocks.len());
    for (block, delta) in blocks.iter().zip(commitment.delta_blocks()) {
        let noisy = block.xor(&delta)?;
        let res = decode(code.graph(), &init_llr(&noisy, channel), params, DecodeOptions::default())?;
        iterations.push(res.iterations_used);
        converged.push(res.converged);
        key_bits.extend_from(&code.extract(&res.bits)?);
    }
    let key = SecretKey::new(key_bits)?;
    let success = converged.iter().all(|&c| c) && commitment.verify_key(&key);
    Ok(RetrievalOutcome {
        success,
        key: success.then_some(key),
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::DEFAULT_DECODE_P;
    use crate::ldpc::LdpcCode;

    fn masked(bits: BitVector) -> BinaryTemplate {
        BinaryTemplate::new(bits, Stage::Masked).unwrap()
    }

    fn random_template(m: usize, seed: u64) -> BinaryTemplate {
        let mut rng = SplitMix64::new(seed);
        masked(BitVector::from_bools((0..512 * m).map(|_| rng.next_bool())))
    }

    fn setup(m: usize) -> (LdpcCode, DecoderParams, CommitMeta) {
        let code = LdpcCode::bg2();
        let params = DecoderParams::min_sum(50);
        let meta = CommitMeta::bare(m, &code, &params);
        (code, params, meta)
    }

    #[test]
    fn key_lengths() {
        assert_eq!(generate_key(3, KeySource::Test(1)).unwrap().bits().len(), 300);
        assert_eq!(generate_key(1, KeySource::Os).unwrap().bits().len(), 100);
        assert_eq!(generate_key(2, KeySource::Test(9)).unwrap(), generate_key(2, KeySource::Test(9)).unwrap());
        assert!(generate_key(0, KeySource::Test(1)).is_err());
    }

    #[test]
    fn split_pads_and_joins() {
        let ones = BitVector::ones(512);
        let blocks = split_and_pad(&ones, 1).unwrap();
        assert_eq!(blocks[0].count_ones(), 512);
        assert_eq!(blocks[0].slice(512, 520), BitVector::zeros(8));
        let t = random_template(3, 4).bits;
        let blocks = split_and_pad(&t, 3).unwrap();
        assert_eq!(blocks.len(), 3);
        assert!(blocks.iter().all(|b| b.len() == 520));
        assert_eq!(join_blocks(&blocks), t);
        assert!(split_and_pad(&t, 2).is_err());
    }

    #[test]
    fn delta_xor_template_is_codeword() {
        let (code, _, meta) = setup(3);
        let t = random_template(3, 1);
        let c = enroll(&t, &generate_key(3, KeySource::Test(2)).unwrap(), &code, meta).unwrap();
        for (block, d) in split_and_pad(&t.bits, 3).unwrap().iter().zip(c.delta_blocks()) {
            assert!(code.parity_check().is_codeword(&block.xor(&d).unwrap()).unwrap());
        }
    }

    #[test]
    fn zero_key_zero_template() {
        let (code, _, meta) = setup(1);
        let key = SecretKey::new(BitVector::zeros(100)).unwrap();
        let c = enroll(&masked(BitVector::zeros(512)), &key, &code, meta).unwrap();
        assert_eq!(c.delta, BitVector::zeros(520));
    }

    #[test]
    fn different_keys_give_different_records() {
        let (code, _, meta) = setup(2);
        let t = random_template(2, 3);
        let a = enroll(&t, &generate_key(2, KeySource::Test(1)).unwrap(), &code, meta.clone()).unwrap();
        let b = enroll(&t, &generate_key(2, KeySource::Test(2)).unwrap(), &code, meta).unwrap();
        assert_ne!(a.delta, b.delta);
        assert_ne!(a.key_hash, b.key_hash);
    }

    #[test]
    fn exact_probe_recovers_key() {
        let (code, params, meta) = setup(3);
        let t = random_template(3, 5);
        let key = generate_key(3, KeySource::Test(6)).unwrap();
        let c = enroll(&t, &key, &code, meta.clone()).unwrap();
        let ch = ChannelConfig::new(DEFAULT_DECODE_P).unwrap();
        let out = retrieve(&t, &meta, &c, &code, &params, ch).unwrap();
        assert!(out.success);
        assert_eq!(out.key.as_ref(), Some(&key));
        assert!(out.success_by(0));
    }

    #[test]
    fn one_bad_block_fails_the_whole_key() {
        let (code, params, meta) = setup(3);
        let t = random_template(3, 7);
        let key = generate_key(3, KeySource::Test(8)).unwrap();
        let c = enroll(&t, &key, &code, meta.clone()).unwrap();
        let mut probe = t.bits.clone();
        let mut rng = SplitMix64::new(9);
        for i in 512..1024 {
            if rng.next_f64() < 0.35 {
                probe.flip(i);
            }
        }
        let ch = ChannelConfig::default();
        let out = retrieve(&masked(probe), &meta, &c, &code, &params, ch).unwrap();
        assert!(!out.success);
        assert!(out.key.is_none());
        assert!(out.converged[0] && out.converged[2]);
    }

    #[test]
    fn hash_binds_every_key_bit() {
        let (code, _, meta) = setup(1);
        let key = generate_key(1, KeySource::Test(3)).unwrap();
        let c = enroll(&random_template(1, 2), &key, &code, meta).unwrap();
        assert!(c.verify_key(&key));
        for i in 0..100 {
            let mut bits = key.bits().clone();
            bits.flip(i);
            assert!(!c.verify_key(&SecretKey::new(bits).unwrap()));
        }
    }

    #[test]
    fn metadata_mismatch_is_refused() {
        let (code, params, meta) = setup(1);
        let t = random_template(1, 2);
        let c = enroll(&t, &generate_key(1, KeySource::Test(3)).unwrap(), &code, meta.clone()).unwrap();
        let other = CommitMeta { mask_seed: 77, ..meta };
        let err = retrieve(&t, &other, &c, &code, &params, ChannelConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Refused(_)));
    }

    #[test]
    fn record_round_trip_and_tamper() {
        let (code, _, meta) = setup(2);
        let c = enroll(&random_template(2, 1), &generate_key(2, KeySource::Test(1)).unwrap(), &code, meta).unwrap();
        let text = c.to_json().unwrap();
        assert!(text.contains("\"hash_alg\": \"sha-256\""));
        assert_eq!(Commitment::from_json(&text).unwrap(), c);
        let bumped = text.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(Commitment::from_json(&bumped), Err(Error::Version { .. })));
    }

    #[test]
    fn delta_popcount_looks_uniform() {
        // 1040 delta bits per record; 200 records under independent keys.
        // Mean popcount within 4 standard errors of 520.
        let (code, _, meta) = setup(2);
        let t = random_template(2, 11);
        let n = 200;
        let total: usize = (0..n)
            .map(|s| {
                let key = generate_key(2, KeySource::Test(1000 + s)).unwrap();
                enroll(&t, &key, &code, meta.clone()).unwrap().delta.count_ones()
            })
            .sum();
        let mean = total as f64 / n as f64;
        let se = (1040.0f64 * 0.25 / n as f64).sqrt();
        assert!((mean - 520.0).abs() < 4.0 * se, "mean popcount {mean}");
    }
}
