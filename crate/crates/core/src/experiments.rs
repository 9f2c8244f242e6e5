//! Trial drivers over synthetic populations, shared by the command line and
//! the test suites.

use rayon::prelude::*;

use crate::bits::BitVector;
use crate::commitment::{enroll, generate_key, retrieve, CommitMeta, KeySource, RetrievalOutcome};
use crate::decoder::{ChannelConfig, DecoderParams};
use crate::error::Result;
use crate::ldpc::LdpcCode;
use crate::pipeline::{BinaryTemplate, Stage};
use crate::prng::mix64;
use crate::simulation::{PairIndex, SynthPopulation};

/// Key seed of trial `i`; distinct per trial and per role within a trial.
fn key_seed(seed: u64, i: usize, role: u64) -> u64 {
    mix64(seed ^ mix64(((i as u64) << 1) | role))
}

fn masked(bits: &BitVector) -> Result<BinaryTemplate> {
    BinaryTemplate::new(bits.clone(), Stage::Masked)
}

/// Enrolls each pair's reference sample under a fresh test key and retrieves
/// with its probe sample. Outcomes are in pair order.
pub fn retrieval_trials(
    pop: &SynthPopulation,
    pairs: &[PairIndex],
    code: &LdpcCode,
    params: &DecoderParams,
    channel: ChannelConfig,
    seed: u64,
) -> Result<Vec<RetrievalOutcome>> {
    let m = pop.config.template_len / 512;
    let meta = CommitMeta::bare(m, code, params);
    pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let key = generate_key(m, KeySource::Test(key_seed(seed, i, 0)))?;
            let c = enroll(&masked(pop.get(p.reference))?, &key, code, meta.clone())?;
            retrieve(&masked(pop.get(p.probe))?, &meta, &c, code, params, channel)
        })
        .collect()
}

/// Fractional Hamming distance of each pair.
pub fn pair_distances(pop: &SynthPopulation, pairs: &[PairIndex]) -> Result<Vec<f64>> {
    let len = pop.config.template_len as f64;
    pairs
        .iter()
        .map(|p| Ok(pop.get(p.reference).hamming(pop.get(p.probe))? as f64 / len))
        .collect()
}

/// Enrolls both sides of each pair under independent keys and scores the
/// pair by the fractional Hamming distance between the two stored deltas.
pub fn linkage_scores(pop: &SynthPopulation, pairs: &[PairIndex], code: &LdpcCode, seed: u64) -> Result<Vec<f64>> {
    let m = pop.config.template_len / 512;
    let meta = CommitMeta::bare(m, code, &DecoderParams::min_sum(0));
    pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let ka = generate_key(m, KeySource::Test(key_seed(seed, i, 0)))?;
            let kb = generate_key(m, KeySource::Test(key_seed(seed, i, 1)))?;
            let a = enroll(&masked(pop.get(p.reference))?, &ka, code, meta.clone())?;
            let b = enroll(&masked(pop.get(p.probe))?, &kb, code, meta.clone())?;
            Ok(a.delta.hamming(&b.delta)? as f64 / a.delta.len() as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::SynthConfig;

    #[test]
    fn mated_trials_succeed_at_low_noise() {
        let pop = SynthPopulation::generate(SynthConfig {
            subjects: 10,
            samples_per_subject: 2,
            template_len: 1024,
            p_mated: 0.02,
            p_non_mated: 0.3,
            seed: 4,
        })
        .unwrap();
        let code = LdpcCode::bg2();
        let params = DecoderParams::min_sum(30);
        let out = retrieval_trials(&pop, &pop.mated_pairs(10).unwrap(), &code, &params, ChannelConfig::default(), 1).unwrap();
        assert!(out.iter().all(|o| o.success));
        let nm = retrieval_trials(&pop, &pop.non_mated_pairs(10).unwrap(), &code, &params, ChannelConfig::default(), 1).unwrap();
        assert!(nm.iter().all(|o| !o.success && o.key.is_none()));
    }
}
