use keybind::commitment::{enroll, generate_key, retrieve, CommitMeta, Commitment, KeySource};
use keybind::decoder::{ChannelConfig, DecoderParams};
use keybind::ldpc::LdpcCode;
use keybind::pipeline::{fit_quantizer, inter_class_pairs, search_kappa, FeatureVector, Pipeline, PipelineConfig};
use keybind::simulation::synth_embeddings;
use proptest::prelude::*;

/// Calibrated pipeline over 60 synthetic subjects with two samples each.
fn calibrated() -> (Pipeline, Vec<FeatureVector>) {
    let data = synth_embeddings(60, 2, 0.3, 12);
    let feats: Vec<FeatureVector> = data.iter().map(|(_, v)| v.clone()).collect();
    let labels: Vec<String> = data.iter().map(|(s, _)| s.clone()).collect();
    let table = fit_quantizer(&feats, 4).unwrap();
    let base = Pipeline::new(PipelineConfig::new(4, 3, 2, 0.0, 0.235, 0.95).unwrap(), table.clone()).unwrap();
    let pairs: Vec<_> = inter_class_pairs(&labels, 5000, 1)
        .into_iter()
        .map(|(a, b)| (base.permuted(&feats[a]).unwrap(), base.permuted(&feats[b]).unwrap()))
        .collect();
    let k = search_kappa(&pairs, 0.235, 0.95, 2).unwrap();
    let cfg = PipelineConfig::new(4, 3, 2, k.kappa, 0.235, 0.95).unwrap();
    (Pipeline::new(cfg, table).unwrap(), feats)
}

#[test]
fn embeddings_to_key_and_back() {
    let (pipe, feats) = calibrated();
    let code = LdpcCode::bg2();
    let params = DecoderParams::min_sum(100);
    let meta = CommitMeta::from_pipeline(&pipe.config, &code, &params);
    let key = generate_key(3, KeySource::Test(1)).unwrap();
    let record = enroll(&pipe.transform(&feats[0]).unwrap(), &key, &code, meta.clone()).unwrap();
    let record = Commitment::from_json(&record.to_json().unwrap()).unwrap();

    let probe = |i: usize| {
        retrieve(&pipe.transform(&feats[i]).unwrap(), &meta, &record, &code, &params, ChannelConfig::default()).unwrap()
    };
    let mated = probe(1);
    assert!(mated.success);
    assert_eq!(mated.key, Some(key));
    let other = probe(2);
    assert!(!other.success && other.key.is_none());
}

#[test]
fn mismatched_pipeline_is_refused() {
    let (pipe, feats) = calibrated();
    let code = LdpcCode::bg2();
    let params = DecoderParams::min_sum(20);
    let meta = CommitMeta::from_pipeline(&pipe.config, &code, &params);
    let key = generate_key(3, KeySource::Test(2)).unwrap();
    let record = enroll(&pipe.transform(&feats[0]).unwrap(), &key, &code, meta.clone()).unwrap();
    let mut other = meta.clone();
    other.mask_seed += 1;
    let err = retrieve(&pipe.transform(&feats[0]).unwrap(), &other, &record, &code, &params, ChannelConfig::default());
    assert!(matches!(err, Err(keybind::Error::Refused(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn identical_template_always_recovers_key(seed in any::<u64>(), m in 1usize..4) {
        let code = LdpcCode::bg2();
        let params = DecoderParams::min_sum(10);
        let meta = CommitMeta::bare(m, &code, &params);
        let bits = keybind::BitVector::from_bools((0..512 * m).map(|i| (seed >> (i % 64)) & 1 == 1));
        let t = keybind::pipeline::BinaryTemplate::new(bits, keybind::pipeline::Stage::Masked).unwrap();
        let key = generate_key(m, KeySource::Test(seed)).unwrap();
        let c = enroll(&t, &key, &code, meta.clone()).unwrap();
        let out = retrieve(&t, &meta, &c, &code, &params, ChannelConfig::default()).unwrap();
        prop_assert!(out.success);
        prop_assert_eq!(out.iterations, vec![0; m]);
        prop_assert_eq!(out.key, Some(key));
    }
}
