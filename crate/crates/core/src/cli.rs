//! Batch command line. Every setting lives in [`RunConfig`]; values come from
//! built-in defaults, then an optional JSON file (`--config`), then flags.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commitment::{enroll, generate_key, retrieve, CommitMeta, Commitment, KeySource};
use crate::decoder::{
    train_greedy_with, ChannelConfig, DecoderParams, ParamMode, TrainConfig, Variant, DEFAULT_DECODE_P,
};
use crate::error::{Error, Result};
use crate::experiments::{linkage_scores, pair_distances, retrieval_trials};
use crate::ldpc::{lift, load_base_graph, LdpcCode, BG2_LIFTING};
use crate::metrics::{
    decidability, gmr_fmr, unlinkability, EntropyReport, MetricsSummary, ScoreStats, SecurityReport, DEFAULT_BINS,
};
use crate::pipeline::{
    fit_quantizer, inter_class_pairs, read_embeddings, search_kappa, FeatureVector, Pipeline, PipelineConfig,
    QuantizerTable,
};
use crate::simulation::{monte_carlo_fer, synth_embeddings, SynthConfig, SynthPopulation};

pub const QUANTIZER_FILE: &str = "quantizer.json";
pub const PIPELINE_FILE: &str = "pipeline.json";

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "keybind", version, about = "LDPC key binding for binarized face templates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Lift a base graph and write the alist and generator files.
    BuildCode,
    /// Frame error rate sweep over a BSC.
    Fer,
    /// Greedy training of the neural min-sum decoder.
    Train,
    /// Fit the quantizer and search the masking rate.
    Calibrate,
    /// Bind a key to one embedding.
    Enroll,
    /// Retrieve the key with a probe embedding.
    Verify,
    /// GMR/FMR and decidability over a population.
    Eval,
    /// Linkability of commitments from the same subjects.
    Unlink,
    /// Brute-force strength of the key binding.
    Security,
    /// Emit a synthetic template population.
    Synth,
}

#[derive(Debug, Clone, Default, clap::Args)]
struct Flags {
    /// JSON run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Code directory written by build-code (default: bundled BG2, z = 10).
    #[arg(long, global = true)]
    code: Option<PathBuf>,
    #[arg(long, global = true)]
    base_graph: Option<PathBuf>,
    #[arg(long, global = true)]
    z: Option<usize>,
    /// sp, ms, nms, oms or neural-ms.
    #[arg(long, global = true)]
    decoder: Option<String>,
    /// Decoder parameter file; overrides --decoder.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    iters: Option<usize>,
    /// Channel crossover rate assumed by the decoder.
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    #[arg(long, global = true)]
    frames: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    q: Option<usize>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    kappa_quantile: Option<f64>,
    #[arg(long, global = true)]
    mask_seed: Option<u64>,
    #[arg(long, global = true)]
    perm_seed: Option<u64>,
    #[arg(long, global = true)]
    max_pairs: Option<usize>,
    #[arg(long, global = true)]
    m: Option<usize>,

    /// Embedding CSV.
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    row: Option<usize>,
    /// Directory written by calibrate.
    #[arg(long, global = true)]
    pipeline: Option<PathBuf>,
    #[arg(long, global = true)]
    commitment: Option<PathBuf>,
    /// Population file written by synth.
    #[arg(long, global = true)]
    population: Option<PathBuf>,
    #[arg(long, global = true)]
    test_key_seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    subjects: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    p_mated: Option<f64>,
    #[arg(long, global = true)]
    p_non_mated: Option<f64>,
    #[arg(long, global = true)]
    noise: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    bins: Option<usize>,
    #[arg(long, global = true)]
    omega: Option<f64>,

    #[arg(long, global = true)]
    h: Option<f64>,
    #[arg(long, global = true)]
    e_hd: Option<f64>,
    #[arg(long, global = true)]
    v_hd: Option<f64>,
    /// Tolerated error bits; defaults to round(t_frac * H).
    #[arg(long, global = true)]
    t: Option<usize>,
    #[arg(long, global = true)]
    t_frac: Option<f64>,

    #[arg(long, global = true)]
    p_min: Option<f64>,
    #[arg(long, global = true)]
    p_max: Option<f64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    batch: Option<usize>,
    #[arg(long, global = true)]
    train_frames: Option<usize>,
    #[arg(long, global = true)]
    step_size: Option<f64>,
    #[arg(long, global = true)]
    momentum: Option<f64>,
    /// shared or per-edge.
    #[arg(long, global = true)]
    param_mode: Option<String>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub code: Option<PathBuf>,
    pub base_graph: Option<PathBuf>,
    pub z: usize,
    pub decoder: String,
    pub params: Option<PathBuf>,
    pub alpha: f64,
    pub beta: f64,
    pub iters: usize,
    pub p: f64,
    pub p_grid: Vec<f64>,
    pub frames: u64,
    pub seed: u64,

    pub q: usize,
    pub tau: f64,
    pub kappa_quantile: f64,
    pub mask_seed: u64,
    pub perm_seed: u64,
    pub max_pairs: usize,
    pub m: Option<usize>,

    pub embeddings: Option<PathBuf>,
    pub row: usize,
    pub pipeline: Option<PathBuf>,
    pub commitment: Option<PathBuf>,
    pub population: Option<PathBuf>,
    pub test_key_seed: Option<u64>,
    pub out: Option<PathBuf>,

    pub subjects: usize,
    pub samples: usize,
    pub p_mated: f64,
    pub p_non_mated: f64,
    pub noise: f64,
    pub trials: usize,
    pub bins: usize,
    pub omega: f64,

    pub h: Option<f64>,
    pub e_hd: Option<f64>,
    pub v_hd: Option<f64>,
    pub t: Option<usize>,
    pub t_frac: f64,

    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            code: None,
            base_graph: None,
            z: BG2_LIFTING,
            decoder: Variant::MinSum.id().to_string(),
            params: None,
            alpha: 0.8,
            beta: 0.15,
            iters: 100,
            p: DEFAULT_DECODE_P,
            p_grid: vec![0.14, 0.15, 0.155, 0.16, 0.17, 0.1762, 0.18, 0.1852, 0.19],
            frames: 10_000,
            seed: 1,
            q: 4,
            tau: 0.235,
            kappa_quantile: 0.95,
            mask_seed: 2,
            perm_seed: 3,
            max_pairs: 20_000,
            m: None,
            embeddings: None,
            row: 0,
            pipeline: None,
            commitment: None,
            population: None,
            test_key_seed: None,
            out: None,
            subjects: 1000,
            samples: 4,
            p_mated: 0.156,
            p_non_mated: 0.26,
            noise: 0.5,
            trials: 3000,
            bins: DEFAULT_BINS,
            omega: 1.0,
            h: None,
            e_hd: None,
            v_hd: None,
            t: None,
            t_frac: 0.1761,
            train: TrainConfig::default(),
        }
    }
}

macro_rules! overlay {
    ($cfg:expr, $flags:expr; $($f:ident),*) => {
        $(if let Some(v) = $flags.$f.clone() { $cfg.$f = v; })*
    };
}

macro_rules! overlay_opt {
    ($cfg:expr, $flags:expr; $($f:ident),*) => {
        $(if let Some(v) = $flags.$f.clone() { $cfg.$f = Some(v); })*
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    fn resolve(flags: &Flags) -> Result<Self> {
        let mut cfg = match &flags.config {
            Some(path) => Self::from_json(&read(path)?)?,
            None => Self::default(),
        };
        overlay!(cfg, flags; z, decoder, alpha, beta, iters, p, p_grid, frames, seed, q, tau,
            kappa_quantile, mask_seed, perm_seed, max_pairs, row, subjects, samples, p_mated,
            p_non_mated, noise, trials, bins, omega, t_frac);
        overlay_opt!(cfg, flags; code, base_graph, params, m, embeddings, pipeline, commitment,
            population, test_key_seed, out, h, e_hd, v_hd, t);
        let tr = &mut cfg.train;
        if let Some(v) = flags.p_min {
            tr.p_min = v;
        }
        if let Some(v) = flags.p_max {
            tr.p_max = v;
        }
        if let Some(v) = flags.epochs {
            tr.epochs_per_layer = v;
        }
        if let Some(v) = flags.batch {
            tr.batch_size = v;
        }
        if let Some(v) = flags.train_frames {
            tr.frames_per_epoch = v;
        }
        if let Some(v) = flags.step_size {
            tr.step_size = v;
        }
        if let Some(v) = flags.momentum {
            tr.momentum = v;
        }
        if let Some(v) = &flags.param_mode {
            tr.mode = v.parse::<ParamMode>()?;
        }
        // One seed and iteration cap per run.
        tr.seed = cfg.seed;
        tr.iterations = cfg.iters;
        tr.llr_p = cfg.p;
        Ok(cfg)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))
}

/// Writes `text` to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Input paths must exist; reports which one does not.
fn input(path: &Path) -> Result<&Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::Argument(format!("no such file or directory: {}", path.display())))
    }
}

fn require<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::Argument(format!("--{flag} is required")))
}

fn load_code(cfg: &RunConfig) -> Result<LdpcCode> {
    match &cfg.code {
        Some(dir) => LdpcCode::load_dir(input(dir)?),
        None => Ok(LdpcCode::bg2()),
    }
}

fn load_decoder(cfg: &RunConfig, code: &LdpcCode) -> Result<DecoderParams> {
    if let Some(path) = &cfg.params {
        let params = DecoderParams::load(input(path)?)?;
        return if params.iterations() == cfg.iters {
            Ok(params)
        } else {
            params.with_iterations(cfg.iters)
        };
    }
    let it = cfg.iters;
    match cfg.decoder.parse::<Variant>()? {
        Variant::SumProduct => Ok(DecoderParams::sum_product(it)),
        Variant::MinSum => Ok(DecoderParams::min_sum(it)),
        Variant::NormalizedMinSum => DecoderParams::normalized(it, cfg.alpha),
        Variant::OffsetMinSum => DecoderParams::offset(it, cfg.beta),
        Variant::NeuralMinSum => {
            eprintln!("warning: untrained neural-ms, using identity weights");
            Ok(DecoderParams::neural_identity(it, ParamMode::Shared, code.graph().edge_count()))
        }
    }
}

fn channel(cfg: &RunConfig) -> Result<ChannelConfig> {
    ChannelConfig::new(cfg.p)
}

/// Drops repeated crossover rates, keeping first occurrences in order.
pub fn dedup_grid(grid: &[f64]) -> (Vec<f64>, usize) {
    let mut out: Vec<f64> = Vec::with_capacity(grid.len());
    for &p in grid {
        if !out.iter().any(|q| q.to_bits() == p.to_bits()) {
            out.push(p);
        }
    }
    let dropped = grid.len() - out.len();
    (out, dropped)
}

fn population(cfg: &RunConfig) -> Result<SynthPopulation> {
    if let Some(path) = &cfg.population {
        let pop = SynthPopulation::from_csv(&read(path)?, cfg.seed)?;
        if let Some(m) = cfg.m {
            if pop.config.template_len != 512 * m {
                return Err(Error::Argument(format!(
                    "population templates have {} bits, --m {m} needs {}",
                    pop.config.template_len,
                    512 * m
                )));
            }
        }
        return Ok(pop);
    }
    SynthPopulation::generate(SynthConfig {
        subjects: cfg.subjects,
        samples_per_subject: cfg.samples,
        template_len: 512 * cfg.m.unwrap_or(3),
        p_mated: cfg.p_mated,
        p_non_mated: cfg.p_non_mated,
        seed: cfg.seed,
    })
}

fn embeddings(cfg: &RunConfig) -> Result<Vec<(String, FeatureVector)>> {
    match &cfg.embeddings {
        Some(path) => read_embeddings(input(path)?)?
            .into_iter()
            .enumerate()
            .map(|(i, e)| Ok((e.subject.unwrap_or_else(|| format!("row{i}")), e.features)))
            .collect(),
        None => Ok(synth_embeddings(cfg.subjects, cfg.samples, cfg.noise, cfg.seed)),
    }
}

fn load_pipeline(cfg: &RunConfig) -> Result<Pipeline> {
    let dir = input(require(&cfg.pipeline, "pipeline")?)?;
    let pc = PipelineConfig::load(input(&dir.join(PIPELINE_FILE))?)?;
    let table = QuantizerTable::load(input(&dir.join(QUANTIZER_FILE))?)?;
    if let Some(m) = cfg.m {
        if m != pc.m {
            return Err(Error::Argument(format!("--m {m} does not match q = {}", pc.q)));
        }
    }
    Pipeline::new(pc, table)
}

fn probe_features(cfg: &RunConfig) -> Result<FeatureVector> {
    let path = require(&cfg.embeddings, "embeddings")?;
    let rows = read_embeddings(input(path)?)?;
    let n = rows.len();
    rows.into_iter()
        .nth(cfg.row)
        .map(|e| e.features)
        .ok_or_else(|| Error::Argument(format!("row {} out of range ({n} rows)", cfg.row)))
}

fn cmd_build_code(cfg: &RunConfig) -> Result<i32> {
    let code = match &cfg.base_graph {
        Some(path) => {
            let bg = load_base_graph(input(path)?)?;
            let id = format!("bg-ils{}-z{}", bg.lifting_set_id, cfg.z);
            LdpcCode::from_parity_check(id, lift(&bg, cfg.z)?)?
        }
        None => LdpcCode::bg2_lifted(cfg.z)?,
    };
    if let Some(dir) = &cfg.out {
        code.save_dir(dir)?;
    }
    println!("n={} k={} edges={}", code.n(), code.k(), code.graph().edge_count());
    Ok(EXIT_OK)
}

fn cmd_fer(cfg: &RunConfig) -> Result<i32> {
    let code = load_code(cfg)?;
    let params = load_decoder(cfg, &code)?;
    let (grid, dropped) = dedup_grid(&cfg.p_grid);
    if dropped > 0 {
        eprintln!("warning: dropped {dropped} duplicate crossover rate(s)");
    }
    eprintln!("fer: {} {} points x {} frames", params.variant().id(), grid.len(), cfg.frames);
    let report = monte_carlo_fer(&code, &params, &grid, cfg.frames, cfg.seed, channel(cfg)?)?;
    emit(cfg.out.as_deref(), &report.to_csv())?;
    Ok(EXIT_OK)
}

fn cmd_train(cfg: &RunConfig) -> Result<i32> {
    let code = load_code(cfg)?;
    let params = train_greedy_with(&code, &cfg.train, |r| {
        eprintln!(
            "layer {:3} epoch {:2} loss {:.6} alpha {:.4} beta {:.4}",
            r.layer, r.epoch, r.loss, r.alpha, r.beta
        );
    })?;
    emit(cfg.out.as_deref(), &params.to_text())?;
    Ok(EXIT_OK)
}

fn cmd_calibrate(cfg: &RunConfig) -> Result<i32> {
    let out = require(&cfg.out, "out")?;
    let data = embeddings(cfg)?;
    let features: Vec<FeatureVector> = data.iter().map(|(_, v)| v.clone()).collect();
    let labels: Vec<String> = data.iter().map(|(s, _)| s.clone()).collect();
    let table = fit_quantizer(&features, cfg.q)?;
    let base = PipelineConfig::new(cfg.q, cfg.perm_seed, cfg.mask_seed, 0.0, cfg.tau, cfg.kappa_quantile)?;
    let pipe = Pipeline::new(base, table.clone())?;
    let templates = features.par_iter().map(|v| pipe.permuted(v)).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<_> = inter_class_pairs(&labels, cfg.max_pairs, cfg.seed)
        .into_iter()
        .map(|(a, b)| (templates[a].clone(), templates[b].clone()))
        .collect();
    eprintln!("calibrate: {} embeddings, {} inter-class pairs", features.len(), pairs.len());
    let found = search_kappa(&pairs, cfg.tau, cfg.kappa_quantile, cfg.mask_seed)?;
    let pc = PipelineConfig::new(cfg.q, cfg.perm_seed, cfg.mask_seed, found.kappa, cfg.tau, cfg.kappa_quantile)?;
    std::fs::create_dir_all(out)?;
    table.save(out.join(QUANTIZER_FILE))?;
    pc.save(out.join(PIPELINE_FILE))?;
    println!(
        "kappa={:.6} achieved={:.6} percentile={:.6}",
        found.kappa, found.achieved, found.percentile
    );
    Ok(EXIT_OK)
}

fn cmd_enroll(cfg: &RunConfig) -> Result<i32> {
    let code = load_code(cfg)?;
    let params = load_decoder(cfg, &code)?;
    let pipe = load_pipeline(cfg)?;
    let template = pipe.transform(&probe_features(cfg)?)?;
    let source = match cfg.test_key_seed {
        Some(seed) => KeySource::Test(seed),
        None => KeySource::Os,
    };
    let key = generate_key(template.m(), source)?;
    let meta = CommitMeta::from_pipeline(&pipe.config, &code, &params);
    let c = enroll(&template, &key, &code, meta)?;
    emit(cfg.out.as_deref(), &c.to_json()?)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyReport {
    success: bool,
    iterations: Vec<usize>,
    converged: Vec<bool>,
}

fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let code = load_code(cfg)?;
    let params = load_decoder(cfg, &code)?;
    let pipe = load_pipeline(cfg)?;
    let c = Commitment::load(input(require(&cfg.commitment, "commitment")?)?)?;
    let probe = pipe.transform(&probe_features(cfg)?)?;
    let meta = CommitMeta::from_pipeline(&pipe.config, &code, &params);
    let outcome = retrieve(&probe, &meta, &c, &code, &params, channel(cfg)?)?;
    let report = VerifyReport {
        success: outcome.success,
        iterations: outcome.iterations.clone(),
        converged: outcome.converged.clone(),
    };
    emit(cfg.out.as_deref(), &(serde_json::to_string(&report)? + "\n"))?;
    Ok(if outcome.success { EXIT_OK } else { EXIT_REJECT })
}

#[derive(Serialize)]
struct EvalReport {
    gmr: f64,
    fmr: f64,
    gmr_at_zero_fmr: f64,
    mated_trials: usize,
    non_mated_trials: usize,
    d_prime: f64,
}

fn cmd_eval(cfg: &RunConfig) -> Result<i32> {
    let code = load_code(cfg)?;
    let params = load_decoder(cfg, &code)?;
    let pop = population(cfg)?;
    let mated = pop.mated_pairs(cfg.trials)?;
    let non_mated = pop.non_mated_pairs(cfg.trials)?;
    eprintln!("eval: {} + {} trials, {}", mated.len(), non_mated.len(), params.variant().id());
    let ch = channel(cfg)?;
    let succ = |pairs, seed| -> Result<Vec<Option<usize>>> {
        Ok(retrieval_trials(&pop, pairs, &code, &params, ch, seed)?
            .iter()
            .map(|o| o.success_iteration())
            .collect())
    };
    let sm = succ(&mated, cfg.seed)?;
    let snm = succ(&non_mated, cfg.seed ^ 1)?;
    let curve = gmr_fmr(&sm, &snm, params.iterations())?;
    let stats = ScoreStats::new(pair_distances(&pop, &mated)?, pair_distances(&pop, &non_mated)?)?;
    let d_prime = decidability(&stats)?;
    let report = EvalReport {
        gmr: curve.gmr.last().copied().unwrap_or(0.0),
        fmr: curve.fmr.last().copied().unwrap_or(0.0),
        gmr_at_zero_fmr: curve.gmr_at_zero_fmr,
        mated_trials: curve.mated_trials,
        non_mated_trials: curve.non_mated_trials,
        d_prime,
    };
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("gmr_fmr.csv"), curve.to_csv())?;
        let summary = MetricsSummary {
            d_prime: Some(d_prime),
            ..Default::default()
        };
        std::fs::write(dir.join("summary.json"), summary.to_json()?)?;
    }
    println!("{}", serde_json::to_string(&report)?);
    Ok(EXIT_OK)
}

fn cmd_unlink(cfg: &RunConfig) -> Result<i32> {
    let code = load_code(cfg)?;
    let pop = population(cfg)?;
    let mated = pop.mated_pairs(cfg.trials)?;
    let non_mated = pop.non_mated_pairs(cfg.trials)?;
    let sm = linkage_scores(&pop, &mated, &code, cfg.seed)?;
    let snm = linkage_scores(&pop, &non_mated, &code, cfg.seed ^ 1)?;
    let report = unlinkability(&sm, &snm, cfg.bins, cfg.omega)?;
    let summary = MetricsSummary {
        d_sys: Some(report.d_sys),
        ..Default::default()
    };
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("linkability.csv"), report.to_csv())?;
        std::fs::write(dir.join("summary.json"), summary.to_json()?)?;
    }
    print!("{}", summary.to_json()?);
    Ok(EXIT_OK)
}

fn cmd_security(cfg: &RunConfig) -> Result<i32> {
    let (h, dof) = match (cfg.h, cfg.e_hd, cfg.v_hd) {
        (Some(h), _, _) => (h, None),
        (None, Some(e), Some(v)) => {
            let d = crate::metrics::dof(e, v)?;
            (crate::metrics::entropy_iid(d, e)?, Some(d))
        }
        _ => {
            let pop = population(cfg)?;
            let pairs = pop.non_mated_pairs(cfg.trials)?;
            let r = EntropyReport::from_scores(&pair_distances(&pop, &pairs)?)?;
            (r.h, Some(r.dof))
        }
    };
    let t = cfg.t.unwrap_or((cfg.t_frac * h).round() as usize);
    let sec = SecurityReport::new(h, t, cfg.m.unwrap_or(3))?;
    let summary = MetricsSummary {
        dof,
        h: Some(sec.h),
        s_sphere: Some(sec.s_sphere),
        s_gv: Some(sec.s_gv),
        h_sys: Some(sec.h_sys),
        ..Default::default()
    };
    emit(cfg.out.as_deref(), &summary.to_json()?)?;
    Ok(EXIT_OK)
}

fn cmd_synth(cfg: &RunConfig) -> Result<i32> {
    let pop = population(&RunConfig {
        population: None,
        ..cfg.clone()
    })?;
    emit(cfg.out.as_deref(), &pop.to_csv())?;
    Ok(EXIT_OK)
}

fn dispatch(command: Command, cfg: &RunConfig) -> Result<i32> {
    match command {
        Command::BuildCode => cmd_build_code(cfg),
        Command::Fer => cmd_fer(cfg),
        Command::Train => cmd_train(cfg),
        Command::Calibrate => cmd_calibrate(cfg),
        Command::Enroll => cmd_enroll(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Eval => cmd_eval(cfg),
        Command::Unlink => cmd_unlink(cfg),
        Command::Security => cmd_security(cfg),
        Command::Synth => cmd_synth(cfg),
    }
}

/// Exit status for an error: bad input is a usage error, the rest internal.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_)
        | Error::ParseLine { .. }
        | Error::Validation(_)
        | Error::Argument(_)
        | Error::Version { .. }
        | Error::Unreachable { .. }
        | Error::Refused(_)
        | Error::Io(_)
        | Error::Json(_) => EXIT_USAGE,
        Error::RankDeficient { .. } | Error::Divergence { .. } | Error::Undefined(_) | Error::Entropy(_) => {
            EXIT_INTERNAL
        }
    }
}

/// Runs one command line and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = RunConfig::resolve(&cli.flags).and_then(|cfg| {
        if cli.flags.dump_config {
            print!("{}", cfg.to_json()?);
            return Ok(EXIT_OK);
        }
        match cli.flags.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Argument(format!("thread pool: {e}")))?
                .install(|| dispatch(cli.command, &cfg)),
            None => dispatch(cli.command, &cfg),
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
