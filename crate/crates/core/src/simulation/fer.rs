use std::fmt::Write as _;
use std::ops::Range;

use rayon::prelude::*;

use crate::bits::BitVector;
use crate::decoder::{decode, init_llr, ChannelConfig, DecodeOptions, DecoderParams};
use crate::error::Result;
use crate::ldpc::LdpcCode;
use crate::prng::SplitMix64;

use super::bsc::flip_with;

#[derive(Debug, Clone, PartialEq)]
pub struct FerPoint {
    pub p: f64,
    pub frames: u64,
    pub errors: u64,
}

impl FerPoint {
    pub fn fer(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.errors as f64 / self.frames as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FerReport {
    pub decoder: String,
    pub iterations: usize,
    pub seed: u64,
    pub points: Vec<FerPoint>,
}

impl FerReport {
    pub const CSV_HEADER: &'static str = "decoder,p,frames,errors,fer,iterations,seed";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for pt in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.6},{},{}",
                self.decoder,
                pt.p,
                pt.frames,
                pt.errors,
                pt.fer(),
                self.iterations,
                self.seed
            );
        }
        s
    }
}

/// Frame `f` draws its message and its channel noise from stream `f` of
/// `seed`. The stream does not depend on `p`, so a frame sees nested flip
/// patterns across a sweep.
fn run_frame(
    code: &LdpcCode,
    params: &DecoderParams,
    p: f64,
    llr_ch: ChannelConfig,
    seed: u64,
    frame: u64,
) -> Result<bool> {
    let mut rng = SplitMix64::stream(seed, frame);
    let msg = BitVector::from_bools((0..code.k()).map(|_| rng.next_bool()));
    let cw = code.encode(&msg)?;
    let rx = flip_with(&cw, p, &mut rng);
    let res = decode(code.graph(), &init_llr(&rx, llr_ch), params, DecodeOptions::default())?;
    Ok(code.extract(&res.bits)? != msg)
}

/// Counts frame errors over `frames` (global frame indices) at one crossover rate.
pub fn fer_point(
    code: &LdpcCode,
    params: &DecoderParams,
    p: f64,
    frames: Range<u64>,
    seed: u64,
    llr_ch: ChannelConfig,
) -> Result<FerPoint> {
    let total = frames.end.saturating_sub(frames.start);
    let errors = frames
        .into_par_iter()
        .map(|f| run_frame(code, params, p, llr_ch, seed, f).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(FerPoint {
        p,
        frames: total,
        errors,
    })
}

/// Frame error rate at each crossover rate in `ps`, `frames` frames per point.
pub fn monte_carlo_fer(
    code: &LdpcCode,
    params: &DecoderParams,
    ps: &[f64],
    frames: u64,
    seed: u64,
    llr_ch: ChannelConfig,
) -> Result<FerReport> {
    let points = ps
        .iter()
        .map(|&p| fer_point(code, params, p, 0..frames, seed, llr_ch))
        .collect::<Result<Vec<_>>>()?;
    Ok(FerReport {
        decoder: params.variant().id().to_string(),
        iterations: params.iterations(),
        seed,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_channel_has_no_errors() {
        let code = LdpcCode::bg2();
        let r = monte_carlo_fer(&code, &DecoderParams::min_sum(10), &[0.0], 200, 3, ChannelConfig::default()).unwrap();
        assert_eq!(r.points[0].errors, 0);
        assert!(r.to_csv().starts_with("decoder,p,frames,errors,fer,iterations,seed\nms,0,200,0,0.000000,10,3\n"));
    }

    #[test]
    fn halves_pool_to_full_run() {
        let code = LdpcCode::bg2();
        let params = DecoderParams::min_sum(20);
        let ch = ChannelConfig::default();
        let full = fer_point(&code, &params, 0.15, 0..400, 11, ch).unwrap();
        let a = fer_point(&code, &params, 0.15, 0..200, 11, ch).unwrap();
        let b = fer_point(&code, &params, 0.15, 200..400, 11, ch).unwrap();
        assert_eq!(a.errors + b.errors, full.errors);
        assert_eq!(a.frames + b.frames, full.frames);
    }

    #[test]
    fn deterministic_under_thread_counts() {
        let code = LdpcCode::bg2();
        let params = DecoderParams::min_sum(20);
        let ch = ChannelConfig::default();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| monte_carlo_fer(&code, &params, &[0.14, 0.16], 300, 5, ch)).unwrap();
        let b = four.install(|| monte_carlo_fer(&code, &params, &[0.14, 0.16], 300, 5, ch)).unwrap();
        assert_eq!(a, b);
    }
}
