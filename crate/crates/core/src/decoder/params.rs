use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const PARAMS_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    SumProduct,
    MinSum,
    NormalizedMinSum,
    OffsetMinSum,
    NeuralMinSum,
}

impl Variant {
    pub fn id(self) -> &'static str {
        match self {
            Variant::SumProduct => "sp",
            Variant::MinSum => "ms",
            Variant::NormalizedMinSum => "nms",
            Variant::OffsetMinSum => "oms",
            Variant::NeuralMinSum => "neural-ms",
        }
    }

    fn parameterized(self) -> bool {
        !matches!(self, Variant::SumProduct | Variant::MinSum)
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sp" | "sum-product" => Variant::SumProduct,
            "ms" | "min-sum" => Variant::MinSum,
            "nms" => Variant::NormalizedMinSum,
            "oms" => Variant::OffsetMinSum,
            "neural-ms" | "neuralms" | "neural" => Variant::NeuralMinSum,
            other => return Err(Error::Argument(format!("unknown decoder variant {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamMode {
    /// One (alpha, beta) pair per iteration.
    Shared,
    /// One (alpha, beta) pair per iteration and Tanner edge.
    PerEdge,
}

impl ParamMode {
    pub fn id(self) -> &'static str {
        match self {
            ParamMode::Shared => "shared",
            ParamMode::PerEdge => "per-edge",
        }
    }
}

impl FromStr for ParamMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared" => Ok(ParamMode::Shared),
            "per-edge" => Ok(ParamMode::PerEdge),
            other => Err(Error::Argument(format!("unknown parameter mode {other:?}"))),
        }
    }
}

/// Decoder choice plus its per-iteration normalizing (`alpha`) and offset
/// (`beta`) factors.
///
/// Shared mode stores `iterations` values per array; per-edge mode stores
/// `iterations * edges`, iteration-major. SP and MS carry empty arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderParams {
    variant: Variant,
    mode: ParamMode,
    iterations: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl DecoderParams {
    pub fn sum_product(iterations: usize) -> Self {
        Self::plain(Variant::SumProduct, iterations)
    }

    pub fn min_sum(iterations: usize) -> Self {
        Self::plain(Variant::MinSum, iterations)
    }

    fn plain(variant: Variant, iterations: usize) -> Self {
        DecoderParams {
            variant,
            mode: ParamMode::Shared,
            iterations,
            alpha: Vec::new(),
            beta: Vec::new(),
        }
    }

    pub fn normalized(iterations: usize, alpha: f64) -> Result<Self> {
        Self::new(
            Variant::NormalizedMinSum,
            ParamMode::Shared,
            iterations,
            vec![alpha; iterations],
            vec![0.0; iterations],
        )
    }

    pub fn offset(iterations: usize, beta: f64) -> Result<Self> {
        Self::new(
            Variant::OffsetMinSum,
            ParamMode::Shared,
            iterations,
            vec![1.0; iterations],
            vec![beta; iterations],
        )
    }

    /// Neural min-sum initialised to plain min-sum (alpha = 1, beta = 0).
    pub fn neural_identity(iterations: usize, mode: ParamMode, edges: usize) -> Self {
        let len = match mode {
            ParamMode::Shared => iterations,
            ParamMode::PerEdge => iterations * edges,
        };
        DecoderParams {
            variant: Variant::NeuralMinSum,
            mode,
            iterations,
            alpha: vec![1.0; len],
            beta: vec![0.0; len],
        }
    }

    pub fn new(
        variant: Variant,
        mode: ParamMode,
        iterations: usize,
        alpha: Vec<f64>,
        beta: Vec<f64>,
    ) -> Result<Self> {
        let p = DecoderParams {
            variant,
            mode,
            iterations,
            alpha,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !self.variant.parameterized() {
            if !self.alpha.is_empty() || !self.beta.is_empty() {
                return Err(Error::Validation(format!(
                    "{} takes no alpha/beta parameters",
                    self.variant.id()
                )));
            }
            return Ok(());
        }
        if self.alpha.len() != self.beta.len() {
            return Err(Error::Validation("alpha and beta lengths differ".into()));
        }
        let ok_len = match self.mode {
            ParamMode::Shared => self.alpha.len() == self.iterations,
            ParamMode::PerEdge => {
                self.iterations > 0 && self.alpha.len() % self.iterations == 0
                    || self.iterations == 0 && self.alpha.is_empty()
            }
        };
        if !ok_len {
            return Err(Error::Validation(format!(
                "{} parameter arrays of length {} do not fit {} iterations",
                self.mode.id(),
                self.alpha.len(),
                self.iterations
            )));
        }
        if self.alpha.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Validation("alpha values must be positive".into()));
        }
        if self.beta.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::Validation("beta values must be non-negative".into()));
        }
        match self.variant {
            Variant::NormalizedMinSum if self.beta.iter().any(|&b| b != 0.0) => {
                Err(Error::Validation("normalized min-sum requires beta = 0".into()))
            }
            Variant::OffsetMinSum if self.alpha.iter().any(|&a| a != 1.0) => {
                Err(Error::Validation("offset min-sum requires alpha = 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn mode(&self) -> ParamMode {
        self.mode
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn param_count(&self) -> usize {
        self.alpha.len() + self.beta.len()
    }

    /// Number of edges a per-edge parameter set was fitted for.
    pub fn edges(&self) -> Option<usize> {
        match self.mode {
            ParamMode::PerEdge if self.iterations > 0 => Some(self.alpha.len() / self.iterations),
            _ => None,
        }
    }

    /// Index into `alpha`/`beta` for `iteration` (0-based) and `edge`.
    #[inline]
    pub(crate) fn index(&self, iteration: usize, edge: usize, edges: usize) -> usize {
        match self.mode {
            ParamMode::Shared => iteration,
            ParamMode::PerEdge => iteration * edges + edge,
        }
    }

    pub(crate) fn alpha_mut(&mut self) -> &mut [f64] {
        &mut self.alpha
    }

    pub(crate) fn beta_mut(&mut self) -> &mut [f64] {
        &mut self.beta
    }

    /// Same decoder with a different iteration cap. Trained parameter sets
    /// can only be shortened.
    pub fn with_iterations(&self, iterations: usize) -> Result<Self> {
        match self.variant {
            Variant::SumProduct | Variant::MinSum => Ok(Self::plain(self.variant, iterations)),
            _ if iterations <= self.iterations => {
                let per = self.alpha.len().checked_div(self.iterations).unwrap_or(0);
                Self::new(
                    self.variant,
                    self.mode,
                    iterations,
                    self.alpha[..iterations * per].to_vec(),
                    self.beta[..iterations * per].to_vec(),
                )
            }
            Variant::NormalizedMinSum | Variant::OffsetMinSum if self.mode == ParamMode::Shared => {
                let (a, b) = (
                    self.alpha.last().copied().unwrap_or(1.0),
                    self.beta.last().copied().unwrap_or(0.0),
                );
                let mut alpha = self.alpha.clone();
                let mut beta = self.beta.clone();
                alpha.resize(iterations, a);
                beta.resize(iterations, b);
                Self::new(self.variant, self.mode, iterations, alpha, beta)
            }
            _ => Err(Error::Argument(format!(
                "parameters cover {} iterations, {} requested",
                self.iterations, iterations
            ))),
        }
    }

    /// Appends one iteration initialised to (alpha = 1, beta = 0).
    pub(crate) fn push_identity_layer(&mut self, edges: usize) {
        let per = match self.mode {
            ParamMode::Shared => 1,
            ParamMode::PerEdge => edges,
        };
        self.alpha.extend(std::iter::repeat_n(1.0, per));
        self.beta.extend(std::iter::repeat_n(0.0, per));
        self.iterations += 1;
    }

    /// Short content identifier: variant, iteration count and a digest
    /// prefix of the serialized parameters.
    pub fn id(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        format!("{}-{}-{}", self.variant.id(), self.iterations, &hex::encode(digest)[..12])
    }

    /// Serializes to the versioned text format. Floats are written with 17
    /// significant digits so the round trip is exact.
    pub fn to_text(&self) -> String {
        let fmt_arr = |v: &[f64]| {
            let mut s = String::from("[");
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{x:.16e}");
            }
            s.push(']');
            s
        };
        format!(
            "{{\n  \"version\": {},\n  \"variant\": \"{}\",\n  \"mode\": \"{}\",\n  \"iterations\": {},\n  \"alpha\": {},\n  \"beta\": {}\n}}\n",
            PARAMS_VERSION,
            self.variant.id(),
            self.mode.id(),
            self.iterations,
            fmt_arr(&self.alpha),
            fmt_arr(&self.beta)
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            version: u32,
            variant: String,
            mode: String,
            iterations: usize,
            alpha: Vec<f64>,
            beta: Vec<f64>,
        }
        let raw: Raw = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("decoder parameters: {e}")))?;
        if raw.version != PARAMS_VERSION {
            return Err(Error::Version {
                found: raw.version,
                expected: PARAMS_VERSION,
            });
        }
        Self::new(
            raw.variant.parse()?,
            raw.mode.parse()?,
            raw.iterations,
            raw.alpha,
            raw.beta,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DecoderParams {
        DecoderParams::new(
            Variant::NeuralMinSum,
            ParamMode::Shared,
            3,
            vec![0.7, 0.812345678901234567, 1.0 / 3.0],
            vec![0.0, 0.25, 1e-12],
        )
        .unwrap()
    }

    #[test]
    fn text_round_trip_is_exact() {
        let p = sample();
        assert_eq!(DecoderParams::from_text(&p.to_text()).unwrap(), p);
        let ms = DecoderParams::min_sum(50);
        assert_eq!(DecoderParams::from_text(&ms.to_text()).unwrap(), ms);
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let text = sample().to_text();
        let cut = &text[..text.len() / 2];
        assert!(matches!(DecoderParams::from_text(cut), Err(Error::Parse(_))));
    }

    #[test]
    fn version_mismatch() {
        let text = sample().to_text().replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(
            DecoderParams::from_text(&text),
            Err(Error::Version { found: 2, .. })
        ));
    }

    #[test]
    fn invariants_enforced() {
        assert!(DecoderParams::new(Variant::MinSum, ParamMode::Shared, 2, vec![1.0; 2], vec![0.0; 2]).is_err());
        assert!(DecoderParams::new(Variant::NeuralMinSum, ParamMode::Shared, 2, vec![1.0, -1.0], vec![0.0; 2]).is_err());
        assert!(DecoderParams::new(Variant::NeuralMinSum, ParamMode::Shared, 2, vec![1.0; 2], vec![0.0, -0.1]).is_err());
        assert!(DecoderParams::new(Variant::NormalizedMinSum, ParamMode::Shared, 1, vec![0.8], vec![0.1]).is_err());
        assert!(DecoderParams::new(Variant::OffsetMinSum, ParamMode::Shared, 1, vec![0.8], vec![0.1]).is_err());
    }

    #[test]
    fn shared_parameter_count() {
        assert_eq!(DecoderParams::neural_identity(25, ParamMode::Shared, 1970).param_count(), 50);
        assert_eq!(
            DecoderParams::neural_identity(2, ParamMode::PerEdge, 10).edges(),
            Some(10)
        );
    }
}
