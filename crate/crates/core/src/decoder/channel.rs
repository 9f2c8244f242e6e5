use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Channel parameter used to scale LLRs at decode time when the true
/// crossover rate is unknown.
pub const DEFAULT_DECODE_P: f64 = 0.17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    p: f64,
}

impl ChannelConfig {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::Argument(format!(
                "crossover probability must lie in (0, 0.5), got {p}"
            )));
        }
        Ok(ChannelConfig { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `ln((1 - p) / p)`, the LLR magnitude of every received bit.
    pub fn magnitude(&self) -> f64 {
        ((1.0 - self.p) / self.p).ln()
    }
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            p: DEFAULT_DECODE_P,
        }
    }
}

/// Channel log-likelihood ratios; positive means bit 0 is more likely.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(pub Vec<f64>);

impl LlrVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

pub fn init_llr(received: &BitVector, ch: ChannelConfig) -> LlrVector {
    let mag = ch.magnitude();
    LlrVector(
        received
            .iter()
            .map(|bit| if bit { -mag } else { mag })
            .collect(),
    )
}
