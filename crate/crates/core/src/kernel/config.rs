use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-length weights applied to the p-spectrum kernels before summing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weighting {
    /// Only subsequences of length `q` contribute.
    QSpectrum { q: usize },
    /// Every length contributes with weight 1.
    Constant,
    /// Length `p` contributes with weight `lambda^p`.
    Decay { lambda: f64 },
}

impl Weighting {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Weighting::QSpectrum { q: 0 } => {
                Err(Error::invalid("q-spectrum length must be at least 1"))
            }
            Weighting::Decay { lambda } if !(lambda > 0.0 && lambda < 1.0) => Err(Error::invalid(
                format!("decay factor must lie in (0, 1), got {lambda}"),
            )),
            _ => Ok(()),
        }
    }

    /// Sort key used for deterministic tie-breaking: q-spectrum before
    /// constant before decay, then by parameter.
    pub(crate) fn order_key(&self) -> (u8, f64) {
        match *self {
            Weighting::QSpectrum { q } => (0, q as f64),
            Weighting::Constant => (1, 0.0),
            Weighting::Decay { lambda } => (2, lambda),
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weighting::QSpectrum { q } => write!(f, "q={q}"),
            Weighting::Constant => write!(f, "const"),
            Weighting::Decay { lambda } => write!(f, "decay={lambda}"),
        }
    }
}

impl FromStr for Weighting {
    type Err = Error;

    /// Parses `q=<k>`, `const` or `decay=<lambda>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let w = if s == "const" || s == "constant" {
            Weighting::Constant
        } else if let Some(v) = s.strip_prefix("q=") {
            Weighting::QSpectrum {
                q: v.parse()
                    .map_err(|_| Error::invalid(format!("bad q-spectrum length {v:?}")))?,
            }
        } else if let Some(v) = s.strip_prefix("decay=") {
            Weighting::Decay {
                lambda: v
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad decay factor {v:?}")))?,
            }
        } else {
            return Err(Error::invalid(format!(
                "unknown weighting {s:?}; expected q=<k>, const or decay=<lambda>"
            )));
        };
        w.validate()?;
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Bandwidth of the Gaussian atomic kernel.
    pub gamma: f64,
    pub weighting: Weighting,
    pub normalize: bool,
}

impl KernelConfig {
    pub fn new(gamma: f64, weighting: Weighting) -> Result<Self> {
        let config = KernelConfig {
            gamma,
            weighting,
            normalize: true,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn unnormalized(mut self) -> Self {
        self.normalize = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!(
                "gamma must be positive and finite, got {}",
                self.gamma
            )));
        }
        self.weighting.validate()
    }

    /// Logs a warning when a q-spectrum length exceeds `max_len`; such
    /// kernels evaluate to zero.
    pub fn warn_if_q_exceeds(&self, max_len: usize) -> bool {
        match self.weighting {
            Weighting::QSpectrum { q } if q > max_len => {
                log::warn!(
                    "q-spectrum length {q} exceeds the longest sequence ({max_len}); \
                     all kernel values will be 0"
                );
                true
            }
            _ => false,
        }
    }
}
