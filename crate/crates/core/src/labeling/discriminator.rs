//! Label discriminator: compares consecutive label vectors.

use serde::{Deserialize, Serialize};

use super::cca::LabelVector;
use crate::error::{Error, Result};

pub const DEFAULT_TAU: f64 = 0.05;

/// 1 while labels keep changing by more than the tolerance, 0 once they
/// have saturated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Reward {
    Saturated,
    Continue,
}

impl Reward {
    pub fn value(self) -> u8 {
        match self {
            Reward::Saturated => 0,
            Reward::Continue => 1,
        }
    }
}

impl From<Reward> for u8 {
    fn from(r: Reward) -> u8 {
        r.value()
    }
}

impl TryFrom<u8> for Reward {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Reward::Saturated),
            1 => Ok(Reward::Continue),
            other => Err(format!("reward must be 0 or 1, got {other}")),
        }
    }
}

/// Fraction of positions where the two vectors differ.
pub fn mismatch(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Contract(format!("label vectors of length {} and {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let diff = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(diff as f64 / a.len() as f64)
}

/// Returns the mismatch against the previous labels (1 when there are
/// none) and the resulting reward.
pub fn label_discriminator(current: &LabelVector, previous: Option<&LabelVector>, tau: f64) -> Result<(f64, Reward)> {
    let mm = match previous {
        Some(prev) => mismatch(&current.labels, &prev.labels)?,
        None => 1.0,
    };
    let reward = if mm <= tau { Reward::Saturated } else { Reward::Continue };
    Ok((mm, reward))
}
