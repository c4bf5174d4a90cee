use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Representation;

/// Settings shared by the CLI commands. Every field has a default, so an
/// empty JSON object is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Calibration file; the shipped rig when absent.
    pub calib: Option<PathBuf>,
    /// Train / val / test percentages.
    pub split: [u32; 3],
    pub representations: Vec<Representation>,
    pub score_threshold: f64,
    pub iou_threshold: f64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            calib: None,
            split: [60, 10, 30],
            representations: Representation::TABLE.to_vec(),
            score_threshold: 0.05,
            iou_threshold: 0.5,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.split.iter().sum::<u32>() != 100 {
            return Err(Error::Config(format!("split ratios {:?} must sum to 100", self.split)));
        }
        for (name, t) in [("score_threshold", self.score_threshold), ("iou_threshold", self.iou_threshold)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Config(format!("{name} {t} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// 64-bit FNV-1a.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Bucket of an image, from a hash of its id, so splits need no stored
/// index.
pub fn split_of(image_id: &str, ratios: [u32; 3]) -> Split {
    let bucket = (fnv1a(image_id.as_bytes()) % 100) as u32;
    if bucket < ratios[0] {
        Split::Train
    } else if bucket < ratios[0] + ratios[1] {
        Split::Val
    } else {
        Split::Test
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert!(cfg.validate().is_ok());
        let bad = RunConfig { split: [60, 10, 20], ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn split_is_stable_and_roughly_proportional() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        let mut counts = [0usize; 3];
        for i in 0..10_000 {
            counts[split_of(&format!("img{i}"), [60, 10, 30]) as usize] += 1;
        }
        assert!((5600..6400).contains(&counts[0]) && (700..1300).contains(&counts[1]), "{counts:?}");
        assert_eq!(split_of("x", [60, 10, 30]), split_of("x", [60, 10, 30]));
    }
}
