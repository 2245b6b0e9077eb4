use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wnlw_core::solver::{CosineData, EquationVariant, SolverConfig};
use wnlw_core::stats::sample_seed;

use crate::error::{Error, Result};

/// Flat experiment configuration, read from JSON and overridable from the
/// command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    /// cutoffs `N`, powers of two in increasing order
    pub n_ladder: Vec<u32>,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
    pub sample_count: usize,
    pub master_seed: u64,
    /// distance of the test regularities below their thresholds
    pub regularity_offset: f64,
    pub variant: EquationVariant,
    pub out_dir: PathBuf,
    /// deterministic data `(w0, w1) = (A cos x1, 0)`
    pub data_amplitude: f64,
    /// Monte Carlo draws for the pointwise checks
    pub mc_samples: usize,
    pub record_every: usize,
    /// also solve through `z1 + z2 + w` and record the discrepancy
    pub cross_check: bool,
    /// force every Gaussian coefficient to zero
    pub zero_noise: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: 1.4,
            n_ladder: vec![4, 8, 16],
            t_final: 0.1,
            dt: 0.1 / 256.0,
            sample_count: 32,
            master_seed: 0,
            regularity_offset: 0.05,
            variant: EquationVariant::FullRenormalized,
            out_dir: PathBuf::from("wnlw-out"),
            data_amplitude: 1.0,
            mc_samples: 10_000,
            record_every: 1,
            cross_check: false,
            zero_noise: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha <= 1.5) {
            return Err(Error::Config(format!("alpha = {} outside (1, 3/2]", self.alpha)));
        }
        if self.n_ladder.len() < 3 {
            return Err(Error::Config("the ladder needs at least three levels".into()));
        }
        if self.n_ladder.iter().any(|n| !n.is_power_of_two()) || self.n_ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("ladder {:?} is not increasing powers of two", self.n_ladder)));
        }
        if self.sample_count == 0 {
            return Err(Error::Config("sample_count must be at least 1".into()));
        }
        self.solver(1).steps()?;
        Ok(())
    }

    /// Seed of the `i`-th ensemble member.
    pub fn seed(&self, i: usize) -> u64 {
        sample_seed(self.master_seed, i as u64)
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.sample_count).map(|i| self.seed(i)).collect()
    }

    pub fn solver(&self, cutoff: u32) -> SolverConfig {
        SolverConfig {
            alpha: self.alpha,
            cutoff,
            t_final: self.t_final,
            dt: self.dt,
            variant: self.variant,
            record_every: self.record_every,
        }
    }

    /// `s1 = alpha - 3/2 - offset`.
    pub fn s1(&self) -> f64 {
        self.alpha - 1.5 - self.regularity_offset
    }

    pub fn deterministic_data(&self) -> CosineData {
        CosineData {
            position: vec![([1, 0, 0], self.data_amplitude)],
            velocity: Vec::new(),
        }
    }

    pub fn top(&self) -> u32 {
        *self.n_ladder.last().expect("validated ladder")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_validation() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"T\":0.1"));
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let partial: ExperimentConfig = serde_json::from_str(r#"{"alpha": 1.3, "variant": "linear"}"#).unwrap();
        assert_eq!(partial.alpha, 1.3);
        assert_eq!(partial.variant, EquationVariant::Linear);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"alpah": 1.3}"#).is_err());
        let bad = ExperimentConfig {
            n_ladder: vec![4, 6, 8],
            ..c.clone()
        };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig {
            dt: 0.1 / 8.0,
            ..c
        };
        assert!(bad.validate().is_err());
    }
}
