//! Coupled-seed ladders for the renormalised cubic wave equation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wnlw_core::random::GaussianDraw;
use wnlw_core::solver::{ct_hs_distance, solve_full, solve_via_decomposition, CosineData, EquationVariant, Trajectory};
use wnlw_core::stats::median;
use wnlw_core::Error as CoreError;

use crate::config::ExperimentConfig;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: u32,
    /// `||u_{2N} - u_N||_{C_T H^{s1}}`
    #[serde(rename = "d_N")]
    pub d_n: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceResult {
    pub rows: Vec<ConvergenceRow>,
    /// `(seed, N, ||u_N - (z1 + z2 + w)||_{C_T H^{s1}})` when cross-checked
    pub decomposition_gaps: Vec<(u64, u32, f64)>,
    pub seeds: Vec<u64>,
    pub flagged: usize,
}

impl ConvergenceResult {
    fn per_seed(&self) -> Vec<Vec<&ConvergenceRow>> {
        self.seeds
            .iter()
            .map(|s| self.rows.iter().filter(|r| r.seed == *s).collect())
            .collect()
    }

    /// Fraction of all seeds whose `d_N` is strictly decreasing along the
    /// ladder; flagged seeds count as failures.
    pub fn decreasing_fraction(&self) -> f64 {
        let ok = self
            .per_seed()
            .iter()
            .filter(|rows| !rows.iter().any(|r| r.flagged) && rows.windows(2).all(|w| w[1].d_n < w[0].d_n))
            .count();
        ok as f64 / self.seeds.len().max(1) as f64
    }

    pub fn flag_rate(&self) -> f64 {
        self.flagged as f64 / self.seeds.len().max(1) as f64
    }

    /// Median of `d_N` over unflagged seeds, per ladder level.
    pub fn medians(&self, ladder: &[u32]) -> Vec<f64> {
        ladder
            .iter()
            .map(|&n| {
                let v: Vec<f64> = self.rows.iter().filter(|r| r.n == n && !r.flagged).map(|r| r.d_n).collect();
                median(&v)
            })
            .collect()
    }
}

enum SeedOutcome {
    Done {
        d: Vec<f64>,
        gaps: Vec<(u32, f64)>,
    },
    Flagged,
}

fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    let top = 2 * cfg.top();
    let draw = if cfg.zero_noise {
        GaussianDraw::zero(top)
    } else {
        GaussianDraw::sample(seed, top)
    };
    let mut levels: Vec<u32> = cfg.n_ladder.clone();
    levels.push(top);
    let none = CosineData::default();
    let mut trajs: Vec<Trajectory> = Vec::with_capacity(levels.len());
    for &n in &levels {
        let mut sc = cfg.solver(n);
        sc.variant = EquationVariant::FullRenormalized;
        match solve_full(&draw, &sc, &none) {
            Ok(t) => trajs.push(t),
            Err(CoreError::Blowup { .. }) => return Ok(SeedOutcome::Flagged),
            Err(e) => return Err(e.into()),
        }
    }
    let s1 = cfg.s1();
    let d = (0..cfg.n_ladder.len())
        .map(|k| ct_hs_distance(&trajs[k + 1], &trajs[k], s1))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut gaps = Vec::new();
    if cfg.cross_check {
        for (k, &n) in cfg.n_ladder.iter().enumerate() {
            let mut sc = cfg.solver(n);
            sc.variant = EquationVariant::FullRenormalized;
            match solve_via_decomposition(&draw, &sc) {
                Ok(u) => gaps.push((n, ct_hs_distance(&trajs[k], &u, s1)?)),
                Err(CoreError::Blowup { .. }) => return Ok(SeedOutcome::Flagged),
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(SeedOutcome::Done { d, gaps })
}

/// Solve the renormalised equation at every ladder level `N` and at `2 N_max`
/// with one draw per seed, and record `d_N`.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceResult> {
    cfg.validate()?;
    let seeds = cfg.seeds();
    let outcomes = seeds
        .par_iter()
        .map(|&s| run_seed(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let mut res = ConvergenceResult {
        seeds: seeds.clone(),
        ..Default::default()
    };
    for (&seed, out) in seeds.iter().zip(outcomes) {
        match out {
            SeedOutcome::Done { d, gaps } => {
                for (&n, d_n) in cfg.n_ladder.iter().zip(d) {
                    res.rows.push(ConvergenceRow {
                        seed,
                        n,
                        d_n,
                        flagged: false,
                    });
                }
                res.decomposition_gaps.extend(gaps.into_iter().map(|(n, g)| (seed, n, g)));
            }
            SeedOutcome::Flagged => {
                res.flagged += 1;
                for &n in &cfg.n_ladder {
                    res.rows.push(ConvergenceRow {
                        seed,
                        n,
                        d_n: f64::NAN,
                        flagged: true,
                    });
                }
            }
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_gives_zero_distances() {
        let cfg = ExperimentConfig {
            n_ladder: vec![1, 2, 4],
            sample_count: 2,
            dt: 0.1 / 16.0,
            zero_noise: true,
            ..Default::default()
        };
        let r = run_convergence(&cfg).unwrap();
        assert_eq!(r.rows.len(), 6);
        assert!(r.rows.iter().all(|row| row.d_n == 0.0 && !row.flagged));
    }
}
