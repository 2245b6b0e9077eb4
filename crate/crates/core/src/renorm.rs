//! Renormalisation constants `sigma_N`, `alpha_N`, `C_N` and `R_N`.
//!
//! All lattice sums run over shells `|n|^2 = k` weighted by the number of
//! lattice points on the shell, with compensated summation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of `n in Z^3` with `|n|^2 = k`, for `k <= N^2`.
pub fn shell_counts(cutoff: u32) -> Vec<u64> {
    let n = i64::from(cutoff);
    let r2 = n * n;
    let mut counts = vec![0u64; r2 as usize + 1];
    for a in -n..=n {
        for b in -n..=n {
            let ab = a * a + b * b;
            if ab > r2 {
                continue;
            }
            for c in -n..=n {
                let k = ab + c * c;
                if k <= r2 {
                    counts[k as usize] += 1;
                }
            }
        }
    }
    counts
}

/// Kahan-compensated sum.
#[derive(Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

fn shell_sum(counts: &[u64], f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = KahanSum::default();
    for (k, &c) in counts.iter().enumerate() {
        if c > 0 {
            acc.add(c as f64 * f(k as f64));
        }
    }
    acc.value()
}

/// `sigma_N = sum_{|n| <= N} <n>^{-2 alpha}`.
pub fn sigma_exact(alpha: f64, cutoff: u32) -> f64 {
    sigma_from_counts(alpha, &shell_counts(cutoff))
}

fn sigma_from_counts(alpha: f64, counts: &[u64]) -> f64 {
    shell_sum(counts, |k| (1.0 + k).powf(-alpha))
}

/// Pointwise variance `sum 1 / ((a + |n|^2) <n>^{2(alpha-1)})` of the free
/// wave of mass `a`; equals `sigma_N` at `a = 1`.
pub fn wave_variance(alpha: f64, cutoff: u32, mass: f64) -> f64 {
    shell_sum(&shell_counts(cutoff), |k| 1.0 / ((mass + k) * (1.0 + k).powf(alpha - 1.0)))
}

/// `sum_{N < |n| <= M} <n>^{-2 alpha}`.
pub fn sigma_tail(alpha: f64, inner: u32, outer: u32) -> f64 {
    let counts = shell_counts(outer);
    let r2 = (inner as usize) * (inner as usize);
    shell_sum(&counts[r2 + 1..], |k| (1.0 + k + (r2 + 1) as f64).powf(-alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormConstants {
    pub alpha: f64,
    pub n: u32,
    pub sigma_n: f64,
    pub alpha_n: f64,
    pub c_n: f64,
    pub r_n: f64,
    /// `|C_N - 3 sum 1/((C_N + |n|^2) <n>^{2(alpha-1)})|`
    pub residual: f64,
}

const BISECTION_WIDTH: f64 = 1e-8;
const MAX_ITER: usize = 500;

/// Right-hand side `3 sum 1/((C + k) <n>^{2(alpha-1)})` and its derivative.
fn cn_rhs(counts: &[u64], alpha: f64, c: f64) -> (f64, f64) {
    let mut v = KahanSum::default();
    let mut d = KahanSum::default();
    for (k, &m) in counts.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let k = k as f64;
        let w = m as f64 / (1.0 + k).powf(alpha - 1.0);
        let inv = 1.0 / (c + k);
        v.add(w * inv);
        d.add(-w * inv * inv);
    }
    (3.0 * v.value(), 3.0 * d.value())
}

/// Solve `C = 3 sum_{|n| <= N} 1/((C + |n|^2) <n>^{2(alpha-1)})` for the unique
/// root `C >= 1`: bisection on `[1, 3 (2N+1)^3]`, then Newton.
pub fn solve_cn(alpha: f64, cutoff: u32) -> Result<RenormConstants> {
    if !(1.0..=1.5).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [1, 3/2]")));
    }
    let counts = shell_counts(cutoff);
    let f = |c: f64| cn_rhs(&counts, alpha, c).0 - c;
    let mut lo = 1.0;
    let mut hi = 3.0 * f64::from(2 * cutoff + 1).powi(3);
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(Error::NoConvergence { iterations: 0 });
    }
    let mut iter = 0;
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
        if iter > MAX_ITER {
            return Err(Error::NoConvergence { iterations: iter });
        }
    }
    let mut c = 0.5 * (lo + hi);
    for _ in 0..20 {
        let (v, dv) = cn_rhs(&counts, alpha, c);
        let step = (v - c) / (dv - 1.0);
        let next = (c - step).clamp(lo, hi);
        if next == c {
            break;
        }
        c = next;
        if step.abs() <= 4.0 * f64::EPSILON * c {
            break;
        }
    }
    let residual = (cn_rhs(&counts, alpha, c).0 - c).abs();
    if residual > 1e-12 * c.max(1.0) {
        return Err(Error::NoConvergence { iterations: iter + 20 });
    }
    let sigma_n = sigma_from_counts(alpha, &counts);
    Ok(RenormConstants {
        alpha,
        n: cutoff,
        sigma_n,
        alpha_n: 3.0 * sigma_n - 1.0,
        c_n: c,
        r_n: c - 3.0 * sigma_n,
        residual,
    })
}

/// One row of the asymptotic comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub n: u32,
    pub sigma_n: f64,
    pub c_n: f64,
    pub r_n: f64,
    pub r_over_sigma: f64,
    /// `sigma_{N} / sigma_{N/2}` against the preceding rung (`None` on the first)
    pub sigma_ratio: Option<f64>,
    /// `2^{3 - 2 alpha}`
    pub predicted_ratio: f64,
}

pub fn asymptotic_report(alpha: f64, ladder: &[u32]) -> Result<Vec<AsymptoticRow>> {
    if ladder.len() < 4 {
        return Err(Error::InvalidParameter("ladder needs at least four rungs".into()));
    }
    let mut rows: Vec<AsymptoticRow> = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let rc = solve_cn(alpha, n)?;
        let sigma_ratio = rows.last().map(|p| rc.sigma_n / p.sigma_n);
        rows.push(AsymptoticRow {
            n,
            sigma_n: rc.sigma_n,
            c_n: rc.c_n,
            r_n: rc.r_n,
            r_over_sigma: rc.r_n.abs() / rc.sigma_n,
            sigma_ratio,
            predicted_ratio: 2f64.powf(3.0 - 2.0 * alpha),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_counts_small() {
        let c = shell_counts(2);
        assert_eq!(c, vec![1, 6, 12, 8, 6]);
        assert_eq!(shell_counts(5).iter().sum::<u64>(), 515);
    }

    #[test]
    fn sigma_small_cases() {
        assert_eq!(sigma_exact(1.3, 0), 1.0);
        assert!((sigma_exact(1.5, 1) - (1.0 + 6.0 * 2f64.powf(-1.5))).abs() < 1e-15);
        assert!((sigma_tail(1.5, 0, 1) - 6.0 * 2f64.powf(-1.5)).abs() < 1e-15);
        let t = sigma_tail(1.4, 3, 7);
        assert!((t - (sigma_exact(1.4, 7) - sigma_exact(1.4, 3))).abs() < 1e-12);
        assert!((wave_variance(1.4, 6, 1.0) - sigma_exact(1.4, 6)).abs() < 1e-12);
    }

    #[test]
    fn cn_at_zero_cutoff() {
        let rc = solve_cn(1.4, 0).unwrap();
        assert!((rc.c_n - 3f64.sqrt()).abs() < 1e-12);
        assert!(solve_cn(1.6, 3).is_err());
    }
}
