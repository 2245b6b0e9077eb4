use serde::{Deserialize, Serialize};

use super::field::{GridField, SpectralField};
use super::lattice::block_count;
use super::product::lp_block;
use crate::error::{Error, Result};

/// Function-space norm selector. `p` and `q` take `f64::INFINITY` for the
/// endpoint spaces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    /// `||<nabla>^s f||_{L^p}`
    Sobolev { s: f64, p: f64 },
    /// `|| 2^{sj} ||P_j f||_{L^p} ||_{l^q}`
    Besov { s: f64, p: f64, q: f64 },
    /// `||<nabla>^s f||_{L^inf}` as a grid maximum
    Sup { s: f64 },
}

impl NormSpec {
    pub fn h(s: f64) -> Self {
        NormSpec::Sobolev { s, p: 2.0 }
    }

    pub fn lp(p: f64) -> Self {
        NormSpec::Sobolev { s: 0.0, p }
    }

    fn validate(&self) -> Result<()> {
        let bad = |x: f64| !(x >= 1.0);
        match *self {
            NormSpec::Sobolev { s, p } if s.is_finite() && !bad(p) => Ok(()),
            NormSpec::Besov { s, p, q } if s.is_finite() && !bad(p) && !bad(q) => Ok(()),
            NormSpec::Sup { s } if s.is_finite() => Ok(()),
            other => Err(Error::UnsupportedNorm(format!("{other:?}"))),
        }
    }
}

fn lp_of(f: &SpectralField, p: f64) -> f64 {
    if p == 2.0 {
        return f.hs_norm(0.0);
    }
    f.to_grid().lp_norm(p)
}

/// Norm of a spectral field. `L^2`-based norms are exact; other exponents use
/// the box grid.
pub fn norm(f: &SpectralField, spec: NormSpec) -> Result<f64> {
    spec.validate()?;
    Ok(match spec {
        NormSpec::Sobolev { s, p } => {
            if p == 2.0 {
                f.hs_norm(s)
            } else {
                lp_of(&f.apply_bessel(s), p)
            }
        }
        NormSpec::Sup { s } => f.apply_bessel(s).to_grid().lp_norm(f64::INFINITY),
        NormSpec::Besov { s, p, q } => {
            let terms: Vec<f64> = (0..block_count(f.cutoff()))
                .map(|j| 2f64.powf(s * f64::from(j)) * lp_of(&lp_block(f, j), p))
                .collect();
            if q.is_infinite() {
                terms.into_iter().fold(0.0, f64::max)
            } else {
                terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
            }
        }
    })
}

/// Norm of grid data; only zero-regularity Lebesgue norms are available.
pub fn grid_norm(g: &GridField, spec: NormSpec) -> Result<f64> {
    spec.validate()?;
    match spec {
        NormSpec::Sobolev { s, p } if s == 0.0 => Ok(g.lp_norm(p)),
        NormSpec::Sup { s } if s == 0.0 => Ok(g.lp_norm(f64::INFINITY)),
        other => Err(Error::UnsupportedNorm(format!("{other:?} on grid data"))),
    }
}
