//! Alias-free products and pointwise polynomial maps of spectral fields.
//!
//! A product of factors with cutoffs `N_1, ..., N_k`, read back on
//! `|n| <= K`, is exact on an `M`-point grid once `M >= N_1 + ... + N_k + K + 1`:
//! aliases of the product's modes then land outside the output ball.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::{with_transform, SpectralField};
use super::lattice::{block_of, fft_friendly, FrequencyBox, ModeTable};
use crate::error::{Error, Result};

/// Smallest grid on which a product of spectral reach `reach` can be read
/// back exactly on `|n| <= out_cutoff`.
pub fn required_grid(reach: u32, out_cutoff: u32) -> usize {
    (reach + out_cutoff) as usize + 1
}

/// FFT-friendly grid that is alias-free for `reach` and can also resolve all
/// inputs (cutoffs up to `max_cutoff`).
pub fn padded_grid(reach: u32, out_cutoff: u32, max_cutoff: u32) -> usize {
    fft_friendly(required_grid(reach, out_cutoff).max(2 * max_cutoff as usize + 1))
}

/// Evaluate `f(x) = poly(a_1(x), ..., a_k(x))` pointwise on a padded grid and
/// return its coefficients on `|n| <= out_cutoff`.
///
/// `reach` is the largest spectral extent of any monomial in `poly` (for
/// `a * b^2` it is `N_a + 2 N_b`). With `grid = None` the smallest
/// FFT-friendly alias-free grid is used.
pub fn polynomial_map(
    inputs: &[&SpectralField],
    reach: u32,
    out_cutoff: u32,
    grid: Option<usize>,
    poly: impl Fn(&[f64]) -> f64,
) -> Result<SpectralField> {
    let max_in = inputs.iter().map(|f| f.cutoff()).max().unwrap_or(0);
    let m = match grid {
        Some(m) => {
            let need = required_grid(reach, out_cutoff);
            if m < need {
                return Err(Error::InsufficientPadding {
                    grid: m,
                    required: need,
                });
            }
            if m < 2 * max_in as usize + 1 {
                return Err(Error::GridTooSmall {
                    cutoff: max_in,
                    grid: m,
                });
            }
            m
        }
        None => padded_grid(reach, out_cutoff, max_in),
    };
    let points = m * m * m;
    let mut grids: Vec<Vec<f64>> = Vec::with_capacity(inputs.len());
    for f in inputs {
        let mut v = vec![0.0; points];
        f.synthesize_into(m, &mut v)?;
        grids.push(v);
    }
    let mut out_vals = vec![0.0; points];
    let mut args = vec![0.0; inputs.len()];
    for (p, o) in out_vals.iter_mut().enumerate() {
        for (a, g) in args.iter_mut().zip(&grids) {
            *a = g[p];
        }
        *o = poly(&args);
    }
    drop(grids);
    let mut out = SpectralField::zeros(FrequencyBox::new(out_cutoff));
    let table: Arc<ModeTable> = FrequencyBox::new(out_cutoff).modes();
    with_transform(m, |t| t.analyze(&out_vals, &table, out.coefficients_mut()));
    Ok(out)
}

/// Exact product `f g` restricted to `|n| <= out_cutoff`.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField, out_cutoff: u32) -> Result<SpectralField> {
    polynomial_map(&[f, g], f.cutoff() + g.cutoff(), out_cutoff, None, |v| v[0] * v[1])
}

/// Same as [`dealiased_product`] on a caller-chosen grid.
pub fn dealiased_product_on(
    f: &SpectralField,
    g: &SpectralField,
    out_cutoff: u32,
    grid: usize,
) -> Result<SpectralField> {
    polynomial_map(&[f, g], f.cutoff() + g.cutoff(), out_cutoff, Some(grid), |v| v[0] * v[1])
}

/// Brute-force convolution `sum_{n1 + n2 = n} f(n1) g(n2)`; `O(|f| |g|)`.
pub fn direct_convolution(f: &SpectralField, g: &SpectralField, out_cutoff: u32) -> SpectralField {
    let mut out = SpectralField::zeros(FrequencyBox::new(out_cutoff));
    let table = FrequencyBox::new(out_cutoff).modes();
    let (tf, tg) = (f.table(), g.table());
    for (i, a) in tf.modes().iter().enumerate() {
        let ca = f.coefficients()[i];
        if ca == Complex64::default() {
            continue;
        }
        for (j, b) in tg.modes().iter().enumerate() {
            let n = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
            if let Some(k) = table.index_of(n) {
                out.coefficients_mut()[k] += ca * g.coefficients()[j];
            }
        }
    }
    out
}

/// Littlewood-Paley piece `P_j f`: `|n| <= 1` for `j = 0`,
/// `2^{j-1} < |n| <= 2^j` for `j >= 1`.
pub fn lp_block(f: &SpectralField, j: u32) -> SpectralField {
    f.map_radial(|k| if block_of(k) == j { 1.0 } else { 0.0 })
}

/// Sum of the blocks `P_i f` with `lo <= i <= hi` (empty when `hi < lo`).
fn block_range(f: &SpectralField, lo: i64, hi: i64) -> SpectralField {
    f.map_radial(|k| {
        let b = i64::from(block_of(k));
        if b >= lo && b <= hi {
            1.0
        } else {
            0.0
        }
    })
}

/// Bony decomposition of `f g` on `|n| <= out_cutoff`.
#[derive(Clone, Debug)]
pub struct Paraproducts {
    /// `sum_{j < k - 2} P_j f P_k g`
    pub low: SpectralField,
    /// `sum_{|j - k| <= 2} P_j f P_k g`
    pub resonant: SpectralField,
    /// `sum_{k < j - 2} P_j f P_k g`
    pub high: SpectralField,
}

impl Paraproducts {
    pub fn total(&self) -> SpectralField {
        let mut t = self.low.clone();
        t.axpy(1.0, &self.resonant).expect("pieces share a cutoff");
        t.axpy(1.0, &self.high).expect("pieces share a cutoff");
        t
    }
}

/// Split `f g` into low, resonant and high pieces, each computed from its own
/// block products.
pub fn paraproduct_split(f: &SpectralField, g: &SpectralField, out_cutoff: u32) -> Result<Paraproducts> {
    let bf = i64::from(super::lattice::block_count(f.cutoff()));
    let bg = i64::from(super::lattice::block_count(g.cutoff()));
    let zero = || SpectralField::zeros(FrequencyBox::new(out_cutoff));
    let (mut low, mut resonant, mut high) = (zero(), zero(), zero());
    for k in 0..bg {
        let gk = block_range(g, k, k);
        let f_low = block_range(f, 0, k - 3);
        if k >= 3 {
            low.axpy(1.0, &dealiased_product(&f_low, &gk, out_cutoff)?)?;
        }
        let f_res = block_range(f, k - 2, k + 2);
        if k - 2 < bf {
            resonant.axpy(1.0, &dealiased_product(&f_res, &gk, out_cutoff)?)?;
        }
    }
    for j in 3..bf {
        let fj = block_range(f, j, j);
        let g_low = block_range(g, 0, j - 3);
        high.axpy(1.0, &dealiased_product(&fj, &g_low, out_cutoff)?)?;
    }
    Ok(Paraproducts { low, resonant, high })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeded(cutoff: u32, seed: u64) -> SpectralField {
        let mut s = seed;
        SpectralField::from_fn(FrequencyBox::new(cutoff), |_| {
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            Complex64::new(next(), next())
        })
    }

    #[test]
    fn cosine_squared() {
        let bx = FrequencyBox::new(2);
        let f = SpectralField::cosine(bx, [1, 0, 0], 1.0).unwrap();
        let p = dealiased_product(&f, &f, 2).unwrap();
        assert!((p.coeff([0, 0, 0]).unwrap().re - 0.5).abs() < 1e-14);
        assert!((p.coeff([2, 0, 0]).unwrap().re - 0.25).abs() < 1e-14);
        assert!(p.coeff([1, 0, 0]).unwrap().norm() < 1e-14);
    }

    #[test]
    fn unit_is_identity() {
        let f = seeded(3, 1);
        let one = SpectralField::constant(FrequencyBox::new(0), 1.0);
        let p = dealiased_product(&f, &one, 3).unwrap();
        for (a, b) in p.coefficients().iter().zip(f.coefficients()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn matches_direct_convolution() {
        for (nf, ng) in [(1, 1), (2, 3), (3, 3)] {
            let f = seeded(nf, 2);
            let g = seeded(ng, 3);
            let out = nf + ng;
            let fast = dealiased_product(&f, &g, out).unwrap();
            let slow = direct_convolution(&f, &g, out);
            for (a, b) in fast.coefficients().iter().zip(slow.coefficients()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn padding_is_enforced() {
        let f = seeded(3, 4);
        assert!(matches!(
            dealiased_product_on(&f, &f, 3, 9),
            Err(Error::InsufficientPadding { .. })
        ));
        assert!(dealiased_product_on(&f, &f, 3, 10).is_ok());
    }

    #[test]
    fn blocks_partition() {
        let f = seeded(9, 5);
        let mut sum = SpectralField::zeros(f.frequency_box());
        for j in 0..super::super::lattice::block_count(9) {
            sum.axpy(1.0, &lp_block(&f, j)).unwrap();
        }
        assert_eq!(sum, f);
        let e = SpectralField::cosine(FrequencyBox::new(4), [0, 4, 0], 1.0).unwrap();
        assert_eq!(lp_block(&e, 2), e);
        assert_eq!(lp_block(&e, 1).hs_norm(0.0), 0.0);
    }

    #[test]
    fn separated_blocks_go_to_low() {
        let bx = FrequencyBox::new(32);
        let f = SpectralField::cosine(bx, [1, 0, 0], 1.0).unwrap();
        let g = SpectralField::cosine(bx, [0, 20, 0], 1.0).unwrap();
        let p = paraproduct_split(&f, &g, 32).unwrap();
        let full = dealiased_product(&f, &g, 32).unwrap();
        assert!(p.resonant.hs_norm(0.0) < 1e-12);
        assert!(p.high.hs_norm(0.0) < 1e-12);
        assert!(p.low.hs_distance(&full, 0.0) < 1e-12);
        let q = paraproduct_split(&g, &g, 32).unwrap();
        assert!(q.low.hs_norm(0.0) < 1e-12 && q.high.hs_norm(0.0) < 1e-12);
    }
}
