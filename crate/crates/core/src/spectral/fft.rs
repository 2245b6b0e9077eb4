//! Pruned real 3D transforms between ball-truncated coefficients and the
//! uniform `M^3` grid.
//!
//! Coefficients only occupy `|n| <= N`, so the complex passes along the first
//! two axes skip lines that are identically zero (synthesis) or whose output
//! is discarded (analysis). The last axis uses a real-to-complex transform on
//! the half spectrum `0 <= k3 <= M/2`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use super::lattice::ModeTable;

const LINE_BATCH: usize = 32;

#[derive(Clone)]
struct Plans {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

fn plans(m: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(m)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let mut real = RealFftPlanner::new();
            Plans {
                fwd: planner.plan_fft_forward(m),
                inv: planner.plan_fft_inverse(m),
                r2c: real.plan_fft_forward(m),
                c2r: real.plan_fft_inverse(m),
            }
        })
        .clone()
}

#[inline]
fn wrap(n: i32, m: usize) -> usize {
    n.rem_euclid(m as i32) as usize
}

/// Transform engine for one grid size. Owns its work buffers, so a single
/// instance must not be shared between threads; create one per worker.
pub struct GridTransform {
    m: usize,
    mh: usize,
    plans: Plans,
    half: Vec<Complex64>,
    lines: Vec<Complex64>,
    scratch: Vec<Complex64>,
    real_line: Vec<f64>,
}

impl GridTransform {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "grid size must be positive");
        let plans = plans(m);
        let mh = m / 2 + 1;
        let scratch_len = plans
            .fwd
            .get_inplace_scratch_len()
            .max(plans.inv.get_inplace_scratch_len())
            .max(plans.r2c.get_scratch_len())
            .max(plans.c2r.get_scratch_len());
        Self {
            m,
            mh,
            plans,
            half: vec![Complex64::default(); m * m * mh],
            lines: vec![Complex64::default(); LINE_BATCH * m],
            scratch: vec![Complex64::default(); scratch_len],
            real_line: vec![0.0; m],
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.m * self.m * self.m
    }

    /// Evaluate `sum_n c_n e^{i n.x}` on the grid `x = 2 pi (i1, i2, i3) / M`.
    /// `coeffs` must be Hermitian; `out` has `M^3` entries in row-major order.
    pub fn synthesize(&mut self, table: &ModeTable, coeffs: &[Complex64], out: &mut [f64]) {
        let m = self.m;
        let mh = self.mh;
        let cutoff = table.cutoff() as i32;
        assert!(m > 2 * cutoff as usize, "grid too small for cutoff");
        assert_eq!(coeffs.len(), table.len());
        assert_eq!(out.len(), self.points());

        self.half.fill(Complex64::default());
        for row in table.rows() {
            let base = (wrap(row.n1, m) * m + wrap(row.n2, m)) * mh;
            let centre = row.start + row.half as usize;
            for n3 in 0..=row.half as usize {
                self.half[base + n3] = coeffs[centre + n3];
            }
        }

        // axis 0: only (n2, n3) pairs that carry data
        let mut pairs = Vec::new();
        for n2 in -cutoff..=cutoff {
            for n3 in 0..=cutoff {
                if n2 * n2 + n3 * n3 <= cutoff * cutoff {
                    pairs.push((wrap(n2, m), n3 as usize));
                }
            }
        }
        let inv = Arc::clone(&self.plans.inv);
        self.strided_pass(&*inv, &pairs, m * mh, |k2, k3| k2 * mh + k3);

        // axis 1
        let pairs: Vec<(usize, usize)> = (0..m)
            .flat_map(|i1| (0..=cutoff as usize).map(move |k3| (i1, k3)))
            .collect();
        self.strided_pass(&*inv, &pairs, mh, |i1, k3| i1 * m * mh + k3);

        // axis 2, complex-to-real
        let c2r = Arc::clone(&self.plans.c2r);
        for (line, chunk) in self.half.chunks_exact_mut(mh).zip(out.chunks_exact_mut(m)) {
            line[0].im = 0.0;
            if m % 2 == 0 {
                line[mh - 1].im = 0.0;
            }
            c2r.process_with_scratch(line, chunk, &mut self.scratch)
                .expect("c2r transform rejected a Hermitian line");
        }
    }

    /// Project grid values onto the modes of `table`, normalised so that
    /// `analyze(synthesize(c)) == c`. The output is Hermitian by construction.
    pub fn analyze(&mut self, values: &[f64], table: &ModeTable, out: &mut [Complex64]) {
        let m = self.m;
        let mh = self.mh;
        let cutoff = table.cutoff() as i32;
        assert!(m > 2 * cutoff as usize, "grid too small for cutoff");
        assert_eq!(values.len(), self.points());
        assert_eq!(out.len(), table.len());

        let r2c = Arc::clone(&self.plans.r2c);
        for (line, chunk) in self.half.chunks_exact_mut(mh).zip(values.chunks_exact(m)) {
            self.real_line.copy_from_slice(chunk);
            r2c.process_with_scratch(&mut self.real_line, line, &mut self.scratch)
                .expect("r2c transform failed");
        }

        let fwd = Arc::clone(&self.plans.fwd);
        let pairs: Vec<(usize, usize)> = (0..m)
            .flat_map(|i1| (0..=cutoff as usize).map(move |k3| (i1, k3)))
            .collect();
        self.strided_pass(&*fwd, &pairs, mh, |i1, k3| i1 * m * mh + k3);

        let mut pairs = Vec::new();
        for n2 in -cutoff..=cutoff {
            for n3 in 0..=cutoff {
                if n2 * n2 + n3 * n3 <= cutoff * cutoff {
                    pairs.push((wrap(n2, m), n3 as usize));
                }
            }
        }
        self.strided_pass(&*fwd, &pairs, m * mh, |k2, k3| k2 * mh + k3);

        let scale = 1.0 / self.points() as f64;
        let modes = table.modes();
        for row in table.rows() {
            let base = (wrap(row.n1, m) * m + wrap(row.n2, m)) * mh;
            let centre = row.start + row.half as usize;
            for n3 in 0..=row.half as usize {
                out[centre + n3] = self.half[base + n3] * scale;
            }
        }
        // n3 < 0, and the lower half of the n3 = 0 plane, are conjugates
        for i in 0..table.len() {
            let n = modes[i];
            if n[2] < 0 || (n[2] == 0 && (n[1] < 0 || (n[1] == 0 && n[0] < 0))) {
                out[i] = out[table.neg_index(i)].conj();
            }
        }
        out[table.zero_index()].im = 0.0;
    }

    /// Run `fft` over the lines `(a, b) -> offset(a, b) + k * stride`,
    /// `k = 0..M`, in place in the half-spectrum buffer.
    fn strided_pass(
        &mut self,
        fft: &dyn Fft<f64>,
        pairs: &[(usize, usize)],
        stride: usize,
        offset: impl Fn(usize, usize) -> usize,
    ) {
        let m = self.m;
        for batch in pairs.chunks(LINE_BATCH) {
            let buf = &mut self.lines[..batch.len() * m];
            for (l, &(a, b)) in batch.iter().enumerate() {
                let off = offset(a, b);
                for k in 0..m {
                    buf[l * m + k] = self.half[off + k * stride];
                }
            }
            fft.process_with_scratch(buf, &mut self.scratch);
            for (l, &(a, b)) in batch.iter().enumerate() {
                let off = offset(a, b);
                for k in 0..m {
                    self.half[off + k * stride] = buf[l * m + k];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn direct_synthesis(table: &ModeTable, coeffs: &[Complex64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m * m * m];
        for i1 in 0..m {
            for i2 in 0..m {
                for i3 in 0..m {
                    let x = [i1, i2, i3].map(|i| 2.0 * PI * i as f64 / m as f64);
                    let mut acc = Complex64::default();
                    for (n, c) in table.modes().iter().zip(coeffs) {
                        let ph = n[0] as f64 * x[0] + n[1] as f64 * x[1] + n[2] as f64 * x[2];
                        acc += c * Complex64::from_polar(1.0, ph);
                    }
                    out[(i1 * m + i2) * m + i3] = acc.re;
                }
            }
        }
        out
    }

    fn hermitian_coeffs(table: &ModeTable) -> Vec<Complex64> {
        let mut c = vec![Complex64::default(); table.len()];
        for (i, n) in table.modes().iter().enumerate() {
            let v = Complex64::new(
                (0.3 * n[0] as f64 + 0.7 * n[1] as f64 - 0.2 * n[2] as f64).sin(),
                (1.1 * n[0] as f64 - 0.4 * n[1] as f64 + 0.9 * n[2] as f64).cos(),
            );
            c[i] = v;
        }
        for i in 0..table.len() {
            let j = table.neg_index(i);
            if j < i {
                c[i] = c[j].conj();
            }
        }
        c[table.zero_index()].im = 0.0;
        c
    }

    #[test]
    fn synthesis_matches_direct_sum() {
        let table = ModeTable::for_cutoff(2);
        let c = hermitian_coeffs(&table);
        for m in [5, 6, 9] {
            let mut t = GridTransform::new(m);
            let mut out = vec![0.0; m * m * m];
            t.synthesize(&table, &c, &mut out);
            let direct = direct_synthesis(&table, &c, m);
            for (a, b) in out.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-11, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn analysis_inverts_synthesis() {
        for cutoff in [0u32, 1, 3, 4] {
            let table = ModeTable::for_cutoff(cutoff);
            let c = hermitian_coeffs(&table);
            let m = 2 * cutoff as usize + 1 + 3;
            let mut t = GridTransform::new(m);
            let mut grid = vec![0.0; m * m * m];
            t.synthesize(&table, &c, &mut grid);
            let mut back = vec![Complex64::default(); table.len()];
            t.analyze(&grid, &table, &mut back);
            for (a, b) in c.iter().zip(&back) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
