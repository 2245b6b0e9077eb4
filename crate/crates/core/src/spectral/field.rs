use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::GridTransform;
use super::lattice::{FrequencyBox, Mode, ModeTable};
use crate::error::{Error, Result};

/// `(2 pi)^3`, the squared `L^2(T^3)` norm of each exponential `e^{i n.x}`.
pub const TORUS_VOLUME: f64 = 8.0 * PI * PI * PI;

const HERMITIAN_TOL: f64 = 1e-12;

thread_local! {
    static TRANSFORMS: RefCell<HashMap<usize, GridTransform>> = RefCell::new(HashMap::new());
}

/// Run `f` with this thread's cached transform for an `m`-point grid.
pub(crate) fn with_transform<R>(m: usize, f: impl FnOnce(&mut GridTransform) -> R) -> R {
    TRANSFORMS.with(|cell| {
        let mut map = cell.borrow_mut();
        let t = map.entry(m).or_insert_with(|| GridTransform::new(m));
        f(t)
    })
}

/// Real field on `T^3` stored by its Fourier coefficients on `|n| <= N`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    bx: FrequencyBox,
    table: Arc<ModeTable>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.bx == other.bx && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(bx: FrequencyBox) -> Self {
        let table = bx.modes();
        let coeffs = vec![Complex64::default(); table.len()];
        Self { bx, table, coeffs }
    }

    /// Zero field on the default box for `cutoff`.
    pub fn zeros_cutoff(cutoff: u32) -> Self {
        Self::zeros(FrequencyBox::new(cutoff))
    }

    /// Wrap coefficients given in lexicographic mode order, rejecting input
    /// that does not describe a real function.
    pub fn from_coefficients(bx: FrequencyBox, coeffs: Vec<Complex64>) -> Result<Self> {
        let table = bx.modes();
        if coeffs.len() != table.len() {
            return Err(Error::LengthMismatch {
                expected: table.len(),
                got: coeffs.len(),
            });
        }
        let f = Self { bx, table, coeffs };
        f.check_hermitian()?;
        Ok(f)
    }

    /// Build from a per-mode function. Values are taken on the half lattice
    /// and mirrored, so the result is exactly Hermitian.
    pub fn from_fn(bx: FrequencyBox, mut f: impl FnMut(Mode) -> Complex64) -> Self {
        let mut out = Self::zeros(bx);
        let len = out.coeffs.len();
        let zero = out.table.zero_index();
        for i in zero..len {
            out.coeffs[i] = f(out.table.modes()[i]);
        }
        out.coeffs[zero].im = 0.0;
        for i in 0..zero {
            out.coeffs[i] = out.coeffs[len - 1 - i].conj();
        }
        out
    }

    /// `amplitude * cos(n.x)`.
    pub fn cosine(bx: FrequencyBox, n: Mode, amplitude: f64) -> Result<Self> {
        Self::trig(bx, n, Complex64::new(amplitude, 0.0))
    }

    /// `amplitude * sin(n.x)`.
    pub fn sine(bx: FrequencyBox, n: Mode, amplitude: f64) -> Result<Self> {
        if n == [0, 0, 0] {
            return Ok(Self::zeros(bx));
        }
        Self::trig(bx, n, Complex64::new(0.0, -amplitude))
    }

    fn trig(bx: FrequencyBox, n: Mode, c: Complex64) -> Result<Self> {
        let mut f = Self::zeros(bx);
        let i = f.table.index_of(n).ok_or(Error::ModeOutsideBox(n))?;
        let j = f.table.neg_index(i);
        if i == j {
            f.coeffs[i] = Complex64::new(c.re, 0.0);
        } else {
            f.coeffs[i] += c * 0.5;
            f.coeffs[j] += c.conj() * 0.5;
        }
        Ok(f)
    }

    pub fn constant(bx: FrequencyBox, c: f64) -> Self {
        let mut f = Self::zeros(bx);
        let z = f.table.zero_index();
        f.coeffs[z] = Complex64::new(c, 0.0);
        f
    }

    #[inline]
    pub fn frequency_box(&self) -> FrequencyBox {
        self.bx
    }

    #[inline]
    pub fn cutoff(&self) -> u32 {
        self.bx.cutoff()
    }

    #[inline]
    pub fn table(&self) -> &ModeTable {
        &self.table
    }

    #[inline]
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mutable access for per-mode maps that preserve Hermitian symmetry.
    #[inline]
    pub(crate) fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, n: Mode) -> Option<Complex64> {
        self.table.index_of(n).map(|i| self.coeffs[i])
    }

    /// Largest `|c(-n) - conj(c(n))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> (f64, Mode) {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        let mut worst = (0.0, [0, 0, 0]);
        for i in 0..self.coeffs.len() {
            let d = (self.coeffs[i] - self.coeffs[self.table.neg_index(i)].conj()).norm() / scale;
            if d > worst.0 {
                worst = (d, self.table.modes()[i]);
            }
        }
        worst
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let (defect, mode) = self.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { mode, defect });
        }
        Ok(())
    }

    /// Multiply each coefficient by a real function of `|n|^2`.
    pub fn map_radial(&self, f: impl Fn(u32) -> f64) -> Self {
        let mut out = self.clone();
        for (c, &k) in out.coeffs.iter_mut().zip(self.table.norm_sq()) {
            *c *= f(k);
        }
        out
    }

    /// `<nabla>^s f`.
    pub fn apply_bessel(&self, s: f64) -> Self {
        if s == 0.0 {
            return self.clone();
        }
        self.map_radial(|k| (1.0 + f64::from(k)).powf(0.5 * s))
    }

    /// Same field on another box: truncates modes beyond the new cutoff and
    /// pads with zeros below it.
    pub fn resized(&self, bx: FrequencyBox) -> Self {
        let mut out = Self::zeros(bx);
        if bx.cutoff() <= self.cutoff() {
            let idx = out.table.embedding_into(&self.table);
            for (o, &i) in out.coeffs.iter_mut().zip(&idx) {
                *o = self.coeffs[i];
            }
        } else {
            let idx = self.table.embedding_into(&out.table);
            for (c, &i) in self.coeffs.iter().zip(&idx) {
                out.coeffs[i] = *c;
            }
        }
        out
    }

    /// Restriction to `|n| <= cutoff` on the default box of that cutoff.
    pub fn truncated(&self, cutoff: u32) -> Self {
        self.resized(FrequencyBox::new(cutoff))
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    /// `self += a * other`; the cutoffs must agree.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        if self.cutoff() != other.cutoff() {
            return Err(Error::BoxMismatch {
                left: self.cutoff(),
                right: other.cutoff(),
            });
        }
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o * a;
        }
        Ok(())
    }

    /// `self + a * other` on the larger of the two cutoffs.
    pub fn plus_scaled(&self, a: f64, other: &SpectralField) -> SpectralField {
        let bx = if self.cutoff() >= other.cutoff() {
            self.bx
        } else {
            other.bx
        };
        let mut out = self.resized(bx);
        let o = other.resized(bx);
        for (c, v) in out.coeffs.iter_mut().zip(&o.coeffs) {
            *c += v * a;
        }
        out
    }

    pub fn add_constant(&mut self, c: f64) {
        let z = self.table.zero_index();
        self.coeffs[z].re += c;
    }

    /// Squared `H^s` norm, exact: `(2 pi)^3 sum <n>^{2s} |c_n|^2`.
    pub fn hs_norm_sq(&self, s: f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(self.table.norm_sq())
            .map(|(c, &k)| (1.0 + f64::from(k)).powf(s) * c.norm_sqr())
            .sum();
        TORUS_VOLUME * sum
    }

    pub fn hs_norm(&self, s: f64) -> f64 {
        self.hs_norm_sq(s).sqrt()
    }

    /// `H^s` norm of `self - other`, comparing on the union of both boxes.
    pub fn hs_distance(&self, other: &SpectralField, s: f64) -> f64 {
        self.plus_scaled(-1.0, other).hs_norm(s)
    }

    /// Real `L^2` inner product `int f g dx`.
    pub fn l2_inner(&self, other: &SpectralField) -> f64 {
        let (a, b) = if self.cutoff() <= other.cutoff() {
            (self, other)
        } else {
            (other, self)
        };
        let idx = a.table.embedding_into(&b.table);
        let sum: f64 = a
            .coeffs
            .iter()
            .zip(&idx)
            .map(|(c, &i)| (c * b.coeffs[i].conj()).re)
            .sum();
        TORUS_VOLUME * sum
    }

    /// Point value `sum_n c_n e^{i n.x}`.
    pub fn evaluate(&self, x: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for (c, n) in self.coeffs.iter().zip(self.table.modes()) {
            let ph = f64::from(n[0]) * x[0] + f64::from(n[1]) * x[1] + f64::from(n[2]) * x[2];
            let (s, co) = ph.sin_cos();
            acc += c.re * co - c.im * s;
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Grid values on the box grid.
    pub fn to_grid(&self) -> GridField {
        self.to_grid_on(self.bx.grid()).expect("box grid always holds its own cutoff")
    }

    /// Grid values on an `m^3` grid, `m >= 2N + 1`.
    pub fn to_grid_on(&self, m: usize) -> Result<GridField> {
        let mut values = vec![0.0; m * m * m];
        self.synthesize_into(m, &mut values)?;
        Ok(GridField { grid: m, values })
    }

    pub(crate) fn synthesize_into(&self, m: usize, out: &mut [f64]) -> Result<()> {
        if m < 2 * self.cutoff() as usize + 1 {
            return Err(Error::GridTooSmall {
                cutoff: self.cutoff(),
                grid: m,
            });
        }
        with_transform(m, |t| t.synthesize(&self.table, &self.coeffs, out));
        Ok(())
    }
}

/// Real values on the uniform `M^3` grid, `x = 2 pi i / M`, row-major with the
/// last coordinate fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    grid: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid * grid * grid {
            return Err(Error::LengthMismatch {
                expected: grid * grid * grid,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("grid values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    /// Sample a function of `x` on the grid.
    pub fn from_fn(grid: usize, f: impl Fn([f64; 3]) -> f64) -> Self {
        let h = 2.0 * PI / grid as f64;
        let mut values = Vec::with_capacity(grid * grid * grid);
        for i1 in 0..grid {
            for i2 in 0..grid {
                for i3 in 0..grid {
                    values.push(f([i1 as f64 * h, i2 as f64 * h, i3 as f64 * h]));
                }
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> usize {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Fourier coefficients on `|n| <= cutoff`; needs `M >= 2 cutoff + 1`.
    pub fn to_spectral(&self, cutoff: u32) -> Result<SpectralField> {
        if self.grid < 2 * cutoff as usize + 1 {
            return Err(Error::GridTooSmall {
                cutoff,
                grid: self.grid,
            });
        }
        let mut out = SpectralField::zeros(FrequencyBox::new(cutoff));
        let table = Arc::clone(&out.table);
        with_transform(self.grid, |t| t.analyze(&self.values, &table, &mut out.coeffs));
        Ok(out)
    }

    /// Trapezoid `L^p` norm, `p = inf` gives the grid maximum.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        let cell = TORUS_VOLUME / self.values.len() as f64;
        let sum: f64 = if p == 2.0 {
            self.values.iter().map(|v| v * v).sum()
        } else if p == 4.0 {
            self.values.iter().map(|v| (v * v) * (v * v)).sum()
        } else {
            self.values.iter().map(|v| v.abs().powf(p)).sum()
        };
        (cell * sum).powf(1.0 / p)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_pair_on_grid() {
        let bx = FrequencyBox::new(3);
        let n = [1, -2, 1];
        let f = SpectralField::cosine(bx, n, 1.0).unwrap();
        let g = f.to_grid();
        let expect = GridField::from_fn(bx.grid(), |x| (n[0] as f64 * x[0] + n[1] as f64 * x[1] + n[2] as f64 * x[2]).cos());
        for (a, b) in g.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_and_sine() {
        let bx = FrequencyBox::new(2);
        let g = SpectralField::constant(bx, 2.5).to_grid();
        assert!(g.values().iter().all(|v| (v - 2.5).abs() < 1e-14));
        let s = SpectralField::sine(bx, [0, 1, 0], 1.0).unwrap().to_grid();
        let e = GridField::from_fn(bx.grid(), |x| x[1].sin());
        for (a, b) in s.values().iter().zip(e.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let bx = FrequencyBox::new(1);
        let mut c = vec![Complex64::default(); 7];
        c[0] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            SpectralField::from_coefficients(bx, c),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn grid_too_small_for_cutoff() {
        let g = GridField::from_fn(8, |_| 1.0);
        assert!(matches!(g.to_spectral(4), Err(Error::GridTooSmall { .. })));
        assert!(g.to_spectral(3).is_ok());
    }

    #[test]
    fn bessel_scales_first_shell() {
        let bx = FrequencyBox::new(2);
        let f = SpectralField::cosine(bx, [1, 0, 0], 1.0).unwrap();
        let g = f.apply_bessel(0.5);
        let c = g.coeff([1, 0, 0]).unwrap();
        assert!((c.re - 0.5 * 2f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(f.apply_bessel(0.0), f);
    }

    #[test]
    fn sobolev_norm_of_cosine() {
        let bx = FrequencyBox::new(2);
        let f = SpectralField::cosine(bx, [1, 0, 0], 1.0).unwrap();
        let expect = TORUS_VOLUME * 2f64.sqrt() / 2.0;
        assert!((f.hs_norm_sq(0.5) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn resize_round_trip() {
        let bx = FrequencyBox::new(2);
        let f = SpectralField::from_fn(bx, |n| Complex64::new(n[0] as f64, n[2] as f64));
        let big = f.resized(FrequencyBox::new(5));
        assert_eq!(big.truncated(2), f);
        assert_eq!(big.coeff([0, 0, 4]), Some(Complex64::default()));
    }
}
