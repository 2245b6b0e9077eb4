//! Gaussian Fourier coefficients and the random initial data built from them.
//!
//! Every independent mode draws from its own ChaCha8 block, addressed by the
//! mode itself, so a draw at cutoff `N` is exactly the restriction of any draw
//! at a larger cutoff with the same seed.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{FrequencyBox, Mode, SpectralField};

/// Independent half lattice: `n3 > 0`, or `n3 = 0, n2 > 0`, or
/// `n3 = n2 = 0, n1 > 0`, plus the origin.
#[inline]
pub fn in_index_set(n: Mode) -> bool {
    n[2] > 0 || (n[2] == 0 && (n[1] > 0 || (n[1] == 0 && n[0] >= 0)))
}

const KEY_OFFSET: i64 = 1 << 20;

#[inline]
fn mode_key(n: Mode) -> u128 {
    let k = |c: i32| (i64::from(c) + KEY_OFFSET) as u64;
    let packed = (k(n[0]) << 42) | (k(n[1]) << 21) | k(n[2]);
    u128::from(packed) * 16
}

#[inline]
fn uniform53(rng: &mut ChaCha8Rng) -> f64 {
    let hi = u64::from(rng.next_u32());
    let lo = u64::from(rng.next_u32());
    let bits = ((hi << 32) | lo) >> 11;
    (bits as f64 + 0.5) / (1u64 << 53) as f64
}

#[inline]
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = uniform53(rng);
    let u2 = uniform53(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

/// `(g_n, h_n)` for a mode of the index set.
fn mode_gaussians(rng: &mut ChaCha8Rng, n: Mode) -> (Complex64, Complex64) {
    rng.set_word_pos(mode_key(n));
    let (a, b) = normal_pair(rng);
    let (c, d) = normal_pair(rng);
    if n == [0, 0, 0] {
        (Complex64::new(a, 0.0), Complex64::new(c, 0.0))
    } else {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        (Complex64::new(a * w, b * w), Complex64::new(c * w, d * w))
    }
}

/// One sample of the coefficient families `{g_n}`, `{h_n}` on `|n| <= N_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianDraw {
    master_seed: u64,
    n_max: u32,
    g: SpectralField,
    h: SpectralField,
}

impl GaussianDraw {
    pub fn sample(master_seed: u64, n_max: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        let bx = FrequencyBox::new(n_max);
        let table = bx.modes();
        let (g, h): (Vec<Complex64>, Vec<Complex64>) = table
            .modes()
            .iter()
            .map(|&n| {
                if in_index_set(n) {
                    mode_gaussians(&mut rng, n)
                } else {
                    let (g, h) = mode_gaussians(&mut rng, [-n[0], -n[1], -n[2]]);
                    (g.conj(), h.conj())
                }
            })
            .unzip();
        let field = |c| SpectralField::from_coefficients(bx, c).expect("one coefficient per mode");
        Self {
            master_seed,
            n_max,
            g: field(g),
            h: field(h),
        }
    }

    /// All coefficients zero.
    pub fn zero(n_max: u32) -> Self {
        let bx = FrequencyBox::new(n_max);
        Self {
            master_seed: 0,
            n_max,
            g: SpectralField::zeros(bx),
            h: SpectralField::zeros(bx),
        }
    }

    /// Draw with prescribed coefficients (both Hermitian, same cutoff).
    pub fn from_fields(master_seed: u64, g: SpectralField, h: SpectralField) -> Result<Self> {
        if g.cutoff() != h.cutoff() {
            return Err(Error::BoxMismatch {
                left: g.cutoff(),
                right: h.cutoff(),
            });
        }
        g.check_hermitian()?;
        h.check_hermitian()?;
        Ok(Self {
            master_seed,
            n_max: g.cutoff(),
            g,
            h,
        })
    }

    #[inline]
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    #[inline]
    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    #[inline]
    pub fn g(&self) -> &SpectralField {
        &self.g
    }

    #[inline]
    pub fn h(&self) -> &SpectralField {
        &self.h
    }

    pub fn restrict(&self, cutoff: u32) -> Result<Self> {
        self.check_cutoff(cutoff)?;
        Ok(Self {
            master_seed: self.master_seed,
            n_max: cutoff,
            g: self.g.truncated(cutoff),
            h: self.h.truncated(cutoff),
        })
    }

    pub(crate) fn check_cutoff(&self, cutoff: u32) -> Result<()> {
        if cutoff > self.n_max {
            return Err(Error::CutoffExceedsDraw {
                requested: cutoff,
                available: self.n_max,
            });
        }
        Ok(())
    }
}

/// `cos(t b) g_n + sin(t b) h_n`.
pub fn rotated_gauss(draw: &GaussianDraw, n: Mode, t: f64, bracket_value: f64) -> Result<Complex64> {
    if !(bracket_value > 0.0) {
        return Err(Error::InvalidParameter(format!("bracket value {bracket_value} must be positive")));
    }
    let i = draw.g.table().index_of(n).ok_or(Error::ModeOutsideBox(n))?;
    let (s, c) = (t * bracket_value).sin_cos();
    Ok(draw.g.coefficients()[i] * c + draw.h.coefficients()[i] * s)
}

/// Position and velocity of a field pair.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    pub position: SpectralField,
    pub velocity: SpectralField,
}

impl InitialData {
    pub fn zeros(cutoff: u32) -> Self {
        Self {
            position: SpectralField::zeros_cutoff(cutoff),
            velocity: SpectralField::zeros_cutoff(cutoff),
        }
    }

    /// Sum on the larger of the two cutoffs.
    pub fn plus(&self, other: &InitialData) -> InitialData {
        InitialData {
            position: self.position.plus_scaled(1.0, &other.position),
            velocity: self.velocity.plus_scaled(1.0, &other.velocity),
        }
    }

    pub fn truncated(&self, cutoff: u32) -> InitialData {
        InitialData {
            position: self.position.truncated(cutoff),
            velocity: self.velocity.truncated(cutoff),
        }
    }
}

/// Free Klein-Gordon wave of mass `a` started from the randomised data
/// `(g_n A_n, h_n A_n omega_n)`, `omega_n = (a + |n|^2)^{1/2}`,
/// `A_n = 1 / (omega_n <n>^{alpha-1})`, evaluated in closed form at time `t`.
pub fn free_wave(draw: &GaussianDraw, cutoff: u32, alpha: f64, mass: f64, t: f64) -> Result<InitialData> {
    draw.check_cutoff(cutoff)?;
    if !(mass >= 1.0) {
        return Err(Error::InvalidParameter(format!("mass {mass} must be at least 1")));
    }
    let bx = FrequencyBox::new(cutoff);
    let mut position = SpectralField::zeros(bx);
    let mut velocity = SpectralField::zeros(bx);
    let table = position.table().modes().to_vec();
    let norms = position.table().norm_sq().to_vec();
    let gi = draw.g.table();
    let (gc, hc) = (draw.g.coefficients(), draw.h.coefficients());
    let same = gi.cutoff() == cutoff;
    for (i, (&n, &k)) in table.iter().zip(&norms).enumerate() {
        let j = if same { i } else { gi.index_of(n).expect("restricted mode") };
        let k = f64::from(k);
        let omega = (mass + k).sqrt();
        let soft = (1.0 + k).powf(0.5 * (alpha - 1.0));
        let (s, c) = (t * omega).sin_cos();
        position.coefficients_mut()[i] = (gc[j] * c + hc[j] * s) / (omega * soft);
        velocity.coefficients_mut()[i] = (hc[j] * c - gc[j] * s) / soft;
    }
    Ok(InitialData { position, velocity })
}

/// `(g_n / <n>^alpha, h_n / <n>^{alpha-1})` on `|n| <= N`.
pub fn truncated_data(draw: &GaussianDraw, cutoff: u32, alpha: f64) -> Result<InitialData> {
    free_wave(draw, cutoff, alpha, 1.0, 0.0)
}

/// `(g_n / (<n>_N <n>^{alpha-1}), h_n / <n>^{alpha-1})` with
/// `<n>_N = (C_N + |n|^2)^{1/2}`.
pub fn modified_data(draw: &GaussianDraw, cutoff: u32, alpha: f64, c_n: f64) -> Result<InitialData> {
    if !(c_n >= 1.0) {
        return Err(Error::InvalidParameter(format!("C_N = {c_n} must be at least 1")));
    }
    free_wave(draw, cutoff, alpha, c_n, 0.0)
}
