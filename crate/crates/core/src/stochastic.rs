//! Stochastic objects: the random linear wave `z1`, its Wick powers `Z2`,
//! `Z3`, the Duhamel term `z2 = -L^{-1} Z3` and the quintic term `Z5 = Z2 z2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::{free_wave, GaussianDraw, InitialData};
use crate::renorm::{sigma_exact, sigma_tail, wave_variance};
use crate::spectral::{
    dealiased_product, lp_block, paraproduct_split, polynomial_map, FrequencyBox, NormSpec, Paraproducts,
    SpectralField,
};
use crate::stats::{jackknife, linear_fit, mean_se, sample_seed};

/// Frequency cutoff, mass and Wick constant of a random linear wave.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveModel {
    pub alpha: f64,
    pub cutoff: u32,
    /// Klein-Gordon mass `a`, phases `t (a + |n|^2)^{1/2}`
    pub mass: f64,
    /// pointwise variance of `z1`
    pub sigma: f64,
}

impl WaveModel {
    /// Mass one, amplitudes `<n>^{-alpha}`, `sigma = sigma_N`.
    pub fn renormalized(alpha: f64, cutoff: u32) -> Self {
        Self {
            alpha,
            cutoff,
            mass: 1.0,
            sigma: sigma_exact(alpha, cutoff),
        }
    }

    /// Mass `C_N`, amplitudes `1/(<n>_N <n>^{alpha-1})`.
    pub fn modified(alpha: f64, cutoff: u32, c_n: f64) -> Result<Self> {
        if !(c_n >= 1.0) {
            return Err(Error::InvalidParameter(format!("C_N = {c_n} must be at least 1")));
        }
        Ok(Self {
            alpha,
            cutoff,
            mass: c_n,
            sigma: wave_variance(alpha, cutoff, c_n),
        })
    }

    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        let mut m = *self;
        m.cutoff = cutoff;
        m.sigma = wave_variance(self.alpha, cutoff, self.mass);
        m
    }
}

/// `z1(t)` in closed form.
pub fn z1_at(draw: &GaussianDraw, model: &WaveModel, t: f64) -> Result<SpectralField> {
    Ok(free_wave(draw, model.cutoff, model.alpha, model.mass, t)?.position)
}

/// `(z1(t), d/dt z1(t))`.
pub fn z1_state_at(draw: &GaussianDraw, model: &WaveModel, t: f64) -> Result<InitialData> {
    free_wave(draw, model.cutoff, model.alpha, model.mass, t)
}

/// `z^2 - sigma` on `|n| <= 2N`.
pub fn wick_square(z1: &SpectralField, sigma: f64) -> Result<SpectralField> {
    wick_square_to(z1, sigma, 2 * z1.cutoff())
}

/// `z^3 - 3 sigma z` on `|n| <= 3N`.
pub fn wick_cube(z1: &SpectralField, sigma: f64) -> Result<SpectralField> {
    wick_cube_to(z1, sigma, 3 * z1.cutoff())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must be nonnegative")));
    }
    Ok(())
}

/// `z^2 - sigma` restricted to `|n| <= out_cutoff`.
pub fn wick_square_to(z1: &SpectralField, sigma: f64, out_cutoff: u32) -> Result<SpectralField> {
    check_sigma(sigma)?;
    let mut out = dealiased_product(z1, z1, out_cutoff)?;
    out.add_constant(-sigma);
    Ok(out)
}

/// `z^3 - 3 sigma z` restricted to `|n| <= out_cutoff`.
pub fn wick_cube_to(z1: &SpectralField, sigma: f64, out_cutoff: u32) -> Result<SpectralField> {
    check_sigma(sigma)?;
    let mut out = polynomial_map(&[z1], 3 * z1.cutoff(), out_cutoff, None, |v| v[0] * v[0] * v[0])?;
    let lin = z1.resized(out.frequency_box());
    out.axpy(-3.0 * sigma, &lin)?;
    Ok(out)
}

/// Streaming Duhamel integral for `(d_t^2 - Delta + a) z = F`, zero data.
///
/// Per mode, `z(t) = [sin(wt) A(t) - cos(wt) B(t)] / w` with
/// `A = int_0^t cos(ws) F(s) ds`, `B = int_0^t sin(ws) F(s) ds`, both
/// accumulated by the trapezoid rule over the pushed samples.
pub struct DuhamelIntegrator {
    mass: f64,
    bx: FrequencyBox,
    omega: Vec<f64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    last: Option<(f64, SpectralField)>,
}

impl DuhamelIntegrator {
    pub fn new(cutoff: u32, mass: f64) -> Result<Self> {
        if !(mass >= 1.0) {
            return Err(Error::InvalidParameter(format!("mass {mass} must be at least 1")));
        }
        let bx = FrequencyBox::new(cutoff);
        let omega: Vec<f64> = bx.modes().norm_sq().iter().map(|&k| (mass + f64::from(k)).sqrt()).collect();
        let len = omega.len();
        Ok(Self {
            mass,
            bx,
            omega,
            a: vec![Complex64::default(); len],
            b: vec![Complex64::default(); len],
            last: None,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Add the forcing sample `F(t)` (times strictly increasing, starting at
    /// 0) and return `(z(t), d_t z(t))`.
    pub fn push(&mut self, t: f64, forcing: &SpectralField) -> Result<InitialData> {
        let f = forcing.resized(self.bx);
        match &self.last {
            None => {
                if t != 0.0 {
                    return Err(Error::TimeGrid("Duhamel integration starts at t = 0".into()));
                }
            }
            Some((t0, f0)) => {
                let h = t - t0;
                if !(h > 0.0) {
                    return Err(Error::TimeGrid("sample times must increase".into()));
                }
                let (c0, c1) = (f0.coefficients(), f.coefficients());
                for i in 0..self.omega.len() {
                    let w = self.omega[i];
                    let (s0, co0) = (w * t0).sin_cos();
                    let (s1, co1) = (w * t).sin_cos();
                    self.a[i] += (c0[i] * co0 + c1[i] * co1) * (0.5 * h);
                    self.b[i] += (c0[i] * s0 + c1[i] * s1) * (0.5 * h);
                }
            }
        }
        let mut pos = SpectralField::zeros(self.bx);
        let mut vel = SpectralField::zeros(self.bx);
        {
            let p = pos.coefficients_mut();
            for i in 0..self.omega.len() {
                let w = self.omega[i];
                let (s, c) = (w * t).sin_cos();
                p[i] = (self.a[i] * s - self.b[i] * c) / w;
            }
        }
        {
            let v = vel.coefficients_mut();
            for i in 0..self.omega.len() {
                let (s, c) = (self.omega[i] * t).sin_cos();
                v[i] = self.a[i] * c + self.b[i] * s;
            }
        }
        self.last = Some((t, f));
        Ok(InitialData {
            position: pos,
            velocity: vel,
        })
    }
}

/// Node index of `t` on the grid `j h`, if it lies on it.
pub(crate) fn node_index(t: f64, h: f64) -> Option<usize> {
    let r = t / h;
    let j = r.round();
    ((r - j).abs() < 1e-7 && j >= 0.0).then_some(j as usize)
}

/// `z2 = -L_a^{-1} Z3` and its time derivative at the requested times.
///
/// `Z3` is evaluated in closed form at the quadrature nodes `j h` and
/// restricted to `|n| <= object_cutoff`; every requested time must be a node.
pub fn z2_trajectory(
    draw: &GaussianDraw,
    model: &WaveModel,
    times: &[f64],
    quadrature_dt: f64,
    object_cutoff: u32,
) -> Result<Vec<InitialData>> {
    if times.is_empty() {
        return Err(Error::TimeGrid("empty time grid".into()));
    }
    if !(quadrature_dt > 0.0) {
        return Err(Error::TimeGrid("quadrature step must be positive".into()));
    }
    let nodes: Vec<usize> = times
        .iter()
        .map(|&t| {
            node_index(t, quadrature_dt)
                .ok_or_else(|| Error::TimeGrid(format!("time {t} is not a multiple of the quadrature step")))
        })
        .collect::<Result<_>>()?;
    let last = *nodes.iter().max().expect("nonempty");
    let mut integ = DuhamelIntegrator::new(object_cutoff, model.mass)?;
    let mut at_node: Vec<Option<InitialData>> = vec![None; last + 1];
    let wanted: std::collections::HashSet<usize> = nodes.iter().copied().collect();
    for j in 0..=last {
        let t = j as f64 * quadrature_dt;
        let z1 = z1_at(draw, model, t)?;
        let z3 = wick_cube_to(&z1, model.sigma, object_cutoff)?;
        let mut state = integ.push(t, &z3.scaled(-1.0))?;
        if wanted.contains(&j) {
            state.position.check_hermitian()?;
            at_node[j] = Some(std::mem::replace(&mut state, InitialData::zeros(0)));
        }
    }
    Ok(nodes
        .iter()
        .map(|&j| at_node[j].clone().expect("node visited"))
        .collect())
}

/// The quintic term `Z5 = Z2 z2` with its Bony pieces.
#[derive(Clone, Debug)]
pub struct Z5Pieces {
    pub low: SpectralField,
    pub resonant: SpectralField,
    pub high: SpectralField,
    pub total: SpectralField,
}

/// `Z2 z2` on `|n| <= out_cutoff`, split into paraproducts.
pub fn z5_at(wick2: &SpectralField, z2: &SpectralField, out_cutoff: u32) -> Result<Z5Pieces> {
    let Paraproducts { low, resonant, high } = paraproduct_split(wick2, z2, out_cutoff)?;
    let total = dealiased_product(wick2, z2, out_cutoff)?;
    Ok(Z5Pieces {
        low,
        resonant,
        high,
        total,
    })
}

/// Resonant piece `sum_{|j-k| <= 2} P_j f P_k g` alone.
pub fn resonant_product(f: &SpectralField, g: &SpectralField, out_cutoff: u32) -> Result<SpectralField> {
    let bf = crate::spectral::block_count(f.cutoff());
    let bg = crate::spectral::block_count(g.cutoff());
    let mut out = SpectralField::zeros(FrequencyBox::new(out_cutoff));
    for k in 0..bg {
        let gk = lp_block(g, k);
        let lo = k.saturating_sub(2);
        if lo >= bf {
            continue;
        }
        let fk = f.map_radial(|q| {
            let b = crate::spectral::block_of(q);
            if b >= lo && b <= k + 2 {
                1.0
            } else {
                0.0
            }
        });
        out.axpy(1.0, &dealiased_product(&fk, &gk, out_cutoff)?)?;
    }
    Ok(out)
}

/// Pointwise variance of `Z_{j,M} - Z_{j,N}` for the mass-one wave.
pub fn exact_diff_variance(j: u32, alpha: f64, n: u32, m: u32) -> Result<f64> {
    if m < n {
        return Err(Error::InvalidParameter(format!("M = {m} below N = {n}")));
    }
    let tau = sigma_tail(alpha, n, m);
    match j {
        1 => Ok(tau),
        2 => {
            let s = sigma_exact(alpha, n);
            Ok(4.0 * s * tau + 2.0 * tau * tau)
        }
        3 => {
            let sn = sigma_exact(alpha, n);
            let sm = sn + tau;
            Ok(6.0 * (sm.powi(3) - sn.powi(3)))
        }
        _ => Err(Error::InvalidParameter(format!("object index {j} not in 1..=3"))),
    }
}

/// Which Wick power to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectSelector {
    Z1,
    Z2,
    Z3,
}

impl ObjectSelector {
    pub fn degree(self) -> u32 {
        match self {
            ObjectSelector::Z1 => 1,
            ObjectSelector::Z2 => 2,
            ObjectSelector::Z3 => 3,
        }
    }

    /// Hermite polynomial `H_k(z; sigma)`.
    #[inline]
    pub fn hermite(self, z: f64, sigma: f64) -> f64 {
        match self {
            ObjectSelector::Z1 => z,
            ObjectSelector::Z2 => z * z - sigma,
            ObjectSelector::Z3 => z * z * z - 3.0 * sigma * z,
        }
    }
}

/// Value of `z1(t, x)` for one draw, computed mode by mode. When
/// `inner < cutoff`, also returns the partial sum over `|n| <= inner`.
pub fn z1_point(draw: &GaussianDraw, model: &WaveModel, inner: u32, t: f64, x: [f64; 3]) -> Result<(f64, f64)> {
    draw.check_cutoff(model.cutoff)?;
    let table = draw.g().table();
    let (g, h) = (draw.g().coefficients(), draw.h().coefficients());
    let inner_sq = u64::from(inner) * u64::from(inner);
    let outer_sq = u64::from(model.cutoff) * u64::from(model.cutoff);
    let (mut full, mut part) = (0.0, 0.0);
    for (i, (n, &k)) in table.modes().iter().zip(table.norm_sq()).enumerate() {
        if u64::from(k) > outer_sq {
            continue;
        }
        let kf = f64::from(k);
        let omega = (model.mass + kf).sqrt();
        let amp = 1.0 / (omega * (1.0 + kf).powf(0.5 * (model.alpha - 1.0)));
        let (s, c) = (t * omega).sin_cos();
        let coef = (g[i] * c + h[i] * s) * amp;
        let ph = f64::from(n[0]) * x[0] + f64::from(n[1]) * x[1] + f64::from(n[2]) * x[2];
        let (ps, pc) = ph.sin_cos();
        let v = coef.re * pc - coef.im * ps;
        full += v;
        if u64::from(k) <= inner_sq {
            part += v;
        }
    }
    Ok((full, part))
}

/// Pointwise samples of `H_k(z1(t, x))` over an ensemble of draws.
pub fn pointwise_samples(
    selector: ObjectSelector,
    model: &WaveModel,
    samples: usize,
    seed: u64,
    t: f64,
    x: [f64; 3],
) -> Result<Vec<f64>> {
    (0..samples as u64)
        .map(|i| {
            let d = GaussianDraw::sample(sample_seed(seed, i), model.cutoff);
            let (z, _) = z1_point(&d, model, model.cutoff, t, x)?;
            Ok(selector.hermite(z, model.sigma))
        })
        .collect()
}

/// Pointwise samples of `Z_{j,M}(t,x) - Z_{j,N}(t,x)`, `M = model.cutoff`.
pub fn pointwise_tail_samples(
    selector: ObjectSelector,
    model: &WaveModel,
    inner: u32,
    samples: usize,
    seed: u64,
    t: f64,
    x: [f64; 3],
) -> Result<Vec<f64>> {
    let sigma_in = wave_variance(model.alpha, inner, model.mass);
    (0..samples as u64)
        .map(|i| {
            let d = GaussianDraw::sample(sample_seed(seed, i), model.cutoff);
            let (zm, zn) = z1_point(&d, model, inner, t, x)?;
            Ok(selector.hermite(zm, model.sigma) - selector.hermite(zn, sigma_in))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    /// `E|X|^p^{1/p} / E|X|^2^{1/2}`
    pub ratio: f64,
    pub stderr: f64,
    /// `(p - 1)^{k/2}`
    pub bound: f64,
}

/// Monte Carlo `L^p(Omega) / L^2(Omega)` ratio at a fixed `(t, x)`.
pub fn moment_ratio(
    selector: ObjectSelector,
    p: u32,
    samples: usize,
    seed: u64,
    model: &WaveModel,
    t: f64,
    x: [f64; 3],
) -> Result<MomentEstimate> {
    if samples < 100 {
        return Err(Error::InvalidParameter(format!("{samples} samples is below the minimum of 100")));
    }
    if p != 4 && p != 6 {
        return Err(Error::InvalidParameter(format!("moment order {p} not in {{4, 6}}")));
    }
    let xs = pointwise_samples(selector, model, samples, seed, t, x)?;
    let pf = f64::from(p);
    let stat = |v: &[f64]| {
        let n = v.len() as f64;
        let mp = v.iter().map(|x| x.abs().powf(pf)).sum::<f64>() / n;
        let m2 = v.iter().map(|x| x * x).sum::<f64>() / n;
        mp.powf(1.0 / pf) / m2.sqrt()
    };
    let (ratio, stderr) = jackknife(&xs, 50, stat);
    Ok(MomentEstimate {
        ratio,
        stderr,
        bound: (pf - 1.0).powf(0.5 * f64::from(selector.degree())),
    })
}

/// One rung of a modulus-of-continuity table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub h: f64,
    pub mean_norm: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub rows: Vec<ContinuityRow>,
    /// least-squares slope of `log mean_norm` against `log h` over `h > 0`
    pub slope: f64,
}

/// Mean of `|| Z(t + h) - Z(t) ||` over an ensemble, for each `h`.
/// `Z2`, `Z3` are evaluated on `|n| <= N`.
pub fn modulus_of_continuity(
    selector: ObjectSelector,
    model: &WaveModel,
    t: f64,
    h_ladder: &[f64],
    spec: NormSpec,
    samples: usize,
    seed: u64,
) -> Result<ContinuityReport> {
    let object = |d: &GaussianDraw, s: f64| -> Result<SpectralField> {
        let z = z1_at(d, model, s)?;
        match selector {
            ObjectSelector::Z1 => Ok(z),
            ObjectSelector::Z2 => wick_square_to(&z, model.sigma, model.cutoff),
            ObjectSelector::Z3 => wick_cube_to(&z, model.sigma, model.cutoff),
        }
    };
    let mut per_h: Vec<Vec<f64>> = vec![Vec::with_capacity(samples); h_ladder.len()];
    for i in 0..samples as u64 {
        let d = GaussianDraw::sample(sample_seed(seed, i), model.cutoff);
        let base = object(&d, t)?;
        for (k, &h) in h_ladder.iter().enumerate() {
            let v = if h == 0.0 {
                0.0
            } else {
                let moved = object(&d, t + h)?;
                crate::spectral::norm(&moved.plus_scaled(-1.0, &base), spec)?
            };
            per_h[k].push(v);
        }
    }
    let rows: Vec<ContinuityRow> = h_ladder
        .iter()
        .zip(&per_h)
        .map(|(&h, v)| {
            let (m, se) = mean_se(v);
            ContinuityRow {
                h,
                mean_norm: m,
                stderr: se,
            }
        })
        .collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.h > 0.0 && r.mean_norm > 0.0)
        .map(|r| (r.h.ln(), r.mean_norm.ln()))
        .unzip();
    let slope = if lx.len() >= 2 { linear_fit(&lx, &ly).0 } else { f64::NAN };
    Ok(ContinuityReport { rows, slope })
}

/// Stochastic inputs of the residual equation, sampled at given times.
#[derive(Clone, Debug)]
pub struct EnhancedDataSet {
    pub model: WaveModel,
    pub times: Vec<f64>,
    pub z1: Vec<SpectralField>,
    pub z1_velocity: Vec<SpectralField>,
    /// `z1^2 - sigma` on `|n| <= 2N`
    pub wick2: Vec<SpectralField>,
    pub z2: Vec<SpectralField>,
    pub z2_velocity: Vec<SpectralField>,
    /// `Z2 z2` on `|n| <= object_cutoff`
    pub z5: Vec<SpectralField>,
    /// Bony pieces of `Z5`, when requested
    pub z5_pieces: Option<Vec<Z5Pieces>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnhancedOptions {
    pub quadrature_dt: f64,
    /// cutoff of `Z3` in the Duhamel forcing, of `z2` and of `Z5`
    pub object_cutoff: u32,
    pub with_pieces: bool,
}

impl EnhancedDataSet {
    pub fn build(draw: &GaussianDraw, model: &WaveModel, times: &[f64], opts: EnhancedOptions) -> Result<Self> {
        let z2s = z2_trajectory(draw, model, times, opts.quadrature_dt, opts.object_cutoff)?;
        let mut set = EnhancedDataSet {
            model: *model,
            times: times.to_vec(),
            z1: Vec::with_capacity(times.len()),
            z1_velocity: Vec::with_capacity(times.len()),
            wick2: Vec::with_capacity(times.len()),
            z2: Vec::with_capacity(times.len()),
            z2_velocity: Vec::with_capacity(times.len()),
            z5: Vec::with_capacity(times.len()),
            z5_pieces: opts.with_pieces.then(Vec::new),
        };
        for (&t, st) in times.iter().zip(z2s) {
            let InitialData {
                position: z1,
                velocity: z1_velocity,
            } = z1_state_at(draw, model, t)?;
            let w2 = wick_square(&z1, model.sigma)?;
            if let Some(pieces) = set.z5_pieces.as_mut() {
                let p = z5_at(&w2, &st.position, opts.object_cutoff)?;
                set.z5.push(p.total.clone());
                pieces.push(p);
            } else {
                let sigma = model.sigma;
                let z5 = polynomial_map(
                    &[&z1, &st.position],
                    2 * z1.cutoff() + st.position.cutoff(),
                    opts.object_cutoff,
                    None,
                    |v| (v[0] * v[0] - sigma) * v[1],
                )?;
                set.z5.push(z5);
            }
            set.z1.push(z1);
            set.z1_velocity.push(z1_velocity);
            set.wick2.push(w2);
            set.z2.push(st.position);
            set.z2_velocity.push(st.velocity);
        }
        Ok(set)
    }

    /// Index of the sample at time `t`.
    pub fn index_of_time(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * (1.0 + t.abs()))
            .ok_or_else(|| Error::TimeGrid(format!("enhanced data not sampled at t = {t}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_wave() {
        let bx = FrequencyBox::new(2);
        let g = SpectralField::cosine(bx, [1, 0, 0], 2.0).unwrap();
        let d = GaussianDraw::from_fields(0, g, SpectralField::zeros(bx)).unwrap();
        let alpha = 1.3;
        let model = WaveModel::renormalized(alpha, 2);
        let t = 0.7;
        let z = z1_at(&d, &model, t).unwrap();
        let x: [f64; 3] = [0.4, 1.0, -2.0];
        let expect = 2.0 * (t * 2f64.sqrt()).cos() * x[0].cos() / 2f64.powf(alpha / 2.0);
        assert!((z.evaluate(x) - expect).abs() < 1e-14);
    }

    #[test]
    fn wick_powers_pointwise() {
        let bx = FrequencyBox::new(3);
        let z = SpectralField::from_fn(bx, |n| {
            Complex64::new(0.1 / (1.0 + (n[0] * n[0] + n[1] * n[1]) as f64), 0.05 * n[2] as f64)
        });
        let sigma = 2.0;
        let w2 = wick_square(&z, sigma).unwrap();
        let w3 = wick_cube(&z, sigma).unwrap();
        for x in [[0.1, 0.2, 0.3], [2.0, -1.0, 4.0]] {
            let v = z.evaluate(x);
            assert!((w2.evaluate(x) - (v * v - sigma)).abs() < 1e-12);
            assert!((w3.evaluate(x) - (v * v * v - 3.0 * sigma * v)).abs() < 1e-12);
        }
        let g = SpectralField::constant(FrequencyBox::new(0), 1.5);
        assert!((wick_square(&g, 2.0).unwrap().evaluate([0.0; 3]) - 0.25).abs() < 1e-15);
        assert!((wick_cube(&g, 2.0).unwrap().evaluate([0.0; 3]) + 5.625).abs() < 1e-14);
    }

    #[test]
    fn duhamel_of_constant() {
        for a in [1.0f64, 7.0] {
            let mut integ = DuhamelIntegrator::new(1, a).unwrap();
            let c = SpectralField::constant(FrequencyBox::new(1), 0.8);
            let h = 1e-3;
            let mut last = None;
            for j in 0..=1000 {
                last = Some(integ.push(j as f64 * h, &c).unwrap());
            }
            let st = last.unwrap();
            let expect = 0.8 / a * (1.0 - a.sqrt().cos());
            let got = st.position.coeff([0, 0, 0]).unwrap().re;
            assert!((got - expect).abs() < 1e-6, "{got} {expect}");
        }
    }

    #[test]
    fn diff_variance_closed_forms() {
        let t = exact_diff_variance(1, 1.5, 0, 1).unwrap();
        assert!((t - 6.0 * 2f64.powf(-1.5)).abs() < 1e-14);
        let v = exact_diff_variance(2, 1.5, 0, 1).unwrap();
        assert!((v - (4.0 * t + 9.0)).abs() < 1e-13);
        assert_eq!(exact_diff_variance(3, 1.4, 5, 5).unwrap(), 0.0);
        assert!(exact_diff_variance(1, 1.4, 5, 4).is_err());
    }

    #[test]
    fn z5_of_zero_is_zero() {
        let z = SpectralField::zeros_cutoff(4);
        let w = SpectralField::cosine(FrequencyBox::new(8), [3, 0, 0], 1.0).unwrap();
        let p = z5_at(&w, &z, 4).unwrap();
        assert_eq!(p.total.hs_norm(0.0), 0.0);
        assert_eq!(p.resonant.hs_norm(0.0), 0.0);
    }
}
