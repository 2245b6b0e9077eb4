//! Klein-Gordon propagators, the Duhamel operator, a Strang splitting
//! integrator for cubic wave equations and norms of trajectories.
//!
//! Equations are written as `d_t^2 u - Delta u + lambda u^3 + kappa u = F`
//! and integrated in the frame of a chosen mass `a`: the linear flow of
//! `d_t^2 - Delta + a` is applied exactly, and everything else enters as a
//! velocity kick `-(lambda u^3 + (kappa - a) u) + F` at the step midpoint.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::{modified_data, truncated_data, GaussianDraw, InitialData};
use crate::renorm::{sigma_exact, solve_cn};
use crate::spectral::{
    norm, polynomial_map, FrequencyBox, Mode, NormSpec, SpectralField, TORUS_VOLUME,
};
use crate::stochastic::{EnhancedDataSet, EnhancedOptions, WaveModel};

/// Norm level treated as blowup.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Exact solution of `(d_t^2 - Delta + a) u = 0` with data `(w0, w1)`.
pub fn propagate_linear(data: &InitialData, t: f64, mass: f64) -> Result<InitialData> {
    if !(mass >= 1.0) {
        return Err(Error::InvalidParameter(format!("mass {mass} must be at least 1")));
    }
    let flow = LinearFlow::new(data.position.frequency_box(), mass, t);
    let mut u = data.position.clone();
    let mut v = data.velocity.resized(data.position.frequency_box());
    flow.apply(&mut u, &mut v);
    Ok(InitialData {
        position: u,
        velocity: v,
    })
}

/// Per-mode rotation by the free flow over a fixed time `h`.
struct LinearFlow {
    omega: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl LinearFlow {
    fn new(bx: FrequencyBox, mass: f64, h: f64) -> Self {
        let omega: Vec<f64> = bx.modes().norm_sq().iter().map(|&k| (mass + f64::from(k)).sqrt()).collect();
        let (sin, cos) = omega.iter().map(|w| (w * h).sin_cos()).unzip();
        Self { omega, cos, sin }
    }

    fn apply(&self, u: &mut SpectralField, v: &mut SpectralField) {
        let (uc, vc) = (u.coefficients_mut(), v.coefficients_mut());
        for i in 0..self.omega.len() {
            let (c, s, w) = (self.cos[i], self.sin[i], self.omega[i]);
            let (a, b) = (uc[i], vc[i]);
            uc[i] = a * c + b * (s / w);
            vc[i] = b * c - a * (s * w);
        }
    }
}

/// Coefficients of `d_t^2 u - Delta u + cubic u^3 + linear u = 0`, with the
/// mass of the propagator used to integrate it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub frame_mass: f64,
    pub linear: f64,
    pub cubic: f64,
}

impl Equation {
    /// Coefficient of `u` in the velocity kick.
    pub fn kick_linear(&self) -> f64 {
        self.linear - self.frame_mass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationVariant {
    /// residual `w` of `u = z1 + z2 + w`
    ResidualW,
    /// `d_t^2 u - Delta u + u^3 - alpha_N u = 0`, truncated data
    FullRenormalized,
    /// `(d_t^2 - Delta + C_N) u + u^3 - C_N u = 0`, modified data
    FullUnrenormalizedReformulated,
    /// `d_t^2 u - Delta u + u^3 - C_N u = 0`, modified data
    RenormalizedModified,
    /// `d_t^2 u - Delta u + u = 0`
    Linear,
    /// `d_t^2 u - Delta u + u + u^3 = 0`
    DeterministicCubic,
}

impl EquationVariant {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "residual_w" => Self::ResidualW,
            "full_renormalized" => Self::FullRenormalized,
            "full_unrenormalized_reformulated" => Self::FullUnrenormalizedReformulated,
            "renormalized_modified" => Self::RenormalizedModified,
            "linear" => Self::Linear,
            "deterministic_cubic" => Self::DeterministicCubic,
            other => return Err(Error::InvalidParameter(format!("unknown equation variant {other:?}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ResidualW => "residual_w",
            Self::FullRenormalized => "full_renormalized",
            Self::FullUnrenormalizedReformulated => "full_unrenormalized_reformulated",
            Self::RenormalizedModified => "renormalized_modified",
            Self::Linear => "linear",
            Self::DeterministicCubic => "deterministic_cubic",
        }
    }

    /// Uses the modified data and the mass `C_N`.
    pub fn uses_modified_data(self) -> bool {
        matches!(self, Self::FullUnrenormalizedReformulated | Self::RenormalizedModified)
    }
}

/// Renormalisation-dependent constants needed to assemble an equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationConstants {
    pub alpha_n: f64,
    pub c_n: f64,
}

impl EquationConstants {
    pub fn compute(alpha: f64, cutoff: u32) -> Result<Self> {
        let rc = solve_cn(alpha, cutoff)?;
        Ok(Self {
            alpha_n: rc.alpha_n,
            c_n: rc.c_n,
        })
    }
}

/// Assemble a full equation; `ResidualW` has no closed form and is rejected.
pub fn assemble(variant: EquationVariant, k: EquationConstants) -> Result<Equation> {
    Ok(match variant {
        EquationVariant::FullRenormalized => Equation {
            frame_mass: 1.0,
            linear: -k.alpha_n,
            cubic: 1.0,
        },
        EquationVariant::FullUnrenormalizedReformulated => Equation {
            frame_mass: k.c_n,
            linear: 0.0,
            cubic: 1.0,
        },
        EquationVariant::RenormalizedModified => Equation {
            frame_mass: 1.0,
            linear: -k.c_n,
            cubic: 1.0,
        },
        EquationVariant::Linear => Equation {
            frame_mass: 1.0,
            linear: 1.0,
            cubic: 0.0,
        },
        EquationVariant::DeterministicCubic => Equation {
            frame_mass: 1.0,
            linear: 1.0,
            cubic: 1.0,
        },
        EquationVariant::ResidualW => {
            return Err(Error::InvalidParameter("the residual equation needs enhanced data".into()))
        }
    })
}

/// Sum of cosine modes `sum a_k cos(n_k . x)` for position and velocity.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CosineData {
    pub position: Vec<(Mode, f64)>,
    pub velocity: Vec<(Mode, f64)>,
}

impl CosineData {
    /// The data projected onto `|n| <= cutoff`.
    pub fn to_initial(&self, cutoff: u32) -> InitialData {
        let bx = FrequencyBox::new(cutoff);
        let build = |terms: &[(Mode, f64)]| {
            let mut f = SpectralField::zeros(bx);
            for &(n, a) in terms {
                if bx.contains(n) {
                    f.axpy(1.0, &SpectralField::cosine(bx, n, a).expect("mode inside box"))
                        .expect("same box");
                }
            }
            f
        };
        InitialData {
            position: build(&self.position),
            velocity: build(&self.velocity),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.position.iter().chain(&self.velocity).all(|&(_, a)| a == 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub cutoff: u32,
    /// final time `T`; the run covers `[0, T]`
    pub t_final: f64,
    pub dt: f64,
    pub variant: EquationVariant,
    /// keep every `record_every`-th step (plus `t = 0` and `t = T`)
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(alpha: f64, cutoff: u32, t_final: f64, dt: f64, variant: EquationVariant) -> Self {
        Self {
            alpha,
            cutoff,
            t_final,
            dt,
            variant,
            record_every: 1,
        }
    }

    /// Number of steps; `T / dt` must be an integer at least 16.
    pub fn steps(&self) -> Result<usize> {
        if !(self.t_final > 0.0 && self.dt > 0.0) {
            return Err(Error::TimeGrid("T and dt must be positive".into()));
        }
        let r = self.t_final / self.dt;
        let k = r.round();
        if (r - k).abs() > 1e-9 * r.max(1.0) {
            return Err(Error::TimeGrid(format!("T / dt = {r} is not an integer")));
        }
        if k < 16.0 {
            return Err(Error::TimeGrid(format!("dt must be at most T/16, got T/{k}")));
        }
        if self.record_every == 0 {
            return Err(Error::TimeGrid("record_every must be positive".into()));
        }
        Ok(k as usize)
    }

    /// Times at which the trajectory is recorded.
    pub fn record_times(&self) -> Result<Vec<f64>> {
        let steps = self.steps()?;
        Ok((0..=steps)
            .filter(|k| k % self.record_every == 0 || *k == steps)
            .map(|k| k as f64 * self.dt)
            .collect())
    }

    /// Midpoints `t_k + dt/2` where kicks are evaluated.
    pub fn kick_times(&self) -> Result<Vec<f64>> {
        let steps = self.steps()?;
        Ok((0..steps).map(|k| (k as f64 + 0.5) * self.dt).collect())
    }
}

/// Time samples of position and velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub position: Vec<SpectralField>,
    pub velocity: Vec<SpectralField>,
    pub mass: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_position(&self) -> &SpectralField {
        self.position.last().expect("nonempty trajectory")
    }

    /// Pointwise-in-time combination `self + a * other` on the larger box.
    pub fn plus_scaled(&self, a: f64, other: &Trajectory) -> Result<Trajectory> {
        check_same_times(self, other)?;
        Ok(Trajectory {
            times: self.times.clone(),
            position: self.position.iter().zip(&other.position).map(|(p, q)| p.plus_scaled(a, q)).collect(),
            velocity: self.velocity.iter().zip(&other.velocity).map(|(p, q)| p.plus_scaled(a, q)).collect(),
            mass: self.mass,
        })
    }

    pub fn to_records(&self) -> Vec<crate::spectral::dump::SeriesRecord> {
        self.times
            .iter()
            .enumerate()
            .map(|(i, &t)| crate::spectral::dump::SeriesRecord {
                index: i as u32,
                time: t,
                fields: vec![self.position[i].clone(), self.velocity[i].clone()],
            })
            .collect()
    }
}

fn check_same_times(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.times.len() != b.times.len() || a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::TimeGrid("trajectories have different time grids".into()));
    }
    Ok(())
}

fn check_state(t: f64, u: &SpectralField, v: &SpectralField) -> Result<()> {
    if !u.is_finite() || !v.is_finite() {
        return Err(Error::Blowup {
            time: t,
            reason: "non-finite coefficient".into(),
        });
    }
    let nu = u.hs_norm(0.0);
    let nv = v.hs_norm(0.0);
    if nu > BLOWUP_THRESHOLD || nv > BLOWUP_THRESHOLD {
        return Err(Error::Blowup {
            time: t,
            reason: format!("L2 norms {nu:e}, {nv:e} exceed {BLOWUP_THRESHOLD:e}"),
        });
    }
    Ok(())
}

/// Strang splitting: half free flow, kick `v += dt K(t_k + dt/2, u)`, half
/// free flow.
fn integrate(
    init: &InitialData,
    mass: f64,
    cfg: &SolverConfig,
    mut kick: impl FnMut(f64, &SpectralField) -> Result<SpectralField>,
) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    let bx = FrequencyBox::new(cfg.cutoff);
    let mut u = init.position.resized(bx);
    let mut v = init.velocity.resized(bx);
    let half = LinearFlow::new(bx, mass, 0.5 * cfg.dt);
    let mut traj = Trajectory {
        times: vec![0.0],
        position: vec![u.clone()],
        velocity: vec![v.clone()],
        mass,
    };
    for k in 0..steps {
        half.apply(&mut u, &mut v);
        let t_mid = (k as f64 + 0.5) * cfg.dt;
        let acc = kick(t_mid, &u)?;
        v.axpy(cfg.dt, &acc.resized(bx))?;
        half.apply(&mut u, &mut v);
        let t = (k + 1) as f64 * cfg.dt;
        check_state(t, &u, &v)?;
        if (k + 1) % cfg.record_every == 0 || k + 1 == steps {
            traj.times.push(t);
            traj.position.push(u.clone());
            traj.velocity.push(v.clone());
        }
    }
    Ok(traj)
}

/// `-(lambda u^3 + (kappa - a) u)` on `|n| <= N`.
pub fn cubic_kick(eq: &Equation, u: &SpectralField) -> Result<SpectralField> {
    let (lam, lin) = (eq.cubic, eq.kick_linear());
    if lam == 0.0 {
        return Ok(u.scaled(-lin));
    }
    polynomial_map(&[u], 3 * u.cutoff(), u.cutoff(), None, |x| -(lam * x[0] * x[0] * x[0] + lin * x[0]))
}

/// Solve a closed equation from given data on `[0, T]`.
pub fn solve_equation(eq: &Equation, init: &InitialData, cfg: &SolverConfig) -> Result<Trajectory> {
    integrate(init, eq.frame_mass, cfg, |_, u| cubic_kick(eq, u))
}

/// Initial data of a full variant: random part plus deterministic part.
pub fn full_initial_data(
    draw: &GaussianDraw,
    cfg: &SolverConfig,
    k: EquationConstants,
    deterministic: &CosineData,
) -> Result<InitialData> {
    let random = if cfg.variant.uses_modified_data() {
        modified_data(draw, cfg.cutoff, cfg.alpha, k.c_n)?
    } else {
        truncated_data(draw, cfg.cutoff, cfg.alpha)?
    };
    Ok(random.plus(&deterministic.to_initial(cfg.cutoff)))
}

/// Solve the selected full equation with random data from `draw` plus the
/// deterministic data.
pub fn solve_full(draw: &GaussianDraw, cfg: &SolverConfig, deterministic: &CosineData) -> Result<Trajectory> {
    let k = EquationConstants::compute(cfg.alpha, cfg.cutoff)?;
    solve_full_with(draw, cfg, k, deterministic)
}

/// [`solve_full`] with caller-supplied constants.
pub fn solve_full_with(
    draw: &GaussianDraw,
    cfg: &SolverConfig,
    k: EquationConstants,
    deterministic: &CosineData,
) -> Result<Trajectory> {
    let eq = assemble(cfg.variant, k)?;
    let init = full_initial_data(draw, cfg, k, deterministic)?;
    solve_equation(&eq, &init, cfg)
}

/// Source of the residual equation,
/// `F = 3 Z5 + 3 z1 z2^2 + z2^3 + (3 Z2 + 6 z1 z2 + 3 z2^2) w + 3 (z1 + z2) w^2 + w^3`,
/// on `|n| <= out_cutoff`.
pub fn residual_forcing(
    z1: &SpectralField,
    wick2: &SpectralField,
    z2: &SpectralField,
    z5: &SpectralField,
    w: &SpectralField,
    out_cutoff: u32,
) -> Result<SpectralField> {
    let (a, d, b, c) = (z1.cutoff(), wick2.cutoff(), z2.cutoff(), w.cutoff());
    let reach = [a + 2 * b, 3 * b, d + c, a + b + c, 2 * b + c, a + 2 * c, b + 2 * c, 3 * c]
        .into_iter()
        .max()
        .expect("nonempty");
    let mut f = polynomial_map(&[z1, wick2, z2, w], reach, out_cutoff, None, |x| {
        let (z1, w2, z2, w) = (x[0], x[1], x[2], x[3]);
        3.0 * z1 * z2 * z2 + z2 * z2 * z2 + (3.0 * w2 + 6.0 * z1 * z2 + 3.0 * z2 * z2) * w + 3.0 * (z1 + z2) * w * w + w * w * w
    })?;
    f.axpy(3.0, &z5.resized(f.frequency_box()))?;
    Ok(f)
}

/// Solve `L_a w + F0 + F1(w) + F2(w) + F3(w) = 0`, `(w, d_t w)(0) = (w0, w1)`,
/// with `a` the mass of the enhanced data. The enhanced data must be sampled
/// at every kick time `t_k + dt/2`.
pub fn solve_w(enhanced: &EnhancedDataSet, data: &InitialData, cfg: &SolverConfig) -> Result<Trajectory> {
    for t in cfg.kick_times()? {
        enhanced.index_of_time(t)?;
    }
    let n = cfg.cutoff;
    integrate(data, enhanced.model.mass, cfg, |t, w| {
        let i = enhanced.index_of_time(t)?;
        let f = residual_forcing(&enhanced.z1[i], &enhanced.wick2[i], &enhanced.z2[i], &enhanced.z5[i], w, n)?;
        Ok(f.scaled(-1.0))
    })
}

/// Enhanced data for [`solve_w`]: sampled at kick and record times, `z2`
/// integrated with step `dt / 2`, all objects on `|n| <= N`.
pub fn enhanced_for_solver(draw: &GaussianDraw, model: &WaveModel, cfg: &SolverConfig) -> Result<EnhancedDataSet> {
    let mut times = cfg.kick_times()?;
    times.extend(cfg.record_times()?);
    times.sort_by(|a, b| a.total_cmp(b));
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    EnhancedDataSet::build(
        draw,
        model,
        &times,
        EnhancedOptions {
            quadrature_dt: 0.5 * cfg.dt,
            object_cutoff: cfg.cutoff,
            with_pieces: false,
        },
    )
}

/// `u = z1 + z2 + w` assembled on the record times of `w`.
pub fn assemble_decomposition(enhanced: &EnhancedDataSet, w: &Trajectory) -> Result<Trajectory> {
    let mut out = w.clone();
    for (k, &t) in w.times.iter().enumerate() {
        let i = enhanced.index_of_time(t)?;
        out.position[k] = w.position[k].plus_scaled(1.0, &enhanced.z1[i]).plus_scaled(1.0, &enhanced.z2[i]);
        out.velocity[k] = w.velocity[k]
            .plus_scaled(1.0, &enhanced.z1_velocity[i])
            .plus_scaled(1.0, &enhanced.z2_velocity[i]);
    }
    Ok(out)
}

/// `u_N = z1 + z2 + w` through the enhanced data and the residual equation,
/// for the renormalised equation with truncated data.
pub fn solve_via_decomposition(draw: &GaussianDraw, cfg: &SolverConfig) -> Result<Trajectory> {
    let model = WaveModel::renormalized(cfg.alpha, cfg.cutoff);
    let enhanced = enhanced_for_solver(draw, &model, cfg)?;
    let w = solve_w(&enhanced, &InitialData::zeros(cfg.cutoff), cfg)?;
    assemble_decomposition(&enhanced, &w)
}

/// Zero-data Duhamel solution of `L_a u = F` for forcing samples on a uniform
/// grid starting at 0.
pub fn duhamel_apply(times: &[f64], forcing: &[SpectralField], mass: f64) -> Result<Trajectory> {
    if times.len() != forcing.len() || times.len() < 2 {
        return Err(Error::TimeGrid("need at least two forcing samples, one per time".into()));
    }
    let h = times[1] - times[0];
    if times[0] != 0.0
        || times
            .windows(2)
            .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300))
    {
        return Err(Error::TimeGrid("forcing must be sampled on a uniform grid from t = 0".into()));
    }
    let cutoff = forcing.iter().map(|f| f.cutoff()).max().expect("nonempty");
    let mut integ = crate::stochastic::DuhamelIntegrator::new(cutoff, mass)?;
    let mut traj = Trajectory {
        times: times.to_vec(),
        position: Vec::with_capacity(times.len()),
        velocity: Vec::with_capacity(times.len()),
        mass,
    };
    for (&t, f) in times.iter().zip(forcing) {
        let st = integ.push(t, f)?;
        traj.position.push(st.position);
        traj.velocity.push(st.velocity);
    }
    Ok(traj)
}

/// `int 1/2 v^2 + 1/2 |grad u|^2 + kappa/2 u^2 + lambda/4 u^4`.
pub fn energy(eq: &Equation, u: &SpectralField, v: &SpectralField) -> f64 {
    let kinetic = 0.5 * v.hs_norm_sq(0.0);
    let h1 = u.hs_norm_sq(1.0);
    let l2 = u.hs_norm_sq(0.0);
    let gradient = 0.5 * (h1 - l2);
    let quartic = if eq.cubic == 0.0 {
        0.0
    } else {
        let g = u.to_grid();
        let cell = TORUS_VOLUME / g.values().len() as f64;
        cell * g.values().iter().map(|x| x * x * x * x).sum::<f64>()
    };
    kinetic + gradient + 0.5 * eq.linear * l2 + 0.25 * eq.cubic * quartic
}

fn min_samples(traj: &Trajectory) -> Result<()> {
    let span = traj.times.last().copied().unwrap_or(0.0) - traj.times.first().copied().unwrap_or(0.0);
    let need = (8.0 * span).ceil().max(2.0) as usize;
    if traj.len() < need {
        return Err(Error::TimeGrid(format!(
            "{} samples over a span of {span} (need at least {need})",
            traj.len()
        )));
    }
    Ok(())
}

/// Trapezoid rule over the trajectory's time grid.
fn time_integral(times: &[f64], vals: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(vals.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// `max_t ||u(t)||_{H^s}`.
pub fn ct_hs_norm(traj: &Trajectory, s: f64) -> f64 {
    traj.position.iter().map(|u| u.hs_norm(s)).fold(0.0, f64::max)
}

/// `max_t ||a(t) - b(t)||_{H^s}` on a shared time grid.
pub fn ct_hs_distance(a: &Trajectory, b: &Trajectory, s: f64) -> Result<f64> {
    check_same_times(a, b)?;
    Ok(a.position
        .iter()
        .zip(&b.position)
        .map(|(x, y)| x.hs_distance(y, s))
        .fold(0.0, f64::max))
}

/// `|| ||u(t)||_{W^{s,r}} ||_{L^q_t}`.
pub fn lq_wsr_norm(traj: &Trajectory, q: f64, s: f64, r: f64) -> Result<f64> {
    min_samples(traj)?;
    let spec = NormSpec::Sobolev { s, p: r };
    let vals = traj.position.iter().map(|u| norm(u, spec)).collect::<Result<Vec<_>>>()?;
    if q.is_infinite() {
        return Ok(vals.into_iter().fold(0.0, f64::max));
    }
    let pw: Vec<f64> = vals.iter().map(|v| v.powf(q)).collect();
    Ok(time_integral(&traj.times, &pw).powf(1.0 / q))
}

/// `||u||_{L^inf_T H^{1/2}} + ||u||_{L^4_{T,x}}`.
pub fn xt_norm(traj: &Trajectory) -> Result<f64> {
    Ok(lq_wsr_norm(traj, f64::INFINITY, 0.5, 2.0)? + lq_wsr_norm(traj, 4.0, 0.0, 4.0)?)
}

/// Smooth bump `exp(-1 / (1 - (2t/T - 1)^2))` supported on `(0, T)`.
pub fn bump(t: f64, t_final: f64) -> f64 {
    let y = 2.0 * t / t_final - 1.0;
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

/// `int psi(t) int u(t, x) e^{i m.x} dx dt = int psi(t) (2 pi)^3 u_hat(t, -m) dt`;
/// zero when `m` lies outside the trajectory's frequency box.
pub fn pair_distribution(traj: &Trajectory, psi: impl Fn(f64) -> f64, m: Mode) -> Result<Complex64> {
    let neg = [-m[0], -m[1], -m[2]];
    if traj.is_empty() {
        return Err(Error::InvalidParameter("empty trajectory".into()));
    }
    let vals: Vec<Complex64> = traj
        .position
        .iter()
        .map(|u| u.coeff(neg).unwrap_or_default())
        .collect();
    let re: Vec<f64> = traj.times.iter().zip(&vals).map(|(&t, c)| psi(t) * c.re).collect();
    let im: Vec<f64> = traj.times.iter().zip(&vals).map(|(&t, c)| psi(t) * c.im).collect();
    Ok(Complex64::new(time_integral(&traj.times, &re), time_integral(&traj.times, &im)) * TORUS_VOLUME)
}

/// Constants for the equations at one cutoff, with `sigma_N`.
pub fn renormalized_model(alpha: f64, cutoff: u32) -> (WaveModel, f64) {
    (WaveModel::renormalized(alpha, cutoff), sigma_exact(alpha, cutoff))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_flow_of_cosine() {
        let bx = FrequencyBox::new(3);
        let n = [1, 2, 0];
        let data = InitialData {
            position: SpectralField::cosine(bx, n, 1.0).unwrap(),
            velocity: SpectralField::zeros(bx),
        };
        for a in [1.0f64, 10.0] {
            let t = 0.37;
            let out = propagate_linear(&data, t, a).unwrap();
            let expect = (t * (a + 5.0).sqrt()).cos();
            assert!((out.position.coeff(n).unwrap().re * 2.0 - expect).abs() < 1e-14);
        }
        assert_eq!(propagate_linear(&data, 0.0, 1.0).unwrap(), data);
        assert!(propagate_linear(&data, 1.0, 0.5).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::new(1.4, 4, 0.1, 0.1 / 8.0, EquationVariant::Linear);
        assert!(c.steps().is_err());
        c.dt = 0.1 / 32.0;
        assert_eq!(c.steps().unwrap(), 32);
        c.record_every = 5;
        let r = c.record_times().unwrap();
        assert_eq!(r.len(), 8);
        assert!((r.last().unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn bump_and_pairing() {
        assert_eq!(bump(0.0, 1.0), 0.0);
        assert!((bump(0.5, 1.0) - (-1f64).exp()).abs() < 1e-15);
        let bx = FrequencyBox::new(2);
        let times: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
        let one = SpectralField::constant(bx, 1.0);
        let traj = Trajectory {
            times: times.clone(),
            position: vec![one.clone(); times.len()],
            velocity: vec![SpectralField::zeros(bx); times.len()],
            mass: 1.0,
        };
        let p = pair_distribution(&traj, |_| 1.0, [0, 0, 0]).unwrap();
        assert!((p.re - TORUS_VOLUME).abs() < 1e-12 && p.im == 0.0);
        let c = SpectralField::cosine(bx, [1, 0, 0], 1.0).unwrap();
        let tc = Trajectory {
            position: vec![c; times.len()],
            ..traj
        };
        assert_eq!(pair_distribution(&tc, |t| bump(t, 1.0), [2, 0, 0]).unwrap(), Complex64::default());
        assert_eq!(pair_distribution(&tc, |_| 1.0, [3, 0, 0]).unwrap(), Complex64::default());
    }
}
