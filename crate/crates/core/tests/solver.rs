use wnlw_core::random::{GaussianDraw, InitialData};
use wnlw_core::renorm::sigma_exact;
use wnlw_core::solver::*;
use wnlw_core::spectral::{FrequencyBox, SpectralField};
use wnlw_core::stochastic::{EnhancedDataSet, WaveModel};

fn smooth_data(cutoff: u32) -> InitialData {
    CosineData {
        position: vec![([1, 0, 0], 0.8), ([0, 1, 1], 0.3)],
        velocity: vec![([0, 0, 1], 0.5)],
    }
    .to_initial(cutoff)
}

#[test]
fn linear_mode_is_exact() {
    let cfg = SolverConfig::new(1.4, 4, 1.0, 1.0 / 64.0, EquationVariant::Linear);
    let eq = assemble(EquationVariant::Linear, EquationConstants { alpha_n: 0.0, c_n: 1.0 }).unwrap();
    let data = smooth_data(4);
    let traj = solve_equation(&eq, &data, &cfg).unwrap();
    for (t, u) in traj.times.iter().zip(&traj.position) {
        let exact = propagate_linear(&data, *t, 1.0).unwrap();
        assert!(u.hs_distance(&exact.position, 0.0) < 1e-10);
    }
}

#[test]
fn zero_inputs_give_zero_residual() {
    let cfg = SolverConfig::new(1.4, 3, 0.1, 0.1 / 16.0, EquationVariant::ResidualW);
    let draw = GaussianDraw::zero(3);
    let model = WaveModel::renormalized(1.4, 3);
    let enhanced = enhanced_for_solver(&draw, &model, &cfg).unwrap();
    let w = solve_w(&enhanced, &InitialData::zeros(3), &cfg).unwrap();
    assert!(w.position.iter().all(|f| f.hs_norm(0.0) == 0.0));
}

#[test]
fn residual_with_zero_noise_is_deterministic_cubic() {
    // mass one, sigma zero: w solves d_t^2 w - Delta w + w + w^3 = 0
    let cfg = SolverConfig::new(1.4, 3, 0.5, 0.5 / 32.0, EquationVariant::ResidualW);
    let draw = GaussianDraw::zero(3);
    let model = WaveModel {
        sigma: 0.0,
        ..WaveModel::renormalized(1.4, 3)
    };
    let enhanced = enhanced_for_solver(&draw, &model, &cfg).unwrap();
    let data = smooth_data(3);
    let w = solve_w(&enhanced, &data, &cfg).unwrap();
    let eq = assemble(EquationVariant::DeterministicCubic, EquationConstants { alpha_n: 0.0, c_n: 1.0 }).unwrap();
    let u = solve_equation(&eq, &data, &cfg).unwrap();
    assert!(ct_hs_distance(&w, &u, 0.0).unwrap() < 1e-12);
}

#[test]
fn energy_is_conserved() {
    let cfg = SolverConfig::new(1.4, 4, 1.0, 1.0 / 512.0, EquationVariant::DeterministicCubic);
    let eq = assemble(cfg.variant, EquationConstants { alpha_n: 0.0, c_n: 1.0 }).unwrap();
    let traj = solve_equation(&eq, &smooth_data(4), &cfg).unwrap();
    let e0 = energy(&eq, &traj.position[0], &traj.velocity[0]);
    let drift = traj
        .position
        .iter()
        .zip(&traj.velocity)
        .map(|(u, v)| ((energy(&eq, u, v) - e0) / e0).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-6, "relative energy drift {drift:e}");
}

#[test]
fn strang_is_second_order() {
    let draw = GaussianDraw::sample(7, 4);
    let run = |k: u32| {
        let cfg = SolverConfig::new(1.4, 4, 0.1, 0.1 / f64::from(k), EquationVariant::FullRenormalized);
        let mut cfg = cfg;
        cfg.record_every = (k / 16) as usize;
        solve_full(&draw, &cfg, &CosineData::default()).unwrap()
    };
    let (a, b, c) = (run(16), run(32), run(64));
    let ratio = ct_hs_distance(&a, &b, 0.0).unwrap() / ct_hs_distance(&b, &c, 0.0).unwrap();
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

fn rk4(alpha_n: f64, u0: f64, v0: f64, t: f64, steps: usize) -> f64 {
    let f = |u: f64| alpha_n * u - u * u * u;
    let h = t / steps as f64;
    let (mut u, mut v) = (u0, v0);
    for _ in 0..steps {
        let (k1u, k1v) = (v, f(u));
        let (k2u, k2v) = (v + 0.5 * h * k1v, f(u + 0.5 * h * k1u));
        let (k3u, k3v) = (v + 0.5 * h * k2v, f(u + 0.5 * h * k2u));
        let (k4u, k4v) = (v + h * k3v, f(u + h * k3u));
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    u
}

#[test]
fn zero_cutoff_matches_ode() {
    let draw = GaussianDraw::sample(3, 0);
    let alpha = 1.4;
    let alpha_n = 3.0 * sigma_exact(alpha, 0) - 1.0;
    assert!((alpha_n - 2.0).abs() < 1e-15);
    let cfg = SolverConfig::new(alpha, 0, 1.0, 1.0 / 4096.0, EquationVariant::FullRenormalized);
    let traj = solve_full(&draw, &cfg, &CosineData::default()).unwrap();
    let u0 = draw.g().coeff([0, 0, 0]).unwrap().re;
    let v0 = draw.h().coeff([0, 0, 0]).unwrap().re;
    let expect = rk4(alpha_n, u0, v0, 1.0, 100_000);
    let got = traj.last_position().coeff([0, 0, 0]).unwrap().re;
    assert!((got - expect).abs() < 1e-6, "{got} vs {expect}");
}

#[test]
fn decomposition_identity() {
    let (alpha, n, t) = (1.4, 8, 0.1);
    let s1 = alpha - 1.5 - 0.05;
    let draw = GaussianDraw::sample(11, n);
    let cfg = |k: u32| {
        let mut c = SolverConfig::new(alpha, n, t, t / f64::from(k), EquationVariant::FullRenormalized);
        c.record_every = (k / 16) as usize;
        c
    };
    let full = solve_full(&draw, &cfg(32), &CosineData::default()).unwrap();
    let fine = solve_full(&draw, &cfg(64), &CosineData::default()).unwrap();
    let estimate = ct_hs_distance(&full, &fine, s1).unwrap();
    let split = solve_via_decomposition(&draw, &cfg(32)).unwrap();
    let gap = ct_hs_distance(&full, &split, s1).unwrap();
    assert!(gap <= 10.0 * estimate, "gap {gap:e}, estimate {estimate:e}");
}

#[test]
fn reformulation_at_unit_constant() {
    // the reformulated equation is d_t^2 u - Delta u + u^3 = 0 for every C_N
    let plain = Equation {
        frame_mass: 1.0,
        linear: 0.0,
        cubic: 1.0,
    };
    let at_one = assemble(
        EquationVariant::FullUnrenormalizedReformulated,
        EquationConstants { alpha_n: 2.0, c_n: 1.0 },
    )
    .unwrap();
    assert_eq!(at_one, plain);
    let general = assemble(
        EquationVariant::FullUnrenormalizedReformulated,
        EquationConstants { alpha_n: 2.0, c_n: 9.5 },
    )
    .unwrap();
    assert_eq!((general.linear, general.cubic), (plain.linear, plain.cubic));
    assert_eq!(general.kick_linear(), -9.5);
    let draw = GaussianDraw::sample(4, 3);
    let mut cfg = SolverConfig::new(1.4, 3, 0.1, 0.1 / 16.0, EquationVariant::FullUnrenormalizedReformulated);
    let k = EquationConstants { alpha_n: 2.0, c_n: 1.0 };
    let a = full_initial_data(&draw, &cfg, k, &CosineData::default()).unwrap();
    cfg.variant = EquationVariant::FullRenormalized;
    let b = full_initial_data(&draw, &cfg, k, &CosineData::default()).unwrap();
    assert_eq!(a, b);
    assert!(assemble(EquationVariant::ResidualW, k).is_err());
}

#[test]
fn duhamel_of_constant_forcing() {
    let bx = FrequencyBox::new(1);
    let c = 0.7;
    for a in [1.0f64, 4.0] {
        let times: Vec<f64> = (0..=2000).map(|k| k as f64 * 1e-3).collect();
        let f = vec![SpectralField::constant(bx, c); times.len()];
        let traj = duhamel_apply(&times, &f, a).unwrap();
        let got = traj.last_position().coeff([0, 0, 0]).unwrap().re;
        let expect = c / a * (1.0 - (2.0 * a.sqrt()).cos());
        assert!((got - expect).abs() < 1e-6);
    }
    let bad = [0.0, 0.1, 0.3];
    assert!(duhamel_apply(&bad, &vec![SpectralField::constant(bx, c); 3], 1.0).is_err());
}

#[test]
fn trajectory_norms() {
    let bx = FrequencyBox::new(2);
    let times: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
    let cos = SpectralField::cosine(bx, [1, 0, 0], 1.0).unwrap();
    let traj = Trajectory {
        times: times.clone(),
        position: vec![cos.clone(); 17],
        velocity: vec![SpectralField::zeros(bx); 17],
        mass: 1.0,
    };
    let l4 = (wnlw_core::spectral::TORUS_VOLUME * 3.0 / 8.0).powf(0.25);
    assert!((lq_wsr_norm(&traj, 4.0, 0.0, 4.0).unwrap() - l4).abs() < 1e-12);
    let zero = Trajectory {
        position: vec![SpectralField::zeros(bx); 17],
        ..traj.clone()
    };
    assert_eq!(xt_norm(&zero).unwrap(), 0.0);
    let short = Trajectory {
        times: vec![0.0, 1.0],
        position: vec![cos.clone(); 2],
        velocity: vec![SpectralField::zeros(bx); 2],
        mass: 1.0,
    };
    assert!(lq_wsr_norm(&short, 2.0, 0.0, 2.0).is_err());
}

#[test]
fn blowup_is_reported() {
    // focusing sign blows up in finite time
    let cfg = SolverConfig::new(1.4, 0, 4.0, 4.0 / 4096.0, EquationVariant::DeterministicCubic);
    let eq = Equation {
        frame_mass: 1.0,
        linear: 1.0,
        cubic: -1.0,
    };
    let data = InitialData {
        position: SpectralField::constant(FrequencyBox::new(0), 3.0),
        velocity: SpectralField::zeros_cutoff(0),
    };
    let err = solve_equation(&eq, &data, &cfg).unwrap_err();
    assert!(matches!(err, wnlw_core::Error::Blowup { .. }));
}

#[test]
fn enhanced_grid_mismatch_is_rejected() {
    let cfg = SolverConfig::new(1.4, 2, 0.1, 0.1 / 16.0, EquationVariant::ResidualW);
    let draw = GaussianDraw::sample(1, 2);
    let model = WaveModel::renormalized(1.4, 2);
    let opts = wnlw_core::stochastic::EnhancedOptions {
        quadrature_dt: 0.1 / 16.0,
        object_cutoff: 2,
        with_pieces: false,
    };
    let times: Vec<f64> = (0..=16).map(|k| k as f64 * 0.1 / 16.0).collect();
    let set = EnhancedDataSet::build(&draw, &model, &times, opts).unwrap();
    assert!(solve_w(&set, &InitialData::zeros(2), &cfg).is_err());
}
