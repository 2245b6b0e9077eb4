use proptest::prelude::*;

use wnlw_core::random::{GaussianDraw, InitialData};
use wnlw_core::solver::{duhamel_apply, pair_distribution, propagate_linear, Trajectory};
use wnlw_core::spectral::{
    dealiased_product, direct_convolution, norm, paraproduct_split, FrequencyBox, NormSpec, SpectralField,
};

fn field(seed: u64, cutoff: u32) -> SpectralField {
    GaussianDraw::sample(seed, cutoff).g().clone()
}

fn close(a: &SpectralField, b: &SpectralField, tol: f64) -> bool {
    a.hs_distance(b, 0.0) <= tol * (1.0 + a.hs_norm(0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn grid_round_trip(seed in any::<u64>(), n in 0u32..6) {
        let f = field(seed, n);
        let back = f.to_grid().to_spectral(n).unwrap();
        prop_assert!(close(&f, &back, 1e-12));
        prop_assert_eq!(back.hermitian_defect().0, 0.0);
    }

    #[test]
    fn bessel_inverse(seed in any::<u64>(), n in 0u32..6, s in -2.0f64..2.0) {
        let f = field(seed, n);
        prop_assert!(close(&f, &f.apply_bessel(s).apply_bessel(-s), 1e-12));
    }

    #[test]
    fn paraproducts_sum_to_product(a in any::<u64>(), b in any::<u64>(), n in 1u32..6, m in 1u32..6) {
        let f = field(a, n);
        let g = field(b, m);
        let out = n + m;
        let full = dealiased_product(&f, &g, out).unwrap();
        let pieces = paraproduct_split(&f, &g, out).unwrap();
        prop_assert!(close(&full, &pieces.total(), 1e-11));
    }

    #[test]
    fn product_matches_convolution(a in any::<u64>(), b in any::<u64>(), n in 0u32..4) {
        let f = field(a, n);
        let g = field(b, n);
        let fast = dealiased_product(&f, &g, 2 * n).unwrap();
        prop_assert!(close(&fast, &direct_convolution(&f, &g, 2 * n), 1e-12));
    }

    #[test]
    fn besov_and_sobolev_comparable(seed in any::<u64>(), n in 1u32..9, s in -1.0f64..1.0) {
        let f = field(seed, n);
        let h = norm(&f, NormSpec::h(s)).unwrap();
        let b = norm(&f, NormSpec::Besov { s, p: 2.0, q: 2.0 }).unwrap();
        let c = 2f64.powf(s.abs() + 1.0);
        prop_assert!(b <= c * h && h <= c * b, "h {} b {}", h, b);
    }

    #[test]
    fn draws_nest(seed in any::<u64>(), n in 0u32..5, extra in 1u32..4) {
        let small = GaussianDraw::sample(seed, n);
        let big = GaussianDraw::sample(seed, n + extra).restrict(n).unwrap();
        prop_assert_eq!(small.g(), big.g());
        prop_assert_eq!(small.h(), big.h());
    }

    #[test]
    fn linear_flow_group_law(a in any::<u64>(), b in any::<u64>(), t in 0.0f64..3.0, s in 0.0f64..3.0, mass in 1.0f64..50.0) {
        let data = InitialData { position: field(a, 3), velocity: field(b, 3) };
        let once = propagate_linear(&data, t + s, mass).unwrap();
        let twice = propagate_linear(&propagate_linear(&data, t, mass).unwrap(), s, mass).unwrap();
        prop_assert!(close(&once.position, &twice.position, 1e-12));
        prop_assert!(close(&once.velocity, &twice.velocity, 1e-12));
    }

    #[test]
    fn pairing_and_duhamel_are_linear(a in any::<u64>(), b in any::<u64>(), c in -3.0f64..3.0, mass in 1.0f64..20.0) {
        let bx = FrequencyBox::new(2);
        let times: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
        let series = |seed: u64| -> Vec<SpectralField> {
            times.iter().enumerate().map(|(i, _)| field(seed.wrapping_add(i as u64), 2)).collect()
        };
        let (f, g) = (series(a), series(b));
        let h: Vec<SpectralField> = f.iter().zip(&g).map(|(x, y)| x.plus_scaled(c, y)).collect();
        let (df, dg, dh) = (
            duhamel_apply(&times, &f, mass).unwrap(),
            duhamel_apply(&times, &g, mass).unwrap(),
            duhamel_apply(&times, &h, mass).unwrap(),
        );
        let comb = df.plus_scaled(c, &dg).unwrap();
        for (x, y) in comb.position.iter().zip(&dh.position) {
            prop_assert!(close(x, y, 1e-12));
        }
        let as_traj = |p: Vec<SpectralField>| Trajectory {
            times: times.clone(),
            velocity: vec![SpectralField::zeros(bx); p.len()],
            position: p,
            mass: 1.0,
        };
        let psi = |t: f64| wnlw_core::solver::bump(t, 1.0);
        let m = [1, 1, 0];
        let pf = pair_distribution(&as_traj(f), psi, m).unwrap();
        let pg = pair_distribution(&as_traj(g), psi, m).unwrap();
        let ph = pair_distribution(&as_traj(h), psi, m).unwrap();
        prop_assert!((pf + pg * c - ph).norm() <= 1e-10 * (1.0 + ph.norm()));
    }
}
