mod common;

use bochner_rho::frame_spectral::q_coefficients;
use bochner_rho::random_fields::random_field;
use bochner_rho::rho_formula::{rho_closed, rho_polar};
use bochner_rho::torus_lab::*;
use common::{gauge_rotation, jet_of, rel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mode() -> impl Strategy<Value = TrigMode> {
    (-2i32..=2, -2i32..=2, -0.2f64..0.2, -0.2f64..0.2)
        .prop_filter("zero wave vector", |(kx, ky, _, _)| (*kx, *ky) != (0, 0))
        .prop_map(|(kx, ky, cos, sin)| TrigMode { kx, ky, cos, sin })
}

fn torus(modes: Vec<TrigMode>, w_modes: Vec<TrigMode>, n_flux: u32, n: usize) -> TorusConfig {
    let tau = std::f64::consts::TAU;
    TorusConfig {
        nx: n,
        ny: n,
        lx: 1.0,
        ly: 1.0,
        field: TorusField { b0: tau * n_flux as f64, modes: modes.into_iter().map(|m| TrigMode { cos: m.cos * tau, sin: m.sin * tau, ..m }).collect() },
        metric: if w_modes.is_empty() {
            TorusMetric::Flat
        } else {
            TorusMetric::Conformal { w0: 1.0, modes: w_modes.into_iter().map(|m| TrigMode { cos: m.cos * 0.3, sin: m.sin * 0.3, ..m }).collect() }
        },
        p_list: vec![1],
        eigen: EigenOptions::default(),
        quad_points: 8,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn q_coefficients_are_antisymmetric(n in 1usize..=3, seed in any::<u64>()) {
        let q = q_coefficients(&jet_of(&random_field(n, seed)));
        prop_assert!(q.antisymmetry_residual() < 1e-9 * (1.0 + q.scale()));
        prop_assert!(q.derived_residual() < 1e-9 * (1.0 + q.scale()));
    }

    #[test]
    fn quadratic_groups_stay_nonnegative(n in 1usize..=3, seed in any::<u64>()) {
        let r = rho_closed(&jet_of(&random_field(n, seed))).unwrap();
        prop_assert!(r.j1 >= 0.0);
        prop_assert!(r.j2 >= 0.0);
    }

    #[test]
    fn closed_and_polar_forms_agree(n in 1usize..=3, seed in any::<u64>()) {
        let jet = jet_of(&random_field(n, seed));
        let (c, p) = (rho_closed(&jet).unwrap(), rho_polar(&jet).unwrap());
        prop_assert!(rel(p.rho, c.rho) <= 1e-7, "{} vs {}", p.rho, c.rho);
    }

    #[test]
    fn density_ignores_the_frame_choice(n in 1usize..=3, seed in any::<u64>(), gauge in any::<u64>()) {
        let jet = jet_of(&random_field(n, seed));
        let u = gauge_rotation(&jet.frame, &mut ChaCha8Rng::seed_from_u64(gauge));
        let moved = jet.regauge(&jet.frame.rotated(&u).unwrap());
        let (a, b) = (rho_closed(&jet).unwrap(), rho_closed(&moved).unwrap());
        prop_assert!((a.rho - b.rho).abs() <= 1e-9 * (1.0 + a.rho.abs()));
        prop_assert!((a.a0 - b.a0).abs() <= 1e-9 * (1.0 + a.a0.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lattice_operator_is_hermitian(
        modes in prop::collection::vec(mode(), 0..3),
        w_modes in prop::collection::vec(mode(), 0..2),
        n_flux in 1u32..=2,
        p in 1u32..=3,
    ) {
        let cfg = torus(modes, w_modes, n_flux, 28);
        let op = assemble(&cfg, p).unwrap();
        prop_assert!(op.matrix.hermiticity_residual() <= HERMITIAN_TOL);
        prop_assert!(op.total_flux_residual(n_flux) < 1e-9);
    }

    #[test]
    fn lattice_spectrum_is_gauge_invariant(
        modes in prop::collection::vec(mode(), 0..3),
        theta in prop::collection::vec(0.0f64..std::f64::consts::TAU, 100),
    ) {
        let cfg = torus(modes, vec![], 1, 10);
        let op = assemble(&cfg, 1).unwrap();
        let a = dense_spectrum(&op.matrix, op.dim());
        let b = dense_spectrum(&op.matrix.gauge_transformed(&theta), op.dim());
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }
}
