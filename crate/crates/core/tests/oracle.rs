mod common;

use bochner_rho::frame_spectral::q_coefficients;
use bochner_rho::model_oracle::*;
use bochner_rho::random_fields::*;
use bochner_rho::rho_formula::rho_closed;
use bochner_rho::Error;
use common::{jet_of, rel};
use num_complex::Complex64;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn first_moment_norm_at_a_two() {
    let ctx = ModelContext::new(&[2.0], 6).unwrap();
    let z = PolyGauss::coordinate(1, 0, false);
    let zg = ctx.multiply(&z, &PolyGauss::constant(1, one())).unwrap();
    let norm = ctx.norm_sqr(&zg).unwrap();
    assert!((norm - std::f64::consts::PI).abs() < 1e-14, "{norm}");
    assert!((gaussian_moment_quadrature(1, 2.0) - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn moment_table_matches_quadrature() {
    for a in [[0.5, 1.0, 3.0], [2.0, 2.0, 2.0]] {
        let ctx = ModelContext::new(&a, 8).unwrap();
        assert!(ctx.moment_quadrature_residual() < 1e-12);
    }
}

#[test]
fn inverse_of_l_on_eigenvectors_and_kernel() {
    let a = [1.3, 0.6];
    let ctx = ModelContext::new(&a, 6).unwrap();
    let zbar = PolyGauss::coordinate(2, 1, true);
    let u = ctx.inverse_l(&zbar).unwrap();
    assert!(u.sub(&zbar.scale(Complex64::new(1.0 / (2.0 * a[1]), 0.0))).max_abs() < 1e-15);
    let z = PolyGauss::coordinate(2, 0, false);
    assert!(matches!(ctx.inverse_l(&z), Err(Error::KernelComponent { .. })));
    assert!(ctx.inverse_l(&PolyGauss::zero(2)).unwrap().is_empty());
    let mixed = PolyGauss::monomial(&[1, 0], &[1, 0], one());
    let back = ctx.apply_l(&ctx.inverse_l(&ctx.apply_l(&mixed).unwrap()).unwrap()).unwrap();
    assert!(back.sub(&ctx.apply_l(&mixed).unwrap()).max_abs() < 1e-13);
}

#[test]
fn projection_fixes_holomorphic_monomials() {
    let ctx = ModelContext::new(&[0.8, 1.7, 2.5], 6).unwrap();
    for beta in [[0, 0, 0], [1, 0, 2], [3, 1, 0]] {
        let f = PolyGauss::monomial(&beta, &[0, 0, 0], Complex64::new(0.3, -1.1));
        assert!(ctx.project_p(&f).unwrap().sub(&f).max_abs() < 1e-15);
    }
    let anti = PolyGauss::monomial(&[0, 0, 0], &[1, 0, 0], one());
    assert!(ctx.project_p(&anti).unwrap().max_abs() < 1e-15);
}

#[test]
fn model_identities_hold_for_each_dimension() {
    for (n, a) in [(1, vec![1.4]), (2, vec![0.9, 2.2]), (3, vec![1.0, 1.0, 2.5])] {
        let ctx = ModelContext::new(&a, 6).unwrap();
        for c in model_identities(&ctx, 5).unwrap() {
            assert!(c.pass, "n={n}: {} residual {:.3e}", c.name, c.residual);
            assert!(c.residual < 1e-12, "n={n}: {} residual {:.3e}", c.name, c.residual);
        }
    }
}

#[test]
fn oracle_terms_match_the_closed_groups() {
    for n in 1..=3 {
        for seed in 0..6 {
            let jet = jet_of(&random_field(n, 300 + seed));
            let q = q_coefficients(&jet);
            let ctx = ModelContext::new(&jet.a, DEFAULT_DEGREE).unwrap();
            let o = rho_oracle_with(&ctx, &jet, &q).unwrap();
            let c = rho_closed(&jet).unwrap();
            let d = displayed_terms(&jet, &q);
            let scale = 1.0 + c.rho.abs() + c.j1 + c.j2;
            assert!((o.a0 - c.a0).abs() < 1e-9 * scale, "A0 {} vs {}", o.a0, c.a0);
            assert!((o.a0 - d.a0).abs() < 1e-9 * scale);
            assert!((o.a1 - c.a1).abs() < 1e-9 * scale, "A1 {} vs {}", o.a1, c.a1);
            assert!((o.a1 - d.a1).abs() < 1e-9 * scale);
            assert!((o.a2 - o.a3 - c.j1 - c.j2).abs() < 1e-9 * scale, "n={n}: A2-A3 {} vs {}", o.a2 - o.a3, c.j1 + c.j2);
            assert!(o.a3 >= -1e-12 * scale, "A3 {}", o.a3);
            assert!(rel(o.rho, c.rho) < 1e-9);

            let lt = ladder_terms(&ctx, &q).unwrap();
            let i = lt.i_terms(&ctx).unwrap();
            for idx in [0, 1, 3] {
                assert!((i[idx] - d.i[idx]).abs() < 1e-9 * (1.0 + i[idx].abs()), "n={n} I{}: {} vs {}", idx + 1, i[idx], d.i[idx]);
            }
            assert!(lt.cross_level_overlap(&ctx).unwrap() < 1e-12);
        }
    }
}

#[test]
fn oracle_is_independent_of_truncation() {
    for n in 1..=3 {
        for seed in 0..4 {
            let jet = jet_of(&random_field(n, 900 + seed));
            let q = q_coefficients(&jet);
            let r6 = rho_oracle_with(&ModelContext::new(&jet.a, 6).unwrap(), &jet, &q).unwrap();
            let r8 = rho_oracle_with(&ModelContext::new(&jet.a, 8).unwrap(), &jet, &q).unwrap();
            assert!((r6.rho - r8.rho).abs() <= 1e-10 * (1.0 + r6.rho.abs()));
            assert!((r6.a3 - r8.a3).abs() <= 1e-10 * (1.0 + r6.a3.abs()));
        }
    }
}

#[test]
fn truncation_below_minimum_is_refused() {
    assert!(matches!(ModelContext::new(&[1.0], MIN_DEGREE - 1), Err(Error::Precondition(_))));
    assert!(matches!(ModelContext::new(&[1.0, -2.0], 6), Err(Error::Precondition(_))));
}

#[test]
fn corrupted_moment_table_is_flagged() {
    let clean = ModelContext::new(&[1.2, 0.7], 6).unwrap();
    let bad = clean.moment(0, 2) * (1.0 + 1e-6);
    let ctx = clean.with_moment(0, 2, bad);
    let checks = match model_identities(&ctx, 1) { Ok(c) => c, Err(e) => panic!("{e}") };
    let norm = checks.iter().find(|c| c.name == "|z^b P(.,0)|^2").unwrap();
    assert!(!norm.pass, "residual {:.3e}", norm.residual);
}
