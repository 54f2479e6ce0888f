//! One PASS/FAIL line per acceptance criterion.
//!
//! A criterion with a recorded failure mode may print FAIL; the run still
//! succeeds as long as it fails in exactly that way. Any other failure aborts.

mod common;

use std::time::Instant;

use bochner_rho::cli_reports::{oracle_compare, selfcheck_with, RunConfig};
use bochner_rho::frame_spectral::q_coefficients;
use bochner_rho::model_oracle::{rho_oracle_with, ModelContext};
use bochner_rho::random_fields::*;
use bochner_rho::rho_formula::{rho_almost_kahler, rho_closed, rho_kahler_case};
use bochner_rho::torus_lab::{density_compare, TorusConfig, TorusField, TorusMetric, TorusRun, TrigMode};
use common::{gauge_rotation, jet_of, rel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TAU: f64 = std::f64::consts::TAU;

struct Line {
    id: &'static str,
    pass: bool,
    detail: String,
    sub: Vec<(bool, String)>,
    /// `Some(ok)` for a known failure: `ok` says whether it failed in the recorded way.
    known: Option<bool>,
}

impl Line {
    fn new(id: &'static str, pass: bool, detail: String) -> Self {
        Line { id, pass, detail, sub: Vec::new(), known: None }
    }
}

fn verdict(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn criterion_1_2_8() -> Vec<Line> {
    let t = Instant::now();
    let cfg = RunConfig::default();
    let report = oracle_compare(&cfg);
    let secs = t.elapsed().as_secs_f64();
    let mut per_n = [0usize; 4];
    for r in &report.rows {
        per_n[r.n] += 1;
    }
    let (mut a0, mut a1, mut diff) = (0.0f64, 0.0f64, 0.0f64);
    let mut a2 = [0.0f64; 4];
    for r in &report.rows {
        let s = 1.0 + r.rho_closed.abs();
        a0 = a0.max((r.closed.a0 - r.oracle.a0).abs() / s);
        a1 = a1.max((r.displayed.a1 - r.oracle.a1).abs() / s);
        a2[r.n] = a2[r.n].max((r.displayed.a2 - r.oracle.a2).abs() / (1.0 + r.oracle.a2.abs()));
        diff = diff.max(((r.oracle.a2 - r.oracle.a3) - (r.closed.j1 + r.closed.j2)).abs() / s);
    }
    let battery = per_n[1..].iter().all(|&c| c >= 20);
    let total = battery && report.max_closed_vs_oracle <= 1e-6;
    let sub = vec![
        (battery, format!("fields per n = {:?}, skipped {}", &per_n[1..], report.skipped.len())),
        (report.max_closed_vs_oracle <= 1e-6, format!("|rho_closed - rho_oracle|/(1+|rho|) max {:.2e} (tol 1e-6)", report.max_closed_vs_oracle)),
        (a0 <= 1e-6, format!("A0 closed vs oracle max {a0:.2e}")),
        (a1 <= 1e-6, format!("A1 display vs oracle max {a1:.2e}")),
        (a2[1] <= 1e-6, format!("A2 display vs oracle, n=1: {:.2e}", a2[1])),
        (a2[2] <= 1e-6, format!("A2 display vs oracle, n=2: {:.2e}", a2[2])),
        (a2[3] <= 1e-6, format!("A2 display vs oracle, n=3: {:.2e}", a2[3])),
        (diff <= 1e-6, format!("A2 - A3 vs J1 + J2 max {diff:.2e}")),
        (secs < 60.0, format!("runtime {secs:.1} s (target < 60 s)")),
    ];
    let pass = sub.iter().all(|s| s.0);
    // recorded: only the n >= 2 display of A2 disagrees, everything else holds
    let known_ok = total && a0 <= 1e-6 && a1 <= 1e-6 && a2[1] <= 1e-6 && a2[2] > 1e-6 && diff <= 1e-6;
    let mut c1 = Line::new("C1 closed form vs Fock oracle", pass, format!("{} fields", report.rows.len()));
    c1.sub = sub;
    c1.known = if pass { None } else { Some(known_ok) };

    let c2 = Line::new(
        "C2 polar form vs closed form",
        battery && report.max_polar_vs_closed <= 1e-7,
        format!("max |rho_polar - rho_closed|/(1+|rho|) = {:.2e} (tol 1e-7)", report.max_polar_vs_closed),
    );

    let mut trunc = 0.0f64;
    for n in 1..=3 {
        for i in 0..20 {
            let jet = jet_of(&random_field(n, bochner_rho::cli_reports::field_seed(cfg.seed, n, i)));
            let q = q_coefficients(&jet);
            let r6 = rho_oracle_with(&ModelContext::new(&jet.a, 6).unwrap(), &jet, &q).unwrap();
            let r8 = rho_oracle_with(&ModelContext::new(&jet.a, 8).unwrap(), &jet, &q).unwrap();
            for (x, y) in [(r6.rho, r8.rho), (r6.a1, r8.a1), (r6.a2, r8.a2), (r6.a3, r8.a3)] {
                trunc = trunc.max(rel(x, y));
            }
        }
    }
    let c8 = Line::new("C8 truncation independence", trunc <= 1e-10, format!("max D=6 vs D=8 gap {trunc:.2e} (tol 1e-10)"));
    vec![c1, c2, c8]
}

fn criterion_3() -> Line {
    let t = Instant::now();
    let report = selfcheck_with(&RunConfig::default(), ModelContext::new).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let worst = report.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    let exact = report
        .checks
        .iter()
        .filter(|c| !c.name.contains("vs"))
        .map(|c| c.residual)
        .fold(0.0, f64::max);
    let mut line = Line::new(
        "C3 identity suite",
        report.failed == 0 && worst <= 1e-9 && secs < 10.0,
        format!("{} checks, {} failed, worst {worst:.2e}, {secs:.1} s", report.checks.len(), report.failed),
    );
    line.sub.push((exact <= 1e-12, format!("exact identities worst {exact:.2e} (expected <= 1e-12)")));
    line
}

fn criterion_4() -> Line {
    let (mut ak, mut kc) = (0.0f64, 0.0f64);
    let mut count = 0;
    for n in 1..=3 {
        for seed in 0..10 {
            let jet = jet_of(&almost_kahler_field(n, 500 + seed));
            ak = ak.max(rel(rho_closed(&jet).unwrap().rho, rho_almost_kahler(&jet).unwrap()));
            for f in [kahler_field(n, seed), pointwise_parallel_field(n, 600 + seed)] {
                let jet = jet_of(&f);
                kc = kc.max(rel(rho_closed(&jet).unwrap().rho, rho_kahler_case(&jet).unwrap().rho));
            }
            count += 1;
        }
    }
    let mut line = Line::new("C4 special cases", ak <= 1e-7 && kc <= 1e-7, format!("{count} almost-Kähler and {} parallel-J jets", 2 * count));
    line.sub.push((ak <= 1e-7, format!("closed vs (1/24)|∇J|² max {ak:.2e}")));
    line.sub.push((kc <= 1e-7, format!("closed vs ∇J = 0 formula max {kc:.2e}")));
    line
}

fn constant_torus(n_flux: u32) -> TorusConfig {
    TorusConfig {
        nx: 96,
        ny: 96,
        lx: TAU,
        ly: TAU,
        field: TorusField { b0: n_flux as f64 / TAU, modes: vec![] },
        metric: TorusMetric::Flat,
        p_list: (4..=24).step_by(4).collect(),
        eigen: Default::default(),
        quad_points: 8,
    }
}

fn criterion_5() -> Line {
    let t = Instant::now();
    let mut line = Line::new("C5 constant-field torus", true, "N = 96, p in 4..=24, N_flux in {1, 2}".into());
    for n_flux in [1, 2] {
        let cfg = constant_torus(n_flux);
        let run = density_compare(&cfg).unwrap();
        let h = cfg.hx();
        let mut worst_ratio = 0.0f64;
        let mut counts = true;
        for r in &run.reports {
            let bound = 5.0 * (r.p as f64 * cfg.field.b0).powi(2) * h * h;
            worst_ratio = worst_ratio.max(r.max_abs_lambda / bound);
            counts &= r.d_p == (r.p * n_flux) as usize;
        }
        let fit = (run.gap_edge_ratio - 1.0).abs() <= 0.1;
        line.sub.push((worst_ratio <= 1.0, format!("N_flux={n_flux}: max|λ| / 5(pB0)²h² = {worst_ratio:.3}")));
        line.sub.push((counts, format!("N_flux={n_flux}: d_p = p N_flux for p in {:?}", cfg.p_list)));
        line.sub.push((fit, format!("N_flux={n_flux}: gap edge slope / 2μ0 = {:.4}", run.gap_edge_ratio)));
    }
    let secs = t.elapsed().as_secs_f64();
    line.sub.push((secs < 300.0, format!("runtime {secs:.0} s (target < 300 s)")));
    line.pass = line.sub.iter().all(|s| s.0);
    line
}

fn cosine_torus() -> TorusConfig {
    TorusConfig {
        nx: 192,
        ny: 32,
        lx: TAU,
        ly: 1.0,
        field: TorusField { b0: 2.0, modes: vec![TrigMode { kx: 1, ky: 0, cos: 0.5, sin: 0.0 }] },
        metric: TorusMetric::Flat,
        p_list: (6..=30).step_by(4).collect(),
        eigen: Default::default(),
        quad_points: 64,
    }
}

fn criterion_6() -> Line {
    let t = Instant::now();
    let cfg = cosine_torus();
    let run: TorusRun = density_compare(&cfg).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let last = run.reports.last().unwrap();
    let vol_mean = run.quadrature.rho_mean;
    let vol_sq = run.quadrature.rho_sq_mean;
    let mean_final = last.mean_discrepancy() / vol_mean.abs();
    let sq_final = last.sq_discrepancy() / vol_sq.abs();
    let mean_ok = run.mean_inversions <= 1 && mean_final < 0.25;
    let sq_ok = run.sq_inversions <= 1 && sq_final < 0.25;
    let mut line = Line::new(
        "C6 non-constant torus trend",
        mean_ok && sq_ok && secs < 900.0,
        "finite-p thresholds are an engineering budget, not a bound".into(),
    );
    line.sub.push((mean_ok, format!(
        "f(λ)=λ: {} inversions, final |disc| = {:.3e} vs ∫ρ/vol = {:.3e}, log-log rate {:.2}",
        run.mean_inversions, last.mean_discrepancy(), vol_mean, run.mean_rate
    )));
    line.sub.push((sq_ok, format!(
        "f(λ)=λ²: {} inversions, final |disc| = {:.3e} vs ∫ρ²/vol = {:.3e}, log-log rate {:.2}",
        run.sq_inversions, last.sq_discrepancy(), vol_sq, run.sq_rate
    )));
    for r in &run.reports {
        line.sub.push((true, format!("p={:2} d_p={:3} mean λ = {:+.4e}", r.p, r.d_p, r.mean_lambda)));
    }
    line.sub.push((secs < 900.0, format!("runtime {secs:.0} s (target < 900 s)")));
    // recorded: ρ vanishes identically on a surface, so the discrepancy is pure
    // O(p²h²) lattice error that grows along the sweep
    let recorded = run.quadrature.rho_max_abs < 1e-9
        && run.reports.iter().all(|r| r.d_p == 2 * r.p as usize)
        && (1.5..=2.5).contains(&run.mean_rate);
    if !line.pass {
        line.known = Some(recorded);
    }
    line
}

fn criterion_7() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    let mut mixed = 0;
    for trial in 0..50u64 {
        let n = 1 + (trial % 3) as usize;
        let field = if trial % 2 == 0 { degenerate_field(n, 2.1, trial) } else { random_field(n, 50 + trial) };
        let jet = jet_of(&field);
        let u = gauge_rotation(&jet.frame, &mut rng);
        if (0..n).any(|j| (0..n).any(|k| j != k && u[(j, k)].norm() > 1e-3)) {
            mixed += 1;
        }
        let moved = jet.regauge(&jet.frame.rotated(&u).unwrap());
        let (a, b) = (rho_closed(&jet).unwrap(), rho_closed(&moved).unwrap());
        worst = worst.max((a.rho - b.rho).abs() / (1.0 + a.rho.abs()));
    }
    Line::new("C7 frame-gauge invariance", worst <= 1e-9, format!("50 trials ({mixed} mixing degenerate directions), max drift {worst:.2e}"))
}

fn main() {
    let mut lines = criterion_1_2_8();
    lines.push(criterion_3());
    lines.push(criterion_4());
    lines.push(criterion_5());
    lines.push(criterion_6());
    lines.push(criterion_7());
    lines.sort_by_key(|l| l.id);

    let mut unexpected = Vec::new();
    for l in &lines {
        let tag = match l.known {
            Some(true) => " [known failure, reproduced as recorded]",
            Some(false) => " [known failure, NOT in the recorded form]",
            None => "",
        };
        println!("{} {}: {}{}", verdict(l.pass), l.id, l.detail, tag);
        for (ok, text) in &l.sub {
            println!("    {} {}", verdict(*ok), text);
        }
        if !l.pass && l.known != Some(true) {
            unexpected.push(l.id);
        }
    }
    let passed = lines.iter().filter(|l| l.pass).count();
    println!("acceptance: {passed}/{} criteria pass", lines.len());
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
