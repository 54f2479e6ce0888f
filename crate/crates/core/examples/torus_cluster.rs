use bochner_rho::torus_lab::{density_compare, write_csv, TorusConfig, TorusField, TorusMetric, TrigMode};

fn main() -> bochner_rho::Result<()> {
    let cfg = TorusConfig {
        nx: 64,
        ny: 64,
        lx: 1.0,
        ly: 1.0,
        // two flux quanta with a cos(2πx) modulation
        field: TorusField { b0: 4.0 * std::f64::consts::PI, modes: vec![TrigMode { kx: 1, ky: 0, cos: 3.0, sin: 0.0 }] },
        metric: TorusMetric::Flat,
        p_list: vec![2, 4, 6],
        eigen: Default::default(),
        quad_points: 32,
    };
    let run = density_compare(&cfg)?;
    println!("mu0 = {:.4}, gap edge slope / 2 mu0 = {:.4}", run.mu0, run.gap_edge_ratio);
    for r in &run.reports {
        println!("p={} d_p={} gap=({:.3}, {:.3}) via {:?}", r.p, r.d_p, r.gap_lo, r.gap_hi, r.solver);
    }
    write_csv(&run.reports, std::io::stdout())
}
