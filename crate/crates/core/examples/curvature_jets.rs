use bochner_rho::frame_spectral::build_frame;
use bochner_rho::random_fields::{random_field, sphere_field};
use bochner_rho::tensor_geometry::{covariant_jet, covariant_jet_fd, endos_at, riemann};

fn main() -> bochner_rho::Result<()> {
    // round sphere of radius 2: sectional curvature 1/4
    let sphere = sphere_field(2.0, 1.0, [0.9, 0.0]);
    let rm = riemann(&sphere, &sphere.x0)?;
    let g = sphere.metric_at(&sphere.x0);
    println!("K = {:.15}", rm.sectional(&g, 0, 1));

    // exact jet against finite differences
    let field = random_field(2, 11);
    let frame = build_frame(&endos_at(&field, &field.x0)?)?;
    let exact = covariant_jet(&field, &frame)?;
    println!("jet identity residual = {:.2e}", exact.residuals().max());
    for h in [1e-2, 5e-3, 2.5e-3] {
        let fd = covariant_jet_fd(&field, &frame, h)?;
        let err = fd.dd_jc.data.iter().zip(&exact.dd_jc.data).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        println!("h = {h:.1e}  max |dd J_fd - dd J| = {err:.3e}");
    }
    Ok(())
}
