use bochner_rho::frame_spectral::build_frame;
use bochner_rho::random_fields::degenerate_field;
use bochner_rho::tensor_geometry::endos_at;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn main() -> bochner_rho::Result<()> {
    // all a_j equal: the frame is fixed only up to U(3)
    let field = degenerate_field(3, 1.25, 2);
    let endos = endos_at(&field, &field.x0)?;
    let frame = build_frame(&endos)?;
    println!("tau = {:.6}, a = {:?}", endos.tau, frame.a);
    println!("frame residual = {:.2e}", frame.invariant_residual(&endos));

    // cyclic permutation with phases, unitary
    let i = Complex64::i();
    let u = DMatrix::from_row_slice(3, 3, &[
        0.0.into(), 0.0.into(), i,
        1.0.into(), 0.0.into(), 0.0.into(),
        0.0.into(), -i, 0.0.into(),
    ]);
    let turned = frame.rotated(&u)?;
    println!("rotated residual = {:.2e}", turned.invariant_residual(&endos));
    Ok(())
}
