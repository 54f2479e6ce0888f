use bochner_rho::frame_spectral::build_frame;
use bochner_rho::random_fields::random_field;
use bochner_rho::rho_formula::{rho_closed, rho_polar};
use bochner_rho::tensor_geometry::{covariant_jet, endos_at};

fn main() -> bochner_rho::Result<()> {
    // a seeded curved field in real dimension 4
    let field = random_field(2, 7);

    // frame at the base point, then the covariant jet
    let frame = build_frame(&endos_at(&field, &field.x0)?)?;
    let jet = covariant_jet(&field, &frame)?;

    let closed = rho_closed(&jet)?;
    let polar = rho_polar(&jet)?;
    println!("a_j       = {:?}", closed.a);
    println!("A0        = {:+.12e}", closed.a0);
    println!("A1        = {:+.12e}", closed.a1);
    println!("J1        = {:+.12e}", closed.j1);
    println!("J2        = {:+.12e}", closed.j2);
    println!("rho       = {:+.12e}", closed.rho);
    println!("rho polar = {:+.12e}", polar.rho);
    println!("|diff|    = {:.2e}", (closed.rho - polar.rho).abs());
    Ok(())
}
