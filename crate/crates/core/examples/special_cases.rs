use bochner_rho::frame_spectral::build_frame;
use bochner_rho::random_fields::{almost_kahler_field, pointwise_parallel_field};
use bochner_rho::rho_formula::{rho_almost_kahler, rho_closed, rho_kahler_case};
use bochner_rho::tensor_geometry::{covariant_jet, endos_at, ChartField, GeometryJet};

fn jet(field: &ChartField) -> bochner_rho::Result<GeometryJet> {
    covariant_jet(field, &build_frame(&endos_at(field, &field.x0)?)?)
}

fn main() -> bochner_rho::Result<()> {
    // |𝒥| = 2π Id with a sheared metric
    let ak = jet(&almost_kahler_field(2, 3))?;
    println!("almost Kähler: closed {:.12e}  (1/24)|∇J|² {:.12e}", rho_closed(&ak)?.rho, rho_almost_kahler(&ak)?);

    // ∇J vanishes at x0 only, |𝒥| curved
    let k = jet(&pointwise_parallel_field(2, 3))?;
    println!("∇J = 0:        closed {:.12e}  two-group {:.12e}", rho_closed(&k)?.rho, rho_kahler_case(&k)?.rho);

    // each case refuses the other's jets
    println!("almost-Kähler formula on that jet: {}", rho_almost_kahler(&k).unwrap_err());
    Ok(())
}
