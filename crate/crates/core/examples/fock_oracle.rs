use bochner_rho::frame_spectral::{build_frame, q_coefficients};
use bochner_rho::model_oracle::{rho_oracle_with, ModelContext};
use bochner_rho::random_fields::random_field;
use bochner_rho::rho_formula::rho_closed;
use bochner_rho::tensor_geometry::{covariant_jet, endos_at};

fn main() -> bochner_rho::Result<()> {
    println!("{:>2} {:>5} {:>16} {:>16} {:>10}", "n", "seed", "closed", "oracle", "rel");
    for n in 1..=3 {
        for seed in 0..4u64 {
            let field = random_field(n, seed);
            let frame = build_frame(&endos_at(&field, &field.x0)?)?;
            let jet = covariant_jet(&field, &frame)?;
            let q = q_coefficients(&jet);

            // exact Gaussian moments up to degree 6
            let ctx = ModelContext::new(&jet.a, 6)?;
            let oracle = rho_oracle_with(&ctx, &jet, &q)?;
            let closed = rho_closed(&jet)?;
            let rel = (closed.rho - oracle.rho).abs() / (1.0 + oracle.rho.abs());
            println!("{n:>2} {seed:>5} {:>16.9e} {:>16.9e} {rel:>10.2e}", closed.rho, oracle.rho);
        }
    }
    Ok(())
}
