use bochner_rho::model_oracle::{model_identities, ModelContext};

fn main() -> bochner_rho::Result<()> {
    let ctx = ModelContext::new(&[0.9, 1.6], 6)?;
    let checks = model_identities(&ctx, 3)?;
    for c in &checks {
        println!("{} {:<48} {:.2e}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.residual);
    }

    // a perturbed moment table must be caught
    let m = ctx.moment(0, 2);
    let broken = ctx.with_moment(0, 2, m * 1.001);
    let failed = model_identities(&broken, 3)?.into_iter().filter(|c| !c.pass).count();
    println!("perturbed table: {failed} checks flagged");
    Ok(())
}
