use bochner_rho::cli_reports::{rho_report, FieldSpec};

const SPEC: &str = r#"{
  "n": 1,
  "g": "flat",
  "A": [[], [{"c": 2.0, "pow": [1]}, {"c": 0.5, "waves": [{"axis": 0, "kind": "sin", "freq": 1.0}]}]],
  "x0": [0.4, 0.0]
}"#;

fn main() -> bochner_rho::Result<()> {
    // b(x, y) = 2 + 0.5 cos x on the flat plane
    let spec: FieldSpec = serde_json::from_str(SPEC).expect("valid field spec");
    let report = rho_report(&spec.to_field()?)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}
