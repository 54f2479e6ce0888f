use std::path::{Path, PathBuf};

use bochner_rho::cli_reports::{FieldSpec, RunConfig};
use bochner_rho::torus_lab::TorusConfig;
use jsonschema::{Retrieve, Uri, Validator};
use serde_json::Value;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Resolves relative `$ref`s against the shipped schema directory.
struct SchemaDir(PathBuf);

impl Retrieve for SchemaDir {
    fn retrieve(&self, uri: &Uri<String>) -> Result<Value, Box<dyn std::error::Error + Send + Sync>> {
        let name = uri.path().as_str().rsplit('/').next().unwrap_or_default().to_string();
        let text = std::fs::read_to_string(self.0.join(&name)).map_err(|e| format!("{uri}: {e}"))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn validator(name: &str) -> Validator {
    let dir = crate_dir().join("schema");
    jsonschema::options().with_retriever(SchemaDir(dir.clone())).build(&read(&dir.join(name))).unwrap()
}

fn check(v: &Validator, doc: &Value, what: &str) {
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{what}: {errors:?}");
}

#[test]
fn shipped_configs_satisfy_the_schemas() {
    let run = validator("run_config.schema.json");
    let torus = validator("torus_config.schema.json");
    let field = validator("field_spec.schema.json");
    let mut seen = 0;
    for entry in std::fs::read_dir(crate_dir().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let doc = read(&path);
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if name.starts_with("torus_") {
            check(&torus, &doc, &name);
            serde_json::from_value::<TorusConfig>(doc).unwrap().validate().unwrap();
        } else if name.ends_with("_field.json") {
            check(&field, &doc, &name);
            serde_json::from_value::<FieldSpec>(doc).unwrap().to_field().unwrap();
        } else {
            check(&run, &doc, &name);
            RunConfig::load(&path).unwrap();
        }
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn schemas_reject_what_the_loader_rejects() {
    let run = validator("run_config.schema.json");
    for bad in [
        r#"{"tolerances":{"rho":-1}}"#,
        r#"{"mode":"plot"}"#,
        r#"{"seed":1,"unknown":true}"#,
        r#"{"oracle":{"ns":[4]}}"#,
        r#"{"torus":{"nx":2,"ny":8,"lx":1,"ly":1,"field":{"b0":1},"p_list":[1]}}"#,
        r#"{"field":{"n":1,"g":"round","A":[],"x0":[]}}"#,
    ] {
        let doc: Value = serde_json::from_str(bad).unwrap();
        assert!(!run.is_valid(&doc), "schema accepted {bad}");
    }
}

#[test]
fn default_run_config_round_trips_through_the_schema() {
    let run = validator("run_config.schema.json");
    let doc = serde_json::to_value(RunConfig::default()).unwrap();
    check(&run, &doc, "default");
}
