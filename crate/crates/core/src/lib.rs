pub mod cli_reports;
pub mod error;
pub mod field;
pub mod frame_spectral;
pub mod model_oracle;
pub mod random_fields;
pub mod rho_formula;
pub mod tensor_geometry;
pub mod tensors;
pub mod torus_lab;

pub use error::{Error, Result};
