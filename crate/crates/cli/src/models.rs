//! Model files and the bundled examples.

use crate::error::CliError;
use cone_ext::{fixtures, Model, Tolerances};

/// Bundled model documents by name.
pub const BUNDLED: [(&str, &str); 6] = [
    ("cex1_a2", include_str!("../models/cex1_a2.json")),
    ("cex1_a06", include_str!("../models/cex1_a06.json")),
    ("beta_plus", include_str!("../models/beta_plus.json")),
    ("beta_minus_b05", include_str!("../models/beta_minus_b05.json")),
    ("alpha_perturbed", include_str!("../models/alpha_perturbed.json")),
    ("shifted", include_str!("../models/shifted.json")),
];

/// Loads a model from a file path, a bundled name, or a test-zoo name.
pub fn load(spec: &str, tol: &Tolerances) -> Result<Model, CliError> {
    let path = std::path::Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: spec.into(), source: e })?;
        return Ok(Model::from_json_str_with(&text, tol)?);
    }
    if let Some((_, text)) = BUNDLED.iter().find(|(n, _)| *n == spec) {
        return Ok(Model::from_json_str_with(text, tol)?);
    }
    if let Some(m) = fixtures::by_name(spec) {
        return Ok(m);
    }
    Err(CliError::Io {
        path: spec.into(),
        source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled model"),
    })
}
