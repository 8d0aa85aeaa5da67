//! Tolerance configuration: defaults, then the `CONE_EXT_CONFIG` file,
//! then command-line overrides.

use crate::error::CliError;
use cone_ext::Tolerances;

pub const CONFIG_ENV: &str = "CONE_EXT_CONFIG";

/// Command-line tolerance overrides; `None` keeps the lower layer.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct TolOverrides {
    /// Relative singular-value threshold for numerical rank.
    #[arg(long = "tol-rank", global = true)]
    pub rank: Option<f64>,
    /// Relative radius for merging eigenvalues.
    #[arg(long = "tol-cluster", global = true)]
    pub cluster: Option<f64>,
    /// Distance from a weight line that counts as on it.
    #[arg(long = "tol-edge", global = true)]
    pub edge: Option<f64>,
    /// Coefficient tolerance for symmetry.
    #[arg(long = "tol-sym", global = true)]
    pub sym: Option<f64>,
    /// Eigenvalue tolerance for positivity.
    #[arg(long = "tol-pos", global = true)]
    pub pos: Option<f64>,
    /// Residual tolerance on principal parts.
    #[arg(long = "tol-res", global = true)]
    pub res: Option<f64>,
    /// Determinant threshold after row normalization.
    #[arg(long = "tol-det", global = true)]
    pub det: Option<f64>,
    /// Principal-angle threshold for subspace equality.
    #[arg(long = "tol-angle", global = true)]
    pub angle: Option<f64>,
}

impl TolOverrides {
    pub fn apply(&self, t: &mut Tolerances) {
        let pairs = [
            (self.rank, &mut t.rank),
            (self.cluster, &mut t.cluster),
            (self.edge, &mut t.edge),
            (self.sym, &mut t.sym),
            (self.pos, &mut t.pos),
            (self.res, &mut t.res),
            (self.det, &mut t.det),
            (self.angle, &mut t.angle),
        ];
        for (v, slot) in pairs {
            if let Some(v) = v {
                *slot = v;
            }
        }
    }
}

/// Tolerances from a config file path (if any) and overrides.
pub fn resolve(file: Option<&str>, overrides: &TolOverrides) -> Result<Tolerances, CliError> {
    let mut t = match file {
        Some(path) if !path.is_empty() => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.into(), source: e })?;
            Tolerances::from_json(&text).map_err(|e| CliError::Config { path: path.into(), message: e.to_string() })?
        }
        _ => Tolerances::default(),
    };
    overrides.apply(&mut t);
    Ok(t)
}

/// [`resolve`] with the file named by `CONE_EXT_CONFIG`.
pub fn from_env(overrides: &TolOverrides) -> Result<Tolerances, CliError> {
    let file = std::env::var(CONFIG_ENV).ok();
    resolve(file.as_deref(), overrides)
}
