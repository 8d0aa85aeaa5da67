//! Numerical tolerances and iteration limits.

use serde::{Deserialize, Serialize};

/// Every threshold the library uses. Defaults are calibrated for `f64`
/// with O(1) coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative singular-value threshold for numerical rank.
    pub rank: f64,
    /// Relative radius for merging companion eigenvalues.
    pub cluster: f64,
    /// Relative radius of the second-stage merge, confirmed by a rank test.
    pub cluster_merge: f64,
    /// Absolute distance from a weight line that counts as "on" it.
    pub edge: f64,
    /// Absolute coefficient tolerance for symmetry.
    pub sym: f64,
    /// Absolute eigenvalue tolerance for positivity.
    pub pos: f64,
    /// Residual tolerance on principal-part coefficients.
    pub res: f64,
    /// Determinant threshold after row normalization.
    pub det: f64,
    /// Principal-angle threshold for subspace equality.
    pub angle: f64,
    /// Relative distance below which two points are the same point.
    pub coincide: f64,
    /// Relative residual below which a leading coefficient counts as dependent.
    pub lead: f64,
    /// Largest admissible condition number of the complementary block.
    pub max_cond: f64,
    /// Largest truncation order reached by automatic doubling.
    pub max_truncation: usize,
    /// Initial trapezoid node count for contour quadrature.
    pub contour_nodes: usize,
    /// Node-count cap for adaptive contour quadrature.
    pub contour_max_nodes: usize,
    /// Agreement required between successive contour refinements.
    pub contour_agree: f64,
    /// Relative tolerance of adaptive Gauss–Legendre quadrature.
    pub quad_rel: f64,
    /// Real sample count used by the positivity screen.
    pub pos_samples: usize,
    /// Half-width of the real sampling window of the positivity screen.
    pub pos_radius: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-8,
            cluster: 1e-7,
            cluster_merge: 1e-3,
            edge: 1e-6,
            sym: 1e-10,
            pos: 1e-10,
            res: 1e-9,
            det: 1e-8,
            angle: 1e-8,
            coincide: 1e-12,
            lead: 1e-6,
            max_cond: 1e10,
            max_truncation: 64,
            contour_nodes: 256,
            contour_max_nodes: 4096,
            contour_agree: 1e-10,
            quad_rel: 1e-10,
            pos_samples: 2001,
            pos_radius: 20.0,
        }
    }
}

impl Tolerances {
    /// Reads a partial JSON document; missing keys keep their defaults.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
