//! Cone models: a weight `nu` and the indicial family `[P_0, ..., P_{N-1}]`.

use crate::config::Tolerances;
use crate::error::{ConeError, Result};
use crate::linalg;
use crate::polynomial::MatrixPolynomial;
use crate::scalar::{cx, iunit, CMat, Cx, Real};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Where the powers of `x` sit relative to the `(xD_x)`-polynomials.
///
/// `Right` means `A = x^{-nu} sum_k P_k(xD_x) x^k`; `Left` means
/// `A = x^{-nu} sum_k x^k P_k(xD_x)`, which is how a formal adjoint comes out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Right,
    Left,
}

/// `N = ceil(nu)` with integers mapped to themselves despite round-off.
pub fn terms_for_nu(nu: f64) -> usize {
    let r = nu.round();
    if (nu - r).abs() < 1e-12 {
        r as usize
    } else {
        nu.ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeModel<T: Real> {
    nu: T,
    indicial: Vec<MatrixPolynomial<T>>,
    label: String,
    placement: Placement,
}

impl<T: Real> ConeModel<T> {
    /// Builds a model; a short indicial list is padded with zero polynomials.
    pub fn new(nu: T, indicial: Vec<MatrixPolynomial<T>>, label: impl Into<String>) -> Result<Self> {
        Self::with_placement(nu, indicial, label, Placement::Right, &Tolerances::default())
    }

    pub fn with_placement(
        nu: T,
        mut indicial: Vec<MatrixPolynomial<T>>,
        label: impl Into<String>,
        placement: Placement,
        tol: &Tolerances,
    ) -> Result<Self> {
        if !(nu > T::zero()) {
            return Err(ConeError::InvalidModel("nu must be positive".into()));
        }
        let n = terms_for_nu(nu.to_f64_lossy());
        let Some(p0) = indicial.first() else {
            return Err(ConeError::InvalidModel("indicial family is empty".into()));
        };
        let d = p0.dim();
        if indicial.len() > n {
            return Err(ConeError::InvalidModel(format!(
                "indicial family has {} entries but ceil(nu) = {n}",
                indicial.len()
            )));
        }
        for (k, p) in indicial.iter().enumerate() {
            if p.dim() != d {
                return Err(ConeError::DimensionMismatch(format!(
                    "indicial[{k}] has dimension {}, expected {d}",
                    p.dim()
                )));
            }
        }
        while indicial.len() < n {
            indicial.push(MatrixPolynomial::zero(d));
        }
        let lead = indicial[0].leading();
        let c = linalg::cond(lead);
        if !(c.to_f64_lossy() * tol.rank < 1.0) {
            return Err(ConeError::SingularLeading { cond: c.to_f64_lossy() });
        }
        Ok(ConeModel { nu, indicial, label: label.into(), placement })
    }

    /// x-independent model `A = x^{-nu} P_0(xD_x)`.
    pub fn stationary(nu: T, p0: MatrixPolynomial<T>, label: impl Into<String>) -> Result<Self> {
        Self::new(nu, vec![p0], label)
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn dim(&self) -> usize {
        self.indicial[0].dim()
    }

    /// `N = ceil(nu)`, the length of the indicial family.
    pub fn n_terms(&self) -> usize {
        self.indicial.len()
    }

    pub fn indicial(&self) -> &[MatrixPolynomial<T>] {
        &self.indicial
    }

    pub fn p0(&self) -> &MatrixPolynomial<T> {
        &self.indicial[0]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// True when every `P_k`, `k >= 1`, vanishes.
    pub fn is_stationary(&self) -> bool {
        self.indicial.iter().skip(1).all(|p| p.is_zero(T::zero()))
    }

    /// The formal adjoint: conjugate-transposed coefficients and the
    /// opposite placement of the powers of `x`.
    pub fn formal_adjoint(&self) -> Self {
        let placement = match self.placement {
            Placement::Right => Placement::Left,
            Placement::Left => Placement::Right,
        };
        ConeModel {
            nu: self.nu,
            indicial: self.indicial.iter().map(|p| p.star()).collect(),
            label: format!("{}*", self.label),
            placement,
        }
    }

    /// Equivalent model with `Right` placement: `x^k Q(xD_x) = Q(xD_x + i k) x^k`.
    pub fn normal_ordered(&self) -> Self {
        match self.placement {
            Placement::Right => self.clone(),
            Placement::Left => ConeModel {
                nu: self.nu,
                indicial: self
                    .indicial
                    .iter()
                    .enumerate()
                    .map(|(k, p)| p.shifted(iunit::<T>() * T::lit(k as f64)))
                    .collect(),
                label: self.label.clone(),
                placement: Placement::Right,
            },
        }
    }

    /// Normal-ordered indicial family of the formal adjoint.
    pub fn adjoint_symbols(&self) -> Vec<MatrixPolynomial<T>> {
        self.normal_ordered().formal_adjoint().normal_ordered().indicial
    }

    /// Largest coefficient deviation between the model and its formal adjoint,
    /// both normal-ordered.
    pub fn symmetry_deviation(&self) -> T {
        let a = self.normal_ordered();
        let b = self.formal_adjoint().normal_ordered();
        a.indicial
            .iter()
            .zip(b.indicial.iter())
            .fold(T::zero(), |m, (p, q)| {
                let d = p.distance(q);
                if d > m {
                    d
                } else {
                    m
                }
            })
    }

    pub fn symmetry_check(&self, tol: &Tolerances) -> bool {
        self.symmetry_deviation().to_f64_lossy() <= tol.sym
    }

    /// Minimum eigenvalue of the Hermitian `P_0(sigma)` over equispaced real
    /// samples, with its location.
    pub fn min_real_eigenvalue(&self, n_samples: usize, radius: T) -> (T, T) {
        let n = n_samples.max(2);
        let mut worst = (T::max_value().unwrap_or(T::lit(1e300)), T::zero());
        for k in 0..n {
            let s = -radius + radius * T::lit(2.0 * k as f64 / (n - 1) as f64);
            let m = self.indicial[0].eval(Cx::new(s, T::zero()));
            let h = (&m + m.adjoint()) * cx::<T>(0.5, 0.0);
            let eig = h.symmetric_eigenvalues();
            for &e in eig.iter() {
                if e < worst.0 {
                    worst = (e, s);
                }
            }
        }
        worst
    }

    /// Semiboundedness screen: `P_0(sigma) >= -tol_pos` on the sample grid.
    pub fn positivity_check(&self, n_samples: usize, radius: T, tol: &Tolerances) -> Result<bool> {
        if !self.symmetry_check(tol) {
            return Err(ConeError::NotSymmetric { deviation: self.symmetry_deviation().to_f64_lossy() });
        }
        let (e, _) = self.min_real_eigenvalue(n_samples, radius);
        Ok(e.to_f64_lossy() >= -tol.pos)
    }

    /// Serializes to the model JSON document.
    pub fn to_json(&self) -> Value {
        let d = self.dim();
        let ind: Vec<Value> = self
            .indicial
            .iter()
            .map(|p| {
                let coeffs: Vec<Value> = p
                    .coeffs()
                    .iter()
                    .map(|a| {
                        let mut flat = Vec::with_capacity(d * d);
                        for i in 0..d {
                            for j in 0..d {
                                let z = a[(i, j)];
                                flat.push(serde_json::json!([z.re.to_f64_lossy(), z.im.to_f64_lossy()]));
                            }
                        }
                        Value::Array(flat)
                    })
                    .collect();
                serde_json::json!({"degree": p.degree(), "coeffs": coeffs})
            })
            .collect();
        let mut obj = serde_json::json!({
            "nu": self.nu.to_f64_lossy(),
            "d": d,
            "indicial": ind,
            "label": self.label,
        });
        if self.placement == Placement::Left {
            obj["placement"] = Value::String("left".into());
        }
        obj
    }

    /// Parses the model JSON document with field-level diagnostics.
    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json_str_with(text, &Tolerances::default())
    }

    pub fn from_json_str_with(text: &str, tol: &Tolerances) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| ConeError::Parse {
            field: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        Self::from_json_value(&v, tol)
    }

    pub fn from_json_value(v: &Value, tol: &Tolerances) -> Result<Self> {
        let perr = |field: &str, message: &str| ConeError::Parse { field: field.into(), message: message.into() };
        let obj = v.as_object().ok_or_else(|| perr("$", "expected an object"))?;
        let nu = obj.get("nu").and_then(Value::as_f64).ok_or_else(|| perr("nu", "expected a number"))?;
        if !(nu > 0.0) {
            return Err(perr("nu", "must be positive"));
        }
        let d = obj
            .get("d")
            .and_then(Value::as_u64)
            .filter(|&d| d > 0)
            .ok_or_else(|| perr("d", "expected a positive integer"))? as usize;
        let label = match obj.get("label") {
            None => String::new(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(perr("label", "expected a string")),
        };
        let placement = match obj.get("placement").map(|p| p.as_str()) {
            None | Some(Some("right")) => Placement::Right,
            Some(Some("left")) => Placement::Left,
            _ => return Err(perr("placement", "expected \"right\" or \"left\"")),
        };
        let ind = obj.get("indicial").and_then(Value::as_array).ok_or_else(|| perr("indicial", "expected an array"))?;
        if ind.is_empty() {
            return Err(perr("indicial", "must contain at least P_0"));
        }
        let n = terms_for_nu(nu);
        if ind.len() > n {
            return Err(perr("indicial", &format!("has {} entries but ceil(nu) = {n}", ind.len())));
        }
        let mut polys = Vec::with_capacity(ind.len());
        for (k, entry) in ind.iter().enumerate() {
            let f = format!("indicial[{k}]");
            let deg = entry
                .get("degree")
                .and_then(Value::as_u64)
                .ok_or_else(|| perr(&format!("{f}.degree"), "expected a nonnegative integer"))? as usize;
            let coeffs = entry
                .get("coeffs")
                .and_then(Value::as_array)
                .ok_or_else(|| perr(&format!("{f}.coeffs"), "expected an array"))?;
            if coeffs.len() != deg + 1 {
                return Err(perr(
                    &format!("{f}.coeffs"),
                    &format!("has {} matrices but degree {deg} needs {}", coeffs.len(), deg + 1),
                ));
            }
            let mut mats = Vec::with_capacity(deg + 1);
            for (j, c) in coeffs.iter().enumerate() {
                mats.push(parse_matrix::<T>(c, d, &format!("{f}.coeffs[{j}]"))?);
            }
            polys.push(MatrixPolynomial::new(mats)?);
        }
        Self::with_placement(T::lit(nu), polys, label, placement, tol)
    }
}

/// Accepts a flat row-major list of `d*d` pairs or `d` rows of `d` pairs.
fn parse_matrix<T: Real>(v: &Value, d: usize, field: &str) -> Result<CMat<T>> {
    let perr = |field: String, message: String| ConeError::Parse { field, message };
    let arr = v.as_array().ok_or_else(|| perr(field.into(), "expected an array".into()))?;
    let nested = arr.first().and_then(|r| r.as_array()).and_then(|r| r.first()).is_some_and(|x| x.is_array());
    let mut flat: Vec<(String, &Value)> = Vec::new();
    if nested {
        if arr.len() != d {
            return Err(perr(field.into(), format!("has {} rows, expected {d}", arr.len())));
        }
        for (i, row) in arr.iter().enumerate() {
            let r = row.as_array().ok_or_else(|| perr(format!("{field}[{i}]"), "expected a row".into()))?;
            if r.len() != d {
                return Err(perr(format!("{field}[{i}]"), format!("has {} entries, expected {d}", r.len())));
            }
            for (j, z) in r.iter().enumerate() {
                flat.push((format!("{field}[{i}][{j}]"), z));
            }
        }
    } else {
        if arr.len() != d * d {
            return Err(perr(field.into(), format!("has {} entries, expected d*d = {}", arr.len(), d * d)));
        }
        for (i, z) in arr.iter().enumerate() {
            flat.push((format!("{field}[{i}]"), z));
        }
    }
    let mut m = CMat::<T>::zeros(d, d);
    for (idx, (f, z)) in flat.into_iter().enumerate() {
        let p = z.as_array().filter(|p| p.len() == 2).ok_or_else(|| perr(f.clone(), "expected [re, im]".into()))?;
        let re = p[0].as_f64().ok_or_else(|| perr(format!("{f}[0]"), "expected a number".into()))?;
        let im = p[1].as_f64().ok_or_else(|| perr(format!("{f}[1]"), "expected a number".into()))?;
        m[(idx / d, idx % d)] = cx(re, im);
    }
    Ok(m)
}
