//! Analysis pipelines behind the subcommands.

use crate::acceptance::{self, SuiteOptions};
use crate::error::CliError;
use crate::report::{claim, cx, Report, CLOSED_FORM, CONTOUR, X_SPACE};
use cone_ext::extension::{
    adjoint_domain, domain_stability, friedrichs_domain, global_basis, is_selfadjoint, saturation_check, strip_spectrum,
    DomainSubspace,
};
use cone_ext::mellin::{basis_functions, green_pairing_with, CutoffProfile, Dictionary};
use cone_ext::pairing::{contour_pairing_adaptive, nondegeneracy_check, pairing_gram, Circle};
use cone_ext::scalar::pair;
use cone_ext::spectrum::{boundary_spectrum, with_partial_mults, Strip};
use cone_ext::{Basis, ConeError, Domain, Gram, Model, Tolerances, C64};
use serde_json::{json, Value};

/// How domain vectors are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Coords {
    /// Coordinates in the normalized chain basis.
    Raw,
    /// Coefficients of `omega x^{ip} (i log x)^k` (scalar models only).
    Dictionary,
}

fn points_json(pts: &[cone_ext::Point64]) -> Value {
    Value::Array(
        pts.iter()
            .map(|p| {
                json!({
                    "sigma": cx(p.sigma0),
                    "algebraic_mult": p.algebraic_mult,
                    "partial_mults": p.partial_mults,
                    "route": CLOSED_FORM,
                })
            })
            .collect(),
    )
}

/// `spec_b` in a strip (default: the weight strip) with multiplicities.
pub fn spectrum(m: &Model, strip: Option<(f64, f64)>, tol: &Tolerances) -> Result<Report, CliError> {
    let nu = m.nu();
    let s = match strip {
        Some((lo, hi)) => Strip::new(lo, hi),
        None => Strip::weight(nu),
    };
    let pts = with_partial_mults(m.p0(), boundary_spectrum(m, s, tol)?, tol);
    let mut results = json!({
        "strip": [s.im_lo, s.im_hi],
        "points": points_json(&pts),
    });
    let mut report_notes = Vec::new();
    if strip.is_none() {
        let ss = strip_spectrum(m, tol)?;
        results["shifts"] = json!(ss.shifts);
        results["shifted_points"] = Value::Array(ss.sigma_prime.iter().map(|&z| cx(z)).collect());
        if pts.is_empty() {
            report_notes.push("D_min = D_max".to_string());
        }
    }
    let mut r = Report::new("spectrum", tol, Some(m), results);
    r.notes = report_notes;
    Ok(r)
}

/// Singular chains at every point of the weight strip.
pub fn chains(m: &Model, tol: &Tolerances) -> Result<Report, CliError> {
    let b = global_basis(m, tol)?;
    let pts: Vec<Value> = b
        .points
        .iter()
        .map(|pb| {
            let ch = &pb.chains;
            let chains: Vec<Value> = ch
                .chains
                .iter()
                .zip(&ch.mults)
                .map(|(g, &mu)| {
                    let pp: Vec<Value> =
                        (1..=mu as i32).map(|k| Value::Array(g.at(-k).iter().map(|&z| cx(z)).collect())).collect();
                    json!({"mult": mu, "principal_part": pp, "route": CLOSED_FORM})
                })
                .collect();
            json!({
                "sigma": cx(pb.sigma0),
                "partial_mults": ch.mults,
                "truncation": ch.truncation,
                "n_shift": pb.n_shift,
                "leading": ch.leading().iter().map(|v| v.iter().map(|&z| cx(z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "chains": chains,
                "basis_labels": pb.elements.iter().map(|e| e.label().to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(Report::new("chains", tol, Some(m), json!({"dim_E": b.dim(), "points": pts})))
}

fn bases(m: &Model, tol: &Tolerances) -> Result<(Basis, Basis, Gram), CliError> {
    let b = global_basis(m, tol)?;
    let bs = global_basis(&m.formal_adjoint(), tol)?;
    let g = pairing_gram(m, &b, &bs, tol)?;
    Ok((b, bs, g))
}

fn gram_json(g: &Gram, route: &str) -> Value {
    let mut v = g.to_json();
    v["route"] = json!(route);
    v
}

/// The Gram matrix of the adjoint pairing and its nondegeneracy.
pub fn pairing(m: &Model, csv: Option<&str>, tol: &Tolerances) -> Result<Report, CliError> {
    let (_, _, g) = bases(m, tol)?;
    if let Some(path) = csv {
        std::fs::write(path, g.to_csv()).map_err(|e| CliError::Io { path: path.into(), source: e })?;
    }
    let nd = nondegeneracy_check(&g, true, tol);
    let blocks: Vec<Value> = nd
        .blocks
        .iter()
        .map(|b| {
            json!({
                "row_point": [b.row_point.0, b.row_point.1],
                "col_point": [b.col_point.0, b.col_point.1],
                "tau": b.tau,
                "abs_det": b.abs_det,
                "route": CLOSED_FORM,
            })
        })
        .collect();
    let results = json!({"gram": gram_json(&g, CLOSED_FORM), "nondegenerate": nd.ok, "blocks": blocks});
    Ok(Report::new("pairing", tol, Some(m), results))
}

/// Parses `"1,1+2i,-0.5i"` into complex coordinates.
pub fn parse_vector(s: &str) -> Result<Vec<C64>, CliError> {
    s.split(',')
        .map(|t| {
            let t: String = t.chars().filter(|c| !c.is_whitespace()).collect();
            t.parse::<C64>().map_err(|_| CliError::Input(format!("cannot parse complex number {t:?}")))
        })
        .collect()
}

/// Reads a domain file: `{"coords": "raw"|"dictionary", "vectors": [[z, ...], ...]}`
/// where each `z` is a number or `[re, im]`.
pub fn parse_domain_file(text: &str) -> Result<(Option<Coords>, Vec<Vec<C64>>), CliError> {
    let perr = |field: &str, message: &str| ConeError::Parse { field: field.into(), message: message.into() };
    let v: Value = serde_json::from_str(text)
        .map_err(|e| perr(&format!("line {}, column {}", e.line(), e.column()), &e.to_string()))?;
    let coords = match v.get("coords").map(Value::as_str) {
        None => None,
        Some(Some("raw")) => Some(Coords::Raw),
        Some(Some("dictionary")) => Some(Coords::Dictionary),
        _ => return Err(perr("coords", "expected \"raw\" or \"dictionary\"").into()),
    };
    let vecs = v.get("vectors").and_then(Value::as_array).ok_or_else(|| perr("vectors", "expected an array"))?;
    let mut out = Vec::with_capacity(vecs.len());
    for (i, vec) in vecs.iter().enumerate() {
        let arr = vec.as_array().ok_or_else(|| perr(&format!("vectors[{i}]"), "expected an array"))?;
        let mut row = Vec::with_capacity(arr.len());
        for (j, z) in arr.iter().enumerate() {
            let field = format!("vectors[{i}][{j}]");
            let val = match z {
                Value::Number(n) => C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0),
                Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
                    (Some(re), Some(im)) => C64::new(re, im),
                    _ => return Err(perr(&field, "expected [re, im] numbers").into()),
                },
                _ => return Err(perr(&field, "expected a number or [re, im]").into()),
            };
            row.push(val);
        }
        out.push(row);
    }
    Ok((coords, out))
}

fn standard_dictionary(b: &Basis, tol: &Tolerances) -> Result<Dictionary, CliError> {
    if b.dim_space != 1 {
        return Err(ConeError::NotScalar(b.dim_space).into());
    }
    Ok(Dictionary::standard(b, CutoffProfile::default(), tol)?)
}

fn build_domain(b: &Basis, vecs: &[Vec<C64>], coords: Coords, tol: &Tolerances) -> Result<Domain, CliError> {
    for (i, v) in vecs.iter().enumerate() {
        if v.len() != b.dim() {
            return Err(CliError::Input(format!("vector {i} has {} entries but dim E = {}", v.len(), b.dim())));
        }
    }
    Ok(match coords {
        Coords::Raw => DomainSubspace::from_vectors(b.labels(), vecs),
        Coords::Dictionary => standard_dictionary(b, tol)?.domain(b.labels(), vecs),
    })
}

/// Reduced row echelon form of the rows, with entries below `eps` cleared.
fn rref(mut rows: Vec<Vec<C64>>, eps: f64) -> Vec<Vec<C64>> {
    let n = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..n {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).max_by(|&a, &b| rows[a][col].norm().total_cmp(&rows[b][col].norm())) else {
            break;
        };
        if rows[p][col].norm() <= eps {
            continue;
        }
        rows.swap(r, p);
        let piv = rows[r][col];
        for x in rows[r].iter_mut() {
            *x /= piv;
        }
        for i in 0..rows.len() {
            if i != r {
                let f = rows[i][col];
                let (src, dst) = if i < r {
                    let (a, b) = rows.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = rows.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= f * s;
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
    for row in rows.iter_mut() {
        for z in row.iter_mut() {
            if z.re.abs() <= eps {
                z.re = 0.0;
            }
            if z.im.abs() <= eps {
                z.im = 0.0;
            }
        }
    }
    rows
}

/// A domain in raw coordinates and, for scalar models, in dictionary coordinates.
fn domain_json(d: &Domain, b: &Basis, tol: &Tolerances) -> Value {
    let mut v = json!({"raw": d.to_json()});
    if let Ok(dict) = standard_dictionary(b, tol) {
        let cols: Option<Vec<Vec<C64>>> =
            (0..d.dim()).map(|j| dict.from_raw(&d.coords.column(j).iter().copied().collect::<Vec<_>>())).collect();
        if let Some(cols) = cols {
            let rows = rref(cols, 1e-12);
            v["dictionary"] = json!({
                "names": dict.names,
                "vectors": rows.iter().map(|r| r.iter().map(|&z| pair(z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            });
        }
    }
    v
}

/// `D^perp` inside `E(A^*)`.
pub fn adjoint(m: &Model, vecs: &[Vec<C64>], coords: Coords, tol: &Tolerances) -> Result<Report, CliError> {
    let (b, bs, g) = bases(m, tol)?;
    let d = build_domain(&b, vecs, coords, tol)?;
    let perp = adjoint_domain(&d, &g, tol)?;
    let results = json!({
        "domain": domain_json(&d, &b, tol),
        "adjoint_domain": domain_json(&perp, &bs, tol),
        "route": CLOSED_FORM,
    });
    Ok(Report::new("adjoint", tol, Some(m), results))
}

/// `D = D^perp` for a symmetric model.
pub fn selfadjoint_check(m: &Model, vecs: &[Vec<C64>], coords: Coords, tol: &Tolerances) -> Result<Report, CliError> {
    let b = global_basis(m, tol)?;
    let d = build_domain(&b, vecs, coords, tol)?;
    let g = pairing_gram(m, &b, &b, tol)?;
    let sa = is_selfadjoint(&d, &g, m, tol)?;
    let results = json!({
        "domain": domain_json(&d, &b, tol),
        "selfadjoint": sa,
        "saturated": saturation_check(&d, &b, tol),
        "route": CLOSED_FORM,
    });
    Ok(Report::new("selfadjoint-check", tol, Some(m), results))
}

/// The Friedrichs domain.
pub fn friedrichs(m: &Model, tol: &Tolerances) -> Result<Report, CliError> {
    let b = global_basis(m, tol)?;
    let f = friedrichs_domain(m, &b, tol)?;
    let g = pairing_gram(m, &b, &b, tol)?;
    let results = json!({
        "friedrichs_domain": domain_json(&f, &b, tol),
        "dim_E": b.dim(),
        "selfadjoint": is_selfadjoint(&f, &g, m, tol)?,
        "saturated": saturation_check(&f, &b, tol),
        "route": CLOSED_FORM,
    });
    let r = Report::new("friedrichs", tol, Some(m), results);
    Ok(if m.dim() == 1 { r } else { r.note(format!("dictionary coordinates need a scalar model, d = {}", m.dim())) })
}

/// Compares the closed-form Gram with the contour and x-space routes.
pub fn verify(m: &Model, tol: &Tolerances) -> Result<Report, CliError> {
    let (b, bs, g) = bases(m, tol)?;
    let scalar = m.dim() == 1;
    let cutoff = CutoffProfile::default();
    let ea: Vec<_> = b.elements().cloned().collect();
    let es: Vec<_> = bs.elements().cloned().collect();
    let (fa, fs) = if scalar { (basis_functions(&ea, cutoff), basis_functions(&es, cutoff)) } else { (vec![], vec![]) };
    // Poles of u and of v(conj sigma), which every circle must avoid.
    let mut poles: Vec<C64> = Vec::new();
    for e in &ea {
        poles.extend(e.parts.iter().map(|p| p.center));
    }
    for e in &es {
        poles.extend(e.parts.iter().map(|p| p.center.conj()));
    }
    let mut entries = Vec::new();
    let mut worst_contour: f64 = 0.0;
    let mut worst_x: f64 = 0.0;
    for (i, u) in ea.iter().enumerate() {
        for (j, v) in es.iter().enumerate() {
            let closed = g.g[(i, j)];
            let mut routes = vec![claim(closed, CLOSED_FORM)];
            let mut deltas = serde_json::Map::new();
            // The plain contour integral with P_0 alone covers unshifted elements only.
            if u.parts.len() == 1 && v.parts.len() == 1 {
                let others: Vec<C64> = poles.iter().copied().filter(|&p| (p - u.sigma0).norm() > tol.cluster).collect();
                let circle = Circle::default_for(u.sigma0, &others);
                let (ct, _) = contour_pairing_adaptive(u, v, m.p0(), circle, &others, tol)?;
                worst_contour = worst_contour.max((ct - closed).norm());
                deltas.insert(format!("{CLOSED_FORM} vs {CONTOUR}"), json!((ct - closed).norm()));
                routes.push(claim(ct, CONTOUR));
            }
            if scalar {
                let x = green_pairing_with(m, &fa[i], &fs[j], tol)?;
                worst_x = worst_x.max((x - closed).norm());
                deltas.insert(format!("{CLOSED_FORM} vs {X_SPACE}"), json!((x - closed).norm()));
                routes.push(claim(x, X_SPACE));
            }
            entries.push(json!({
                "row": u.label().to_string(),
                "col": v.label().to_string(),
                "routes": routes,
                "deltas": deltas,
            }));
        }
    }
    let results = json!({
        "entries": entries,
        "max_delta_contour": worst_contour,
        "max_delta_x_space": worst_x,
    });
    let mut r = Report::new("verify", tol, Some(m), results);
    if !scalar {
        r = r.note(format!("x-space route skipped: d = {}", m.dim()));
    }
    Ok(r)
}

/// Domain stability between two models.
pub fn stability(m0: &Model, m1: &Model, tol: &Tolerances) -> Result<Report, CliError> {
    let rep = domain_stability(m0, m1, tol)?;
    let results = json!({
        "models": [m0.label(), m1.label()],
        "report": serde_json::to_value(&rep).expect("report serializes"),
        "second_model": m1.to_json(),
        "route": CLOSED_FORM,
    });
    Ok(Report::new("stability", tol, Some(m0), results))
}

/// The acceptance suite and its outcomes.
pub fn reproduce_paper(opts: &SuiteOptions) -> (Report, Vec<acceptance::Outcome>) {
    let outcomes = acceptance::run_all(opts);
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let results = json!({
        "seed": opts.seed,
        "criteria": serde_json::to_value(&outcomes).expect("outcomes serialize"),
        "passed": outcomes.len() - failed,
        "failed": failed,
    });
    (Report::new("reproduce-paper", &opts.tol, None, results), outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_parse() {
        let v = parse_vector("1, -2+0.5i,i").unwrap();
        assert_eq!(v, vec![C64::new(1.0, 0.0), C64::new(-2.0, 0.5), C64::new(0.0, 1.0)]);
        assert!(parse_vector("1,x").is_err());
    }

    #[test]
    fn rref_is_canonical() {
        let c = |re| C64::new(re, 0.0);
        let rows = rref(vec![vec![c(2.0), c(4.0)], vec![c(1.0), c(2.0)]], 1e-12);
        assert_eq!(rows, vec![vec![c(1.0), c(2.0)]]);
    }

    #[test]
    fn domain_files() {
        let (c, v) = parse_domain_file(r#"{"coords": "raw", "vectors": [[1, [0, 2]]]}"#).unwrap();
        assert_eq!(c, Some(Coords::Raw));
        assert_eq!(v[0][1], C64::new(0.0, 2.0));
        let e = parse_domain_file(r#"{"vectors": [["a"]]}"#).unwrap_err();
        assert!(e.to_string().contains("vectors[0][0]"));
    }
}
