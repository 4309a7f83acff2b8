//! Reports: deterministic JSON, CSV series and the stability dossier.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::blowup::ExpansionReport;
use crate::error::{Error, Result};
use crate::invariants::{self, EvalOptions, InvariantReport};
use crate::polytope::DelzantPolytope;
use crate::profiles::WeightPair;
use crate::testconfig::{ChowEntry, Destabilizing, ToricContext, ToricTC};

/// Sign conventions used throughout, recorded in every dossier.
pub const SIGN_CONVENTION: &str = "product(β): φ = −⟨x,β⟩ so DF = F(β); twist: φ ↦ φ − ⟨x,β⟩; \
λ-pairing uses φ̃ = −φ; Ch_p = φ(p) − avg_w φ, Ch^T_p = Ch_p + Σ⟨λ,β_j⟩(⟨p,β_j⟩ − b̄_j); \
blowup: DF_ε = DF − v(p)·Ch_p·ε^(n−1)/(n−2)! + O(ε^n)";

/// JSON with keys in sorted order and every float written as `%.12e`, so that
/// identical inputs give byte-identical output.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, k: usize| out.extend(std::iter::repeat_n(' ', 2 * k));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64 number");
                let _ = write!(out, "{x:.12e}");
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // numeric rows stay on one line
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

/// `eps,exact,predicted` rows of an expansion sweep.
pub fn expansion_csv(report: &ExpansionReport) -> Result<String> {
    if report.eps.is_empty() {
        return Err(Error::MissingSeries(format!("{} expansion has no ε-grid", report.quantity)));
    }
    let mut rows = vec![vec!["eps".to_string(), "exact".into(), "predicted".into()]];
    rows.extend(report.series().into_iter().map(|(e, q, p)| vec![num(e), num(q), num(p)]));
    csv_string(rows)
}

/// `vertex,x1..xn,chow,chow_t` rows.
pub fn chow_csv(table: &[ChowEntry]) -> Result<String> {
    let Some(first) = table.first() else {
        return Err(Error::MissingSeries("empty Chow table".into()));
    };
    let mut header = vec!["vertex".to_string()];
    header.extend((1..=first.coords.len()).map(|i| format!("x{i}")));
    header.extend(["chow".to_string(), "chow_t".to_string()]);
    let mut rows = vec![header];
    for e in table {
        let mut row = vec![e.vertex.to_string()];
        row.extend(e.coords.iter().map(|&x| num(x)));
        row.extend([num(e.chow), num(e.chow_t)]);
        rows.push(row);
    }
    csv_string(rows)
}

/// Gram matrix with `b1..bn` header.
pub fn gram_csv(gram: &[Vec<f64>]) -> Result<String> {
    if gram.is_empty() {
        return Err(Error::MissingSeries("empty Gram matrix".into()));
    }
    let mut rows = vec![(1..=gram.len()).map(|i| format!("b{i}")).collect::<Vec<_>>()];
    rows.extend(gram.iter().map(|r| r.iter().map(|&x| num(x)).collect()));
    csv_string(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TcResult {
    pub label: String,
    pub pieces: usize,
    pub df: f64,
    pub df_t: f64,
    pub norm: f64,
    pub orthogonal_norm: f64,
    pub chow_table: Vec<ChowEntry>,
    pub destabilizing: Destabilizing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityDossier {
    pub invariants: InvariantReport,
    pub sign_convention: String,
    pub tolerance: f64,
    pub test_configurations: Vec<TcResult>,
    pub expansions: Vec<ExpansionReport>,
    /// Configurations with `df_T < −tolerance`.
    pub violations: Vec<String>,
    pub verdict: String,
}

impl StabilityDossier {
    /// Scoped verdict: only the supplied configurations are examined.
    pub fn verdict_for(results: &[TcResult], tolerance: f64) -> (Vec<String>, String) {
        let violations: Vec<String> = results.iter().filter(|r| r.df_t < -tolerance).map(|r| r.label.clone()).collect();
        let verdict = if !violations.is_empty() {
            format!(
                "not relatively weighted K-semistable w.r.t. supplied family: df_T < 0 for {} of {} configurations",
                violations.len(),
                results.len()
            )
        } else if results.is_empty() {
            "no test configurations supplied: no verdict".to_string()
        } else {
            let strict = results.iter().filter(|r| !r.destabilizing.product).all(|r| r.df_t > tolerance);
            if strict {
                "relatively weighted K-semistable w.r.t. supplied family: no violations found, df_T > 0 on every \
                 non-product configuration"
                    .to_string()
            } else {
                "relatively weighted K-semistable w.r.t. supplied family: no violations found".to_string()
            }
        };
        (violations, verdict)
    }
}

pub fn tc_result(ctx: &ToricContext<'_>, label: &str, tc: &ToricTC) -> Result<TcResult> {
    let (_, orthogonal_norm) = ctx.orthogonal_part(tc)?;
    Ok(TcResult {
        label: label.to_string(),
        pieces: tc.phi.pieces.len(),
        df: ctx.df(tc)?,
        df_t: ctx.df_t(tc)?,
        norm: ctx.l1_norm(tc)?,
        orthogonal_norm,
        chow_table: ctx.chow_table(tc)?,
        destabilizing: ctx.destabilizing_vertex(tc)?,
    })
}

pub fn build_dossier(
    polytope: &DelzantPolytope,
    weights: &WeightPair,
    tcs: &[(String, ToricTC)],
    expansions: Vec<ExpansionReport>,
    opts: &EvalOptions,
    tolerance: f64,
) -> Result<StabilityDossier> {
    let invariants = invariants::invariant_report(polytope, weights, opts)?;
    let ctx = ToricContext::new(polytope, weights, opts)?;
    let results = tcs.iter().map(|(label, tc)| tc_result(&ctx, label, tc)).collect::<Result<Vec<_>>>()?;
    let (violations, verdict) = StabilityDossier::verdict_for(&results, tolerance);
    Ok(StabilityDossier {
        invariants,
        sign_convention: SIGN_CONVENTION.to_string(),
        tolerance,
        test_configurations: results,
        expansions,
        violations,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::catalog;
    use crate::rational::int;
    use crate::testconfig::{AffinePiece, PLConvex};

    #[test]
    fn json_is_deterministic_and_round_trips() {
        let p = catalog::load("bl1cp2").unwrap();
        let w = WeightPair::constant(2);
        let r = invariants::invariant_report(&p, &w, &EvalOptions::default()).unwrap();
        let a = to_json(&r).unwrap();
        assert_eq!(a, to_json(&r).unwrap());
        assert!(a.contains("\"vol_w\": 1.500000000000e0"), "{a}");
        let back: InvariantReport = serde_json::from_str(&a).unwrap();
        assert!((back.s_hat - r.s_hat).abs() <= 1e-12 * r.s_hat.abs());
    }

    #[test]
    fn dossier_verdicts() {
        let p = catalog::load("cp2").unwrap();
        let w = WeightPair::constant(2);
        let phi = PLConvex::new(vec![
            AffinePiece::new(vec![int(1), int(0)], int(0)),
            AffinePiece::new(vec![int(0), int(0)], int(0)),
        ])
        .unwrap();
        let tcs = vec![
            ("max(x,0)".to_string(), ToricTC::new(phi)),
            ("product".to_string(), ToricTC::associated_product(&[1.0, 2.0])),
        ];
        let d = build_dossier(&p, &w, &tcs, Vec::new(), &EvalOptions::default(), 1e-10).unwrap();
        assert!(d.violations.is_empty());
        assert!(d.verdict.contains("w.r.t. supplied family"));
        assert!(d.test_configurations[1].destabilizing.product);
        let mut bad = d.test_configurations.clone();
        bad[0].df_t = -1.0;
        let (v, verdict) = StabilityDossier::verdict_for(&bad, 1e-10);
        assert_eq!(v, vec!["max(x,0)".to_string()]);
        assert!(verdict.starts_with("not"));
        let text = to_json(&d).unwrap();
        let back: StabilityDossier = serde_json::from_str(&text).unwrap();
        assert_eq!(back.verdict, d.verdict);
        let csv = chow_csv(&d.test_configurations[0].chow_table).unwrap();
        assert!(csv.starts_with("vertex,x1,x2,chow,chow_t\n"));
        assert_eq!(csv.lines().count(), 4);
        assert!(gram_csv(&d.invariants.gram).unwrap().starts_with("b1,b2\n"));
        assert!(chow_csv(&[]).is_err());
    }
}
