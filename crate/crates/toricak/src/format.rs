//! File formats: polytope JSON, field-dump CSV, curvature records, deformation
//! specs and Futaki reports.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use toricak_core::curvature::SolitonVector;
use toricak_core::deform::{DeformationSpec, PairSpec};
use toricak_core::field::GridField;
use toricak_core::futaki::FutakiReport;
use toricak_core::{CurvatureSample, DelzantPolytope, Facet, MetricField};

use crate::{catalog, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetDoc {
    pub normal: Vec<i64>,
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeDoc {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub facets: Vec<FacetDoc>,
}

impl From<&DelzantPolytope> for PolytopeDoc {
    fn from(p: &DelzantPolytope) -> Self {
        Self {
            dim: p.dim(),
            name: p.name().map(str::to_owned),
            facets: p
                .facets()
                .iter()
                .map(|f| FacetDoc {
                    normal: f.normal.clone(),
                    support: f.support,
                })
                .collect(),
        }
    }
}

pub fn parse_polytope(text: &str) -> Result<DelzantPolytope, CliError> {
    let doc: PolytopeDoc =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed polytope document: {e}")))?;
    let facets = doc
        .facets
        .into_iter()
        .map(|f| Facet::new(f.normal, f.support))
        .collect();
    Ok(DelzantPolytope::new(doc.dim, facets, doc.name)?)
}

pub fn polytope_json(p: &DelzantPolytope) -> String {
    serde_json::to_string(&PolytopeDoc::from(p)).expect("polytope documents serialize")
}

/// First 16 hex digits of the SHA-256 of the canonical polytope document.
pub fn polytope_hash(p: &DelzantPolytope) -> String {
    let digest = Sha256::digest(polytope_json(p).as_bytes());
    hex::encode(&digest[..8])
}

/// A catalog name, or a path to a polytope JSON file.
pub fn resolve_polytope(spec: &str) -> Result<DelzantPolytope, CliError> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return parse_polytope(&text);
    }
    catalog::load(spec)
}

/// `z1..zn,H11,H12,...,Hnn` over the upper triangle, row-major.
pub fn field_csv_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=n).map(|i| format!("z{i}")).collect();
    for i in 1..=n {
        for j in i..=n {
            h.push(format!("H{i}{j}"));
        }
    }
    h
}

pub fn write_field_csv<F: MetricField + ?Sized, W: Write>(
    field: &F,
    points: &[Vec<f64>],
    out: W,
) -> Result<(), CliError> {
    let n = field.dim();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(field_csv_header(n))?;
    for z in points {
        let h = field.h(z)?;
        let mut row: Vec<String> = z.iter().map(|x| x.to_string()).collect();
        for i in 0..n {
            for j in i..n {
                row.push(h[(i, j)].to_string());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field dump back as a spline-interpolated [`GridField`].
pub fn read_field_csv<R: Read>(input: R) -> Result<GridField, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let cols = header.len();
    let n = (1..=8)
        .find(|&n| n + n * (n + 1) / 2 == cols)
        .ok_or_else(|| CliError::Input(format!("field CSV has {cols} columns, not z1..zn plus an upper triangle")))?;
    let want = field_csv_header(n);
    if header.iter().ne(want.iter().map(String::as_str)) {
        return Err(CliError::Input(format!("field CSV header must be {}", want.join(","))));
    }
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Input(format!("bad number in field CSV: {e}")))?;
        samples.push((vals[..n].to_vec(), vals[n..].to_vec()));
    }
    Ok(GridField::from_samples(n, &samples)?)
}

pub fn curvature_record(s: &CurvatureSample) -> Value {
    let n = s.z.len();
    let rho: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|l| s.rho[(k, l)]).collect()).collect();
    json!({
        "z": s.z,
        "s_c": s.s_c,
        "rho": rho,
        "laplacian_f": s.laplacian_f,
        "grad_norm_f": s.grad_norm_f,
        "s_c_xi": s.s_c_xi,
        "s_c_xi_div": s.s_c_xi_div,
        "soliton_residual": s.soliton_residual,
        "kahler_defect_norm": s.kahler_defect_norm,
    })
}

pub fn curvature_csv_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=n).map(|i| format!("z{i}")).collect();
    for k in ["s_c", "laplacian_f", "grad_norm_f", "s_c_xi", "s_c_xi_div", "kahler_defect_norm"] {
        h.push(k.to_owned());
    }
    h.extend((1..=n).map(|i| format!("S{i}")));
    for k in 1..=n {
        for l in 1..=n {
            h.push(format!("rho{k}{l}"));
        }
    }
    h
}

pub fn write_curvature_csv<W: Write>(samples: &[CurvatureSample], n: usize, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(curvature_csv_header(n))?;
    for s in samples {
        let mut row: Vec<f64> = s.z.clone();
        row.extend([s.s_c, s.laplacian_f, s.grad_norm_f, s.s_c_xi, s.s_c_xi_div, s.kahler_defect_norm]);
        row.extend(&s.soliton_residual);
        row.extend(s.rho.transpose().iter());
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffDoc {
    pub axis: usize,
    pub support: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDoc {
    pub pair: [usize; 2],
    pub u: [f64; 2],
    pub v: [f64; 2],
    #[serde(default)]
    pub w: Vec<CutoffDoc>,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationSpecDoc {
    pub pairs: Vec<PairDoc>,
    pub a: Vec<f64>,
    pub class: usize,
    pub box_margin: f64,
    pub soliton_tolerance: f64,
    pub grid_resolution: usize,
}

impl From<&DeformationSpec> for DeformationSpecDoc {
    fn from(s: &DeformationSpec) -> Self {
        Self {
            pairs: s
                .pairs
                .iter()
                .map(|p| PairDoc {
                    pair: [p.i, p.l],
                    u: [p.u.0, p.u.1],
                    v: [p.v.0, p.v.1],
                    w: p
                        .w
                        .iter()
                        .map(|&(axis, (lo, hi))| CutoffDoc {
                            axis,
                            support: [lo, hi],
                        })
                        .collect(),
                    amplitude: p.amplitude,
                })
                .collect(),
            a: s.a.coeffs().to_vec(),
            class: s.class,
            box_margin: s.box_margin,
            soliton_tolerance: s.soliton_tolerance,
            grid_resolution: s.grid_resolution,
        }
    }
}

impl DeformationSpecDoc {
    pub fn to_spec(&self) -> Result<DeformationSpec, CliError> {
        let pairs = self
            .pairs
            .iter()
            .map(|p| PairSpec {
                i: p.pair[0],
                l: p.pair[1],
                u: (p.u[0], p.u[1]),
                v: (p.v[0], p.v[1]),
                w: p.w.iter().map(|c| (c.axis, (c.support[0], c.support[1]))).collect(),
                amplitude: p.amplitude,
            })
            .collect();
        let mut spec = DeformationSpec::new(pairs, SolitonVector::new(self.a.clone())?);
        spec.class = self.class;
        spec.box_margin = self.box_margin;
        spec.soliton_tolerance = self.soliton_tolerance;
        spec.grid_resolution = self.grid_resolution;
        Ok(spec)
    }
}

/// `{"a", "F", "normalization_residual", "iterations"}` plus solver details.
pub fn futaki_json(r: &FutakiReport) -> Value {
    let mut f = serde_json::Map::new();
    f.insert("1".into(), json!(r.f_one));
    for (i, v) in r.f_linear.iter().enumerate() {
        f.insert(format!("z{}", i + 1), json!(v));
    }
    let trace: Vec<Value> = r
        .iterations
        .iter()
        .map(|it| {
            json!({
                "a": it.a,
                "residual": it.residual,
                "step": it.step,
                "kind": format!("{:?}", it.kind).to_lowercase(),
                "order": it.order,
            })
        })
        .collect();
    json!({
        "a": r.a.coeffs(),
        "F": Value::Object(f),
        "normalization_residual": r.normalization_residual,
        "iterations": r.iterations.len().saturating_sub(1),
        "converged": r.converged,
        "quadrature_order": r.order,
        "trace": trace,
    })
}
