//! One function per subcommand. Each returns the run report; the caller adds
//! the wall time, writes it and picks the exit code.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use toricak_core::curvature::CurvatureSample;
use toricak_core::deform::{build_deformation, verify_family, DeformationSpec, PairSpec};
use toricak_core::field::{check_boundary_conditions, field_from_potential, guillemin_field, ConstantField};
use toricak_core::futaki::{
    adaptive_scheme, futaki_vector, normalization_residual_with_scheme, scalar_moment, solve_soliton_vf_with,
    AffineFunction, FutakiReport, SolverOptions,
};
use toricak_core::solve::{bump_start, solve_1d, solve_newton, SolveConfig, SolveDetail, SolveResult};
use toricak_core::{DelzantPolytope, Error as CoreError, MetricField, SharedField, SolitonVector};

use crate::cli::{Background, CheckArgs, DeformArgs, ReportArgs, Requirement, SolveArgs, VectorArgs};
use crate::config::Settings;
use crate::format::{
    futaki_json, read_field_csv, resolve_polytope, write_curvature_csv, write_field_csv, DeformationSpecDoc,
};
use crate::report::{Check, PolytopeInfo, RunReport, SCHEMA};
use crate::{catalog, CliError};

pub const CHECK_TOL: f64 = 1e-8;
/// Default for fields read back from a CSV dump, whose derivatives come from splines.
pub const CHECK_TOL_CSV: f64 = 1e-5;
pub const SOLITON_VF_TOL: f64 = 1e-10;
pub const DEFORM_TOL: f64 = 1e-8;
pub const DEFORM_AMPLITUDE: f64 = 0.01;

fn polytope(s: &Settings) -> Result<DelzantPolytope, CliError> {
    resolve_polytope(s.polytope_spec()?)
}

fn grid(s: &Settings, p: &DelzantPolytope) -> Result<Vec<Vec<f64>>, CliError> {
    Ok(p.interior_grid(s.grid, s.margin)?)
}

fn out_dir(s: &Settings, what: &str) -> Result<PathBuf, CliError> {
    s.out
        .clone()
        .ok_or_else(|| CliError::Input(format!("{what} needs --out")))
}

/// `n` entries give the linear part with a zero constant; `n + 1` give both.
pub fn parse_vector(n: usize, a: &[f64]) -> Result<SolitonVector, CliError> {
    match a.len() {
        m if m == n => Ok(SolitonVector::from_parts(a, 0.0)?),
        m if m == n + 1 => Ok(SolitonVector::new(a.to_vec())?),
        m => Err(CliError::Input(format!("--a needs {n} or {} values, got {m}", n + 1))),
    }
}

/// The requested vector field, plus the solver report when it was solved for.
fn vector_field(
    p: &DelzantPolytope,
    v: &VectorArgs,
) -> Result<(SolitonVector, Option<FutakiReport>), CliError> {
    if v.auto_vf {
        let r = solve_soliton_vf_with(p, &SolverOptions::default())?;
        return Ok((r.a.clone(), Some(r)));
    }
    match &v.a {
        Some(a) => Ok((parse_vector(p.dim(), a)?, None)),
        None => Ok((SolitonVector::zero(p.dim()), None)),
    }
}

fn record_vector(report: &mut RunReport, a: &SolitonVector, solved: &Option<FutakiReport>) {
    report.inputs.a = Some(a.coeffs().to_vec());
    if let Some(r) = solved {
        report.output("soliton_vf", futaki_json(r));
    }
}

pub fn catalog_cmd() -> Result<RunReport, CliError> {
    let mut report = RunReport::new("catalog");
    let entries: Vec<_> = catalog::all()
        .iter()
        .map(|p| {
            let info = PolytopeInfo::from(p);
            json!({
                "name": info.name,
                "hash": info.hash,
                "dim": info.dim,
                "facets": info.facets,
                "vertices": p.vertices().len(),
                "reflexive": p.is_reflexive(),
                "delzant": p.is_delzant().is_delzant,
            })
        })
        .collect();
    report.output("polytopes", entries);
    Ok(report)
}

fn field_source(p: &DelzantPolytope, spec: &str) -> Result<(SharedField, bool), CliError> {
    match spec {
        "guillemin" => Ok((Arc::new(field_from_potential(guillemin_field(p))), false)),
        "identity" => Ok((Arc::new(ConstantField::identity(p.dim())), false)),
        _ => {
            let path = spec
                .strip_prefix("csv:")
                .ok_or_else(|| CliError::Input(format!("unknown field source `{spec}`")))?;
            let file = File::open(path).map_err(|e| CliError::Input(format!("cannot open {path}: {e}")))?;
            let g = read_field_csv(file)?;
            if g.dim() != p.dim() {
                return Err(CliError::Input(format!(
                    "field CSV has dimension {}, polytope has {}",
                    g.dim(),
                    p.dim()
                )));
            }
            Ok((Arc::new(g), true))
        }
    }
}

pub fn check(s: &Settings, args: &CheckArgs) -> Result<RunReport, CliError> {
    let p = polytope(s)?;
    let (field, from_csv) = field_source(&p, &args.field)?;
    let (a, solved) = vector_field(&p, &args.vector)?;
    let tol = s.tol_or(if from_csv { CHECK_TOL_CSV } else { CHECK_TOL });
    let mut report = RunReport::new("check").with_polytope(&p);
    record_vector(&mut report, &a, &solved);
    report.config("field", &args.field);
    report.config("tol", tol);
    report.config("grid", s.grid);
    report.config("margin", s.margin);
    report.config("require", args.require.iter().map(|r| format!("{r:?}").to_lowercase()).collect::<Vec<_>>());

    let points = grid(s, &p)?;
    let mut samples = Vec::with_capacity(points.len());
    let mut unevaluated = 0usize;
    for z in &points {
        match CurvatureSample::evaluate(field.as_ref(), &a, z) {
            Ok(c) => samples.push(c),
            Err(CoreError::OutsideSampleHull(_)) | Err(CoreError::OutsideInterior(_)) => unevaluated += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if samples.is_empty() {
        return Err(CliError::Input("the field could not be evaluated at any grid point".into()));
    }
    let soliton_sup = samples.iter().map(CurvatureSample::soliton_residual_norm).fold(0.0, f64::max);
    let identity_gap = samples
        .iter()
        .map(|c| (c.s_c_xi - c.s_c_xi_div).abs() / c.s_c_xi.abs().max(1.0))
        .fold(0.0, f64::max);
    let kahler_sup = samples.iter().map(|c| c.kahler_defect_norm).fold(0.0, f64::max);
    let s_c_min = samples.iter().map(|c| c.s_c).fold(f64::INFINITY, f64::min);
    let s_c_max = samples.iter().map(|c| c.s_c).fold(f64::NEG_INFINITY, f64::max);
    let xi_mean = samples.iter().map(|c| c.s_c_xi).sum::<f64>() / samples.len() as f64;
    let xi_dev = samples.iter().map(|c| (c.s_c_xi - xi_mean).abs()).fold(0.0, f64::max);
    let boundary = check_boundary_conditions(field.as_ref(), &p, tol);

    report.output("points", samples.len());
    report.output("unevaluated_points", unevaluated);
    report.output("soliton_residual_sup", soliton_sup);
    report.output("identity_gap", identity_gap);
    report.output("kahler_defect_sup", kahler_sup);
    report.output("s_c", json!({"min": s_c_min, "max": s_c_max}));
    report.output("s_c_xi", json!({"mean": xi_mean, "deviation": xi_dev}));
    report.output(
        "boundary",
        json!({
            "max_h_normal": boundary.max_h_normal(),
            "max_dh_defect": boundary.max_dh_defect(),
            "failed_samples": boundary.facets.iter().map(|f| f.failed_samples).sum::<usize>(),
        }),
    );

    for r in &args.require {
        match r {
            Requirement::Soliton => report.check("soliton", Check::below(soliton_sup, tol)),
            Requirement::Identity => report.check("identity", Check::below(identity_gap, tol)),
            Requirement::Kahler => report.check("kahler", Check::below(kahler_sup, tol)),
            Requirement::Boundary => report.check(
                "boundary",
                Check {
                    value: boundary.max_h_normal().max(boundary.max_dh_defect()),
                    tolerance: tol,
                    rule: "value < tolerance on every facet sample".into(),
                    pass: boundary.pass,
                },
            ),
        }
    }

    if args.dump {
        let dir = out_dir(s, "--dump")?;
        std::fs::create_dir_all(&dir)?;
        let curv = dir.join("curvature.csv");
        write_curvature_csv(&samples, p.dim(), BufWriter::new(File::create(&curv)?))?;
        let pts: Vec<Vec<f64>> = samples.iter().map(|c| c.z.clone()).collect();
        let fpath = dir.join("field.csv");
        write_field_csv(field.as_ref(), &pts, BufWriter::new(File::create(&fpath)?))?;
        report.files.push(display(&curv));
        report.files.push(display(&fpath));
    }
    Ok(report)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn futaki_outputs(report: &mut RunReport, q_order: usize, a: &SolitonVector, f: &[f64], norm: f64) {
    let n = a.dim();
    let mut fmap = serde_json::Map::new();
    fmap.insert("1".into(), json!(f[n]));
    for (i, v) in f[..n].iter().enumerate() {
        fmap.insert(format!("z{}", i + 1), json!(v));
    }
    report.output("F", fmap);
    report.output("normalization_residual", norm);
    report.output("quadrature_order", q_order);
}

pub fn futaki(s: &Settings, args: &VectorArgs) -> Result<RunReport, CliError> {
    let p = polytope(s)?;
    let (a, solved) = vector_field(&p, args)?;
    let mut report = RunReport::new("futaki").with_polytope(&p);
    record_vector(&mut report, &a, &solved);
    let q = adaptive_scheme(&p, &a)?;
    let f = futaki_vector(&q, &a);
    let norm = normalization_residual_with_scheme(&q, &a);
    futaki_outputs(&mut report, q.order, &a, &f, norm);
    if let Some(dir) = &s.out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("futaki.json");
        let doc = json!({
            "a": a.coeffs(),
            "F": report.outputs["F"],
            "normalization_residual": norm,
            "iterations": 0,
        });
        std::fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
        report.files.push(display(&path));
    }
    Ok(report)
}

pub fn soliton_vf(s: &Settings) -> Result<RunReport, CliError> {
    let p = polytope(s)?;
    let tol = s.tol_or(SOLITON_VF_TOL);
    let mut report = RunReport::new("soliton-vf").with_polytope(&p);
    report.config("tol", tol);
    let opts = SolverOptions {
        tolerance: tol,
        ..Default::default()
    };
    let r = match solve_soliton_vf_with(&p, &opts) {
        Ok(r) => r,
        Err(CoreError::NoConvergence(r)) => *r,
        Err(e) => return Err(e.into()),
    };
    report.inputs.a = None;
    report.output("a", r.a.coeffs());
    report.output("futaki", futaki_json(&r));
    report.check(
        "futaki_residual",
        Check {
            value: r.max_residual(),
            tolerance: tol,
            rule: "solver converged with value < tolerance".into(),
            pass: r.converged,
        },
    );
    if let Some(dir) = &s.out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("futaki.json");
        std::fs::write(&path, serde_json::to_string_pretty(&futaki_json(&r))? + "\n")?;
        report.files.push(display(&path));
    }
    Ok(report)
}

fn pair_interval(v: &Option<Vec<f64>>, default: (f64, f64), name: &str) -> Result<(f64, f64), CliError> {
    match v {
        None => Ok(default),
        Some(x) if x.len() == 2 && x[0] < x[1] => Ok((x[0], x[1])),
        Some(x) => Err(CliError::Input(format!("--{name} needs lo,hi with lo < hi, got {x:?}"))),
    }
}

/// Spec from the command line. Default supports sit around the centroid,
/// shifted off it so the box is not symmetric.
fn deformation_spec(
    s: &Settings,
    args: &DeformArgs,
    p: &DelzantPolytope,
    a: &SolitonVector,
) -> Result<DeformationSpec, CliError> {
    let n = p.dim();
    let spec_path = args.spec.clone().or_else(|| s.file.deform.spec.clone());
    let mut spec = if let Some(path) = spec_path {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Input(format!("cannot read spec {}: {e}", path.display())))?;
        let doc: DeformationSpecDoc = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("malformed deformation spec: {e}")))?;
        let mut spec = doc.to_spec()?;
        if args.vector.a.is_some() || args.vector.auto_vf {
            spec.a = a.clone();
        }
        spec
    } else {
        let (i, l) = match &args.pair {
            None => (0, 1),
            Some(v) if v.len() == 2 && 1 <= v[0] && v[0] < v[1] && v[1] <= n => (v[0] - 1, v[1] - 1),
            Some(v) => return Err(CliError::Input(format!("--pair needs i,l with 1 <= i < l <= {n}, got {v:?}"))),
        };
        if n < 2 {
            return Err(CoreError::NoDeformationInDimensionOne.into());
        }
        let c = p.centroid();
        let u = pair_interval(&args.u, (c[i] - 0.6, c[i] + 0.2), "u")?;
        let v = pair_interval(&args.v, (c[l] - 0.5, c[l] + 0.3), "v")?;
        let rest = pair_interval(&args.rest, (-0.3, 0.3), "rest")?;
        let amplitude = args.amplitude.or(s.file.deform.amplitude).unwrap_or(DEFORM_AMPLITUDE);
        let mut pair = PairSpec::new(n, i, l, u, v, rest).with_amplitude(amplitude);
        for (k, (lo, hi)) in pair.w.iter_mut() {
            if args.rest.is_none() {
                *lo = c[*k] - 0.3;
                *hi = c[*k] + 0.3;
            }
        }
        DeformationSpec::new(vec![pair], a.clone())
    };
    if let Some(t) = args.soliton_tol.or(s.file.deform.soliton_tol) {
        spec.soliton_tolerance = t;
    }
    Ok(spec)
}

pub fn deform(s: &Settings, args: &DeformArgs) -> Result<RunReport, CliError> {
    let p = polytope(s)?;
    if p.dim() < 2 {
        return Err(CoreError::NoDeformationInDimensionOne.into());
    }
    let (a, solved) = vector_field(&p, &args.vector)?;
    let spec = deformation_spec(s, args, &p, &a)?;
    let tol = s.tol_or(DEFORM_TOL);
    let mut report = RunReport::new("deform").with_polytope(&p);
    record_vector(&mut report, &spec.a, &solved);
    report.config("tol", tol);
    report.config("grid", s.grid);
    report.config("margin", s.margin);
    report.config("background", format!("{:?}", args.background).to_lowercase());
    report.config("spec", DeformationSpecDoc::from(&spec));

    let background: SharedField = match args.background {
        Background::Guillemin => Arc::new(field_from_potential(guillemin_field(&p))),
        Background::Solve => {
            let r = solve_newton(&p, &spec.a, &SolveConfig::default())?;
            report.output("background_residual", r.final_residual());
            r.field
        }
    };
    let fam = build_deformation(background, &p, &spec)?;
    let ts: Vec<f64> = if !args.t.is_empty() {
        args.t.clone()
    } else if let Some(t) = &s.file.deform.t {
        t.clone()
    } else {
        [0.5 * fam.t_plus, 0.5 * fam.t_minus]
            .into_iter()
            .filter(|t| t.is_finite())
            .collect()
    };
    if let Some(t) = ts.iter().find(|&&t| !fam.contains(t)) {
        return Err(CliError::Input(format!(
            "t = {t} is outside the admissible interval ({}, {})",
            fam.t_minus, fam.t_plus
        )));
    }
    let points = grid(s, &p)?;
    let fr = verify_family(&fam, &p, &points, &ts)?;

    report.output("t_minus", fam.t_minus);
    report.output("t_plus", fam.t_plus);
    report.output("center", fam.center());
    report.output("divergence_residual", fr.divergence_residual);
    report.output("background_defect_at_center", fr.background_defect_at_center);
    report.output("background_defect_sup", fr.background_defect_sup);
    let samples: Vec<_> = fr
        .samples
        .iter()
        .map(|x| {
            json!({
                "t": x.t,
                "scalar_drift": x.scalar_drift,
                "soliton_drift": x.soliton_drift,
                "positivity_margin": x.positivity_margin,
                "kahler_defect_at_center": x.kahler_defect_at_center,
                "kahler_defect_sup": x.kahler_defect_sup,
                "boundary_matches": x.boundary_matches,
            })
        })
        .collect();
    report.output("samples", samples);

    // The defect can vanish at the box centre by symmetry, so use the sup over the box.
    let defect_floor = (100.0 * fr.background_defect_sup).max(1e-6);
    let min_defect = fr
        .samples
        .iter()
        .map(|x| x.kahler_defect_sup)
        .fold(f64::INFINITY, f64::min);
    let soliton_drift = fr.samples.iter().map(|x| x.soliton_drift).fold(0.0, f64::max);
    report.check("divergence", Check::below(fr.divergence_residual, tol));
    report.check("scalar_drift", Check::below(fr.max_scalar_drift(), tol));
    report.check("soliton_drift", Check::below(soliton_drift, tol));
    report.check("positivity", Check::above(fr.min_positivity(), 0.0));
    report.check("kahler_defect", Check::above(min_defect, defect_floor));
    report.check("boundary", Check::flag(fr.samples.iter().all(|x| x.boundary_matches)));

    if args.dump {
        let dir = out_dir(s, "--dump")?;
        std::fs::create_dir_all(&dir)?;
        for (k, &t) in ts.iter().enumerate() {
            let path = dir.join(format!("field_t{k}.csv"));
            write_field_csv(&fam.field_at(t)?, &points, BufWriter::new(File::create(&path)?))?;
            report.files.push(display(&path));
        }
        let path = dir.join("deformation_spec.json");
        std::fs::write(&path, serde_json::to_string_pretty(&DeformationSpecDoc::from(&spec))? + "\n")?;
        report.files.push(display(&path));
    }
    Ok(report)
}

fn solve_config(s: &Settings, args: &SolveArgs, p: &DelzantPolytope) -> Result<SolveConfig, CliError> {
    let f = &s.file.solve;
    let mut cfg = SolveConfig::default();
    if let Some(r) = args.resolution.or(f.resolution) {
        cfg.resolution = r;
    }
    if let Some(d) = args.degree.or(f.degree) {
        cfg.degree = d;
    }
    if let Some(m) = args.max_iter.or(f.max_iter) {
        cfg.max_iterations = m;
    }
    if let Some(d) = f.damping {
        cfg.damping = d;
    }
    if let Some(t) = s.tol {
        cfg.tolerance = t;
    }
    cfg.validate()?;
    let bump = args.bump.or(f.bump);
    let perturb = args.perturb.or(f.perturb);
    if bump.is_some() || perturb.is_some() {
        let mut start = bump_start(p, &cfg, bump.unwrap_or(0.0))?;
        if let Some(eps) = perturb {
            if eps.is_nan() || eps < 0.0 {
                return Err(CliError::Input(format!("--perturb must be non-negative, got {eps}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            for c in start.iter_mut() {
                *c += eps * rng.gen_range(-1.0..=1.0);
            }
        }
        cfg.initial = Some(start);
    }
    Ok(cfg)
}

/// `max_ζ |∫ s^c_ξ ζ e^{-2f} dv - F(ζ)|` over the affine basis.
fn futaki_gap(field: &SharedField, p: &DelzantPolytope, a: &SolitonVector) -> Result<f64, CliError> {
    let q = adaptive_scheme(p, a)?;
    let f = futaki_vector(&q, a);
    let n = p.dim();
    let mut gap: f64 = 0.0;
    for (k, zeta) in (0..n).map(|i| AffineFunction::coordinate(n, i)).chain([AffineFunction::one(n)]).enumerate() {
        let m = scalar_moment(field.as_ref(), &q, a, |z| zeta.eval(z))?;
        gap = gap.max((m - f[k]).abs());
    }
    Ok(gap)
}

pub fn solve(s: &Settings, args: &SolveArgs) -> Result<RunReport, CliError> {
    let p = polytope(s)?;
    let (a, solved) = vector_field(&p, &args.vector)?;
    let mut report = RunReport::new("solve").with_polytope(&p);
    record_vector(&mut report, &a, &solved);
    let result: SolveResult = if p.dim() == 1 {
        let tol = s.tol_or(SolveConfig::default().tolerance);
        report.config("tol", tol);
        solve_1d(&p, &a, tol)?
    } else {
        let cfg = solve_config(s, args, &p)?;
        report.config("tol", cfg.tolerance);
        report.config("resolution", cfg.resolution);
        report.config("degree", cfg.degree);
        report.config("max_iter", cfg.max_iterations);
        report.config("damping", cfg.damping);
        report.config("seed", s.seed);
        report.config("bump", args.bump.or(s.file.solve.bump));
        report.config("perturb", args.perturb.or(s.file.solve.perturb));
        solve_newton(&p, &a, &cfg)?
    };
    let tol = report.inputs.config["tol"].as_f64().unwrap_or(0.0);

    report.output("history", &result.history);
    report.output("converged", result.converged);
    report.output("reduction", result.reduction());
    report.output(
        "boundary",
        json!({
            "max_h_normal": result.boundary.max_h_normal(),
            "max_dh_defect": result.boundary.max_dh_defect(),
            "pass": result.boundary.pass,
        }),
    );
    match &result.detail {
        SolveDetail::OneDim(d) => report.output(
            "interval",
            json!({
                "defect_at_right": d.defect_at_right,
                "left_slope_defect": d.left_slope_defect,
                "right_slope_defect": d.right_slope_defect,
            }),
        ),
        SolveDetail::Newton(d) => {
            report.output(
                "newton",
                json!({
                    "collocation_points": d.collocation_points,
                    "unknowns": d.unknowns,
                    "steps": d.steps,
                    "affine_gauge": d.potential.affine(),
                }),
            );
            report.output("futaki_gap", futaki_gap(&result.field, &p, &a)?);
        }
    }
    report.check(
        "residual",
        Check {
            value: result.final_residual(),
            tolerance: tol,
            rule: "solver converged with value < tolerance".into(),
            pass: result.converged,
        },
    );
    report.check(
        "boundary",
        Check {
            value: result.boundary.max_h_normal().max(result.boundary.max_dh_defect()),
            tolerance: result.boundary.tolerance,
            rule: "value < tolerance on every facet sample".into(),
            pass: result.boundary.pass,
        },
    );

    if args.dump {
        let dir = out_dir(s, "--dump")?;
        std::fs::create_dir_all(&dir)?;
        let path = dir.join("field.csv");
        let points = grid(s, &p)?;
        write_field_csv(result.field.as_ref(), &points, BufWriter::new(File::create(&path)?))?;
        report.files.push(display(&path));
    }
    Ok(report)
}

fn collect_json(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for path in inputs {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else if path.is_file() {
            files.push(path.clone());
        } else {
            return Err(CliError::Input(format!("no such file or directory: {}", path.display())));
        }
    }
    Ok(files)
}

/// Summary of earlier runs; fails when any of them failed.
pub fn report(args: &ReportArgs) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("report");
    let mut runs = Vec::new();
    let mut skipped = Vec::new();
    for path in collect_json(&args.inputs)? {
        let text = std::fs::read_to_string(&path)?;
        let run: Option<RunReport> = serde_json::from_str::<serde_json::Value>(&text)
            .ok()
            .filter(|v| v.get("schema").and_then(|s| s.as_str()) == Some(SCHEMA))
            .and_then(|v| serde_json::from_value(v).ok());
        // Do not summarize earlier summaries.
        match run.filter(|r| r.command != "report") {
            Some(r) => {
                let failed: Vec<&String> = r.checks.iter().filter(|(_, c)| !c.pass).map(|(k, _)| k).collect();
                runs.push(json!({
                    "file": display(&path),
                    "command": r.command,
                    "polytope": r.inputs.polytope.as_ref().and_then(|p| p.name.clone()),
                    "pass": r.pass,
                    "failed_checks": failed,
                }));
                report.pass &= r.pass;
            }
            None => skipped.push(display(&path)),
        }
    }
    if runs.is_empty() {
        return Err(CliError::Input("no run reports found".into()));
    }
    let passed = runs.iter().filter(|r| r["pass"] == json!(true)).count();
    report.output("total", runs.len());
    report.output("passed", passed);
    report.output("failed", runs.len() - passed);
    report.output("runs", runs);
    report.output("skipped", skipped);
    Ok(report)
}
