//! Subcommand implementations. Each returns the process exit code.

use std::path::Path;

use fractrunc::constants::{self, ConstantsError, CsMuForm, ProblemParams, RootResult};
use fractrunc::operators::{self, basis_vector, RadialVariant};
use fractrunc::profiles::{self, SingularOp};
use fractrunc::quad::QuadResult;
use fractrunc::verify::{self, Region, RegionKind, Verdict, VerificationReport};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Config, Format};
use crate::output::{self, Series};
use crate::{
    CliError, ConstantsArgs, Construction, EvalArgs, RootsArgs, SweepArgs, TableArgs, Targets, Variant, VerifyArgs,
    Which,
};

const SCHEMA: u32 = 1;

fn print_json(v: &Value) {
    print!("{}", String::from_utf8_lossy(&output::json_bytes(v)));
}

fn quad_json(r: &QuadResult) -> Value {
    json!({"value": r.value, "error": r.abs_error_estimate})
}

fn cell<E: Into<CliError>>(r: Result<QuadResult, E>) -> Result<Value, CliError> {
    match r.map_err(Into::into) {
        Ok(q) => Ok(quad_json(&q)),
        Err(CliError::Usage(m)) => Ok(json!({"value": null, "reason": m})),
        Err(e) => Err(e),
    }
}

pub fn constants(cfg: &Config, a: &ConstantsArgs) -> Result<u8, CliError> {
    constants::check_s(a.s)?;
    let p = ProblemParams::new(a.s, a.n, a.k)?;
    let tol = cfg.tolerance();
    let mut out = serde_json::Map::new();
    out.insert("c_s".into(), json!({"value": constants::normalizing_constant(p.s), "error": 0.0}));
    out.insert("beta".into(), json!({"value": constants::beta_1ms_s(p.s), "error": 0.0}));
    if let Some(g) = a.gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(CliError::Usage("gamma must be positive".into()));
        }
        out.insert("hat_c_dec".into(), cell(constants::hat_c_dec_with(g, p.s, &tol))?);
        out.insert("c_perp".into(), cell(constants::c_perp_with(g, p.s, &tol))?);
        out.insert("c_k".into(), cell(constants::c_k_fn_with(g, p.s, p.k, &tol))?);
        out.insert("c_iso".into(), cell(constants::c_iso_with(g, p.s, p.n, &tol))?);
        out.insert("c_n_plus".into(), cell(constants::c_n_plus_with(g, p.s, p.n, &tol))?);
        if p.s > 0.5 {
            out.insert("hat_c_gro".into(), cell(constants::hat_c_gro_with(g, p.s, &tol))?);
        }
    }
    if let Some(mu) = a.mu {
        let mut v = cell(constants::c_s_mu_with(mu, p.s, CsMuForm::Primary, &tol))?;
        if let Ok(alt) = constants::c_s_mu_with(mu, p.s, CsMuForm::Alternate, &tol) {
            v["alternate"] = quad_json(&alt);
        }
        out.insert("c_s_mu".into(), v);
    }
    print_json(&json!({
        "schema": SCHEMA,
        "command": "constants",
        "params": {"s": p.s, "N": p.n, "k": p.k, "gamma": a.gamma, "mu": a.mu},
        "constants": out,
    }));
    Ok(0)
}

fn root_json(r: &RootResult, cfg: &Config) -> Value {
    json!({
        "exists": true,
        "root": r.root,
        "residual": r.residual,
        "bracket": [r.bracket.0, r.bracket.1],
        "iterations": r.iterations,
        "residual_ok": r.residual.abs() <= cfg.root_tol,
    })
}

pub fn roots(cfg: &Config, a: &RootsArgs) -> Result<u8, CliError> {
    constants::check_s(a.s)?;
    let tol = cfg.tolerance();
    let (name, result) = match a.which {
        Which::GammaBar => {
            if a.k == 0 {
                return Err(CliError::Usage("k must be at least 1".into()));
            }
            ("gamma_bar", constants::find_gamma_bar_with(a.k, a.s, &tol))
        }
        Which::GammaTilde => {
            ProblemParams::new(a.s, a.n, 1)?;
            ("gamma_tilde", constants::find_gamma_tilde_with(a.n, a.s, &tol))
        }
        Which::GammaPlus => {
            ProblemParams::new(a.s, a.n, 1)?;
            ("gamma_plus", constants::find_gamma_plus_with(a.n, a.s, &tol))
        }
    };
    let mut doc =
        json!({"schema": SCHEMA, "command": "roots", "which": name, "params": {"s": a.s, "N": a.n, "k": a.k}});
    let code = match result {
        Ok(r) => {
            let ok = r.residual.abs() <= cfg.root_tol;
            merge(&mut doc, root_json(&r, cfg));
            if ok {
                0
            } else {
                1
            }
        }
        Err(ConstantsError::NoRoot { .. }) => {
            merge(&mut doc, json!({"exists": false}));
            0
        }
        Err(e) => return Err(e.into()),
    };
    print_json(&doc);
    Ok(code)
}

fn merge(doc: &mut Value, extra: Value) {
    if let (Some(d), Value::Object(e)) = (doc.as_object_mut(), extra) {
        d.extend(e);
    }
}

pub const TABLE_HEADER: [&str; 4] = ["operator", "p_star", "p_lower_star_with_growth", "p_lower_star"];

pub fn table(cfg: &Config, a: &TableArgs) -> Result<u8, CliError> {
    let t = constants::exponent_table(a.n, a.s)?;
    let bytes = match cfg.format {
        Format::Json => {
            let mut doc = json!({"schema": SCHEMA, "command": "table"});
            merge(&mut doc, serde_json::to_value(&t).expect("table serializes"));
            output::json_bytes(&doc)
        }
        Format::Csv => {
            let header: Vec<String> = TABLE_HEADER.iter().map(|h| h.to_string()).collect();
            let rows: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| {
                    vec![r.operator.clone(), r.p_star.render(), r.p_lower_star_growth.render(), r.p_lower_star.render()]
                })
                .collect();
            output::csv_bytes(&header, &rows)?
        }
    };
    match &a.out {
        Some(path) => output::write_atomic(Path::new(path), &bytes)?,
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(0)
}

pub fn eval(cfg: &Config, a: &EvalArgs) -> Result<u8, CliError> {
    constants::check_s(a.s)?;
    let n = a.x.len();
    if !(2..=operators::MAX_DIM).contains(&n) {
        return Err(CliError::Usage(format!("x must have between 2 and {} coordinates", operators::MAX_DIM)));
    }
    if a.k == 0 || a.k > n {
        return Err(CliError::Usage(format!("k must lie in 1..={n}")));
    }
    let profile = profiles::make_w_gamma(a.gamma)?;
    let tol = cfg.tolerance();
    let closed = match a.variant {
        Variant::Plus => Some(RadialVariant::Plus),
        Variant::Minus if a.k == n => Some(RadialVariant::MinusFull),
        Variant::Minus => None,
    };
    let mut doc = json!({
        "schema": SCHEMA,
        "command": "eval",
        "params": {"gamma": a.gamma, "s": a.s, "k": a.k, "x": a.x, "variant": format!("{:?}", a.variant).to_lowercase()},
    });
    if let Some(v) = closed {
        let r = operators::extremal_radial(&profile, &a.x, a.s, a.k, v, &tol)?;
        doc["closed_form"] = quad_json(&r);
    }
    if a.search || closed.is_none() {
        let which = match a.variant {
            Variant::Plus => constants::Extremal::Plus,
            Variant::Minus => constants::Extremal::Minus,
        };
        let r = operators::extremal_search(&profile, &a.x, a.s, a.k, which, &cfg.budget(), &tol)?;
        doc["search"] = json!({
            "value": r.value.value,
            "error": r.value.abs_error_estimate,
            "frame": r.frame.vectors,
            "frame_evaluations": r.frame_evaluations,
            "budget_warning": r.budget_warning,
        });
    }
    print_json(&doc);
    Ok(0)
}

fn auto_or<F: FnOnce() -> Result<f64, CliError>>(raw: &str, name: &str, auto: F) -> Result<f64, CliError> {
    if raw.eq_ignore_ascii_case("auto") {
        auto()
    } else {
        raw.parse().map_err(|_| CliError::Usage(format!("{name} must be a number or auto")))
    }
}

fn slab(cfg: &Config, n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    Region { kind: RegionKind::Slab { lo, hi }, dim: n, n_radii: cfg.grid_radii, n_dirs: cfg.grid_dirs }.sample()
}

fn run_construction(cfg: &Config, c: &Construction) -> Result<(&'static str, VerificationReport), CliError> {
    let tol = cfg.tolerance();
    Ok(match c {
        Construction::BumpTrain { s, p, eps, n } => {
            constants::check_s(*s)?;
            let eps = auto_or(eps, "eps", || Ok(verify::epsilon_threshold(*s, *p)?))?;
            let points = verify::bump_train_points(eps, *n);
            ("bump_train", verify::verify_bump_train(*s, *p, eps, &points, &tol)?)
        }
        Construction::T49_2 { n, s, gamma, p } => {
            ProblemParams::new(*s, *n, 1)?;
            let gamma = auto_or(gamma, "gamma", || {
                let p = match p {
                    Some(p) => *p,
                    None => 1.0 + 2.0 * s / constants::find_gamma_plus(*n, *s)?.root + 0.2,
                };
                if !(p > 1.0) {
                    return Err(CliError::Usage("p must exceed 1".into()));
                }
                Ok(2.0 * s / (p - 1.0))
            })?;
            let r = (*n as f64 / (*n as f64 - 1.0)).sqrt();
            let points = Region {
                kind: RegionKind::HalfspaceAnnulus { r_min: r, r_max: 20.0 * r },
                dim: *n,
                n_radii: cfg.grid_radii,
                n_dirs: cfg.grid_dirs,
            }
            .sample();
            ("t49_2", verify::verify_t49_2(*n, *s, gamma, &points, &tol)?)
        }
        Construction::Psi { kind, k, s, n, r_min, r_max } => {
            constants::check_s(*s)?;
            if !(*r_min > 0.0 && r_max > r_min) {
                return Err(CliError::Usage("radii must satisfy 0 < r-min < r-max".into()));
            }
            let n = n.unwrap_or((*k).max(2));
            let radii = Region::log_spaced(*r_min, *r_max, cfg.grid_radii);
            ("psi", verify::verify_psi_subsolution((*kind).into(), *k, *s, n, &radii, cfg.grid_dirs, &tol)?)
        }
        Construction::Singular { s, p, op, n, frames } => {
            constants::check_s(*s)?;
            let points = slab(cfg, *n, 0.1, 3.0);
            let op: SingularOp = (*op).into();
            ("singular", verify::verify_singular_supersolution(*s, *p, op, *n, &points, *frames, cfg.seed, &tol)?)
        }
        Construction::Power { mu, s, n, xi } => {
            constants::check_s(*s)?;
            let xi = if xi.is_empty() { basis_vector(*n, n - 1) } else { xi.clone() };
            if xi.len() != *n {
                return Err(CliError::Usage(format!("xi must have {n} coordinates")));
            }
            let points = slab(cfg, *n, 0.1, 3.0);
            ("power", verify::verify_power_identity(*mu, *s, &operators::unit(&xi), &points, &tol)?)
        }
        Construction::Transform { s, p, q, n, triples } => {
            constants::check_s(*s)?;
            let base = profiles::build_singular_supersolution(*s, *p, SingularOp::IkMinus, *n)?.function;
            let points = slab(cfg, *n, 0.1, 3.0);
            ("transform", verify::verify_transform(*s, *p, *q, &base, &points, *triples, cfg.seed, &tol)?)
        }
        Construction::Avoidance { n, s, r, y } => {
            constants::check_s(*s)?;
            let y = if y.is_empty() {
                let mut y = vec![0.0; *n];
                y[n - 1] = -1.5 * r;
                y
            } else {
                y.clone()
            };
            let points = slab(cfg, *n, 0.1, 3.0);
            ("avoidance", verify::verify_avoidance_example(*n, *s, *r, &y, &points, &tol)?)
        }
    })
}

fn construction_name(c: &Construction) -> &'static str {
    match c {
        Construction::BumpTrain { .. } => "bump_train",
        Construction::T49_2 { .. } => "t49_2",
        Construction::Psi { .. } => "psi",
        Construction::Singular { .. } => "singular",
        Construction::Power { .. } => "power",
        Construction::Transform { .. } => "transform",
        Construction::Avoidance { .. } => "avoidance",
    }
}

/// Exit code of a verdict.
pub fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Inconclusive => 3,
    }
}

pub fn verify(cfg: &Config, a: &VerifyArgs) -> Result<u8, CliError> {
    let path = Path::new(&a.report);
    let name = construction_name(&a.construction);
    match run_construction(cfg, &a.construction) {
        Ok((_, report)) => {
            let mut doc = json!({"schema": SCHEMA, "config": cfg});
            merge(&mut doc, serde_json::to_value(&report).expect("report serializes"));
            output::write_atomic(path, &output::json_bytes(&doc))?;
            let r0 = report.extra.get("empirical_r0").map(|v| format!(", empirical R0 {v}")).unwrap_or_default();
            println!(
                "{name}: {:?} ({} residuals, max violation {:.3e}{r0}) -> {}",
                report.verdict,
                report.residuals.len(),
                report.max_violation,
                path.display()
            );
            Ok(verdict_code(report.verdict))
        }
        Err(e) => {
            let doc = json!({"schema": SCHEMA, "construction": name, "verdict": "error", "error": e.message(), "config": cfg});
            output::write_atomic(path, &output::json_bytes(&doc))?;
            match e {
                CliError::Numeric(m) => {
                    eprintln!("error: {m}");
                    Ok(verdict_code(Verdict::Inconclusive))
                }
                other => Err(other),
            }
        }
    }
}

fn sweep_row(targets: Targets, s: f64, n: usize, k: usize, cfg: &Config) -> Result<Vec<Option<f64>>, String> {
    let tol = cfg.tolerance();
    let gamma_bar = match constants::find_gamma_bar_with(k, s, &tol) {
        Ok(r) => Some(r.root),
        Err(ConstantsError::NoRoot { .. }) => None,
        Err(e) => return Err(e.to_string()),
    };
    let gamma_tilde = constants::find_gamma_tilde_with(n, s, &tol).map_err(|e| e.to_string())?.root;
    let gamma_plus = constants::find_gamma_plus_with(n, s, &tol).map_err(|e| e.to_string())?.root;
    Ok(match targets {
        Targets::Roots => vec![gamma_bar, Some(gamma_tilde), Some(gamma_plus)],
        Targets::Bounds => {
            let plus_lower =
                if k == 1 && s >= 0.5 { Some(1.0 / (1.0 - s)) } else { gamma_bar.map(|g| 1.0 + 2.0 * s / (g + 1.0)) };
            vec![plus_lower, Some(1.0 + 2.0 * s / gamma_plus), gamma_bar.map(|g| 1.0 + 2.0 * s / g)]
        }
    })
}

pub fn sweep_header(targets: Targets) -> [&'static str; 3] {
    match targets {
        Targets::Roots => ["gamma_bar", "gamma_tilde", "gamma_plus"],
        Targets::Bounds => ["p_star_plus_lower", "p_star_minus_upper", "whole_space_reference"],
    }
}

pub fn sweep(cfg: &Config, a: &SweepArgs) -> Result<u8, CliError> {
    ProblemParams::new(0.5, a.n, a.k)?;
    if a.steps == 0 && a.values.is_empty() {
        return Err(CliError::Usage("steps must be positive".into()));
    }
    let grid: Vec<f64> = if !a.values.is_empty() {
        a.values.clone()
    } else if a.steps == 1 {
        vec![a.from]
    } else {
        (0..a.steps)
            .map(|i| {
                let v = a.from + (a.to - a.from) * i as f64 / (a.steps - 1) as f64;
                (v * 1e12).round() / 1e12
            })
            .collect()
    };
    for &s in &grid {
        constants::check_s(s)?;
    }
    let rows: Vec<Result<Vec<Option<f64>>, String>> =
        grid.par_iter().map(|&s| sweep_row(a.targets, s, a.n, a.k, cfg)).collect();
    let names = sweep_header(a.targets);

    let mut header = vec!["s".to_string()];
    header.extend(names.iter().map(|n| n.to_string()));
    header.push("error".into());
    let fmt = |v: &Option<f64>| v.map(|x| format!("{x:.12}")).unwrap_or_default();
    let csv_rows: Vec<Vec<String>> = grid
        .iter()
        .zip(&rows)
        .map(|(s, r)| {
            let mut row = vec![format!("{s}")];
            match r {
                Ok(vals) => {
                    row.extend(vals.iter().map(fmt));
                    row.push(String::new());
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), names.len()));
                    row.push(e.clone());
                }
            }
            row
        })
        .collect();
    let series: Vec<Series> = names
        .iter()
        .enumerate()
        .map(|(j, name)| Series {
            name: name.to_string(),
            points: grid
                .iter()
                .zip(&rows)
                .map(|(s, r)| (*s, r.as_ref().ok().and_then(|v| v[j]).unwrap_or(f64::NAN)))
                .collect(),
        })
        .collect();
    let title = format!(
        "{} over s (N = {}, k = {})",
        match a.targets {
            Targets::Roots => "critical exponents",
            Targets::Bounds => "exponent bounds",
        },
        a.n,
        a.k
    );

    let dir = Path::new(&a.out_dir);
    let csv_path = dir.join(format!("{}.csv", a.name));
    let svg_path = dir.join(format!("{}.svg", a.name));
    output::write_atomic(&csv_path, &output::csv_bytes(&header, &csv_rows)?)?;
    output::write_atomic(&svg_path, output::svg_chart(&title, "s", &series).as_bytes())?;
    let failures = rows.iter().filter(|r| r.is_err()).count();
    print_json(&json!({
        "schema": SCHEMA,
        "command": "sweep",
        "targets": names,
        "rows": grid.len(),
        "failures": failures,
        "csv": csv_path,
        "svg": svg_path,
    }));
    Ok(if failures == grid.len() { 1 } else { 0 })
}
