use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use vario_core::expr::catalog_entries;
use vario_core::kernel::FnKernel;
use vario_core::kriging::{
    bins_to_csv, empirical_variogram, ordinary_kriging, simulate_field, SimulationSpec, SolverMode,
};
use vario_core::model::{model_from_json, AnyModel};
use vario_core::oracle::{
    bernstein_check, cm_check, cnd_check, detect_period, linear_grid, log_grid, pd_check, polya_check,
    profile_shape_check, sqrt_subadditivity_check, variogram_axioms, PermissibilityReport,
};
use vario_core::{Kernel, PointSet};

use crate::{read_json_arg, write_file, write_output, Command, ModelArgs, OutArgs};

type CmdResult = Result<u8, String>;

const CHECK_NAMES: [&str; 9] = [
    "cnd",
    "pd",
    "axioms",
    "sqrt_subadditivity",
    "cm",
    "bernstein",
    "polya",
    "profile_shape",
    "period",
];

pub fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Catalog { json, out } => catalog(json, &out),
        Command::Eval { model, at, out } => eval(&model, &at, &out),
        Command::Validate {
            model,
            points,
            n,
            checks,
            tol,
            seed,
            out,
        } => validate(&model, points.as_deref(), n, checks.as_deref(), tol, seed, &out),
        Command::Construct { model, out } => construct(&model, &out),
        Command::Grid { model, grid, out } => tabulate(&model, &grid, &out),
        Command::Krige {
            model,
            points,
            target,
            grid,
            mode,
            out,
        } => krige(&model, &points, &target, grid.as_deref(), &mode, &out),
        Command::Simulate {
            model,
            points,
            seed,
            replicates,
            bins,
            tol,
            fields,
            out,
        } => simulate(&model, &points, seed, replicates, bins.as_deref(), tol, fields.as_deref(), &out),
    }
}

fn load_model(args: &ModelArgs) -> Result<(Value, AnyModel), String> {
    let v = read_json_arg(&args.model)?;
    let m = model_from_json(&v).map_err(|e| e.to_string())?;
    Ok((v, m))
}

fn load_points(p: &Path) -> Result<PointSet, String> {
    let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read `{}`: {e}", p.display()))?;
    PointSet::from_csv(&text).map_err(|e| format!("{}: {e}", p.display()))
}

fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number in `{s}`"))
        })
        .collect()
}

/// `lo:hi:n` axes separated by commas.
fn parse_axes(spec: &str) -> Result<Vec<Vec<f64>>, String> {
    spec.split(',')
        .map(|axis| {
            let parts: Vec<&str> = axis.split(':').map(str::trim).collect();
            let [lo, hi, n] = parts[..] else {
                return Err(format!("axis `{axis}` is not of the form lo:hi:n"));
            };
            let lo: f64 = lo.parse().map_err(|_| format!("bad lower bound in `{axis}`"))?;
            let hi: f64 = hi.parse().map_err(|_| format!("bad upper bound in `{axis}`"))?;
            let n: usize = n.parse().map_err(|_| format!("bad point count in `{axis}`"))?;
            if n == 0 || !(hi >= lo) {
                return Err(format!("axis `{axis}` is empty"));
            }
            Ok(linear_grid(lo, hi, n))
        })
        .collect()
}

/// Cartesian product of the axes, last axis varying fastest.
fn grid_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut rows = vec![Vec::new()];
    for axis in axes {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                axis.iter().map(move |&x| {
                    let mut r = r.clone();
                    r.push(x);
                    r
                })
            })
            .collect();
    }
    rows
}

fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// CSV payloads stay in their documented format; their config goes to
/// stderr and, with `--out`, to a `.config.json` file next to the output.
fn echo_config(config: &Value, out: &OutArgs) -> Result<(), String> {
    eprintln!("config: {config}");
    if let Some(p) = &out.out {
        write_file(&sidecar(p), &to_json_text(config))?;
    }
    Ok(())
}

fn sidecar(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

fn catalog(json: bool, out: &OutArgs) -> CmdResult {
    let entries = catalog_entries();
    let text = if json {
        to_json_text(&json!({
            "config": { "command": "catalog" },
            "entries": entries,
        }))
    } else {
        let mut s = String::from("# vario catalog\n");
        for e in &entries {
            let params: Vec<String> = e.params.iter().map(|p| format!("{} in {}", p.name, p.describe())).collect();
            let tags: Vec<String> = e.tags.iter().map(|t| t.to_string()).collect();
            s.push_str(&format!(
                "{:<16} {:<56} params: {:<44} tags: {:<14} [{}]\n",
                e.name,
                e.formula,
                if params.is_empty() { "-".into() } else { params.join(", ") },
                if tags.is_empty() { "-".into() } else { tags.join(",") },
                e.family
            ));
        }
        s
    };
    write_output(out, &text)?;
    Ok(0)
}

fn eval(args: &ModelArgs, at: &[String], out: &OutArgs) -> CmdResult {
    let (spec, model) = load_model(args)?;
    let mut values = Vec::new();
    for a in at {
        let xi = parse_vector(a)?;
        let v = model.eval(&xi).map_err(|e| e.to_string())?;
        values.push(json!({ "xi": xi, "value": v }));
    }
    let doc = json!({
        "config": { "command": "eval", "model": spec, "at": at },
        "kind": model.kind(),
        "values": values,
    });
    write_output(out, &to_json_text(&doc))?;
    Ok(0)
}

/// The model along the first axis as a function of `r = |ξ|²`.
fn radial<'a>(model: &'a AnyModel) -> impl Fn(f64) -> vario_core::Result<f64> + Sync + 'a {
    move |r: f64| {
        let mut xi = vec![0.0; model.dim()];
        xi[0] = r.sqrt();
        model.eval(&xi)
    }
}

/// The model along the first axis as a function of `t`, extended evenly.
fn axial<'a>(model: &'a AnyModel) -> impl Fn(f64) -> vario_core::Result<f64> + Sync + 'a {
    move |t: f64| {
        let mut xi = vec![0.0; model.dim()];
        xi[0] = t;
        model.eval(&xi)
    }
}

fn max_distance(pts: &PointSet) -> f64 {
    let s = pts.sites();
    let mut m: f64 = 0.0;
    for a in s {
        for b in s {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            m = m.max(d);
        }
    }
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn validate(
    args: &ModelArgs,
    points: Option<&Path>,
    n: usize,
    checks: Option<&str>,
    tol: f64,
    seed: u64,
    out: &OutArgs,
) -> CmdResult {
    let (spec, model) = load_model(args)?;
    let pts = match points {
        Some(p) => load_points(p)?,
        None => PointSet::random(n, model.dim(), -5.0, 5.0, seed).map_err(|e| e.to_string())?,
    };
    if pts.dim() != model.dim() {
        return Err(format!(
            "points are in dimension {} but the model is in dimension {}",
            pts.dim(),
            model.dim()
        ));
    }
    let selected: Vec<String> = match checks {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None if model.is_covariance() => vec!["pd".into()],
        None => vec!["cnd".into(), "axioms".into()],
    };
    if selected.is_empty() {
        return Err("no checks selected".into());
    }
    for c in &selected {
        if !CHECK_NAMES.contains(&c.as_str()) {
            return Err(format!("unknown check `{c}`; available: {}", CHECK_NAMES.join(", ")));
        }
    }

    let reach = max_distance(&pts);
    let mut report: Option<PermissibilityReport> = None;
    let mut period = Value::Null;
    for c in &selected {
        let r = match c.as_str() {
            "cnd" => cnd_check(&model, &pts, tol),
            "pd" => pd_check(&model, &pts, tol),
            "axioms" => variogram_axioms(&model, &pts, tol),
            "sqrt_subadditivity" => sqrt_subadditivity_check(&model, &pts, tol),
            "cm" => cm_check(&radial(&model), &log_grid(1e-2, 1e2, 40), 8, tol),
            "bernstein" => bernstein_check(&radial(&model), &log_grid(1e-2, 1e2, 40), 6, tol),
            "polya" => polya_check(&axial(&model), &linear_grid(0.0, reach, 41), tol),
            "profile_shape" => profile_shape_check(&radial(&model), &linear_grid(0.0, reach * reach, 41), tol),
            "period" => {
                let p = detect_period(&model, reach.max(10.0), tol).map_err(|e| e.to_string())?;
                period = serde_json::to_value(p).expect("serializable");
                continue;
            }
            _ => unreachable!(),
        }
        .map_err(|e| e.to_string())?;
        report = Some(match report {
            Some(acc) => acc.merge(r),
            None => r,
        });
    }
    let verdict = report.as_ref().map(|r| r.verdict).unwrap_or(vario_core::Verdict::Pass);
    let mut doc = json!({
        "config": {
            "command": "validate",
            "model": spec,
            "points": points.map(|p| p.display().to_string()),
            "n": pts.len(),
            "checks": selected,
            "tol": tol,
            "seed": seed,
        },
        "model": model.to_json(),
        "certified": model.is_certified(),
        "verdict": verdict,
        "checks": report.as_ref().map(|r| serde_json::to_value(&r.checks).expect("serializable")),
    });
    if selected.iter().any(|c| c == "period") {
        doc["period"] = period;
    }
    write_output(out, &to_json_text(&doc))?;
    Ok(verdict.exit_code() as u8)
}

fn construct(recipe: &str, out: &OutArgs) -> CmdResult {
    let spec = read_json_arg(recipe)?;
    if spec.get("constructor").is_none() {
        return Err("recipe needs a `constructor` field".into());
    }
    let model = model_from_json(&spec).map_err(|e| e.to_string())?;
    let doc = json!({
        "config": { "command": "construct", "recipe": spec },
        "certified": model.is_certified(),
        "model": model.to_json(),
    });
    write_output(out, &to_json_text(&doc))?;
    Ok(0)
}

fn tabulate(args: &ModelArgs, spec: &str, out: &OutArgs) -> CmdResult {
    let (model_spec, model) = load_model(args)?;
    let axes = parse_axes(spec)?;
    if axes.len() != model.dim() {
        return Err(format!(
            "grid has {} axes but the model is in dimension {}",
            axes.len(),
            model.dim()
        ));
    }
    echo_config(&json!({ "command": "grid", "model": model_spec, "grid": spec }), out)?;
    let header: Vec<String> = (1..=axes.len()).map(|i| format!("x{i}")).collect();
    let mut csv = format!("{},value\n", header.join(","));
    for p in grid_points(&axes) {
        let v = model.eval(&p).map_err(|e| e.to_string())?;
        let coords: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        csv.push_str(&format!("{},{v}\n", coords.join(",")));
    }
    write_output(out, &csv)?;
    Ok(0)
}

fn krige(
    args: &ModelArgs,
    points: &Path,
    targets: &[String],
    grid: Option<&str>,
    mode: &str,
    out: &OutArgs,
) -> CmdResult {
    let (spec, model) = load_model(args)?;
    let mode = SolverMode::from_name(mode).map_err(|e| e.to_string())?;
    let kmodel = model.to_kriging().map_err(|e| e.to_string())?;
    let pts = load_points(points)?;
    if pts.values().is_none() {
        return Err(format!("{}: kriging needs a `value` column", points.display()));
    }
    let mut tlist = targets.iter().map(|t| parse_vector(t)).collect::<Result<Vec<_>, _>>()?;
    if let Some(g) = grid {
        tlist.extend(grid_points(&parse_axes(g)?));
    }
    if tlist.is_empty() {
        return Err("no targets: give --target or --grid".into());
    }
    let mut results = Vec::with_capacity(tlist.len());
    for t in &tlist {
        let r = ordinary_kriging(&kmodel, &pts, t, mode).map_err(|e| e.to_string())?;
        results.push(json!({
            "target": t,
            "prediction": r.prediction,
            "weights": r.weights,
            "lagrange_multiplier": r.lagrange_multiplier,
        }));
    }
    let doc = json!({
        "config": {
            "command": "krige",
            "model": spec,
            "points": points.display().to_string(),
            "targets": targets,
            "grid": grid,
            "mode": mode,
        },
        "mode": mode,
        "predictions": results,
    });
    write_output(out, &to_json_text(&doc))?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    args: &ModelArgs,
    points: &Path,
    seed: u64,
    replicates: usize,
    bins: Option<&str>,
    tol: f64,
    fields: Option<&Path>,
    out: &OutArgs,
) -> CmdResult {
    let (spec, model) = load_model(args)?;
    let pts = load_points(points)?;
    if replicates == 0 {
        return Err("at least one replicate is needed".into());
    }
    let kernel: FnKernel = if model.is_covariance() {
        let m = model.clone();
        FnKernel::new(m.dim(), move |xi| m.eval(xi))
    } else {
        let k = model.to_kriging().map_err(|e| e.to_string())?;
        if k.covariance_support().is_none() {
            return Err(format!(
                "simulation needs a covariance or a variogram with a recorded plateau; the {} model has neither",
                model.kind()
            ));
        }
        FnKernel::new(k.dim(), move |xi| k.covariance(xi))
    };
    let edges = match bins {
        Some(b) if b.contains(':') => parse_axes(b)?.remove(0),
        Some(b) => parse_vector(b)?,
        None => linear_grid(0.0, max_distance(&pts) * (1.0 + 1e-12), 11),
    };
    let sim = simulate_field(&SimulationSpec {
        covariance: &kernel,
        sites: &pts,
        seed,
        replicates,
        tol,
    })
    .map_err(|e| e.to_string())?;
    let table = empirical_variogram(&sim.replicates, &pts, &edges).map_err(|e| e.to_string())?;
    echo_config(
        &json!({
            "command": "simulate",
            "model": spec,
            "points": points.display().to_string(),
            "seed": seed,
            "replicates": replicates,
            "bins": edges,
            "tol": tol,
            "diagonal_shift": sim.diagonal_shift,
        }),
        out,
    )?;
    if let Some(f) = fields {
        let header: Vec<String> = (1..=pts.len()).map(|i| format!("z{i}")).collect();
        let mut csv = format!("{}\n", header.join(","));
        for row in &sim.replicates {
            let r: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            csv.push_str(&r.join(","));
            csv.push('\n');
        }
        write_file(f, &csv)?;
    }
    write_output(out, &bins_to_csv(&table))?;
    Ok(0)
}
