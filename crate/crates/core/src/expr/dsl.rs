//! JSON form of expressions.
//!
//! ```json
//! {"atom": "matern", "params": {"alpha": 1.0, "nu": 0.5}}
//! {"op": "compose", "args": [F, G]}
//! {"op": "scale", "c": 2.0, "args": [F]}
//! {"op": "combine", "rule": "power_mean", "alpha": 0.5, "args": [F, G]}
//! {"op": "dualize", "rule": "x_over_f", "args": [F]}
//! {"op": "schur", "alpha": 0.3, "beta": 0.6, "args": [G1, G2]}
//! {"levy": {"alpha": 0.0, "beta": 0.0, "atoms": [[1.0, 1.0]]}}
//! {"levy": {"alpha": 0.0, "beta": 0.0, "density": F, "domain": [0.0, null]}}
//! ```
//!
//! Other operators are `sum`, `product`, `uchiyama` (args `[H, F, G]`) and
//! `spectral`. A `null` domain end stands for infinity.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::{
    combine, compose, dualize, schur, uchiyama, Atom, CombineRule, DualRule, ExprKind,
    FunctionExpr, LevyMeasure, LevyTriple,
};
use crate::error::{Error, Result};

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Serialize an expression.
pub fn to_json(e: &FunctionExpr) -> Value {
    let op = |name: &str, args: &[&FunctionExpr]| -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("op".into(), json!(name));
        m.insert("args".into(), Value::Array(args.iter().map(|a| to_json(a)).collect()));
        m
    };
    match e.kind() {
        ExprKind::Atom(a) => json!({"atom": a.name(), "params": a.params()}),
        ExprKind::Sum(items) => Value::Object(op("sum", &items.iter().collect::<Vec<_>>())),
        ExprKind::Product(items) => {
            Value::Object(op("product", &items.iter().collect::<Vec<_>>()))
        }
        ExprKind::Scale { c, f } => {
            let mut m = op("scale", &[f]);
            m.insert("c".into(), json!(c));
            Value::Object(m)
        }
        ExprKind::Compose { outer, inner } => Value::Object(op("compose", &[outer, inner])),
        ExprKind::Combine { rule, alpha, f, g } => {
            let mut m = op("combine", &[f, g]);
            m.insert("rule".into(), json!(rule.name()));
            m.insert("alpha".into(), json!(alpha));
            Value::Object(m)
        }
        ExprKind::Dualize { rule, f } => {
            let mut m = op("dualize", &[f]);
            m.insert("rule".into(), json!(rule.name()));
            Value::Object(m)
        }
        ExprKind::Uchiyama { h, f, g } => Value::Object(op("uchiyama", &[h, f, g])),
        ExprKind::Schur {
            alpha,
            beta,
            g1,
            g2,
        } => {
            let mut m = op("schur", &[g1, g2]);
            m.insert("alpha".into(), json!(alpha));
            m.insert("beta".into(), json!(beta));
            Value::Object(m)
        }
        ExprKind::Spectral(s) => Value::Object(op("spectral", &[s.base()])),
        ExprKind::Levy(t) => {
            let mut m = Map::new();
            m.insert("alpha".into(), json!(t.alpha()));
            m.insert("beta".into(), json!(t.beta()));
            match t.measure() {
                LevyMeasure::Atoms(atoms) => {
                    let list: Vec<Value> = atoms.iter().map(|&(s, w)| json!([s, w])).collect();
                    m.insert("atoms".into(), Value::Array(list));
                }
                LevyMeasure::Density { density, domain } => {
                    m.insert("density".into(), to_json(density));
                    m.insert("domain".into(), json!([num(domain.0), num(domain.1)]));
                }
            }
            json!({ "levy": Value::Object(m) })
        }
    }
}

/// Parse a JSON string.
pub fn from_json_str(s: &str) -> Result<FunctionExpr> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    from_json(&v)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field `{key}`")))
}

fn float(obj: &Map<String, Value>, key: &str) -> Result<f64> {
    field(obj, key)?
        .as_f64()
        .ok_or_else(|| Error::Parse(format!("field `{key}` must be a number")))
}

fn text<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a str> {
    field(obj, key)?
        .as_str()
        .ok_or_else(|| Error::Parse(format!("field `{key}` must be a string")))
}

fn end(v: &Value, default: f64) -> Result<f64> {
    match v {
        Value::Null => Ok(default),
        other => other
            .as_f64()
            .ok_or_else(|| Error::Parse("domain ends must be numbers or null".into())),
    }
}

/// Parse an expression, validating parameters and operator arguments.
pub fn from_json(v: &Value) -> Result<FunctionExpr> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("expression must be a JSON object".into()))?;

    if let Some(name) = obj.get("atom") {
        let name = name
            .as_str()
            .ok_or_else(|| Error::Parse("`atom` must be a string".into()))?;
        let mut params = BTreeMap::new();
        if let Some(p) = obj.get("params") {
            let p = p
                .as_object()
                .ok_or_else(|| Error::Parse("`params` must be an object".into()))?;
            for (k, val) in p {
                let x = val
                    .as_f64()
                    .ok_or_else(|| Error::Parse(format!("parameter `{k}` must be a number")))?;
                params.insert(k.clone(), x);
            }
        }
        return Ok(FunctionExpr::atom(Atom::from_catalog(name, &params)?));
    }

    if let Some(levy) = obj.get("levy") {
        let l = levy
            .as_object()
            .ok_or_else(|| Error::Parse("`levy` must be an object".into()))?;
        let alpha = l.get("alpha").and_then(Value::as_f64).unwrap_or(0.0);
        let beta = l.get("beta").and_then(Value::as_f64).unwrap_or(0.0);
        let measure = if let Some(d) = l.get("density") {
            let density = from_json(d)?;
            let domain = match l.get("domain") {
                None => (0.0, f64::INFINITY),
                Some(Value::Array(ends)) if ends.len() == 2 => {
                    (end(&ends[0], 0.0)?, end(&ends[1], f64::INFINITY)?)
                }
                Some(_) => return Err(Error::Parse("`domain` must be [lo, hi]".into())),
            };
            LevyMeasure::Density { density, domain }
        } else {
            let mut atoms = Vec::new();
            if let Some(list) = l.get("atoms") {
                let list = list
                    .as_array()
                    .ok_or_else(|| Error::Parse("`atoms` must be an array".into()))?;
                for item in list {
                    let pair = item.as_array().filter(|p| p.len() == 2);
                    let pair = pair.and_then(|p| Some((p[0].as_f64()?, p[1].as_f64()?)));
                    atoms.push(pair.ok_or_else(|| {
                        Error::Parse("each Lévy atom must be [location, mass]".into())
                    })?);
                }
            }
            LevyMeasure::Atoms(atoms)
        };
        return Ok(FunctionExpr::levy(LevyTriple::new(alpha, beta, measure)?));
    }

    let op = text(obj, "op")?;
    let args: Vec<FunctionExpr> = field(obj, "args")?
        .as_array()
        .ok_or_else(|| Error::Parse("`args` must be an array".into()))?
        .iter()
        .map(from_json)
        .collect::<Result<_>>()?;
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "`{op}` takes {n} argument(s), got {}",
                args.len()
            )))
        }
    };
    match op {
        "sum" | "product" => {
            if args.is_empty() {
                return Err(Error::Parse(format!("`{op}` needs at least one argument")));
            }
            Ok(if op == "sum" {
                FunctionExpr::sum(args)
            } else {
                FunctionExpr::product(args)
            })
        }
        "scale" => {
            arity(1)?;
            Ok(FunctionExpr::scale(float(obj, "c")?, args[0].clone()))
        }
        "compose" => {
            arity(2)?;
            Ok(compose(&args[0], &args[1]))
        }
        "combine" => {
            arity(2)?;
            let rule = CombineRule::from_name(text(obj, "rule")?)?;
            combine(&args[0], &args[1], rule, float(obj, "alpha")?)
        }
        "dualize" => {
            arity(1)?;
            dualize(&args[0], DualRule::from_name(text(obj, "rule")?)?)
        }
        "uchiyama" => {
            arity(3)?;
            uchiyama(&args[0], &args[1], &args[2])
        }
        "schur" => {
            arity(2)?;
            schur(&args[0], &args[1], float(obj, "alpha")?, float(obj, "beta")?)
        }
        "spectral" => {
            arity(1)?;
            crate::schoenberg::spectral_profile(&args[0])
        }
        other => Err(Error::Parse(format!("unknown operator `{other}`"))),
    }
}
