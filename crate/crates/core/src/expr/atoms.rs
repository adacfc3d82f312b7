//! Catalog atoms: named functions on the half-line with their parameter
//! ranges, cone memberships and, where known, Lévy–Khinchine data.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::function::gamma::gamma;

use super::levy::{LevyMeasure, LevyTriple};
use super::tags::{ClassTag, ClassTags};
use super::FunctionExpr;
use crate::error::{Error, Result};
use crate::special::{one_minus_matern_correlation, scaled_upper_gamma};

/// A catalog function with validated parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Atom {
    Matern { alpha: f64, nu: f64 },
    Cauchy { alpha: f64, beta: f64 },
    Dagum { rho: f64, gamma: f64 },
    ExpOneMinus { a: f64 },
    Power { a: f64 },
    Log1p,
    SqrtArctan,
    LambdaRatio { lambda: f64 },
    CmPole,
    ExpNeg { a: f64 },
    Reciprocal,
    Monomial { p: f64 },
    Constant { c: f64 },
    Sin { w: f64 },
    Cos { w: f64 },
    Spherical { range: f64 },
    WendlandProfile { r: f64, l: f64 },
    Nugget,
    T1Cauchy { alpha: f64, beta: f64 },
    T1Euler,
    T1Dagum { rho: f64, gamma: f64 },
    T1LogRatio { a: f64 },
    T1PowerRatio { alpha: f64 },
    T1SinhRatio,
    T1SqrtExp { a: f64 },
    T1GammaUpper { a: f64, nu: f64 },
    T1ShiftedSqrt { a: f64 },
    T1GammaInv { a: f64, nu: f64 },
}

/// Admissible interval for one parameter.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamRange {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
    pub integer: bool,
}

impl ParamRange {
    const fn new(name: &'static str, lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Self {
        ParamRange {
            name,
            lo,
            hi,
            lo_open,
            hi_open,
            integer: false,
        }
    }

    const fn integer(name: &'static str, lo: f64) -> Self {
        ParamRange {
            name,
            lo,
            hi: f64::INFINITY,
            lo_open: false,
            hi_open: true,
            integer: true,
        }
    }

    fn contains(&self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        if self.integer && v.fract() != 0.0 {
            return false;
        }
        let lo_ok = if self.lo_open { v > self.lo } else { v >= self.lo };
        let hi_ok = if self.hi_open { v < self.hi } else { v <= self.hi };
        lo_ok && hi_ok
    }

    pub fn describe(&self) -> String {
        let lo = if self.lo == f64::NEG_INFINITY {
            "-inf".to_string()
        } else {
            format!("{}", self.lo)
        };
        let hi = if self.hi == f64::INFINITY {
            "inf".to_string()
        } else {
            format!("{}", self.hi)
        };
        let kind = if self.integer { " integer" } else { "" };
        format!(
            "{}{lo}, {hi}{}{kind}",
            if self.lo_open { "(" } else { "[" },
            if self.hi_open { ")" } else { "]" },
        )
    }
}

/// Static description of a catalog entry, used for listings.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub formula: &'static str,
    pub family: &'static str,
    pub params: Vec<ParamRange>,
    pub tags: Vec<ClassTag>,
}

const POS: f64 = 0.0;
const INF: f64 = f64::INFINITY;

fn ranges(name: &str) -> Option<Vec<ParamRange>> {
    use ParamRange as R;
    let r = match name {
        "matern" => vec![R::new("alpha", POS, INF, true, true), R::new("nu", POS, INF, true, true)],
        "cauchy" => vec![R::new("alpha", POS, 1.0, true, false), R::new("beta", POS, INF, true, true)],
        "dagum" => vec![R::new("rho", POS, 1.0, true, true), R::new("gamma", POS, 1.0, true, true)],
        "exp_one_minus" => vec![R::new("a", POS, INF, false, true)],
        "power" => vec![R::new("a", POS, 1.0, true, false)],
        "log1p" | "sqrt_arctan" | "cm_pole" | "reciprocal" | "nugget" | "t1_euler"
        | "t1_sinh_ratio" => vec![],
        "lambda_ratio" => vec![R::new("lambda", POS, INF, true, true)],
        "exp_neg" => vec![R::new("a", POS, INF, false, true)],
        "monomial" => vec![R::new("p", f64::NEG_INFINITY, INF, true, true)],
        "constant" => vec![R::new("c", f64::NEG_INFINITY, INF, true, true)],
        "sin" | "cos" => vec![R::new("w", f64::NEG_INFINITY, INF, true, true)],
        "spherical" => vec![R::new("range", POS, INF, true, true)],
        "wendland_profile" => vec![R::new("r", POS, INF, true, true), R::integer("l", 0.0)],
        "t1_cauchy" => vec![R::new("alpha", POS, 1.0, true, false), R::new("beta", POS, 1.0, true, false)],
        "t1_dagum" => vec![R::new("rho", POS, 1.0, true, true), R::new("gamma", POS, 1.0, true, true)],
        "t1_log_ratio" | "t1_sqrt_exp" | "t1_shifted_sqrt" => vec![R::new("a", POS, INF, true, true)],
        "t1_power_ratio" => vec![R::new("alpha", POS, 1.0, true, true)],
        "t1_gamma_upper" | "t1_gamma_inv" => {
            vec![R::new("a", POS, INF, true, true), R::new("nu", POS, 1.0, true, true)]
        }
        _ => return None,
    };
    Some(r)
}

/// Names of the complete Bernstein functions tabulated in the reference
/// table, in table order.
pub const TABLE1_NAMES: [&str; 10] = [
    "t1_cauchy",
    "t1_euler",
    "t1_dagum",
    "t1_log_ratio",
    "t1_power_ratio",
    "t1_sinh_ratio",
    "t1_sqrt_exp",
    "t1_gamma_upper",
    "t1_shifted_sqrt",
    "t1_gamma_inv",
];

/// Every catalog name, in listing order.
pub const CATALOG_NAMES: [&str; 28] = [
    "matern",
    "cauchy",
    "dagum",
    "exp_one_minus",
    "power",
    "log1p",
    "sqrt_arctan",
    "lambda_ratio",
    "t1_cauchy",
    "t1_euler",
    "t1_dagum",
    "t1_log_ratio",
    "t1_power_ratio",
    "t1_sinh_ratio",
    "t1_sqrt_exp",
    "t1_gamma_upper",
    "t1_shifted_sqrt",
    "t1_gamma_inv",
    "cm_pole",
    "exp_neg",
    "reciprocal",
    "monomial",
    "constant",
    "sin",
    "cos",
    "spherical",
    "wendland_profile",
    "nugget",
];

fn formula_and_family(name: &str) -> (&'static str, &'static str) {
    match name {
        "matern" => ("1 - 2^(1-nu)/Gamma(nu) (alpha sqrt x)^nu K_nu(alpha sqrt x)", "Matérn class"),
        "cauchy" => ("1 - (1 + x^alpha)^(-beta)", "Cauchy class"),
        "dagum" => ("(x^rho / (1 + x^rho))^gamma", "Dagum class"),
        "exp_one_minus" => ("1 - exp(-a x)", "exponential Bernstein function"),
        "power" => ("x^a", "fractional power"),
        "log1p" => ("log(1 + x)", "logarithm"),
        "sqrt_arctan" => ("sqrt(x) arctan(1/sqrt(x))", "complete Bernstein example"),
        "lambda_ratio" => ("lambda x / (lambda + x)", "complete Bernstein example"),
        "t1_cauchy" => ("1 - (1 + x^alpha)^(-beta)", "complete Bernstein table"),
        "t1_euler" => ("e x - x (1 + 1/x)^x - x/(x + 1)", "complete Bernstein table"),
        "t1_dagum" => ("(x^rho / (1 + x^rho))^gamma", "complete Bernstein table"),
        "t1_log_ratio" => ("1/a - (1/x) log(1 + x/a)", "complete Bernstein table"),
        "t1_power_ratio" => (
            "(x^alpha - x (1 + x)^(alpha - 1)) / ((1 + x)^alpha - x^alpha)",
            "complete Bernstein table",
        ),
        "t1_sinh_ratio" => ("sqrt(x/2) sinh^2(sqrt(2x)) / sinh(2 sqrt(2x))", "complete Bernstein table"),
        "t1_sqrt_exp" => ("sqrt(x) (1 - exp(-2a sqrt x))", "complete Bernstein table"),
        "t1_gamma_upper" => ("x^(1-nu) exp(a x) Gamma(nu; a x)", "complete Bernstein table"),
        "t1_shifted_sqrt" => ("x (1 - exp(-2 sqrt(x + a))) / sqrt(x + a)", "complete Bernstein table"),
        "t1_gamma_inv" => ("x^nu exp(a/x) Gamma(nu; a/x)", "complete Bernstein table"),
        "cm_pole" => ("1 / (x (1 + x^2))", "completely monotone, not Stieltjes"),
        "exp_neg" => ("exp(-a x)", "completely monotone exponential"),
        "reciprocal" => ("1/x", "Stieltjes function"),
        "monomial" => ("x^p", "monomial (class depends on p)"),
        "constant" => ("c", "constant"),
        "sin" => ("sin(w x)", "oscillatory test function"),
        "cos" => ("cos(w x)", "oscillatory test function"),
        "spherical" => (
            "1.5 (x/range) - 0.5 (x/range)^3 for x <= range, 1 beyond",
            "spherical variogram profile (norm argument)",
        ),
        "wendland_profile" => ("(1 - x/r)_+^l", "Wendland truncated power (norm argument)"),
        "nugget" => ("1 at x = 0, 0 elsewhere", "nugget effect"),
        _ => ("", ""),
    }
}

/// Full catalog listing in stable order.
pub fn catalog_entries() -> Vec<CatalogEntry> {
    CATALOG_NAMES
        .iter()
        .map(|&name| {
            let (formula, family) = formula_and_family(name);
            let params = ranges(name).expect("catalog name");
            let tags = static_tags(name, &BTreeMap::new()).iter().collect();
            CatalogEntry {
                name,
                formula,
                family,
                params,
                tags,
            }
        })
        .collect()
}

/// A representative admissible parameter choice for each catalog name.
pub fn example_params(name: &str) -> Option<Vec<(&'static str, f64)>> {
    let p = match name {
        "matern" => vec![("alpha", 1.0), ("nu", 0.5)],
        "cauchy" => vec![("alpha", 0.5), ("beta", 1.0)],
        "dagum" | "t1_dagum" => vec![("rho", 0.5), ("gamma", 0.5)],
        "exp_one_minus" | "exp_neg" => vec![("a", 1.0)],
        "power" => vec![("a", 0.5)],
        "lambda_ratio" => vec![("lambda", 1.0)],
        "monomial" => vec![("p", 2.0)],
        "constant" => vec![("c", 1.0)],
        "sin" | "cos" => vec![("w", 1.0)],
        "spherical" => vec![("range", 1.0)],
        "wendland_profile" => vec![("r", 1.0), ("l", 2.0)],
        "t1_cauchy" => vec![("alpha", 0.5), ("beta", 0.5)],
        "t1_log_ratio" | "t1_sqrt_exp" | "t1_shifted_sqrt" => vec![("a", 1.0)],
        "t1_power_ratio" => vec![("alpha", 0.5)],
        "t1_gamma_upper" | "t1_gamma_inv" => vec![("a", 1.0), ("nu", 0.5)],
        n if ranges(n).is_some_and(|r| r.is_empty()) => vec![],
        _ => return None,
    };
    Some(p)
}

/// Tags that hold for every admissible parameter choice; parameter-dependent
/// atoms (monomial, constant) get theirs from [`Atom::tags`].
fn static_tags(name: &str, _params: &BTreeMap<String, f64>) -> ClassTags {
    match name {
        "matern" | "cauchy" | "dagum" | "exp_one_minus" => ClassTags::of(&[ClassTag::BF]),
        "power" | "log1p" | "sqrt_arctan" | "lambda_ratio" => ClassTags::of(&[ClassTag::CBF]),
        n if n.starts_with("t1_") => ClassTags::of(&[ClassTag::CBF]),
        "cm_pole" | "exp_neg" => ClassTags::of(&[ClassTag::CM]),
        "reciprocal" => ClassTags::of(&[ClassTag::S]),
        _ => ClassTags::empty(),
    }
}

fn get(atom: &str, params: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    params.get(name).copied().ok_or_else(|| Error::MissingParameter {
        atom: atom.to_string(),
        name: name.to_string(),
    })
}

impl Atom {
    /// Look up `name` and validate `params` against its admissible ranges.
    pub fn from_catalog(name: &str, params: &BTreeMap<String, f64>) -> Result<Atom> {
        let specs = ranges(name).ok_or_else(|| Error::UnknownAtom(name.to_string()))?;
        for key in params.keys() {
            if !specs.iter().any(|s| s.name == key) {
                return Err(Error::Parse(format!("`{name}` has no parameter `{key}`")));
            }
        }
        for spec in &specs {
            let v = get(name, params, spec.name)?;
            if !spec.contains(v) {
                return Err(Error::ParameterRange {
                    atom: name.to_string(),
                    name: spec.name.to_string(),
                    value: v,
                    range: spec.describe(),
                });
            }
        }
        let p = |k: &str| params[k];
        let atom = match name {
            "matern" => Atom::Matern { alpha: p("alpha"), nu: p("nu") },
            "cauchy" => Atom::Cauchy { alpha: p("alpha"), beta: p("beta") },
            "dagum" => Atom::Dagum { rho: p("rho"), gamma: p("gamma") },
            "exp_one_minus" => Atom::ExpOneMinus { a: p("a") },
            "power" => Atom::Power { a: p("a") },
            "log1p" => Atom::Log1p,
            "sqrt_arctan" => Atom::SqrtArctan,
            "lambda_ratio" => Atom::LambdaRatio { lambda: p("lambda") },
            "cm_pole" => Atom::CmPole,
            "exp_neg" => Atom::ExpNeg { a: p("a") },
            "reciprocal" => Atom::Reciprocal,
            "monomial" => Atom::Monomial { p: p("p") },
            "constant" => Atom::Constant { c: p("c") },
            "sin" => Atom::Sin { w: p("w") },
            "cos" => Atom::Cos { w: p("w") },
            "spherical" => Atom::Spherical { range: p("range") },
            "wendland_profile" => Atom::WendlandProfile { r: p("r"), l: p("l") },
            "nugget" => Atom::Nugget,
            "t1_cauchy" => Atom::T1Cauchy { alpha: p("alpha"), beta: p("beta") },
            "t1_euler" => Atom::T1Euler,
            "t1_dagum" => Atom::T1Dagum { rho: p("rho"), gamma: p("gamma") },
            "t1_log_ratio" => Atom::T1LogRatio { a: p("a") },
            "t1_power_ratio" => Atom::T1PowerRatio { alpha: p("alpha") },
            "t1_sinh_ratio" => Atom::T1SinhRatio,
            "t1_sqrt_exp" => Atom::T1SqrtExp { a: p("a") },
            "t1_gamma_upper" => Atom::T1GammaUpper { a: p("a"), nu: p("nu") },
            "t1_shifted_sqrt" => Atom::T1ShiftedSqrt { a: p("a") },
            "t1_gamma_inv" => Atom::T1GammaInv { a: p("a"), nu: p("nu") },
            _ => unreachable!("ranges() covers every catalog name"),
        };
        Ok(atom)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Atom::Matern { .. } => "matern",
            Atom::Cauchy { .. } => "cauchy",
            Atom::Dagum { .. } => "dagum",
            Atom::ExpOneMinus { .. } => "exp_one_minus",
            Atom::Power { .. } => "power",
            Atom::Log1p => "log1p",
            Atom::SqrtArctan => "sqrt_arctan",
            Atom::LambdaRatio { .. } => "lambda_ratio",
            Atom::CmPole => "cm_pole",
            Atom::ExpNeg { .. } => "exp_neg",
            Atom::Reciprocal => "reciprocal",
            Atom::Monomial { .. } => "monomial",
            Atom::Constant { .. } => "constant",
            Atom::Sin { .. } => "sin",
            Atom::Cos { .. } => "cos",
            Atom::Spherical { .. } => "spherical",
            Atom::WendlandProfile { .. } => "wendland_profile",
            Atom::Nugget => "nugget",
            Atom::T1Cauchy { .. } => "t1_cauchy",
            Atom::T1Euler => "t1_euler",
            Atom::T1Dagum { .. } => "t1_dagum",
            Atom::T1LogRatio { .. } => "t1_log_ratio",
            Atom::T1PowerRatio { .. } => "t1_power_ratio",
            Atom::T1SinhRatio => "t1_sinh_ratio",
            Atom::T1SqrtExp { .. } => "t1_sqrt_exp",
            Atom::T1GammaUpper { .. } => "t1_gamma_upper",
            Atom::T1ShiftedSqrt { .. } => "t1_shifted_sqrt",
            Atom::T1GammaInv { .. } => "t1_gamma_inv",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let pairs: Vec<(&str, f64)> = match *self {
            Atom::Matern { alpha, nu } => vec![("alpha", alpha), ("nu", nu)],
            Atom::Cauchy { alpha, beta } | Atom::T1Cauchy { alpha, beta } => {
                vec![("alpha", alpha), ("beta", beta)]
            }
            Atom::Dagum { rho, gamma } | Atom::T1Dagum { rho, gamma } => {
                vec![("rho", rho), ("gamma", gamma)]
            }
            Atom::ExpOneMinus { a } | Atom::Power { a } | Atom::ExpNeg { a } => vec![("a", a)],
            Atom::LambdaRatio { lambda } => vec![("lambda", lambda)],
            Atom::Monomial { p } => vec![("p", p)],
            Atom::Constant { c } => vec![("c", c)],
            Atom::Sin { w } | Atom::Cos { w } => vec![("w", w)],
            Atom::Spherical { range } => vec![("range", range)],
            Atom::WendlandProfile { r, l } => vec![("r", r), ("l", l)],
            Atom::T1LogRatio { a } | Atom::T1SqrtExp { a } | Atom::T1ShiftedSqrt { a } => {
                vec![("a", a)]
            }
            Atom::T1PowerRatio { alpha } => vec![("alpha", alpha)],
            Atom::T1GammaUpper { a, nu } | Atom::T1GammaInv { a, nu } => vec![("a", a), ("nu", nu)],
            Atom::Log1p
            | Atom::SqrtArctan
            | Atom::CmPole
            | Atom::Reciprocal
            | Atom::Nugget
            | Atom::T1Euler
            | Atom::T1SinhRatio => vec![],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Cone memberships asserted for this atom.
    pub fn tags(&self) -> ClassTags {
        use ClassTag::*;
        match *self {
            Atom::Monomial { p } => {
                if p == 0.0 {
                    ClassTags::of(&[CBF, S])
                } else if p > 0.0 && p <= 1.0 {
                    ClassTags::of(&[CBF])
                } else if (-1.0..0.0).contains(&p) {
                    ClassTags::of(&[S])
                } else if p < -1.0 {
                    ClassTags::of(&[CM])
                } else {
                    ClassTags::empty()
                }
            }
            Atom::Constant { c } if c >= 0.0 => ClassTags::of(&[CBF, S]),
            Atom::ExpNeg { a } if a == 0.0 => ClassTags::of(&[CBF, S]),
            Atom::ExpOneMinus { a } if a == 0.0 => ClassTags::of(&[CBF, S]),
            _ => static_tags(self.name(), &BTreeMap::new()),
        }
    }

    /// Lévy–Khinchine data for atoms whose representing measure is known.
    pub fn levy_triple(&self) -> Option<LevyTriple> {
        match *self {
            Atom::ExpOneMinus { a } if a == 0.0 => Some(LevyTriple::zero()),
            Atom::ExpOneMinus { a } => {
                LevyTriple::new(0.0, 0.0, LevyMeasure::Atoms(vec![(a, 1.0)])).ok()
            }
            Atom::Power { a } => power_triple(a),
            Atom::Monomial { p } if p == 0.0 => Some(LevyTriple::constant(1.0)),
            Atom::Monomial { p } if p > 0.0 && p <= 1.0 => power_triple(p),
            Atom::Log1p => {
                let density = FunctionExpr::product(vec![
                    FunctionExpr::exp_neg(1.0),
                    FunctionExpr::monomial(-1.0),
                ]);
                LevyTriple::new(0.0, 0.0, LevyMeasure::density(density)).ok()
            }
            Atom::LambdaRatio { lambda } => {
                let density = FunctionExpr::scale(lambda * lambda, FunctionExpr::exp_neg(lambda));
                LevyTriple::new(0.0, 0.0, LevyMeasure::density(density)).ok()
            }
            Atom::Constant { c } if c >= 0.0 => Some(LevyTriple::constant(c)),
            Atom::ExpNeg { a } if a == 0.0 => Some(LevyTriple::constant(1.0)),
            _ => None,
        }
    }

    /// Raw value at `x >= 0`; `x = 0` returns the right limit. May be
    /// non-finite where the atom has a pole; the caller reports that.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Atom::Matern { alpha, nu } => one_minus_matern_correlation(nu, alpha * x.sqrt()),
            Atom::Cauchy { alpha, beta } | Atom::T1Cauchy { alpha, beta } => {
                if x == 0.0 {
                    0.0
                } else {
                    -(-beta * x.powf(alpha).ln_1p()).exp_m1()
                }
            }
            Atom::Dagum { rho, gamma } | Atom::T1Dagum { rho, gamma } => {
                if x == 0.0 {
                    0.0
                } else {
                    (-gamma * x.powf(-rho).ln_1p()).exp()
                }
            }
            Atom::ExpOneMinus { a } => -(-a * x).exp_m1(),
            Atom::Power { a } => x.powf(a),
            Atom::Log1p => x.ln_1p(),
            Atom::SqrtArctan => {
                if x == 0.0 {
                    0.0
                } else {
                    let s = x.sqrt();
                    s * (1.0 / s).atan()
                }
            }
            Atom::LambdaRatio { lambda } => lambda * x / (lambda + x),
            Atom::CmPole => 1.0 / (x * (1.0 + x * x)),
            Atom::ExpNeg { a } => (-a * x).exp(),
            Atom::Reciprocal => 1.0 / x,
            Atom::Monomial { p } => x.powf(p),
            Atom::Constant { c } => c,
            Atom::Sin { w } => (w * x).sin(),
            Atom::Cos { w } => (w * x).cos(),
            Atom::Spherical { range } => {
                let h = x / range;
                if h >= 1.0 {
                    1.0
                } else {
                    1.5 * h - 0.5 * h * h * h
                }
            }
            Atom::WendlandProfile { r, l } => {
                let base = (1.0 - x / r).max(0.0);
                base.powf(l)
            }
            Atom::Nugget => {
                if x == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Atom::T1Euler => t1_euler(x),
            Atom::T1LogRatio { a } => {
                let u = x / a;
                if u < 0.1 {
                    // (1/a) Σ_{k>=1} (-1)^{k+1} u^k / (k+1)
                    let mut sum = 0.0;
                    let mut pow = u;
                    for k in 1..40 {
                        let term = pow / (k as f64 + 1.0);
                        sum += if k % 2 == 1 { term } else { -term };
                        pow *= u;
                        if pow < 1e-18 * sum.abs() {
                            break;
                        }
                    }
                    sum / a
                } else {
                    1.0 / a - u.ln_1p() / x
                }
            }
            Atom::T1PowerRatio { alpha } => {
                if x == 0.0 {
                    return 0.0;
                }
                // ratio = -expm1(-(1-α)L) / expm1(αL), L = log1p(1/x)
                let l = (1.0 / x).ln_1p();
                -(-(1.0 - alpha) * l).exp_m1() / (alpha * l).exp_m1()
            }
            Atom::T1SinhRatio => {
                // sinh^2(u) / sinh(2u) = tanh(u) / 2
                let u = (2.0 * x).sqrt();
                (x / 2.0).sqrt() * u.tanh() / 2.0
            }
            Atom::T1SqrtExp { a } => {
                let s = x.sqrt();
                -s * (-2.0 * a * s).exp_m1()
            }
            Atom::T1GammaUpper { a, nu } => {
                if x == 0.0 {
                    0.0
                } else {
                    x.powf(1.0 - nu) * scaled_upper_gamma(nu, a * x)
                }
            }
            Atom::T1ShiftedSqrt { a } => {
                let s = (x + a).sqrt();
                -x * (-2.0 * s).exp_m1() / s
            }
            Atom::T1GammaInv { a, nu } => {
                if x == 0.0 {
                    0.0
                } else {
                    x.powf(nu) * scaled_upper_gamma(nu, a / x)
                }
            }
        }
    }
}

fn power_triple(a: f64) -> Option<LevyTriple> {
    if a == 1.0 {
        return Some(LevyTriple::drift(1.0));
    }
    // x^a = a / Γ(1-a) ∫ (1 - e^{-xt}) t^{-1-a} dt
    let c = a / gamma(1.0 - a);
    let density = FunctionExpr::scale(c, FunctionExpr::monomial(-1.0 - a));
    LevyTriple::new(0.0, 0.0, LevyMeasure::density(density)).ok()
}

/// `e x - x (1 + 1/x)^x - x/(x+1)` with the cancellation for large `x`
/// handled through `x log1p(1/x) - 1` expanded as a series.
fn t1_euler(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let e = std::f64::consts::E;
    let delta = if x > 10.0 {
        // x log(1 + 1/x) - 1 = Σ_{k>=2} (-1)^{k+1} / (k x^{k-1})
        let u = 1.0 / x;
        let mut sum = 0.0;
        let mut pow = u;
        for k in 2..60 {
            let term = pow / k as f64;
            sum += if k % 2 == 1 { term } else { -term };
            pow *= u;
            if pow < 1e-19 {
                break;
            }
        }
        sum
    } else {
        x * (1.0 / x).ln_1p() - 1.0
    };
    // e x - x e^{1 + delta} = -e x expm1(delta)
    -e * x * delta.exp_m1() - x / (x + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(name: &str, params: &[(&str, f64)]) -> Result<Atom> {
        let map = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Atom::from_catalog(name, &map)
    }

    #[test]
    fn reference_values() {
        // 40-digit reference values
        let cases: Vec<(Atom, f64, f64)> = vec![
            (atom("matern", &[("alpha", 1.0), ("nu", 0.5)]).unwrap(), 1.0, 0.632_120_558_828_557_7),
            (atom("matern", &[("alpha", 1.0), ("nu", 1.5)]).unwrap(), 2.0, 0.413_064_282_489_062),
            (atom("matern", &[("alpha", 2.0), ("nu", 2.3)]).unwrap(), 0.7, 0.349_925_182_189_484_65),
            (atom("matern", &[("alpha", 1.0), ("nu", 0.2)]).unwrap(), 0.01, 0.380_234_358_916_065_35),
            (atom("matern", &[("alpha", 0.5), ("nu", 5.0)]).unwrap(), 10.0, 0.141_467_495_546_468_3),
            (Atom::T1Euler, 3.0, 0.293_734_374_266_024_6),
            (Atom::T1Euler, 100.0, 0.356_700_893_850_924_1),
            (atom("t1_power_ratio", &[("alpha", 0.4)]).unwrap(), 2.0, 1.226_422_745_995_333_2),
            (Atom::T1SinhRatio, 0.7, 0.245_062_655_526_199_86),
            (atom("t1_sqrt_exp", &[("a", 0.5)]).unwrap(), 2.0, 1.070_394_579_296_371_3),
            (atom("t1_gamma_upper", &[("a", 2.0), ("nu", 0.3)]).unwrap(), 1.5, 0.517_983_571_358_551_1),
            (atom("t1_shifted_sqrt", &[("a", 1.0)]).unwrap(), 3.0, 1.472_526_541_666_898_7),
            (atom("t1_gamma_inv", &[("a", 2.0), ("nu", 0.6)]).unwrap(), 0.5, 0.349_752_150_277_373_5),
            (atom("t1_log_ratio", &[("a", 3.0)]).unwrap(), 0.01, 5.543_240_658_664_186e-4),
            (Atom::SqrtArctan, 2.0, 0.870_419_751_367_103_2),
        ];
        for (a, x, want) in cases {
            let got = a.eval(x);
            assert!(((got - want) / want).abs() < 1e-12, "{} at {x}: {got} vs {want}", a.name());
        }
    }

    #[test]
    fn rejects_out_of_range_and_unknown() {
        assert!(matches!(
            atom("dagum", &[("rho", 1.0), ("gamma", 0.5)]),
            Err(Error::ParameterRange { .. })
        ));
        assert!(matches!(
            atom("cauchy", &[("alpha", 1.5), ("beta", 1.0)]),
            Err(Error::ParameterRange { .. })
        ));
        assert!(matches!(atom("bogus", &[]), Err(Error::UnknownAtom(_))));
        assert!(matches!(atom("power", &[]), Err(Error::MissingParameter { .. })));
        assert!(matches!(
            atom("wendland_profile", &[("r", 1.0), ("l", 1.5)]),
            Err(Error::ParameterRange { .. })
        ));
    }

    #[test]
    fn catalog_is_stable_and_complete() {
        let entries = catalog_entries();
        assert_eq!(entries.len(), CATALOG_NAMES.len());
        let table: Vec<_> = entries
            .iter()
            .filter(|e| e.family == "complete Bernstein table")
            .map(|e| e.name)
            .collect();
        assert_eq!(table, TABLE1_NAMES.to_vec());
        assert!(entries.iter().any(|e| e.name == "dagum"));
    }
}
