//! Expression algebra over functions on the half-line `(0, ∞)`.
//!
//! Every [`FunctionExpr`] carries a set of [`ClassTag`]s recording which of
//! the cones CM (completely monotone), BF (Bernstein), CBF (complete
//! Bernstein) and S (Stieltjes) it is known to belong to. Tags are derived
//! bottom-up at construction time from the catalog and from closure rules
//! only; an expression with no applicable rule simply carries no tag.
//! Expressions are immutable and share subtrees through `Arc`.

mod atoms;
mod dsl;
mod levy;
mod tags;

use std::fmt;
use std::sync::Arc;

pub use atoms::{catalog_entries, example_params, Atom, CatalogEntry, ParamRange, CATALOG_NAMES, TABLE1_NAMES};
pub use dsl::{from_json, from_json_str, to_json};
pub use levy::{levy_eval, LevyMeasure, LevyTriple};
pub use tags::{ClassTag, ClassTags};

pub(crate) use levy::integrate_on;

use crate::error::{finite, Error, Result};

/// Argument used to take right limits at 0 for nodes whose formula involves
/// `x` explicitly (ratios, powers of the argument).
const ZERO_PROBE: f64 = 1e-300;

/// Binary combinators on complete Bernstein functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombineRule {
    /// `(f^α + g^α)^{1/α}`, `α ∈ [-1, 1] \ {0}`
    PowerMean,
    /// `(f(x^α) + g(x^α))^{1/α}`, `α ∈ [-1, 1] \ {0}`
    ArgPowerMean,
    /// `f(x^α) · g(x^{1-α})`, `α ∈ [0, 1]`
    SplitPower,
    /// `f^α · g^{1-α}`, `α ∈ [0, 1]`
    Geometric,
    /// `(f^α/2 + g^α/2)^{1/α}`, `α ∈ [-1, 1] \ {0}`; tends to `√(fg)` as `α → 0`
    NormalizedPowerMean,
}

impl CombineRule {
    pub fn name(self) -> &'static str {
        match self {
            CombineRule::PowerMean => "power_mean",
            CombineRule::ArgPowerMean => "arg_power_mean",
            CombineRule::SplitPower => "split_power",
            CombineRule::Geometric => "geometric",
            CombineRule::NormalizedPowerMean => "normalized_power_mean",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "power_mean" => CombineRule::PowerMean,
            "arg_power_mean" => CombineRule::ArgPowerMean,
            "split_power" => CombineRule::SplitPower,
            "geometric" => CombineRule::Geometric,
            "normalized_power_mean" => CombineRule::NormalizedPowerMean,
            other => return Err(Error::Parse(format!("unknown combine rule `{other}`"))),
        })
    }

    pub fn admits(self, alpha: f64) -> bool {
        match self {
            CombineRule::PowerMean | CombineRule::ArgPowerMean | CombineRule::NormalizedPowerMean => {
                (-1.0..=1.0).contains(&alpha) && alpha != 0.0
            }
            CombineRule::SplitPower | CombineRule::Geometric => (0.0..=1.0).contains(&alpha),
        }
    }

    fn range(self) -> &'static str {
        match self {
            CombineRule::SplitPower | CombineRule::Geometric => "[0, 1]",
            _ => "[-1, 1] \\ {0}",
        }
    }
}

/// Dualities of the complete Bernstein cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DualRule {
    /// `x / f(x)`
    XOverF,
    /// `f(x) / x`
    FOverX,
    /// `1 / f(x)`
    Reciprocal,
}

impl DualRule {
    pub fn name(self) -> &'static str {
        match self {
            DualRule::XOverF => "x_over_f",
            DualRule::FOverX => "f_over_x",
            DualRule::Reciprocal => "reciprocal",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "x_over_f" => DualRule::XOverF,
            "f_over_x" => DualRule::FOverX,
            "reciprocal" => DualRule::Reciprocal,
            other => return Err(Error::Parse(format!("unknown dualize rule `{other}`"))),
        })
    }
}

/// Node structure of an expression.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Atom(Atom),
    Sum(Vec<FunctionExpr>),
    Product(Vec<FunctionExpr>),
    Scale { c: f64, f: FunctionExpr },
    /// `outer(inner(x))`
    Compose { outer: FunctionExpr, inner: FunctionExpr },
    Combine {
        rule: CombineRule,
        alpha: f64,
        f: FunctionExpr,
        g: FunctionExpr,
    },
    Dualize { rule: DualRule, f: FunctionExpr },
    /// `h(f(x)) · g(x / f(x))`
    Uchiyama {
        h: FunctionExpr,
        f: FunctionExpr,
        g: FunctionExpr,
    },
    /// `g1(x^α) · g2(x^β)`
    Schur {
        alpha: f64,
        beta: f64,
        g1: FunctionExpr,
        g2: FunctionExpr,
    },
    /// A Bernstein function given by its Lévy–Khinchine data.
    Levy(LevyTriple),
    /// `r ↦ -Re(i r f(i r))` for a Bernstein `f` whose Lévy density is decreasing.
    Spectral(Arc<crate::schoenberg::SpectralData>),
}

#[derive(Debug, PartialEq)]
struct ExprNode {
    kind: ExprKind,
    tags: ClassTags,
}

/// Immutable expression over the half-line with derived class tags.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionExpr(Arc<ExprNode>);

/// The operation at a node, stripped of its children, for tag derivation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleOp {
    Sum,
    Product,
    Scale(f64),
    Compose,
    Combine(CombineRule, f64),
    Dualize(DualRule),
    Uchiyama,
    Schur(f64, f64),
}

/// Tags of a node given its children's tags, applying each closure rule once.
///
/// * sums: every cone is a convex cone;
/// * products: CM is closed under multiplication;
/// * `c · f` with `c >= 0` keeps all tags;
/// * `f ∘ g` with `g ∈ BF`: CM and BF are preserved; CBF∘CBF and S∘S are
///   CBF; S∘CBF and CBF∘S are S;
/// * the combinators, Uchiyama's product and the dualities on CBF inputs;
/// * `g1(x^α) g2(x^β)` with `α + β <= 1` is BF for BF inputs, CBF for CBF inputs.
pub fn rule_tags(op: RuleOp, children: &[ClassTags]) -> ClassTags {
    use ClassTag::*;
    let all = |tag: ClassTag| children.iter().all(|t| t.contains(tag));
    let mut out = ClassTags::empty();
    match op {
        RuleOp::Sum => {
            if let Some(first) = children.first() {
                out = children.iter().fold(*first, |acc, t| acc.intersection(*t));
            }
        }
        RuleOp::Product => {
            if all(CM) {
                out.insert(CM);
            }
        }
        RuleOp::Scale(c) => {
            if c >= 0.0 {
                out = children[0];
            }
        }
        RuleOp::Compose => {
            let (f, g) = (children[0], children[1]);
            if g.contains(BF) {
                if f.contains(CM) {
                    out.insert(CM);
                }
                if f.contains(BF) {
                    out.insert(BF);
                }
            }
            if (f.contains(CBF) && g.contains(CBF)) || (f.contains(S) && g.contains(S)) {
                out.insert(CBF);
            }
            if (f.contains(S) && g.contains(CBF)) || (f.contains(CBF) && g.contains(S)) {
                out.insert(S);
            }
        }
        RuleOp::Combine(rule, alpha) => {
            if rule.admits(alpha) && all(CBF) {
                out.insert(CBF);
            }
        }
        RuleOp::Dualize(rule) => {
            let f = children[0];
            if f.contains(CBF) {
                match rule {
                    DualRule::XOverF => out.insert(CBF),
                    DualRule::FOverX | DualRule::Reciprocal => out.insert(S),
                }
            }
            if f.contains(S) && rule == DualRule::Reciprocal {
                out.insert(CBF);
            }
        }
        RuleOp::Uchiyama => {
            if all(CBF) {
                out.insert(CBF);
            }
        }
        RuleOp::Schur(alpha, beta) => {
            let in_range = (0.0..=1.0).contains(&alpha) && (0.0..=1.0).contains(&beta);
            if in_range && alpha + beta <= 1.0 {
                if all(BF) {
                    out.insert(BF);
                }
                if all(CBF) {
                    out.insert(CBF);
                }
            }
        }
    }
    out
}

fn levy_tags(triple: &LevyTriple) -> ClassTags {
    let mut out = ClassTags::of(&[ClassTag::BF]);
    let complete = match triple.measure() {
        LevyMeasure::Atoms(atoms) => atoms.iter().all(|&(_, m)| m == 0.0),
        LevyMeasure::Density { density, domain } => {
            domain.0 == 0.0 && domain.1.is_infinite() && density.tags().contains(ClassTag::CM)
        }
    };
    if complete {
        out.insert(ClassTag::CBF);
    }
    out
}

impl FunctionExpr {
    fn from_kind(kind: ExprKind) -> Self {
        let tags = match &kind {
            ExprKind::Atom(a) => a.tags(),
            ExprKind::Sum(items) => {
                let t: Vec<_> = items.iter().map(|e| e.tags()).collect();
                rule_tags(RuleOp::Sum, &t)
            }
            ExprKind::Product(items) => {
                let t: Vec<_> = items.iter().map(|e| e.tags()).collect();
                rule_tags(RuleOp::Product, &t)
            }
            ExprKind::Scale { c, f } => rule_tags(RuleOp::Scale(*c), &[f.tags()]),
            ExprKind::Compose { outer, inner } => {
                rule_tags(RuleOp::Compose, &[outer.tags(), inner.tags()])
            }
            ExprKind::Combine { rule, alpha, f, g } => {
                rule_tags(RuleOp::Combine(*rule, *alpha), &[f.tags(), g.tags()])
            }
            ExprKind::Dualize { rule, f } => rule_tags(RuleOp::Dualize(*rule), &[f.tags()]),
            ExprKind::Uchiyama { h, f, g } => {
                rule_tags(RuleOp::Uchiyama, &[h.tags(), f.tags(), g.tags()])
            }
            ExprKind::Schur {
                alpha,
                beta,
                g1,
                g2,
            } => rule_tags(RuleOp::Schur(*alpha, *beta), &[g1.tags(), g2.tags()]),
            ExprKind::Levy(t) => levy_tags(t),
            ExprKind::Spectral(_) => ClassTags::empty(),
        };
        FunctionExpr(Arc::new(ExprNode { kind, tags }))
    }

    /// Catalog atom by name with validated parameters.
    pub fn catalog<'a, I>(name: &str, params: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let map = params.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        Ok(Self::atom(Atom::from_catalog(name, &map)?))
    }

    pub fn atom(atom: Atom) -> Self {
        Self::from_kind(ExprKind::Atom(atom))
    }

    pub fn identity() -> Self {
        Self::atom(Atom::Power { a: 1.0 })
    }

    /// `x^p`; fractional powers in `(0, 1]` use the catalog `power` atom.
    pub fn monomial(p: f64) -> Self {
        if p > 0.0 && p <= 1.0 {
            Self::atom(Atom::Power { a: p })
        } else {
            Self::atom(Atom::Monomial { p })
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::atom(Atom::Constant { c })
    }

    pub fn exp_neg(a: f64) -> Self {
        Self::atom(Atom::ExpNeg { a })
    }

    pub fn exp_one_minus(a: f64) -> Self {
        Self::atom(Atom::ExpOneMinus { a })
    }

    pub fn log1p() -> Self {
        Self::atom(Atom::Log1p)
    }

    /// `σ(x) = 1/x`
    pub fn reciprocal() -> Self {
        Self::atom(Atom::Reciprocal)
    }

    pub fn sum(items: Vec<FunctionExpr>) -> Self {
        assert!(!items.is_empty(), "sum of no terms");
        Self::from_kind(ExprKind::Sum(items))
    }

    pub fn product(items: Vec<FunctionExpr>) -> Self {
        assert!(!items.is_empty(), "product of no factors");
        Self::from_kind(ExprKind::Product(items))
    }

    pub fn scale(c: f64, f: FunctionExpr) -> Self {
        Self::from_kind(ExprKind::Scale { c, f })
    }

    pub fn levy(triple: LevyTriple) -> Self {
        Self::from_kind(ExprKind::Levy(triple))
    }

    pub(crate) fn spectral_node(data: crate::schoenberg::SpectralData) -> Self {
        Self::from_kind(ExprKind::Spectral(Arc::new(data)))
    }

    pub fn kind(&self) -> &ExprKind {
        &self.0.kind
    }

    pub fn tags(&self) -> ClassTags {
        self.0.tags
    }

    pub fn has_tag(&self, tag: ClassTag) -> bool {
        self.0.tags.contains(tag)
    }

    /// Lévy–Khinchine data when known: catalog atoms, explicit Lévy nodes,
    /// and nonnegative multiples of those.
    pub fn levy_triple(&self) -> Option<LevyTriple> {
        match self.kind() {
            ExprKind::Atom(a) => a.levy_triple(),
            ExprKind::Levy(t) => Some(t.clone()),
            ExprKind::Scale { c, f } if *c >= 0.0 => {
                let t = f.levy_triple()?;
                let measure = match t.measure() {
                    LevyMeasure::Atoms(atoms) => {
                        LevyMeasure::Atoms(atoms.iter().map(|&(s, m)| (s, c * m)).collect())
                    }
                    LevyMeasure::Density { density, domain } => LevyMeasure::Density {
                        density: FunctionExpr::scale(*c, density.clone()),
                        domain: *domain,
                    },
                };
                LevyTriple::new(c * t.alpha(), c * t.beta(), measure).ok()
            }
            _ => None,
        }
    }

    /// True when the function vanishes at a spread of probe points; used to
    /// reject degenerate divisors.
    pub fn is_identically_zero(&self) -> bool {
        [1e-2, 0.3, 1.0, 2.5, 1e2]
            .iter()
            .all(|&x| matches!(self.eval(x), Ok(v) if v == 0.0))
    }

    /// Value at `x >= 0`. At `x = 0` the right limit is returned; an
    /// infinite limit is an overflow error, and NaN is never returned.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) || x.is_infinite() {
            return Err(Error::Domain(format!("argument {x} outside [0, ∞)")));
        }
        let v = self.eval_raw(x)?;
        finite(v, || format!("{self} at x = {x}"))
    }

    fn eval_raw(&self, x: f64) -> Result<f64> {
        match self.kind() {
            ExprKind::Atom(a) => {
                let v = a.eval(x);
                finite(v, || format!("{} at x = {x}", a.name()))
            }
            ExprKind::Sum(items) => items.iter().map(|e| e.eval(x)).sum(),
            ExprKind::Product(items) => items.iter().map(|e| e.eval(x)).product(),
            ExprKind::Scale { c, f } => Ok(c * f.eval(x)?),
            ExprKind::Compose { outer, inner } => {
                let y = match inner.eval(x) {
                    // inner function blows up at 0: take the limit through the probe
                    Err(Error::Overflow(_)) if x == 0.0 => return self.probe_limit(),
                    r => r?,
                };
                if y < 0.0 {
                    return Err(Error::Domain(format!(
                        "inner function of composition is negative ({y}) at x = {x}"
                    )));
                }
                outer.eval(y)
            }
            ExprKind::Levy(t) => t.eval(x),
            ExprKind::Spectral(s) => s.value(x),
            // nonnegative exponents: the arguments x^alpha stay finite at 0
            ExprKind::Schur {
                alpha,
                beta,
                g1,
                g2,
            } => Ok(g1.eval(x.powf(*alpha))? * g2.eval(x.powf(*beta))?),
            ExprKind::Combine {
                rule: CombineRule::SplitPower,
                alpha,
                f,
                g,
            } => Ok(f.eval(x.powf(*alpha))? * g.eval(x.powf(1.0 - alpha))?),
            _ if x == 0.0 => self.probe_limit(),
            ExprKind::Combine { rule, alpha, f, g } => {
                let a = *alpha;
                match rule {
                    CombineRule::PowerMean => power_mean(f.eval(x)?, g.eval(x)?, a, false),
                    CombineRule::NormalizedPowerMean => {
                        power_mean(f.eval(x)?, g.eval(x)?, a, true)
                    }
                    CombineRule::ArgPowerMean => {
                        let y = x.powf(a);
                        let s = f.eval(y)? + g.eval(y)?;
                        if s < 0.0 {
                            return Err(Error::Domain(format!("f + g is negative at x^alpha = {y}")));
                        }
                        finite(s.powf(1.0 / a), || format!("arg power mean at x = {x}"))
                    }
                    CombineRule::SplitPower => unreachable!(),
                    CombineRule::Geometric => {
                        let (u, v) = (f.eval(x)?, g.eval(x)?);
                        if u < 0.0 || v < 0.0 {
                            return Err(Error::Domain(format!(
                                "geometric combination of negative values at x = {x}"
                            )));
                        }
                        Ok(u.powf(a) * v.powf(1.0 - a))
                    }
                }
            }
            ExprKind::Dualize { rule, f } => {
                let v = f.eval(x)?;
                if v == 0.0 && *rule != DualRule::FOverX {
                    return Err(Error::Domain(format!("division by f({x}) = 0")));
                }
                Ok(match rule {
                    DualRule::XOverF => x / v,
                    DualRule::FOverX => v / x,
                    DualRule::Reciprocal => 1.0 / v,
                })
            }
            ExprKind::Uchiyama { h, f, g } => {
                let y = f.eval(x)?;
                if y <= 0.0 {
                    return Err(Error::Domain(format!(
                        "inner function of Uchiyama product is {y} at x = {x}"
                    )));
                }
                Ok(h.eval(y)? * g.eval(x / y)?)
            }
        }
    }
}

impl FunctionExpr {
    /// Right limit at 0 read off at a tiny positive argument. Values above
    /// `1e100` there are reported as a divergent limit.
    fn probe_limit(&self) -> Result<f64> {
        let v = self.eval_raw(ZERO_PROBE)?;
        if v.abs() > 1e100 {
            return Err(Error::Overflow(format!("{self} diverges at 0")));
        }
        Ok(v)
    }
}

fn power_mean(u: f64, v: f64, alpha: f64, normalized: bool) -> Result<f64> {
    if u < 0.0 || v < 0.0 {
        return Err(Error::Domain(format!(
            "power mean of negative values ({u}, {v})"
        )));
    }
    let m = u.max(v);
    if m == 0.0 {
        return Ok(0.0);
    }
    let (a, b) = ((u / m).powf(alpha), (v / m).powf(alpha));
    let s = if normalized { 0.5 * (a + b) } else { a + b };
    Ok(m * s.powf(1.0 / alpha))
}

/// `f ∘ g`. Tags follow the composition rules in [`rule_tags`].
pub fn compose(f: &FunctionExpr, g: &FunctionExpr) -> FunctionExpr {
    FunctionExpr::from_kind(ExprKind::Compose {
        outer: f.clone(),
        inner: g.clone(),
    })
}

/// Power means, split powers and the geometric combination of two
/// functions; tagged CBF when both inputs are.
pub fn combine(
    f: &FunctionExpr,
    g: &FunctionExpr,
    rule: CombineRule,
    alpha: f64,
) -> Result<FunctionExpr> {
    if !rule.admits(alpha) {
        return Err(Error::ParameterRange {
            atom: rule.name().to_string(),
            name: "alpha".to_string(),
            value: alpha,
            range: rule.range().to_string(),
        });
    }
    Ok(FunctionExpr::from_kind(ExprKind::Combine {
        rule,
        alpha,
        f: f.clone(),
        g: g.clone(),
    }))
}

/// `h(f(x)) · g(x / f(x))`.
pub fn uchiyama(h: &FunctionExpr, f: &FunctionExpr, g: &FunctionExpr) -> Result<FunctionExpr> {
    if f.is_identically_zero() {
        return Err(Error::Degenerate("inner function f is identically zero".into()));
    }
    Ok(FunctionExpr::from_kind(ExprKind::Uchiyama {
        h: h.clone(),
        f: f.clone(),
        g: g.clone(),
    }))
}

/// `x/f`, `f/x` or `1/f`.
pub fn dualize(f: &FunctionExpr, rule: DualRule) -> Result<FunctionExpr> {
    if f.is_identically_zero() {
        return Err(Error::Degenerate("cannot dualize the zero function".into()));
    }
    Ok(FunctionExpr::from_kind(ExprKind::Dualize {
        rule,
        f: f.clone(),
    }))
}

/// `g1(x^α) · g2(x^β)` with `α, β ∈ [0, 1]`. The node forms for any such
/// pair; the Bernstein tag is only derived when `α + β <= 1`.
pub fn schur(g1: &FunctionExpr, g2: &FunctionExpr, alpha: f64, beta: f64) -> Result<FunctionExpr> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ParameterRange {
                atom: "schur".into(),
                name: name.into(),
                value: v,
                range: "[0, 1]".into(),
            });
        }
    }
    Ok(FunctionExpr::from_kind(ExprKind::Schur {
        alpha,
        beta,
        g1: g1.clone(),
        g2: g2.clone(),
    }))
}

/// Class tags derived for `f`.
pub fn infer_class(f: &FunctionExpr) -> ClassTags {
    f.tags()
}

/// Catalog lookup, the functional form of [`FunctionExpr::catalog`].
pub fn catalog<'a, I>(name: &str, params: I) -> Result<FunctionExpr>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    FunctionExpr::catalog(name, params)
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            ExprKind::Atom(a) => {
                let params = a.params();
                if params.is_empty() {
                    write!(f, "{}", a.name())
                } else {
                    let p: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    write!(f, "{}({})", a.name(), p.join(", "))
                }
            }
            ExprKind::Sum(items) => {
                let parts: Vec<String> = items.iter().map(|e| e.to_string()).collect();
                write!(f, "({})", parts.join(" + "))
            }
            ExprKind::Product(items) => {
                let parts: Vec<String> = items.iter().map(|e| e.to_string()).collect();
                write!(f, "({})", parts.join(" * "))
            }
            ExprKind::Scale { c, f: g } => write!(f, "{c}*{g}"),
            ExprKind::Compose { outer, inner } => write!(f, "{outer}∘{inner}"),
            ExprKind::Combine {
                rule,
                alpha,
                f: a,
                g,
            } => write!(f, "{}[{alpha}]({a}, {g})", rule.name()),
            ExprKind::Dualize { rule, f: g } => write!(f, "{}({g})", rule.name()),
            ExprKind::Uchiyama { h, f: g1, g } => write!(f, "uchiyama({h}, {g1}, {g})"),
            ExprKind::Schur {
                alpha,
                beta,
                g1,
                g2,
            } => write!(f, "schur[{alpha}, {beta}]({g1}, {g2})"),
            ExprKind::Levy(t) => write!(f, "levy(alpha={}, beta={})", t.alpha(), t.beta()),
            ExprKind::Spectral(s) => write!(f, "spectral({})", s.base()),
        }
    }
}

#[cfg(test)]
mod tests;
