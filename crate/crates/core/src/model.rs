//! JSON form of models and named construction recipes.
//!
//! ```json
//! {"kind": "variogram", "profile": F, "mode": "norm", "d": 2, "A": [[1,0],[0,1]]}
//! {"kind": "covariance", "profile": F, "mode": "norm", "d": 1, "support_radius": 1.0}
//! {"kind": "difference_kernel", "base": {"kind": "variogram", ...}, "eta": [1.0]}
//! {"constructor": "ma_product", "a1": 1.0, "a2": 2.0, "d": 3}
//! ```
//!
//! `A` defaults to the identity, `mode` to `norm`. A bare expression is read
//! as a variogram on the line in norm mode.

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::expr::{from_json, to_json, FunctionExpr};
use crate::kernel::Kernel;
use crate::kriging;
use crate::schoenberg::{difference_kernel, spectral_variogram, sum_kernel, DifferenceKernel, SumKernel};
use crate::variogram::{
    cbf_variograms, composition_products, cosine_covariance, cosine_variogram, exponential_covariance,
    gaussian_covariance, ma_product, make_variogram, nugget_covariance, schur_product_extended, spherical,
    spherical_covariance, variogram_from_covariance, wendland, ArgumentMode, CbfVariant, Certification,
    CompositionVariant, StationaryCovariance, Variogram,
};

/// Anything the command line can load, validate and tabulate.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Variogram(Variogram),
    Covariance(StationaryCovariance),
    DifferenceKernel(DifferenceKernel),
    SumKernel(SumKernel),
}

impl AnyModel {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Variogram(_) => "variogram",
            AnyModel::Covariance(_) => "covariance",
            AnyModel::DifferenceKernel(_) => "difference_kernel",
            AnyModel::SumKernel(_) => "sum_kernel",
        }
    }

    /// Whether the oracles should treat the model as a covariance
    /// (positive definite) rather than a variogram (conditionally negative
    /// definite).
    pub fn is_covariance(&self) -> bool {
        matches!(self, AnyModel::Covariance(_) | AnyModel::DifferenceKernel(_))
    }

    pub fn certification(&self) -> Certification {
        match self {
            AnyModel::Variogram(v) => v.certification().clone(),
            AnyModel::Covariance(c) => c.certification().clone(),
            AnyModel::DifferenceKernel(k) => inherit(k.pair().base()),
            AnyModel::SumKernel(k) => inherit(k.pair().base()),
        }
    }

    pub fn is_certified(&self) -> bool {
        self.certification().covers(self.dim())
    }

    /// The model as a kriging model, when it is one.
    pub fn to_kriging(&self) -> Result<kriging::Model> {
        match self {
            AnyModel::Variogram(v) => Ok(kriging::Model::Variogram(v.clone())),
            AnyModel::Covariance(c) => Ok(kriging::Model::Covariance(c.clone())),
            other => Err(Error::Hypothesis(format!(
                "{} models cannot be used for kriging",
                other.kind()
            ))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyModel::Variogram(v) => variogram_json(v),
            AnyModel::Covariance(c) => {
                let mut m = common(c.profile(), c.mode(), c.anisotropy(), c.dim(), c.certification(), c.construction());
                m.insert("kind".into(), json!("covariance"));
                m.insert("sill".into(), json!(c.sill()));
                m.insert("support_radius".into(), json!(c.support_radius()));
                Value::Object(m)
            }
            AnyModel::DifferenceKernel(k) => shift_json("difference_kernel", k.pair().base(), k.pair().eta()),
            AnyModel::SumKernel(k) => shift_json("sum_kernel", k.pair().base(), k.pair().eta()),
        }
    }
}

fn inherit(base: &Variogram) -> Certification {
    let c = base.certification();
    Certification {
        note: format!("built from a base variogram: {}", c.note),
        ..c.clone()
    }
}

impl Kernel for AnyModel {
    fn dim(&self) -> usize {
        match self {
            AnyModel::Variogram(v) => v.dim(),
            AnyModel::Covariance(c) => c.dim(),
            AnyModel::DifferenceKernel(k) => k.dim(),
            AnyModel::SumKernel(k) => k.dim(),
        }
    }

    fn eval(&self, xi: &[f64]) -> Result<f64> {
        match self {
            AnyModel::Variogram(v) => v.eval(xi),
            AnyModel::Covariance(c) => c.eval(xi),
            AnyModel::DifferenceKernel(k) => k.eval(xi),
            AnyModel::SumKernel(k) => k.eval(xi),
        }
    }
}

fn matrix_json(a: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..a.nrows())
            .map(|i| Value::Array((0..a.ncols()).map(|j| json!(a[(i, j)])).collect()))
            .collect(),
    )
}

fn common(
    profile: &FunctionExpr,
    mode: ArgumentMode,
    a: &DMatrix<f64>,
    d: usize,
    cert: &Certification,
    construction: &str,
) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("profile".into(), to_json(profile));
    m.insert("mode".into(), json!(mode.name()));
    m.insert("d".into(), json!(d));
    m.insert("A".into(), matrix_json(a));
    m.insert("certified".into(), json!(cert.covers(d)));
    m.insert("certification".into(), serde_json::to_value(cert).expect("plain struct"));
    m.insert("construction".into(), json!(construction));
    m
}

fn variogram_json(v: &Variogram) -> Value {
    let mut m = common(v.profile(), v.mode(), v.anisotropy(), v.dim(), v.certification(), v.construction());
    m.insert("kind".into(), json!("variogram"));
    m.insert(
        "plateau".into(),
        match v.plateau() {
            Some((sill, range)) => json!({"sill": sill, "range": range}),
            None => Value::Null,
        },
    );
    Value::Object(m)
}

fn shift_json(kind: &str, base: &Variogram, eta: &[f64]) -> Value {
    json!({
        "kind": kind,
        "base": variogram_json(base),
        "eta": eta,
        "certified": inherit(base).covers(base.dim()),
    })
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::MissingParameter {
            atom: "model".into(),
            name: key.into(),
        })
}

fn f64_field(v: &Value, key: &str) -> Result<f64> {
    field(v, key)?
        .as_f64()
        .ok_or_else(|| Error::Parse(format!("`{key}` must be a number")))
}

fn f64_or(v: &Value, key: &str, default: f64) -> Result<f64> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(default),
        Some(_) => f64_field(v, key),
    }
}

fn usize_field(v: &Value, key: &str) -> Result<usize> {
    field(v, key)?
        .as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| Error::Parse(format!("`{key}` must be a nonnegative integer")))
}

fn dim_or(v: &Value, default: usize) -> Result<usize> {
    match v.get("d") {
        None | Some(Value::Null) => Ok(default),
        Some(_) => usize_field(v, "d"),
    }
}

fn str_field<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    field(v, key)?
        .as_str()
        .ok_or_else(|| Error::Parse(format!("`{key}` must be a string")))
}

fn vector_field(v: &Value, key: &str) -> Result<Vec<f64>> {
    field(v, key)?
        .as_array()
        .ok_or_else(|| Error::Parse(format!("`{key}` must be an array of numbers")))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| Error::Parse(format!("`{key}` must be an array of numbers"))))
        .collect()
}

fn expr_field(v: &Value, key: &str) -> Result<FunctionExpr> {
    from_json(field(v, key)?)
}

fn matrix_or_identity(v: &Value, d: usize) -> Result<DMatrix<f64>> {
    match v.get("A") {
        None | Some(Value::Null) => Ok(DMatrix::identity(d, d)),
        Some(Value::Array(rows)) => {
            let bad = || Error::Parse(format!("`A` must be a {d}x{d} array of numbers"));
            if rows.len() != d {
                return Err(bad());
            }
            let mut a = DMatrix::zeros(d, d);
            for (i, row) in rows.iter().enumerate() {
                let row = row.as_array().filter(|r| r.len() == d).ok_or_else(bad)?;
                for (j, x) in row.iter().enumerate() {
                    a[(i, j)] = x.as_f64().ok_or_else(bad)?;
                }
            }
            Ok(a)
        }
        Some(_) => Err(Error::Parse("`A` must be an array of rows".into())),
    }
}

fn mode_or(v: &Value, default: ArgumentMode) -> Result<ArgumentMode> {
    match v.get("mode") {
        None | Some(Value::Null) => Ok(default),
        Some(Value::String(s)) => ArgumentMode::from_name(s),
        Some(_) => Err(Error::Parse("`mode` must be a string".into())),
    }
}

fn stored_certification(v: &Value) -> Result<Option<Certification>> {
    match v.get("certification") {
        None | Some(Value::Null) => Ok(None),
        Some(c) => serde_json::from_value(c.clone())
            .map(Some)
            .map_err(|e| Error::Parse(format!("certification: {e}"))),
    }
}

fn variogram_from_json(v: &Value) -> Result<Variogram> {
    let d = dim_or(v, 1)?;
    let profile = expr_field(v, "profile")?;
    let a = matrix_or_identity(v, d)?;
    let mode = mode_or(v, ArgumentMode::Norm)?;
    let mut out = make_variogram(&profile, &a, d, mode)?;
    if let Some(cert) = stored_certification(v)? {
        out = Variogram::from_parts(profile, mode, a, d, cert, str_or(v, "construction", "loaded"))?;
    }
    if let Some(p) = v.get("plateau").filter(|p| !p.is_null()) {
        out = out.with_plateau(f64_field(p, "sill")?, f64_field(p, "range")?);
    }
    Ok(out)
}

fn str_or<'a>(v: &'a Value, key: &str, default: &'a str) -> &'a str {
    v.get(key).and_then(Value::as_str).unwrap_or(default)
}

fn covariance_from_json(v: &Value) -> Result<StationaryCovariance> {
    let d = dim_or(v, 1)?;
    let profile = expr_field(v, "profile")?;
    let support = match v.get("support_radius") {
        None | Some(Value::Null) => None,
        Some(_) => Some(f64_field(v, "support_radius")?),
    };
    let cert = stored_certification(v)?
        .unwrap_or_else(|| Certification::unverified("covariance loaded without a certificate"));
    StationaryCovariance::new(
        profile,
        mode_or(v, ArgumentMode::Norm)?,
        matrix_or_identity(v, d)?,
        d,
        support,
        cert,
        str_or(v, "construction", "loaded"),
    )
}

/// Parse a model, a recipe, or a bare expression.
pub fn model_from_json(v: &Value) -> Result<AnyModel> {
    if v.get("constructor").is_some() {
        return construct_from_recipe(v);
    }
    let Some(kind) = v.get("kind") else {
        let f = from_json(v)?;
        return Ok(AnyModel::Variogram(make_variogram(
            &f,
            &DMatrix::identity(1, 1),
            1,
            ArgumentMode::Norm,
        )?));
    };
    match kind.as_str() {
        Some("variogram") => Ok(AnyModel::Variogram(variogram_from_json(v)?)),
        Some("covariance") => Ok(AnyModel::Covariance(covariance_from_json(v)?)),
        Some("difference_kernel") => Ok(AnyModel::DifferenceKernel(difference_kernel(
            &variogram_from_json(field(v, "base")?)?,
            &vector_field(v, "eta")?,
        )?)),
        Some("sum_kernel") => Ok(AnyModel::SumKernel(sum_kernel(
            &variogram_from_json(field(v, "base")?)?,
            &vector_field(v, "eta")?,
        )?)),
        _ => Err(Error::Parse(format!("unknown model kind {kind}"))),
    }
}

pub fn model_from_str(s: &str) -> Result<AnyModel> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(format!("model JSON: {e}")))?;
    model_from_json(&v)
}

fn base_variogram(v: &Value) -> Result<Variogram> {
    let base = field(v, "base")?;
    match model_from_json(base)? {
        AnyModel::Variogram(g) => Ok(g),
        other => Err(Error::Parse(format!("`base` must be a variogram, got {}", other.kind()))),
    }
}

/// Materialize a named constructor.
///
/// | constructor | fields |
/// |---|---|
/// | `ma_product` | `a1`, `a2`, `d`, `A` |
/// | `schur_product_extended` | `g1`, `g2`, `alpha`, `beta`, `d`, `A` |
/// | `cbf_variograms` | `g`, `variant` (`ratio`, `inv_arg`, `inv_arg_ratio`), `d` |
/// | `composition_products` | `g1`, `g2`, `g3`, `variant` (`two_factor`, `three_factor`), `d` |
/// | `difference_kernel`, `sum_kernel` | `base` (model or recipe), `eta` |
/// | `spectral_variogram` | `f` |
/// | `wendland` | `r`, `l`, `d` |
/// | `spherical` | `range`, `d` |
/// | `make_variogram` | `f`, `mode`, `d`, `A` |
/// | `variogram_from_covariance` | `covariance` (model or recipe) |
/// | `exponential_covariance`, `gaussian_covariance` | `a`, `d` |
/// | `spherical_covariance` | `range`, `d` |
/// | `nugget_covariance` | `d` |
/// | `cosine_covariance`, `cosine_variogram` | `w` |
pub fn construct_from_recipe(v: &Value) -> Result<AnyModel> {
    let name = str_field(v, "constructor")?;
    let d = dim_or(v, 1)?;
    let var = |g: Variogram| Ok(AnyModel::Variogram(g));
    let cov = |c: StationaryCovariance| Ok(AnyModel::Covariance(c));
    match name {
        "ma_product" => var(ma_product(
            f64_field(v, "a1")?,
            f64_field(v, "a2")?,
            &matrix_or_identity(v, d)?,
            d,
        )?),
        "schur_product_extended" => var(schur_product_extended(
            &expr_field(v, "g1")?,
            &expr_field(v, "g2")?,
            f64_field(v, "alpha")?,
            f64_field(v, "beta")?,
            &matrix_or_identity(v, d)?,
            d,
        )?),
        "cbf_variograms" => var(cbf_variograms(
            &expr_field(v, "g")?,
            CbfVariant::from_name(str_or(v, "variant", "ratio"))?,
            d,
        )?),
        "composition_products" => {
            let g3 = match v.get("g3") {
                None | Some(Value::Null) => None,
                Some(_) => Some(expr_field(v, "g3")?),
            };
            var(composition_products(
                &expr_field(v, "g1")?,
                &expr_field(v, "g2")?,
                g3.as_ref(),
                CompositionVariant::from_name(str_or(v, "variant", "two_factor"))?,
                d,
            )?)
        }
        "difference_kernel" => Ok(AnyModel::DifferenceKernel(difference_kernel(
            &base_variogram(v)?,
            &vector_field(v, "eta")?,
        )?)),
        "sum_kernel" => Ok(AnyModel::SumKernel(sum_kernel(&base_variogram(v)?, &vector_field(v, "eta")?)?)),
        "spectral_variogram" => var(spectral_variogram(&expr_field(v, "f")?)?),
        "wendland" => {
            let l = usize_field(v, "l")?;
            let l = u32::try_from(l).map_err(|_| Error::Parse("`l` is too large".into()))?;
            cov(wendland(f64_field(v, "r")?, l, d)?)
        }
        "spherical" => var(spherical(f64_field(v, "range")?, d)?),
        "make_variogram" => var(make_variogram(
            &expr_field(v, "f")?,
            &matrix_or_identity(v, d)?,
            d,
            mode_or(v, ArgumentMode::Norm)?,
        )?),
        "variogram_from_covariance" => match model_from_json(field(v, "covariance")?)? {
            AnyModel::Covariance(c) => var(variogram_from_covariance(&c)),
            other => Err(Error::Parse(format!("`covariance` must be a covariance, got {}", other.kind()))),
        },
        "exponential_covariance" => cov(exponential_covariance(f64_or(v, "a", 1.0)?, d)?),
        "gaussian_covariance" => cov(gaussian_covariance(f64_or(v, "a", 1.0)?, d)?),
        "spherical_covariance" => cov(spherical_covariance(f64_field(v, "range")?, d)?),
        "nugget_covariance" => cov(nugget_covariance(d)?),
        "cosine_covariance" => cov(cosine_covariance(f64_or(v, "w", 1.0)?)?),
        "cosine_variogram" => var(cosine_variogram(f64_or(v, "w", 1.0)?)?),
        other => Err(Error::Parse(format!("unknown constructor `{other}`"))),
    }
}
