//! Variograms and stationary covariances from radial profiles.
//!
//! A model evaluates `f(|Aξ|²)` ([`ArgumentMode::SquaredNorm`]) or
//! `f(|Aξ|)` ([`ArgumentMode::Norm`]). Each constructed model carries a
//! [`Certification`]: certified models are permissible by a closure rule or
//! a classical result, unverified ones are usable but should be checked
//! with the oracles before being trusted.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{compose, dualize, schur, uchiyama, ClassTag, DualRule, FunctionExpr};
use crate::kernel::Kernel;

/// How the radial profile sees the argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgumentMode {
    /// `γ(ξ) = f(|Aξ|²)`
    SquaredNorm,
    /// `γ(ξ) = f(|Aξ|)`
    Norm,
}

impl ArgumentMode {
    pub fn name(self) -> &'static str {
        match self {
            ArgumentMode::SquaredNorm => "squared_norm",
            ArgumentMode::Norm => "norm",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "squared_norm" => Ok(ArgumentMode::SquaredNorm),
            "norm" => Ok(ArgumentMode::Norm),
            other => Err(Error::Parse(format!("unknown argument mode `{other}`"))),
        }
    }
}

/// Whether a model is known to be permissible, and up to which dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub certified: bool,
    /// Largest dimension covered by the certificate; `None` means every dimension.
    pub max_dim: Option<usize>,
    pub note: String,
}

impl Certification {
    pub fn all_dimensions(note: impl Into<String>) -> Self {
        Certification {
            certified: true,
            max_dim: None,
            note: note.into(),
        }
    }

    pub fn up_to(max_dim: usize, note: impl Into<String>) -> Self {
        Certification {
            certified: true,
            max_dim: Some(max_dim),
            note: note.into(),
        }
    }

    pub fn unverified(note: impl Into<String>) -> Self {
        Certification {
            certified: false,
            max_dim: None,
            note: note.into(),
        }
    }

    /// Certified in dimension `d`.
    pub fn covers(&self, d: usize) -> bool {
        self.certified && self.max_dim.is_none_or(|m| d <= m)
    }

    /// Certificate from the profile's tags: a Bernstein profile gives a
    /// variogram in every dimension, in both argument modes (`f(√x)` is
    /// Bernstein whenever `f` is).
    fn from_bernstein(profile: &FunctionExpr) -> Self {
        if profile.has_tag(ClassTag::BF) {
            Certification::all_dimensions("Bernstein profile")
        } else {
            Certification::unverified("profile carries no Bernstein tag")
        }
    }
}

fn check_matrix(a: &DMatrix<f64>, d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Dimension("dimension must be positive".into()));
    }
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::Dimension(format!(
            "anisotropy matrix is {}x{}, expected {d}x{d}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("anisotropy matrix has non-finite entries".into()));
    }
    Ok(())
}

/// `|Aξ|²`, written so that `ξ` and `-ξ` give bitwise equal results.
fn squared_image(a: &DMatrix<f64>, xi: &[f64]) -> f64 {
    let d = xi.len();
    let mut s = 0.0;
    for i in 0..d {
        let mut row = 0.0;
        for (j, x) in xi.iter().enumerate() {
            row += a[(i, j)] * x;
        }
        s += row * row;
    }
    s
}

fn argument(mode: ArgumentMode, a: &DMatrix<f64>, d: usize, xi: &[f64]) -> Result<f64> {
    if xi.len() != d {
        return Err(Error::Dimension(format!(
            "argument has {} coordinates, model lives in ℝ^{d}",
            xi.len()
        )));
    }
    let r2 = squared_image(a, xi);
    Ok(match mode {
        ArgumentMode::SquaredNorm => r2,
        ArgumentMode::Norm => r2.sqrt(),
    })
}

/// A variogram `ξ ↦ f(|Aξ|²)` or `ξ ↦ f(|Aξ|)` on `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Variogram {
    profile: FunctionExpr,
    mode: ArgumentMode,
    a: DMatrix<f64>,
    d: usize,
    certification: Certification,
    construction: String,
    /// For eventually constant models: the plateau value and the radius
    /// (in units of `|Aξ|`) from which it is attained.
    plateau: Option<(f64, f64)>,
}

impl Variogram {
    /// Assemble a model from parts without any certification logic.
    pub fn from_parts(
        profile: FunctionExpr,
        mode: ArgumentMode,
        a: DMatrix<f64>,
        d: usize,
        certification: Certification,
        construction: impl Into<String>,
    ) -> Result<Self> {
        check_matrix(&a, d)?;
        Ok(Variogram {
            profile,
            mode,
            a,
            d,
            certification,
            construction: construction.into(),
            plateau: None,
        })
    }

    /// Declare the model constant (`sill`) for `|Aξ| >= range`.
    pub fn with_plateau(mut self, sill: f64, range: f64) -> Self {
        self.plateau = Some((sill, range));
        self
    }

    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        self.profile.eval(argument(self.mode, &self.a, self.d, xi)?)
    }

    /// The profile as a function of `r = |Aξ|²`.
    pub fn radial_profile(&self, r: f64) -> Result<f64> {
        match self.mode {
            ArgumentMode::SquaredNorm => self.profile.eval(r),
            ArgumentMode::Norm => self.profile.eval(r.sqrt()),
        }
    }

    pub fn profile(&self) -> &FunctionExpr {
        &self.profile
    }

    pub fn mode(&self) -> ArgumentMode {
        self.mode
    }

    pub fn anisotropy(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn certification(&self) -> &Certification {
        &self.certification
    }

    pub fn is_certified(&self) -> bool {
        self.certification.covers(self.d)
    }

    pub fn certified_all_dimensions(&self) -> bool {
        self.certification.certified && self.certification.max_dim.is_none()
    }

    pub fn construction(&self) -> &str {
        &self.construction
    }

    /// `(sill, range)` for eventually constant models.
    pub fn plateau(&self) -> Option<(f64, f64)> {
        self.plateau
    }

    /// Same model in another dimension with the identity anisotropy.
    pub fn in_dimension(&self, d: usize) -> Result<Self> {
        let mut out = self.clone();
        out.d = d;
        out.a = DMatrix::identity(d, d);
        Ok(out)
    }
}

impl Kernel for Variogram {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, xi: &[f64]) -> Result<f64> {
        Variogram::eval(self, xi)
    }
}

/// A stationary covariance `ξ ↦ φ(|Aξ|²)` or `φ(|Aξ|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryCovariance {
    profile: FunctionExpr,
    mode: ArgumentMode,
    a: DMatrix<f64>,
    d: usize,
    sill: f64,
    support_radius: Option<f64>,
    certification: Certification,
    construction: String,
}

impl StationaryCovariance {
    /// `support_radius` is in units of `|Aξ|`; `None` means unbounded support.
    pub fn new(
        profile: FunctionExpr,
        mode: ArgumentMode,
        a: DMatrix<f64>,
        d: usize,
        support_radius: Option<f64>,
        certification: Certification,
        construction: impl Into<String>,
    ) -> Result<Self> {
        check_matrix(&a, d)?;
        if let Some(r) = support_radius {
            if !(r >= 0.0) {
                return Err(Error::Domain(format!("support radius {r} must be nonnegative")));
            }
        }
        let sill = profile.eval(0.0)?;
        if sill < 0.0 {
            return Err(Error::Domain(format!("covariance at the origin is {sill} < 0")));
        }
        Ok(StationaryCovariance {
            profile,
            mode,
            a,
            d,
            sill,
            support_radius,
            certification,
            construction: construction.into(),
        })
    }

    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        self.profile.eval(argument(self.mode, &self.a, self.d, xi)?)
    }

    pub fn profile(&self) -> &FunctionExpr {
        &self.profile
    }

    pub fn mode(&self) -> ArgumentMode {
        self.mode
    }

    pub fn anisotropy(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `C(0)`.
    pub fn sill(&self) -> f64 {
        self.sill
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    pub fn certification(&self) -> &Certification {
        &self.certification
    }

    pub fn is_certified(&self) -> bool {
        self.certification.covers(self.d)
    }

    pub fn construction(&self) -> &str {
        &self.construction
    }
}

impl Kernel for StationaryCovariance {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, xi: &[f64]) -> Result<f64> {
        StationaryCovariance::eval(self, xi)
    }
}

/// `ξ ↦ f(|Aξ|²)` (or `f(|Aξ|)`), certified when `f` is tagged Bernstein.
pub fn make_variogram(f: &FunctionExpr, a: &DMatrix<f64>, d: usize, mode: ArgumentMode) -> Result<Variogram> {
    check_matrix(a, d)?;
    let at_zero = f.eval(0.0)?;
    let certification = if at_zero < 0.0 {
        Certification::unverified(format!("profile is negative at 0 ({at_zero})"))
    } else {
        Certification::from_bernstein(f)
    };
    Variogram::from_parts(f.clone(), mode, a.clone(), d, certification, "make_variogram")
}

/// `ξ ↦ (1 - e^{-a₁|Aξ|})(1 - e^{-a₂|Aξ|})`.
///
/// Built as the Schur product `g₁(x^{1/2}) g₂(x^{1/2})` of
/// `g_i = 1 - e^{-a_i x}` in squared-norm mode, which is Bernstein.
pub fn ma_product(a1: f64, a2: f64, a: &DMatrix<f64>, d: usize) -> Result<Variogram> {
    for (name, v) in [("a1", a1), ("a2", a2)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::ParameterRange {
                atom: "ma_product".into(),
                name: name.into(),
                value: v,
                range: "[0, inf)".into(),
            });
        }
    }
    let g1 = FunctionExpr::exp_one_minus(a1);
    let g2 = FunctionExpr::exp_one_minus(a2);
    let profile = schur(&g1, &g2, 0.5, 0.5)?;
    let cert = Certification::all_dimensions("product of 1 - exp(-a|Aξ|) factors");
    Variogram::from_parts(
        profile,
        ArgumentMode::SquaredNorm,
        a.clone(),
        d,
        cert,
        format!("ma_product(a1={a1}, a2={a2})"),
    )
}

/// `ξ ↦ g₁(|Aξ|^{2α}) g₂(|Aξ|^{2β})` for Bernstein `g₁, g₂` and `α + β <= 1`.
///
/// `α + β > 1` is rejected; use [`schur_product_unchecked`] to build such a
/// model as unverified.
pub fn schur_product_extended(
    g1: &FunctionExpr,
    g2: &FunctionExpr,
    alpha: f64,
    beta: f64,
    a: &DMatrix<f64>,
    d: usize,
) -> Result<Variogram> {
    if alpha + beta > 1.0 {
        return Err(Error::Hypothesis(format!(
            "Schur product requires alpha + beta <= 1, got {alpha} + {beta} = {}",
            alpha + beta
        )));
    }
    schur_product_unchecked(g1, g2, alpha, beta, a, d)
}

/// [`schur_product_extended`] without the `α + β <= 1` gate; the result is
/// certified only when the gate and the Bernstein tags both hold.
pub fn schur_product_unchecked(
    g1: &FunctionExpr,
    g2: &FunctionExpr,
    alpha: f64,
    beta: f64,
    a: &DMatrix<f64>,
    d: usize,
) -> Result<Variogram> {
    let profile = schur(g1, g2, alpha, beta)?;
    let cert = if alpha + beta > 1.0 {
        Certification::unverified(format!("alpha + beta = {} exceeds 1", alpha + beta))
    } else if g1.has_tag(ClassTag::BF) && g2.has_tag(ClassTag::BF) {
        Certification::all_dimensions("Schur product of Bernstein functions with alpha + beta <= 1")
    } else {
        Certification::unverified("a factor carries no Bernstein tag")
    };
    Variogram::from_parts(
        profile,
        ArgumentMode::SquaredNorm,
        a.clone(),
        d,
        cert,
        format!("schur_product_extended(alpha={alpha}, beta={beta})"),
    )
}

/// `γ(ξ) = C(0) - C(ξ)`; eventually constant when `C` has compact support.
pub fn variogram_from_covariance(c: &StationaryCovariance) -> Variogram {
    let profile = FunctionExpr::sum(vec![
        FunctionExpr::constant(c.sill()),
        FunctionExpr::scale(-1.0, c.profile().clone()),
    ]);
    let v = Variogram {
        profile,
        mode: c.mode(),
        a: c.anisotropy().clone(),
        d: c.dim(),
        certification: c.certification().clone(),
        construction: format!("variogram_from_covariance({})", c.construction()),
        plateau: None,
    };
    match c.support_radius() {
        Some(r) => v.with_plateau(c.sill(), r),
        None => v,
    }
}

/// Truncated power `C(ξ) = (1 - |ξ|/r)_+^l`, permissible in `ℝ^d` when
/// `l >= ⌊d/2⌋ + 1`; other pairs are rejected.
pub fn wendland(r: f64, l: u32, d: usize) -> Result<StationaryCovariance> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::ParameterRange {
            atom: "wendland".into(),
            name: "r".into(),
            value: r,
            range: "(0, inf)".into(),
        });
    }
    let bound = d / 2 + 1;
    if (l as usize) < bound {
        return Err(Error::Hypothesis(format!(
            "Wendland covariance needs l >= floor(d/2) + 1 = {bound} in dimension {d}, got l = {l}"
        )));
    }
    let profile = FunctionExpr::atom(crate::expr::Atom::WendlandProfile { r, l: l as f64 });
    StationaryCovariance::new(
        profile,
        ArgumentMode::Norm,
        DMatrix::identity(d, d),
        d,
        Some(r),
        Certification::up_to(2 * l as usize - 1, "truncated power with l >= floor(d/2) + 1"),
        format!("wendland(r={r}, l={l})"),
    )
}

/// Spherical variogram `1.5 h - 0.5 h³` with `h = |ξ|/range`, equal to 1
/// beyond the range. Certified for `d <= 3`.
pub fn spherical(range: f64, d: usize) -> Result<Variogram> {
    if !(range > 0.0 && range.is_finite()) {
        return Err(Error::ParameterRange {
            atom: "spherical".into(),
            name: "range".into(),
            value: range,
            range: "(0, inf)".into(),
        });
    }
    let cert = if d <= 3 {
        Certification::up_to(3, "spherical model, valid up to dimension 3")
    } else {
        Certification::unverified(format!("spherical model is only certified up to dimension 3, not {d}"))
    };
    let profile = FunctionExpr::atom(crate::expr::Atom::Spherical { range });
    Ok(Variogram::from_parts(
        profile,
        ArgumentMode::Norm,
        DMatrix::identity(d, d),
        d,
        cert,
        format!("spherical(range={range})"),
    )?
    .with_plateau(1.0, range))
}

/// Covariance `1 - spherical(|ξ|)`, supported on the ball of radius `range`.
pub fn spherical_covariance(range: f64, d: usize) -> Result<StationaryCovariance> {
    let v = spherical(range, d)?;
    let profile = FunctionExpr::sum(vec![
        FunctionExpr::constant(1.0),
        FunctionExpr::scale(-1.0, v.profile().clone()),
    ]);
    StationaryCovariance::new(
        profile,
        ArgumentMode::Norm,
        DMatrix::identity(d, d),
        d,
        Some(range),
        v.certification().clone(),
        format!("spherical_covariance(range={range})"),
    )
}

/// `C(ξ) = e^{-a|ξ|}`.
pub fn exponential_covariance(a: f64, d: usize) -> Result<StationaryCovariance> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::ParameterRange {
            atom: "exponential_covariance".into(),
            name: "a".into(),
            value: a,
            range: "(0, inf)".into(),
        });
    }
    StationaryCovariance::new(
        FunctionExpr::exp_neg(a),
        ArgumentMode::Norm,
        DMatrix::identity(d, d),
        d,
        None,
        Certification::all_dimensions("completely monotone function of |ξ|"),
        format!("exponential_covariance(a={a})"),
    )
}

/// `C(ξ) = e^{-a|ξ|²}`.
pub fn gaussian_covariance(a: f64, d: usize) -> Result<StationaryCovariance> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::ParameterRange {
            atom: "gaussian_covariance".into(),
            name: "a".into(),
            value: a,
            range: "(0, inf)".into(),
        });
    }
    StationaryCovariance::new(
        FunctionExpr::exp_neg(a),
        ArgumentMode::SquaredNorm,
        DMatrix::identity(d, d),
        d,
        None,
        Certification::all_dimensions("completely monotone function of |ξ|²"),
        format!("gaussian_covariance(a={a})"),
    )
}

/// Pure nugget: `C(0) = 1`, `C(ξ) = 0` otherwise.
pub fn nugget_covariance(d: usize) -> Result<StationaryCovariance> {
    StationaryCovariance::new(
        FunctionExpr::atom(crate::expr::Atom::Nugget),
        ArgumentMode::Norm,
        DMatrix::identity(d, d),
        d,
        Some(0.0),
        Certification::all_dimensions("identity Gram matrix"),
        "nugget_covariance",
    )
}

/// `C(ξ) = cos(wξ)` on the line.
pub fn cosine_covariance(w: f64) -> Result<StationaryCovariance> {
    StationaryCovariance::new(
        FunctionExpr::atom(crate::expr::Atom::Cos { w }),
        ArgumentMode::Norm,
        DMatrix::identity(1, 1),
        1,
        None,
        Certification::up_to(1, "cosine is positive definite on the line"),
        format!("cosine_covariance(w={w})"),
    )
}

/// `γ(ξ) = 1 - cos(wξ)` on the line.
pub fn cosine_variogram(w: f64) -> Result<Variogram> {
    Ok(variogram_from_covariance(&cosine_covariance(w)?))
}

/// Which variogram [`cbf_variograms`] derives from a complete Bernstein `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbfVariant {
    /// profile `x / g(x)`, i.e. `γ(ξ) = |ξ|² / g(|ξ|²)`
    Ratio,
    /// profile `1 / g(1/x)`
    InvArg,
    /// profile `x g(1/x)`
    InvArgRatio,
}

impl CbfVariant {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(CbfVariant::Ratio),
            "inv_arg" => Ok(CbfVariant::InvArg),
            "inv_arg_ratio" => Ok(CbfVariant::InvArgRatio),
            other => Err(Error::Parse(format!("unknown cbf variogram `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CbfVariant::Ratio => "ratio",
            CbfVariant::InvArg => "inv_arg",
            CbfVariant::InvArgRatio => "inv_arg_ratio",
        }
    }
}

/// Radial variograms from the duality `f ↦ x/f` and the inversion
/// `σ ∘ g ∘ σ` (`σ(x) = 1/x`) of a complete Bernstein function.
pub fn cbf_variograms(g: &FunctionExpr, which: CbfVariant, d: usize) -> Result<Variogram> {
    if g.is_identically_zero() {
        return Err(Error::Degenerate("g is identically zero".into()));
    }
    let sigma = FunctionExpr::reciprocal();
    let inverted = || compose(&sigma, &compose(g, &sigma));
    let profile = match which {
        CbfVariant::Ratio => dualize(g, DualRule::XOverF)?,
        CbfVariant::InvArg => inverted(),
        CbfVariant::InvArgRatio => dualize(&inverted(), DualRule::XOverF)?,
    };
    let cert = if profile.has_tag(ClassTag::CBF) {
        Certification::all_dimensions("complete Bernstein profile")
    } else {
        Certification::unverified("g carries no complete Bernstein tag")
    };
    Variogram::from_parts(
        profile,
        ArgumentMode::SquaredNorm,
        DMatrix::identity(d, d),
        d,
        cert,
        format!("cbf_variograms({})", which.name()),
    )
}

/// Two- and three-factor composition products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionVariant {
    /// `h(x) = g₁(x) g₂(x / g₁(x))`
    TwoFactor,
    /// `h(x) = g₃(g₁(x)) g₂(x / g₁(x))`
    ThreeFactor,
}

impl CompositionVariant {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "two_factor" => Ok(CompositionVariant::TwoFactor),
            "three_factor" => Ok(CompositionVariant::ThreeFactor),
            other => Err(Error::Parse(format!("unknown composition product `{other}`"))),
        }
    }
}

/// `γ₁(ξ) γ₂(ξ/√γ₁(ξ))` and `γ₃(√γ₁(ξ)) γ₂(ξ/√γ₁(ξ))` as radial profiles.
pub fn composition_products(
    g1: &FunctionExpr,
    g2: &FunctionExpr,
    g3: Option<&FunctionExpr>,
    which: CompositionVariant,
    d: usize,
) -> Result<Variogram> {
    let outer = match which {
        CompositionVariant::TwoFactor => FunctionExpr::identity(),
        CompositionVariant::ThreeFactor => g3
            .ok_or_else(|| Error::Domain("three_factor needs g3".into()))?
            .clone(),
    };
    let profile = uchiyama(&outer, g1, g2)?;
    let cert = if profile.has_tag(ClassTag::CBF) {
        Certification::all_dimensions("complete Bernstein profile")
    } else {
        Certification::unverified("an input carries no complete Bernstein tag")
    };
    let name = match which {
        CompositionVariant::TwoFactor => "two_factor",
        CompositionVariant::ThreeFactor => "three_factor",
    };
    Variogram::from_parts(
        profile,
        ArgumentMode::SquaredNorm,
        DMatrix::identity(d, d),
        d,
        cert,
        format!("composition_products({name})"),
    )
}
