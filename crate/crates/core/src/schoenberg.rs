//! Kernels of Schoenberg–Lévy type built from a base variogram, and the
//! spectral variogram `ξ ↦ -Re(iξ f(iξ))` of a Bernstein function.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{integrate_on, Atom, ExprKind, FunctionExpr, LevyMeasure};
use crate::kernel::{add, norm, sub, FnKernel, Kernel};
use crate::oracle::{log_grid, psd_matrix, PermissibilityReport};
use crate::pointset::PointSet;
use crate::quadrature::{integrate, integrate_half_line, QuadOptions};
use crate::variogram::{ArgumentMode, Certification, Variogram};

fn check_shift(gamma: &Variogram, eta: &[f64]) -> Result<()> {
    if eta.len() != gamma.dim() {
        return Err(Error::Dimension(format!(
            "shift has {} coordinates, variogram lives in ℝ^{}",
            eta.len(),
            gamma.dim()
        )));
    }
    Ok(())
}

/// Sum of `terms`, flushed to zero when it is below the rounding error of
/// the summation, so that exact cancellations stay exact.
fn cancel(terms: &[f64]) -> f64 {
    let s: f64 = terms.iter().sum();
    let size: f64 = terms.iter().map(|t| t.abs()).sum();
    if s.abs() <= 8.0 * f64::EPSILON * size {
        0.0
    } else {
        s
    }
}

/// A base variogram with a fixed shift `η`, giving the covariance
/// `γ_η(ξ) = γ(ξ+η) + γ(ξ-η) - 2γ(ξ)` and the variogram
/// `φ_η(ξ) = 2γ(η) + 2γ(ξ) - γ(ξ+η) - γ(ξ-η)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftKernelPair {
    base: Variogram,
    eta: Vec<f64>,
}

impl ShiftKernelPair {
    pub fn new(base: &Variogram, eta: &[f64]) -> Result<Self> {
        check_shift(base, eta)?;
        Ok(ShiftKernelPair {
            base: base.clone(),
            eta: eta.to_vec(),
        })
    }

    pub fn base(&self) -> &Variogram {
        &self.base
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn difference(&self, xi: &[f64]) -> Result<f64> {
        let g = &self.base;
        Ok(cancel(&[
            g.eval(&add(xi, &self.eta))?,
            g.eval(&sub(xi, &self.eta))?,
            -2.0 * g.eval(xi)?,
        ]))
    }

    pub fn sum(&self, xi: &[f64]) -> Result<f64> {
        let g = &self.base;
        Ok(cancel(&[
            2.0 * g.eval(&self.eta)?,
            2.0 * g.eval(xi)?,
            -g.eval(&add(xi, &self.eta))?,
            -g.eval(&sub(xi, &self.eta))?,
        ]))
    }

    pub fn difference_kernel(&self) -> DifferenceKernel {
        DifferenceKernel(self.clone())
    }

    pub fn sum_kernel(&self) -> SumKernel {
        SumKernel(self.clone())
    }
}

/// `ξ ↦ γ(ξ+η) + γ(ξ-η) - 2γ(ξ)`; a covariance when `γ` is a variogram.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceKernel(ShiftKernelPair);

impl DifferenceKernel {
    pub fn pair(&self) -> &ShiftKernelPair {
        &self.0
    }
}

impl Kernel for DifferenceKernel {
    fn dim(&self) -> usize {
        self.0.base.dim()
    }

    fn eval(&self, xi: &[f64]) -> Result<f64> {
        self.0.difference(xi)
    }
}

/// `ξ ↦ 2γ(η) + 2γ(ξ) - γ(ξ+η) - γ(ξ-η)`; a variogram in `ξ` and, by the
/// symmetry `φ_η(ξ) = φ_ξ(η)`, in `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumKernel(ShiftKernelPair);

impl SumKernel {
    pub fn pair(&self) -> &ShiftKernelPair {
        &self.0
    }

    /// The same kernel read as a function of the shift, for fixed `ξ`.
    pub fn in_shift(&self, xi: &[f64]) -> Result<SumKernel> {
        Ok(SumKernel(ShiftKernelPair::new(&self.0.base, xi)?))
    }
}

impl Kernel for SumKernel {
    fn dim(&self) -> usize {
        self.0.base.dim()
    }

    fn eval(&self, xi: &[f64]) -> Result<f64> {
        self.0.sum(xi)
    }
}

/// `ξ ↦ γ(ξ+η) + γ(ξ-η) - 2γ(ξ)`.
pub fn difference_kernel(gamma: &Variogram, eta: &[f64]) -> Result<DifferenceKernel> {
    Ok(ShiftKernelPair::new(gamma, eta)?.difference_kernel())
}

/// `ξ ↦ 2γ(η) + 2γ(ξ) - γ(ξ+η) - γ(ξ-η)`.
pub fn sum_kernel(gamma: &Variogram, eta: &[f64]) -> Result<SumKernel> {
    Ok(ShiftKernelPair::new(gamma, eta)?.sum_kernel())
}

/// `C_{ξ₀}(ξ) = g(|ξ+ξ₀|) + g(|ξ-ξ₀|) - 2g(|ξ|)`, evaluated directly from
/// the scalar function `g`.
pub fn ma_shift_covariance(g: &FunctionExpr, xi0: &[f64]) -> FnKernel {
    let g = g.clone();
    let xi0 = xi0.to_vec();
    FnKernel::new(xi0.len(), move |xi| {
        Ok(g.eval(norm(&add(xi, &xi0)))? + g.eval(norm(&sub(xi, &xi0)))? - 2.0 * g.eval(norm(xi))?)
    })
}

/// `K(ξ₁, ξ₂) = g(|ξ₁|) + g(|ξ₂|) - g(|ξ₁ - ξ₂|)` for `g(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonstationaryKernel {
    g: FunctionExpr,
}

impl NonstationaryKernel {
    pub fn new(g: &FunctionExpr) -> Result<Self> {
        let g0 = g.eval(0.0)?;
        if g0 != 0.0 {
            return Err(Error::Hypothesis(format!("g(0) must be 0, got {g0}")));
        }
        Ok(NonstationaryKernel { g: g.clone() })
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::Dimension("arguments of different dimension".into()));
        }
        Ok(self.g.eval(norm(a))? + self.g.eval(norm(b))? - self.g.eval(norm(&sub(a, b)))?)
    }

    /// `K(ξ_i, ξ_j)` over the sites.
    pub fn gram(&self, pts: &PointSet) -> Result<DMatrix<f64>> {
        let n = pts.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.eval(pts.site(i), pts.site(j))?;
            }
        }
        Ok(m)
    }

    /// Positive semi-definiteness of the Gram matrix.
    pub fn gram_check(&self, pts: &PointSet, tol: f64) -> Result<PermissibilityReport> {
        let m = self.gram(pts)?;
        Ok(PermissibilityReport::from_checks(vec![psd_matrix("gram_psd", &m, tol)]))
    }
}

/// [`NonstationaryKernel::new`].
pub fn nonstationary_kernel(g: &FunctionExpr) -> Result<NonstationaryKernel> {
    NonstationaryKernel::new(g)
}

#[derive(Clone, PartialEq)]
enum Mu {
    /// No jump part.
    Zero,
    /// `μ(s) = e^{-s}(1/s + 1/s²)`
    Log1p,
    /// `μ(s) = c s^{-2-a}`
    Power { c: f64, a: f64 },
    /// `μ(s) = λ³ e^{-λs}`
    LambdaRatio { lambda: f64 },
    /// `μ = -m'` by finite differences of the Lévy density `m`.
    Numeric { m: FunctionExpr },
}

/// Precomputed data of a spectral variogram
/// `γ(ξ) = b ξ² + ∫ (1 - cos ξs) μ(ds)`, where `b` is the drift of `f` and
/// `μ[t, ∞) = m(t)` is recovered from the decreasing Lévy density `m`.
#[derive(Clone)]
pub struct SpectralData {
    base: FunctionExpr,
    drift: f64,
    mu: Mu,
}

impl PartialEq for SpectralData {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
    }
}

impl fmt::Debug for SpectralData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpectralData({})", self.base)
    }
}

fn numeric_mu(m: &FunctionExpr, s: f64) -> Result<f64> {
    // five-point stencil for -m'(s) with a relative step
    let h = 1e-3 * s;
    let d = -m.eval(s + 2.0 * h)? + 8.0 * m.eval(s + h)? - 8.0 * m.eval(s - h)? + m.eval(s - 2.0 * h)?;
    Ok(-d / (12.0 * h))
}

impl SpectralData {
    pub fn base(&self) -> &FunctionExpr {
        &self.base
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// Density of `μ` at `s > 0`.
    pub fn mu(&self, s: f64) -> Result<f64> {
        Ok(match &self.mu {
            Mu::Zero => 0.0,
            Mu::Log1p => (-s).exp() * (1.0 / s + 1.0 / (s * s)),
            Mu::Power { c, a } => c * s.powf(-2.0 - a),
            Mu::LambdaRatio { lambda } => lambda.powi(3) * (-lambda * s).exp(),
            Mu::Numeric { m } => numeric_mu(m, s)?,
        })
    }

    /// `μ[s, ∞)`.
    fn tail_mass(&self, s: f64) -> Result<f64> {
        Ok(match &self.mu {
            Mu::Zero => 0.0,
            Mu::Log1p => (-s).exp() / s,
            Mu::Power { c, a } => c * s.powf(-1.0 - a) / (1.0 + a),
            Mu::LambdaRatio { lambda } => lambda * lambda * (-lambda * s).exp(),
            Mu::Numeric { m } => m.eval(s)?,
        })
    }

    /// `∫ (1 - cos ξs) μ(ds)`.
    fn jump_part(&self, xi: f64) -> Result<f64> {
        if xi == 0.0 || matches!(self.mu, Mu::Zero) {
            return Ok(0.0);
        }
        let g = |s: f64| -> Result<f64> {
            let h = (0.5 * xi * s).sin();
            Ok(2.0 * h * h * self.mu(s)?)
        };
        let near = integrate_on(g, 0.0, 1.0)?;

        // cut where the remaining mass is negligible, or at 64
        let m1 = self.tail_mass(1.0)?;
        let mut cut = 1.0;
        while cut < 64.0 && self.tail_mass(cut)? > 1e-15 * m1 {
            cut *= 2.0;
        }
        let opts = QuadOptions {
            abs_tol: 1e-15 * m1.max(f64::MIN_POSITIVE),
            rel_tol: 1e-12,
            max_segments: 4000,
        };
        let (middle, _) = integrate(g, 1.0, cut, opts)?;
        let tail_mass = self.tail_mass(cut)?;
        let cos_tail = if tail_mass > 1e-15 * m1 {
            self.cos_tail(xi, cut)?
        } else {
            0.0
        };
        Ok(near + middle + tail_mass - cos_tail)
    }

    /// `∫_S^∞ cos(ξs) μ(s) ds` over half periods between zeros of the
    /// cosine, accelerated by repeated averaging of the partial sums.
    fn cos_tail(&self, xi: f64, start: f64) -> Result<f64> {
        let half = std::f64::consts::PI / xi;
        let first_zero = ((start / half - 0.5).ceil() + 0.5) * half;
        let f = |s: f64| -> Result<f64> { Ok((xi * s).cos() * self.mu(s)?) };
        let opts = QuadOptions::default();
        let (lead, _) = integrate(f, start, first_zero, opts)?;
        let mut partial = Vec::with_capacity(60);
        let mut acc = lead;
        for k in 0..60 {
            let a = first_zero + k as f64 * half;
            let (v, _) = integrate(f, a, a + half, opts)?;
            acc += v;
            partial.push(acc);
        }
        while partial.len() > 1 {
            partial = partial.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        Ok(partial[0])
    }

    /// `γ(ξ) = b ξ² + ∫ (1 - cos ξs) μ(ds)` at `|ξ|`.
    pub fn value(&self, xi: f64) -> Result<f64> {
        let x = xi.abs();
        Ok(self.drift * x * x + self.jump_part(x)?)
    }
}

fn closed_mu(f: &FunctionExpr) -> Option<Mu> {
    match f.kind() {
        ExprKind::Atom(Atom::Log1p) => Some(Mu::Log1p),
        ExprKind::Atom(Atom::Power { a }) | ExprKind::Atom(Atom::Monomial { p: a })
            if *a > 0.0 && *a < 1.0 =>
        {
            // m(t) = a/Γ(1-a) t^{-1-a}, so μ(s) = (1+a) a/Γ(1-a) s^{-2-a}
            let c = a / statrs::function::gamma::gamma(1.0 - a);
            Some(Mu::Power { c: c * (1.0 + a), a: *a })
        }
        ExprKind::Atom(Atom::LambdaRatio { lambda }) => Some(Mu::LambdaRatio { lambda: *lambda }),
        _ => None,
    }
}

/// Validates the hypotheses of the spectral construction for `f` and
/// returns the profile `r ↦ -Re(i r f(i r))`.
///
/// `f` must carry Lévy–Khinchine data whose measure is absent or has a
/// density `m` on `(0, ∞)` that is nonnegative and decreasing on a log grid
/// over `[1e-4, 1e4]`; `μ = -m'` must satisfy `∫ s² ∧ s μ(ds) < ∞`.
pub fn spectral_profile(f: &FunctionExpr) -> Result<FunctionExpr> {
    let triple = f.levy_triple().ok_or_else(|| {
        Error::Hypothesis(format!("{f} has no Lévy–Khinchine representation on record"))
    })?;
    let mu = match triple.measure() {
        LevyMeasure::Atoms(atoms) if atoms.iter().all(|&(_, m)| m == 0.0) => Mu::Zero,
        LevyMeasure::Atoms(_) => {
            return Err(Error::Hypothesis(
                "Lévy measure has point masses, not a decreasing density".into(),
            ))
        }
        LevyMeasure::Density { density, domain } => {
            if domain.0 != 0.0 || domain.1.is_finite() {
                return Err(Error::Hypothesis(
                    "Lévy density must be given on the whole half-line".into(),
                ));
            }
            let grid = log_grid(1e-4, 1e4, 200);
            let values: Vec<f64> = grid.iter().map(|&t| density.eval(t)).collect::<Result<_>>()?;
            if let Some(i) = values.iter().position(|v| *v < 0.0) {
                return Err(Error::Hypothesis(format!(
                    "Lévy density is negative at t = {}",
                    grid[i]
                )));
            }
            if let Some(i) = values
                .windows(2)
                .position(|w| w[1] > w[0] + 1e-12 * w[0].abs())
            {
                return Err(Error::Hypothesis(format!(
                    "Lévy density increases between t = {} and t = {}",
                    grid[i],
                    grid[i + 1]
                )));
            }
            closed_mu(f).unwrap_or(Mu::Numeric { m: density.clone() })
        }
    };
    let data = SpectralData {
        base: f.clone(),
        drift: triple.alpha(),
        mu,
    };
    if !matches!(data.mu, Mu::Zero) {
        let moment = integrate_half_line(|s| Ok(s.min(s * s) * data.mu(s)?)).map_err(|e| {
            Error::Levy(format!("recovered measure fails ∫ s² ∧ s μ(ds) < ∞: {e}"))
        })?;
        if !moment.is_finite() {
            return Err(Error::Levy("∫ s² ∧ s μ(ds) is not finite".into()));
        }
    }
    Ok(FunctionExpr::spectral_node(data))
}

/// The spectral variogram on the line, `ξ ↦ -Re(iξ f(iξ))`.
///
/// The drift of `f` contributes `b ξ²`; the constant term contributes
/// nothing.
pub fn spectral_variogram(f: &FunctionExpr) -> Result<Variogram> {
    let profile = spectral_profile(f)?;
    Variogram::from_parts(
        profile,
        ArgumentMode::Norm,
        DMatrix::identity(1, 1),
        1,
        Certification::up_to(1, "spectral variogram of a Bernstein function with decreasing Lévy density"),
        format!("spectral_variogram({f})"),
    )
}

/// `-Re(iξ f(iξ))` by complex arithmetic, for atoms with an analytic
/// continuation on record.
pub fn spectral_closed_form(f: &FunctionExpr, xi: f64) -> Option<f64> {
    let z = Complex64::new(0.0, xi.abs());
    let fz = match f.kind() {
        ExprKind::Atom(Atom::Log1p) => (Complex64::new(1.0, 0.0) + z).ln(),
        ExprKind::Atom(Atom::Power { a }) => {
            if xi == 0.0 {
                return Some(0.0);
            }
            z.powf(*a)
        }
        ExprKind::Atom(Atom::LambdaRatio { lambda }) => z * *lambda / (z + *lambda),
        ExprKind::Atom(Atom::Constant { c }) => Complex64::new(*c, 0.0),
        _ => return None,
    };
    Some(-(z * fz).re)
}

/// Gram matrix `K(ξ_i, ξ_j)` of a binary kernel given as a closure.
pub fn binary_gram<F: Fn(&[f64], &[f64]) -> Result<f64>>(k: F, pts: &PointSet) -> Result<DMatrix<f64>> {
    let n = pts.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = k(pts.site(i), pts.site(j))?;
        }
    }
    Ok(m)
}

/// `aᵀ M a` helper used by witnesses of binary kernels.
pub fn quadratic(m: &DMatrix<f64>, a: &[f64]) -> f64 {
    let v = DVector::from_column_slice(a);
    v.dot(&(m * &v))
}
