//! Numerical permissibility checks.
//!
//! Every check returns a [`PermissibilityReport`] listing each sub-check
//! with its worst statistic, the tolerance it was held to and, on failure,
//! a witness that reproduces the violation. Tolerances are relative to a
//! stated scale (usually the largest absolute matrix entry or grid value),
//! so multiplying a kernel by a positive constant never changes a verdict.
//! Evaluation failures produce an `Inconclusive` verdict; near-tolerance
//! statistics are always resolved by their sign.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{add, sub, Kernel};
use crate::pointset::PointSet;
use crate::variogram::Variogram;

/// Default relative tolerance for matrix checks.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    /// CLI exit status: 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Evidence attached to a failed check.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// Weights `a` (summing to zero for conditional checks) with the value
    /// of the quadratic form `aᵀ M a`.
    Contrast { a: Vec<f64>, quadratic_form: f64 },
    /// A divided difference of the given order starting at grid index `index`.
    Grid {
        order: usize,
        index: usize,
        x: f64,
        value: f64,
    },
    /// A pair of arguments violating a two-point inequality.
    Pair {
        xi: Vec<f64>,
        eta: Vec<f64>,
        lhs: f64,
        rhs: f64,
    },
    /// A single argument with the offending value.
    Point { x: Vec<f64>, value: f64 },
}

/// One sub-check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub verdict: Verdict,
    /// Worst value of the tested statistic; a violation means it exceeds `tolerance`.
    pub statistic: f64,
    pub tolerance: f64,
    pub scale: f64,
    pub witness: Option<Witness>,
    pub detail: String,
}

impl CheckRecord {
    fn judged(name: &str, statistic: f64, tolerance: f64, scale: f64, witness: Option<Witness>) -> Self {
        let pass = statistic <= tolerance;
        CheckRecord {
            name: name.to_string(),
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            statistic,
            tolerance,
            scale,
            witness: if pass { None } else { witness },
            detail: String::new(),
        }
    }

    fn inconclusive(name: &str, err: &Error) -> Self {
        CheckRecord {
            name: name.to_string(),
            verdict: Verdict::Inconclusive,
            statistic: f64::NAN,
            tolerance: f64::NAN,
            scale: f64::NAN,
            witness: None,
            detail: err.to_string(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Aggregated verdict of one or more checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermissibilityReport {
    pub verdict: Verdict,
    pub checks: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl PermissibilityReport {
    pub fn from_checks(checks: Vec<CheckRecord>) -> Self {
        let verdict = checks
            .iter()
            .fold(Verdict::Pass, |acc, c| acc.combine(c.verdict));
        PermissibilityReport {
            verdict,
            checks,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn merge(mut self, other: PermissibilityReport) -> Self {
        self.verdict = self.verdict.combine(other.verdict);
        self.checks.extend(other.checks);
        self.seed = self.seed.or(other.seed);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    /// The first witness among failed checks.
    pub fn witness(&self) -> Option<&Witness> {
        self.checks.iter().find_map(|c| c.witness.as_ref())
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn validate_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("tolerance must be positive, got {tol}")))
    }
}

fn dimension_match<K: Kernel + ?Sized>(k: &K, pts: &PointSet) -> Result<()> {
    if k.dim() != pts.dim() {
        return Err(Error::Dimension(format!(
            "kernel acts on ℝ^{}, points live in ℝ^{}",
            k.dim(),
            pts.dim()
        )));
    }
    Ok(())
}

/// `M_ij = k(ξ_i - ξ_j)`.
pub fn kernel_matrix<K: Kernel + ?Sized>(k: &K, pts: &PointSet) -> Result<DMatrix<f64>> {
    dimension_match(k, pts)?;
    let n = pts.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = k.eval(&sub(pts.site(i), pts.site(j)))?;
        }
    }
    Ok(m)
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Orthonormal basis of `{a : Σ a_i = 0}` from the columns `e_i - e_n`.
pub fn contrast_basis(n: usize) -> DMatrix<f64> {
    assert!(n >= 2);
    let mut e = DMatrix::zeros(n, n - 1);
    for i in 0..n - 1 {
        e[(i, i)] = 1.0;
        e[(n - 1, i)] = -1.0;
    }
    e.qr().q()
}

fn quadratic_form(m: &DMatrix<f64>, a: &DVector<f64>) -> f64 {
    a.dot(&(m * a))
}

fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Conditional negative definiteness of `γ` on `pts`.
///
/// The symmetric part of `Γ_ij = γ(ξ_i - ξ_j)` is restricted to the
/// zero-sum subspace through an orthonormal contrast basis `B`; the check
/// passes when the largest eigenvalue of `Bᵀ Γ B` is at most
/// `tol · max|Γ_ij|`. A failure returns the top eigenvector mapped back to
/// a contrast `a = B v`.
pub fn cnd_check<K: Kernel + ?Sized>(gamma: &K, pts: &PointSet, tol: f64) -> Result<PermissibilityReport> {
    validate_tol(tol)?;
    if pts.len() < 2 {
        return Err(Error::Dimension("conditional checks need at least two sites".into()));
    }
    let g = match kernel_matrix(gamma, pts) {
        Ok(g) => g,
        Err(e @ Error::Dimension(_)) => return Err(e),
        Err(e) => {
            return Ok(PermissibilityReport::from_checks(vec![CheckRecord::inconclusive("cnd", &e)]))
        }
    };
    Ok(PermissibilityReport::from_checks(vec![cnd_matrix(&g, tol)]))
}

/// [`cnd_check`] on a precomputed matrix.
pub fn cnd_matrix(g: &DMatrix<f64>, tol: f64) -> CheckRecord {
    let n = g.nrows();
    let scale = max_abs(g);
    let b = contrast_basis(n);
    let s = symmetric_part(g);
    let r = symmetric_part(&(b.transpose() * &s * &b));
    let eig = SymmetricEigen::new(r);
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("n >= 2");
    let a = &b * eig.eigenvectors.column(k);
    let q = quadratic_form(g, &a);
    CheckRecord::judged(
        "cnd",
        lambda,
        tol * scale,
        scale,
        Some(Witness::Contrast {
            a: a.iter().copied().collect(),
            quadratic_form: q,
        }),
    )
    .with_detail(format!("largest contrast-subspace eigenvalue over {n} sites"))
}

/// Positive semi-definiteness of `C_ij = C(ξ_i - ξ_j)`: passes when the
/// smallest eigenvalue of the symmetric part is at least `-tol · max|C_ij|`.
pub fn pd_check<K: Kernel + ?Sized>(c: &K, pts: &PointSet, tol: f64) -> Result<PermissibilityReport> {
    validate_tol(tol)?;
    if pts.is_empty() {
        return Err(Error::Dimension("no sites".into()));
    }
    let m = match kernel_matrix(c, pts) {
        Ok(m) => m,
        Err(e @ Error::Dimension(_)) => return Err(e),
        Err(e) => return Ok(PermissibilityReport::from_checks(vec![CheckRecord::inconclusive("pd", &e)])),
    };
    Ok(PermissibilityReport::from_checks(vec![psd_matrix("pd", &m, tol)]))
}

/// Smallest-eigenvalue test on an explicit symmetric matrix.
pub fn psd_matrix(name: &str, m: &DMatrix<f64>, tol: f64) -> CheckRecord {
    let scale = max_abs(m);
    let eig = SymmetricEigen::new(symmetric_part(m));
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty");
    let v = eig.eigenvectors.column(k).into_owned();
    let q = quadratic_form(m, &v);
    CheckRecord::judged(
        name,
        -lambda,
        tol * scale,
        scale,
        Some(Witness::Contrast {
            a: v.iter().copied().collect(),
            quadratic_form: q,
        }),
    )
    .with_detail(format!("negated smallest eigenvalue over {} sites", m.nrows()))
}

/// The three variogram axioms: `γ(0) >= 0`, evenness on the pairwise
/// differences, and conditional negative definiteness.
pub fn variogram_axioms<K: Kernel + ?Sized>(gamma: &K, pts: &PointSet, tol: f64) -> Result<PermissibilityReport> {
    validate_tol(tol)?;
    let g = match kernel_matrix(gamma, pts) {
        Ok(g) => g,
        Err(e @ Error::Dimension(_)) => return Err(e),
        Err(e) => {
            return Ok(PermissibilityReport::from_checks(vec![CheckRecord::inconclusive(
                "variogram_axioms",
                &e,
            )]))
        }
    };
    let zero = vec![0.0; pts.dim()];
    let g0 = match gamma.eval(&zero) {
        Ok(v) => v,
        Err(e) => {
            return Ok(PermissibilityReport::from_checks(vec![CheckRecord::inconclusive(
                "value_at_zero",
                &e,
            )]))
        }
    };
    let scale = max_abs(&g).max(g0.abs());
    let mut checks = vec![CheckRecord::judged(
        "value_at_zero",
        -g0,
        tol * scale,
        scale,
        Some(Witness::Point {
            x: zero,
            value: g0,
        }),
    )];

    let n = pts.len();
    let mut worst = (0.0f64, 0, 0);
    for i in 0..n {
        for j in 0..n {
            let d = (g[(i, j)] - g[(j, i)]).abs();
            if d > worst.0 {
                worst = (d, i, j);
            }
        }
    }
    let (_, i, j) = worst;
    let xi = sub(pts.site(i), pts.site(j));
    checks.push(CheckRecord::judged(
        "evenness",
        worst.0,
        tol * scale,
        scale,
        Some(Witness::Pair {
            eta: xi.iter().map(|v| -v).collect(),
            xi,
            lhs: g[(i, j)],
            rhs: g[(j, i)],
        }),
    ));
    if n >= 2 {
        checks.push(cnd_matrix(&g, tol));
    }
    Ok(PermissibilityReport::from_checks(checks))
}

/// A scalar function on a grid, used by the shape checks.
pub trait Profile: Sync {
    fn value(&self, x: f64) -> Result<f64>;
}

impl<F: Fn(f64) -> Result<f64> + Sync> Profile for F {
    fn value(&self, x: f64) -> Result<f64> {
        self(x)
    }
}

impl Profile for crate::expr::FunctionExpr {
    fn value(&self, x: f64) -> Result<f64> {
        self.eval(x)
    }
}

fn sample<P: Profile + ?Sized>(f: &P, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter().map(|&x| f.value(x)).collect()
}

fn validate_grid(grid: &[f64], min_len: usize) -> Result<()> {
    if grid.len() < min_len {
        return Err(Error::Dimension(format!(
            "grid needs at least {min_len} points, got {}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Geometric grid of `n` points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Uniform grid of `n` points from `lo` to `hi`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Divided difference `f[x_i, ..., x_{i+k}]` as `Σ w_j f_j`, together with
/// the magnitude `Σ |w_j f_j|` that bounds its rounding error.
fn divided_difference(xs: &[f64], fs: &[f64], i: usize, k: usize) -> (f64, f64) {
    let mut value = 0.0;
    let mut scale = 0.0;
    for j in i..=i + k {
        let mut w = 1.0;
        for m in i..=i + k {
            if m != j {
                w /= xs[j] - xs[m];
            }
        }
        let t = w * fs[j];
        value += t;
        scale += t.abs();
    }
    (value, scale)
}

/// Checks `(-1)^{k - shift} f[x_i..x_{i+k}] >= -tol · scale` for each order.
fn alternating_orders(
    name: &str,
    xs: &[f64],
    fs: &[f64],
    orders: std::ops::RangeInclusive<usize>,
    shift: usize,
    tol: f64,
) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    for k in orders {
        if k + 1 > xs.len() {
            break;
        }
        // worst normalized violation for this order
        let mut worst = (f64::NEG_INFINITY, 0usize, 0.0f64, 0.0f64);
        for i in 0..xs.len() - k {
            let (d, s) = divided_difference(xs, fs, i, k);
            let signed = if (k - shift).is_multiple_of(2) { d } else { -d };
            let violation = if s > 0.0 { -signed / s } else { 0.0 };
            if violation > worst.0 {
                worst = (violation, i, d, s);
            }
        }
        let (violation, i, d, s) = worst;
        out.push(
            CheckRecord::judged(
                &format!("{name}_order_{k}"),
                violation,
                tol,
                s,
                Some(Witness::Grid {
                    order: k,
                    index: i,
                    x: xs[i],
                    value: d,
                }),
            )
            .with_detail("sign-corrected divided difference, relative to its term magnitude"),
        );
    }
    out
}

/// Complete monotonicity on a grid: `(-1)^k f[x_i..x_{i+k}] >= -tol · scale`
/// for orders `0..=max_order`, where `scale` is the sum of the magnitudes of
/// the terms forming the divided difference.
pub fn cm_check<P: Profile + ?Sized>(f: &P, grid: &[f64], max_order: usize, tol: f64) -> Result<PermissibilityReport> {
    validate_tol(tol)?;
    validate_grid(grid, 2)?;
    if max_order < 1 {
        return Err(Error::Domain("max_order must be at least 1".into()));
    }
    let fs = match sample(f, grid) {
        Ok(v) => v,
        Err(e) => return Ok(PermissibilityReport::from_checks(vec![CheckRecord::inconclusive("cm", &e)])),
    };
    Ok(PermissibilityReport::from_checks(alternating_orders(
        "cm",
        grid,
        &fs,
        0..=max_order,
        0,
        tol,
    )))
}

/// Bernstein property on a grid: `f >= -tol · max|f|` and the first
/// difference quotients are completely monotone up to `max_order`, i.e.
/// `(-1)^{m-1} f[x_i..x_{i+m}] >= -tol · scale` for `m = 1..=max_order + 1`.
pub fn bernstein_check<P: Profile + ?Sized>(
    f: &P,
    grid: &[f64],
    max_order: usize,
    tol: f64,
) -> Result<PermissibilityReport> {
    validate_tol(tol)?;
    validate_grid(grid, 2)?;
    let fs = match sample(f, grid) {
        Ok(v) => v,
        Err(e) => {
            return Ok(PermissibilityReport::from_checks(vec![CheckRecord::inconclusive(
                "bernstein",
                &e,
            )]))
        }
    };
    let scale = fs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let (i, &min) = fs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let mut checks = vec![CheckRecord::judged(
        "nonnegative",
        -min,
        tol * scale,
        scale,
        Some(Witness::Grid {
            order: 0,
            index: i,
            x: grid[i],
            value: min,
        }),
    )];
    checks.extend(alternating_orders(
        "derivative_cm",
        grid,
        &fs,
        1..=max_order + 1,
        1,
        tol,
    ));
    Ok(PermissibilityReport::from_checks(checks))
}

fn worst_of<I: Iterator<Item = (f64, Witness)>>(name: &str, items: I, tol: f64, scale: f64) -> CheckRecord {
    let mut worst: Option<(f64, Witness)> = None;
    for (v, w) in items {
        if worst.as_ref().is_none_or(|(b, _)| v > *b) {
            worst = Some((v, w));
        }
    }
    match worst {
        Some((v, w)) => CheckRecord::judged(name, v, tol * scale, scale, Some(w)),
        None => CheckRecord::judged(name, 0.0, tol * scale, scale, None),
    }
}

fn pair(a: f64, b: f64, lhs: f64, rhs: f64) -> Witness {
    Witness::Pair {
        xi: vec![a],
        eta: vec![b],
        lhs,
        rhs,
    }
}

/// Pólya's sufficient conditions for positive definiteness on the line:
/// evenness, nonnegativity, decrease and midpoint convexity on `(0, ∞)`.
pub fn polya_check<P: Profile + ?Sized>(phi: &P, grid: &[f64], tol: f64) -> Result<PermissibilityReport> {
    validate_tol(tol)?;
    validate_grid(grid, 3)?;
    if grid[0] < 0.0 {
        return Err(Error::Domain("Pólya grid must lie in [0, ∞)".into()));
    }
    let run = || -> Result<Vec<CheckRecord>> {
        let pos = sample(phi, grid)?;
        let neg: Vec<f64> = grid.iter().map(|&x| phi.value(-x)).collect::<Result<_>>()?;
        let scale = pos.iter().chain(&neg).fold(0.0f64, |a, v| a.max(v.abs()));
        let n = grid.len();
        let even = worst_of(
            "evenness",
            (0..n).map(|i| ((pos[i] - neg[i]).abs(), pair(grid[i], -grid[i], pos[i], neg[i]))),
            tol,
            scale,
        );
        let nonneg = worst_of(
            "nonnegative",
            (0..n).map(|i| {
                (
                    -pos[i],
                    Witness::Point {
                        x: vec![grid[i]],
                        value: pos[i],
                    },
                )
            }),
            tol,
            scale,
        );
        let decreasing = worst_of(
            "decreasing",
            (0..n - 1).map(|i| (pos[i + 1] - pos[i], pair(grid[i], grid[i + 1], pos[i], pos[i + 1]))),
            tol,
            scale,
        );
        let mut convex = Vec::new();
        for step in [1, 2] {
            for i in 0..n.saturating_sub(step) {
                let (a, b) = (grid[i], grid[i + step]);
                let mid = phi.value(0.5 * (a + b))?;
                let chord = 0.5 * (pos[i] + pos[i + step]);
                convex.push((mid - chord, pair(a, b, mid, chord)));
            }
        }
        let convex = worst_of("midpoint_convex", convex.into_iter(), tol, scale);
        Ok(vec![even, nonneg, decreasing, convex])
    };
    Ok(match run() {
        Ok(checks) => PermissibilityReport::from_checks(checks),
        Err(e) => PermissibilityReport::from_checks(vec![CheckRecord::inconclusive("polya", &e)]),
    })
}

/// Shape of a radial profile `f` with `γ(ξ) = f(|ξ|²)`: increasing,
/// midpoint concave and subadditive over grid pairs.
pub fn profile_shape_check<P: Profile + ?Sized>(f: &P, grid: &[f64], tol: f64) -> Result<PermissibilityReport> {
    validate_tol(tol)?;
    validate_grid(grid, 3)?;
    if grid[0] < 0.0 {
        return Err(Error::Domain("profile grid must lie in [0, ∞)".into()));
    }
    let run = || -> Result<Vec<CheckRecord>> {
        let fs = sample(f, grid)?;
        let n = grid.len();
        let mut sums = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let s = grid[i] + grid[j];
                sums.push((i, j, f.value(s)?));
            }
        }
        let scale = fs
            .iter()
            .chain(sums.iter().map(|t| &t.2))
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let increasing = worst_of(
            "increasing",
            (0..n - 1).map(|i| (fs[i] - fs[i + 1], pair(grid[i], grid[i + 1], fs[i], fs[i + 1]))),
            tol,
            scale,
        );
        let mut concave = Vec::new();
        for step in [1, 2] {
            for i in 0..n.saturating_sub(step) {
                let (a, b) = (grid[i], grid[i + step]);
                let mid = f.value(0.5 * (a + b))?;
                let chord = 0.5 * (fs[i] + fs[i + step]);
                concave.push((chord - mid, pair(a, b, mid, chord)));
            }
        }
        let concave = worst_of("midpoint_concave", concave.into_iter(), tol, scale);
        let subadditive = worst_of(
            "subadditive",
            sums.iter()
                .map(|&(i, j, v)| (v - fs[i] - fs[j], pair(grid[i], grid[j], v, fs[i] + fs[j]))),
            tol,
            scale,
        );
        Ok(vec![increasing, concave, subadditive])
    };
    Ok(match run() {
        Ok(checks) => PermissibilityReport::from_checks(checks),
        Err(e) => PermissibilityReport::from_checks(vec![CheckRecord::inconclusive("profile_shape", &e)]),
    })
}

/// `√γ(ξ + η) <= √γ(ξ) + √γ(η) + tol · √scale` over all ordered pairs of
/// sites (including `ξ = η`), with `scale = max γ` on the tested arguments.
pub fn sqrt_subadditivity_check<K: Kernel + ?Sized>(
    gamma: &K,
    pts: &PointSet,
    tol: f64,
) -> Result<PermissibilityReport> {
    validate_tol(tol)?;
    dimension_match(gamma, pts)?;
    let run = || -> Result<CheckRecord> {
        let n = pts.len();
        let single: Vec<f64> = pts.sites().iter().map(|s| gamma.eval(s)).collect::<Result<_>>()?;
        if let Some(i) = single.iter().position(|v| *v < 0.0) {
            return Err(Error::Domain(format!("γ(ξ_{i}) = {} < 0", single[i])));
        }
        let mut items = Vec::new();
        let mut scale = single.iter().fold(0.0f64, |a, v| a.max(*v));
        for i in 0..n {
            for j in i..n {
                let s = gamma.eval(&add(pts.site(i), pts.site(j)))?;
                if s < 0.0 {
                    return Err(Error::Domain(format!("γ(ξ + η) = {s} < 0")));
                }
                scale = scale.max(s);
                let lhs = s.sqrt();
                let rhs = single[i].sqrt() + single[j].sqrt();
                items.push((
                    lhs - rhs,
                    Witness::Pair {
                        xi: pts.site(i).to_vec(),
                        eta: pts.site(j).to_vec(),
                        lhs,
                        rhs,
                    },
                ));
            }
        }
        Ok(worst_of("sqrt_subadditive", items.into_iter(), tol, scale.sqrt()))
    };
    Ok(match run() {
        Ok(c) => PermissibilityReport::from_checks(vec![c]),
        Err(e) => PermissibilityReport::from_checks(vec![CheckRecord::inconclusive("sqrt_subadditive", &e)]),
    })
}

/// A detected period with the worst shift-invariance residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Period {
    pub vector: Vec<f64>,
    pub residual: f64,
    pub tolerance: f64,
}

fn golden_min<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Looks for `y ≠ 0` with `γ(y) = γ(0)` along each coordinate axis within
/// `search_radius`.
///
/// A uniform scan of 4000 steps per axis locates local minima of
/// `|γ(t e) - γ(0)|`; each is refined by golden-section search and accepted
/// when the residual is at most `tol · scale`. The candidate is returned only
/// if `|γ(ξ + y) - γ(ξ)| <= 10 · tol · scale` at test points spread over
/// `[-R, R]` along every axis.
pub fn detect_period<K: Kernel + ?Sized>(gamma: &K, search_radius: f64, tol: f64) -> Result<Option<Period>> {
    validate_tol(tol)?;
    if !(search_radius > 0.0) {
        return Err(Error::Domain("search radius must be positive".into()));
    }
    let d = gamma.dim();
    let steps = 4000;
    let h = search_radius / steps as f64;
    let zero = vec![0.0; d];
    let g0 = gamma.eval(&zero)?;
    let axis = |k: usize, t: f64| {
        let mut v = vec![0.0; d];
        v[k] = t;
        v
    };
    let mut scale = g0.abs();
    let mut scans = Vec::with_capacity(d);
    for k in 0..d {
        let vals: Vec<f64> = (0..=steps)
            .map(|i| gamma.eval(&axis(k, i as f64 * h)))
            .collect::<Result<_>>()?;
        scale = vals.iter().fold(scale, |a, v| a.max(v.abs()));
        scans.push(vals);
    }
    if scale == 0.0 {
        scale = 1.0;
    }
    let test_points: Vec<Vec<f64>> = (0..d)
        .flat_map(|k| linear_grid(-search_radius, search_radius, 41).into_iter().map(move |t| (k, t)))
        .map(|(k, t)| axis(k, t))
        .collect();

    for (k, vals) in scans.iter().enumerate() {
        let delta: Vec<f64> = vals.iter().map(|v| (v - g0).abs()).collect();
        for i in 2..steps {
            if !(delta[i] <= delta[i - 1] && delta[i] <= delta[i + 1]) {
                continue;
            }
            let (t, r) = golden_min(
                |t| Ok((gamma.eval(&axis(k, t))? - g0).abs()),
                (i - 1) as f64 * h,
                (i + 1) as f64 * h,
            )?;
            if r > tol * scale {
                continue;
            }
            let y = axis(k, t);
            let mut residual = 0.0f64;
            for p in &test_points {
                let shifted = gamma.eval(&add(p, &y))?;
                residual = residual.max((shifted - gamma.eval(p)?).abs());
            }
            if residual <= 10.0 * tol * scale {
                return Ok(Some(Period {
                    vector: y,
                    residual,
                    tolerance: 10.0 * tol * scale,
                }));
            }
        }
    }
    Ok(None)
}

/// Outcome of [`eventual_constancy_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventualConstancy {
    /// Whether the radial profile is constant on `[inner, outer]` within tolerance.
    pub constant_on_annulus: bool,
    pub plateau: Option<f64>,
    pub spread: f64,
    pub tolerance: f64,
    pub value_at_zero: f64,
    /// The model is certified in every dimension (Bernstein profile of `|ξ|²`).
    pub certified_all_dimensions: bool,
    /// Constant on an annulus at a level other than `γ(0)` while certified in
    /// every dimension; such a model cannot exist, so this signals an error
    /// in the model or its certification.
    pub contradiction: bool,
}

impl EventualConstancy {
    pub fn to_report(&self) -> PermissibilityReport {
        let scale = self.plateau.unwrap_or(self.value_at_zero).abs();
        let mut rec = CheckRecord::judged(
            "eventual_constancy",
            if self.contradiction { 1.0 } else { 0.0 },
            0.5,
            scale,
            None,
        );
        rec.detail = match (self.constant_on_annulus, self.plateau) {
            (true, Some(c)) if self.contradiction => {
                format!("plateau {c} contradicts certification in every dimension")
            }
            (true, Some(c)) => format!("plateau {c}"),
            _ => format!("not constant on the annulus (spread {:.3e})", self.spread),
        };
        PermissibilityReport::from_checks(vec![rec])
    }
}

/// Constancy of `ρ ↦ γ(ρ e_1)` on `[inner, outer]` (201 samples).
pub fn eventual_constancy_check(gamma: &Variogram, inner: f64, outer: f64, tol: f64) -> Result<EventualConstancy> {
    validate_tol(tol)?;
    if !(inner >= 0.0 && outer > inner) {
        return Err(Error::Domain(format!("invalid annulus [{inner}, {outer}]")));
    }
    let d = gamma.dim();
    let radial = |rho: f64| {
        let mut v = vec![0.0; d];
        v[0] = rho;
        gamma.eval(&v)
    };
    let values: Vec<f64> = linear_grid(inner, outer, 201)
        .into_iter()
        .map(radial)
        .collect::<Result<_>>()?;
    let g0 = radial(0.0)?;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let scale = values.iter().fold(g0.abs(), |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let spread = hi - lo;
    let tolerance = tol * scale;
    let constant = spread <= tolerance;
    let plateau = constant.then_some(0.5 * (lo + hi));
    let all_d = gamma.certified_all_dimensions();
    let contradiction = match plateau {
        Some(c) => all_d && (c - g0).abs() > tolerance,
        None => false,
    };
    Ok(EventualConstancy {
        constant_on_annulus: constant,
        plateau,
        spread,
        tolerance,
        value_at_zero: g0,
        certified_all_dimensions: all_d,
        contradiction,
    })
}
