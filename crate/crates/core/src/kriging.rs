//! Ordinary kriging, Gaussian field simulation and the empirical variogram.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{norm, sub, Kernel};
use crate::oracle::kernel_matrix;
use crate::pointset::PointSet;
use crate::variogram::{StationaryCovariance, Variogram};

/// A model usable for kriging.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Variogram(Variogram),
    Covariance(StationaryCovariance),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Variogram(v) => v.dim(),
            Model::Covariance(c) => c.dim(),
        }
    }

    /// `γ(ξ)`, with `γ = C(0) - C` for covariances.
    pub fn gamma(&self, xi: &[f64]) -> Result<f64> {
        match self {
            Model::Variogram(v) => v.eval(xi),
            Model::Covariance(c) => Ok(c.sill() - c.eval(xi)?),
        }
    }

    /// `(sill, support radius)` of the equivalent covariance, when finite.
    pub fn covariance_support(&self) -> Option<(f64, f64)> {
        match self {
            Model::Variogram(v) => v.plateau(),
            Model::Covariance(c) => c.support_radius().map(|r| (c.sill(), r)),
        }
    }

    /// `C(ξ)` of the equivalent covariance; errors for unbounded variograms.
    pub fn covariance(&self, xi: &[f64]) -> Result<f64> {
        match self {
            Model::Covariance(c) => c.eval(xi),
            Model::Variogram(v) => match v.plateau() {
                Some((sill, _)) => Ok(sill - v.eval(xi)?),
                None => Err(Error::Hypothesis(
                    "variogram is not eventually constant, so it has no covariance form".into(),
                )),
            },
        }
    }
}

impl From<Variogram> for Model {
    fn from(v: Variogram) -> Self {
        Model::Variogram(v)
    }
}

impl From<StationaryCovariance> for Model {
    fn from(c: StationaryCovariance) -> Self {
        Model::Covariance(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    Dense,
    Sparse,
}

impl SolverMode {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(SolverMode::Dense),
            "sparse" => Ok(SolverMode::Sparse),
            other => Err(Error::Parse(format!("unknown solver mode `{other}`, expected dense or sparse"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverMode::Dense => "dense",
            SolverMode::Sparse => "sparse",
        }
    }
}

/// Coordinate triplets in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplets {
    pub n: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl Triplets {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for k in 0..self.nnz() {
            m[(self.rows[k], self.cols[k])] = self.values[k];
        }
        m
    }

    fn to_csc(&self) -> CscMatrix<f64> {
        let coo = CooMatrix::try_from_triplets(
            self.n,
            self.n,
            self.rows.clone(),
            self.cols.clone(),
            self.values.clone(),
        )
        .expect("indices are in range by construction");
        CscMatrix::from(&coo)
    }
}

/// The model evaluated on all site pairs.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemMatrix {
    /// `Γ_ij = γ(ξ_i - ξ_j)`.
    Dense(DMatrix<f64>),
    /// Nonzero entries of `C_ij = C(ξ_i - ξ_j)`.
    Sparse(Triplets),
}

fn check_sites(model: &Model, pts: &PointSet) -> Result<()> {
    if pts.dim() != model.dim() {
        return Err(Error::Dimension(format!(
            "sites live in ℝ^{}, model in ℝ^{}",
            pts.dim(),
            model.dim()
        )));
    }
    Ok(())
}

fn sparse_covariance(model: &Model, pts: &PointSet) -> Result<Triplets> {
    if model.covariance_support().is_none() {
        return Err(Error::Hypothesis(
            "sparse mode requires a model with finite support radius (compactly supported covariance or eventually constant variogram)"
                .into(),
        ));
    }
    let n = pts.len();
    let (mut rows, mut cols, mut values) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        for j in 0..n {
            let c = model.covariance(&sub(pts.site(i), pts.site(j)))?;
            if c != 0.0 {
                rows.push(i);
                cols.push(j);
                values.push(c);
            }
        }
    }
    Ok(Triplets { n, rows, cols, values })
}

/// `γ(ξ_i - ξ_j)` densely, or the nonzero covariance entries sparsely.
pub fn build_gamma_matrix(model: &Model, pts: &PointSet, mode: SolverMode) -> Result<SystemMatrix> {
    check_sites(model, pts)?;
    match mode {
        SolverMode::Dense => {
            let n = pts.len();
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = model.gamma(&sub(pts.site(i), pts.site(j)))?;
                }
            }
            Ok(SystemMatrix::Dense(m))
        }
        SolverMode::Sparse => Ok(SystemMatrix::Sparse(sparse_covariance(model, pts)?)),
    }
}

/// Result of an ordinary kriging solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrigingResult {
    pub prediction: f64,
    pub weights: Vec<f64>,
    /// Multiplier of the bordered variogram system `Γw + μ1 = γ₀`.
    pub lagrange_multiplier: f64,
    pub mode: SolverMode,
}

/// Ordinary kriging predictor at `target` from the values attached to `pts`.
pub fn ordinary_kriging(model: &Model, pts: &PointSet, target: &[f64], mode: SolverMode) -> Result<KrigingResult> {
    check_sites(model, pts)?;
    let values = pts
        .values()
        .ok_or_else(|| Error::Domain("kriging needs a value at every site".into()))?;
    if pts.is_empty() {
        return Err(Error::Degenerate("kriging needs at least one site".into()));
    }
    if target.len() != pts.dim() {
        return Err(Error::Dimension(format!(
            "target has {} coordinates, sites live in ℝ^{}",
            target.len(),
            pts.dim()
        )));
    }
    if let Some(&(i, j)) = pts.duplicates().first() {
        return Err(Error::Degenerate(format!(
            "sites {i} and {j} coincide, so the kriging system is singular"
        )));
    }
    let n = pts.len();
    let (weights, mu) = match mode {
        SolverMode::Dense => {
            let SystemMatrix::Dense(g) = build_gamma_matrix(model, pts, mode)? else {
                unreachable!()
            };
            let mut a = DMatrix::zeros(n + 1, n + 1);
            a.view_mut((0, 0), (n, n)).copy_from(&g);
            let mut b = DVector::zeros(n + 1);
            for i in 0..n {
                a[(i, n)] = 1.0;
                a[(n, i)] = 1.0;
                b[i] = model.gamma(&sub(target, pts.site(i)))?;
            }
            b[n] = 1.0;
            let sol = a
                .lu()
                .solve(&b)
                .ok_or_else(|| Error::Degenerate("bordered kriging system is singular".into()))?;
            (sol.rows(0, n).iter().copied().collect::<Vec<_>>(), sol[n])
        }
        SolverMode::Sparse => {
            // covariance form: C w - μ 1 = c₀, Σw = 1, solved through two
            // sparse Cholesky solves and the border
            let c = sparse_covariance(model, pts)?.to_csc();
            let chol = CscCholesky::factor(&c).map_err(|e| {
                Error::LinearAlgebra(format!("sparse covariance matrix is not positive definite: {e:?}"))
            })?;
            let mut rhs = DMatrix::zeros(n, 2);
            for i in 0..n {
                rhs[(i, 0)] = model.covariance(&sub(target, pts.site(i)))?;
                rhs[(i, 1)] = 1.0;
            }
            let sol = chol.solve(&rhs);
            let x = sol.column(0);
            let y = sol.column(1);
            let lambda = (x.sum() - 1.0) / y.sum();
            let w: Vec<f64> = (0..n).map(|i| x[i] - lambda * y[i]).collect();
            (w, -lambda)
        }
    };
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Degenerate("kriging weights are not finite".into()));
    }
    let prediction = weights.iter().zip(values).map(|(w, z)| w * z).sum();
    Ok(KrigingResult {
        prediction,
        weights,
        lagrange_multiplier: mu,
        mode,
    })
}

/// Gaussian field simulation on a fixed site list.
#[derive(Debug, Clone)]
pub struct SimulationSpec<'a, K: Kernel + ?Sized> {
    pub covariance: &'a K,
    pub sites: &'a PointSet,
    pub seed: u64,
    pub replicates: usize,
    /// Relative tolerance for accepting a slightly indefinite Gram matrix.
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    /// One row per replicate, one column per site.
    pub replicates: Vec<Vec<f64>>,
    /// Multiple of the identity added to the Gram matrix before factorizing.
    pub diagonal_shift: f64,
    pub seed: u64,
}

/// Lower Cholesky factor of a PSD matrix, shifting the diagonal by the
/// smallest amount that makes the factorization succeed.
fn psd_factor(g: &DMatrix<f64>, tol: f64) -> Result<(DMatrix<f64>, f64)> {
    if let Some(ch) = g.clone().cholesky() {
        return Ok((ch.l(), 0.0));
    }
    let scale = g.amax().max(f64::MIN_POSITIVE);
    let lmin = g.clone().symmetric_eigenvalues().min();
    if lmin < -tol * scale {
        return Err(Error::LinearAlgebra(format!(
            "Gram matrix has eigenvalue {lmin:.3e}, below -tol·scale = {:.3e}",
            -tol * scale
        )));
    }
    let mut shift = (-lmin).max(0.0) + f64::EPSILON * scale * g.nrows() as f64;
    for _ in 0..60 {
        let shifted = g + DMatrix::identity(g.nrows(), g.ncols()) * shift;
        if let Some(ch) = shifted.cholesky() {
            return Ok((ch.l(), shift));
        }
        shift *= 2.0;
        if shift > tol * scale {
            break;
        }
    }
    Err(Error::LinearAlgebra(format!(
        "Cholesky factorization failed after a diagonal shift of {shift:.3e}"
    )))
}

/// Draws `Z = L ε` with `LLᵀ` the Gram matrix; replicate `r` uses the
/// stream seeded with `seed + r`, so output does not depend on scheduling.
pub fn simulate_field<K: Kernel + ?Sized>(spec: &SimulationSpec<'_, K>) -> Result<Simulation> {
    let g = kernel_matrix(spec.covariance, spec.sites)?;
    let (l, shift) = psd_factor(&g, spec.tol)?;
    let n = g.nrows();
    let replicates = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(r as u64));
            let eps = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            (&l * eps).iter().copied().collect()
        })
        .collect();
    Ok(Simulation {
        replicates,
        diagonal_shift: shift,
        seed: spec.seed,
    })
}

/// One lag bin of an empirical variogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariogramBin {
    pub lag_lo: f64,
    pub lag_hi: f64,
    /// Site pairs whose distance falls in the bin.
    pub count: usize,
    /// Mean of `(Z_i - Z_j)² / 2`; `None` for empty bins.
    pub gamma_hat: Option<f64>,
}

/// Empirical variogram over the bins `[edges[k], edges[k+1])`, the last bin
/// closed on the right.
pub fn empirical_variogram(replicates: &[Vec<f64>], pts: &PointSet, edges: &[f64]) -> Result<Vec<VariogramBin>> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("bin edges must be increasing with at least two entries".into()));
    }
    let n = pts.len();
    if let Some(r) = replicates.iter().position(|z| z.len() != n) {
        return Err(Error::Dimension(format!("replicate {r} does not have {n} values")));
    }
    let nbins = edges.len() - 1;
    let mut pairs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nbins];
    for i in 0..n {
        for j in i + 1..n {
            let h = norm(&sub(pts.site(i), pts.site(j)));
            let last = edges[nbins];
            let bin = if h == last {
                Some(nbins - 1)
            } else {
                edges.windows(2).position(|w| h >= w[0] && h < w[1])
            };
            if let Some(b) = bin {
                pairs[b].push((i, j));
            }
        }
    }
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(b, list)| {
            let gamma_hat = if list.is_empty() || replicates.is_empty() {
                None
            } else {
                let total: f64 = replicates
                    .iter()
                    .map(|z| list.iter().map(|&(i, j)| 0.5 * (z[i] - z[j]).powi(2)).sum::<f64>())
                    .sum();
                Some(total / (list.len() * replicates.len()) as f64)
            };
            VariogramBin {
                lag_lo: edges[b],
                lag_hi: edges[b + 1],
                count: list.len(),
                gamma_hat,
            }
        })
        .collect())
}

/// CSV with header `lag_lo,lag_hi,count,gamma_hat`; empty bins print `NA`.
pub fn bins_to_csv(bins: &[VariogramBin]) -> String {
    let mut out = String::from("lag_lo,lag_hi,count,gamma_hat\n");
    for b in bins {
        let g = b.gamma_hat.map_or_else(|| "NA".to_string(), |v| v.to_string());
        out.push_str(&format!("{},{},{},{}\n", b.lag_lo, b.lag_hi, b.count, g));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::FunctionExpr;
    use crate::variogram::{exponential_covariance, make_variogram, nugget_covariance, wendland, ArgumentMode};

    fn abs_variogram() -> Model {
        Model::Variogram(
            make_variogram(&FunctionExpr::identity(), &DMatrix::identity(1, 1), 1, ArgumentMode::Norm).unwrap(),
        )
    }

    #[test]
    fn gamma_matrix_of_abs_on_three_sites() {
        let pts = PointSet::line(&[0.0, 1.0, 2.0]).unwrap();
        let SystemMatrix::Dense(m) = build_gamma_matrix(&abs_variogram(), &pts, SolverMode::Dense).unwrap() else {
            panic!()
        };
        let expect = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]);
        assert_eq!(m, expect);
    }

    #[test]
    fn wendland_beyond_support_is_diagonal() {
        let model = Model::Covariance(wendland(1.0, 1, 1).unwrap());
        let pts = PointSet::line(&[0.0, 2.0, 4.0, 6.0]).unwrap();
        let SystemMatrix::Sparse(t) = build_gamma_matrix(&model, &pts, SolverMode::Sparse).unwrap() else {
            panic!()
        };
        assert_eq!(t.nnz(), 4);
        assert!(t.rows.iter().zip(&t.cols).all(|(i, j)| i == j));
    }

    #[test]
    fn sparsity_matches_pair_count() {
        let model = Model::Covariance(wendland(1.0, 1, 1).unwrap());
        let pts = PointSet::random(100, 1, 0.0, 10.0, 3).unwrap();
        let SystemMatrix::Sparse(t) = build_gamma_matrix(&model, &pts, SolverMode::Sparse).unwrap() else {
            panic!()
        };
        let mut brute = 0;
        for i in 0..100 {
            for j in 0..100 {
                if (pts.site(i)[0] - pts.site(j)[0]).abs() < 1.0 {
                    brute += 1;
                }
            }
        }
        assert_eq!(t.nnz(), brute);
        // row-major order
        let keys: Vec<_> = t.rows.iter().zip(&t.cols).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sparse_needs_finite_support() {
        let model = Model::Covariance(exponential_covariance(1.0, 1).unwrap());
        let pts = PointSet::line(&[0.0, 1.0]).unwrap().with_values(vec![1.0, 2.0]).unwrap();
        let err = ordinary_kriging(&model, &pts, &[0.5], SolverMode::Sparse).unwrap_err();
        assert!(err.to_string().contains("finite support"), "{err}");
    }

    #[test]
    fn single_site_echoes_value() {
        let pts = PointSet::line(&[1.0]).unwrap().with_values(vec![4.2]).unwrap();
        let r = ordinary_kriging(&abs_variogram(), &pts, &[3.0], SolverMode::Dense).unwrap();
        assert_eq!(r.weights, vec![1.0]);
        assert_eq!(r.prediction, 4.2);
    }

    #[test]
    fn midpoint_of_two_sites() {
        let pts = PointSet::line(&[0.0, 2.0]).unwrap().with_values(vec![0.0, 2.0]).unwrap();
        let r = ordinary_kriging(&abs_variogram(), &pts, &[1.0], SolverMode::Dense).unwrap();
        assert!((r.prediction - 1.0).abs() < 1e-12);
        assert!((r.weights[0] - 0.5).abs() < 1e-12 && (r.weights[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_at_data_sites() {
        let pts = PointSet::line(&[0.0, 0.7, 1.9, 3.0])
            .unwrap()
            .with_values(vec![1.0, -2.0, 0.5, 3.0])
            .unwrap();
        let r = ordinary_kriging(&abs_variogram(), &pts, &[1.9], SolverMode::Dense).unwrap();
        assert!((r.prediction - 0.5).abs() < 1e-10);
        assert!((r.weights[2] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn duplicate_sites_are_degenerate() {
        let pts = PointSet::line(&[0.0, 1.0, 1.0]).unwrap().with_values(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            ordinary_kriging(&abs_variogram(), &pts, &[0.5], SolverMode::Dense),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn sparse_and_dense_agree_on_multiplier() {
        let model = Model::Covariance(wendland(1.5, 2, 2).unwrap());
        let pts = PointSet::random(15, 2, 0.0, 4.0, 9).unwrap();
        let vals = (0..15).map(|i| (i as f64).sin()).collect();
        let pts = pts.with_values(vals).unwrap();
        let d = ordinary_kriging(&model, &pts, &[2.0, 2.0], SolverMode::Dense).unwrap();
        let s = ordinary_kriging(&model, &pts, &[2.0, 2.0], SolverMode::Sparse).unwrap();
        assert!((d.prediction - s.prediction).abs() < 1e-10);
        assert!((d.lagrange_multiplier - s.lagrange_multiplier).abs() < 1e-8);
    }

    #[test]
    fn nugget_simulation_has_unit_variance_and_is_seeded() {
        let c = nugget_covariance(1).unwrap();
        let pts = PointSet::line(&[0.0, 1.0, 2.0]).unwrap();
        let spec = SimulationSpec {
            covariance: &c,
            sites: &pts,
            seed: 11,
            replicates: 10_000,
            tol: 1e-8,
        };
        let a = simulate_field(&spec).unwrap();
        let b = simulate_field(&spec).unwrap();
        assert_eq!(a, b);
        for k in 0..3 {
            let var = a.replicates.iter().map(|z| z[k] * z[k]).sum::<f64>() / 10_000.0;
            assert!((var - 1.0).abs() < 0.05, "variance {var}");
        }
    }

    #[test]
    fn constant_field_and_two_sites() {
        let pts = PointSet::line(&[0.0, 1.0]).unwrap();
        let flat = vec![vec![3.0, 3.0]; 5];
        let bins = empirical_variogram(&flat, &pts, &[0.0, 2.0]).unwrap();
        assert_eq!(bins[0].gamma_hat, Some(0.0));
        let reps = vec![vec![0.0, 2.0], vec![1.0, 0.0]];
        let bins = empirical_variogram(&reps, &pts, &[0.0, 0.5, 2.0]).unwrap();
        assert_eq!(bins[0].count, 0);
        assert_eq!(bins[0].gamma_hat, None);
        assert_eq!(bins[1].count, 1);
        assert_eq!(bins[1].gamma_hat, Some((2.0 + 0.5) / 2.0));
        assert!(bins_to_csv(&bins).contains(",0,NA\n"));
    }
}
