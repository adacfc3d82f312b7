//! Lévy–Khinchine data `f(x) = αx + β + ∫ (1 - e^{-xt}) ν(dt)` for Bernstein
//! functions.

use super::FunctionExpr;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_half_line, QuadOptions};

/// The Lévy measure `ν` on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum LevyMeasure {
    /// Point masses `(t_i, mass_i)`.
    Atoms(Vec<(f64, f64)>),
    /// Density `m(t)` supported on `domain = (lo, hi)`, `hi` possibly infinite.
    Density {
        density: FunctionExpr,
        domain: (f64, f64),
    },
}

impl LevyMeasure {
    /// Density on the whole half-line.
    pub fn density(density: FunctionExpr) -> Self {
        LevyMeasure::Density {
            density,
            domain: (0.0, f64::INFINITY),
        }
    }

    /// `∫ h(t) ν(dt)`.
    pub fn integrate<H: Fn(f64) -> f64>(&self, h: H) -> Result<f64> {
        match self {
            LevyMeasure::Atoms(atoms) => Ok(atoms.iter().map(|&(t, m)| m * h(t)).sum()),
            LevyMeasure::Density { density, domain } => {
                let g = |t: f64| -> Result<f64> {
                    let m = density.eval(t)?;
                    Ok(h(t) * m)
                };
                integrate_on(g, domain.0, domain.1)
            }
        }
    }
}

pub(crate) fn integrate_on<G: Fn(f64) -> Result<f64>>(g: G, lo: f64, hi: f64) -> Result<f64> {
    match (lo == 0.0, hi.is_infinite()) {
        (true, true) => integrate_half_line(g),
        (false, true) => integrate_half_line(|s| g(lo + s)),
        (true, false) => {
            // t = hi s / (1 + s) maps (0, ∞) onto (0, hi)
            integrate_half_line(|s| {
                let w = 1.0 + s;
                g(hi * s / w).map(|v| v * hi / (w * w))
            })
        }
        (false, false) => integrate(g, lo, hi, QuadOptions::default()).map(|(v, _)| v),
    }
}

/// Drift `alpha`, constant `beta` and Lévy measure of a Bernstein function.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriple {
    alpha: f64,
    beta: f64,
    measure: LevyMeasure,
}

impl LevyTriple {
    /// Validates `alpha, beta >= 0`, the measure's support, and
    /// `∫ t/(1+t) ν(dt) < ∞` by quadrature.
    pub fn new(alpha: f64, beta: f64, measure: LevyMeasure) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) || !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Levy(format!(
                "drift and constant must be finite and nonnegative, got alpha={alpha}, beta={beta}"
            )));
        }
        match &measure {
            LevyMeasure::Atoms(atoms) => {
                for &(t, m) in atoms {
                    if !(t > 0.0 && t.is_finite()) || !(m >= 0.0 && m.is_finite()) {
                        return Err(Error::Levy(format!(
                            "atom ({t}, {m}) must have location > 0 and mass >= 0"
                        )));
                    }
                }
            }
            LevyMeasure::Density { domain, .. } => {
                let (lo, hi) = *domain;
                if !(lo >= 0.0 && hi > lo) {
                    return Err(Error::Levy(format!("invalid density domain ({lo}, {hi})")));
                }
            }
        }
        let mass = measure
            .integrate(|t| t / (1.0 + t))
            .map_err(|e| Error::Levy(format!("∫ t/(1+t) ν(dt) is not finite: {e}")))?;
        if !mass.is_finite() || mass < 0.0 {
            return Err(Error::Levy(format!("∫ t/(1+t) ν(dt) = {mass}")));
        }
        Ok(LevyTriple {
            alpha,
            beta,
            measure,
        })
    }

    pub fn zero() -> Self {
        LevyTriple {
            alpha: 0.0,
            beta: 0.0,
            measure: LevyMeasure::Atoms(vec![]),
        }
    }

    pub fn drift(alpha: f64) -> Self {
        LevyTriple {
            alpha,
            ..LevyTriple::zero()
        }
    }

    pub fn constant(beta: f64) -> Self {
        LevyTriple {
            beta,
            ..LevyTriple::zero()
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn measure(&self) -> &LevyMeasure {
        &self.measure
    }

    /// The density `m` when the measure has one.
    pub fn density(&self) -> Option<&FunctionExpr> {
        match &self.measure {
            LevyMeasure::Density { density, .. } => Some(density),
            LevyMeasure::Atoms(_) => None,
        }
    }

    /// `αx + β + ∫ (1 - e^{-xt}) ν(dt)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::Domain(format!("Lévy evaluation at x = {x} < 0")));
        }
        let jump = if x == 0.0 {
            0.0
        } else {
            self.measure.integrate(|t| -(-x * t).exp_m1())?
        };
        Ok(self.alpha * x + self.beta + jump)
    }
}

/// `f(x)` from its Lévy–Khinchine data.
pub fn levy_eval(triple: &LevyTriple, x: f64) -> Result<f64> {
    triple.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_only() {
        assert_eq!(levy_eval(&LevyTriple::drift(1.0), 3.0).unwrap(), 3.0);
    }

    #[test]
    fn unit_atom_gives_exponential_bernstein() {
        let t = LevyTriple::new(0.0, 0.0, LevyMeasure::Atoms(vec![(1.0, 1.0)])).unwrap();
        let v = levy_eval(&t, 1.0).unwrap();
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((v - 0.632_12).abs() < 1e-5);
    }

    #[test]
    fn log_density_gives_log_two() {
        let m = FunctionExpr::product(vec![FunctionExpr::exp_neg(1.0), FunctionExpr::monomial(-1.0)]);
        let t = LevyTriple::new(0.0, 0.0, LevyMeasure::density(m)).unwrap();
        let v = levy_eval(&t, 1.0).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-10, "{v}");
    }

    #[test]
    fn rejects_non_integrable_measure() {
        // t^{-2} is not integrable against t/(1+t) near 0
        let m = FunctionExpr::monomial(-2.0);
        assert!(matches!(
            LevyTriple::new(0.0, 0.0, LevyMeasure::density(m)),
            Err(Error::Levy(_))
        ));
        assert!(LevyTriple::new(-1.0, 0.0, LevyMeasure::Atoms(vec![])).is_err());
    }

    #[test]
    fn bounded_domain_density() {
        // ν = uniform on (0, 1): f(x) = ∫_0^1 (1 - e^{-xt}) dt = 1 - (1 - e^{-x})/x
        let t = LevyTriple::new(
            0.0,
            0.0,
            LevyMeasure::Density {
                density: FunctionExpr::constant(1.0),
                domain: (0.0, 1.0),
            },
        )
        .unwrap();
        let x = 2.0f64;
        let want = 1.0 - (1.0 - (-x).exp()) / x;
        assert!((levy_eval(&t, x).unwrap() - want).abs() < 1e-11);
    }
}
