use std::fmt;
use std::sync::Arc;

use crate::error::Result;

/// A real function of one difference vector `ξ ∈ ℝ^d`.
pub trait Kernel: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, xi: &[f64]) -> Result<f64>;
}

type KernelFn = dyn Fn(&[f64]) -> Result<f64> + Send + Sync;

/// A kernel backed by a closure.
#[derive(Clone)]
pub struct FnKernel {
    dim: usize,
    f: Arc<KernelFn>,
}

impl FnKernel {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        FnKernel {
            dim,
            f: Arc::new(f),
        }
    }

    /// `ξ ↦ g(|ξ|)` for a scalar function `g`.
    pub fn radial<G>(dim: usize, g: G) -> Self
    where
        G: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        FnKernel::new(dim, move |xi| g(norm(xi)))
    }

    /// `λ · k(ξ)`.
    pub fn scaled<K: Kernel + Clone + 'static>(k: &K, lambda: f64) -> Self {
        let k = k.clone();
        FnKernel::new(k.dim(), move |xi| Ok(lambda * k.eval(xi)?))
    }
}

impl fmt::Debug for FnKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnKernel(d={})", self.dim)
    }
}

impl Kernel for FnKernel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, xi: &[f64]) -> Result<f64> {
        (self.f)(xi)
    }
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, xi: &[f64]) -> Result<f64> {
        (**self).eval(xi)
    }
}

impl<K: Kernel + ?Sized> Kernel for Arc<K> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, xi: &[f64]) -> Result<f64> {
        (**self).eval(xi)
    }
}

pub fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}
