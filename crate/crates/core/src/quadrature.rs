//! Adaptive Gauss–Kronrod quadrature and half-line integration.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(Segment { a, b, value, error })
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_segments: 2000,
        }
    }
}

/// Integral over `[a, b]` with its error estimate.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut segments = vec![gk15(&mut f, a, b)?];
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok((total, err));
        }
        if segments.len() >= opts.max_segments {
            return Err(Error::Quadrature(format!(
                "error estimate {err:.3e} above tolerance after {} segments on [{a}, {b}]",
                segments.len()
            )));
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let worst = segments.swap_remove(idx);
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature(format!(
                "segment [{}, {}] cannot be bisected further",
                worst.a, worst.b
            )));
        }
        segments.push(gk15(&mut f, worst.a, mid)?);
        segments.push(gk15(&mut f, mid, worst.b)?);
    }
}

/// Integral of a nonnegative-tailed integrand over `(0, ∞)`.
///
/// Substitutes `t = e^u` and integrates unit panels in `u` outward from
/// `u = 0` in both directions until the panel contributions have dropped
/// below `1e-14` of the running total three panels in a row. Integrands that
/// decay at least geometrically in `u` (power laws at either end, exponential
/// tails) are handled; anything slower reports non-convergence.
pub fn integrate_half_line<F: FnMut(f64) -> Result<f64>>(mut f: F) -> Result<f64> {
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        max_segments: 400,
    };
    let width = 1.0;
    // e^u overflows just past 709
    let max_u = 700.0;
    let mut total = 0.0;
    let panel = |lo: f64, hi: f64, f: &mut F| -> Result<f64> {
        integrate(
            |u| {
                let t = u.exp();
                if t == 0.0 || !t.is_finite() {
                    return Ok(0.0);
                }
                Ok(f(t)? * t)
            },
            lo,
            hi,
            opts,
        )
        .map(|(v, _)| v)
    };

    for direction in [1.0f64, -1.0] {
        let mut quiet = 0;
        let mut k = 0usize;
        loop {
            let (lo, hi) = if direction > 0.0 {
                (k as f64 * width, (k + 1) as f64 * width)
            } else {
                (-((k + 1) as f64) * width, -(k as f64) * width)
            };
            let v = panel(lo, hi, &mut f)?;
            total += v;
            if v.abs() <= 1e-14 * total.abs() {
                quiet += 1;
                if quiet >= 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
            k += 1;
            if hi.abs() >= max_u {
                return Err(Error::Quadrature(
                    "integrand tail does not decay on the half line".into(),
                ));
            }
        }
    }
    Ok(total)
}
