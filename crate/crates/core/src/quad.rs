//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::real::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::zero(),
            rel_tol: T::lit(1e-12).max(T::tol_floor() * T::lit(16.0)),
            max_intervals: 4000,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub abs_err: T,
    pub evals: usize,
}

struct Piece<T> {
    a: T,
    b: T,
    value: T,
    err: T,
    resabs: T,
}

impl<T: Real> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T: Real> Eq for Piece<T> {}
impl<T: Real> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Result<Piece<T>> {
    let half = T::lit(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    let mut resabs = fc.abs() * T::lit(WGK[7]);
    for i in 0..7 {
        let dx = h * T::lit(XGK[i]);
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron = kron + T::lit(WGK[i]) * (f1 + f2);
        resabs = resabs + T::lit(WGK[i]) * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss = gauss + T::lit(WG[i / 2]) * (f1 + f2);
        }
    }
    if !kron.is_finite() {
        return Err(Error::domain(
            "integrate",
            format!("integrand not finite on [{a}, {b}]"),
        ));
    }
    Ok(Piece {
        a,
        b,
        value: kron * h,
        err: ((kron - gauss) * h).abs(),
        resabs: resabs * h.abs(),
    })
}

/// Integrates `f` over `[pts[0], pts[last]]`, splitting first at the interior
/// points. Bisects the piece with the largest error until the total error
/// estimate meets `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<T, F>(mut f: F, pts: &[T], opts: &QuadOptions<T>) -> Result<Quadrature<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if pts.len() < 2 {
        return Err(Error::domain("integrate", "need at least two points"));
    }
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in pts.windows(2) {
        if !(w[1] >= w[0]) {
            return Err(Error::domain("integrate", "breakpoints must be increasing"));
        }
        if w[1] > w[0] {
            heap.push(gk15(&mut f, w[0], w[1])?);
            evals += 15;
        }
    }
    let roundoff = T::epsilon() * T::lit(50.0);
    loop {
        let value: T = heap.iter().map(|p| p.value).sum();
        let err: T = heap.iter().map(|p| p.err).sum();
        let resabs: T = heap.iter().map(|p| p.resabs).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if err <= target || err <= roundoff * resabs {
            return Ok(Quadrature {
                value,
                abs_err: err,
                evals,
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Convergence {
                func: "integrate",
                terms: heap.len(),
                last_increment: err.as_f64(),
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => {
                return Ok(Quadrature {
                    value: T::zero(),
                    abs_err: T::zero(),
                    evals,
                })
            }
        };
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further at this precision
            let value: T = heap.iter().map(|p| p.value).sum::<T>() + worst.value;
            return Ok(Quadrature {
                value,
                abs_err: err,
                evals,
            });
        }
        heap.push(gk15(&mut f, worst.a, mid)?);
        heap.push(gk15(&mut f, mid, worst.b)?);
        evals += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x: f64| x.powi(7) - 3.0 * x * x, &[0.0, 2.0], &QuadOptions::default()).unwrap();
        assert_relative_eq!(q.value, 256.0 / 8.0 - 8.0, max_relative = 1e-14);
    }

    #[test]
    fn peaked_integrand_with_breakpoint() {
        // ∫_0^1 x^{-1/2} dx = 2, singular at the left end
        let q = integrate(
            |x: f64| if x > 0.0 { x.powf(-0.5) } else { 0.0 },
            &[0.0, 1.0],
            &QuadOptions {
                rel_tol: 1e-10,
                ..QuadOptions::default()
            },
        )
        .unwrap();
        assert_relative_eq!(q.value, 2.0, max_relative = 1e-9);
        let g = |x: f64| (-(x - 3.0).powi(2) * 1e4).exp();
        let q = integrate(g, &[2.0, 3.0, 4.0], &QuadOptions::default()).unwrap();
        assert_relative_eq!(q.value, (std::f64::consts::PI / 1e4).sqrt(), max_relative = 1e-11);
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(integrate(|x: f64| x, &[1.0], &QuadOptions::default()).is_err());
        assert!(integrate(|x: f64| x, &[1.0, 0.0], &QuadOptions::default()).is_err());
    }
}
