use crate::error::{Error, Result};
use crate::real::Real;

/// Accuracy profile shared by the series kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelAccuracy<T> {
    pub abs_tol: T,
    pub max_terms: usize,
}

impl<T: Real> Default for KernelAccuracy<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-12).max(T::tol_floor()),
            max_terms: 10_000,
        }
    }
}

impl<T: Real> KernelAccuracy<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero()) || self.max_terms == 0 {
            return Err(Error::Invalid(format!(
                "kernel accuracy needs abs_tol > 0 and max_terms >= 1, got {} / {}",
                self.abs_tol, self.max_terms
            )));
        }
        Ok(())
    }
}

/// Value of a summed series plus the sum of absolute terms, which bounds the
/// cancellation the partial sums went through.
#[derive(Debug, Clone, Copy)]
pub struct SeriesSum<T> {
    pub value: T,
    pub abs_sum: T,
    pub terms: usize,
}

fn is_nonpositive_integer<T: Real>(b: T) -> bool {
    b <= T::zero() && b == b.round()
}

/// `₁F₂(a; b1, b2; x)` by direct summation, with diagnostics.
pub fn hyp1f2_series<T: Real>(a: T, b1: T, b2: T, x: T, acc: &KernelAccuracy<T>) -> Result<SeriesSum<T>> {
    acc.validate()?;
    if is_nonpositive_integer(b1) || is_nonpositive_integer(b2) {
        return Err(Error::domain("hyp1f2", format!("b1 = {b1}, b2 = {b2} hit a pole")));
    }
    if ![a, b1, b2, x].iter().all(|v| v.is_finite()) {
        return Err(Error::domain("hyp1f2", "non-finite argument"));
    }
    let mut term = T::one();
    let mut sum = T::one();
    let mut abs_sum = T::one();
    for k in 0..acc.max_terms {
        let kf = T::from_usize_lossy(k);
        let ratio = (a + kf) * x / ((b1 + kf) * (b2 + kf) * (kf + T::one()));
        term = term * ratio;
        sum = sum + term;
        abs_sum = abs_sum + term.abs();
        if term == T::zero() {
            return Ok(SeriesSum {
                value: sum,
                abs_sum,
                terms: k + 1,
            });
        }
        if !sum.is_finite() {
            return Err(Error::Overflow {
                func: "hyp1f2",
                detail: format!("a = {a}, b1 = {b1}, b2 = {b2}, x = {x}"),
            });
        }
        let next = T::from_usize_lossy(k + 1);
        let next_ratio = ((a + next) * x / ((b1 + next) * (b2 + next) * (next + T::one()))).abs();
        if next_ratio < T::lit(0.5) && term.abs() <= acc.abs_tol * sum.abs() {
            return Ok(SeriesSum {
                value: sum,
                abs_sum,
                terms: k + 1,
            });
        }
    }
    Err(Error::Convergence {
        func: "hyp1f2",
        terms: acc.max_terms,
        last_increment: term.as_f64(),
    })
}

/// Generalized hypergeometric function `₁F₂(a; b1, b2; x)`.
pub fn hyp1f2<T: Real>(a: T, b1: T, b2: T, x: T) -> Result<T> {
    hyp1f2_series(a, b1, b2, x, &KernelAccuracy::default()).map(|s| s.value)
}
