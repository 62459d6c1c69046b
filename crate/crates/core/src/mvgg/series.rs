//! Chain-structured summation of the `(N-1)`-fold series shared by every joint
//! statistic. With a tridiagonal precision matrix the joint law is a mixture,
//! over index vectors `i`, of independent per-branch laws whose shapes are
//! `m + α_j`, where `α_1 = i_1`, `α_N = i_{N-1}` and `α_j = i_{j-1} + i_j`.
//! The mixture weight
//!
//! `w(i) = |W|^m / Γ(m) · Π_j Γ(m+α_j) p_jj^{-(m+α_j)} · Π_n |p_{n,n+1}|^{2 i_n} / (i_n! Γ(m+i_n))`
//!
//! sums to one. Each index couples only neighbouring branches, so a
//! transfer-matrix pass sums the whole hypercube `[0, I]^{N-1}` in
//! `O(N I²)` log-space operations.

use crate::corrmat::{GreenFactorization, PrecisionElements};
use crate::error::{Error, Result};
use crate::real::{log_sum_exp, Real};
use crate::special::gamma::{ln_factorial, ln_gamma};

/// Truncation control for the joint series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl<T> {
    /// Stop once the latest shell adds less than `rel_tol` of the running sum.
    pub rel_tol: T,
    /// Cap `I` on every summation index.
    pub max_index: usize,
    /// Largest branch count accepted.
    pub max_branches: usize,
}

impl<T: Real> Default for SeriesControl<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-6),
            max_index: 64,
            max_branches: 6,
        }
    }
}

impl<T: Real> SeriesControl<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) {
            return Err(Error::Invalid(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if self.max_branches == 0 {
            return Err(Error::Invalid("max_branches must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-branch exponents for one index vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTermIndex<T> {
    pub alpha: Vec<usize>,
    /// `μ_j = (m + α_j + β)/2 - 1`
    pub mu: Vec<T>,
    /// `η_j = (m + α_j - β)/2`
    pub eta: Vec<T>,
}

impl<T: Real> SeriesTermIndex<T> {
    /// Builds the exponents for summation indices `i_1..i_{N-1}`.
    pub fn new(indices: &[usize], m: T, beta: T) -> Self {
        let n = indices.len() + 1;
        let alpha: Vec<usize> = (0..n)
            .map(|j| {
                let left = if j > 0 { indices[j - 1] } else { 0 };
                let right = if j + 1 < n { indices[j] } else { 0 };
                left + right
            })
            .collect();
        let two = T::lit(2.0);
        let mu = alpha
            .iter()
            .map(|&a| (m + T::from_usize_lossy(a) + beta) / two - T::one())
            .collect();
        let eta = alpha
            .iter()
            .map(|&a| (m + T::from_usize_lossy(a) - beta) / two)
            .collect();
        Self { alpha, mu, eta }
    }
}

/// Tridiagonal precision matrix in the working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Precision<T> {
    pub diag: Vec<T>,
    pub upper: Vec<T>,
    pub det: T,
}

impl<T: Real> Precision<T> {
    pub fn new(diag: Vec<T>, upper: Vec<T>, det: T) -> Result<Self> {
        if diag.is_empty() || upper.len() + 1 != diag.len() {
            return Err(Error::Invalid(format!(
                "precision needs N diagonal and N-1 off-diagonal entries, got {} and {}",
                diag.len(),
                upper.len()
            )));
        }
        if diag.iter().any(|&d| !(d > T::zero())) || !(det > T::zero()) {
            return Err(Error::Invalid("precision diagonal and determinant must be > 0".into()));
        }
        Ok(Self { diag, upper, det })
    }

    pub fn from_elements(p: &PrecisionElements) -> Result<Self> {
        let cast = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        Self::new(cast(&p.diag), cast(&p.upper), T::lit(p.det))
    }

    pub fn from_green(g: &GreenFactorization) -> Result<Self> {
        Self::from_elements(&crate::corrmat::precision_elements(g))
    }

    /// `W = I_N`.
    pub fn independent(n: usize) -> Result<Self> {
        Self::new(vec![T::one(); n.max(1)], vec![T::zero(); n.max(1) - 1], T::one())
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }
}

/// Outcome of a truncated series together with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue<T> {
    pub value: T,
    pub ln_value: T,
    /// Final per-axis index cap `I`.
    pub index_cap: usize,
    /// Number of index vectors summed, `(I+1)^{N-1}`.
    pub terms: usize,
    /// Contribution of the last shell.
    pub last_increment: T,
    /// `1 - Σ w(i)` over the summed hypercube.
    pub weight_deficit: T,
}

fn ln_link<T: Real>(i: usize, ln_p: T, m: T) -> T {
    if i == 0 {
        return -ln_gamma(m);
    }
    if ln_p == T::neg_infinity() {
        return T::neg_infinity();
    }
    T::lit(2.0) * T::from_usize_lossy(i) * ln_p - ln_factorial::<T>(i) - ln_gamma(m + T::from_usize_lossy(i))
}

struct BranchCache<T> {
    values: Vec<Vec<Option<T>>>,
}

impl<T: Real> BranchCache<T> {
    fn get<K>(&mut self, j: usize, alpha: usize, prec: &Precision<T>, m: T, kernel: &mut K) -> Result<T>
    where
        K: FnMut(usize, T) -> Result<T> + ?Sized,
    {
        let row = &mut self.values[j];
        if row.len() <= alpha {
            row.resize(alpha + 1, None);
        }
        if let Some(v) = row[alpha] {
            return Ok(v);
        }
        let a = m + T::from_usize_lossy(alpha);
        let k = kernel(j, a)?;
        let v = if k == T::neg_infinity() {
            k
        } else {
            ln_gamma(a) - a * prec.diag[j].ln() + k
        };
        row[alpha] = Some(v);
        Ok(v)
    }
}

fn transfer_sum<T, K>(cap: usize, prec: &Precision<T>, m: T, cache: &mut BranchCache<T>, kernel: &mut K) -> Result<T>
where
    T: Real,
    K: FnMut(usize, T) -> Result<T> + ?Sized,
{
    let n = prec.n();
    if n == 1 {
        return cache.get(0, 0, prec, m, kernel);
    }
    let ln_p: Vec<T> = prec.upper.iter().map(|p| p.abs().ln()).collect();
    let mut v: Vec<T> = (0..=cap)
        .map(|i| Ok(ln_link(i, ln_p[0], m) + cache.get(0, i, prec, m, kernel)?))
        .collect::<Result<_>>()?;
    let mut buf = Vec::with_capacity(cap + 1);
    for (j, &lp) in ln_p.iter().enumerate().take(n - 1).skip(1) {
        let mut next = Vec::with_capacity(cap + 1);
        for i in 0..=cap {
            let lh = ln_link(i, lp, m);
            if lh == T::neg_infinity() {
                next.push(lh);
                continue;
            }
            buf.clear();
            for (k, &vk) in v.iter().enumerate() {
                if vk == T::neg_infinity() {
                    continue;
                }
                buf.push(vk + cache.get(j, k + i, prec, m, kernel)?);
            }
            next.push(lh + log_sum_exp(&buf));
        }
        v = next;
    }
    buf.clear();
    for (k, &vk) in v.iter().enumerate() {
        if vk == T::neg_infinity() {
            continue;
        }
        buf.push(vk + cache.get(n - 1, k, prec, m, kernel)?);
    }
    Ok(log_sum_exp(&buf))
}

/// Sums `Σ_i w(i) Π_j exp(kernel(j, m + α_j))` over growing hypercubes.
///
/// `kernel(j, a)` returns the log of branch `j`'s factor for shape `a`
/// (`-inf` for a zero factor). The cube edge doubles from 4 until the latest
/// shell adds less than `rel_tol` of the sum; reaching `max_index` first is a
/// truncation error.
pub fn chain_series<T, K>(prec: &Precision<T>, m: T, ctrl: &SeriesControl<T>, mut kernel: K) -> Result<SeriesValue<T>>
where
    T: Real,
    K: FnMut(usize, T) -> Result<T>,
{
    ctrl.validate()?;
    let n = prec.n();
    if n > ctrl.max_branches {
        return Err(Error::Unsupported(format!(
            "{n} branches exceed the configured maximum of {}",
            ctrl.max_branches
        )));
    }
    let c0 = m * prec.det.ln() - ln_gamma(m);
    let mut cache = BranchCache {
        values: vec![Vec::new(); n],
    };
    let mut unit = |_: usize, _: T| Ok(T::zero());
    let mut unit_cache = BranchCache {
        values: vec![Vec::new(); n],
    };
    let finish = |cap: usize,
                  s: T,
                  prev: T,
                  unit_cache: &mut BranchCache<T>,
                  unit: &mut dyn FnMut(usize, T) -> Result<T>|
     -> Result<SeriesValue<T>> {
        let mass = c0 + transfer_sum(cap, prec, m, unit_cache, unit)?;
        let ln_value = c0 + s;
        let value = ln_value.exp();
        Ok(SeriesValue {
            value,
            ln_value,
            index_cap: cap,
            terms: (cap + 1).pow((n - 1) as u32),
            last_increment: if prev == T::neg_infinity() {
                T::zero()
            } else {
                value - (c0 + prev).exp()
            },
            weight_deficit: -mass.exp_m1(),
        })
    };
    if n == 1 {
        let s = transfer_sum(0, prec, m, &mut cache, &mut kernel)?;
        return finish(0, s, T::neg_infinity(), &mut unit_cache, &mut unit);
    }
    if prec.upper.iter().all(|&p| p == T::zero()) {
        // independent branches: only the all-zero index vector survives
        let s = transfer_sum(0, prec, m, &mut cache, &mut kernel)?;
        return finish(0, s, T::neg_infinity(), &mut unit_cache, &mut unit);
    }
    if ctrl.max_index == 0 {
        let s = transfer_sum(0, prec, m, &mut cache, &mut kernel)?;
        return Err(truncation(0, n, s, T::neg_infinity(), c0));
    }
    let mut caps = vec![if ctrl.max_index <= 2 { ctrl.max_index - 1 } else { 2 }];
    let mut c = 4;
    while c < ctrl.max_index {
        caps.push(c);
        c *= 2;
    }
    caps.push(ctrl.max_index);
    caps.dedup();
    let mut prev = transfer_sum(caps[0], prec, m, &mut cache, &mut kernel)?;
    for &cap in &caps[1..] {
        let s = transfer_sum(cap, prec, m, &mut cache, &mut kernel)?;
        let converged = s == T::neg_infinity() || (prev - s).exp_m1().abs() <= ctrl.rel_tol;
        if converged {
            return finish(cap, s, prev, &mut unit_cache, &mut unit);
        }
        if cap >= ctrl.max_index {
            return Err(truncation(cap, n, s, prev, c0));
        }
        prev = s;
    }
    Err(truncation(ctrl.max_index, n, prev, prev, c0))
}

fn truncation<T: Real>(cap: usize, n: usize, s: T, prev: T, c0: T) -> Error {
    let value = (c0 + s).exp();
    Error::Truncation {
        index_cap: cap,
        terms: (cap + 1).pow((n - 1) as u32),
        last_increment: (value - (c0 + prev).exp()).as_f64(),
        value: value.as_f64(),
    }
}
