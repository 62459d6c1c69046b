//! Approximate law of `S = Σ z_n` for correlated Gamma-Gamma branches.
//!
//! `S` is replaced by `Ŝ = S₁ S₂` with `S₁ = (1/N) Σ u_n ~ Gamma(Nβ, 1/(Nβ))`
//! and `S₂ = Σ ω_n`. The powers `ω_n` are sums of squares of `2m` correlated
//! Gaussian vectors, so `S₂` is a sum of independent Gamma variates whose
//! scales come from the eigenvalues of the Gaussian covariance `K_y`; a
//! partial-fraction expansion turns it into a finite Gamma mixture.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::special::meijer::{ln_gg_cdf_kernel, ln_gg_density};

/// Relative eigenvalue gap below which eigenvalues are one cluster.
pub const CLUSTER_TOL: f64 = 1e-9;
/// Relative gap below which distinct clusters are merged anyway, because the
/// partial-fraction weights divide by scale differences.
pub const MERGE_TOL: f64 = 1e-6;

/// Gaussian covariance: `Ω_i/2` on the diagonal, `ρ_ij √(Ω_i Ω_j)/2` off it.
pub fn build_ky(omega: &[f64], sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = omega.len();
    if sigma.nrows() != n || sigma.ncols() != n || n == 0 {
        return Err(Error::Invalid(format!(
            "need {n} branch powers for a {}x{} correlation matrix",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    if omega.iter().any(|&o| !(o > 0.0) || !o.is_finite()) {
        return Err(Error::domain("build_ky", "branch powers must be finite and > 0"));
    }
    for i in 0..n {
        for j in 0..n {
            let r = sigma[(i, j)];
            if i != j && !(0.0..1.0).contains(&r) {
                return Err(Error::Correlation(format!("correlation {r} outside [0, 1)")));
            }
        }
    }
    let ky = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            omega[i] / 2.0
        } else {
            sigma[(i, j)] * (omega[i] * omega[j]).sqrt() / 2.0
        }
    });
    let min_eigenvalue = SymmetricEigen::new(ky.clone()).eigenvalues.min();
    if min_eigenvalue <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    Ok(ky)
}

/// Clustered eigen-structure of `K_y` and the Gamma-mixture weights of `S₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumDecomposition {
    /// Distinct eigenvalues `δ_n`, descending.
    pub deltas: Vec<f64>,
    /// Gaussian dimensions per cluster `ν_n` (eigenvalue count times `2m`).
    pub nus: Vec<usize>,
    /// Gamma shapes `m_n = ν_n/2`.
    pub m_eff: Vec<usize>,
    /// Gamma scales `2δ_n`; cluster `n` contributes `Gamma(m_n, 2δ_n)`.
    pub omega_eff: Vec<f64>,
    /// `xi[i][j-1]` weights `Gamma(j, omega_eff[i])`, `j = 1..m_i`.
    pub xi: Vec<Vec<f64>>,
    /// Number of branches `N`.
    pub branches: usize,
    /// Whether near-coincident clusters were merged.
    pub merged: bool,
}

impl SumDecomposition {
    /// `E(S₂)`.
    pub fn mean(&self) -> f64 {
        self.m_eff
            .iter()
            .zip(&self.omega_eff)
            .map(|(&m, &o)| m as f64 * o)
            .sum()
    }
}

/// Clusters the eigenvalues of `ky` and derives the Gamma mixture of `S₂`.
/// Needs `2m` integral and even cluster dimensions.
pub fn eigen_cluster(ky: &DMatrix<f64>, m: f64, tol_cluster: f64) -> Result<SumDecomposition> {
    let two_m = 2.0 * m;
    if !(m >= 0.5) || (two_m - two_m.round()).abs() > 1e-12 {
        return Err(Error::Unsupported(format!(
            "sum distribution needs 2m integral, got m = {m}"
        )));
    }
    let two_m = two_m.round() as usize;
    let mut eig: Vec<f64> = SymmetricEigen::new(ky.clone()).eigenvalues.iter().cloned().collect();
    if eig.iter().any(|&e| e <= 0.0) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig.iter().cloned().fold(f64::INFINITY, f64::min),
        });
    }
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));

    let cluster = |values: &[(f64, usize)], tol: f64| -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, f64, usize)> = Vec::new();
        for &(v, c) in values {
            match out.last_mut() {
                Some(last) if (last.0 / last.2 as f64 - v).abs() <= tol * v.abs().max(last.0 / last.2 as f64) => {
                    last.0 += v * c as f64;
                    last.1 += c as f64;
                    last.2 += c;
                }
                _ => out.push((v * c as f64, c as f64, c)),
            }
        }
        out.into_iter().map(|(s, w, c)| (s / w, c)).collect()
    };
    let singles: Vec<(f64, usize)> = eig.iter().map(|&e| (e, 1)).collect();
    let clusters = cluster(&singles, tol_cluster);
    let merged_clusters = cluster(&clusters, MERGE_TOL.max(tol_cluster));
    let merged = merged_clusters.len() != clusters.len();

    let mut deltas = Vec::new();
    let mut nus = Vec::new();
    for (d, c) in merged_clusters {
        let nu = two_m * c;
        if !nu.is_multiple_of(2) {
            return Err(Error::Unsupported(format!(
                "cluster of {c} eigenvalue(s) with 2m = {two_m} gives odd dimension {nu}"
            )));
        }
        deltas.push(d);
        nus.push(nu);
    }
    let m_eff: Vec<usize> = nus.iter().map(|&nu| nu / 2).collect();
    let omega_eff: Vec<f64> = deltas.iter().map(|&d| 2.0 * d).collect();
    let xi = xi_weights(&m_eff, &omega_eff)?;
    Ok(SumDecomposition {
        deltas,
        nus,
        m_eff,
        omega_eff,
        xi,
        branches: ky.nrows(),
        merged,
    })
}

/// Partial-fraction weights of `Σ_n Gamma(m_n, θ_n)` over `Gamma(j, θ_i)`.
///
/// `A_0 = Π_{n≠i} (1 - θ_n/θ_i)^{-m_n}`,
/// `A_k = (1/k) Σ_{l=1..k} Σ_{n≠i} m_n (θ_n/(θ_n - θ_i))^l A_{k-l}`, and the
/// weight of `Gamma(m_i - k, θ_i)` is `A_k`.
pub fn xi_weights(m: &[usize], theta: &[f64]) -> Result<Vec<Vec<f64>>> {
    if m.len() != theta.len() || m.is_empty() {
        return Err(Error::Invalid(
            "shape and scale lists must match and be non-empty".into(),
        ));
    }
    let c = m.len();
    for i in 0..c {
        for n in 0..i {
            if theta[i] == theta[n] {
                return Err(Error::Singular(format!("coincident scales at clusters {n} and {i}")));
            }
        }
    }
    let mut out = Vec::with_capacity(c);
    for i in 0..c {
        let mi = m[i];
        let mut a = vec![0.0; mi];
        a[0] = (0..c)
            .filter(|&n| n != i)
            .map(|n| (1.0 - theta[n] / theta[i]).powi(-(m[n] as i32)))
            .product();
        for k in 1..mi {
            let mut acc = 0.0;
            for l in 1..=k {
                let b: f64 = (0..c)
                    .filter(|&n| n != i)
                    .map(|n| m[n] as f64 * (theta[n] / (theta[n] - theta[i])).powi(l as i32))
                    .sum();
                acc += b * a[k - l];
            }
            a[k] = acc / k as f64;
        }
        // weight of Gamma(j, θ_i) for j = 1..m_i
        out.push((1..=mi).map(|j| a[mi - j]).collect());
    }
    Ok(out)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain("sum distribution", format!("beta = {beta} must be > 0")));
    }
    Ok(())
}

/// Density of `Ŝ`: `Σ Ξ(i,j) f(z)` over Gamma-Gamma components with shapes
/// `(Nβ, j)` and scale `θ_i/(Nβ)`.
pub fn sum_pdf(z: f64, beta: f64, d: &SumDecomposition) -> Result<f64> {
    check_beta(beta)?;
    if !(z > 0.0) {
        return Err(Error::domain("sum_pdf", format!("z = {z} must be > 0")));
    }
    let nb = d.branches as f64 * beta;
    let mut total = 0.0;
    for (i, row) in d.xi.iter().enumerate() {
        let scale = d.omega_eff[i] / nb;
        for (jm1, &w) in row.iter().enumerate() {
            let j = (jm1 + 1) as f64;
            total += w * (ln_gg_density(nb, j, z / scale)? - scale.ln()).exp();
        }
    }
    Ok(total.max(0.0))
}

/// CDF of `Ŝ`: `Σ Ξ(i,j) Pr(XY ≤ Nβ z/θ_i)` with `X ~ Gamma(Nβ)`, `Y ~ Gamma(j)`.
pub fn sum_cdf(z: f64, beta: f64, d: &SumDecomposition) -> Result<f64> {
    check_beta(beta)?;
    if z.is_nan() || z < 0.0 {
        return Err(Error::domain("sum_cdf", format!("z = {z} must be >= 0")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let nb = d.branches as f64 * beta;
    let mut total = 0.0;
    for (i, row) in d.xi.iter().enumerate() {
        for (jm1, &w) in row.iter().enumerate() {
            let j = (jm1 + 1) as f64;
            total += w * ln_gg_cdf_kernel(nb, j, nb * z / d.omega_eff[i])?.exp();
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Outcome of a Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsReport {
    pub t_stat: f64,
    pub t_max: f64,
    pub samples: usize,
    pub alpha: f64,
    pub accepted: bool,
}

/// Critical value `√(-ln(α/2) / (2v))`.
pub fn ks_critical(alpha: f64, v: usize) -> f64 {
    (-(alpha / 2.0).ln() / (2.0 * v as f64)).sqrt()
}

/// One-sample KS test of `samples` (any order) against `cdf`.
pub fn ks_test<F>(samples: &[f64], cdf: F, alpha: f64) -> Result<KsReport>
where
    F: Fn(f64) -> Result<f64>,
{
    let v = samples.len();
    if v < 100 {
        return Err(Error::Invalid(format!("KS test needs at least 100 samples, got {v}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("significance level {alpha} outside (0, 1)")));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Invalid("samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let vf = v as f64;
    let mut t: f64 = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        t = t.max((k + 1) as f64 / vf - f).max(f - k as f64 / vf);
    }
    let t_max = ks_critical(alpha, v);
    Ok(KsReport {
        t_stat: t,
        t_max,
        samples: v,
        alpha,
        accepted: t < t_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ky_entries() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let ky = build_ky(&[1.0, 1.0], &s).unwrap();
        assert_eq!(ky, DMatrix::from_row_slice(2, 2, &[0.5, 0.25, 0.25, 0.5]));
        let ky = build_ky(&[2.0, 4.0], &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(ky, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]));
    }

    #[test]
    fn two_branch_decomposition() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let d = eigen_cluster(&build_ky(&[1.0, 1.0], &s).unwrap(), 1.0, CLUSTER_TOL).unwrap();
        assert_relative_eq!(d.deltas[0], 0.75, max_relative = 1e-12);
        assert_relative_eq!(d.deltas[1], 0.25, max_relative = 1e-12);
        assert_eq!(d.nus, vec![2, 2]);
        assert_eq!(d.m_eff, vec![1, 1]);
        assert_relative_eq!(d.omega_eff[0], 1.5, max_relative = 1e-12);
        assert_relative_eq!(d.omega_eff[1], 0.5, max_relative = 1e-12);
        // (1 - 1.5 s)^{-1} (1 - 0.5 s)^{-1} = 1.5/(1-1.5s) - 0.5/(1-0.5s)
        assert_relative_eq!(d.xi[0][0], 1.5, max_relative = 1e-12);
        assert_relative_eq!(d.xi[1][0], -0.5, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_single_cluster() {
        let d = eigen_cluster(
            &build_ky(&[1.0; 3], &DMatrix::identity(3, 3)).unwrap(),
            1.0,
            CLUSTER_TOL,
        )
        .unwrap();
        assert_eq!(d.nus, vec![6]);
        assert_eq!(d.xi, vec![vec![0.0, 0.0, 1.0]]);
    }

    #[test]
    fn half_integer_m_and_odd_dimension() {
        let ky = build_ky(&[1.0, 1.0], &DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0])).unwrap();
        assert!(matches!(
            eigen_cluster(&ky, 1.3, CLUSTER_TOL),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            eigen_cluster(&ky, 0.5, CLUSTER_TOL),
            Err(Error::Unsupported(_))
        ));
        let ky = build_ky(&[1.0, 1.0], &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(eigen_cluster(&ky, 0.5, CLUSTER_TOL).unwrap().m_eff, vec![1]);
    }

    #[test]
    fn weights_complete() {
        let d = SumDecomposition {
            deltas: vec![],
            nus: vec![],
            m_eff: vec![3, 2, 1],
            omega_eff: vec![2.0, 0.7, 0.3],
            xi: xi_weights(&[3, 2, 1], &[2.0, 0.7, 0.3]).unwrap(),
            branches: 3,
            merged: false,
        };
        let total: f64 = d.xi.iter().flatten().sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
        assert_relative_eq!(sum_cdf(1e6 * 2.0, 1.5, &d).unwrap(), 1.0, max_relative = 1e-6);
        assert!(xi_weights(&[1, 1], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn ks_basics() {
        assert_relative_eq!(ks_critical(0.05, 10_000), 0.013_581, max_relative = 1e-4);
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let r = ks_test(&xs, Ok, 0.05).unwrap();
        assert!(r.accepted && r.t_stat <= 0.0005 + 1e-12);
        let r = ks_test(&xs, |x| Ok((x - 0.05).max(0.0)), 0.05).unwrap();
        assert!(!r.accepted && r.t_stat >= 0.05 - 1e-12);
        assert!(ks_test(&xs[..50], Ok, 0.05).is_err());
        let mut shuffled = xs.clone();
        shuffled.reverse();
        assert_eq!(
            ks_test(&shuffled, Ok, 0.05).unwrap().t_stat,
            ks_test(&xs, Ok, 0.05).unwrap().t_stat
        );
        let mut bad = xs.clone();
        bad[3] = f64::NAN;
        assert!(ks_test(&bad, Ok, 0.05).is_err());
    }
}
