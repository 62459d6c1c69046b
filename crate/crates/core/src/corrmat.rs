//! Correlation matrices, their Green-matrix approximation and the tridiagonal
//! precision matrix consumed by the joint series.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries of the inverse with `|i - j| >= 2` below this are treated as zero.
pub const TRIDIAGONAL_TOL: f64 = 1e-10;

/// How a correlation matrix was specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Preset {
    /// `Σ_ij = ρ^{|i-j|}`.
    Exponential { rho: f64 },
    /// Symmetric Toeplitz matrix with first row `(1, row[0], row[1], ...)`.
    Toeplitz { row: Vec<f64> },
    /// Full matrix given row by row.
    Arbitrary { matrix: Vec<Vec<f64>> },
    /// `Σ = I`.
    Independent,
}

/// A validated correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpec {
    pub n: usize,
    pub kind: Preset,
    pub matrix: DMatrix<f64>,
}

/// Builds a correlation matrix from a preset.
pub fn build_preset(kind: &Preset, n: usize) -> Result<CorrelationSpec> {
    if n == 0 {
        return Err(Error::Correlation("branch count must be at least 1".into()));
    }
    let matrix = match kind {
        Preset::Exponential { rho } => {
            check_rho(*rho)?;
            DMatrix::from_fn(n, n, |i, j| rho.powi((i as i32 - j as i32).abs()))
        }
        Preset::Toeplitz { row } => {
            if row.len() + 1 != n {
                return Err(Error::Correlation(format!(
                    "toeplitz row has {} entries, expected {} for n = {n}",
                    row.len(),
                    n - 1
                )));
            }
            for &r in row {
                check_rho(r)?;
            }
            DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { row[i.abs_diff(j) - 1] })
        }
        Preset::Arbitrary { matrix } => {
            if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                return Err(Error::Correlation(format!("matrix must be {n}x{n}")));
            }
            DMatrix::from_fn(n, n, |i, j| matrix[i][j])
        }
        Preset::Independent => DMatrix::identity(n, n),
    };
    CorrelationSpec::new(kind.clone(), matrix)
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Correlation(format!("correlation {rho} outside [0, 1)")));
    }
    Ok(())
}

impl CorrelationSpec {
    /// Validates unit diagonal, symmetry, off-diagonal range and positive
    /// definiteness.
    pub fn new(kind: Preset, matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::Correlation("matrix must be square and non-empty".into()));
        }
        for i in 0..n {
            if (matrix[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::Correlation(format!("diagonal entry {i} is {}", matrix[(i, i)])));
            }
            for j in 0..i {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if (a - b).abs() > 1e-12 {
                    return Err(Error::Correlation(format!("matrix not symmetric at ({i}, {j})")));
                }
                check_rho(a)?;
            }
        }
        let min_eigenvalue = min_eigenvalue(&matrix);
        if min_eigenvalue <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }
        Ok(Self { n, kind, matrix })
    }

    pub fn exponential(n: usize, rho: f64) -> Result<Self> {
        build_preset(&Preset::Exponential { rho }, n)
    }

    pub fn toeplitz(row: &[f64]) -> Result<Self> {
        build_preset(&Preset::Toeplitz { row: row.to_vec() }, row.len() + 1)
    }

    pub fn independent(n: usize) -> Result<Self> {
        build_preset(&Preset::Independent, n)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Green-matrix approximation `c_ij = ζ_min(i,j) ϑ_max(i,j)` with `ζ_i ϑ_i = 1`
/// and `ζ_1 = 1`, plus its tridiagonal inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenFactorization {
    pub zeta: Vec<f64>,
    pub theta: Vec<f64>,
    /// Adjacent correlations `c_{k,k+1} = ζ_k ϑ_{k+1}`.
    pub links: Vec<f64>,
    pub c: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub det_w: f64,
    /// Frobenius norm of `C - Σ`.
    pub fit_residual: f64,
    /// Largest entry of `C⁻¹` with `|i - j| >= 2` before zeroing.
    pub structural_residue: f64,
    /// True when `Σ⁻¹` was already tridiagonal and no fit was needed.
    pub exact: bool,
    /// Set when `Σ` has zero correlations that no Green matrix reproduces.
    pub warning: Option<String>,
    /// Residual norm after each accepted optimizer step.
    pub history: Vec<f64>,
}

/// Precision-matrix quantities used by the joint series.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionElements {
    /// `p_{i,i}`, `i = 1..N`.
    pub diag: Vec<f64>,
    /// `p_{i,i+1}`, `i = 1..N-1`.
    pub upper: Vec<f64>,
    /// `|W|`.
    pub det: f64,
}

impl PrecisionElements {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Single branch: `W = [1]`.
    pub fn single() -> Self {
        Self {
            diag: vec![1.0],
            upper: vec![],
            det: 1.0,
        }
    }
}

/// Exposes `p_{i,i}`, `p_{i,i+1}` and `|W|`.
pub fn precision_elements(g: &GreenFactorization) -> PrecisionElements {
    let n = g.w.nrows();
    PrecisionElements {
        diag: (0..n).map(|i| g.w[(i, i)]).collect(),
        upper: (0..n.saturating_sub(1)).map(|i| g.w[(i, i + 1)]).collect(),
        det: g.det_w,
    }
}

pub(crate) fn is_tridiagonal_inverse(sigma: &DMatrix<f64>) -> bool {
    match sigma.clone().try_inverse() {
        Some(inv) => {
            let n = inv.nrows();
            (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) < 2 || inv[(i, j)].abs() <= TRIDIAGONAL_TOL))
        }
        None => false,
    }
}

fn green_matrix(links: &[f64]) -> DMatrix<f64> {
    let n = links.len() + 1;
    let mut c = DMatrix::identity(n, n);
    for i in 0..n {
        let mut prod = 1.0;
        for j in i + 1..n {
            prod *= links[j - 1];
            c[(i, j)] = prod;
            c[(j, i)] = prod;
        }
    }
    c
}

fn residuals(links: &[f64], sigma: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    // residual per pair i < j and its Jacobian with respect to u_k = ln r_k
    let n = sigma.nrows();
    let pairs = n * (n - 1) / 2;
    let mut e = DVector::zeros(pairs);
    let mut jac = DMatrix::zeros(pairs, n - 1);
    let mut row = 0;
    for i in 0..n {
        let mut prod = 1.0;
        for j in i + 1..n {
            prod *= links[j - 1];
            e[row] = prod - sigma[(i, j)];
            for k in i..j {
                jac[(row, k)] = prod;
            }
            row += 1;
        }
    }
    (e, jac)
}

const MAX_LINK: f64 = 1.0 - 1e-9;
const MIN_LINK: f64 = 1e-300;

fn levenberg_marquardt(sigma: &DMatrix<f64>, tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = sigma.nrows();
    let mut u: Vec<f64> = (0..n - 1)
        .map(|k| sigma[(k, k + 1)].clamp(1e-3, MAX_LINK).ln())
        .collect();
    let links_of = |u: &[f64]| -> Vec<f64> { u.iter().map(|&x| x.exp().clamp(MIN_LINK, MAX_LINK)).collect() };
    let (mut e, mut jac) = residuals(&links_of(&u), sigma);
    let mut cost = e.norm_squared();
    let mut history = vec![cost.sqrt()];
    let mut lambda = 1e-3;
    for _ in 0..2000 {
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &e;
        if grad.amax() <= tol * tol {
            return Ok((links_of(&u), history));
        }
        let mut improved = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for k in 0..n - 1 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial: Vec<f64> = u
                .iter()
                .zip(step.iter())
                .map(|(&x, &d)| (x + d).min(MAX_LINK.ln()))
                .collect();
            let (e_t, jac_t) = residuals(&links_of(&trial), sigma);
            let cost_t = e_t.norm_squared();
            if cost_t < cost {
                let rel = (cost - cost_t) / cost.max(f64::MIN_POSITIVE);
                let step_norm = step.amax();
                u = trial;
                e = e_t;
                jac = jac_t;
                cost = cost_t;
                history.push(cost.sqrt());
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if rel < tol * tol || step_norm < tol {
                    return Ok((links_of(&u), history));
                }
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // no descent direction left at this precision: stationary point
            return Ok((links_of(&u), history));
        }
    }
    Err(Error::GreenFit { history })
}

/// Approximates `Σ` by a Green matrix and returns it with its inverse.
///
/// When `Σ⁻¹` is already tridiagonal the fit is skipped and `C = Σ`.
pub fn green_fit(spec: &CorrelationSpec, tol: f64) -> Result<GreenFactorization> {
    let sigma = &spec.matrix;
    let n = spec.n;
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("green fit tolerance must be > 0, got {tol}")));
    }
    if n == 1 {
        return Ok(GreenFactorization {
            zeta: vec![1.0],
            theta: vec![1.0],
            links: vec![],
            c: DMatrix::identity(1, 1),
            w: DMatrix::identity(1, 1),
            det_w: 1.0,
            fit_residual: 0.0,
            structural_residue: 0.0,
            exact: true,
            warning: None,
            history: vec![],
        });
    }
    let exact = is_tridiagonal_inverse(sigma);
    let mut warning = None;
    let (links, history) = if exact {
        ((0..n - 1).map(|k| sigma[(k, k + 1)]).collect(), vec![])
    } else {
        let zero_pairs = (0..n).any(|i| (i + 1..n).any(|j| sigma[(i, j)] == 0.0));
        if zero_pairs {
            warning = Some(
                "zero correlations with other pairs correlated: no Green matrix is exact, nearest fit used".into(),
            );
        }
        let (mut links, history) = levenberg_marquardt(sigma, tol)?;
        for r in links.iter_mut() {
            if *r < 1e-12 {
                *r = 0.0;
            }
        }
        (links, history)
    };

    let c = if exact { sigma.clone() } else { green_matrix(&links) };
    let fit_residual = (&c - sigma).norm();
    let mut w = c
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: min_eigenvalue(&c),
        })?
        .inverse();
    let mut structural_residue: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) >= 2 {
                structural_residue = structural_residue.max(w[(i, j)].abs());
                if w[(i, j)].abs() <= TRIDIAGONAL_TOL {
                    w[(i, j)] = 0.0;
                }
            }
        }
    }
    if structural_residue > TRIDIAGONAL_TOL {
        return Err(Error::Singular(format!(
            "inverse of the Green matrix is not tridiagonal: residue {structural_residue:e}"
        )));
    }
    let det_w = w
        .clone()
        .cholesky()
        .map(|ch| ch.l().diagonal().iter().map(|d| d * d).product::<f64>())
        .ok_or_else(|| Error::Singular("precision matrix lost positive definiteness".into()))?;

    let mut zeta = vec![1.0; n];
    for k in 0..n - 1 {
        zeta[k + 1] = if links[k] > 0.0 {
            zeta[k] / links[k]
        } else {
            f64::INFINITY
        };
    }
    let theta = zeta.iter().map(|z| 1.0 / z).collect();
    Ok(GreenFactorization {
        zeta,
        theta,
        links,
        c,
        w,
        det_w,
        fit_residual,
        structural_residue,
        exact,
        warning,
        history,
    })
}

/// Green factorization of the identity (independent branches).
pub fn independent(n: usize) -> Result<GreenFactorization> {
    green_fit(&CorrelationSpec::independent(n)?, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_preset_entries() {
        let s = CorrelationSpec::exponential(3, 0.25).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[1.0, 0.25, 0.0625, 0.25, 1.0, 0.25, 0.0625, 0.25, 1.0]);
        assert_eq!(s.matrix, expect);
        assert_eq!(
            CorrelationSpec::exponential(4, 0.0).unwrap().matrix,
            DMatrix::identity(4, 4)
        );
    }

    #[test]
    fn validation_errors() {
        assert!(CorrelationSpec::exponential(3, 1.0).is_err());
        assert!(CorrelationSpec::exponential(3, -0.1).is_err());
        assert!(CorrelationSpec::toeplitz(&[0.9, 0.1]).is_err());
        let bad = Preset::Arbitrary {
            matrix: vec![vec![1.0, 0.9, 0.9], vec![0.9, 1.0, 0.0], vec![0.9, 0.0, 1.0]],
        };
        match build_preset(&bad, 3) {
            Err(Error::NotPositiveDefinite { min_eigenvalue }) => assert!(min_eigenvalue < 0.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(build_preset(&Preset::Toeplitz { row: vec![0.5] }, 3).is_err());
    }

    #[test]
    fn exponential_fit_is_exact() {
        let rho: f64 = 0.5;
        let g = green_fit(&CorrelationSpec::exponential(4, rho).unwrap(), 1e-12).unwrap();
        assert!(g.exact);
        assert!(g.fit_residual < 1e-10);
        for i in 0..4 {
            assert_relative_eq!(g.zeta[i], rho.powi(-(i as i32)), max_relative = 1e-12);
            assert_relative_eq!(g.theta[i], rho.powi(i as i32), max_relative = 1e-12);
        }
        let p = precision_elements(&g);
        let d = 1.0 - rho * rho;
        assert_relative_eq!(p.diag[0], 1.0 / d, max_relative = 1e-12);
        assert_relative_eq!(p.diag[1], (1.0 + rho * rho) / d, max_relative = 1e-12);
        assert_relative_eq!(p.upper[0], -rho / d, max_relative = 1e-12);
        assert_relative_eq!(p.det, d.powi(-3), max_relative = 1e-12);
    }

    #[test]
    fn identity_precision() {
        let g = independent(3).unwrap();
        let p = precision_elements(&g);
        assert_eq!(p.diag, vec![1.0; 3]);
        assert_eq!(p.upper, vec![0.0; 2]);
        assert_relative_eq!(p.det, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn toeplitz_fit_matches_cubic_optimum() {
        // by symmetry r1 = r2 = r solves r³ + 0.8 r - 0.5 = 0
        let g = green_fit(&CorrelationSpec::toeplitz(&[0.5, 0.2]).unwrap(), 1e-12).unwrap();
        assert!(!g.exact);
        let mut r: f64 = 0.5;
        for _ in 0..50 {
            r -= (r * r * r + 0.8 * r - 0.5) / (3.0 * r * r + 0.8);
        }
        assert_relative_eq!(g.links[0], r, max_relative = 1e-7);
        assert_relative_eq!(g.links[1], r, max_relative = 1e-7);
        let resid = (2.0 * (2.0 * (r - 0.5) * (r - 0.5) + (r * r - 0.2) * (r * r - 0.2))).sqrt();
        assert_relative_eq!(g.fit_residual, resid, max_relative = 1e-9);
        let wc = &g.w * &g.c;
        assert!((wc - DMatrix::identity(3, 3)).amax() < 1e-8);
    }

    #[test]
    fn zero_pair_flags_warning() {
        let m = Preset::Arbitrary {
            matrix: vec![vec![1.0, 0.5, 0.0], vec![0.5, 1.0, 0.5], vec![0.0, 0.5, 1.0]],
        };
        let g = green_fit(&build_preset(&m, 3).unwrap(), 1e-12).unwrap();
        assert!(g.warning.is_some());
        assert!(g.fit_residual > 0.0);
    }
}
