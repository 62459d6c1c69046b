//! Joint statistics of correlated Gamma-Gamma variates `z_n = u_n ω_n`, where
//! `ω` has a multivariate Gamma law with tridiagonal precision matrix `W`
//! (squared correlated Nakagami amplitudes) and the shadowing terms `u_n` are
//! i.i.d. `Gamma(β, 1/β)`.

pub mod series;

pub use series::{chain_series, Precision, SeriesControl, SeriesTermIndex, SeriesValue};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::special::bessel::ln_bessel_i;
use crate::special::gamma::ln_gamma;
use crate::special::meijer::{
    gg_cdf_kernel_hyp, ln_gg_cdf_kernel, ln_gg_density, ln_gg_mgf_kernel, ln_gg_sq_laplace_kernel,
};

/// Fading severity `m`, shadowing shape `β`, power scale `Ω` and branch count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgParams<T> {
    pub m: T,
    pub beta: T,
    pub omega: T,
    pub n: usize,
}

impl<T: Real> GgParams<T> {
    pub fn new(m: T, beta: T, omega: T, n: usize) -> Result<Self> {
        let p = Self { m, beta, omega, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= T::lit(0.5)) || !self.m.is_finite() {
            return Err(Error::domain("GgParams", format!("m = {} must be >= 0.5", self.m)));
        }
        if !(self.beta > T::zero()) || !self.beta.is_finite() {
            return Err(Error::domain("GgParams", format!("beta = {} must be > 0", self.beta)));
        }
        if !(self.omega > T::zero()) || !self.omega.is_finite() {
            return Err(Error::domain("GgParams", format!("omega = {} must be > 0", self.omega)));
        }
        if self.n == 0 {
            return Err(Error::domain("GgParams", "branch count must be >= 1"));
        }
        Ok(())
    }

    fn check_against(&self, prec: &Precision<T>, len: usize) -> Result<()> {
        self.validate()?;
        if prec.n() != self.n || len != self.n {
            return Err(Error::Invalid(format!(
                "dimension mismatch: params n = {}, precision n = {}, argument length = {len}",
                self.n,
                prec.n()
            )));
        }
        Ok(())
    }

    /// Scale of branch `j`'s product law: `z_j = θ_j X Y`, `θ_j = Ω/(β p_jj)`.
    fn theta(&self, prec: &Precision<T>, j: usize) -> T {
        self.omega / (self.beta * prec.diag[j])
    }
}

/// Nakagami-m density with `E(r²) = mΩ`.
pub fn nakagami_pdf<T: Real>(r: T, m: T, omega: T) -> Result<T> {
    if !(m >= T::lit(0.5)) || !(omega > T::zero()) || !(r >= T::zero()) {
        return Err(Error::domain(
            "nakagami_pdf",
            format!("r = {r}, m = {m}, omega = {omega}"),
        ));
    }
    if r == T::zero() {
        return Ok(if m == T::lit(0.5) {
            T::lit(2.0) / (T::PI() * omega).sqrt()
        } else {
            T::zero()
        });
    }
    let l = T::lit(2.0).ln() + (T::lit(2.0) * m - T::one()) * r.ln() - r * r / omega - ln_gamma(m) - m * omega.ln();
    Ok(l.exp())
}

/// Shadowing density `Gamma(β, 1/β)` with unit mean.
pub fn gamma_pdf<T: Real>(u: T, beta: T) -> Result<T> {
    if !(beta > T::zero()) || !(u >= T::zero()) {
        return Err(Error::domain("gamma_pdf", format!("u = {u}, beta = {beta}")));
    }
    if u == T::zero() {
        return Ok(if beta == T::one() {
            T::one()
        } else if beta < T::one() {
            T::infinity()
        } else {
            T::zero()
        });
    }
    Ok((beta * beta.ln() + (beta - T::one()) * u.ln() - beta * u - ln_gamma(beta)).exp())
}

/// Univariate Gamma-Gamma density of `z = (Ω/a) X Y`, `X ~ Gamma(a, 1)`,
/// `Y ~ Gamma(b, 1)`:
/// `2 a^{(a+b)/2} z^{(a+b)/2-1} K_{a-b}(2√(az/Ω)) / (Γ(a) Γ(b) Ω^{(a+b)/2})`.
pub fn gg_pdf<T: Real>(z: T, a: T, b: T, omega: T) -> Result<T> {
    ln_gg_pdf(z, a, b, omega).map(T::exp)
}

pub fn ln_gg_pdf<T: Real>(z: T, a: T, b: T, omega: T) -> Result<T> {
    if !(omega > T::zero()) || !(z > T::zero()) {
        return Err(Error::domain("gg_pdf", format!("z = {z}, omega = {omega}")));
    }
    Ok(ln_gg_density(a, b, a * z / omega)? + (a / omega).ln())
}

/// CDF matching [`gg_pdf`].
pub fn gg_cdf<T: Real>(z: T, a: T, b: T, omega: T) -> Result<T> {
    if !(omega > T::zero()) || z.is_nan() {
        return Err(Error::domain("gg_cdf", format!("z = {z}, omega = {omega}")));
    }
    ln_gg_cdf_kernel(a, b, a * z / omega).map(T::exp)
}

fn check_positive<T: Real>(func: &'static str, xs: &[T], allow_zero: bool) -> Result<()> {
    for &x in xs {
        let ok = if allow_zero { x >= T::zero() } else { x > T::zero() };
        if !ok {
            return Err(Error::domain(func, format!("argument {x} out of range")));
        }
    }
    Ok(())
}

/// Joint density of the correlated Gamma powers `ω_n = r_n²`, by its Bessel-I
/// closed form
/// `|W|^m / (Γ(m) Ω^{Nm}) Π_j ω_j^{m-1} e^{-p_jj ω_j/Ω} Π_n x_n^{-(m-1)} I_{m-1}(2 x_n)`,
/// `x_n = |p_{n,n+1}| √(ω_n ω_{n+1}) / Ω`.
pub fn ln_joint_gamma_pdf_closed<T: Real>(w: &[T], params: &GgParams<T>, prec: &Precision<T>) -> Result<T> {
    params.check_against(prec, w.len())?;
    check_positive("joint_gamma_pdf", w, false)?;
    let m = params.m;
    let om = params.omega;
    let nf = T::from_usize_lossy(w.len());
    let mut l = m * prec.det.ln() - ln_gamma(m) - nf * m * om.ln();
    for (j, &wj) in w.iter().enumerate() {
        l = l + (m - T::one()) * wj.ln() - prec.diag[j] * wj / om;
    }
    for (k, &p) in prec.upper.iter().enumerate() {
        let x = p.abs() * (w[k] * w[k + 1]).sqrt() / om;
        if x == T::zero() {
            l = l - ln_gamma(m);
        } else {
            l = l - (m - T::one()) * x.ln() + ln_bessel_i(m - T::one(), T::lit(2.0) * x)?;
        }
    }
    Ok(l)
}

/// Joint Nakagami-m density of amplitudes `r` (Bessel-I closed form, no
/// truncation). Requires every `r_n > 0`.
pub fn joint_nakagami_pdf<T: Real>(r: &[T], params: &GgParams<T>, prec: &Precision<T>) -> Result<T> {
    check_positive("joint_nakagami_pdf", r, false)?;
    let w: Vec<T> = r.iter().map(|&x| x * x).collect();
    let mut l = ln_joint_gamma_pdf_closed(&w, params, prec)?;
    for &x in r {
        l = l + (T::lit(2.0) * x).ln();
    }
    Ok(l.exp())
}

/// Joint density of the correlated Gamma powers by the truncated series.
pub fn joint_gamma_pdf<T: Real>(
    w: &[T],
    params: &GgParams<T>,
    prec: &Precision<T>,
    ctrl: &SeriesControl<T>,
) -> Result<SeriesValue<T>> {
    params.check_against(prec, w.len())?;
    check_positive("joint_gamma_pdf", w, false)?;
    let om = params.omega;
    chain_series(prec, params.m, ctrl, |j, a| {
        let scale = om / prec.diag[j];
        Ok((a - T::one()) * w[j].ln() - w[j] / scale - ln_gamma(a) - a * scale.ln())
    })
}

/// Joint Gamma-Gamma density.
pub fn joint_gg_pdf<T: Real>(
    z: &[T],
    params: &GgParams<T>,
    prec: &Precision<T>,
    ctrl: &SeriesControl<T>,
) -> Result<SeriesValue<T>> {
    params.check_against(prec, z.len())?;
    check_positive("joint_gg_pdf", z, false)?;
    let beta = params.beta;
    chain_series(prec, params.m, ctrl, |j, a| {
        let th = params.theta(prec, j);
        Ok(ln_gg_density(a, beta, z[j] / th)? - th.ln())
    })
}

/// Which per-branch CDF evaluation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CdfRoute {
    /// Hypergeometric expansion where it is well conditioned, quadrature
    /// otherwise.
    #[default]
    Auto,
    /// Two-term `₁F₂` expansion only; fails on integer shape differences.
    Hypergeometric,
}

/// Joint Gamma-Gamma CDF `Pr(z_1 ≤ x_1, …, z_N ≤ x_N)`.
pub fn joint_gg_cdf<T: Real>(
    x: &[T],
    params: &GgParams<T>,
    prec: &Precision<T>,
    ctrl: &SeriesControl<T>,
) -> Result<SeriesValue<T>> {
    joint_gg_cdf_with(x, params, prec, ctrl, CdfRoute::Auto)
}

pub fn joint_gg_cdf_with<T: Real>(
    x: &[T],
    params: &GgParams<T>,
    prec: &Precision<T>,
    ctrl: &SeriesControl<T>,
    route: CdfRoute,
) -> Result<SeriesValue<T>> {
    params.check_against(prec, x.len())?;
    check_positive("joint_gg_cdf", x, true)?;
    let beta = params.beta;
    chain_series(prec, params.m, ctrl, |j, a| {
        let arg = x[j] / params.theta(prec, j);
        match route {
            CdfRoute::Auto => ln_gg_cdf_kernel(a, beta, arg),
            CdfRoute::Hypergeometric => {
                let v = gg_cdf_kernel_hyp(a, beta, arg)?;
                if v > T::zero() {
                    Ok(v.ln())
                } else if v == T::zero() {
                    Ok(T::neg_infinity())
                } else {
                    Err(Error::Convergence {
                        func: "gg_cdf_kernel_hyp",
                        terms: 0,
                        last_increment: v.as_f64(),
                    })
                }
            }
        }
    })
}

/// Joint MGF `E[exp(-Σ s_n z_n)]`, `s_n > 0`.
pub fn joint_gg_mgf<T: Real>(
    s: &[T],
    params: &GgParams<T>,
    prec: &Precision<T>,
    ctrl: &SeriesControl<T>,
) -> Result<SeriesValue<T>> {
    params.check_against(prec, s.len())?;
    check_positive("joint_gg_mgf", s, false)?;
    let beta = params.beta;
    chain_series(prec, params.m, ctrl, |j, a| {
        ln_gg_mgf_kernel(a, beta, T::one() / (s[j] * params.theta(prec, j)))
    })
}

/// `E[exp(-Σ k_n z_n²)]`, `k_n ≥ 0`.
pub fn joint_gg_sq_laplace<T: Real>(
    k: &[T],
    params: &GgParams<T>,
    prec: &Precision<T>,
    ctrl: &SeriesControl<T>,
) -> Result<SeriesValue<T>> {
    params.check_against(prec, k.len())?;
    check_positive("joint_gg_sq_laplace", k, true)?;
    let beta = params.beta;
    chain_series(prec, params.m, ctrl, |j, a| {
        let th = params.theta(prec, j);
        ln_gg_sq_laplace_kernel(a, beta, k[j] * th * th)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrmat::{green_fit, CorrelationSpec};
    use approx::assert_relative_eq;

    fn exp_prec(n: usize, rho: f64) -> Precision<f64> {
        Precision::from_green(&green_fit(&CorrelationSpec::exponential(n, rho).unwrap(), 1e-12).unwrap()).unwrap()
    }

    #[test]
    fn marginal_reductions() {
        for i in 1..20 {
            let r = 0.15 * i as f64;
            assert_relative_eq!(
                nakagami_pdf(r, 1.0, 1.0).unwrap(),
                2.0 * r * (-r * r).exp(),
                max_relative = 1e-13
            );
            assert_relative_eq!(gamma_pdf(r, 1.0).unwrap(), (-r).exp(), max_relative = 1e-13);
        }
        assert!(nakagami_pdf(1.0, 0.4, 1.0).is_err());
    }

    #[test]
    fn single_branch_is_univariate() {
        let p = GgParams::new(2.0, 1.0931, 0.5, 1).unwrap();
        let prec = Precision::independent(1).unwrap();
        let ctrl = SeriesControl::default();
        for &z in &[0.05, 0.7, 3.0] {
            let j = joint_gg_pdf(&[z], &p, &prec, &ctrl).unwrap();
            assert_relative_eq!(j.value, gg_pdf(z, 1.0931, 2.0, 0.5).unwrap(), max_relative = 1e-12);
            let c = joint_gg_cdf(&[z], &p, &prec, &ctrl).unwrap();
            assert_relative_eq!(c.value, gg_cdf(z, 1.0931, 2.0, 0.5).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn series_matches_closed_form_gamma_density() {
        let p = GgParams::new(1.5, 1.0, 1.0, 3).unwrap();
        let prec = exp_prec(3, 0.6);
        let ctrl = SeriesControl {
            rel_tol: 1e-10,
            ..SeriesControl::default()
        };
        for w in [[0.4, 1.1, 2.0], [2.5, 0.3, 0.9], [1.0, 1.0, 1.0]] {
            let s = joint_gamma_pdf(&w, &p, &prec, &ctrl).unwrap();
            let c = ln_joint_gamma_pdf_closed(&w, &p, &prec).unwrap().exp();
            assert_relative_eq!(s.value, c, max_relative = 1e-8);
        }
    }

    #[test]
    fn cdf_edges() {
        let p = GgParams::new(2.0, 1.0931, 0.5, 3).unwrap();
        let prec = exp_prec(3, 0.25);
        let ctrl = SeriesControl::default();
        assert_eq!(joint_gg_cdf(&[0.0, 1.0, 1.0], &p, &prec, &ctrl).unwrap().value, 0.0);
        let big = joint_gg_cdf(&[1e4, 1e4, 1e4], &p, &prec, &ctrl).unwrap();
        assert_relative_eq!(big.value, 1.0, max_relative = 1e-5);
    }

    #[test]
    fn routes_agree() {
        let p = GgParams::new(2.0, 1.0931, 0.5, 3).unwrap();
        let prec = exp_prec(3, 0.25);
        let ctrl = SeriesControl::default();
        let x = [0.4, 0.9, 0.2];
        let a = joint_gg_cdf_with(&x, &p, &prec, &ctrl, CdfRoute::Auto).unwrap();
        let h = joint_gg_cdf_with(&x, &p, &prec, &ctrl, CdfRoute::Hypergeometric).unwrap();
        assert_relative_eq!(a.value, h.value, max_relative = 1e-9);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = GgParams::new(2.0, 1.0, 1.0, 2).unwrap();
        let prec = exp_prec(3, 0.25);
        assert!(joint_gg_pdf(&[1.0, 1.0, 1.0], &p, &prec, &SeriesControl::default()).is_err());
    }
}
