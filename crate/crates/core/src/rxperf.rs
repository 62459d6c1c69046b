//! Outage and error-rate performance of SC and MRC diversity receivers over
//! correlated generalized-K fading.
//!
//! Every branch SNR is `λ_n = z_n λ̄/(mΩ)`, so `E(λ_n) = λ̄` and a threshold
//! `λ_th` corresponds to the power level `mΩ λ_th/λ̄`.

use crate::error::{Error, Result};
use crate::mvgg::{chain_series, joint_gg_cdf, joint_gg_mgf, GgParams, Precision, SeriesControl, SeriesValue};
use crate::special::gamma::ln_gamma;
use crate::special::meijer::{gg_cdf_leading, gg_mgf_leading, log_quad, Leading, EPS_SHIFT};
use crate::sumdist::{sum_cdf, SumDecomposition};

/// Decibels to linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Average branch SNR `λ̄` and outage threshold `λ_th`, both linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub avg_snr: f64,
    pub threshold: f64,
}

impl LinkBudget {
    pub fn new(avg_snr: f64, threshold: f64) -> Result<Self> {
        if !(avg_snr > 0.0) || !avg_snr.is_finite() {
            return Err(Error::domain(
                "LinkBudget",
                format!("average SNR {avg_snr} must be > 0"),
            ));
        }
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(Error::domain(
                "LinkBudget",
                format!("threshold {threshold} must be > 0"),
            ));
        }
        Ok(Self { avg_snr, threshold })
    }

    /// Both quantities in dB.
    pub fn from_db(avg_snr_db: f64, threshold_db: f64) -> Result<Self> {
        Self::new(db_to_linear(avg_snr_db), db_to_linear(threshold_db))
    }

    /// Power level `mΩ λ_th/λ̄` at which a branch is in outage.
    pub fn power_threshold(&self, params: &GgParams<f64>) -> f64 {
        params.m * params.omega * self.threshold / self.avg_snr
    }
}

/// Leading-order value of a high-SNR expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticValue {
    pub value: f64,
    /// Decay exponent in `λ̄` (diversity order).
    pub order: f64,
    /// Coinciding shapes were split by the small shift of the leading kernels.
    pub shifted: bool,
}

/// High-SNR parametrization of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoteParams {
    /// `τ_j = min(m, β)` for the dominant (all-zero) index vector.
    pub tau: Vec<f64>,
    /// `t_j = max(m, β)` for the dominant index vector.
    pub t: Vec<f64>,
    /// `c_j = min(Nβ, j)`, `j = 1..Nm` (empty for non-integer `m`).
    pub c: Vec<f64>,
    /// `e_j = max(Nβ, j)`, `j = 1..Nm`.
    pub e: Vec<f64>,
    /// Diversity order `G_d = Σ τ_j = N min(m, β)`.
    pub g_d: f64,
    /// Coding gain such that the BPSK BER approaches `(G_c λ̄)^{-G_d}`.
    pub g_c: f64,
    pub shifted: bool,
}

/// Selection-combining outage `Pr(max λ_n < λ_th)`.
pub fn sc_outage(
    lb: &LinkBudget,
    params: &GgParams<f64>,
    prec: &Precision<f64>,
    ctrl: &SeriesControl<f64>,
) -> Result<SeriesValue<f64>> {
    let x = vec![lb.power_threshold(params); params.n];
    let mut v = joint_gg_cdf(&x, params, prec, ctrl)?;
    v.value = v.value.clamp(0.0, 1.0);
    Ok(v)
}

/// Whether index vectors with nonzero `α_j` drop out of the leading order.
/// With `β < m` every index vector decays like `λ̄^{-Nβ}`; otherwise only the
/// all-zero vector attains the smallest power.
fn dominant_only(params: &GgParams<f64>) -> bool {
    params.beta >= params.m - EPS_SHIFT
}

fn leading_series<F>(
    params: &GgParams<f64>,
    prec: &Precision<f64>,
    ctrl: &SeriesControl<f64>,
    mut lead: F,
) -> Result<(SeriesValue<f64>, bool)>
where
    F: FnMut(usize, f64) -> Result<Leading<f64>>,
{
    let only_zero = dominant_only(params);
    let mut shifted = false;
    let v = chain_series(prec, params.m, ctrl, |j, a| {
        if only_zero && a > params.m + 0.5 {
            return Ok(f64::NEG_INFINITY);
        }
        let l = lead(j, a)?;
        shifted |= l.shifted;
        Ok(l.ln_value)
    })?;
    Ok((v, shifted))
}

fn diversity_order(params: &GgParams<f64>) -> f64 {
    params.n as f64 * params.m.min(params.beta)
}

/// Leading high-SNR term of [`sc_outage`]; decays like `λ̄^{-N min(m, β)}`.
pub fn sc_outage_asymptotic(
    lb: &LinkBudget,
    params: &GgParams<f64>,
    prec: &Precision<f64>,
    ctrl: &SeriesControl<f64>,
) -> Result<AsymptoticValue> {
    params.validate()?;
    let x = lb.power_threshold(params);
    let (v, shifted) = leading_series(params, prec, ctrl, |j, a| {
        let theta = params.omega / (params.beta * prec.diag[j]);
        gg_cdf_leading(a, params.beta, x / theta)
    })?;
    Ok(AsymptoticValue {
        value: v.value,
        order: diversity_order(params),
        shifted,
    })
}

fn check_decomposition(params: &GgParams<f64>, d: &SumDecomposition) -> Result<()> {
    params.validate()?;
    if d.branches != params.n {
        return Err(Error::Invalid(format!(
            "decomposition has {} branches, parameters {}",
            d.branches, params.n
        )));
    }
    Ok(())
}

/// MRC outage `Pr(Σ λ_n < λ_th)` from the sum approximation.
pub fn mrc_outage(lb: &LinkBudget, params: &GgParams<f64>, d: &SumDecomposition) -> Result<f64> {
    check_decomposition(params, d)?;
    sum_cdf(lb.power_threshold(params), params.beta, d)
}

/// `ln E[S₂^{-a}]` for `S₂ = Σ Gamma(m_n, θ_n)`, `0 < a < Σ m_n`, from
/// `Γ(a) E[S^{-a}] = ∫ s^{a-1} Π (1 + θ_n s)^{-m_n} ds`.
fn ln_negative_moment(a: f64, d: &SumDecomposition) -> Result<f64> {
    let total: f64 = d.m_eff.iter().map(|&m| m as f64).sum();
    let th_max = d.omega_eff.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let th_min = d.omega_eff.iter().cloned().fold(f64::INFINITY, f64::min);
    let lo = -th_max.ln() - 60.0 / a - 5.0;
    let hi = -th_min.ln() + 60.0 / (total - a) + 5.0;
    let ln_g = |t: f64| {
        let mut v = a * t;
        for (&m, &th) in d.m_eff.iter().zip(&d.omega_eff) {
            v -= m as f64 * (th * t.exp()).ln_1p();
        }
        v
    };
    let breaks: Vec<f64> = d.omega_eff.iter().map(|th| -th.ln()).collect();
    Ok(log_quad("mrc_outage_asymptotic", ln_g, lo, hi, &breaks)? - ln_gamma(a))
}

/// Leading high-SNR term of [`mrc_outage`].
///
/// The approximation is the law of `u S₂` with `u ~ Gamma(Nβ, 1/(Nβ))` and
/// `S₂ = Σ Gamma(m_n, θ_n)`, `M = Σ m_n`. With `a = Nβ`:
/// `a < M` gives `(a z)^a E[S₂^{-a}]/Γ(a+1)`, `a > M` gives
/// `a^M Γ(a-M)/Γ(a) · z^M/(Γ(M+1) Π θ_n^{m_n})`, and `a = M` gives
/// `(a z)^M ln(1/z)/(Γ(a) Γ(M+1) Π θ_n^{m_n})`.
pub fn mrc_outage_asymptotic(lb: &LinkBudget, params: &GgParams<f64>, d: &SumDecomposition) -> Result<AsymptoticValue> {
    check_decomposition(params, d)?;
    let z = lb.power_threshold(params);
    let a = params.n as f64 * params.beta;
    let total: f64 = d.m_eff.iter().map(|&m| m as f64).sum();
    let ln_c_s = -ln_gamma(total + 1.0)
        - d.m_eff
            .iter()
            .zip(&d.omega_eff)
            .map(|(&m, &th)| m as f64 * th.ln())
            .sum::<f64>();
    let tie = (a - total).abs() <= EPS_SHIFT * total;
    let (ln_value, order) = if tie {
        if z >= 1.0 {
            return Err(Error::domain(
                "mrc_outage_asymptotic",
                "threshold outside the asymptotic region",
            ));
        }
        (ln_c_s + total * (a * z).ln() + (-z.ln()).ln() - ln_gamma(a), total)
    } else if a < total {
        (a * (a * z).ln() + ln_negative_moment(a, d)? - ln_gamma(a + 1.0), a)
    } else {
        (
            total * a.ln() + ln_gamma(a - total) - ln_gamma(a) + ln_c_s + total * z.ln(),
            total,
        )
    };
    Ok(AsymptoticValue {
        value: ln_value.exp(),
        order,
        shifted: tie,
    })
}

/// MGF of the MRC output SNR, `E[exp(-s Σ λ_n)]`.
pub fn mrc_snr_mgf(
    s: f64,
    avg_snr: f64,
    params: &GgParams<f64>,
    prec: &Precision<f64>,
    ctrl: &SeriesControl<f64>,
) -> Result<SeriesValue<f64>> {
    if !(s > 0.0) || !(avg_snr > 0.0) {
        return Err(Error::domain(
            "mrc_snr_mgf",
            format!("need s > 0 and avg SNR > 0, got {s}, {avg_snr}"),
        ));
    }
    let arg = s * avg_snr / (params.m * params.omega);
    joint_gg_mgf(&vec![arg; params.n], params, prec, ctrl)
}

/// Linear combination `Σ c_k v_k` of series values, carrying the worst
/// diagnostics.
pub(crate) fn combine(parts: &[(f64, SeriesValue<f64>)]) -> SeriesValue<f64> {
    let value: f64 = parts.iter().map(|(c, v)| c * v.value).sum();
    SeriesValue {
        value,
        ln_value: value.ln(),
        index_cap: parts.iter().map(|p| p.1.index_cap).max().unwrap_or(0),
        terms: parts.iter().map(|p| p.1.terms).max().unwrap_or(0),
        last_increment: parts.iter().map(|(c, v)| c * v.last_increment).sum(),
        weight_deficit: parts.iter().map(|p| p.1.weight_deficit).fold(0.0, f64::max),
    }
}

/// NBFSK bit error rate `0.5 M(1/2)`.
pub fn mrc_ber_nbfsk(
    avg_snr: f64,
    params: &GgParams<f64>,
    prec: &Precision<f64>,
    ctrl: &SeriesControl<f64>,
) -> Result<SeriesValue<f64>> {
    Ok(combine(&[(0.5, mrc_snr_mgf(0.5, avg_snr, params, prec, ctrl)?)]))
}

/// BPSK bit error rate from the exponential Q approximation,
/// `M(1)/12 + M(4/3)/4`.
pub fn mrc_ber_bpsk(
    avg_snr: f64,
    params: &GgParams<f64>,
    prec: &Precision<f64>,
    ctrl: &SeriesControl<f64>,
) -> Result<SeriesValue<f64>> {
    Ok(combine(&[
        (1.0 / 12.0, mrc_snr_mgf(1.0, avg_snr, params, prec, ctrl)?),
        (0.25, mrc_snr_mgf(4.0 / 3.0, avg_snr, params, prec, ctrl)?),
    ]))
}

fn mgf_leading(
    s: f64,
    avg_snr: f64,
    params: &GgParams<f64>,
    prec: &Precision<f64>,
    ctrl: &SeriesControl<f64>,
) -> Result<(SeriesValue<f64>, bool)> {
    let arg = s * avg_snr / (params.m * params.omega);
    leading_series(params, prec, ctrl, |j, a| {
        let theta = params.omega / (params.beta * prec.diag[j]);
        gg_mgf_leading(a, params.beta, 1.0 / (arg * theta))
    })
}

/// Leading high-SNR term of [`mrc_ber_bpsk`], both exponential terms kept.
pub fn mrc_ber_bpsk_asymptotic(
    avg_snr: f64,
    params: &GgParams<f64>,
    prec: &Precision<f64>,
    ctrl: &SeriesControl<f64>,
) -> Result<AsymptoticValue> {
    params.validate()?;
    let (v1, s1) = mgf_leading(1.0, avg_snr, params, prec, ctrl)?;
    let (v2, s2) = mgf_leading(4.0 / 3.0, avg_snr, params, prec, ctrl)?;
    Ok(AsymptoticValue {
        value: v1.value / 12.0 + v2.value / 4.0,
        order: diversity_order(params),
        shifted: s1 || s2,
    })
}

/// Reference SNR at which the coding gain is read off when the leading term
/// is not a pure power (coinciding shapes).
const GAIN_REFERENCE_SNR: f64 = 1e5;

/// Diversity order and coding gain of the BPSK BER.
pub fn high_snr_params(
    params: &GgParams<f64>,
    prec: &Precision<f64>,
    ctrl: &SeriesControl<f64>,
) -> Result<AsymptoteParams> {
    params.validate()?;
    let n = params.n;
    let g_d = diversity_order(params);
    let asym = mrc_ber_bpsk_asymptotic(GAIN_REFERENCE_SNR, params, prec, ctrl)?;
    let ln_coeff = asym.value.ln() + g_d * GAIN_REFERENCE_SNR.ln();
    let g_c = (-ln_coeff / g_d).exp();
    let nb = n as f64 * params.beta;
    let nm = n as f64 * params.m;
    let (c, e) = if (nm - nm.round()).abs() < 1e-12 {
        (1..=nm.round() as usize)
            .map(|j| (nb.min(j as f64), nb.max(j as f64)))
            .unzip()
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(AsymptoteParams {
        tau: vec![params.m.min(params.beta); n],
        t: vec![params.m.max(params.beta); n],
        c,
        e,
        g_d,
        g_c,
        shifted: asym.shifted,
    })
}
