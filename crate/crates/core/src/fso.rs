//! Free-space optical links: strong-turbulence Gamma-Gamma parameters from the
//! link geometry and the BER of `N` correlated apertures with optimal
//! combining.
//!
//! Irradiances are normalized to `E(P_n) = 1`, so the Gamma-Gamma scale is
//! `Ω = 1/m`. The electrical SNR is `λ̄ P_n²` per aperture and the conditional
//! error probability is `Q(√(λ̄ Σ P_n² / (2N)))`.

use crate::error::{Error, Result};
use crate::mvgg::{joint_gg_sq_laplace, GgParams, Precision, SeriesControl, SeriesValue};
use crate::rxperf::combine;

/// Refractive-index structure parameter `C_n²` (m^{-2/3}) of the reference links.
pub const CN2_REFERENCE: f64 = 1.7e-14;
/// Optical wavenumber `k` (rad/m) of the reference links.
pub const WAVENUMBER_REFERENCE: f64 = 0.405e7;

/// Geometry and turbulence strength of one optical link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceLink {
    pub cn2: f64,
    pub k: f64,
    /// Link length `L` (m).
    pub length: f64,
    /// Receive-aperture diameter `D` (m); zero for a point receiver.
    pub aperture: f64,
}

/// Quantities derived from a [`TurbulenceLink`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceParams {
    /// `σ₂² = 0.492 C_n² k^{7/6} L^{11/6}`.
    pub sigma2_sq: f64,
    /// `d = √(k D²/(4L))`.
    pub d: f64,
    pub beta: f64,
    pub m: f64,
}

impl TurbulenceLink {
    pub fn new(cn2: f64, k: f64, length: f64, aperture: f64) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(cn2) || !ok(k) || !ok(length) || !(aperture >= 0.0 && aperture.is_finite()) {
            return Err(Error::domain(
                "TurbulenceLink",
                format!("need C_n², k, L > 0 and D >= 0, got {cn2}, {k}, {length}, {aperture}"),
            ));
        }
        Ok(Self {
            cn2,
            k,
            length,
            aperture,
        })
    }

    /// Reference constants with the given length and a point receiver.
    pub fn reference(length: f64) -> Result<Self> {
        Self::new(CN2_REFERENCE, WAVENUMBER_REFERENCE, length, 0.0)
    }

    pub fn rytov_variance(&self) -> f64 {
        0.492 * self.cn2 * self.k.powf(7.0 / 6.0) * self.length.powf(11.0 / 6.0)
    }

    pub fn aperture_param(&self) -> f64 {
        (self.k * self.aperture * self.aperture / (4.0 * self.length)).sqrt()
    }
}

/// Shadowing shape `β` and fading shape `m` of a strong-turbulence link.
pub fn turbulence_params(link: &TurbulenceLink) -> TurbulenceParams {
    let s2 = link.rytov_variance();
    let d = link.aperture_param();
    let d2 = d * d;
    let s125 = s2.powf(1.2);
    let beta_arg = 0.49 * s2 / (1.0 + 0.18 * d2 + 0.56 * s125).powf(7.0 / 6.0);
    let m_arg = 0.51 * s2 * (1.0 + 0.69 * s125).powf(-5.0 / 6.0) / (1.0 + 0.9 * d2 + 0.62 * d2 * s125).powf(5.0 / 6.0);
    TurbulenceParams {
        sigma2_sq: s2,
        d,
        beta: 1.0 / beta_arg.exp_m1(),
        m: 1.0 / m_arg.exp_m1(),
    }
}

/// Gamma-Gamma parameters of `n` unit-mean irradiances.
pub fn irradiance_params(m: f64, beta: f64, n: usize) -> Result<GgParams<f64>> {
    GgParams::new(m, beta, 1.0 / m, n)
}

/// `Λ(x) = E[exp(-x² Σ P_n²)]` for unit-mean irradiances.
pub fn oc_lambda(
    x: f64,
    m: f64,
    beta: f64,
    prec: &Precision<f64>,
    ctrl: &SeriesControl<f64>,
) -> Result<SeriesValue<f64>> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("oc_lambda", format!("x = {x} must be finite and >= 0")));
    }
    let params = irradiance_params(m, beta, prec.n())?;
    joint_gg_sq_laplace(&vec![x * x; prec.n()], &params, prec, ctrl)
}

/// Optimal-combining BER with the exponential Q approximation,
/// `Λ(√(λ̄/4N))/12 + Λ(√(λ̄/3N))/4`.
pub fn oc_ber(
    avg_snr: f64,
    m: f64,
    beta: f64,
    prec: &Precision<f64>,
    ctrl: &SeriesControl<f64>,
) -> Result<SeriesValue<f64>> {
    if !(avg_snr > 0.0) || !avg_snr.is_finite() {
        return Err(Error::domain("oc_ber", format!("average SNR {avg_snr} must be > 0")));
    }
    let n = prec.n() as f64;
    Ok(combine(&[
        (
            1.0 / 12.0,
            oc_lambda((avg_snr / (4.0 * n)).sqrt(), m, beta, prec, ctrl)?,
        ),
        (0.25, oc_lambda((avg_snr / (3.0 * n)).sqrt(), m, beta, prec, ctrl)?),
    ]))
}
