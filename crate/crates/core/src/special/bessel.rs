use crate::error::{Error, Result};
use crate::real::Real;

use super::gamma::ln_gamma_signed;

const MAX_TERMS: usize = 100_000;

const G1_DAT: [f64; 14] = [
    -1.145_164_083_662_683,
    0.006_360_853_113_470_843,
    0.001_862_451_930_072_068_4,
    0.000_152_833_085_873_453_5,
    0.000_017_017_464_011_802_038,
    -6.459_750_292_334_725e-7,
    -5.181_984_843_251_938e-8,
    4.518_909_289_485_818e-10,
    3.243_322_737_102_087e-11,
    6.830_943_402_494_752e-13,
    2.835_350_275_517_210_3e-14,
    -7.988_390_576_932_36e-16,
    -3.372_667_730_077_195e-17,
    -3.658_633_480_921_052e-20,
];

const G2_DAT: [f64; 15] = [
    1.882_645_524_949_671_9,
    -0.077_490_658_396_167_52,
    -0.018_256_714_847_324_93,
    0.000_633_803_020_907_489_6,
    0.000_076_229_054_350_872_9,
    -9.550_164_756_172_044e-7,
    -8.892_726_810_788_635e-8,
    -1.952_133_477_231_961_4e-9,
    -9.400_305_273_588_516e-11,
    4.687_513_384_953_239e-12,
    2.265_853_574_692_576e-13,
    -1.172_550_969_848_801_5e-15,
    -7.044_133_820_024_522e-17,
    -2.437_787_831_010_769_6e-18,
    -7.522_524_321_825_39e-20,
];

fn cheb<T: Real>(c: &[f64], y: T) -> T {
    let y2 = y + y;
    let (mut d, mut dd) = (T::zero(), T::zero());
    for &cj in c.iter().skip(1).rev() {
        let tmp = d;
        d = y2 * d - dd + T::lit(cj);
        dd = tmp;
    }
    y * d - dd + T::lit(0.5 * c[0])
}

/// Temme's auxiliary functions `(1/Γ(1+ν), 1/Γ(1-ν), γ1(ν), γ2(ν))` for `|ν| ≤ 1/2`.
fn temme_gamma<T: Real>(nu: T) -> (T, T, T, T) {
    let y = T::lit(4.0) * nu.abs() - T::one();
    let g1 = cheb(&G1_DAT, y);
    let g2 = cheb(&G2_DAT, y);
    (g2 - nu * g1, g2 + nu * g1, g1, g2)
}

/// `(K_ν(x), K_{ν+1}(x))` for `|ν| ≤ 1/2`, `0 < x < 2`, by Temme's series.
fn k_temme<T: Real>(nu: T, x: T) -> Result<(T, T)> {
    let eps = T::epsilon();
    let half_x = T::lit(0.5) * x;
    let ln_half_x = half_x.ln();
    let half_x_nu = (nu * ln_half_x).exp();
    let pi_nu = T::PI() * nu;
    let sigma = -nu * ln_half_x;
    let sinrat = if pi_nu.abs() < eps {
        T::one()
    } else {
        pi_nu / pi_nu.sin()
    };
    let sinhrat = if sigma.abs() < eps {
        T::one()
    } else {
        sigma.sinh() / sigma
    };
    let (inv_g1p, inv_g1m, g1, g2) = temme_gamma(nu);

    let mut fk = sinrat * (sigma.cosh() * g1 - sinhrat * ln_half_x * g2);
    let mut pk = T::lit(0.5) / half_x_nu / inv_g1p;
    let mut qk = T::lit(0.5) * half_x_nu / inv_g1m;
    let mut ck = T::one();
    let mut sum0 = fk;
    let mut sum1 = pk;
    for k in 1..MAX_TERMS {
        let kf = T::from_usize_lossy(k);
        fk = (kf * fk + pk + qk) / (kf * kf - nu * nu);
        ck = ck * half_x * half_x / kf;
        pk = pk / (kf - nu);
        qk = qk / (kf + nu);
        let hk = -kf * fk + pk;
        let del0 = ck * fk;
        sum0 = sum0 + del0;
        sum1 = sum1 + ck * hk;
        if del0.abs() < T::lit(0.5) * sum0.abs() * eps {
            return Ok((sum0, sum1 * T::lit(2.0) / x));
        }
    }
    Err(Error::Convergence {
        func: "bessel_k",
        terms: MAX_TERMS,
        last_increment: (ck * fk).as_f64(),
    })
}

/// `(ln K_ν(x), K_{ν+1}(x)/K_ν(x))` for `|ν| ≤ 1/2`, `x ≥ 2`, by Steed's method
/// applied to the second continued fraction.
fn k_steed<T: Real>(nu: T, x: T) -> Result<(T, T)> {
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut bi = two * (T::one() + x);
    let mut di = T::one() / bi;
    let mut delhi = di;
    let mut hi = di;
    let mut qi = T::zero();
    let mut qip1 = T::one();
    let a1 = T::lit(0.25) - nu * nu;
    let mut ai = -a1;
    let mut ci = -ai;
    let mut qq = ci;
    let mut s = T::one() + qq * delhi;
    for i in 2..MAX_TERMS {
        let fi = T::from_usize_lossy(i);
        ai = ai - two * (fi - T::one());
        ci = -ai * ci / fi;
        let tmp = (qi - bi * qip1) / ai;
        qi = qip1;
        qip1 = tmp;
        qq = qq + ci * qip1;
        bi = bi + two;
        di = T::one() / (bi + ai * di);
        delhi = (bi * di - T::one()) * delhi;
        hi = hi + delhi;
        let dels = qq * delhi;
        s = s + dels;
        if (dels / s).abs() < eps {
            let h = a1 * hi;
            let ln_k = T::lit(0.5) * (T::PI() / (two * x)).ln() - x - s.ln();
            let ratio = (nu + x + T::lit(0.5) - h) / x;
            return Ok((ln_k, ratio));
        }
    }
    Err(Error::Convergence {
        func: "bessel_k",
        terms: MAX_TERMS,
        last_increment: s.as_f64(),
    })
}

/// `ln K_v(x)` for real order `v` and `x > 0`. Stays finite where `K_v`
/// itself over- or underflows.
pub fn ln_bessel_k<T: Real>(v: T, x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() || !v.is_finite() {
        return Err(Error::domain("bessel_k", format!("v = {v}, x = {x}")));
    }
    let v = v.abs();
    let n = (v + T::lit(0.5)).floor();
    let mu = v - n;
    let nsteps = n.to_usize().unwrap_or(0);
    let (mut ln_scale, mut k_prev, mut k_cur) = if x < T::lit(2.0) {
        let (k0, k1) = k_temme(mu, x)?;
        (T::zero(), k0, k1)
    } else {
        let (ln_k, ratio) = k_steed(mu, x)?;
        (ln_k, T::one(), ratio)
    };
    if nsteps == 0 {
        return Ok(ln_scale + k_prev.ln());
    }
    // upward recurrence K_{μ+i+1} = 2(μ+i)/x K_{μ+i} + K_{μ+i-1}
    let big = T::max_value().sqrt().sqrt();
    for i in 1..nsteps {
        let order = mu + T::from_usize_lossy(i);
        let next = T::lit(2.0) * order / x * k_cur + k_prev;
        k_prev = k_cur;
        k_cur = next;
        if k_cur > big {
            ln_scale = ln_scale + k_cur.ln();
            k_prev = k_prev / k_cur;
            k_cur = T::one();
        }
    }
    Ok(ln_scale + k_cur.ln())
}

/// Modified Bessel function of the second kind `K_v(x)`; even in `v`.
pub fn bessel_k<T: Real>(v: T, x: T) -> Result<T> {
    let lk = ln_bessel_k(v, x)?;
    if lk > T::max_value().ln() {
        return Err(Error::Overflow {
            func: "bessel_k",
            detail: format!("v = {v}, x = {x}"),
        });
    }
    Ok(lk.exp())
}

/// `ln I_v(x)` for `v > -1`, `x ≥ 0`, by the ascending series (rescaled to
/// stay in range), switching to the Hankel asymptotic series for large `x`.
pub fn ln_bessel_i<T: Real>(v: T, x: T) -> Result<T> {
    if !(v > -T::one()) || !(x >= T::zero()) || !x.is_finite() || !v.is_finite() {
        return Err(Error::domain("bessel_i", format!("v = {v}, x = {x}")));
    }
    if x == T::zero() {
        return Ok(if v == T::zero() {
            T::zero()
        } else if v > T::zero() {
            T::neg_infinity()
        } else {
            T::infinity()
        });
    }
    if x > T::lit(40.0) && x > T::lit(2.0) * v * v {
        return ln_bessel_i_asymptotic(v, x);
    }
    let eps = T::epsilon();
    let q = T::lit(0.25) * x * x;
    let big = T::max_value().sqrt().sqrt();
    let mut term = T::one();
    let mut sum = T::one();
    let mut ln_scale = T::zero();
    for k in 0..MAX_TERMS {
        let kf = T::from_usize_lossy(k);
        term = term * q / ((kf + T::one()) * (kf + T::one() + v));
        sum = sum + term;
        if sum > big {
            ln_scale = ln_scale + sum.ln();
            term = term / sum;
            sum = T::one();
        }
        if term < eps * sum && kf + T::one() > T::lit(0.5) * x {
            let (lg, _) = ln_gamma_signed(v + T::one());
            return Ok(v * (T::lit(0.5) * x).ln() - lg + ln_scale + sum.ln());
        }
    }
    Err(Error::Convergence {
        func: "bessel_i",
        terms: MAX_TERMS,
        last_increment: term.as_f64(),
    })
}

fn ln_bessel_i_asymptotic<T: Real>(v: T, x: T) -> Result<T> {
    let mu = T::lit(4.0) * v * v;
    let mut term = T::one();
    let mut sum = T::one();
    let eight_x = T::lit(8.0) * x;
    for k in 1..60 {
        let kf = T::from_usize_lossy(k);
        let odd = T::lit(2.0) * kf - T::one();
        let next = -term * (mu - odd * odd) / (kf * eight_x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum = sum + term;
        if term.abs() < T::epsilon() * sum.abs() {
            break;
        }
    }
    Ok(x - T::lit(0.5) * (T::lit(2.0) * T::PI() * x).ln() + sum.ln())
}

/// Modified Bessel function of the first kind `I_v(x)`, `v > -1`, `x ≥ 0`.
/// Results beyond the floating-point range are reported as overflow.
pub fn bessel_i<T: Real>(v: T, x: T) -> Result<T> {
    let li = ln_bessel_i(v, x)?;
    if li > T::max_value().ln() {
        return Err(Error::Overflow {
            func: "bessel_i",
            detail: format!("v = {v}, x = {x}"),
        });
    }
    Ok(li.exp())
}
