//! Reference implementations shared by the integration tests. Everything here
//! is coded from first principles and deliberately avoids the library's own
//! special functions and series machinery.

#![allow(dead_code)]

use std::f64::consts::PI;

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut s = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + s.ln()
}

/// Trapezoidal rule on `[lo, hi]` with `n` panels.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = 0.5 * (f(lo) + f(hi));
    for i in 1..n {
        s += f(lo + h * i as f64);
    }
    s * h
}

/// `∫_0^∞ f(w) dw` by the trapezoidal rule in `t = ln w` over `[lo, hi]`.
pub fn integrate_positive<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    trapezoid(
        |t| {
            let w = t.exp();
            f(w) * w
        },
        lo,
        hi,
        n,
    )
}

/// `ln K_v(x)` from `K_v(x) = ∫_0^∞ exp(-x cosh t) cosh(v t) dt`.
pub fn ln_bessel_k(v: f64, x: f64) -> f64 {
    let v = v.abs();
    let g = |t: f64| -x * t.cosh() + v * t + (0.5 * (1.0 + (-2.0 * v * t).exp())).ln();
    // the integrand peaks near asinh(v/x); it has decayed by e^-60 well before `hi`
    let peak = (v / x).asinh();
    let mut hi = peak + 1.0;
    while g(hi) > g(peak) - 60.0 {
        hi += 0.5;
    }
    let n = 4000;
    let h = hi / n as f64;
    let gmax = (0..=n).map(|i| g(h * i as f64)).fold(f64::NEG_INFINITY, f64::max);
    let s = trapezoid(|t| (g(t) - gmax).exp(), 0.0, hi, n);
    gmax + s.ln()
}

/// Regularized lower incomplete Gamma `P(a, y)` by its power series.
pub fn gamma_p(a: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= y / (a + k);
        sum += term;
        k += 1.0;
    }
    (a * y.ln() - y - ln_gamma(a) + sum.ln()).exp().min(1.0)
}

/// Gaussian tail `Q(x)`, `x ≥ 0`, from `Q(x) = (1/π) ∫_0^{π/2} exp(-x²/(2 sin²θ)) dθ`.
pub fn gauss_q(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    trapezoid(
        |th| {
            let s = th.sin();
            if s == 0.0 {
                0.0
            } else {
                (-x * x / (2.0 * s * s)).exp()
            }
        },
        0.0,
        PI / 2.0,
        400,
    ) / PI
}

/// Gamma density with shape `a` and scale `s`.
pub fn gamma_pdf(x: f64, a: f64, s: f64) -> f64 {
    ((a - 1.0) * x.ln() - x / s - ln_gamma(a) - a * s.ln()).exp()
}

/// Density of `c X Y` with `X ~ Gamma(a, 1)`, `Y ~ Gamma(b, 1)`.
pub fn product_gamma_pdf(z: f64, a: f64, b: f64, c: f64) -> f64 {
    let y = z / c;
    let l = std::f64::consts::LN_2 + 0.5 * (a + b) * y.ln() + ln_bessel_k(a - b, 2.0 * y.sqrt())
        - ln_gamma(a)
        - ln_gamma(b);
    l.exp() / z
}

/// CDF of `c X Y` by quadrature over `Y`.
pub fn product_gamma_cdf(z: f64, a: f64, b: f64, c: f64) -> f64 {
    integrate_positive(|y| gamma_pdf(y, b, 1.0) * gamma_p(a, z / (c * y)), -40.0, 5.0, 3000)
}

/// Tridiagonal inverse of the exponential matrix `Σ_ij = ρ^{|i-j|}`:
/// `(diag, upper, det)`.
pub fn exponential_precision(n: usize, rho: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let s = 1.0 - rho * rho;
    let diag = (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                1.0 / s
            } else {
                (1.0 + rho * rho) / s
            }
        })
        .collect();
    let upper = vec![-rho / s; n - 1];
    (diag, upper, 1.0 / s.powi(n as i32 - 1))
}

/// One component of the Gamma mixture of the correlated powers: per-branch
/// shapes `m + α_j` with probability `weight`.
pub struct MixtureTerm {
    pub shapes: Vec<f64>,
    pub weight: f64,
}

/// Enumerates the mixture obtained by expanding every Bessel-I factor of the
/// joint power density, with each index capped at `cap`.
pub fn power_mixture(diag: &[f64], upper: &[f64], det: f64, m: f64, cap: usize) -> Vec<MixtureTerm> {
    let n = diag.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n - 1];
    loop {
        let mut l = m * det.ln() - ln_gamma(m);
        for (k, &i) in idx.iter().enumerate() {
            let i = i as f64;
            l += 2.0 * i * upper[k].abs().ln() - ln_gamma(i + 1.0) - ln_gamma(m + i);
        }
        let mut shapes = Vec::with_capacity(n);
        for j in 0..n {
            let alpha = if j > 0 { idx[j - 1] } else { 0 } + if j + 1 < n { idx[j] } else { 0 };
            let a = m + alpha as f64;
            l += ln_gamma(a) - a * diag[j].ln();
            shapes.push(a);
        }
        out.push(MixtureTerm {
            shapes,
            weight: l.exp(),
        });
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] <= cap {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `Σ weight Π_j g(j, m + α_j)` over the mixture, evaluating `g` once per
/// branch and shape.
pub fn mixture_expectation<G: Fn(usize, f64) -> f64>(mix: &[MixtureTerm], n: usize, m: f64, g: G) -> f64 {
    let top = mix
        .iter()
        .flat_map(|t| t.shapes.iter())
        .map(|&a| (a - m).round() as usize)
        .max()
        .unwrap_or(0);
    let table: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..=top).map(|alpha| g(j, m + alpha as f64)).collect())
        .collect();
    mix.iter()
        .map(|t| {
            t.weight
                * t.shapes
                    .iter()
                    .enumerate()
                    .map(|(j, &a)| table[j][(a - m).round() as usize])
                    .product::<f64>()
        })
        .sum()
}

/// Joint density of `z_j = ω_j u_j` for a mixture of powers with shapes
/// `m + α_j`, scales `omega / diag[j]` and independent unit-mean `Gamma(β)`
/// shadowing.
pub fn mixture_joint_pdf(z: &[f64], mix: &[MixtureTerm], diag: &[f64], m: f64, omega: f64, beta: f64) -> f64 {
    mixture_expectation(mix, z.len(), m, |j, a| {
        product_gamma_pdf(z[j], a, beta, omega / (diag[j] * beta))
    })
}

/// Joint CDF counterpart of [`mixture_joint_pdf`].
pub fn mixture_joint_cdf(x: &[f64], mix: &[MixtureTerm], diag: &[f64], omega: f64, beta: f64) -> f64 {
    mix.iter()
        .map(|t| {
            t.weight
                * x.iter()
                    .enumerate()
                    .map(|(j, &xj)| product_gamma_cdf(xj, t.shapes[j], beta, omega / (diag[j] * beta)))
                    .product::<f64>()
        })
        .sum()
}

/// Kibble's bivariate Gamma density of powers with Gaussian correlation `r`
/// and `E(ω) = mΩ`.
pub fn bivariate_gamma_pdf(w1: f64, w2: f64, m: f64, omega: f64, r: f64) -> f64 {
    let s = 1.0 - r * r;
    let x = r.abs() * (w1 * w2).sqrt() / (omega * s);
    // x^{-(m-1)} I_{m-1}(2x) = Σ x^{2k} / (k! Γ(m+k))
    let mut t = (-ln_gamma(m)).exp();
    let mut series = t;
    let mut k = 0.0;
    while t > series * 1e-17 || k < 2.0 * x {
        t *= x * x / ((k + 1.0) * (m + k));
        series += t;
        k += 1.0;
    }
    let l = -m * s.ln() - ln_gamma(m) - 2.0 * m * omega.ln() + (m - 1.0) * (w1 * w2).ln() - (w1 + w2) / (omega * s);
    l.exp() * series
}
