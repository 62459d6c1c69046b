//! Special functions: Γ, incomplete Γ, modified Bessel `I_v`/`K_v`, `₁F₂`,
//! the Gamma-Gamma Meijer-G kernels and the Gaussian Q-function.

pub mod bessel;
pub mod gamma;
pub mod hyper;
pub mod meijer;
pub mod q;

pub use bessel::{bessel_i, bessel_k, ln_bessel_i, ln_bessel_k};
pub use gamma::{gamma_fn, gamma_p, gamma_pq, gamma_q, ln_factorial, ln_gamma, ln_gamma_p, ln_gamma_signed};
pub use hyper::{hyp1f2, hyp1f2_series, KernelAccuracy, SeriesSum};
pub use meijer::{
    fso_params, gg_cdf_kernel, gg_cdf_kernel_hyp, gg_cdf_leading, gg_mgf_kernel, gg_mgf_leading, gg_sq_laplace_kernel,
    integer_difference, ln_gg_cdf_kernel, ln_gg_density, ln_gg_mgf_kernel, ln_gg_sq_laplace_kernel, meijer_g_cdf,
    meijer_g_fso, meijer_g_mgf, Leading, EPS_SHIFT,
};
pub use q::{erfc, gauss_q, q_exp_approx};
