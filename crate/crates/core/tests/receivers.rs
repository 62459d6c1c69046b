mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use corrfade::corrmat::{green_fit, CorrelationSpec};
use corrfade::fso::{irradiance_params, oc_ber, oc_lambda};
use corrfade::mvgg::{gg_cdf, GgParams, Precision, SeriesControl};
use corrfade::rxperf::{
    db_to_linear, high_snr_params, mrc_ber_bpsk, mrc_ber_bpsk_asymptotic, mrc_outage, sc_outage, LinkBudget,
};
use corrfade::special::q_exp_approx;
use corrfade::sumdist::{build_ky, eigen_cluster, CLUSTER_TOL};

fn exp_prec(n: usize, rho: f64) -> Precision<f64> {
    Precision::from_green(&green_fit(&CorrelationSpec::exponential(n, rho).unwrap(), 1e-12).unwrap()).unwrap()
}

/// `E[Q(√(2λ))]` for a single branch with `λ = (λ̄/(mβ)) X Y`, through
/// Craig's form of `Q` and the Gamma average over `X`.
fn exact_bpsk_single(avg_snr: f64, m: f64, beta: f64) -> f64 {
    let c = avg_snr / (m * beta);
    common::trapezoid(
        |th| {
            let s2 = th.sin().powi(2);
            if s2 == 0.0 {
                return 0.0;
            }
            common::integrate_positive(
                |y| common::gamma_pdf(y, beta, 1.0) * (1.0 + c * y / s2).powf(-m),
                -60.0,
                5.0,
                1500,
            )
        },
        0.0,
        PI / 2.0,
        200,
    ) / PI
}

#[test]
fn bpsk_approximation_under_heavy_shadowing() {
    let one = Precision::independent(1).unwrap();
    let params = GgParams::new(1.0, 1.0931, 1.0, 1).unwrap();
    for db in [5.0, 10.0, 15.0, 20.0] {
        let snr = db_to_linear(db);
        let exact = exact_bpsk_single(snr, 1.0, 1.0931);
        let approx = mrc_ber_bpsk(snr, &params, &one, &SeriesControl::default())
            .unwrap()
            .value;
        assert!(((approx - exact) / exact).abs() < 0.05, "{db} dB: {approx} vs {exact}");
    }
}

#[test]
fn bpsk_approximation_ratio_at_high_snr() {
    // with a = min(m, β) the density of λ behaves like λ^{a-1} near zero, so
    // approx/exact → Γ(a) (1/12 + (3/4)^a/4) · 2a√π / Γ(a + 1/2)
    let one = Precision::independent(1).unwrap();
    for &(m, beta) in &[(1.0, 1.0931), (2.0, 4.0), (1.5, 7.9115)] {
        let a = f64::min(m, beta);
        let limit = common::ln_gamma(a).exp() * (1.0 / 12.0 + 0.75f64.powf(a) / 4.0) * 2.0 * a * PI.sqrt()
            / common::ln_gamma(a + 0.5).exp();
        let params = GgParams::new(m, beta, 1.0, 1).unwrap();
        let snr = db_to_linear(60.0);
        let ratio = mrc_ber_bpsk(snr, &params, &one, &SeriesControl::default())
            .unwrap()
            .value
            / exact_bpsk_single(snr, m, beta);
        assert_relative_eq!(ratio, limit, max_relative = 1e-2);
    }
}

#[test]
fn single_aperture_oc_ber_matches_quadrature() {
    let one = Precision::independent(1).unwrap();
    let ctrl = SeriesControl {
        rel_tol: 1e-12,
        ..SeriesControl::default()
    };
    for &(m, beta) in &[
        (2.539890145782141, 2.930310946028995),
        (1.518824769844647, 2.102523871522184),
    ] {
        let c = 1.0 / (m * beta);
        for db in [0.0, 10.0, 20.0, 30.0] {
            let snr = db_to_linear(db);
            let want = common::integrate_positive(
                |p| common::product_gamma_pdf(p, m, beta, c) * q_exp_approx((snr / 2.0).sqrt() * p),
                -40.0,
                5.0,
                1500,
            );
            assert_relative_eq!(
                oc_ber(snr, m, beta, &one, &ctrl).unwrap().value,
                want,
                max_relative = 1e-6
            );
        }
    }
}

#[test]
fn exponential_oc_lambda_matches_enumerated_mixture() {
    let (m, beta, rho) = (2.5, 3.0, 0.5);
    let prec = exp_prec(3, rho);
    let ctrl = SeriesControl {
        rel_tol: 1e-12,
        max_index: 200,
        max_branches: 6,
    };
    let (d, u, det) = common::exponential_precision(3, rho);
    let mix = common::power_mixture(&d, &u, det, m, 25);
    let omega = 1.0 / m;
    for x in [0.5, 3.0] {
        let want = common::mixture_expectation(&mix, 3, m, |j, a| {
            // power Gamma(a, Ω/p_jj) times unit-mean Gamma(β) shadowing
            let c = omega / (d[j] * beta);
            common::integrate_positive(
                |y| {
                    common::gamma_pdf(y, beta, 1.0)
                        * common::integrate_positive(
                            |w| common::gamma_pdf(w, a, 1.0) * (-(x * c * w * y).powi(2)).exp(),
                            -40.0,
                            5.0,
                            400,
                        )
                },
                -40.0,
                5.0,
                400,
            )
        });
        let got = oc_lambda(x, m, beta, &prec, &ctrl).unwrap().value;
        assert_relative_eq!(got, want, max_relative = 1e-8);
    }
}

#[test]
fn irradiance_has_unit_mean() {
    let p = irradiance_params(2.54, 2.93, 3).unwrap();
    assert_relative_eq!(p.m * p.omega, 1.0, max_relative = 1e-15);
}

#[test]
fn single_branch_outages_are_exact() {
    let one = Precision::independent(1).unwrap();
    let ctrl = SeriesControl::default();
    let params = GgParams::new(2.0, 1.0931, 1.0, 1).unwrap();
    let d = eigen_cluster(
        &build_ky(&[1.0], &nalgebra::DMatrix::identity(1, 1)).unwrap(),
        2.0,
        CLUSTER_TOL,
    )
    .unwrap();
    for db in [0.0, 10.0, 20.0] {
        let lb = LinkBudget::from_db(db, 3.0).unwrap();
        let want = gg_cdf(lb.power_threshold(&params), 1.0931, 2.0, 1.0).unwrap();
        assert_relative_eq!(
            sc_outage(&lb, &params, &one, &ctrl).unwrap().value,
            want,
            max_relative = 1e-12
        );
        assert_relative_eq!(mrc_outage(&lb, &params, &d).unwrap(), want, max_relative = 1e-8);
    }
}

#[test]
fn adding_a_branch_never_hurts_selection() {
    let ctrl = SeriesControl::default();
    for db in [0.0, 10.0, 20.0] {
        let lb = LinkBudget::from_db(db, 0.0).unwrap();
        let mut last = 1.0;
        for n in 1..=4 {
            let params = GgParams::new(2.0, 1.5, 1.0, n).unwrap();
            let prec = if n == 1 {
                Precision::independent(1).unwrap()
            } else {
                exp_prec(n, 0.4)
            };
            let v = sc_outage(&lb, &params, &prec, &ctrl).unwrap().value;
            assert!(v < last, "{db} dB, N = {n}");
            last = v;
        }
    }
}

#[test]
fn bpsk_slope_reaches_diversity_order() {
    let ctrl = SeriesControl::default();
    for &(m, beta, n) in &[(2.0, 4.0, 3), (2.0, 1.0931, 4), (1.0, 1.5, 2)] {
        let params = GgParams::new(m, beta, 1.0, n).unwrap();
        let prec = exp_prec(n, 0.3);
        let hp = high_snr_params(&params, &prec, &ctrl).unwrap();
        let (lo, hi) = (db_to_linear(35.0), db_to_linear(50.0));
        let slope = -(mrc_ber_bpsk(hi, &params, &prec, &ctrl).unwrap().value.ln()
            - mrc_ber_bpsk(lo, &params, &prec, &ctrl).unwrap().value.ln())
            / (hi.ln() - lo.ln());
        assert!(((slope - hp.g_d) / hp.g_d).abs() < 0.05, "slope {slope} vs {}", hp.g_d);
        let asym = mrc_ber_bpsk_asymptotic(hi, &params, &prec, &ctrl).unwrap().value;
        let exact = mrc_ber_bpsk(hi, &params, &prec, &ctrl).unwrap().value;
        assert!(((asym - exact) / exact).abs() < 0.1, "asymptote {asym} vs {exact}");
        assert_relative_eq!((hp.g_c * hi).powf(-hp.g_d), asym, max_relative = 1e-6);
    }
}
