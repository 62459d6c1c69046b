//! Evaluation of one experiment into CSV rows.

use rayon::prelude::*;

use super::config::{ExperimentConfig, Modulation, Scale, Scenario};
use super::CliError;
use crate::corrmat::{build_preset, green_fit, CorrelationSpec};
use crate::error::{Error, Result};
use crate::fso::{irradiance_params, oc_ber, turbulence_params, TurbulenceLink};
use crate::mcsim::{
    sample_gg_vectors, simulate, simulate_mrc_ber, simulate_mrc_outage, simulate_oc_ber, simulate_sc_outage, Detector,
    Estimate, FadingSampler, SimConfig,
};
use crate::mvgg::{joint_gg_cdf, joint_gg_mgf, joint_gg_pdf, GgParams, Precision, SeriesControl, SeriesValue};
use crate::rxperf::{
    db_to_linear, mrc_ber_bpsk, mrc_ber_bpsk_asymptotic, mrc_ber_nbfsk, mrc_outage, mrc_outage_asymptotic, sc_outage,
    sc_outage_asymptotic, AsymptoticValue, LinkBudget,
};
use crate::sumdist::{build_ky, eigen_cluster, ks_test, sum_cdf, SumDecomposition, CLUSTER_TOL};

/// One abscissa of one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub curve: String,
    pub x: f64,
    pub analytic: f64,
    pub mc: Option<Estimate>,
    pub seed: Option<u64>,
    pub terms: Option<usize>,
    pub last_increment: Option<f64>,
}

/// One repetition of the goodness-of-fit test.
#[derive(Debug, Clone, PartialEq)]
pub struct KsRow {
    pub curve: String,
    pub repetition: usize,
    pub seed: u64,
    pub samples: usize,
    pub t_stat: f64,
    pub t_max: f64,
    pub alpha: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Curves(Vec<CurveRow>),
    Ks(Vec<KsRow>),
}

pub const CURVE_HEADER: &str = "curve,x,analytic,mc,mc_stderr,trials,seed,terms,last_increment";
pub const KS_HEADER: &str = "curve,repetition,seed,samples,t_stat,t_max,alpha,accepted";

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

impl Table {
    /// RFC 4180 text with LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Table::Curves(rows) => {
                out.push_str(CURVE_HEADER);
                out.push('\n');
                for r in rows {
                    let cols = [
                        field(&r.curve),
                        num(r.x),
                        num(r.analytic),
                        opt(r.mc, |e| num(e.mean)),
                        opt(r.mc, |e| num(e.stderr)),
                        opt(r.mc, |e| e.trials.to_string()),
                        opt(r.seed, |s| s.to_string()),
                        opt(r.terms, |t| t.to_string()),
                        opt(r.last_increment, num),
                    ];
                    out.push_str(&cols.join(","));
                    out.push('\n');
                }
            }
            Table::Ks(rows) => {
                out.push_str(KS_HEADER);
                out.push('\n');
                for r in rows {
                    let cols = [
                        field(&r.curve),
                        r.repetition.to_string(),
                        r.seed.to_string(),
                        r.samples.to_string(),
                        num(r.t_stat),
                        num(r.t_max),
                        num(r.alpha),
                        r.accepted.to_string(),
                    ];
                    out.push_str(&cols.join(","));
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Parameters of one curve.
struct Curve {
    label: String,
    params: GgParams<f64>,
}

fn curves(cfg: &ExperimentConfig) -> Result<Vec<Curve>> {
    let n = cfg.params.n;
    if let Some(link) = &cfg.link {
        return link
            .length
            .values()
            .into_iter()
            .map(|len| {
                let t = turbulence_params(&TurbulenceLink::new(link.cn2, link.k, len, link.aperture)?);
                Ok(Curve {
                    label: format!("L={len}"),
                    params: irradiance_params(t.m, t.beta, n)?,
                })
            })
            .collect();
    }
    let m = cfg.params.m.unwrap_or_default();
    let betas = cfg.params.beta.as_ref().map(|b| b.values()).unwrap_or_default();
    betas
        .into_iter()
        .map(|beta| {
            let omega = if cfg.scenario == Scenario::BerFso {
                1.0 / m
            } else {
                cfg.params.omega
            };
            Ok(Curve {
                label: format!("beta={beta}"),
                params: GgParams::new(m, beta, omega, n)?,
            })
        })
        .collect()
}

fn diag(v: &SeriesValue<f64>) -> (Option<usize>, Option<f64>) {
    (Some(v.terms), Some(v.last_increment))
}

struct Context {
    spec: CorrelationSpec,
    prec: Precision<f64>,
    ctrl: SeriesControl<f64>,
    sim: Option<SimConfig>,
}

fn decomposition(ctx: &Context, p: &GgParams<f64>) -> Result<SumDecomposition> {
    eigen_cluster(&build_ky(&vec![p.omega; p.n], &ctx.spec.matrix)?, p.m, CLUSTER_TOL)
}

type Analytic = (f64, Option<usize>, Option<f64>);

fn analytic_points<F>(xs: &[f64], f: F) -> Result<Vec<Analytic>>
where
    F: Fn(f64) -> Result<Analytic> + Sync,
{
    xs.par_iter().map(|&x| f(x)).collect()
}

fn simulated(
    ctx: &Context,
    p: &GgParams<f64>,
    run: impl FnOnce(&FadingSampler, &SimConfig) -> Result<Vec<Estimate>>,
) -> Result<Option<Vec<Estimate>>> {
    match &ctx.sim {
        None => Ok(None),
        Some(sim) => {
            let sampler = FadingSampler::new(p, &ctx.spec.matrix)?;
            run(&sampler, sim).map(Some)
        }
    }
}

/// A leading-order value, or `None` where the expansion does not apply
/// (e.g. a logarithmic leading term above its threshold).
fn leading(v: Result<AsymptoticValue>) -> Result<Option<f64>> {
    match v {
        Ok(a) => Ok(Some(a.value)),
        Err(Error::Domain { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn equal(x: f64, n: usize) -> Vec<f64> {
    vec![x; n]
}

fn indicator(b: bool) -> f64 {
    f64::from(u8::from(b))
}

fn curve_rows(cfg: &ExperimentConfig, ctx: &Context, curve: &Curve, grid: &[f64]) -> Result<Vec<CurveRow>> {
    let p = &curve.params;
    let n = p.n;
    let (prec, ctrl) = (&ctx.prec, &ctx.ctrl);
    let db = cfg.grid.as_ref().is_some_and(|g| g.scale == Scale::Db);
    let lin: Vec<f64> = grid.iter().map(|&g| if db { db_to_linear(g) } else { g }).collect();
    let threshold = db_to_linear(cfg.threshold_db);
    let budgets =
        || -> Result<Vec<LinkBudget>> { lin.iter().map(|&r| LinkBudget::new(threshold * r, threshold)).collect() };

    let mut asym: Option<Vec<Option<f64>>> = None;
    let (analytic, mc) = match cfg.scenario {
        Scenario::Pdf => (
            analytic_points(&lin, |x| {
                let v = joint_gg_pdf(&equal(x, n), p, prec, ctrl)?;
                let (t, l) = diag(&v);
                Ok((v.value, t, l))
            })?,
            None,
        ),
        Scenario::Cdf => (
            analytic_points(&lin, |x| {
                let v = joint_gg_cdf(&equal(x, n), p, prec, ctrl)?;
                let (t, l) = diag(&v);
                Ok((v.value, t, l))
            })?,
            simulated(ctx, p, |s, sim| {
                simulate(s, sim, lin.len(), |z, out| {
                    let best = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    for (o, &x) in out.iter_mut().zip(&lin) {
                        *o = indicator(best <= x);
                    }
                })
            })?,
        ),
        Scenario::Mgf => (
            analytic_points(&lin, |s| {
                let v = joint_gg_mgf(&equal(s, n), p, prec, ctrl)?;
                let (t, l) = diag(&v);
                Ok((v.value, t, l))
            })?,
            simulated(ctx, p, |smp, sim| {
                simulate(smp, sim, lin.len(), |z, out| {
                    let total: f64 = z.iter().sum();
                    for (o, &s) in out.iter_mut().zip(&lin) {
                        *o = (-s * total).exp();
                    }
                })
            })?,
        ),
        Scenario::SumCdf => {
            let d = decomposition(ctx, p)?;
            (
                analytic_points(&lin, |x| Ok((sum_cdf(x, p.beta, &d)?, None, None)))?,
                simulated(ctx, p, |s, sim| {
                    simulate(s, sim, lin.len(), |z, out| {
                        let total: f64 = z.iter().sum();
                        for (o, &x) in out.iter_mut().zip(&lin) {
                            *o = indicator(total <= x);
                        }
                    })
                })?,
            )
        }
        Scenario::OutageSc => {
            let lbs = budgets()?;
            if cfg.asymptotic {
                asym = Some(
                    lbs.iter()
                        .map(|lb| leading(sc_outage_asymptotic(lb, p, prec, ctrl)))
                        .collect::<Result<_>>()?,
                );
            }
            (
                analytic_points(&lin, |r| {
                    let v = sc_outage(&LinkBudget::new(threshold * r, threshold)?, p, prec, ctrl)?;
                    let (t, l) = diag(&v);
                    Ok((v.value, t, l))
                })?,
                simulated(ctx, p, |s, sim| simulate_sc_outage(s, sim, &lbs))?,
            )
        }
        Scenario::OutageMrc => {
            let d = decomposition(ctx, p)?;
            let lbs = budgets()?;
            if cfg.asymptotic {
                asym = Some(
                    lbs.iter()
                        .map(|lb| leading(mrc_outage_asymptotic(lb, p, &d)))
                        .collect::<Result<_>>()?,
                );
            }
            (
                analytic_points(&lin, |r| {
                    Ok((
                        mrc_outage(&LinkBudget::new(threshold * r, threshold)?, p, &d)?,
                        None,
                        None,
                    ))
                })?,
                simulated(ctx, p, |s, sim| simulate_mrc_outage(s, sim, &lbs))?,
            )
        }
        Scenario::BerMrc => {
            let modulation = cfg.modulation.unwrap_or(Modulation::Bpsk);
            let detector = cfg.detector.unwrap_or(match modulation {
                Modulation::Bpsk => Detector::BpskApprox,
                Modulation::Nbfsk => Detector::Nbfsk,
            });
            if cfg.asymptotic {
                asym = Some(
                    lin.iter()
                        .map(|&s| leading(mrc_ber_bpsk_asymptotic(s, p, prec, ctrl)))
                        .collect::<Result<_>>()?,
                );
            }
            (
                analytic_points(&lin, |s| {
                    let v = match modulation {
                        Modulation::Bpsk => mrc_ber_bpsk(s, p, prec, ctrl)?,
                        Modulation::Nbfsk => mrc_ber_nbfsk(s, p, prec, ctrl)?,
                    };
                    let (t, l) = diag(&v);
                    Ok((v.value, t, l))
                })?,
                simulated(ctx, p, |s, sim| simulate_mrc_ber(s, sim, detector, &lin))?,
            )
        }
        Scenario::BerFso => (
            analytic_points(&lin, |s| {
                let v = oc_ber(s, p.m, p.beta, prec, ctrl)?;
                let (t, l) = diag(&v);
                Ok((v.value, t, l))
            })?,
            simulated(ctx, p, |s, sim| simulate_oc_ber(s, sim, !cfg.exact_q, &lin))?,
        ),
        Scenario::KsTest => unreachable!("handled separately"),
    };

    let seed = ctx.sim.map(|s| s.seed);
    let mut rows: Vec<CurveRow> = grid
        .iter()
        .zip(analytic)
        .enumerate()
        .map(|(k, (&x, (value, terms, last)))| CurveRow {
            curve: curve.label.clone(),
            x,
            analytic: value,
            mc: mc.as_ref().map(|m| m[k]),
            seed: mc.as_ref().and(seed),
            terms,
            last_increment: last,
        })
        .collect();
    if let Some(a) = asym {
        rows.extend(
            grid.iter()
                .zip(a)
                .filter_map(|(&x, v)| v.map(|v| (x, v)))
                .map(|(x, v)| CurveRow {
                    curve: format!("{} high-snr", curve.label),
                    x,
                    analytic: v,
                    mc: None,
                    seed: None,
                    terms: None,
                    last_increment: None,
                }),
        );
    }
    Ok(rows)
}

fn ks_rows(cfg: &ExperimentConfig, ctx: &Context, curve: &Curve) -> Result<Vec<KsRow>> {
    let ks = cfg.ks.unwrap_or_default();
    let p = &curve.params;
    let d = decomposition(ctx, p)?;
    let base = ctx.sim.map(|s| s.seed).unwrap_or(1);
    let batch = ctx.sim.map(|s| s.batch).unwrap_or(4096);
    let sampler = FadingSampler::new(p, &ctx.spec.matrix)?;
    (0..ks.repetitions)
        .map(|r| {
            let seed = base.wrapping_add(r as u64);
            let sim = SimConfig {
                seed,
                trials: ks.samples,
                batch,
            };
            let sums: Vec<f64> = sample_gg_vectors(&sampler, &sim)?
                .iter()
                .map(|z| z.iter().sum())
                .collect();
            let rep = ks_test(&sums, |x| sum_cdf(x, p.beta, &d), ks.alpha)?;
            Ok(KsRow {
                curve: curve.label.clone(),
                repetition: r,
                seed,
                samples: rep.samples,
                t_stat: rep.t_stat,
                t_max: rep.t_max,
                alpha: rep.alpha,
                accepted: rep.accepted,
            })
        })
        .collect()
}

/// Runs a validated experiment.
pub fn evaluate(cfg: &ExperimentConfig, warn: &mut dyn FnMut(String)) -> std::result::Result<Table, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    let n = cfg.params.n;
    let spec = build_preset(&cfg.correlation, n)?;
    let green = green_fit(&spec, cfg.green_tol)?;
    if let Some(w) = &green.warning {
        warn(w.clone());
    }
    if !green.exact {
        warn(format!(
            "correlation approximated by a Green matrix (residual {:.3e})",
            green.fit_residual
        ));
    }
    let ctrl: SeriesControl<f64> = cfg.series.into();
    ctrl.validate()?;
    if let Some(sim) = &cfg.sim {
        if cfg.scenario != Scenario::KsTest && cfg.scenario != Scenario::Pdf {
            sim.validate()?;
        }
    }
    let ctx = Context {
        prec: Precision::from_green(&green)?,
        spec,
        ctrl,
        sim: cfg.sim,
    };
    let curves = curves(cfg)?;
    if cfg.scenario == Scenario::KsTest {
        let mut rows = Vec::new();
        for c in &curves {
            rows.extend(ks_rows(cfg, &ctx, c)?);
        }
        return Ok(Table::Ks(rows));
    }
    if cfg.sim.is_some() && cfg.scenario == Scenario::Pdf {
        warn("densities are not simulated; sim settings ignored".into());
    }
    let grid = cfg.grid.as_ref().map(|g| g.values()).unwrap_or_default();
    let ctx = Context {
        sim: if cfg.scenario == Scenario::Pdf { None } else { ctx.sim },
        ..ctx
    };
    let mut rows = Vec::new();
    for c in &curves {
        rows.extend(curve_rows(cfg, &ctx, c, &grid)?);
    }
    Ok(Table::Curves(rows))
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}
