//! Seeded Monte-Carlo sampling of correlated Gamma-Gamma vectors and of the
//! diversity receivers built on them.
//!
//! Trial `t` draws from its own ChaCha8 stream `(seed, t)`, and per-batch sums
//! are reduced in batch order, so estimates are bit-identical for any worker
//! count. `CORRFADE_THREADS` caps the number of workers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrmat::is_tridiagonal_inverse;
use crate::error::{Error, Result};
use crate::mvgg::GgParams;
use crate::rxperf::LinkBudget;
use crate::special::q::{gauss_q, q_exp_approx};

/// Smallest trial count accepted by the simulators.
pub const MIN_TRIALS: usize = 10_000;

/// Seed, trial count and reduction batch size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: usize,
    #[serde(default = "default_batch")]
    pub batch: usize,
}

fn default_batch() -> usize {
    4096
}

impl SimConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        Self {
            seed,
            trials,
            batch: default_batch(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::Invalid(format!(
                "{} trials requested, at least {MIN_TRIALS} required",
                self.trials
            )));
        }
        if self.batch == 0 {
            return Err(Error::Invalid("batch size must be >= 1".into()));
        }
        Ok(())
    }
}

/// How the correlated powers `ω_n` are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMethod {
    /// Sum of squares of `2m` correlated Gaussian vectors.
    Gaussian,
    /// Poisson-Gamma chain along the branches, exact for correlation
    /// matrices with tridiagonal inverse and any `m >= 1/2`.
    Chain,
}

#[derive(Debug, Clone)]
enum Kind {
    Gaussian { root: DMatrix<f64>, two_m: usize },
    Chain { links: Vec<f64> },
}

/// Draws `z_n = u_n ω_n` with `u_n ~ Gamma(β, 1/β)` i.i.d. and `ω` correlated
/// Gamma powers of shape `m` and scale `Ω`.
#[derive(Debug, Clone)]
pub struct FadingSampler {
    params: GgParams<f64>,
    kind: Kind,
    shadow: Gamma<f64>,
}

impl FadingSampler {
    /// Uses the Gaussian construction when `2m` is integral and the chain
    /// otherwise.
    pub fn new(params: &GgParams<f64>, sigma: &DMatrix<f64>) -> Result<Self> {
        let two_m = 2.0 * params.m;
        let method = if (two_m - two_m.round()).abs() < 1e-12 {
            SamplingMethod::Gaussian
        } else {
            SamplingMethod::Chain
        };
        Self::with_method(params, sigma, method)
    }

    pub fn with_method(params: &GgParams<f64>, sigma: &DMatrix<f64>, method: SamplingMethod) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        if sigma.nrows() != n || sigma.ncols() != n {
            return Err(Error::Invalid(format!(
                "correlation matrix is {}x{}, expected {n}x{n}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let kind = match method {
            SamplingMethod::Gaussian => {
                let two_m = 2.0 * params.m;
                if (two_m - two_m.round()).abs() >= 1e-12 {
                    return Err(Error::SimulationInfeasible(format!(
                        "Gaussian construction needs 2m integral, got m = {}",
                        params.m
                    )));
                }
                let eig = SymmetricEigen::new(sigma * (params.omega / 2.0));
                let min_eigenvalue = eig.eigenvalues.min();
                if min_eigenvalue <= 0.0 {
                    return Err(Error::NotPositiveDefinite { min_eigenvalue });
                }
                let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
                let root = &eig.eigenvectors * sqrt * eig.eigenvectors.transpose();
                Kind::Gaussian {
                    root,
                    two_m: two_m.round() as usize,
                }
            }
            SamplingMethod::Chain => {
                if n > 1 && !is_tridiagonal_inverse(sigma) {
                    return Err(Error::SimulationInfeasible(format!(
                        "m = {} needs a correlation matrix with tridiagonal inverse",
                        params.m
                    )));
                }
                let links: Vec<f64> = (0..n.saturating_sub(1)).map(|i| sigma[(i, i + 1)]).collect();
                if links.iter().any(|r| !(r.abs() < 1.0)) {
                    return Err(Error::Correlation("adjacent correlations must lie in (-1, 1)".into()));
                }
                Kind::Chain { links }
            }
        };
        let shadow = Gamma::new(params.beta, 1.0 / params.beta)
            .map_err(|e| Error::domain("FadingSampler", format!("shadowing law: {e}")))?;
        Ok(Self {
            params: *params,
            kind,
            shadow,
        })
    }

    pub fn params(&self) -> &GgParams<f64> {
        &self.params
    }

    pub fn method(&self) -> SamplingMethod {
        match self.kind {
            Kind::Gaussian { .. } => SamplingMethod::Gaussian,
            Kind::Chain { .. } => SamplingMethod::Chain,
        }
    }

    /// Fills `omega` with one draw of the correlated powers.
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R, omega: &mut [f64]) {
        let n = self.params.n;
        let om = self.params.omega;
        match &self.kind {
            Kind::Gaussian { root, two_m } => {
                omega.iter_mut().for_each(|w| *w = 0.0);
                let mut e = DVector::<f64>::zeros(n);
                for _ in 0..*two_m {
                    e.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                    let x = root * &e;
                    for (w, xi) in omega.iter_mut().zip(x.iter()) {
                        *w += xi * xi;
                    }
                }
            }
            Kind::Chain { links } => {
                let m = self.params.m;
                omega[0] = gamma_draw(rng, m, om);
                for (k, &r) in links.iter().enumerate() {
                    let keep = 1.0 - r * r;
                    let rate = r * r * omega[k] / (om * keep);
                    let extra = if rate > 0.0 {
                        Poisson::new(rate).map(|p| p.sample(rng)).unwrap_or(0.0)
                    } else {
                        0.0
                    };
                    omega[k + 1] = gamma_draw(rng, m + extra, om * keep);
                }
            }
        }
    }

    /// Fills `z` with one Gamma-Gamma vector.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64]) {
        self.sample_power(rng, z);
        for v in z.iter_mut() {
            *v *= self.shadow.sample(rng);
        }
    }
}

fn gamma_draw<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> f64 {
    Gamma::new(shape, scale).map(|g| g.sample(rng)).unwrap_or(0.0)
}

fn trial_rng(base: &ChaCha8Rng, trial: usize) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(trial as u64);
    rng
}

fn with_pool<R: Send, F: FnOnce() -> R + Send>(f: F) -> R {
    let cap = std::env::var("CORRFADE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0);
    match cap.and_then(|t| rayon::ThreadPoolBuilder::new().num_threads(t).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn batch_ranges(cfg: &SimConfig) -> Vec<(usize, usize)> {
    (0..cfg.trials.div_ceil(cfg.batch))
        .map(|b| (b * cfg.batch, ((b + 1) * cfg.batch).min(cfg.trials)))
        .collect()
}

/// Draws `cfg.trials` Gamma-Gamma vectors in trial order.
pub fn sample_gg_vectors(sampler: &FadingSampler, cfg: &SimConfig) -> Result<Vec<Vec<f64>>> {
    if cfg.trials == 0 || cfg.batch == 0 {
        return Err(Error::Invalid("trials and batch must be >= 1".into()));
    }
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = sampler.params.n;
    let batches: Vec<Vec<Vec<f64>>> = with_pool(|| {
        batch_ranges(cfg)
            .into_par_iter()
            .map(|(lo, hi)| {
                (lo..hi)
                    .map(|t| {
                        let mut z = vec![0.0; n];
                        sampler.sample(&mut trial_rng(&base, t), &mut z);
                        z
                    })
                    .collect()
            })
            .collect()
    });
    Ok(batches.into_iter().flatten().collect())
}

/// Sample mean of a per-trial quantity with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    /// Trials with a nonzero value.
    pub events: u64,
    /// One-sided 95% bound `3/trials`, set when no trial produced an event.
    pub zero_event_bound: Option<f64>,
}

impl Estimate {
    fn from_sums(sum: f64, sum_sq: f64, events: u64, trials: usize) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
        Self {
            mean,
            stderr: (var / n).sqrt(),
            trials,
            events,
            zero_event_bound: (events == 0).then_some(3.0 / n),
        }
    }
}

/// Averages `metric(z, out)` over the trials; `out` has one slot per point.
pub fn simulate<F>(sampler: &FadingSampler, cfg: &SimConfig, points: usize, metric: F) -> Result<Vec<Estimate>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    cfg.validate()?;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = sampler.params.n;
    let partials: Vec<(Vec<f64>, Vec<f64>, Vec<u64>)> = with_pool(|| {
        batch_ranges(cfg)
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut sum = vec![0.0; points];
                let mut sum_sq = vec![0.0; points];
                let mut events = vec![0u64; points];
                let mut z = vec![0.0; n];
                let mut out = vec![0.0; points];
                for t in lo..hi {
                    sampler.sample(&mut trial_rng(&base, t), &mut z);
                    metric(&z, &mut out);
                    for k in 0..points {
                        sum[k] += out[k];
                        sum_sq[k] += out[k] * out[k];
                        events[k] += u64::from(out[k] != 0.0);
                    }
                }
                (sum, sum_sq, events)
            })
            .collect()
    });
    let mut sum = vec![0.0; points];
    let mut sum_sq = vec![0.0; points];
    let mut events = vec![0u64; points];
    for (s, q, e) in partials {
        for k in 0..points {
            sum[k] += s[k];
            sum_sq[k] += q[k];
            events[k] += e[k];
        }
    }
    Ok((0..points)
        .map(|k| Estimate::from_sums(sum[k], sum_sq[k], events[k], cfg.trials))
        .collect())
}

fn thresholds(sampler: &FadingSampler, budgets: &[LinkBudget]) -> Vec<f64> {
    budgets.iter().map(|lb| lb.power_threshold(&sampler.params)).collect()
}

/// SC outage `Pr(max λ_n < λ_th)` at each budget.
pub fn simulate_sc_outage(sampler: &FadingSampler, cfg: &SimConfig, budgets: &[LinkBudget]) -> Result<Vec<Estimate>> {
    let th = thresholds(sampler, budgets);
    simulate(sampler, cfg, th.len(), |z, out| {
        let best = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (o, &t) in out.iter_mut().zip(&th) {
            *o = f64::from(u8::from(best < t));
        }
    })
}

/// MRC outage `Pr(Σ λ_n < λ_th)` at each budget.
pub fn simulate_mrc_outage(sampler: &FadingSampler, cfg: &SimConfig, budgets: &[LinkBudget]) -> Result<Vec<Estimate>> {
    let th = thresholds(sampler, budgets);
    simulate(sampler, cfg, th.len(), |z, out| {
        let total: f64 = z.iter().sum();
        for (o, &t) in out.iter_mut().zip(&th) {
            *o = f64::from(u8::from(total < t));
        }
    })
}

/// Conditional error probability used for a simulated BER.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detector {
    /// Coherent BPSK, `Q(√(2λ))`.
    Bpsk,
    /// Coherent BPSK with the exponential Q approximation.
    BpskApprox,
    /// Noncoherent BFSK, `exp(-λ/2)/2`.
    Nbfsk,
}

impl Detector {
    pub fn error_probability(self, snr: f64) -> f64 {
        match self {
            Detector::Bpsk => gauss_q((2.0 * snr).sqrt()),
            Detector::BpskApprox => q_exp_approx((2.0 * snr).sqrt()),
            Detector::Nbfsk => 0.5 * (-snr / 2.0).exp(),
        }
    }
}

fn check_snrs(snrs: &[f64]) -> Result<()> {
    if snrs.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::domain("simulate", "average SNRs must be finite and > 0"));
    }
    Ok(())
}

/// MRC bit error rate with output SNR `Σ λ_n` at each average branch SNR.
pub fn simulate_mrc_ber(
    sampler: &FadingSampler,
    cfg: &SimConfig,
    detector: Detector,
    snrs: &[f64],
) -> Result<Vec<Estimate>> {
    check_snrs(snrs)?;
    let unit = sampler.params.m * sampler.params.omega;
    simulate(sampler, cfg, snrs.len(), |z, out| {
        let total: f64 = z.iter().sum::<f64>() / unit;
        for (o, &s) in out.iter_mut().zip(snrs) {
            *o = detector.error_probability(total * s);
        }
    })
}

/// Optimal-combining FSO BER, conditional `Q(√(λ̄ Σ P_n²/(2N)))` with unit-mean
/// irradiances `P_n`.
pub fn simulate_oc_ber(
    sampler: &FadingSampler,
    cfg: &SimConfig,
    approx_q: bool,
    snrs: &[f64],
) -> Result<Vec<Estimate>> {
    check_snrs(snrs)?;
    let unit = sampler.params.m * sampler.params.omega;
    let n = sampler.params.n as f64;
    simulate(sampler, cfg, snrs.len(), |z, out| {
        let energy: f64 = z.iter().map(|p| (p / unit) * (p / unit)).sum();
        for (o, &s) in out.iter_mut().zip(snrs) {
            let x = (s * energy / (2.0 * n)).sqrt();
            *o = if approx_q { q_exp_approx(x) } else { gauss_q(x) };
        }
    })
}
