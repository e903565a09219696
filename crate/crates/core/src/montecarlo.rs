//! Simulation and quadrature oracles for aggregate tails.
//!
//! Randomized estimators split the `n` samples into fixed chunks of
//! [`CHUNK`]; chunk `k` draws from the ChaCha stream `k` of the seed, and
//! chunk results are reduced in index order. Estimates therefore do not
//! depend on the number of workers.
//!
//! The conditional estimator uses `S_p = R^p Σ λ_i U_i^p` in distribution
//! and averages `F̄((t/Z)^{1/p})` over simplex draws only, in log scale.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma as GammaDist};
use rayon::prelude::*;
use serde::Serialize;

use crate::aggtail::{lambda_tilde, tail_asymptotic, AggregateSpec, RawSpec};
use crate::error::{domain, Error, Result};
use crate::producttail::saddle_geometry;
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::radial::RadialModel;
use crate::specfun::{ln_beta, log1m_exp};

/// Samples per chunk; each chunk owns one random stream.
pub const CHUNK: u64 = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Crude,
    Conditional,
    Quadrature,
}

/// A tail-probability estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub method: Method,
    pub seed: u64,
    /// Samples for the randomized methods, integrand evaluations for
    /// quadrature.
    pub n: u64,
    pub p_hat: f64,
    pub log_p_hat: f64,
    pub stderr: f64,
    pub log_stderr: f64,
}

impl Estimate {
    fn zero(method: Method, seed: u64, n: u64) -> Estimate {
        Estimate {
            method,
            seed,
            n,
            p_hat: 0.0,
            log_p_hat: f64::NEG_INFINITY,
            stderr: 0.0,
            log_stderr: f64::NEG_INFINITY,
        }
    }
}

/// Sample size, seed and worker count for a randomized run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    pub n: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(n: u64, seed: u64) -> McConfig {
        McConfig { n, seed, workers: 1 }
    }

    pub fn with_workers(self, workers: usize) -> McConfig {
        McConfig { workers, ..self }
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `job(chunk_index, chunk_len)` over all chunks on `workers` threads,
/// returning results in chunk order.
fn run_chunks<T, F>(n: u64, chunk: u64, workers: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T> + Sync,
{
    if n == 0 {
        return Err(domain("n", 0.0, "sample size must be >= 1"));
    }
    let chunks = n.div_ceil(chunk);
    let len = |k: u64| chunk.min(n - k * chunk);
    if workers <= 1 {
        return (0..chunks).map(|k| job(k, len(k))).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numeric(format!("could not start worker pool: {e}")))?;
    pool.install(|| (0..chunks).into_par_iter().map(|k| job(k, len(k))).collect())
}

#[inline]
fn pow_p(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

/// Draws points of the unit simplex with Dirichlet parameters `alpha`.
struct SimplexSampler {
    gammas: Vec<GammaDist<f64>>,
}

impl SimplexSampler {
    fn new(alpha: &[f64]) -> Result<Self> {
        let gammas = alpha
            .iter()
            .map(|&a| {
                GammaDist::new(a, 1.0).map_err(|e| Error::Validation(format!("alpha {a}: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(SimplexSampler { gammas })
    }

    fn fill<R: rand::Rng>(&self, rng: &mut R, u: &mut [f64]) {
        let mut total = 0.0;
        for (slot, g) in u.iter_mut().zip(&self.gammas) {
            *slot = g.sample(rng);
            total += *slot;
        }
        for slot in u.iter_mut() {
            *slot /= total;
        }
    }
}

/// Mean and centred second moment of `e^{v}` for log values `v`, stored
/// relative to `e^{shift}`.
#[derive(Clone, Copy, Debug)]
struct LogMoments {
    n: u64,
    shift: f64,
    mean: f64,
    m2: f64,
}

impl LogMoments {
    fn from_logs(values: &[f64]) -> LogMoments {
        let shift = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = LogMoments {
            n: 0,
            shift,
            mean: 0.0,
            m2: 0.0,
        };
        for &v in values {
            let x = if shift == f64::NEG_INFINITY {
                0.0
            } else {
                (v - shift).exp()
            };
            acc.n += 1;
            let delta = x - acc.mean;
            acc.mean += delta / acc.n as f64;
            acc.m2 += delta * (x - acc.mean);
        }
        acc
    }

    fn rescaled(self, shift: f64) -> LogMoments {
        if self.shift == shift || self.n == 0 {
            return LogMoments { shift, ..self };
        }
        let f = if self.shift == f64::NEG_INFINITY {
            0.0
        } else {
            (self.shift - shift).exp()
        };
        LogMoments {
            n: self.n,
            shift,
            mean: self.mean * f,
            m2: self.m2 * f * f,
        }
    }

    fn merge(self, other: LogMoments) -> LogMoments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let shift = self.shift.max(other.shift);
        let a = self.rescaled(shift);
        let b = other.rescaled(shift);
        let n = a.n + b.n;
        let delta = b.mean - a.mean;
        LogMoments {
            n,
            shift,
            mean: a.mean + delta * b.n as f64 / n as f64,
            m2: a.m2 + b.m2 + delta * delta * a.n as f64 * b.n as f64 / n as f64,
        }
    }

    fn estimate(self, method: Method, seed: u64) -> Estimate {
        if self.shift == f64::NEG_INFINITY || self.mean == 0.0 {
            return Estimate::zero(method, seed, self.n);
        }
        let log_p_hat = self.shift + self.mean.ln();
        let var_mean = if self.n > 1 {
            self.m2.max(0.0) / ((self.n - 1) as f64 * self.n as f64)
        } else {
            0.0
        };
        let log_stderr = self.shift + 0.5 * var_mean.ln();
        Estimate {
            method,
            seed,
            n: self.n,
            p_hat: log_p_hat.exp(),
            log_p_hat,
            stderr: log_stderr.exp(),
            log_stderr,
        }
    }
}

/// Conditional Monte Carlo over simplex draws: `per_sample(u, out)` writes
/// `k` log values for the simplex point `u`; returns one set of moments
/// per output.
fn simplex_log_means<F>(alpha: &[f64], cfg: &McConfig, k: usize, per_sample: F) -> Result<Vec<LogMoments>>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync,
{
    let sampler = SimplexSampler::new(alpha)?;
    let d = alpha.len();
    let chunks = run_chunks(cfg.n, CHUNK, cfg.workers, |idx, len| {
        let mut rng = chunk_rng(cfg.seed, idx);
        let mut u = vec![0.0; d];
        let mut out = vec![0.0; k];
        let mut logs = vec![vec![0.0; len as usize]; k];
        for s in 0..len as usize {
            sampler.fill(&mut rng, &mut u);
            per_sample(&u, &mut out)?;
            for (log, v) in logs.iter_mut().zip(&out) {
                log[s] = *v;
            }
        }
        Ok(logs.iter().map(|l| LogMoments::from_logs(l)).collect::<Vec<_>>())
    })?;
    let mut total = vec![
        LogMoments {
            n: 0,
            shift: f64::NEG_INFINITY,
            mean: 0.0,
            m2: 0.0
        };
        k
    ];
    for chunk in chunks {
        for (t, c) in total.iter_mut().zip(chunk) {
            *t = t.merge(c);
        }
    }
    Ok(total)
}

/// `ln P(R^p z > t)`.
#[inline]
fn ln_cond_tail(radial: &RadialModel, p: f64, t: f64, z: f64) -> Result<f64> {
    if z <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    radial.ln_survival((t / z).powf(1.0 / p))
}

/// `Σ λ_i u_i^p` with normalized weights.
#[inline]
fn simplex_sum(lambda: &[f64], u: &[f64], p: f64) -> f64 {
    lambda.iter().zip(u).map(|(l, x)| l * pow_p(*x, p)).sum()
}

#[inline]
fn simplex_max(lambda: &[f64], u: &[f64], p: f64) -> f64 {
    lambda
        .iter()
        .zip(u)
        .map(|(l, x)| l * pow_p(*x, p))
        .fold(0.0, f64::max)
}

/// Draws of a Dirichlet vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletDraws {
    pub radii: Vec<f64>,
    /// One row per draw, components in input order.
    pub rows: Vec<Vec<f64>>,
}

/// Draws `n` vectors `X = R Y/ΣY` with `Y_i ~ Gamma(α_i, 1)`.
pub fn sample_dirichlet(spec: &AggregateSpec, n: u64, seed: u64) -> Result<DirichletDraws> {
    let raw = spec.raw();
    let sampler = SimplexSampler::new(&raw.alpha)?;
    let d = raw.alpha.len();
    let radial = *spec.radial();
    let chunks = run_chunks(n, CHUNK, 1, |idx, len| {
        let mut rng = chunk_rng(seed, idx);
        let mut u = vec![0.0; d];
        let mut radii = Vec::with_capacity(len as usize);
        let mut rows = Vec::with_capacity(len as usize);
        for _ in 0..len {
            let r = radial.sample(&mut rng);
            sampler.fill(&mut rng, &mut u);
            radii.push(r);
            rows.push(u.iter().map(|x| r * x).collect());
        }
        Ok((radii, rows))
    })?;
    let mut out = DirichletDraws {
        radii: Vec::with_capacity(n as usize),
        rows: Vec::with_capacity(n as usize),
    };
    for (r, rows) in chunks {
        out.radii.extend(r);
        out.rows.extend(rows);
    }
    Ok(out)
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(domain("t", t, "threshold must be positive and finite"))
    }
}

/// Conditional Monte Carlo estimate of `P(S_p > t)` at a raw threshold.
pub fn conditional_mc_tail(spec: &AggregateSpec, t: f64, cfg: &McConfig) -> Result<Estimate> {
    check_threshold(t)?;
    let (p, radial, lambda) = (spec.p(), *spec.radial(), spec.lambda().to_vec());
    let tn = t / spec.scale();
    let m = simplex_log_means(spec.alpha(), cfg, 1, |u, out| {
        out[0] = ln_cond_tail(&radial, p, tn, simplex_sum(&lambda, u, p))?;
        Ok(())
    })?;
    Ok(m[0].estimate(Method::Conditional, cfg.seed))
}

/// Empirical frequency of `S_p > t` over Dirichlet draws.
pub fn crude_mc_tail(spec: &AggregateSpec, t: f64, cfg: &McConfig) -> Result<Estimate> {
    if !(t >= 0.0) {
        return Err(domain("t", t, "threshold must be non-negative"));
    }
    let sampler = SimplexSampler::new(spec.alpha())?;
    let (p, radial, lambda, d) = (spec.p(), *spec.radial(), spec.lambda(), spec.d());
    let tn = t / spec.scale();
    let counts = run_chunks(cfg.n, CHUNK, cfg.workers, |idx, len| {
        let mut rng = chunk_rng(cfg.seed, idx);
        let mut u = vec![0.0; d];
        let mut hits = 0u64;
        for _ in 0..len {
            let r = radial.sample(&mut rng);
            sampler.fill(&mut rng, &mut u);
            let s: f64 = lambda.iter().zip(&u).map(|(l, x)| l * pow_p(r * x, p)).sum();
            if s > tn {
                hits += 1;
            }
        }
        Ok(hits)
    })?;
    let hits: u64 = counts.iter().sum();
    let n = cfg.n as f64;
    let p_hat = hits as f64 / n;
    let stderr = (p_hat * (1.0 - p_hat) / n).sqrt();
    Ok(Estimate {
        method: Method::Crude,
        seed: cfg.seed,
        n: cfg.n,
        p_hat,
        log_p_hat: p_hat.ln(),
        stderr,
        log_stderr: stderr.ln(),
    })
}

const END_GRID: [f64; 15] = [
    1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11, 1e-12, 1e-13, 1e-14, 1e-15,
];

/// `E[φ(B)]` for `B ~ Beta(a, b)`, with `φ` taking `(β, 1-β)`.
///
/// Each half of `[0, 1]` is mapped so the density's endpoint behaviour is
/// absorbed: `β = v^{1/a}` near 0 and `1-β = w^{1/b}` near 1. `peaks` are
/// interior points passed on as break points; a geometric grid towards both
/// ends keeps integrands supported on a thin end layer from being missed.
fn beta_expectation<F>(a: f64, b: f64, peaks: &[f64], opts: QuadOptions, mut phi: F) -> Result<(f64, u64)>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let ln_b = ln_beta(a, b)?;
    let mut failure = None;
    let mut record = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    // lower half
    let top_v = 0.5f64.powf(a);
    let mut pts = vec![0.0];
    pts.extend(peaks.iter().filter(|&&x| x > 0.0 && x < 0.5).map(|x| x.powf(a)));
    pts.extend(END_GRID.iter().map(|x| x.powf(a)));
    pts.push(top_v);
    pts.sort_by(f64::total_cmp);
    let lower = integrate_with_breaks(
        |v| {
            if v <= 0.0 {
                return 0.0;
            }
            let beta = v.powf(1.0 / a);
            let comp = 1.0 - beta;
            let w = ((b - 1.0) * (-beta).ln_1p() - ln_b).exp() / a;
            record(phi(beta, comp)) * w
        },
        &pts,
        opts,
    )?;
    // upper half
    let top_w = 0.5f64.powf(b);
    let mut pts = vec![0.0];
    pts.extend(peaks.iter().filter(|&&x| (0.5..1.0).contains(&x)).map(|x| (1.0 - x).powf(b)));
    pts.extend(END_GRID.iter().map(|x| x.powf(b)));
    pts.push(top_w);
    pts.sort_by(f64::total_cmp);
    let upper = integrate_with_breaks(
        |w| {
            if w <= 0.0 {
                return 0.0;
            }
            let comp = w.powf(1.0 / b);
            let beta = 1.0 - comp;
            let wt = ((a - 1.0) * (-comp).ln_1p() - ln_b).exp() / b;
            record(phi(beta, comp)) * wt
        },
        &pts,
        opts,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((
        lower.value + upper.value,
        (lower.evaluations + upper.evaluations) as u64,
    ))
}

/// Quadrature of `P(S_p > t)` for `d ≤ 3`.
///
/// `d = 2` integrates `F̄((t/z(B))^{1/p})` against `B ~ Beta(α₁, α₂)` with
/// `z(β) = λ₁β^p + λ₂(1-β)^p`; `d = 3` nests the same construction,
/// `Z = B^p [λ₁V^p + λ₂(1-V)^p] + λ₃(1-B)^p` with `B ~ Beta(α₁+α₂, α₃)` and
/// `V ~ Beta(α₁, α₂)`. Integrands are scaled by their peak value.
pub fn quadrature_tail(spec: &AggregateSpec, t: f64) -> Result<Estimate> {
    check_threshold(t)?;
    let d = spec.d();
    let (p, radial) = (spec.p(), *spec.radial());
    let lam = spec.lambda();
    let alpha = spec.alpha();
    let tn = t / spec.scale();
    if d > 3 {
        return Err(Error::Unsupported(format!(
            "quadrature oracle covers d <= 3, got d = {d}"
        )));
    }
    if d == 1 {
        let ln = ln_cond_tail(&radial, p, tn, 1.0)?;
        let mut e = Estimate::zero(Method::Quadrature, 0, 1);
        e.log_p_hat = ln;
        e.p_hat = ln.exp();
        return Ok(e);
    }
    let positive: Vec<f64> = lam.iter().copied().filter(|&l| l > 0.0).collect();
    let z_max = if p < 1.0 {
        lambda_tilde(&positive, p)?
    } else {
        1.0
    };
    let shift = ln_cond_tail(&radial, p, tn, z_max)?;
    if shift == f64::NEG_INFINITY {
        return Ok(Estimate::zero(Method::Quadrature, 0, 0));
    }
    let scaled = |z: f64| -> Result<f64> { Ok((ln_cond_tail(&radial, p, tn, z)? - shift).exp()) };
    let interior_peak = |c: f64, l: f64| -> Vec<f64> {
        if p < 1.0 && c > 0.0 && l > 0.0 {
            saddle_geometry(c, l, p).map(|g| vec![g.theta]).unwrap_or_default()
        } else {
            Vec::new()
        }
    };
    let opts = QuadOptions::default();
    let (value, evals) = if d == 2 {
        beta_expectation(alpha[0], alpha[1], &interior_peak(lam[0], lam[1]), opts, |b, bc| {
            scaled(lam[0] * pow_p(b, p) + lam[1] * pow_p(bc, p))
        })?
    } else {
        let inner_peaks = interior_peak(lam[0], lam[1]);
        let pair_top = if p < 1.0 && lam[1] > 0.0 {
            lambda_tilde(&lam[..2], p)?
        } else {
            lam[0]
        };
        let outer_peaks = interior_peak(pair_top, lam[2]);
        let inner_opts = QuadOptions {
            abs_tol: 1e-16,
            ..opts
        };
        let mut inner_evals = 0;
        let (v, e) = beta_expectation(alpha[0] + alpha[1], alpha[2], &outer_peaks, opts, |b, bc| {
            let bp = pow_p(b, p);
            let rest = lam[2] * pow_p(bc, p);
            let (v, e) = beta_expectation(alpha[0], alpha[1], &inner_peaks, inner_opts, |x, xc| {
                scaled(bp * (lam[0] * pow_p(x, p) + lam[1] * pow_p(xc, p)) + rest)
            })?;
            inner_evals += e;
            Ok(v)
        })?;
        (v, e + inner_evals)
    };
    let log_p_hat = shift + value.ln();
    Ok(Estimate {
        method: Method::Quadrature,
        seed: 0,
        n: evals,
        p_hat: log_p_hat.exp(),
        log_p_hat,
        stderr: 0.0,
        log_stderr: f64::NEG_INFINITY,
    })
}

/// Raw threshold at which the regime's base variable sits at radial
/// survival `depth`.
pub fn threshold_at_depth(spec: &AggregateSpec, depth: f64) -> Result<f64> {
    if !(depth > 0.0 && depth < 1.0) {
        return Err(domain("depth", depth, "target survival must lie in (0, 1)"));
    }
    tail_asymptotic(spec)?.threshold_at_depth(depth.ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaxSumRow {
    pub t: f64,
    pub max: Estimate,
    pub sum: Estimate,
    /// `P(max λ_i X_i^p > t) / P(S_p > t)`.
    pub ratio: f64,
}

/// Compares the tail of the largest weighted term with that of the sum,
/// both by conditional Monte Carlo on common simplex draws.
pub fn max_sum_ratio(spec: &AggregateSpec, t_grid: &[f64], cfg: &McConfig) -> Result<Vec<MaxSumRow>> {
    for &t in t_grid {
        check_threshold(t)?;
    }
    let (p, radial, lambda) = (spec.p(), *spec.radial(), spec.lambda().to_vec());
    let tn: Vec<f64> = t_grid.iter().map(|t| t / spec.scale()).collect();
    let k = tn.len();
    let m = simplex_log_means(spec.alpha(), cfg, 2 * k, |u, out| {
        let zs = simplex_sum(&lambda, u, p);
        let zm = simplex_max(&lambda, u, p);
        for (j, &t) in tn.iter().enumerate() {
            out[j] = ln_cond_tail(&radial, p, t, zm)?;
            out[k + j] = ln_cond_tail(&radial, p, t, zs)?;
        }
        Ok(())
    })?;
    Ok(t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let max = m[j].estimate(Method::Conditional, cfg.seed);
            let sum = m[k + j].estimate(Method::Conditional, cfg.seed);
            MaxSumRow {
                t,
                max,
                sum,
                ratio: (max.log_p_hat - sum.log_p_hat).exp(),
            }
        })
        .collect())
}

/// Norming constants `b_n` (tail `1/n`) and `a_n = 1/w_S(b_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormingConstants {
    pub a_n: f64,
    pub b_n: f64,
}

/// Inverts the tail asymptotic of `S_p` at `1/n`.
pub fn norming_constants(spec: &AggregateSpec, n: f64) -> Result<NormingConstants> {
    if !(n >= 2.0) || !n.is_finite() {
        return Err(domain("n", n, "block size must be >= 2"));
    }
    if !spec.radial().is_gumbel() {
        return Err(Error::UnsupportedClass(
            "norming constants need a Gumbel-class radial law".into(),
        ));
    }
    let asym = tail_asymptotic(spec)?;
    let b_n = asym.invert(-n.ln())?;
    Ok(NormingConstants {
        a_n: 1.0 / asym.aggregate_scaling(b_n)?,
        b_n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GumbelLimitRow {
    pub x: f64,
    pub empirical: f64,
    pub limit: f64,
}

/// Empirical `P(max of n draws of S_p ≤ a_n x + b_n)` over `replicates`
/// blocks, next to `exp(-e^{-x})`. `cfg.n` is the block size.
pub fn gumbel_limit_check(
    spec: &AggregateSpec,
    x_grid: &[f64],
    replicates: u64,
    cfg: &McConfig,
) -> Result<Vec<GumbelLimitRow>> {
    let nc = norming_constants(spec, cfg.n as f64)?;
    let sampler = SimplexSampler::new(spec.alpha())?;
    let (p, radial, lambda, d, scale) = (spec.p(), *spec.radial(), spec.lambda(), spec.d(), spec.scale());
    let levels: Vec<f64> = x_grid.iter().map(|x| nc.a_n * x + nc.b_n).collect();
    let maxima = run_chunks(replicates, 1, cfg.workers, |rep, _| {
        let mut rng = chunk_rng(cfg.seed, rep);
        let mut u = vec![0.0; d];
        let mut best = f64::NEG_INFINITY;
        for _ in 0..cfg.n {
            let r = radial.sample(&mut rng);
            sampler.fill(&mut rng, &mut u);
            let s = scale * pow_p(r, p) * simplex_sum(lambda, &u, p);
            best = best.max(s);
        }
        Ok(best)
    })?;
    Ok(x_grid
        .iter()
        .zip(&levels)
        .map(|(&x, &level)| GumbelLimitRow {
            x,
            empirical: maxima.iter().filter(|&&m| m <= level).count() as f64 / replicates as f64,
            limit: (-(-x).exp()).exp(),
        })
        .collect())
}

/// Weight matrix `λ_{ki}`: `columns[i][k]` is the weight of `X_k^p` in
/// `Y_i = Σ_k λ_{ki} X_k^p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightMatrix {
    pub columns: Vec<Vec<f64>>,
}

impl WeightMatrix {
    /// Checks the conditions for asymptotic independence of the `Y_i`:
    /// for `p ≥ 1` the unit sets `{k : λ_{ki} = 1}` are non-empty and
    /// disjoint (all weights in `[0, 1]`); for `p < 1` every column has unit
    /// `1/(1-p)`-norm and no two columns coincide.
    pub fn validate(&self, d: usize, p: f64) -> Result<()> {
        let cols = &self.columns;
        if cols.len() < 2 {
            return Err(Error::Validation("need at least two columns".into()));
        }
        for (i, c) in cols.iter().enumerate() {
            if c.len() != d {
                return Err(Error::Validation(format!(
                    "column {i} has {} weights, expected {d}",
                    c.len()
                )));
            }
            if c.iter().any(|w| !(*w >= 0.0 && *w <= 1.0)) {
                return Err(Error::Validation(format!("column {i} has weights outside [0, 1]")));
            }
        }
        if p >= 1.0 {
            let mut used = vec![false; d];
            for (i, c) in cols.iter().enumerate() {
                let units: Vec<usize> = (0..d).filter(|&k| c[k] == 1.0).collect();
                if units.is_empty() {
                    return Err(Error::Validation(format!("column {i} has no unit weight")));
                }
                for k in units {
                    if used[k] {
                        return Err(Error::Validation(format!(
                            "unit weight of component {k} is shared between columns"
                        )));
                    }
                    used[k] = true;
                }
            }
        } else {
            let q = 1.0 / (1.0 - p);
            for (i, c) in cols.iter().enumerate() {
                let norm: f64 = c.iter().map(|w| w.powf(q)).sum();
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(Error::Validation(format!(
                        "column {i} has 1/(1-p)-norm {norm}, expected 1"
                    )));
                }
            }
            for i in 0..cols.len() {
                for j in 0..i {
                    if cols[i] == cols[j] {
                        return Err(Error::Validation(format!("columns {j} and {i} coincide")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairwiseRow {
    pub level_n: f64,
    pub b_n: f64,
    pub joint: Estimate,
    pub marginal: Estimate,
    /// `P(Y_i > b_n, Y_j > b_n) / P(Y_i > b_n)`.
    pub ratio: f64,
}

/// Conditional exceedance ratios of two linear combinations at the
/// levels `b_n` of `Y_i` for each `n` in `levels`.
#[allow(clippy::too_many_arguments)]
pub fn pairwise_asymindep(
    alpha: &[f64],
    weights: &WeightMatrix,
    p: f64,
    radial: RadialModel,
    i: usize,
    j: usize,
    levels: &[f64],
    cfg: &McConfig,
) -> Result<Vec<PairwiseRow>> {
    let d = alpha.len();
    weights.validate(d, p)?;
    let k = weights.columns.len();
    if i >= k || j >= k || i == j {
        return Err(Error::Validation(format!(
            "need two distinct column indices below {k}, got {i} and {j}"
        )));
    }
    let spec_i = AggregateSpec::try_from(RawSpec {
        alpha: alpha.to_vec(),
        lambda: weights.columns[i].clone(),
        p,
        radial,
        multiplicity_tol: 0.0,
    })?;
    let b: Vec<f64> = levels
        .iter()
        .map(|&n| norming_constants(&spec_i, n).map(|c| c.b_n))
        .collect::<Result<_>>()?;
    let (ci, cj) = (weights.columns[i].clone(), weights.columns[j].clone());
    let nl = b.len();
    let m = simplex_log_means(alpha, cfg, 2 * nl, |u, out| {
        let zi = simplex_sum(&ci, u, p);
        let zj = simplex_sum(&cj, u, p);
        for (l, &bn) in b.iter().enumerate() {
            out[l] = ln_cond_tail(&radial, p, bn, zi.min(zj))?;
            out[nl + l] = ln_cond_tail(&radial, p, bn, zi)?;
        }
        Ok(())
    })?;
    Ok(levels
        .iter()
        .enumerate()
        .map(|(l, &n)| {
            let joint = m[l].estimate(Method::Conditional, cfg.seed);
            let marginal = m[nl + l].estimate(Method::Conditional, cfg.seed);
            PairwiseRow {
                level_n: n,
                b_n: b[l],
                joint,
                marginal,
                ratio: (joint.log_p_hat - marginal.log_p_hat).exp(),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MdaRow {
    pub depth: f64,
    pub v: f64,
    pub x: f64,
    /// Estimated `P(S_p > v + x/w_S(v)) / P(S_p > v)`.
    pub ratio: f64,
    pub limit: f64,
}

/// Empirical Gumbel relation of the aggregate at thresholds `v` where the
/// radial base variable has survival `depth`.
pub fn empirical_gumbel_mda(
    spec: &AggregateSpec,
    x_grid: &[f64],
    depth_grid: &[f64],
    cfg: &McConfig,
) -> Result<Vec<MdaRow>> {
    if !spec.radial().is_gumbel() {
        return Err(Error::UnsupportedClass(
            "the Gumbel relation needs a Gumbel-class radial law".into(),
        ));
    }
    let asym = tail_asymptotic(spec)?;
    let mut thresholds = Vec::new();
    let mut vs = Vec::new();
    for &depth in depth_grid {
        let v = threshold_at_depth(spec, depth)?;
        let w = asym.aggregate_scaling(v)?;
        vs.push(v);
        thresholds.push(v / spec.scale());
        for &x in x_grid {
            thresholds.push((v + x / w) / spec.scale());
        }
    }
    let (p, radial, lambda) = (spec.p(), *spec.radial(), spec.lambda().to_vec());
    let m = simplex_log_means(spec.alpha(), cfg, thresholds.len(), |u, out| {
        let z = simplex_sum(&lambda, u, p);
        for (o, &t) in out.iter_mut().zip(&thresholds) {
            *o = ln_cond_tail(&radial, p, t, z)?;
        }
        Ok(())
    })?;
    let stride = x_grid.len() + 1;
    let mut rows = Vec::new();
    for (di, &depth) in depth_grid.iter().enumerate() {
        let base = m[di * stride].estimate(Method::Conditional, cfg.seed);
        for (xi, &x) in x_grid.iter().enumerate() {
            let e = m[di * stride + 1 + xi].estimate(Method::Conditional, cfg.seed);
            rows.push(MdaRow {
                depth,
                v: vs[di],
                x,
                ratio: (e.log_p_hat - base.log_p_hat).exp(),
                limit: (-x).exp(),
            });
        }
    }
    Ok(rows)
}

/// `ln P(S_p > t)` from an estimate, or `None` when it is exactly zero.
pub fn log_tail(e: &Estimate) -> Option<f64> {
    if e.log_p_hat == f64::NEG_INFINITY {
        None
    } else {
        Some(e.log_p_hat)
    }
}

/// `ln P(S_p ≤ t)` from a log tail.
pub fn log_cdf(ln_tail: f64) -> f64 {
    log1m_exp(ln_tail.min(0.0))
}
