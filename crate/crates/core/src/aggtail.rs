//! Tail asymptotics of `S_p = Σ λ_i X_i^p` for a Dirichlet vector
//! `X = R (U_1, …, U_d)`.
//!
//! Weights are normalized so that `λ_1 = 1 ≥ λ_2 ≥ … ≥ λ_d`; the maximum raw
//! weight `s` is kept, and every [`TailAsymptotic`] maps raw thresholds
//! through it. Four regimes are covered:
//!
//! | regime    | condition              | base                     | `u` from threshold `t` |
//! |-----------|------------------------|--------------------------|------------------------|
//! | a         | `p > 1`, Gumbel        | `K (u w(u))^ρ F̄(u)`      | `(t/s)^{1/p}`          |
//! | b         | `p = 1`, `m < d`       | `K (u w(u))^ρ F̄(u)`      | `t/s`                  |
//! | c         | `0 < p < 1`, `λ_i > 0` | `K (u w(u))^ρ F̄(u)`      | `(t/(s λ̃))^{1/p}`      |
//! | weibull   | `p = 1`, `x_F = 1`     | `K u^ρ F̄(1-u)`           | `1 - t/s`              |

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::producttail::{mixture_tail_constant_c, mixture_tail_constant_d, saddle_geometry};
use crate::radial::{MdaClass, RadialModel};
use crate::solve;
use crate::specfun::{ln_beta_pdf, log_gamma, LogProb};

/// Raw, user-facing form of an aggregate specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    pub alpha: Vec<f64>,
    pub lambda: Vec<f64>,
    pub p: f64,
    pub radial: RadialModel,
    /// Absolute tolerance for counting weights equal to the maximum.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub multiplicity_tol: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// A validated aggregate: Dirichlet parameters, weights, power and radial law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct AggregateSpec {
    raw: RawSpec,
    alpha: Vec<f64>,
    lambda: Vec<f64>,
    order: Vec<usize>,
    scale: f64,
    m: usize,
    alpha_hat: f64,
    m_star: usize,
    alpha_bar: f64,
}

impl TryFrom<RawSpec> for AggregateSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let d = raw.alpha.len();
        if d == 0 {
            return Err(Error::Validation("alpha must not be empty".into()));
        }
        if raw.lambda.len() != d {
            return Err(Error::Validation(format!(
                "alpha has {d} entries but lambda has {}",
                raw.lambda.len()
            )));
        }
        if let Some(a) = raw.alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::Validation(format!("alpha entries must be positive, got {a}")));
        }
        if let Some(l) = raw.lambda.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(Error::Validation(format!(
                "lambda entries must be non-negative, got {l}"
            )));
        }
        if !(raw.p > 0.0 && raw.p.is_finite()) {
            return Err(Error::Validation(format!("p must be positive, got {}", raw.p)));
        }
        if !(raw.multiplicity_tol >= 0.0 && raw.multiplicity_tol < 1.0) {
            return Err(Error::Validation(format!(
                "multiplicity_tol must lie in [0, 1), got {}",
                raw.multiplicity_tol
            )));
        }
        let scale = raw.lambda.iter().copied().fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::Validation("at least one weight must be positive".into()));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| raw.lambda[j].total_cmp(&raw.lambda[i]));
        let alpha: Vec<f64> = order.iter().map(|&i| raw.alpha[i]).collect();
        let lambda: Vec<f64> = order.iter().map(|&i| raw.lambda[i] / scale).collect();
        let m = lambda
            .iter()
            .take_while(|&&l| l >= 1.0 - raw.multiplicity_tol)
            .count();
        let alpha_hat = alpha[..m].iter().copied().fold(0.0, f64::max);
        let m_star = alpha[..m].iter().filter(|&&a| a == alpha_hat).count();
        let alpha_bar = alpha.iter().sum();
        Ok(AggregateSpec {
            raw,
            alpha,
            lambda,
            order,
            scale,
            m,
            alpha_hat,
            m_star,
            alpha_bar,
        })
    }
}

impl From<AggregateSpec> for RawSpec {
    fn from(s: AggregateSpec) -> RawSpec {
        s.raw
    }
}

/// Validates and normalizes a specification with exact multiplicity matching.
pub fn validate_spec(
    raw_alpha: &[f64],
    raw_lambda: &[f64],
    p: f64,
    radial: RadialModel,
) -> Result<AggregateSpec> {
    validate_spec_with_tolerance(raw_alpha, raw_lambda, p, radial, 0.0)
}

/// As [`validate_spec`], counting weights within `tol` of the maximum
/// toward the multiplicity `m`.
pub fn validate_spec_with_tolerance(
    raw_alpha: &[f64],
    raw_lambda: &[f64],
    p: f64,
    radial: RadialModel,
    tol: f64,
) -> Result<AggregateSpec> {
    AggregateSpec::try_from(RawSpec {
        alpha: raw_alpha.to_vec(),
        lambda: raw_lambda.to_vec(),
        p,
        radial,
        multiplicity_tol: tol,
    })
}

impl AggregateSpec {
    pub fn d(&self) -> usize {
        self.alpha.len()
    }

    /// Dirichlet parameters in descending-weight order.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Normalized weights, non-increasing with `λ_1 = 1`.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn p(&self) -> f64 {
        self.raw.p
    }

    pub fn radial(&self) -> &RadialModel {
        &self.raw.radial
    }

    /// The specification exactly as supplied.
    pub fn raw(&self) -> &RawSpec {
        &self.raw
    }

    /// `order()[k]` is the input index of the `k`-th sorted component.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Maximum raw weight `s`; raw thresholds `t` correspond to `t/s`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Number of weights equal to the maximum.
    pub fn m(&self) -> usize {
        self.m
    }

    /// `max_{i ≤ m} α_i`.
    pub fn alpha_hat(&self) -> f64 {
        self.alpha_hat
    }

    /// Number of `i ≤ m` attaining `α̂`.
    pub fn m_star(&self) -> usize {
        self.m_star
    }

    /// `ᾱ = Σ α_i`.
    pub fn alpha_bar(&self) -> f64 {
        self.alpha_bar
    }

    /// The same specification with a different radial law.
    pub fn with_radial(&self, radial: RadialModel) -> AggregateSpec {
        let mut s = self.clone();
        s.raw.radial = radial;
        s
    }
}

/// `λ̃ = (Σ λ_i^{1/(1-p)})^{1-p}`, the maximum of `Σ λ_i β_i^p` over the
/// unit simplex.
pub fn lambda_tilde(lambda: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "must lie in (0, 1)"));
    }
    if lambda.is_empty() {
        return Err(Error::Validation("lambda must not be empty".into()));
    }
    if let Some(&l) = lambda.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(domain("lambda", l, "all weights must be positive"));
    }
    let top = lambda.iter().copied().fold(0.0, f64::max);
    let q = 1.0 / (1.0 - p);
    let sum: f64 = lambda.iter().map(|l| (l / top).powf(q)).sum();
    Ok(top * sum.powf(1.0 - p))
}

/// Form of the asymptotic expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    /// `K (u w(u))^ρ F̄(u)`.
    Gumbel,
    /// `K u^ρ F̄(1 - u)`.
    Weibull,
}

impl Base {
    pub fn as_str(&self) -> &'static str {
        match self {
            Base::Gumbel => "gumbel",
            Base::Weibull => "weibull",
        }
    }
}

/// Map from a raw threshold `t` on `S_p` to the base variable `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Convention {
    /// `u = (t / divisor)^{1/p}`.
    Root { divisor: f64, p: f64 },
    /// `u = 1 - t / divisor`.
    EndpointGap { divisor: f64 },
}

impl Convention {
    pub fn divisor(&self) -> f64 {
        match *self {
            Convention::Root { divisor, .. } | Convention::EndpointGap { divisor } => divisor,
        }
    }

    pub fn base_from_threshold(&self, t: f64) -> f64 {
        match *self {
            Convention::Root { divisor, p } => (t / divisor).powf(1.0 / p),
            Convention::EndpointGap { divisor } => 1.0 - t / divisor,
        }
    }

    pub fn threshold_from_base(&self, u: f64) -> f64 {
        match *self {
            Convention::Root { divisor, p } => divisor * u.powf(p),
            Convention::EndpointGap { divisor } => divisor * (1.0 - u),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Convention::Root { divisor, p: 1.0 } => write!(f, "u = t / {divisor:e}"),
            Convention::Root { divisor, p } => write!(f, "u = (t / {divisor:e})^(1/{p})"),
            Convention::EndpointGap { divisor } => write!(f, "u = 1 - t / {divisor:e}"),
        }
    }
}

/// An asymptotic tail `P(S_p > t) ~ K (u w(u))^ρ F̄(u)` or `K u^ρ F̄(1-u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailAsymptotic {
    pub ln_k: f64,
    pub rho: f64,
    pub base: Base,
    pub convention: Convention,
    pub radial: RadialModel,
}

#[derive(Serialize)]
struct TailRecord {
    #[serde(rename = "K_log")]
    k_log: f64,
    rho: f64,
    base: Base,
    convention: String,
}

impl Serialize for TailAsymptotic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TailRecord {
            k_log: self.ln_k,
            rho: self.rho,
            base: self.base,
            convention: self.convention.to_string(),
        }
        .serialize(s)
    }
}

impl TailAsymptotic {
    pub fn k(&self) -> f64 {
        self.ln_k.exp()
    }

    /// Asymptotic `P(S_p > t)` at a raw threshold.
    pub fn evaluate(&self, t: f64) -> Result<LogProb> {
        if !(t > 0.0) {
            return Err(domain("t", t, "threshold must be positive"));
        }
        self.evaluate_at_base(self.convention.base_from_threshold(t))
    }

    /// The asymptotic expression at base variable `u`.
    pub fn evaluate_at_base(&self, u: f64) -> Result<LogProb> {
        match self.base {
            Base::Gumbel => {
                if u >= self.radial.upper_endpoint() {
                    return Ok(LogProb::ZERO);
                }
                if !(u > 0.0) {
                    return Err(domain("u", u, "base variable must be positive"));
                }
                let mut ln = self.ln_k + self.radial.ln_survival(u)?;
                if self.rho != 0.0 {
                    ln += self.rho * (u * self.radial.scaling_w(u)?).ln();
                }
                Ok(LogProb::new(ln))
            }
            Base::Weibull => {
                if u <= 0.0 {
                    return Ok(LogProb::ZERO);
                }
                if !(u <= 1.0) {
                    return Err(domain("u", u, "endpoint distance must be <= 1"));
                }
                let ln = self.ln_k + self.rho * u.ln() + self.radial.ln_survival_below_endpoint(u)?;
                Ok(LogProb::new(ln))
            }
        }
    }

    /// Base variable at which the radial law has log survival `ln_depth`.
    pub fn base_at_depth(&self, ln_depth: f64) -> Result<f64> {
        match self.base {
            Base::Gumbel => self.radial.quantile_from_ln_survival(ln_depth),
            Base::Weibull => self.radial.endpoint_distance_from_ln_survival(ln_depth),
        }
    }

    /// Raw threshold at which the radial law has log survival `ln_depth`.
    pub fn threshold_at_depth(&self, ln_depth: f64) -> Result<f64> {
        Ok(self.convention.threshold_from_base(self.base_at_depth(ln_depth)?))
    }

    /// Scaling function of `S_p` at a raw threshold: `w_p(t/D)/D`.
    pub fn aggregate_scaling(&self, t: f64) -> Result<f64> {
        match self.convention {
            Convention::Root { divisor, p } => {
                Ok(self.radial.power_scaling_wp(p, t / divisor)? / divisor)
            }
            Convention::EndpointGap { .. } => Err(Error::UnsupportedClass(
                "no Gumbel scaling function for a Weibull-class aggregate".into(),
            )),
        }
    }

    /// Raw threshold where the asymptotic equals `ln_prob`, found by root
    /// finding in the base variable.
    pub fn invert(&self, ln_prob: f64) -> Result<f64> {
        if !(ln_prob < 0.0) {
            return Err(domain("ln_prob", ln_prob, "log probability must be < 0"));
        }
        let g = |u: f64| Ok(self.evaluate_at_base(u)?.ln() - ln_prob);
        let u = match self.base {
            Base::Gumbel => {
                let mut lo = self.radial.quantile_from_ln_survival(ln_prob)?;
                if !(lo > 0.0) {
                    lo = f64::MIN_POSITIVE;
                }
                let mut tries = 0;
                while g(lo)? < 0.0 {
                    lo *= 0.5;
                    tries += 1;
                    if tries > 200 {
                        return Err(Error::Numeric("could not bracket the asymptotic".into()));
                    }
                }
                let top = self.radial.upper_endpoint();
                let hi = if top.is_finite() {
                    top
                } else {
                    solve::bracket_upward(g, lo, 2.0 * lo.max(1.0), 2000)?
                };
                solve::brent(g, lo, hi, 1e-15 * lo.max(1e-300))?
            }
            Base::Weibull => {
                let mut hi = self.radial.endpoint_distance_from_ln_survival(ln_prob)?;
                if g(hi)? < 0.0 {
                    hi = 1.0;
                }
                if g(hi)? < 0.0 {
                    return Err(Error::Numeric("could not bracket the asymptotic".into()));
                }
                solve::brent(g, 0.0, hi, 1e-300)?
            }
        };
        Ok(self.convention.threshold_from_base(u))
    }
}

fn require_gumbel(spec: &AggregateSpec) -> Result<()> {
    if spec.radial().is_gumbel() {
        Ok(())
    } else {
        Err(Error::UnsupportedClass(
            "this formula needs a Gumbel-class radial law".into(),
        ))
    }
}

/// `p > 1`: `K = m* Γ(ᾱ)/Γ(α̂)`, `ρ = α̂ - ᾱ`. Also serves `d = 1` for any `p`,
/// where `S_p = s R^p` exactly.
pub fn tail_gumbel_pgt1(spec: &AggregateSpec) -> Result<TailAsymptotic> {
    if spec.p() <= 1.0 && spec.d() > 1 {
        return Err(Error::WrongRegime(format!(
            "the single-big-jump formula needs p > 1, got p = {}",
            spec.p()
        )));
    }
    require_gumbel(spec)?;
    let ln_k = (spec.m_star() as f64).ln() + log_gamma(spec.alpha_bar())?
        - log_gamma(spec.alpha_hat())?;
    Ok(TailAsymptotic {
        ln_k,
        rho: spec.alpha_hat() - spec.alpha_bar(),
        base: Base::Gumbel,
        convention: Convention::Root {
            divisor: spec.scale(),
            p: spec.p(),
        },
        radial: *spec.radial(),
    })
}

/// `Σ_{i>m} α_i` and `-Σ_{i>m} α_i ln(1 - λ_i)`.
fn tail_weight_terms(spec: &AggregateSpec) -> (f64, f64) {
    let m = spec.m();
    let rest: f64 = spec.alpha()[m..].iter().sum();
    let ln_prod: f64 = spec.alpha()[m..]
        .iter()
        .zip(&spec.lambda()[m..])
        .map(|(a, l)| -a * (-l).ln_1p())
        .sum();
    (rest, ln_prod)
}

/// `p = 1`, `m < d`: `K = Π(1-λ_{m+i})^{-α_{m+i}} Γ(ᾱ)/Γ(ᾱ_m)`,
/// `ρ = -Σ α_{m+i}`. For `m = d` returns the exact identity `S_1 = s R`.
pub fn tail_gumbel_peq1(spec: &AggregateSpec) -> Result<TailAsymptotic> {
    if spec.p() != 1.0 {
        return Err(Error::WrongRegime(format!(
            "the linear-aggregate formula needs p = 1, got p = {}",
            spec.p()
        )));
    }
    require_gumbel(spec)?;
    let convention = Convention::Root {
        divisor: spec.scale(),
        p: 1.0,
    };
    let (ln_k, rho) = if spec.m() == spec.d() {
        (0.0, 0.0)
    } else {
        let (rest, ln_prod) = tail_weight_terms(spec);
        let alpha_m: f64 = spec.alpha()[..spec.m()].iter().sum();
        (
            ln_prod + log_gamma(spec.alpha_bar())? - log_gamma(alpha_m)?,
            -rest,
        )
    };
    Ok(TailAsymptotic {
        ln_k,
        rho,
        base: Base::Gumbel,
        convention,
        radial: *spec.radial(),
    })
}

/// One level `k` of the simplex recursion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometryLevel {
    pub k: usize,
    pub lambda_tilde: f64,
    pub theta: f64,
    pub theta_tilde: f64,
    pub curvature: f64,
    pub c_tilde: f64,
    pub rv_index: f64,
    /// `h'(λ̃_{k-1}, θ_k)`, zero up to rounding.
    pub stationarity_residual: f64,
}

/// Endpoint geometry of `Z_d = Σ λ_i U_i^p` for `p ∈ (0, 1)`:
/// `P(Z_k > λ̃_k - u) ~ C̃_k u^{(k-1)/2}` for every prefix `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexTailGeometry {
    pub levels: Vec<GeometryLevel>,
}

impl SimplexTailGeometry {
    pub fn lambda_tilde(&self) -> f64 {
        self.levels.last().expect("d >= 2").lambda_tilde
    }

    pub fn c_tilde(&self) -> f64 {
        self.levels.last().expect("d >= 2").c_tilde
    }
}

/// Builds `C̃_d` by splitting off the last component at each level:
/// `Z_k = B^p Z_{k-1} + λ_k (1-B)^p` with `B ~ Beta(ᾱ_{k-1}, α_k)`
/// independent of `Z_{k-1}`, whose tail at `λ̃_{k-1}` is regularly varying
/// with index `(k-2)/2`.
pub fn simplex_constant_recursion(spec: &AggregateSpec) -> Result<SimplexTailGeometry> {
    let p = spec.p();
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "the simplex recursion needs p in (0, 1)"));
    }
    if spec.d() < 2 {
        return Err(domain("d", spec.d() as f64, "the simplex recursion needs d >= 2"));
    }
    if let Some(&l) = spec.lambda().iter().find(|&&l| l <= 0.0) {
        return Err(domain("lambda", l, "all weights must be positive"));
    }
    simplex_constant_recursion_ordered(spec.alpha(), spec.lambda(), p)
}

/// The same recursion with components taken in the given order and
/// weights as given; `C̃_d` and `λ̃_d` do not depend on the order.
pub fn simplex_constant_recursion_ordered(
    alpha: &[f64],
    lambda: &[f64],
    p: f64,
) -> Result<SimplexTailGeometry> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "the simplex recursion needs p in (0, 1)"));
    }
    let d = alpha.len();
    if d < 2 || lambda.len() != d {
        return Err(Error::Validation(
            "the simplex recursion needs d >= 2 weights matching alpha".into(),
        ));
    }
    if let Some(&l) = lambda.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(domain("lambda", l, "all weights must be positive"));
    }
    if let Some(&a) = alpha.iter().find(|&&a| !(a > 0.0 && a.is_finite())) {
        return Err(domain("alpha", a, "must be positive and finite"));
    }
    let mut levels = Vec::with_capacity(d - 1);
    let mut lt_prev = lambda[0];
    let mut c_prev = 1.0;
    let mut alpha_prefix = alpha[0];
    for k in 2..=d {
        let geom = saddle_geometry(lt_prev, lambda[k - 1], p)?;
        let g = ln_beta_pdf(alpha_prefix, alpha[k - 1], geom.theta)?.exp();
        let gamma = (k as f64 - 2.0) / 2.0;
        let c_tilde = if k == 2 {
            mixture_tail_constant_c(g, &geom)?
        } else {
            c_prev * mixture_tail_constant_d(g, &geom, gamma)?
        };
        levels.push(GeometryLevel {
            k,
            lambda_tilde: geom.theta_tilde,
            theta: geom.theta,
            theta_tilde: geom.theta_tilde,
            curvature: geom.curvature,
            c_tilde,
            rv_index: (k as f64 - 1.0) / 2.0,
            stationarity_residual: geom.stationarity_residual(),
        });
        lt_prev = geom.theta_tilde;
        c_prev = c_tilde;
        alpha_prefix += alpha[k - 1];
    }
    Ok(SimplexTailGeometry { levels })
}

/// `0 < p < 1`, all `λ_i > 0`: `K = Γ((d+1)/2) C̃_d (p λ̃_d)^{(d-1)/2}`,
/// `ρ = -(d-1)/2`, with `u = (t/(s λ̃_d))^{1/p}`.
pub fn tail_gumbel_plt1(spec: &AggregateSpec) -> Result<TailAsymptotic> {
    let p = spec.p();
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::WrongRegime(format!(
            "the concave-power formula needs p in (0, 1), got p = {p}"
        )));
    }
    require_gumbel(spec)?;
    if spec.d() == 1 {
        return tail_gumbel_pgt1(spec);
    }
    if spec.lambda().contains(&0.0) {
        return Err(Error::Unsupported(
            "p in (0, 1) with a zero weight is not covered".into(),
        ));
    }
    let geometry = simplex_constant_recursion(spec)?;
    let lt = geometry.lambda_tilde();
    let half = (spec.d() as f64 - 1.0) / 2.0;
    let ln_k = log_gamma(half + 1.0)? + geometry.c_tilde().ln() + half * (p * lt).ln();
    Ok(TailAsymptotic {
        ln_k,
        rho: -half,
        base: Base::Gumbel,
        convention: Convention::Root {
            divisor: spec.scale() * lt,
            p,
        },
        radial: *spec.radial(),
    })
}

/// `p = 1`, radial law regularly varying at 1 with index `γ`:
/// `K = Π(1-λ_{m+i})^{-α_{m+i}} Γ(ᾱ)Γ(γ+1)/(Γ(ᾱ_m)Γ(Σα_{m+i}+γ+1))`,
/// `ρ = +Σ α_{m+i}`, with `u = 1 - t/s`.
pub fn tail_weibull(spec: &AggregateSpec) -> Result<TailAsymptotic> {
    let gamma = match spec.radial().mda_class() {
        MdaClass::Weibull { gamma } => gamma,
        MdaClass::Gumbel => {
            return Err(Error::WrongRegime(
                "the endpoint formula needs a Weibull-class radial law".into(),
            ))
        }
    };
    if spec.p() != 1.0 {
        return Err(Error::WrongRegime(format!(
            "the endpoint formula needs p = 1, got p = {}",
            spec.p()
        )));
    }
    let convention = Convention::EndpointGap {
        divisor: spec.scale(),
    };
    let (ln_k, rho) = if spec.m() == spec.d() {
        (0.0, 0.0)
    } else {
        let (rest, ln_prod) = tail_weight_terms(spec);
        let alpha_m: f64 = spec.alpha()[..spec.m()].iter().sum();
        (
            ln_prod + log_gamma(spec.alpha_bar())? + log_gamma(gamma + 1.0)?
                - log_gamma(alpha_m)?
                - log_gamma(rest + gamma + 1.0)?,
            rest,
        )
    };
    Ok(TailAsymptotic {
        ln_k,
        rho,
        base: Base::Weibull,
        convention,
        radial: *spec.radial(),
    })
}

/// Tail of one weighted component `λ_i X_i^p`, with `i` an input index:
/// `K = Γ(ᾱ)/Γ(α_i)`, `ρ = α_i - ᾱ`, `u = (t/λ_i)^{1/p}` in raw weights.
pub fn marginal_component_tail(spec: &AggregateSpec, i: usize) -> Result<TailAsymptotic> {
    require_gumbel(spec)?;
    let raw = spec.raw();
    if i >= raw.alpha.len() {
        return Err(Error::Validation(format!(
            "component index {i} out of range for d = {}",
            raw.alpha.len()
        )));
    }
    let weight = raw.lambda[i];
    if weight == 0.0 {
        return Err(Error::Unsupported(format!(
            "component {i} has zero weight, so its tail is identically 0"
        )));
    }
    let a = raw.alpha[i];
    Ok(TailAsymptotic {
        ln_k: log_gamma(spec.alpha_bar())? - log_gamma(a)?,
        rho: a - spec.alpha_bar(),
        base: Base::Gumbel,
        convention: Convention::Root {
            divisor: weight,
            p: spec.p(),
        },
        radial: *spec.radial(),
    })
}

/// Which formula applies to a specification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    A,
    B,
    C,
    Weibull,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegimeInfo {
    pub regime: Regime,
    /// Whether the sum's tail is that of its largest term (`p > 1`).
    pub single_big_jump: bool,
}

pub fn regime_classify(spec: &AggregateSpec) -> Result<RegimeInfo> {
    let p = spec.p();
    let single_big_jump = p > 1.0;
    let regime = if !spec.radial().is_gumbel() {
        if p != 1.0 {
            return Err(Error::Unsupported(format!(
                "a Weibull-class radial law is covered only for p = 1, got p = {p}"
            )));
        }
        if spec.m() == spec.d() {
            Regime::Degenerate
        } else {
            Regime::Weibull
        }
    } else if spec.d() == 1 {
        Regime::Degenerate
    } else if p > 1.0 {
        Regime::A
    } else if p == 1.0 {
        if spec.m() == spec.d() {
            Regime::Degenerate
        } else {
            Regime::B
        }
    } else {
        if spec.lambda().contains(&0.0) {
            return Err(Error::Unsupported(
                "p in (0, 1) requires all weights to be positive".into(),
            ));
        }
        Regime::C
    };
    Ok(RegimeInfo {
        regime,
        single_big_jump,
    })
}

/// The asymptotic for whichever regime applies.
pub fn tail_asymptotic(spec: &AggregateSpec) -> Result<TailAsymptotic> {
    match regime_classify(spec)?.regime {
        Regime::A => tail_gumbel_pgt1(spec),
        Regime::B => tail_gumbel_peq1(spec),
        Regime::C => tail_gumbel_plt1(spec),
        Regime::Weibull => tail_weibull(spec),
        Regime::Degenerate => {
            if !spec.radial().is_gumbel() {
                tail_weibull(spec)
            } else if spec.p() == 1.0 {
                tail_gumbel_peq1(spec)
            } else {
                tail_gumbel_pgt1(spec)
            }
        }
    }
}

/// Asymptotic Value-at-Risk and mean excess of `S_p` at level `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarEs {
    pub var: f64,
    pub es_minus_var: f64,
    /// Set when the root lies where the asymptotic tail exceeds 0.1.
    pub accuracy_warning: bool,
}

/// Solves `P(S_p > VaR) = 1 - b` on the asymptotic and returns the mean
/// excess `1/w_S(VaR)`, where `w_S(t) = w_p(t/D)/D` for the threshold
/// divisor `D` of the regime.
pub fn var_es_asymptotic(spec: &AggregateSpec, b: f64) -> Result<VarEs> {
    if !(b > 0.0 && b < 1.0) {
        return Err(domain("b", b, "level must lie in (0, 1)"));
    }
    if spec.radial().upper_endpoint().is_finite() {
        return Err(Error::Unsupported(
            "VaR/ES asymptotics need an unbounded radial law".into(),
        ));
    }
    require_gumbel(spec)?;
    let asym = tail_asymptotic(spec)?;
    let ln_tail = (-b).ln_1p();
    let var = asym.invert(ln_tail)?;
    Ok(VarEs {
        var,
        es_minus_var: 1.0 / asym.aggregate_scaling(var)?,
        accuracy_warning: ln_tail > 0.1f64.ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma(a: f64) -> RadialModel {
        RadialModel::gamma(a, 1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn validation_examples() {
        let s = validate_spec(&[1.0, 2.0], &[3.0, 1.5], 2.0, gamma(1.0)).unwrap();
        assert_eq!(s.lambda(), &[1.0, 0.5]);
        assert_eq!(s.scale(), 3.0);
        assert_eq!((s.m(), s.alpha_hat(), s.m_star()), (1, 1.0, 1));

        let s = validate_spec(&[1.0; 3], &[1.0; 3], 2.0, gamma(1.0)).unwrap();
        assert_eq!((s.m(), s.alpha_hat(), s.m_star()), (3, 1.0, 3));

        let s = validate_spec(&[2.0, 1.0, 1.0], &[1.0, 1.0, 0.2], 2.0, gamma(1.0)).unwrap();
        assert_eq!((s.m(), s.alpha_hat(), s.m_star()), (2, 2.0, 1));
    }

    #[test]
    fn validation_sorts_jointly() {
        let s = validate_spec(&[1.0, 2.0, 3.0], &[0.2, 0.8, 0.4], 1.0, gamma(1.0)).unwrap();
        assert_eq!(s.alpha(), &[2.0, 3.0, 1.0]);
        assert_eq!(s.lambda(), &[1.0, 0.5, 0.25]);
        assert_eq!(s.order(), &[1, 2, 0]);
    }

    #[test]
    fn validation_errors() {
        let r = gamma(1.0);
        assert!(matches!(validate_spec(&[], &[], 1.0, r), Err(Error::Validation(_))));
        assert!(matches!(validate_spec(&[0.0], &[1.0], 1.0, r), Err(Error::Validation(_))));
        assert!(matches!(validate_spec(&[1.0], &[0.0], 1.0, r), Err(Error::Validation(_))));
        assert!(matches!(validate_spec(&[1.0], &[1.0, 2.0], 1.0, r), Err(Error::Validation(_))));
        assert!(matches!(validate_spec(&[1.0], &[-1.0], 1.0, r), Err(Error::Validation(_))));
        assert!(matches!(validate_spec(&[1.0], &[1.0], 0.0, r), Err(Error::Validation(_))));
    }

    #[test]
    fn multiplicity_tolerance_is_opt_in() {
        let r = gamma(1.0);
        let exact = validate_spec(&[1.0, 1.0], &[1.0, 1.0 - 1e-12], 1.0, r).unwrap();
        assert_eq!(exact.m(), 1);
        let loose = validate_spec_with_tolerance(&[1.0, 1.0], &[1.0, 1.0 - 1e-12], 1.0, r, 1e-9)
            .unwrap();
        assert_eq!(loose.m(), 2);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"alpha":[1.0,2.0],"lambda":[3.0,1.5],"p":2.0,
            "radial":{"family":"gamma","params":{"shape":3.0,"rate":1.0}}}"#;
        let s: AggregateSpec = serde_json::from_str(text).unwrap();
        assert_eq!(s.scale(), 3.0);
        let back: AggregateSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
        let bad = r#"{"alpha":[1.0],"lambda":[1.0],"p":2.0,"extra":1,
            "radial":{"family":"gamma","params":{"shape":3.0,"rate":1.0}}}"#;
        assert!(serde_json::from_str::<AggregateSpec>(bad).is_err());
    }

    #[test]
    fn lambda_tilde_examples() {
        assert!(rel(lambda_tilde(&[1.0, 1.0], 0.5).unwrap(), 2f64.sqrt()) < 1e-15);
        assert_eq!(lambda_tilde(&[1.0], 0.3).unwrap(), 1.0);
        assert!(rel(lambda_tilde(&[1.0, 0.5], 0.5).unwrap(), 1.25f64.sqrt()) < 1e-15);
        assert!(lambda_tilde(&[1.0, 0.0], 0.5).is_err());
        assert!(lambda_tilde(&[1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn regime_a_constants() {
        let s = validate_spec(&[1.0, 1.0], &[1.0, 1.0], 2.0, gamma(2.0)).unwrap();
        let t = tail_gumbel_pgt1(&s).unwrap();
        assert!(rel(t.k(), 2.0) < 1e-14);
        assert_eq!(t.rho, -1.0);
        let s = validate_spec(&[2.0, 1.0], &[1.0, 0.3], 3.0, gamma(2.0)).unwrap();
        let t = tail_gumbel_pgt1(&s).unwrap();
        assert!(rel(t.k(), 2.0) < 1e-14);
        assert_eq!(t.rho, -1.0);
        let s = validate_spec(&[1.0, 1.0], &[1.0, 1.0], 1.0, gamma(2.0)).unwrap();
        assert!(matches!(tail_gumbel_pgt1(&s), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn regime_a_ignores_p_and_small_weights() {
        let base = validate_spec(&[1.5, 0.7, 2.0], &[1.0, 0.6, 0.2], 1.5, gamma(2.0)).unwrap();
        let t0 = tail_gumbel_pgt1(&base).unwrap();
        for &p in &[1.01, 2.0, 7.5] {
            let s = validate_spec(&[1.5, 0.7, 2.0], &[1.0, 0.6, 0.2], p, gamma(2.0)).unwrap();
            let t = tail_gumbel_pgt1(&s).unwrap();
            assert_eq!((t.ln_k, t.rho), (t0.ln_k, t0.rho));
        }
        let s = validate_spec(&[1.5, 0.7, 2.0], &[1.0, 0.01, 0.99], 1.5, gamma(2.0)).unwrap();
        let t = tail_gumbel_pgt1(&s).unwrap();
        assert_eq!((t.ln_k, t.rho), (t0.ln_k, t0.rho));
    }

    #[test]
    fn single_component_is_exact() {
        let r = RadialModel::weibull_tail(1.7, 0.8).unwrap();
        for &p in &[0.4, 1.0, 2.5] {
            let s = validate_spec(&[2.3], &[1.0], p, r).unwrap();
            let t = tail_asymptotic(&s).unwrap();
            assert_eq!((t.ln_k, t.rho), (0.0, 0.0));
            for &u in &[0.5f64, 3.0, 20.0] {
                let pred = t.evaluate(u.powf(p)).unwrap();
                assert!((pred.ln() - r.ln_survival(u).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_kotz_constant() {
        for &(a1, a2) in &[(1.0, 1.0), (2.0, 1.0), (0.5, 1.5)] {
            let s = validate_spec(&[a1, a2], &[1.0, 0.0], 1.0, gamma(a1 + a2)).unwrap();
            let t = tail_gumbel_peq1(&s).unwrap();
            let k = (log_gamma(a1 + a2).unwrap() - log_gamma(a1).unwrap()).exp();
            assert!(rel(t.k(), k) < 1e-14);
            assert_eq!(t.rho, -a2);
        }
        let s = validate_spec(&[1.0, 1.0], &[1.0, 0.5], 1.0, gamma(2.0)).unwrap();
        let t = tail_gumbel_peq1(&s).unwrap();
        assert!(rel(t.k(), 2.0) < 1e-14);
        assert_eq!(t.rho, -1.0);
    }

    #[test]
    fn linear_equal_weights_is_radial_tail() {
        let r = gamma(3.0);
        let s = validate_spec(&[1.0; 3], &[2.0; 3], 1.0, r).unwrap();
        let t = tail_gumbel_peq1(&s).unwrap();
        let pred = t.evaluate(20.0).unwrap();
        assert_eq!(pred.ln(), r.ln_survival(10.0).unwrap());
    }

    #[test]
    fn recursion_two_equal_weights() {
        let s = validate_spec(&[1.0, 1.0], &[1.0, 1.0], 0.5, gamma(2.0)).unwrap();
        let g = simplex_constant_recursion(&s).unwrap();
        let l = g.levels[0];
        assert!((l.theta - 0.5).abs() < 1e-15);
        assert!(rel(l.curvature, 2f64.sqrt()) < 1e-14);
        assert!(rel(g.c_tilde(), 2f64.powf(1.25)) < 1e-14);
    }

    #[test]
    fn recursion_frozen_values() {
        // pinned by independent quadrature of the simplex tail
        let s = validate_spec(&[1.0; 3], &[1.0; 3], 0.5, gamma(3.0)).unwrap();
        let g = simplex_constant_recursion(&s).unwrap();
        assert!(rel(g.c_tilde(), 5.585_053_606_4) < 1e-9);
        let s = validate_spec(&[1.0, 1.0], &[1.0, 0.5], 0.5, gamma(2.0)).unwrap();
        let g = simplex_constant_recursion(&s).unwrap();
        assert!(rel(g.c_tilde(), 2.139_968_975_9) < 1e-9);
        let t = tail_gumbel_plt1(&s).unwrap();
        assert!(rel(t.k(), 1.417_963_080_72) < 1e-10);
    }

    #[test]
    fn recursion_saddle_identities() {
        let s = validate_spec(&[2.0, 1.0, 0.5, 3.0], &[1.0, 0.8, 0.6, 0.3], 0.4, gamma(2.0))
            .unwrap();
        let g = simplex_constant_recursion(&s).unwrap();
        let lam = s.lambda();
        for l in &g.levels {
            assert!(l.stationarity_residual.abs() < 1e-10);
            let prefix = lambda_tilde(&lam[..l.k], 0.4).unwrap();
            assert!(rel(l.lambda_tilde, prefix) < 1e-12);
            assert!(l.lambda_tilde > lam[..l.k].iter().copied().fold(0.0, f64::max));
        }
        assert!(matches!(
            simplex_constant_recursion(&validate_spec(&[1.0], &[1.0], 0.5, gamma(1.0)).unwrap()),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn regime_c_equal_weights_constant() {
        let s = validate_spec(&[1.0, 1.0], &[1.0, 1.0], 0.5, gamma(2.0)).unwrap();
        let t = tail_gumbel_plt1(&s).unwrap();
        assert!(rel(t.k(), std::f64::consts::PI.sqrt()) < 1e-10);
        assert_eq!(t.rho, -0.5);
        // P(√X₁+√X₂ > t) ~ √(π/2) t e^{-t²/2} for iid unit exponentials
        let tt = 12.0;
        let pred = t.evaluate(tt).unwrap().ln();
        let u = (tt / 2f64.sqrt()).powi(2);
        assert!(rel(t.convention.base_from_threshold(tt), u) < 1e-14);
        let closed = (std::f64::consts::PI / 2.0).sqrt().ln() + tt.ln() - tt * tt / 2.0;
        // the radial tail is (1+u)e^{-u} rather than u e^{-u}
        assert!((pred - closed - (1.0 / u).ln_1p()).abs() < 1e-10);
    }

    #[test]
    fn regime_c_rejects_zero_weight() {
        let s = validate_spec(&[1.0, 1.0], &[1.0, 0.0], 0.5, gamma(2.0)).unwrap();
        assert!(matches!(tail_gumbel_plt1(&s), Err(Error::Unsupported(_))));
        assert!(matches!(regime_classify(&s), Err(Error::Unsupported(_))));
    }

    #[test]
    fn endpoint_formula_double_uniform() {
        let s = validate_spec(&[1.0, 1.0], &[1.0, 0.0], 1.0, RadialModel::beta(1.0, 1.0).unwrap())
            .unwrap();
        let t = tail_weibull(&s).unwrap();
        assert!(rel(t.k(), 0.5) < 1e-14);
        assert_eq!(t.rho, 1.0);
        let u: f64 = 1e-3;
        let pred = t.evaluate(1.0 - u).unwrap().prob().unwrap();
        let exact = u + (1.0 - u) * (-u).ln_1p();
        assert!(rel(pred, exact) < 0.01);
        // γ → 0 leaves the simplex constant Γ(ᾱ)/(Γ(ᾱ_m) Γ(ᾱ - ᾱ_m + 1))
        let s = validate_spec(&[1.5, 2.0], &[1.0, 0.0], 1.0, RadialModel::beta(1.0, 1e-12).unwrap())
            .unwrap();
        let t = tail_weibull(&s).unwrap();
        let simplex = log_gamma(3.5).unwrap() - log_gamma(1.5).unwrap() - log_gamma(3.0).unwrap();
        assert!((t.ln_k - simplex).abs() < 1e-10);
        assert!(t.rho > 0.0);
    }

    #[test]
    fn endpoint_formula_regime_checks() {
        let s = validate_spec(&[1.0, 1.0], &[1.0, 0.0], 1.0, gamma(2.0)).unwrap();
        assert!(matches!(tail_weibull(&s), Err(Error::WrongRegime(_))));
        let s = validate_spec(&[1.0, 1.0], &[1.0, 0.0], 2.0, RadialModel::beta(1.0, 1.0).unwrap())
            .unwrap();
        assert!(matches!(tail_weibull(&s), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn marginal_examples() {
        let s = validate_spec(&[2.5], &[1.0], 1.0, gamma(2.5)).unwrap();
        let t = marginal_component_tail(&s, 0).unwrap();
        assert_eq!((t.ln_k, t.rho), (0.0, 0.0));

        // Kotz pair: X₁ ~ Exp(1), tail e^{-u} exactly
        let s = validate_spec(&[1.0, 1.0], &[1.0, 1.0], 1.0, gamma(2.0)).unwrap();
        let t = marginal_component_tail(&s, 0).unwrap();
        let u = 30.0;
        let pred = t.evaluate(u).unwrap().ln();
        assert!((pred - (-u + (1.0 / u).ln_1p())).abs() < 1e-12);

        let s = validate_spec(&[2.0, 1.0], &[1.0, 1.0], 1.0, gamma(3.0)).unwrap();
        let t = marginal_component_tail(&s, 0).unwrap();
        assert!(rel(t.k(), 2.0) < 1e-14);
        assert_eq!(t.rho, -1.0);

        let s = validate_spec(&[2.0, 1.0], &[1.0, 0.0], 1.0, gamma(3.0)).unwrap();
        assert!(matches!(marginal_component_tail(&s, 1), Err(Error::Unsupported(_))));
        assert!(marginal_component_tail(&s, 2).is_err());
    }

    #[test]
    fn marginal_agrees_with_product_tail() {
        use crate::producttail::{product_tail_gumbel, SlowlyVarying};
        let alpha = [2.0, 0.7, 1.1];
        let r = RadialModel::weibull_tail(1.5, 0.9).unwrap();
        let s = validate_spec(&alpha, &[1.0, 1.0, 1.0], 1.0, r).unwrap();
        let t = marginal_component_tail(&s, 0).unwrap();
        let beta: f64 = 0.7 + 1.1;
        let a = 2.0;
        let l = (log_gamma(a + beta).unwrap() - log_gamma(a).unwrap()
            - log_gamma(beta + 1.0).unwrap())
        .exp();
        for &u in &[2.0, 10.0, 40.0] {
            let prod = product_tail_gumbel(beta, SlowlyVarying::Constant(l), &r, u).unwrap();
            let marg = t.evaluate(u).unwrap();
            assert!((prod.ln() - marg.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn regime_classification() {
        let r = gamma(2.0);
        let c = |p: f64, lam: &[f64]| {
            regime_classify(&validate_spec(&vec![1.0; lam.len()], lam, p, r).unwrap()).unwrap()
        };
        assert_eq!(c(2.0, &[1.0, 0.5]), RegimeInfo { regime: Regime::A, single_big_jump: true });
        assert_eq!(c(1.0, &[1.0, 0.5]), RegimeInfo { regime: Regime::B, single_big_jump: false });
        assert_eq!(c(0.5, &[1.0, 0.5]), RegimeInfo { regime: Regime::C, single_big_jump: false });
        assert_eq!(c(1.0, &[1.0, 1.0]).regime, Regime::Degenerate);
        let b = RadialModel::beta(1.0, 2.0).unwrap();
        let s = validate_spec(&[1.0, 1.0], &[1.0, 0.2], 1.0, b).unwrap();
        assert_eq!(regime_classify(&s).unwrap().regime, Regime::Weibull);
    }

    #[test]
    fn var_es_exponential() {
        let s = validate_spec(&[1.0], &[1.0], 1.0, gamma(1.0)).unwrap();
        for &b in &[0.9, 0.999, 1.0 - 1e-9] {
            let v = var_es_asymptotic(&s, b).unwrap();
            assert!(rel(v.var, -(-b).ln_1p()) < 1e-12);
            assert_eq!(v.es_minus_var, 1.0);
            assert!(!v.accuracy_warning);
        }
        assert!(var_es_asymptotic(&s, 0.5).unwrap().accuracy_warning);
    }

    #[test]
    fn var_es_squared_exponential() {
        let s = validate_spec(&[1.0], &[1.0], 2.0, gamma(1.0)).unwrap();
        let v1 = var_es_asymptotic(&s, 0.999).unwrap();
        let v2 = var_es_asymptotic(&s, 0.9999).unwrap();
        for v in [v1, v2] {
            assert!(rel(v.es_minus_var, 2.0 * v.var.sqrt()) < 1e-12);
        }
        assert!(v2.var > v1.var);
        assert!(v2.es_minus_var / v2.var < v1.es_minus_var / v1.var);
    }

    #[test]
    fn var_es_uses_raw_weights() {
        let s = validate_spec(&[1.0], &[3.0], 1.0, gamma(1.0)).unwrap();
        let v = var_es_asymptotic(&s, 0.999).unwrap();
        assert!(rel(v.var, 3.0 * 1000f64.ln()) < 1e-12);
        assert!(rel(v.es_minus_var, 3.0) < 1e-12);
    }

    #[test]
    fn asymptotic_record_json() {
        let s = validate_spec(&[1.0, 1.0], &[1.0, 1.0], 2.0, gamma(2.0)).unwrap();
        let v = serde_json::to_value(tail_gumbel_pgt1(&s).unwrap()).unwrap();
        assert_eq!(v["base"], "gumbel");
        assert!((v["K_log"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-14);
        assert_eq!(v["rho"], -1.0);
        assert!(v["convention"].as_str().unwrap().starts_with("u = (t /"));
    }

    #[test]
    fn invert_round_trip() {
        let s = validate_spec(&[1.0, 2.0, 0.5], &[1.0, 0.5, 0.5], 0.6, gamma(3.5)).unwrap();
        let t = tail_asymptotic(&s).unwrap();
        for &lp in &[-5.0, -20.0, -100.0] {
            let x = t.invert(lp).unwrap();
            assert!((t.evaluate(x).unwrap().ln() - lp).abs() < 1e-9);
        }
    }
}
