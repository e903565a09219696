//! Tails of products and Beta mixtures near an upper endpoint.
//!
//! The saddle geometry here is shared with the simplex recursion in
//! [`crate::aggtail`]: for `h(β) = c β^p + λ (1-β)^p` with `p ∈ (0, 1)` the
//! maximum sits at `θ` and equals `θ̃`. Curvatures are reported as `|h''(θ)|`
//! since `h''` is negative there.

use serde::Serialize;

use crate::error::{domain, require_positive, Error, Result};
use crate::radial::RadialModel;
use crate::specfun::{log_add_exp, log_gamma, LogProb};

/// Maximiser of `h(β) = c β^p + λ (1-β)^p` on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SaddleGeometry {
    pub c: f64,
    pub lam: f64,
    pub p: f64,
    pub theta: f64,
    /// `1 - θ`, computed without cancellation.
    pub theta_complement: f64,
    pub theta_tilde: f64,
    pub curvature: f64,
}

impl SaddleGeometry {
    pub fn h(&self, beta: f64) -> f64 {
        self.c * beta.powf(self.p) + self.lam * (1.0 - beta).powf(self.p)
    }

    pub fn h_prime(&self, beta: f64) -> f64 {
        self.h_prime_split(beta, 1.0 - beta)
    }

    /// `h'(θ)`, which vanishes up to rounding.
    pub fn stationarity_residual(&self) -> f64 {
        self.h_prime_split(self.theta, self.theta_complement)
    }

    fn h_prime_split(&self, beta: f64, one_minus: f64) -> f64 {
        self.p * (self.c * beta.powf(self.p - 1.0) - self.lam * one_minus.powf(self.p - 1.0))
    }
}

fn check_p_unit(p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(domain("p", p, "must lie in (0, 1)"))
    }
}

/// Saddle point, maximum and curvature of `h`.
pub fn saddle_geometry(c: f64, lam: f64, p: f64) -> Result<SaddleGeometry> {
    require_positive("c", c)?;
    require_positive("lam", lam)?;
    check_p_unit(p)?;
    // θ/(1-θ) = (λ/c)^{1/(p-1)}
    let ln_r = (lam.ln() - c.ln()) / (p - 1.0);
    let theta = 1.0 / (1.0 + (-ln_r).exp());
    let theta_complement = 1.0 / (1.0 + ln_r.exp());
    let q = 1.0 / (1.0 - p);
    let theta_tilde = ((1.0 - p) * log_add_exp(q * c.ln(), q * lam.ln())).exp();
    let curvature =
        (p * (p - 1.0) * (theta.powf(p - 2.0) * c + lam * theta_complement.powf(p - 2.0))).abs();
    Ok(SaddleGeometry {
        c,
        lam,
        p,
        theta,
        theta_complement,
        theta_tilde,
        curvature,
    })
}

/// Leading term of `P(B^p > 1 - u)` for `B ~ Beta(a, b)`:
/// `Γ(a+b) / (p^b Γ(a) Γ(b+1)) u^b`.
pub fn beta_power_tail_asym(a: f64, b: f64, p: f64, u: f64) -> Result<f64> {
    require_positive("a", a)?;
    require_positive("b", b)?;
    require_positive("p", p)?;
    if !(u > 0.0 && u < 1.0) {
        return Err(domain("u", u, "must lie in (0, 1)"));
    }
    let ln = log_gamma(a + b)? - b * p.ln() - log_gamma(a)? - log_gamma(b + 1.0)? + b * u.ln();
    Ok(ln.exp())
}

/// Slowly varying factor `L` in `P(S > 1 - 1/v) ~ L(v) v^{-β}`.
#[derive(Clone, Copy)]
pub enum SlowlyVarying<'a> {
    Constant(f64),
    Function(&'a dyn Fn(f64) -> f64),
}

impl SlowlyVarying<'_> {
    fn at(&self, v: f64) -> f64 {
        match self {
            SlowlyVarying::Constant(c) => *c,
            SlowlyVarying::Function(f) => f(v),
        }
    }
}

/// Tail of `S Y` for `S` regularly varying at 1 with index `beta` and `Y`
/// in the Gumbel domain: `Γ(β+1) P(S > 1 - 1/(u w(u))) F̄_Y(u)`.
pub fn product_tail_gumbel(
    beta: f64,
    l: SlowlyVarying<'_>,
    y: &RadialModel,
    u: f64,
) -> Result<LogProb> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(domain("beta", beta, "tail index must be >= 0"));
    }
    if !y.is_gumbel() {
        return Err(Error::WrongRegime(
            "product tail in the Gumbel case needs a Gumbel-class Y".into(),
        ));
    }
    let v = u * y.scaling_w(u)?;
    let lv = l.at(v);
    if !(lv > 0.0) || !lv.is_finite() {
        return Err(domain("L", lv, "slowly varying factor must be positive"));
    }
    let ln = log_gamma(beta + 1.0)? + lv.ln() - beta * v.ln() + y.ln_survival(u)?;
    Ok(LogProb::new(ln))
}

/// Tail of `S (Y - λ) + λ` for `S`, `Y` regularly varying at 1 with indices
/// `beta`, `gamma`, given the two tails evaluated at `1 - 1/u`:
/// `(1-λ)^γ Γ(β+1)Γ(γ+1)/Γ(β+γ+1) P(S > ·) P(Y > ·)`.
pub fn product_tail_weibull(
    beta: f64,
    gamma: f64,
    lam: f64,
    tails_at: (LogProb, LogProb),
) -> Result<LogProb> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(domain("beta", beta, "tail index must be >= 0"));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(domain("gamma", gamma, "tail index must be >= 0"));
    }
    if !(lam < 1.0) {
        return Err(domain("lam", lam, "shift must be < 1"));
    }
    let ln_const = gamma * (1.0 - lam).ln() + log_gamma(beta + 1.0)? + log_gamma(gamma + 1.0)?
        - log_gamma(beta + gamma + 1.0)?;
    Ok(LogProb::new(ln_const) * tails_at.0 * tails_at.1)
}

/// Prefactor of `√u` in `P(B^p c + λ(1-B)^p > θ̃ - u)`: `2^{3/2} g(θ)/√|h''|`.
pub fn mixture_tail_constant_c(g_theta: f64, geometry: &SaddleGeometry) -> Result<f64> {
    require_positive("g_theta", g_theta)?;
    Ok(2f64.powf(1.5) * g_theta / geometry.curvature.sqrt())
}

/// Factor multiplying `√u P(X > c - u)` in `P(B^p X + λ(1-B)^p > θ̃ - u)`
/// when `X` is regularly varying at `c` with index `gamma`:
/// `√(2π) g(θ)/√|h''| Γ(γ+1)/Γ(γ+3/2) θ^{-γp}`.
///
/// `gamma = 0` is the degenerate `X ≡ c` case and returns
/// [`mixture_tail_constant_c`].
pub fn mixture_tail_constant_d(
    g_theta: f64,
    geometry: &SaddleGeometry,
    gamma: f64,
) -> Result<f64> {
    require_positive("g_theta", g_theta)?;
    if gamma == 0.0 {
        return mixture_tail_constant_c(g_theta, geometry);
    }
    require_positive("gamma", gamma)?;
    let ln = 0.5 * (2.0 * std::f64::consts::PI).ln() + g_theta.ln()
        - 0.5 * geometry.curvature.ln()
        + log_gamma(gamma + 1.0)?
        - log_gamma(gamma + 1.5)?
        - gamma * geometry.p * geometry.theta.ln();
    Ok(ln.exp())
}
