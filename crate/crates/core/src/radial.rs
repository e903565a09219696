//! Radial laws `F` for the radius `R` of a Dirichlet vector.
//!
//! Each family has a closed-form survival function and, for the Gumbel
//! max-domain of attraction, an explicit scaling function `w` such that
//! `F̄(u + x/w(u)) ~ e^{-x} F̄(u)` as `u` approaches the upper endpoint.
//!
//! | family        | `F̄(u)`                    | endpoint | class        | `w(u)`        |
//! |---------------|---------------------------|----------|--------------|---------------|
//! | `gamma`       | `Q(a, r u)`               | ∞        | Gumbel       | `r`           |
//! | `weibulltail` | `exp(-c u^τ)`             | ∞        | Gumbel       | `c τ u^{τ-1}` |
//! | `beta`        | `P(Beta(a, b) > u)`       | 1        | Weibull(`b`) | —             |
//! | `unitgumbel`  | `exp(κ - κ/(1-u))`        | 1        | Gumbel       | `κ/(1-u)²`    |

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, Exp1, Gamma as GammaDist};
use serde::{Deserialize, Serialize};

use crate::error::{domain, require_positive, Error, Result};
use crate::solve;
use crate::specfun;

/// Parameterised radial family, as it appears in JSON configs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", deny_unknown_fields)]
pub enum Family {
    #[serde(rename = "gamma")]
    Gamma { shape: f64, rate: f64 },
    #[serde(rename = "weibulltail")]
    WeibullTail { index: f64, scale: f64 },
    #[serde(rename = "beta")]
    Beta { a: f64, b: f64 },
    #[serde(rename = "unitgumbel")]
    UnitGumbel { kappa: f64 },
}

/// Max-domain of attraction of a radial law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MdaClass {
    Gumbel,
    /// Regularly varying at the finite endpoint with index `gamma`.
    Weibull { gamma: f64 },
}

/// A validated radial law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct RadialModel {
    family: Family,
}

impl TryFrom<Family> for RadialModel {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        match family {
            Family::Gamma { shape, rate } => {
                require_positive("shape", shape)?;
                require_positive("rate", rate)?;
            }
            Family::WeibullTail { index, scale } => {
                require_positive("index", index)?;
                require_positive("scale", scale)?;
            }
            Family::Beta { a, b } => {
                require_positive("a", a)?;
                require_positive("b", b)?;
            }
            Family::UnitGumbel { kappa } => {
                require_positive("kappa", kappa)?;
            }
        }
        Ok(RadialModel { family })
    }
}

impl From<RadialModel> for Family {
    fn from(m: RadialModel) -> Family {
        m.family
    }
}

/// Which limit relation [`RadialModel::mda_diagnostic`] tabulates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DiagnosticMode {
    /// `F̄(u + x/w(u)) / F̄(u)`, compared with `e^{-x}`.
    GumbelRatio { x: f64 },
    /// `F̄(1 - t u) / F̄(1 - u)`, compared with `t^γ`.
    WeibullRatio { t: f64 },
    /// `(u w(u))^μ F̄(c u) / F̄(u)`, which must vanish.
    DavisResnick { mu: f64, c: f64 },
}

/// One row of a diagnostic table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticRow {
    /// Argument of the radial law (or distance to the endpoint, for
    /// `WeibullRatio`).
    pub u: f64,
    pub ratio: f64,
    pub ln_ratio: f64,
}

/// Default depth grid for Gumbel-type diagnostics: `ln F̄(u) = -2^k`.
pub fn default_log_depths() -> Vec<f64> {
    (1..=12).map(|k| -(2f64.powi(k))).collect()
}

/// Default endpoint distances for `WeibullRatio`: `10^{-1} … 10^{-12}`.
pub fn default_endpoint_distances() -> Vec<f64> {
    (1..=12).map(|k| 10f64.powi(-k)).collect()
}

impl RadialModel {
    pub fn new(family: Family) -> Result<Self> {
        Self::try_from(family)
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(Family::Gamma { shape, rate })
    }

    pub fn weibull_tail(index: f64, scale: f64) -> Result<Self> {
        Self::new(Family::WeibullTail { index, scale })
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::Beta { a, b })
    }

    pub fn unit_gumbel(kappa: f64) -> Result<Self> {
        Self::new(Family::UnitGumbel { kappa })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn upper_endpoint(&self) -> f64 {
        match self.family {
            Family::Gamma { .. } | Family::WeibullTail { .. } => f64::INFINITY,
            Family::Beta { .. } | Family::UnitGumbel { .. } => 1.0,
        }
    }

    pub fn mda_class(&self) -> MdaClass {
        match self.family {
            Family::Beta { b, .. } => MdaClass::Weibull { gamma: b },
            _ => MdaClass::Gumbel,
        }
    }

    pub fn is_gumbel(&self) -> bool {
        self.mda_class() == MdaClass::Gumbel
    }

    /// `ln F̄(u)`.
    pub fn ln_survival(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(domain("u", u, "radial survival needs u >= 0"));
        }
        if u >= self.upper_endpoint() {
            return Ok(f64::NEG_INFINITY);
        }
        match self.family {
            Family::Gamma { shape, rate } => specfun::ln_gamma_q(shape, rate * u),
            Family::WeibullTail { index, scale } => Ok(-scale * u.powf(index)),
            Family::Beta { a, b } => specfun::ln_beta_survival(a, b, u),
            Family::UnitGumbel { kappa } => Ok(kappa - kappa / (1.0 - u)),
        }
    }

    /// `F̄(u)`.
    pub fn survival(&self, u: f64) -> Result<f64> {
        Ok(self.ln_survival(u)?.exp())
    }

    /// `ln F̄(x_F - eps)` for finite endpoints, exact in the distance `eps`.
    pub fn ln_survival_below_endpoint(&self, eps: f64) -> Result<f64> {
        if !(eps >= 0.0) {
            return Err(domain("eps", eps, "distance to endpoint must be >= 0"));
        }
        match self.family {
            Family::Beta { a, b } => specfun::ln_beta_survival_upper(a, b, eps.min(1.0)),
            Family::UnitGumbel { kappa } => {
                if eps >= 1.0 {
                    Ok(0.0)
                } else {
                    Ok(kappa - kappa / eps)
                }
            }
            _ => Err(Error::UnsupportedClass(
                "distance to endpoint requires a finite upper endpoint".into(),
            )),
        }
    }

    /// Log density of `R` at `u` (0 outside the support).
    pub fn ln_density(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(domain("u", u, "radial density needs u >= 0"));
        }
        if u >= self.upper_endpoint() {
            return Ok(f64::NEG_INFINITY);
        }
        match self.family {
            Family::Gamma { shape, rate } => Ok(shape * rate.ln() + (shape - 1.0) * u.ln()
                - rate * u
                - specfun::log_gamma(shape)?),
            Family::WeibullTail { index, scale } => {
                Ok((scale * index).ln() + (index - 1.0) * u.ln() - scale * u.powf(index))
            }
            Family::Beta { a, b } => specfun::ln_beta_pdf(a, b, u),
            Family::UnitGumbel { kappa } => {
                let v = 1.0 - u;
                Ok(kappa.ln() - 2.0 * v.ln() + kappa - kappa / v)
            }
        }
    }

    /// Gumbel scaling function `w(u)`.
    pub fn scaling_w(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < self.upper_endpoint()) {
            return Err(domain("u", u, "scaling function needs 0 < u < x_F"));
        }
        match self.family {
            Family::Gamma { rate, .. } => Ok(rate),
            Family::WeibullTail { index, scale } => Ok(scale * index * u.powf(index - 1.0)),
            Family::UnitGumbel { kappa } => Ok(kappa / ((1.0 - u) * (1.0 - u))),
            Family::Beta { .. } => Err(Error::UnsupportedClass(
                "beta radial law is in the Weibull domain; no Gumbel scaling function".into(),
            )),
        }
    }

    /// Scaling function of `R^p`: `w_p(x) = x^{1/p - 1} w(x^{1/p}) / p`.
    pub fn power_scaling_wp(&self, p: f64, x: f64) -> Result<f64> {
        require_positive("p", p)?;
        let root = x.powf(1.0 / p);
        if !(x > 0.0) || !(root < self.upper_endpoint()) {
            return Err(domain("x", x, "power scaling needs 0 < x < x_F^p"));
        }
        Ok(x.powf(1.0 / p - 1.0) * self.scaling_w(root)? / p)
    }

    /// The point `x` with `ln F̄(x) = ln_sbar`.
    pub fn quantile_from_ln_survival(&self, ln_sbar: f64) -> Result<f64> {
        if !(ln_sbar <= 0.0) {
            return Err(domain("ln_sbar", ln_sbar, "log survival must be <= 0"));
        }
        if ln_sbar == 0.0 {
            return Ok(0.0);
        }
        if ln_sbar == f64::NEG_INFINITY {
            return Ok(self.upper_endpoint());
        }
        match self.family {
            Family::WeibullTail { index, scale } => Ok((-ln_sbar / scale).powf(1.0 / index)),
            Family::UnitGumbel { kappa } => Ok(-ln_sbar / (kappa - ln_sbar)),
            Family::Gamma { shape, rate } => {
                let g = |y: f64| Ok(specfun::ln_gamma_q(shape, y)? - ln_sbar);
                let start = shape.max(1.0);
                let hi = solve::bracket_upward(g, 0.0, start, 2000)?;
                let y = solve::brent(g, 0.0, hi, 1e-300)?;
                Ok(y / rate)
            }
            Family::Beta { a, b } => {
                if ln_sbar < specfun::ln_beta_survival(a, b, 0.5)? {
                    return Ok(1.0 - self.endpoint_distance_from_ln_survival(ln_sbar)?);
                }
                let g = |x: f64| Ok(specfun::ln_beta_survival(a, b, x)? - ln_sbar);
                solve::brent(g, 0.0, 1.0, 1e-300)
            }
        }
    }

    /// The distance `eps` with `ln F̄(x_F - eps) = ln_sbar`, for finite
    /// endpoints. Resolves levels whose quantile rounds to `x_F` in `f64`.
    pub fn endpoint_distance_from_ln_survival(&self, ln_sbar: f64) -> Result<f64> {
        if !(ln_sbar <= 0.0) {
            return Err(domain("ln_sbar", ln_sbar, "log survival must be <= 0"));
        }
        match self.family {
            Family::UnitGumbel { kappa } => Ok(kappa / (kappa - ln_sbar)),
            Family::Beta { a, b } => {
                if ln_sbar == f64::NEG_INFINITY {
                    return Ok(0.0);
                }
                let g = |e: f64| Ok(specfun::ln_beta_survival_upper(a, b, e)? - ln_sbar);
                solve::brent(g, 0.0, 1.0, 1e-300)
            }
            _ => Err(Error::UnsupportedClass(
                "distance to endpoint requires a finite upper endpoint".into(),
            )),
        }
    }

    /// `inf{x : F(x) >= q}` for `q ∈ (0, 1)`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(domain("q", q, "quantile level must lie in (0, 1)"));
        }
        self.quantile_from_ln_survival((-q).ln_1p())
    }

    /// Draws one variate of `R`.
    pub fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> f64 {
        match self.family {
            Family::Gamma { shape, rate } => GammaDist::new(shape, 1.0 / rate)
                .expect("validated gamma parameters")
                .sample(rng),
            Family::WeibullTail { index, scale } => {
                let e: f64 = Exp1.sample(rng);
                (e / scale).powf(1.0 / index)
            }
            Family::Beta { a, b } => BetaDist::new(a, b)
                .expect("validated beta parameters")
                .sample(rng),
            Family::UnitGumbel { kappa } => {
                let e: f64 = Exp1.sample(rng);
                e / (kappa + e)
            }
        }
    }

    /// Tabulates one max-domain limit relation.
    ///
    /// `grid` holds log-depths `ln F̄(u)` for the Gumbel-type modes (the `u`
    /// values are their exact quantiles) and endpoint distances for
    /// `WeibullRatio`. Verdicts on convergence are left to the caller.
    pub fn mda_diagnostic(&self, mode: DiagnosticMode, grid: &[f64]) -> Result<Vec<DiagnosticRow>> {
        let row = |u: f64, ln_ratio: f64| DiagnosticRow {
            u,
            ratio: ln_ratio.exp(),
            ln_ratio,
        };
        match mode {
            DiagnosticMode::GumbelRatio { x } => {
                if !self.is_gumbel() {
                    return Err(Error::UnsupportedClass(
                        "gumbel_ratio needs a Gumbel-class radial law".into(),
                    ));
                }
                if !(x >= 0.0) {
                    return Err(domain("x", x, "gumbel ratio shift must be >= 0"));
                }
                grid.iter()
                    .map(|&ld| {
                        let u = self.quantile_from_ln_survival(ld)?;
                        let shifted = u + x / self.scaling_w(u)?;
                        Ok(row(u, self.ln_survival(shifted)? - self.ln_survival(u)?))
                    })
                    .collect()
            }
            DiagnosticMode::WeibullRatio { t } => {
                if !self.upper_endpoint().is_finite() {
                    return Err(Error::UnsupportedClass(
                        "weibull_ratio needs a finite upper endpoint".into(),
                    ));
                }
                require_positive("t", t)?;
                grid.iter()
                    .map(|&u| {
                        let num = self.ln_survival_below_endpoint(t * u)?;
                        let den = self.ln_survival_below_endpoint(u)?;
                        Ok(row(u, num - den))
                    })
                    .collect()
            }
            DiagnosticMode::DavisResnick { mu, c } => {
                if !(c > 1.0) {
                    return Err(domain("c", c, "Davis-Resnick dilation must exceed 1"));
                }
                if !self.is_gumbel() {
                    return Err(Error::UnsupportedClass(
                        "davis_resnick needs a Gumbel-class radial law".into(),
                    ));
                }
                grid.iter()
                    .map(|&ld| {
                        let u = self.quantile_from_ln_survival(ld)?;
                        let uw = u * self.scaling_w(u)?;
                        let ln_ratio = mu * uw.ln() + self.ln_survival(c * u)? - ld;
                        Ok(row(u, ln_ratio))
                    })
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn gumbel_families() -> Vec<RadialModel> {
        vec![
            RadialModel::gamma(1.0, 1.0).unwrap(),
            RadialModel::gamma(1.3, 2.0).unwrap(),
            RadialModel::gamma(0.7, 0.5).unwrap(),
            RadialModel::weibull_tail(2.0, 0.5).unwrap(),
            RadialModel::weibull_tail(0.8, 3.0).unwrap(),
            RadialModel::unit_gumbel(50.0).unwrap(),
        ]
    }

    #[test]
    fn survival_examples() {
        let g = RadialModel::gamma(1.0, 1.0).unwrap();
        assert!(close(g.survival(1.0).unwrap(), (-1f64).exp(), 1e-14));
        let b = RadialModel::beta(1.0, 1.0).unwrap();
        assert!(close(b.survival(0.25).unwrap(), 0.75, 1e-14));
        let w = RadialModel::weibull_tail(2.0, 0.5).unwrap();
        assert!(close(w.survival(2.0).unwrap(), (-2f64).exp(), 1e-14));
        assert_eq!(b.survival(1.0).unwrap(), 0.0);
        assert_eq!(RadialModel::unit_gumbel(2.0).unwrap().survival(0.0).unwrap(), 1.0);
        assert!(g.survival(-0.1).is_err());
    }

    #[test]
    fn construction_validates() {
        assert!(RadialModel::gamma(0.0, 1.0).is_err());
        assert!(RadialModel::weibull_tail(1.0, -1.0).is_err());
        assert!(RadialModel::beta(1.0, f64::NAN).is_err());
        assert!(RadialModel::unit_gumbel(0.0).is_err());
    }

    #[test]
    fn classes_and_endpoints() {
        let b = RadialModel::beta(2.0, 3.5).unwrap();
        assert_eq!(b.mda_class(), MdaClass::Weibull { gamma: 3.5 });
        assert_eq!(b.upper_endpoint(), 1.0);
        let u = RadialModel::unit_gumbel(1.0).unwrap();
        assert_eq!(u.mda_class(), MdaClass::Gumbel);
        assert_eq!(u.upper_endpoint(), 1.0);
        assert_eq!(RadialModel::gamma(2.0, 1.0).unwrap().upper_endpoint(), f64::INFINITY);
    }

    #[test]
    fn scaling_function_examples() {
        let g = RadialModel::gamma(3.7, 1.0).unwrap();
        for &u in &[0.5, 10.0, 1e4] {
            assert_eq!(g.scaling_w(u).unwrap(), 1.0);
        }
        let w = RadialModel::weibull_tail(2.0, 0.5).unwrap();
        assert!(close(w.scaling_w(3.0).unwrap(), 3.0, 1e-15));
        let ug = RadialModel::unit_gumbel(1.0).unwrap();
        assert!(close(ug.scaling_w(0.5).unwrap(), 4.0, 1e-15));
        assert!(matches!(
            RadialModel::beta(1.0, 1.0).unwrap().scaling_w(0.5),
            Err(Error::UnsupportedClass(_))
        ));
    }

    #[test]
    fn power_scaling_examples() {
        let w = RadialModel::weibull_tail(2.0, 0.5).unwrap();
        for &x in &[0.3, 2.0, 9.0] {
            assert!(close(w.power_scaling_wp(1.0, x).unwrap(), w.scaling_w(x).unwrap(), 1e-15));
        }
        let g = RadialModel::gamma(2.0, 1.0).unwrap();
        assert!(close(g.power_scaling_wp(2.0, 4.0).unwrap(), 0.25, 1e-15));
        assert!(close(w.power_scaling_wp(2.0, 9.0).unwrap(), 0.5, 1e-15));
        assert!(RadialModel::beta(1.0, 1.0).unwrap().power_scaling_wp(2.0, 0.5).is_err());
    }

    #[test]
    fn quantile_examples() {
        let e = RadialModel::gamma(1.0, 1.0).unwrap();
        assert!(close(e.quantile(1.0 - (-1f64).exp()).unwrap(), 1.0, 1e-13));
        let b = RadialModel::beta(1.0, 1.0).unwrap();
        assert!(close(b.quantile(0.3).unwrap(), 0.3, 1e-13));
        let g2 = RadialModel::gamma(2.0, 1.0).unwrap();
        let v = g2.quantile(0.5).unwrap();
        assert!((g2.survival(v).unwrap() - 0.5).abs() < 1e-10);
        assert!(e.quantile(0.0).is_err());
        assert!(e.quantile(1.0).is_err());
    }

    #[test]
    fn quantile_round_trip() {
        let mut models = gumbel_families();
        models.push(RadialModel::beta(2.0, 3.0).unwrap());
        models.push(RadialModel::beta(0.5, 0.5).unwrap());
        let levels = [1e-6, 1e-3, 0.1, 0.5, 0.9, 1.0 - 1e-6, 1.0 - 1e-9, 1.0 - 1e-12];
        for m in &models {
            for &q in &levels {
                let x = m.quantile(q).unwrap();
                if q < 0.5 {
                    let cdf = -m.survival(x).unwrap() + 1.0;
                    let cdf_exact = specfun::log1m_exp(m.ln_survival(x).unwrap()).exp();
                    assert!((cdf_exact - q).abs() <= 1e-9 * q.max(1e-3), "{m:?} q={q} cdf={cdf}");
                } else if m.upper_endpoint().is_finite() {
                    // compare in the distance to the endpoint, which f64 resolves
                    let target = (-q).ln_1p();
                    let eps = m.endpoint_distance_from_ln_survival(target).unwrap();
                    let ls = m.ln_survival_below_endpoint(eps).unwrap();
                    assert!((ls - target).abs() <= 1e-9, "{m:?} q={q} ls={ls} target={target}");
                    assert!((1.0 - x - eps).abs() <= 2.0 * f64::EPSILON);
                } else {
                    let ls = m.ln_survival(x).unwrap();
                    let target = (-q).ln_1p();
                    assert!((ls - target).abs() <= 1e-9, "{m:?} q={q} ls={ls} target={target}");
                }
            }
        }
    }

    #[test]
    fn quantile_is_monotone() {
        for m in gumbel_families() {
            let mut last = 0.0;
            for k in 1..40 {
                let q = k as f64 / 40.0;
                let x = m.quantile(q).unwrap();
                assert!(x >= last);
                last = x;
            }
        }
    }

    #[test]
    fn gumbel_ratio_exact_for_exponential() {
        let e = RadialModel::gamma(1.0, 1.0).unwrap();
        let rows = e
            .mda_diagnostic(DiagnosticMode::GumbelRatio { x: 1.0 }, &default_log_depths())
            .unwrap();
        for r in rows {
            assert!(close(r.ratio, (-1f64).exp(), 1e-12));
        }
    }

    #[test]
    fn gumbel_ratio_near_limit_at_depth() {
        for m in gumbel_families() {
            for &x in &[0.5, 1.0, 2.0] {
                let rows = m
                    .mda_diagnostic(DiagnosticMode::GumbelRatio { x }, &[(1e-8f64).ln()])
                    .unwrap();
                let gap = (rows[0].ratio - (-x).exp()).abs();
                assert!(gap <= 0.01, "{m:?} x={x} gap={gap}");
            }
        }
    }

    #[test]
    fn gumbel_ratio_converges_for_heavier_corrections() {
        // Gamma(5,1) and UnitGumbel(1) carry large O(1/u) corrections at
        // moderate depth, but the gap must still shrink along the grid.
        for m in [RadialModel::gamma(5.0, 1.0).unwrap(), RadialModel::unit_gumbel(1.0).unwrap()] {
            let rows = m
                .mda_diagnostic(DiagnosticMode::GumbelRatio { x: 1.0 }, &default_log_depths())
                .unwrap();
            let gaps: Vec<f64> = rows.iter().map(|r| (r.ratio - (-1f64).exp()).abs()).collect();
            assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{m:?} {gaps:?}");
            assert!(*gaps.last().unwrap() < 1e-3);
        }
    }

    #[test]
    fn davis_resnick_exponential() {
        let e = RadialModel::gamma(1.0, 1.0).unwrap();
        let rows = e
            .mda_diagnostic(DiagnosticMode::DavisResnick { mu: 1.0, c: 2.0 }, &default_log_depths())
            .unwrap();
        for r in rows {
            assert!(close(r.ratio, r.u * (-r.u).exp(), 1e-10));
        }
    }

    #[test]
    fn davis_resnick_vanishes() {
        for m in gumbel_families() {
            for &mu in &[-2.0, 0.0, 2.0] {
                for &c in &[1.1, 2.0] {
                    let rows = m
                        .mda_diagnostic(DiagnosticMode::DavisResnick { mu, c }, &default_log_depths())
                        .unwrap();
                    let tail = &rows[rows.len() - 4..];
                    assert!(
                        tail.windows(2).all(|w| w[1].ln_ratio <= w[0].ln_ratio),
                        "{m:?} mu={mu} c={c}"
                    );
                    assert!(rows.last().unwrap().ratio < 1e-6, "{m:?} mu={mu} c={c}");
                }
            }
        }
    }

    #[test]
    fn davis_resnick_rejects_small_dilation() {
        let e = RadialModel::gamma(1.0, 1.0).unwrap();
        let err = e.mda_diagnostic(DiagnosticMode::DavisResnick { mu: 0.0, c: 1.0 }, &[-1.0]);
        assert!(matches!(err, Err(Error::Domain { .. })));
    }

    #[test]
    fn weibull_ratio_beta() {
        let b12 = RadialModel::beta(1.0, 2.0).unwrap();
        for r in b12
            .mda_diagnostic(DiagnosticMode::WeibullRatio { t: 2.0 }, &default_endpoint_distances())
            .unwrap()
            .iter()
            .skip(1)
        {
            assert!(close(r.ratio, 4.0, 1e-9), "u={} ratio={}", r.u, r.ratio);
        }
        for m in [RadialModel::beta(2.0, 3.0).unwrap(), RadialModel::beta(0.5, 1.5).unwrap()] {
            let gamma = match m.mda_class() {
                MdaClass::Weibull { gamma } => gamma,
                MdaClass::Gumbel => unreachable!(),
            };
            for &t in &[0.5, 2.0] {
                let rows = m
                    .mda_diagnostic(DiagnosticMode::WeibullRatio { t }, &[1e-4, 1e-6, 1e-9])
                    .unwrap();
                for r in rows {
                    assert!((r.ratio - t.powf(gamma)).abs() <= 0.01, "{m:?} t={t} u={}", r.u);
                }
            }
        }
    }

    #[test]
    fn gumbel_mode_rejects_weibull_class() {
        let b = RadialModel::beta(1.0, 1.0).unwrap();
        assert!(matches!(
            b.mda_diagnostic(DiagnosticMode::GumbelRatio { x: 1.0 }, &[-1.0]),
            Err(Error::UnsupportedClass(_))
        ));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = RadialModel::weibull_tail(2.0, 0.5).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"family":"weibulltail","params":{"index":2.0,"scale":0.5}}"#);
        let back: RadialModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<RadialModel>(
            r#"{"family":"gamma","params":{"shape":-1.0,"rate":1.0}}"#
        )
        .is_err());
        assert!(serde_json::from_str::<RadialModel>(
            r#"{"family":"gamma","params":{"shape":1.0,"rate":1.0,"loc":0.0}}"#
        )
        .is_err());
    }

    #[test]
    fn samples_follow_survival() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 40_000;
        for m in gumbel_families().into_iter().chain([RadialModel::beta(2.0, 0.5).unwrap()]) {
            let median = m.quantile(0.5).unwrap();
            let above = (0..n).filter(|_| m.sample(&mut rng) > median).count() as f64 / n as f64;
            assert!((above - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt(), "{m:?} {above}");
        }
    }
}
