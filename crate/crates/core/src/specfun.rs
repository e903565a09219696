//! Special functions: log-gamma, regularized incomplete beta and gamma
//! functions, and exact Beta-law tails.
//!
//! Every tail quantity has a log-scale twin. The tails that matter for
//! aggregate asymptotics sit far below `f64::MIN_POSITIVE`-adjacent values,
//! so callers should prefer the `ln_*` forms.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Linear-scale values below this are reported in log scale only.
pub const LINEAR_FLOOR: f64 = 1e-300;

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

/// Natural log of a probability (or of an asymptotic density value).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    pub fn new(log_value: f64) -> Self {
        LogProb(log_value)
    }

    pub fn from_prob(p: f64) -> Self {
        LogProb(p.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// Linear value, `None` when it falls below [`LINEAR_FLOOR`].
    pub fn prob(self) -> Option<f64> {
        let v = self.0.exp();
        if v < LINEAR_FLOOR {
            None
        } else {
            Some(v)
        }
    }

    /// Linear value, flushed to zero below [`LINEAR_FLOOR`].
    pub fn prob_or_zero(self) -> f64 {
        self.prob().unwrap_or(0.0)
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// `self + other` in linear scale.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: LogProb) -> LogProb {
        LogProb(log_add_exp(self.0, other.0))
    }

    /// `self / other` as a plain ratio.
    pub fn ratio(self, other: LogProb) -> f64 {
        (self.0 - other.0).exp()
    }
}

impl Mul for LogProb {
    type Output = LogProb;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: LogProb) -> LogProb {
        LogProb(self.0 + rhs.0)
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.0)
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}`; `-inf` for an empty input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln(1 - e^x)` for `x <= 0`.
pub fn log1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

const LANCZOS_G: f64 = 7.0;
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

fn ln_gamma_unchecked(a: f64) -> f64 {
    if a < 0.5 {
        // reflection: Γ(a)Γ(1-a) = π / sin(πa)
        return (PI / (PI * a).sin()).ln() - ln_gamma_unchecked(1.0 - a);
    }
    let x = a - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// `ln Γ(a)` for `a > 0`.
pub fn log_gamma(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("a", a, "log_gamma requires a > 0"));
    }
    Ok(ln_gamma_unchecked(a))
}

/// `Γ(a) / Γ(b)` via the log-gamma difference.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    Ok((log_gamma(a)? - log_gamma(b)?).exp())
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Log density of the Beta(a, b) law at `x`.
pub fn ln_beta_pdf(a: f64, b: f64, x: f64) -> Result<f64> {
    check_ab(a, b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("x", x, "must lie in [0, 1]"));
    }
    let lx = if a == 1.0 { 0.0 } else { (a - 1.0) * x.ln() };
    let ly = if b == 1.0 { 0.0 } else { (b - 1.0) * (-x).ln_1p() };
    Ok(lx + ly - ln_beta(a, b)?)
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("a", a, "Beta shape must be positive"));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(domain("b", b, "Beta shape must be positive"));
    }
    Ok(())
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::Numeric(format!(
        "incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})"
    )))
}

/// `ln I_x(a, b)` given both `x` and its complement `y = 1 - x` to full
/// precision.
fn ln_ibeta(a: f64, b: f64, x: f64, y: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    let ln_front_a = a * x.ln() + b * y.ln() - ln_beta(a, b)?;
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(ln_front_a - a.ln() + beta_cf(a, b, x)?.ln())
    } else {
        let ln_upper = ln_front_a - b.ln() + beta_cf(b, a, y)?.ln();
        Ok(log1m_exp(ln_upper.min(0.0)))
    }
}

/// `ln P(B > x)` for `B ~ Beta(a, b)`.
pub fn ln_beta_survival(a: f64, b: f64, x: f64) -> Result<f64> {
    check_ab(a, b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("x", x, "must lie in [0, 1]"));
    }
    ln_ibeta(b, a, 1.0 - x, x)
}

/// `P(B > x)` for `B ~ Beta(a, b)`.
pub fn beta_survival(a: f64, b: f64, x: f64) -> Result<f64> {
    Ok(ln_beta_survival(a, b, x)?.exp())
}

/// `ln P(B > 1 - u)`, with the distance `u` to the endpoint supplied exactly.
pub fn ln_beta_survival_upper(a: f64, b: f64, u: f64) -> Result<f64> {
    check_ab(a, b)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(domain("u", u, "must lie in [0, 1]"));
    }
    ln_ibeta(b, a, u, 1.0 - u)
}

/// `P(B^p > x)` for `B ~ Beta(a, b)`.
pub fn beta_power_survival(a: f64, b: f64, p: f64, x: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(domain("p", p, "power must be positive"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("x", x, "must lie in [0, 1]"));
    }
    beta_survival(a, b, x.powf(1.0 / p))
}

/// `ln P(B^p > 1 - u)`, accurate for `u` close to zero.
pub fn ln_beta_power_survival_upper(a: f64, b: f64, p: f64, u: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(domain("p", p, "power must be positive"));
    }
    check_ab(a, b)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(domain("u", u, "must lie in [0, 1]"));
    }
    if u == 1.0 {
        return Ok(0.0);
    }
    // B > (1-u)^{1/p}; distance of that point to 1 is v.
    let ln_y = (-u).ln_1p() / p;
    let v = -ln_y.exp_m1();
    ln_ibeta(b, a, v, ln_y.exp())
}

/// Series for the lower regularized gamma `P(a, x)`, valid for `x < a + 1`.
fn gamma_p_series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            return Ok(sum.ln() - x + a * x.ln() - ln_gamma_unchecked(a));
        }
    }
    Err(Error::Numeric(format!(
        "incomplete gamma series did not converge (a={a}, x={x})"
    )))
}

/// Continued fraction for the upper regularized gamma `Q(a, x)`, `x >= a + 1`.
fn gamma_q_cf(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= 2.0 * f64::EPSILON {
            return Ok(h.ln() - x + a * x.ln() - ln_gamma_unchecked(a));
        }
    }
    Err(Error::Numeric(format!(
        "incomplete gamma continued fraction did not converge (a={a}, x={x})"
    )))
}

fn check_gamma_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("a", a, "gamma shape must be positive"));
    }
    if !(x >= 0.0) {
        return Err(domain("x", x, "must be non-negative"));
    }
    Ok(())
}

/// `ln Q(a, x)`, the log of the upper regularized incomplete gamma function.
pub fn ln_gamma_q(a: f64, x: f64) -> Result<f64> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if x < a + 1.0 {
        Ok(log1m_exp(gamma_p_series(a, x)?.min(0.0)))
    } else {
        gamma_q_cf(a, x)
    }
}

/// `ln P(a, x)`, the log of the lower regularized incomplete gamma function.
pub fn ln_gamma_p(a: f64, x: f64) -> Result<f64> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        Ok(log1m_exp(gamma_q_cf(a, x)?.min(0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn log_gamma_known_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-15);
        assert!(close(log_gamma(0.5).unwrap(), 0.5 * PI.ln(), 1e-14));
        assert!(close(log_gamma(6.0).unwrap(), 120f64.ln(), 1e-14));
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        let n = 10.0;
        let fact = |k: u32| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
        let expected = fact(20) + 0.5 * PI.ln() - n * 4f64.ln() - fact(10);
        assert!(close(log_gamma(10.5).unwrap(), expected, 1e-14));
    }

    #[test]
    fn log_gamma_small_and_large() {
        // ln Γ(a) = -ln a - γ a + O(a²) near zero
        let a = 1e-6;
        let euler = 0.577_215_664_901_532_9;
        assert!(close(log_gamma(a).unwrap(), -a.ln() - euler * a, 1e-10));
        // Stirling with three correction terms at 1e6
        let x: f64 = 1e6;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        assert!(close(log_gamma(x).unwrap(), stirling, 1e-14));
    }

    #[test]
    fn log_gamma_rejects_non_positive() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain { .. })));
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn gamma_ratio_examples() {
        assert!(close(gamma_ratio(5.0, 4.0).unwrap(), 4.0, 1e-13));
        assert!(close(gamma_ratio(1.0, 1.0).unwrap(), 1.0, 1e-15));
        assert!(close(gamma_ratio(2.5, 0.5).unwrap(), 0.75, 1e-13));
        assert!(gamma_ratio(0.0, 1.0).is_err());
    }

    #[test]
    fn gamma_ratio_recurrence() {
        let mut a = 0.5;
        while a <= 100.0 {
            let r = gamma_ratio(a + 1.0, a).unwrap();
            assert!((r - a).abs() / a <= 1e-12, "a={a} r={r}");
            a += 0.37;
        }
    }

    #[test]
    fn beta_survival_examples() {
        assert!(close(beta_survival(1.0, 1.0, 0.75).unwrap(), 0.25, 1e-14));
        assert!(close(beta_survival(1.0, 2.0, 0.9).unwrap(), 0.01, 1e-12));
        assert!(close(ln_beta_survival_upper(1.0, 2.0, 0.1).unwrap(), 0.01f64.ln(), 1e-13));
        assert_eq!(beta_survival(2.5, 0.7, 0.0).unwrap(), 1.0);
        assert_eq!(beta_survival(2.5, 0.7, 1.0).unwrap(), 0.0);
        assert!(beta_survival(1.0, 1.0, 1.5).is_err());
        assert!(beta_survival(-1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn beta_survival_symmetry() {
        for &a in &[0.3, 1.0, 2.5, 17.0] {
            for &b in &[0.5, 1.0, 4.0, 40.0] {
                for i in 1..20 {
                    let x = i as f64 / 20.0;
                    let s = beta_survival(a, b, x).unwrap() + beta_survival(b, a, 1.0 - x).unwrap();
                    assert!((s - 1.0).abs() < 1e-10, "a={a} b={b} x={x} sum={s}");
                }
            }
        }
    }

    #[test]
    fn beta_survival_matches_closed_forms() {
        // Beta(2, 3): P(B > x) = (1-x)^3 (1 + 3x) + ... via exact polynomial
        // F(x) = 6x² - 8x³ + 3x⁴
        for i in 1..10 {
            let x = i as f64 / 10.0;
            let cdf = 6.0 * x * x - 8.0 * x.powi(3) + 3.0 * x.powi(4);
            assert!(close(beta_survival(2.0, 3.0, x).unwrap(), 1.0 - cdf, 1e-12));
        }
        // deep log tail of Beta(a, b) at 1-u: a u^b / ... exact for Beta(1, b)
        let u: f64 = 1e-40;
        assert!(close(ln_beta_survival_upper(1.0, 3.0, u).unwrap(), 3.0 * u.ln(), 1e-13));
    }

    #[test]
    fn beta_power_survival_examples() {
        assert!(close(beta_power_survival(1.0, 1.0, 2.0, 0.81).unwrap(), 0.1, 1e-12));
        assert_eq!(beta_power_survival(1.0, 1.0, 3.0, 0.0).unwrap(), 1.0);
        for &x in &[0.1, 0.4, 0.77] {
            assert_eq!(
                beta_power_survival(2.0, 3.0, 1.0, x).unwrap(),
                beta_survival(2.0, 3.0, x).unwrap()
            );
        }
    }

    #[test]
    fn beta_power_tail_matches_leading_asymptotic() {
        let cases = [(1.0, 1.0, 2.0), (2.0, 3.0, 0.5), (0.7, 1.6, 3.0)];
        for &(a, b, p) in &cases {
            let mut last = f64::INFINITY;
            for &u in &[1e-3, 1e-4, 1e-5] {
                let exact = ln_beta_power_survival_upper(a, b, p, u).unwrap();
                let lead = log_gamma(a + b).unwrap()
                    - b * p.ln()
                    - log_gamma(a).unwrap()
                    - log_gamma(b + 1.0).unwrap()
                    + b * u.ln();
                let gap = (exact - lead).exp_m1().abs();
                assert!(gap < last, "a={a} b={b} p={p} u={u}");
                last = gap;
            }
            assert!(last < 1e-3);
        }
    }

    #[test]
    fn incomplete_gamma_closed_forms() {
        for &x in &[0.1, 1.0, 3.0, 10.0, 50.0, 700.0] {
            // Q(1, x) = e^{-x}, Q(2, x) = (1 + x) e^{-x}
            assert!(close(ln_gamma_q(1.0, x).unwrap(), -x, 1e-13));
            assert!(close(ln_gamma_q(2.0, x).unwrap(), (1.0 + x).ln() - x, 1e-13));
            let p = ln_gamma_p(1.0, x).unwrap();
            assert!(close(p, log1m_exp(-x), 1e-12));
        }
        assert_eq!(ln_gamma_q(3.0, 0.0).unwrap(), 0.0);
        assert!(ln_gamma_q(0.0, 1.0).is_err());
        assert!(ln_gamma_q(1.0, -1.0).is_err());
    }

    #[test]
    fn incomplete_gamma_huge_argument() {
        for &x in &[1e8, 2e17, 1e300] {
            assert_eq!(ln_gamma_q(1.0, x).unwrap(), -x);
            let two = ln_gamma_q(2.0, x).unwrap();
            assert!(close(two, x.ln_1p() - x, 1e-15), "{x}: {two}");
        }
    }

    #[test]
    fn incomplete_gamma_half_integer() {
        // Q(1/2, x) = erfc(√x), reference values from 30-digit arithmetic
        let table = [
            (0.01, 0.887_537_083_981_715),
            (0.5, 0.317_310_507_862_914_1),
            (2.0, 0.045_500_263_896_358_41),
            (9.0, 2.209_049_699_858_544e-5),
        ];
        for &(x, reference) in &table {
            let ours = ln_gamma_q(0.5, x).unwrap().exp();
            assert!(close(ours, reference, 1e-13), "x={x}");
        }
    }

    #[test]
    fn log_gamma_agrees_with_statrs() {
        let mut a: f64 = 0.013;
        while a < 2e5 {
            if (a - 1.0).abs() > 0.05 && (a - 2.0).abs() > 0.05 {
                let ours = log_gamma(a).unwrap();
                let theirs = statrs::function::gamma::ln_gamma(a);
                assert!(close(ours, theirs, 1e-13), "a={a}");
            }
            a *= 1.37;
        }
    }

    #[test]
    fn incomplete_beta_agrees_with_statrs() {
        for &a in &[0.5, 2.0, 7.5] {
            for &b in &[0.8, 3.0, 12.0] {
                for i in 1..10 {
                    let x = i as f64 / 10.0;
                    let ours = 1.0 - beta_survival(a, b, x).unwrap();
                    let theirs = statrs::function::beta::beta_reg(a, b, x);
                    assert!((ours - theirs).abs() < 1e-12, "a={a} b={b} x={x}");
                }
            }
        }
    }

    #[test]
    fn log_helpers() {
        assert!(close(log_sum_exp(&[-1000.0, -1000.0]), -1000.0 + 2f64.ln(), 1e-15));
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!(close(log1m_exp(-1e-20), (1e-20f64).ln(), 1e-12));
        let p = LogProb::new(-800.0);
        assert!(p.prob().is_none());
        assert_eq!(p.prob_or_zero(), 0.0);
        assert!(close((p * p).ln(), -1600.0, 1e-15));
        assert!(close(LogProb::from_prob(0.25).add(LogProb::from_prob(0.5)).ln(), 0.75f64.ln(), 1e-15));
    }
}
