//! Growth functions `f: (0, inf) -> (1, inf)` and their class profile.
//!
//! Every growth function is handled through `log f` and `ln log f`; `f`
//! itself is never formed. An expansiveness inequality
//! `f(a) >= f(b)^eta` is compared as `ln log f(a) >= ln eta + ln log f(b)`,
//! which stays finite for `f = e^t` at huge `t` and keeps full precision for
//! `f = exp(exp(-1/t))` where `f - 1` is far below machine epsilon.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack for comparisons in the `ln log f` domain (a relative tolerance on
/// `log f`).
pub const LOG_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum GrowthFunction {
    /// `f(t) = e^t`.
    ExpT,
    /// `f(t) = e^{sqrt t}`.
    ExpSqrt,
    /// `f(t) = exp(exp(-1/t))`.
    Example1,
    /// `f(t) = 1 + t^p`, `p > 0`.
    PowerShift { p: f64 },
    /// Piecewise-linear `log f` through `(t[i], log_f[i])`, clamped outside
    /// the table.
    Tabulated { t: Vec<f64>, log_f: Vec<f64> },
}

impl GrowthFunction {
    pub fn builtins() -> Vec<GrowthFunction> {
        vec![
            GrowthFunction::ExpT,
            GrowthFunction::ExpSqrt,
            GrowthFunction::Example1,
            GrowthFunction::PowerShift { p: 0.5 },
        ]
    }

    pub fn name(&self) -> String {
        match self {
            GrowthFunction::ExpT => "exp_t".into(),
            GrowthFunction::ExpSqrt => "exp_sqrt".into(),
            GrowthFunction::Example1 => "example1".into(),
            GrowthFunction::PowerShift { p } => format!("power_shift(p={p})"),
            GrowthFunction::Tabulated { .. } => "tabulated".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GrowthFunction::PowerShift { p } if !(p.is_finite() && *p > 0.0) => Err(
                Error::InvalidConfig(format!("power_shift needs p > 0, got {p}")),
            ),
            GrowthFunction::Tabulated { t, log_f } => {
                if t.is_empty() || t.len() != log_f.len() {
                    return Err(Error::InvalidConfig(
                        "tabulated growth needs equally long, non-empty t and log_f".into(),
                    ));
                }
                if t.iter().any(|x| !(x.is_finite() && *x > 0.0))
                    || t.windows(2).any(|w| w[0] >= w[1])
                {
                    return Err(Error::InvalidConfig(
                        "tabulated t must be positive and strictly increasing".into(),
                    ));
                }
                if log_f.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::InvalidConfig(
                        "tabulated log_f values must be finite and > 0".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `log f(t)`.
    pub fn eval_log(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::DomainError(t));
        }
        Ok(match self {
            GrowthFunction::ExpT => t,
            GrowthFunction::ExpSqrt => t.sqrt(),
            GrowthFunction::Example1 => (-1.0 / t).exp(),
            GrowthFunction::PowerShift { p } => t.powf(*p).ln_1p(),
            GrowthFunction::Tabulated { t: ts, log_f } => interpolate(ts, log_f, t),
        })
    }

    /// `ln log f(t)`; `-inf` at `t <= 0`, where `f` is taken as 1.
    pub fn log_log(&self, t: f64) -> f64 {
        if t.is_nan() || t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            GrowthFunction::ExpT => t.ln(),
            GrowthFunction::ExpSqrt => 0.5 * t.ln(),
            GrowthFunction::Example1 => -1.0 / t,
            GrowthFunction::PowerShift { p } => {
                let u = p * t.ln();
                if u < -30.0 {
                    // ln ln(1 + e^u) = u + ln(1 - e^u/2 + ...)
                    u - 0.5 * u.exp()
                } else if u > 30.0 {
                    (u + (-u).exp().ln_1p()).ln()
                } else {
                    u.exp().ln_1p().ln()
                }
            }
            GrowthFunction::Tabulated { t: ts, log_f } => interpolate(ts, log_f, t).ln(),
        }
    }

    /// `ln(f(t) - 1)`, accurate when `f(t)` is within rounding of 1.
    pub fn log_excess(&self, t: f64) -> f64 {
        let ll = self.log_log(t);
        let l = ll.exp();
        if l < 1e-8 {
            ll + 0.5 * l
        } else if l > 700.0 {
            l + (-(-l).exp_m1()).ln()
        } else {
            l.exp_m1().ln()
        }
    }
}

fn interpolate(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    let k = ts.partition_point(|&x| x <= t);
    if k == 0 {
        return vs[0];
    }
    if k == ts.len() {
        return vs[ts.len() - 1];
    }
    let (t0, t1, v0, v1) = (ts[k - 1], ts[k], vs[k - 1], vs[k]);
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// `true` when `log f(lhs) >= eta * log f(rhs)` up to [`LOG_SLACK`].
pub fn expansive_holds(f: &GrowthFunction, lhs: f64, rhs: f64, eta: f64) -> bool {
    f.log_log(lhs) >= eta.ln() + f.log_log(rhs) - LOG_SLACK
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ThetaStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub condition: String,
    pub r: Option<f64>,
    pub t: f64,
    /// `log f(t)` for θ2 probes, `ln((f(t) - 1) / t^r)` for θ3 probes.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaClassification {
    pub growth: String,
    pub theta1: ThetaStatus,
    pub theta2: ThetaStatus,
    pub theta3: ThetaStatus,
    pub exponent: Option<f64>,
    pub limit: Option<Limit>,
    pub probes: Vec<Probe>,
}

/// `10^-1, 10^-2, ..., 10^-12`.
pub fn default_probe_scales() -> Vec<f64> {
    (1..=12).map(|k| 10f64.powi(-k)).collect()
}

/// `0.1, 0.2, ..., 0.9`.
pub fn default_r_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

/// Maximum spread of `ln` estimates that counts as "mutually within 10%".
const STABLE_SPREAD: f64 = 0.105_360_515_657_826_3; // -ln(0.9)
const DIVERGED_LN: f64 = 13.815_510_557_964_274; // ln(1e6)
const VANISHED_LN: f64 = -20.723_265_836_946_41; // ln(1e-9)
const MIN_SLOPE: f64 = 0.05;

/// Numerically profiles `f` against the three class conditions.
///
/// θ1 is tested for monotonicity on a log-spaced grid over `[1e-12, 1e8]`.
/// θ2 tests `log f(t_k) -> 0` along `probe_scales` (the converse direction
/// follows from θ1 and `f > 1`). θ3 estimates `(f(t) - 1) / t^r` along the
/// probes for each `r`; the last three estimates decide the limit.
pub fn classify_theta(f: &GrowthFunction, probe_scales: &[f64], r_grid: &[f64]) -> ThetaClassification {
    let mut probes = Vec::new();

    let mut grid: Vec<f64> = (-48..=32).map(|k| 10f64.powf(k as f64 / 4.0)).collect();
    grid.extend_from_slice(probe_scales);
    grid.retain(|t| *t > 0.0);
    grid.sort_by(f64::total_cmp);
    let theta1 = if grid.windows(2).all(|w| f.log_log(w[1]) >= f.log_log(w[0]) - LOG_SLACK) {
        ThetaStatus::Pass
    } else {
        ThetaStatus::Fail
    };

    let lls: Vec<f64> = probe_scales.iter().map(|&t| f.log_log(t)).collect();
    for (&t, &ll) in probe_scales.iter().zip(&lls) {
        probes.push(Probe {
            condition: "theta2".into(),
            r: None,
            t,
            value: ll.exp(),
        });
    }
    let lnt: Vec<f64> = probe_scales.iter().map(|t| t.ln()).collect();
    let theta2 = classify_tail(&lnt, &lls, |last| last < (1e-4f64).ln(), |stable| stable > (1e-4f64).ln());

    let mut best: Option<(f64, Limit, f64)> = None;
    let mut any_inconclusive = false;
    for &r in r_grid {
        let est: Vec<f64> = probe_scales
            .iter()
            .zip(&lnt)
            .map(|(&t, &lt)| f.log_excess(t) - r * lt)
            .collect();
        for (&t, &e) in probe_scales.iter().zip(&est) {
            probes.push(Probe {
                condition: "theta3".into(),
                r: Some(r),
                t,
                value: e,
            });
        }
        match limit_of(&lnt, &est) {
            Some(TailLimit::Finite { value, spread }) => {
                let better = match &best {
                    Some((_, Limit::Finite(_), s)) => spread < *s,
                    _ => true,
                };
                if better {
                    best = Some((r, Limit::Finite(value), spread));
                }
            }
            Some(TailLimit::Infinite) => {
                if best.is_none() {
                    best = Some((r, Limit::Infinite, f64::INFINITY));
                }
            }
            Some(TailLimit::Zero) => {}
            None => any_inconclusive = true,
        }
    }
    let theta3 = match (&best, any_inconclusive) {
        (Some(_), _) => ThetaStatus::Pass,
        (None, false) if !r_grid.is_empty() => ThetaStatus::Fail,
        _ => ThetaStatus::Inconclusive,
    };

    ThetaClassification {
        growth: f.name(),
        theta1,
        theta2,
        theta3,
        exponent: best.as_ref().map(|b| b.0),
        limit: best.map(|b| b.1),
        probes,
    }
}

enum TailLimit {
    Finite { value: f64, spread: f64 },
    Infinite,
    Zero,
}

/// Decides the limit of a sequence of `ln` values sampled at `ln t` probes
/// heading to `-inf`, using the last three entries.
fn limit_of(lnt: &[f64], ln_vals: &[f64]) -> Option<TailLimit> {
    let n = ln_vals.len();
    if n < 3 {
        return None;
    }
    let tail = &ln_vals[n - 3..];
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() && hi - lo <= STABLE_SPREAD {
        return Some(TailLimit::Finite {
            value: tail[2].exp(),
            spread: hi - lo,
        });
    }
    if lo > DIVERGED_LN {
        return Some(TailLimit::Infinite);
    }
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    let increasing = tail.windows(2).all(|w| w[1] > w[0]);
    if decreasing && tail[2] < VANISHED_LN {
        return Some(TailLimit::Zero);
    }
    // power-law extrapolation: estimate ~ C t^s with s read off the tail
    let slopes: Vec<f64> = (n - 3..n - 1)
        .map(|i| (ln_vals[i + 1] - ln_vals[i]) / (lnt[i + 1] - lnt[i]))
        .collect();
    if decreasing && slopes.iter().all(|s| *s >= MIN_SLOPE) {
        return Some(TailLimit::Zero);
    }
    if increasing && slopes.iter().all(|s| *s <= -MIN_SLOPE) {
        return Some(TailLimit::Infinite);
    }
    None
}

fn classify_tail(
    lnt: &[f64],
    ln_vals: &[f64],
    small: impl Fn(f64) -> bool,
    stuck_above: impl Fn(f64) -> bool,
) -> ThetaStatus {
    let n = ln_vals.len();
    if n < 3 {
        return ThetaStatus::Inconclusive;
    }
    let non_increasing = ln_vals.windows(2).all(|w| w[1] <= w[0] + LOG_SLACK);
    match limit_of(lnt, ln_vals) {
        Some(TailLimit::Zero) if non_increasing => ThetaStatus::Pass,
        _ if non_increasing && small(ln_vals[n - 1]) => ThetaStatus::Pass,
        Some(TailLimit::Finite { .. }) if stuck_above(ln_vals[n - 1]) => ThetaStatus::Fail,
        Some(TailLimit::Infinite) => ThetaStatus::Fail,
        _ => ThetaStatus::Inconclusive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_log_closed_forms() {
        assert_eq!(GrowthFunction::ExpT.eval_log(0.25).unwrap(), 0.25);
        let v = GrowthFunction::Example1.eval_log(1.0).unwrap();
        assert!((v - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert_eq!(GrowthFunction::ExpT.eval_log(10_000.0).unwrap(), 10_000.0);
    }

    #[test]
    fn eval_log_rejects_non_positive() {
        for f in GrowthFunction::builtins() {
            assert!(matches!(f.eval_log(0.0), Err(Error::DomainError(_))));
            assert!(matches!(f.eval_log(-1.0), Err(Error::DomainError(_))));
        }
    }

    #[test]
    fn log_log_matches_log_of_eval_log() {
        for f in GrowthFunction::builtins() {
            for t in [1e-3, 0.1, 0.5, 1.0, 3.0, 50.0] {
                let value = f.eval_log(t).unwrap();
                if value < f64::MIN_POSITIVE {
                    // underflow of e^{-1/t}; log_log stays exact
                    assert!(f.log_log(t).is_finite());
                    continue;
                }
                let direct = value.ln();
                assert!((f.log_log(t) - direct).abs() < 1e-12, "{} at {t}", f.name());
            }
        }
    }

    #[test]
    fn no_overflow_up_to_1e8() {
        for f in GrowthFunction::builtins() {
            for t in [1e-300, 1e-12, 1.0, 1e4, 1e8] {
                let v = f.eval_log(t).unwrap();
                assert!(v.is_finite() && v >= 0.0);
                assert!(f.log_log(t).is_finite());
            }
        }
    }

    #[test]
    fn power_shift_log_log_is_accurate_for_tiny_arguments() {
        let f = GrowthFunction::PowerShift { p: 2.0 };
        // log(1 + t^2) ~ t^2 so ln log f ~ 2 ln t
        let t: f64 = 1e-200;
        assert!((f.log_log(t) - 2.0 * t.ln()).abs() < 1e-12);
        let t: f64 = 1e100;
        assert!((f.log_log(t) - (2.0 * t.ln()).ln()).abs() < 1e-12);
    }

    #[test]
    fn tabulated_interpolates_and_clamps() {
        let f = GrowthFunction::Tabulated {
            t: vec![1.0, 2.0],
            log_f: vec![1.0, 3.0],
        };
        f.validate().unwrap();
        assert_eq!(f.eval_log(1.5).unwrap(), 2.0);
        assert_eq!(f.eval_log(0.1).unwrap(), 1.0);
        assert_eq!(f.eval_log(9.0).unwrap(), 3.0);
        let bad = GrowthFunction::Tabulated {
            t: vec![2.0, 1.0],
            log_f: vec![1.0, 3.0],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn expansive_inequality_in_log_log_domain() {
        // e^{-r} >= eta e^{-(r+1)} iff eta <= e
        let f = GrowthFunction::Example1;
        for r in 1..=64u32 {
            let lhs = 1.0 / r as f64;
            let rhs = 1.0 / (r + 1) as f64;
            assert!(expansive_holds(&f, lhs, rhs, 2.0));
            assert!(!expansive_holds(&f, lhs, rhs, 3.0));
        }
        assert!(!expansive_holds(&GrowthFunction::ExpT, 0.0, 1.0, 2.0));
    }

    #[test]
    fn theta_profile_of_exp_t() {
        let c = classify_theta(&GrowthFunction::ExpT, &default_probe_scales(), &default_r_grid());
        assert_eq!(c.theta1, ThetaStatus::Pass);
        assert_eq!(c.theta2, ThetaStatus::Pass);
        assert_eq!(c.theta3, ThetaStatus::Fail);
        assert_eq!(c.exponent, None);
    }

    #[test]
    fn theta_profile_of_exp_sqrt() {
        let c = classify_theta(&GrowthFunction::ExpSqrt, &default_probe_scales(), &default_r_grid());
        assert_eq!((c.theta1, c.theta2, c.theta3), (ThetaStatus::Pass, ThetaStatus::Pass, ThetaStatus::Pass));
        assert_eq!(c.exponent, Some(0.5));
        match c.limit {
            Some(Limit::Finite(l)) => assert!((l - 1.0).abs() < 0.1),
            other => panic!("expected finite limit, got {other:?}"),
        }
    }

    #[test]
    fn theta_profile_of_example1() {
        let c = classify_theta(&GrowthFunction::Example1, &default_probe_scales(), &default_r_grid());
        assert_eq!(c.theta1, ThetaStatus::Pass);
        // log f = e^{-1/t} -> 0, so f(t_n) -> 1 along t_n -> 0+
        assert_eq!(c.theta2, ThetaStatus::Pass);
        assert_eq!(c.theta3, ThetaStatus::Fail);
    }

    #[test]
    fn theta_is_deterministic() {
        let f = GrowthFunction::PowerShift { p: 0.3 };
        let a = classify_theta(&f, &default_probe_scales(), &default_r_grid());
        let b = classify_theta(&f, &default_probe_scales(), &default_r_grid());
        assert_eq!(a, b);
        assert_eq!(a.theta3, ThetaStatus::Pass);
        assert!((a.exponent.unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn non_monotone_table_fails_theta1() {
        let f = GrowthFunction::Tabulated {
            t: vec![1.0, 2.0, 3.0],
            log_f: vec![1.0, 3.0, 2.0],
        };
        let c = classify_theta(&f, &default_probe_scales(), &default_r_grid());
        assert_eq!(c.theta1, ThetaStatus::Fail);
        // log f is clamped to 1 below t = 1, so f(t) -> e, not 1
        assert_eq!(c.theta2, ThetaStatus::Fail);
    }
}
