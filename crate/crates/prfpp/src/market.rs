//! Binomial market primitives: per-period market parameters, the common-noise
//! regime variable, agent preferences, validation, and derived quantities
//! (risk-neutral probability, regime drifts, return moments, covariance).
//!
//! All values are plain `f64`; invariants are enforced at construction and
//! re-checkable through [`MarketPeriodParams::validate`]. Every operation here
//! is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};

/// Probabilities live in open intervals; values this close to 0 or 1 are
/// rejected as boundary cases.
pub const PROB_BOUNDARY_TOL: f64 = 1e-12;

/// Tolerance for the law-of-total-probability consistency check
/// p = p_cn * p_bull + (1 - p_cn) * p_bear when `p` is supplied externally
/// (scenario files with hand-rounded decimals).
pub const TOTAL_PROBABILITY_TOL: f64 = 1e-9;

fn check_prob(out: &mut Violations, name: &str, v: f64) {
    if !v.is_finite() || v <= PROB_BOUNDARY_TOL || v >= 1.0 - PROB_BOUNDARY_TOL {
        out.push(format!("{name} must lie strictly inside (0, 1), got {v}"));
    }
}

/// Bernoulli regime variable distinguishing bull (1) and bear (0) markets;
/// the sole source of cross-stock correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommonNoiseParams {
    /// Probability of the bull regime for the period.
    pub p_cn: f64,
}

impl CommonNoiseParams {
    pub fn new(p_cn: f64) -> Result<Self> {
        let mut v = Violations::new();
        check_prob(&mut v, "p_cn", p_cn);
        v.into_result()?;
        Ok(CommonNoiseParams { p_cn })
    }
}

/// One agent's binomial market for one period: gross return levels `u`/`d`,
/// the unconditional up-probability `p`, and the regime-conditional
/// up-probabilities `p_bull`/`p_bear`.
///
/// Derived quantities (`q`, regime drifts, moments) are computed on demand and
/// never stored, so a value that validated once cannot drift out of sync.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketPeriodParams {
    /// Gross up-return, > 1.
    pub u: f64,
    /// Gross down-return, in (0, 1).
    pub d: f64,
    /// Unconditional up-probability.
    pub p: f64,
    /// Up-probability given the bull regime.
    pub p_bull: f64,
    /// Up-probability given the bear regime.
    pub p_bear: f64,
}

impl MarketPeriodParams {
    /// Build from regime probabilities; `p` is derived by total probability.
    pub fn new(u: f64, d: f64, p_bull: f64, p_bear: f64, cn: &CommonNoiseParams) -> Result<Self> {
        let p = cn.p_cn * p_bull + (1.0 - cn.p_cn) * p_bear;
        let m = MarketPeriodParams { u, d, p, p_bull, p_bear };
        m.validate()?;
        Ok(m)
    }

    /// Build with an externally supplied unconditional probability, checked
    /// against `cn` for total-probability consistency.
    pub fn with_unconditional(
        u: f64,
        d: f64,
        p: f64,
        p_bull: f64,
        p_bear: f64,
        cn: &CommonNoiseParams,
    ) -> Result<Self> {
        let m = MarketPeriodParams { u, d, p, p_bull, p_bear };
        let mut v = m.collect_violations(false);
        let implied = cn.p_cn * p_bull + (1.0 - cn.p_cn) * p_bear;
        if (p - implied).abs() > TOTAL_PROBABILITY_TOL {
            v.push(format!(
                "total-probability mismatch: p = {p} but p_cn*p_bull + (1-p_cn)*p_bear = {implied}"
            ));
        }
        v.into_result()?;
        Ok(m)
    }

    /// Degenerate market with `p_bull == p_bear == p`: the stock carries no
    /// common-noise exposure. This is the testing flag for the
    /// independent-stocks limit; the strict `p_bull > p_bear` ordering is
    /// deliberately waived here and only here.
    pub fn without_common_noise(u: f64, d: f64, p: f64) -> Result<Self> {
        let m = MarketPeriodParams { u, d, p, p_bull: p, p_bear: p };
        m.collect_violations(true).into_result()?;
        Ok(m)
    }

    fn collect_violations(&self, allow_equal_regimes: bool) -> Violations {
        let mut v = Violations::new();
        if !self.d.is_finite() || self.d <= 0.0 {
            v.push(format!("d must be > 0, got {}", self.d));
        }
        if !(self.d < 1.0) {
            v.push(format!("d must be < 1, got {}", self.d));
        }
        if !(self.u > 1.0) {
            v.push(format!("u must be > 1, got {}", self.u));
        }
        check_prob(&mut v, "p", self.p);
        check_prob(&mut v, "p_bull", self.p_bull);
        check_prob(&mut v, "p_bear", self.p_bear);
        if allow_equal_regimes {
            if self.p_bull < self.p_bear {
                v.push(format!(
                    "p_bull must be >= p_bear, got {} < {}",
                    self.p_bull, self.p_bear
                ));
            }
        } else if !(self.p_bull > self.p_bear) {
            v.push(format!(
                "p_bull must be > p_bear (stocks perform better in the bull regime), got {} <= {}",
                self.p_bull, self.p_bear
            ));
        }
        v
    }

    /// Check every invariant, returning all violations rather than the first.
    pub fn validate(&self) -> std::result::Result<(), Violations> {
        self.collect_violations(false).into_result()
    }

    /// Like [`validate`](Self::validate) but admits the degenerate
    /// `p_bull == p_bear` markets produced by
    /// [`without_common_noise`](Self::without_common_noise). Solvers accept
    /// those so the independent-stocks limits stay expressible.
    pub fn validate_relaxed(&self) -> std::result::Result<(), Violations> {
        self.collect_violations(true).into_result()
    }

    /// [`validate`](Self::validate) plus the total-probability consistency
    /// check against a common-noise parameter.
    pub fn validate_against(&self, cn: &CommonNoiseParams) -> std::result::Result<(), Violations> {
        let mut v = self.collect_violations(false);
        let implied = cn.p_cn * self.p_bull + (1.0 - cn.p_cn) * self.p_bear;
        if (self.p - implied).abs() > TOTAL_PROBABILITY_TOL {
            v.push(format!(
                "total-probability mismatch: p = {} but p_cn*p_bull + (1-p_cn)*p_bear = {implied}",
                self.p
            ));
        }
        v.into_result()
    }

    /// Conditional risk-neutral probability of an upward move,
    /// q = (1 - d) / (u - d).
    pub fn risk_neutral_up_prob(&self) -> f64 {
        (1.0 - self.d) / (self.u - self.d)
    }

    /// Expected excess return p(u - 1) + (1 - p)(d - 1) over the zero-interest
    /// bond.
    pub fn expected_excess_return(&self) -> f64 {
        self.p * (self.u - 1.0) + (1.0 - self.p) * (self.d - 1.0)
    }

    /// Conditional expected excess returns per regime:
    /// (bull drift, bear drift). The bull drift strictly exceeds the bear
    /// drift whenever `p_bull > p_bear`.
    pub fn regime_drifts(&self) -> (f64, f64) {
        let bull = self.p_bull * (self.u - 1.0) + (1.0 - self.p_bull) * (self.d - 1.0);
        let bear = self.p_bear * (self.u - 1.0) + (1.0 - self.p_bear) * (self.d - 1.0);
        (bull, bear)
    }

    /// Moments of the two-point return R = u with prob p, d with prob 1-p.
    pub fn return_moments(&self) -> ReturnMoments {
        let spread = self.u - self.d;
        let pq = self.p * (1.0 - self.p);
        ReturnMoments {
            mean: self.p * self.u + (1.0 - self.p) * self.d,
            variance: pq * spread * spread,
            skewness: (1.0 - 2.0 * self.p) / pq.sqrt(),
        }
    }

    /// Same mean and `p`, different dispersion: set `u` to `new_u` and move
    /// `d` so the expected return is unchanged.
    pub fn volatility_variant(&self, new_u: f64) -> Result<Self> {
        let mean = self.p * self.u + (1.0 - self.p) * self.d;
        let new_d = (mean - self.p * new_u) / (1.0 - self.p);
        let m = MarketPeriodParams { u: new_u, d: new_d, ..*self };
        m.collect_violations(self.p_bull == self.p_bear).into_result()?;
        Ok(m)
    }

    /// Same `p` and `d`, higher (or lower) expected return through `u`.
    pub fn expected_return_variant(&self, new_u: f64) -> Result<Self> {
        let m = MarketPeriodParams { u: new_u, ..*self };
        m.collect_violations(self.p_bull == self.p_bear).into_result()?;
        Ok(m)
    }

    /// More positively skewed variant: raise `u` and lower `p` jointly so the
    /// mean and `d` stay fixed. The regime probabilities shift with `p`,
    /// keeping the bull-bear spread constant so the market stays consistent
    /// with `cn`.
    pub fn positive_skew_variant(&self, new_u: f64, cn: &CommonNoiseParams) -> Result<Self> {
        let mean = self.p * self.u + (1.0 - self.p) * self.d;
        let new_p = (mean - self.d) / (new_u - self.d);
        self.reprobabilized(new_u, self.d, new_p, cn)
    }

    /// More negatively skewed variant: lower `d` and raise `p` jointly so the
    /// mean and `u` stay fixed.
    pub fn negative_skew_variant(&self, new_d: f64, cn: &CommonNoiseParams) -> Result<Self> {
        let mean = self.p * self.u + (1.0 - self.p) * self.d;
        let new_p = (mean - new_d) / (self.u - new_d);
        self.reprobabilized(self.u, new_d, new_p, cn)
    }

    fn reprobabilized(&self, u: f64, d: f64, p: f64, cn: &CommonNoiseParams) -> Result<Self> {
        let spread = self.p_bull - self.p_bear;
        let m = MarketPeriodParams {
            u,
            d,
            p,
            p_bull: p + (1.0 - cn.p_cn) * spread,
            p_bear: p - cn.p_cn * spread,
        };
        m.collect_violations(spread == 0.0).into_result()?;
        Ok(m)
    }
}

/// Mean, variance and skewness of a two-point return distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

/// CARA preferences plus the relative-performance competition weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentPreferences {
    /// Absolute risk aversion, > 0.
    pub gamma: f64,
    /// Competition weight in [0, 1].
    pub theta: f64,
    /// Initial wealth.
    pub x0: f64,
}

impl AgentPreferences {
    pub fn new(gamma: f64, theta: f64, x0: f64) -> Result<Self> {
        let p = AgentPreferences { gamma, theta, x0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> std::result::Result<(), Violations> {
        let mut v = Violations::new();
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            v.push(format!("gamma must be > 0, got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            v.push(format!("theta must lie in [0, 1], got {}", self.theta));
        }
        if !self.x0.is_finite() {
            v.push(format!("x0 must be finite, got {}", self.x0));
        }
        v.into_result()
    }
}

/// One agent's full type for a period: preferences plus her specialized
/// market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub prefs: AgentPreferences,
    pub market: MarketPeriodParams,
}

impl AgentSpec {
    pub fn new(prefs: AgentPreferences, market: MarketPeriodParams) -> Self {
        AgentSpec { prefs, market }
    }

    pub fn validate(&self) -> std::result::Result<(), Violations> {
        let mut v = match self.prefs.validate() {
            Ok(()) => Violations::new(),
            Err(v) => v,
        };
        if let Err(mv) = self.market.validate() {
            v.0.extend(mv.0);
        }
        v.into_result()
    }

    /// Composition of preference validation with the market's relaxed check.
    pub fn validate_relaxed(&self) -> std::result::Result<(), Violations> {
        let mut v = match self.prefs.validate() {
            Ok(()) => Violations::new(),
            Err(v) => v,
        };
        if let Err(mv) = self.market.validate_relaxed() {
            v.0.extend(mv.0);
        }
        v.into_result()
    }
}

/// Law of total probability: p = p_cn * p_bull + (1 - p_cn) * p_bear.
pub fn unconditional_up_prob(cn: &CommonNoiseParams, p_bull: f64, p_bear: f64) -> Result<f64> {
    let mut v = Violations::new();
    check_prob(&mut v, "p_bull", p_bull);
    check_prob(&mut v, "p_bear", p_bear);
    v.into_result()?;
    Ok(cn.p_cn * p_bull + (1.0 - cn.p_cn) * p_bear)
}

/// Covariance of two agents' stock returns over one period,
/// (u-d)^2 ((1-p_cn) p_bear_i p_bear_j + p_cn p_bull_i p_bull_j - p_i p_j).
///
/// Evaluated in the factored form
/// (u-d)^2 p_cn (1-p_cn)(p_bull_i - p_bear_i)(p_bull_j - p_bear_j), which is
/// algebraically identical when each p is the total-probability mixture and
/// cancels exactly when a stock carries no regime exposure.
///
/// The formula is derived under shared price levels, so mismatched (u, d)
/// pairs are rejected.
pub fn pairwise_return_covariance(
    cn: &CommonNoiseParams,
    m_i: &MarketPeriodParams,
    m_j: &MarketPeriodParams,
) -> Result<f64> {
    if m_i.u != m_j.u || m_i.d != m_j.d {
        return Err(Error::Domain(format!(
            "pairwise covariance requires shared price levels: ({}, {}) vs ({}, {})",
            m_i.u, m_i.d, m_j.u, m_j.d
        )));
    }
    let spread = m_i.u - m_i.d;
    Ok(spread
        * spread
        * cn.p_cn
        * (1.0 - cn.p_cn)
        * (m_i.p_bull - m_i.p_bear)
        * (m_j.p_bull - m_j.p_bear))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cn() -> CommonNoiseParams {
        CommonNoiseParams::new(0.6).unwrap()
    }

    fn benchmark_market() -> MarketPeriodParams {
        MarketPeriodParams::new(1.2, 0.9, 0.6, 0.4, &cn()).unwrap()
    }

    #[test]
    fn risk_neutral_probability_examples() {
        let m = benchmark_market();
        assert!((m.risk_neutral_up_prob() - 1.0 / 3.0).abs() < 1e-15);
        let m = MarketPeriodParams::new(1.1, 0.9, 0.6, 0.4, &cn()).unwrap();
        assert!((m.risk_neutral_up_prob() - 0.5).abs() < 1e-15);
        let m = MarketPeriodParams::new(2.0, 0.5, 0.6, 0.4, &cn()).unwrap();
        assert!((m.risk_neutral_up_prob() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn expected_excess_return_examples() {
        let m = MarketPeriodParams::with_unconditional(1.2, 0.9, 0.6, 0.7, 0.45, &cn()).unwrap();
        assert!((m.expected_excess_return() - 0.08).abs() < 1e-15);

        // zero-excess: p equal to the risk-neutral probability
        let m =
            MarketPeriodParams::with_unconditional(1.2, 0.9, 1.0 / 3.0, 0.5, 1.0 / 12.0, &cn())
                .unwrap();
        assert!(m.expected_excess_return().abs() < 1e-15);

        let m = MarketPeriodParams::with_unconditional(1.1, 0.9, 0.4, 0.5, 0.25, &cn()).unwrap();
        assert!((m.expected_excess_return() + 0.02).abs() < 1e-15);
    }

    #[test]
    fn regime_drifts_examples() {
        let (bull, bear) = benchmark_market().regime_drifts();
        assert!((bull - 0.08).abs() < 1e-15);
        assert!((bear - 0.02).abs() < 1e-15);

        let m = MarketPeriodParams::new(1.1, 0.9, 0.99, 0.01, &cn()).unwrap();
        let (bull, bear) = m.regime_drifts();
        assert!((bull - 0.098).abs() < 1e-12);
        assert!((bear + 0.098).abs() < 1e-12);
    }

    #[test]
    fn regime_drift_gap_identity() {
        // bull - bear = (p_bull - p_bear)(u - d) exactly
        let m = benchmark_market();
        let (bull, bear) = m.regime_drifts();
        let gap = (m.p_bull - m.p_bear) * (m.u - m.d);
        assert!((bull - bear - gap).abs() < 1e-15);
        assert!(bull > bear);
    }

    #[test]
    fn unconditional_probability_examples() {
        let c = cn();
        assert!((unconditional_up_prob(&c, 0.6, 0.4).unwrap() - 0.52).abs() < 1e-15);
        assert!((unconditional_up_prob(&c, 0.5, 0.5).unwrap() - 0.5).abs() < 1e-15);
        let half = CommonNoiseParams::new(0.5).unwrap();
        assert!((unconditional_up_prob(&half, 0.7, 0.3).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn covariance_examples() {
        let c = cn();
        // no common-noise exposure: exactly zero
        let ind = MarketPeriodParams::without_common_noise(1.2, 0.9, 0.52).unwrap();
        assert_eq!(pairwise_return_covariance(&c, &ind, &ind).unwrap(), 0.0);

        let m = benchmark_market();
        let cov = pairwise_return_covariance(&c, &m, &m).unwrap();
        assert!((cov - 0.000864).abs() < 1e-15, "got {cov}");

        // perfectly correlated limit: variance of the single regime Bernoulli
        let m = MarketPeriodParams::with_unconditional(1.2, 0.9, 0.6, 1.0 - 1e-13, 1e-13, &c);
        // probabilities that close to the boundary are rejected; use an
        // interior point and compare against the analytic limit loosely
        assert!(m.is_err());
        let m = MarketPeriodParams::new(1.2, 0.9, 1.0 - 1e-9, 1e-9, &c).unwrap();
        let cov = pairwise_return_covariance(&c, &m, &m).unwrap();
        let limit = (1.2f64 - 0.9).powi(2) * c.p_cn * (1.0 - c.p_cn);
        assert!((cov - limit).abs() < 1e-8, "got {cov} vs {limit}");
    }

    #[test]
    fn covariance_rejects_mismatched_levels() {
        let c = cn();
        let a = benchmark_market();
        let b = MarketPeriodParams::new(1.3, 0.9, 0.6, 0.4, &c).unwrap();
        assert!(pairwise_return_covariance(&c, &a, &b).is_err());
    }

    #[test]
    fn return_moments_examples() {
        let c = cn();
        let m = MarketPeriodParams::with_unconditional(1.2, 0.9, 0.5, 0.6, 0.35, &c).unwrap();
        assert!(m.return_moments().skewness.abs() < 1e-15);

        let m = benchmark_market();
        let var = m.return_moments().variance;
        // here p = 0.52, so variance = 0.52 * 0.48 * 0.09
        assert!((var - 0.52 * 0.48 * 0.09).abs() < 1e-15);

        let m = MarketPeriodParams::new(1.2, 0.9, 1.0 - 1e-9, 1.0 - 2e-9, &c).unwrap();
        assert!(m.return_moments().variance < 1e-8);
    }

    #[test]
    fn validation_collects_all_violations() {
        let bad = MarketPeriodParams { u: 0.9, d: 1.0, p: 0.6, p_bull: 0.4, p_bear: 0.6 };
        let errs = bad.validate().unwrap_err();
        let text = errs.to_string();
        assert!(text.contains("d must be < 1"));
        assert!(text.contains("u must be > 1"));
        assert!(text.contains("p_bull must be > p_bear"));
        assert!(errs.0.len() >= 3);
    }

    #[test]
    fn total_probability_mismatch_detected() {
        let err =
            MarketPeriodParams::with_unconditional(1.2, 0.9, 0.6, 0.6, 0.4, &cn()).unwrap_err();
        assert!(err.to_string().contains("total-probability mismatch"));
    }

    #[test]
    fn boundary_probabilities_rejected() {
        let c = cn();
        assert!(MarketPeriodParams::new(1.2, 0.9, 1.0, 0.4, &c).is_err());
        assert!(MarketPeriodParams::new(1.2, 0.9, 0.6, 0.0, &c).is_err());
        assert!(CommonNoiseParams::new(1.0).is_err());
        assert!(CommonNoiseParams::new(0.0).is_err());
    }

    #[test]
    fn preference_validation() {
        assert!(AgentPreferences::new(0.0, 0.4, 0.0).is_err());
        assert!(AgentPreferences::new(3.0, 1.2, 0.0).is_err());
        assert!(AgentPreferences::new(3.0, -0.1, 0.0).is_err());
        assert!(AgentPreferences::new(3.0, 0.0, 0.0).is_ok());
        assert!(AgentPreferences::new(3.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn skew_variants_hold_mean_fixed() {
        let c = cn();
        let m = benchmark_market();
        let mean = m.return_moments().mean;

        let pos = m.positive_skew_variant(1.26, &c).unwrap();
        assert!((pos.return_moments().mean - mean).abs() < 1e-12);
        assert!(pos.return_moments().skewness > m.return_moments().skewness);
        assert!((pos.p_bull - pos.p_bear - (m.p_bull - m.p_bear)).abs() < 1e-12);
        pos.validate_against(&c).unwrap();

        let neg = m.negative_skew_variant(0.85, &c).unwrap();
        assert!((neg.return_moments().mean - mean).abs() < 1e-12);
        assert!(neg.return_moments().skewness < m.return_moments().skewness);
        neg.validate_against(&c).unwrap();
    }

    #[test]
    fn volatility_variant_holds_mean_and_p_fixed() {
        let m = benchmark_market();
        let mean = m.return_moments().mean;
        let wide = m.volatility_variant(1.26).unwrap();
        assert_eq!(wide.p, m.p);
        assert!((wide.return_moments().mean - mean).abs() < 1e-12);
        assert!(wide.return_moments().variance > m.return_moments().variance);
    }
}
