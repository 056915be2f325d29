//! Mean-field machinery: population sampling, the contraction fixed point
//! y = F(y) whose solution is the conditional mean gain gap
//! E[pi* (bull drift - bear drift)], the mean-field equilibrium strategy, the
//! G-factor utility update, average-wealth dynamics, and the N -> infinity
//! convergence table against the homogeneous finite game.
//!
//! Conditional expectations over the type distribution are realized as sample
//! means over M sampled type vectors. The reduction is fixed-order pairwise
//! summation, so results are bit-identical for a given (spec, M, seed)
//! regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};
use crate::market::{AgentPreferences, AgentSpec, CommonNoiseParams, MarketPeriodParams};
use crate::nash;

/// Marginal distribution of one population parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamDistribution {
    Constant(f64),
    /// Closed interval [lo, hi].
    Uniform(f64, f64),
}

impl ParamDistribution {
    pub fn lo(&self) -> f64 {
        match *self {
            ParamDistribution::Constant(v) => v,
            ParamDistribution::Uniform(lo, _) => lo,
        }
    }

    pub fn hi(&self) -> f64 {
        match *self {
            ParamDistribution::Constant(v) => v,
            ParamDistribution::Uniform(_, hi) => hi,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            ParamDistribution::Constant(v) => v,
            ParamDistribution::Uniform(lo, hi) => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    /// Shift both endpoints; used by the network sweep panels.
    pub fn shifted(&self, delta: f64) -> Self {
        match *self {
            ParamDistribution::Constant(v) => ParamDistribution::Constant(v + delta),
            ParamDistribution::Uniform(lo, hi) => ParamDistribution::Uniform(lo + delta, hi + delta),
        }
    }
}

/// Distributional description of the mean-field population: independent
/// marginals for preferences and market parameters plus the shared bull
/// probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub gamma: ParamDistribution,
    pub theta: ParamDistribution,
    pub u: ParamDistribution,
    pub d: ParamDistribution,
    pub p_bull: ParamDistribution,
    pub p_bear: ParamDistribution,
    pub p_cn: f64,
    /// Admit p_bull == p_bear draws (the no-common-noise testing limit).
    /// Violates the strict regime ordering, so it is off by default.
    #[serde(default)]
    pub allow_equal_regimes: bool,
}

impl PopulationSpec {
    /// Reference population: p_bull ~ U[0.5,0.7], p_bear ~ U[0.3,0.5],
    /// u ~ U[1.16,1.24], d ~ U[0.86,0.94], gamma ~ U[2,4], theta ~ U[0.2,0.6],
    /// p_cn = 0.6.
    pub fn benchmark() -> Self {
        PopulationSpec {
            gamma: ParamDistribution::Uniform(2.0, 4.0),
            theta: ParamDistribution::Uniform(0.2, 0.6),
            u: ParamDistribution::Uniform(1.16, 1.24),
            d: ParamDistribution::Uniform(0.86, 0.94),
            p_bull: ParamDistribution::Uniform(0.5, 0.7),
            p_bear: ParamDistribution::Uniform(0.3, 0.5),
            p_cn: 0.6,
            allow_equal_regimes: false,
        }
    }

    /// Every point of every support must satisfy the market and preference
    /// invariants; the p_bull support must sit entirely above the p_bear
    /// support unless equal regimes are explicitly allowed.
    pub fn validate(&self) -> std::result::Result<(), Violations> {
        let mut v = Violations::new();
        let prob = |v: &mut Violations, name: &str, d: &ParamDistribution| {
            if d.lo() > d.hi() {
                v.push(format!("{name}: empty support [{}, {}]", d.lo(), d.hi()));
            }
            if d.lo() <= 0.0 || d.hi() >= 1.0 {
                v.push(format!(
                    "{name} support must lie strictly inside (0, 1), got [{}, {}]",
                    d.lo(),
                    d.hi()
                ));
            }
        };
        if self.gamma.lo() <= 0.0 || self.gamma.lo() > self.gamma.hi() {
            v.push(format!(
                "gamma support must be positive, got [{}, {}]",
                self.gamma.lo(),
                self.gamma.hi()
            ));
        }
        if self.theta.lo() < 0.0 || self.theta.hi() > 1.0 || self.theta.lo() > self.theta.hi() {
            v.push(format!(
                "theta support must lie in [0, 1], got [{}, {}]",
                self.theta.lo(),
                self.theta.hi()
            ));
        }
        if self.u.lo() <= 1.0 || self.u.lo() > self.u.hi() {
            v.push(format!("u support must exceed 1, got [{}, {}]", self.u.lo(), self.u.hi()));
        }
        if self.d.lo() <= 0.0 || self.d.hi() >= 1.0 || self.d.lo() > self.d.hi() {
            v.push(format!(
                "d support must lie inside (0, 1), got [{}, {}]",
                self.d.lo(),
                self.d.hi()
            ));
        }
        prob(&mut v, "p_bull", &self.p_bull);
        prob(&mut v, "p_bear", &self.p_bear);
        if self.p_cn <= 0.0 || self.p_cn >= 1.0 {
            v.push(format!("p_cn must lie strictly inside (0, 1), got {}", self.p_cn));
        }
        if !self.allow_equal_regimes && self.p_bull.lo() < self.p_bear.hi() {
            v.push(format!(
                "p_bull support [{}, {}] must sit above the p_bear support [{}, {}]",
                self.p_bull.lo(),
                self.p_bull.hi(),
                self.p_bear.lo(),
                self.p_bear.hi()
            ));
        }
        v.into_result()
    }

    /// Population of M identical agents; the exact two-regime conditional
    /// expectations coincide with the M = 1 sample.
    pub fn constant(prefs: &AgentPreferences, m: &MarketPeriodParams, p_cn: f64) -> Self {
        PopulationSpec {
            gamma: ParamDistribution::Constant(prefs.gamma),
            theta: ParamDistribution::Constant(prefs.theta),
            u: ParamDistribution::Constant(m.u),
            d: ParamDistribution::Constant(m.d),
            p_bull: ParamDistribution::Constant(m.p_bull),
            p_bear: ParamDistribution::Constant(m.p_bear),
            p_cn,
            allow_equal_regimes: m.p_bull == m.p_bear,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// A concrete population of M sampled type vectors. Deterministic function of
/// (spec, M, seed); each agent draws from its own counter-derived stream, so
/// the draws are order-independent.
#[derive(Debug, Clone)]
pub struct SampledPopulation {
    pub agents: Vec<AgentSpec>,
    pub seed: u64,
    pub cn: CommonNoiseParams,
}

pub fn sample_population(spec: &PopulationSpec, m: usize, seed: u64) -> Result<SampledPopulation> {
    spec.validate().map_err(Error::Invalid)?;
    if m < 1 {
        return Err(Error::Domain("population size M must be at least 1".into()));
    }
    let cn = CommonNoiseParams::new(spec.p_cn)?;
    let agents: Vec<AgentSpec> = (0..m)
        .map(|i| {
            let mut rng = ChaCha12Rng::seed_from_u64(splitmix64(seed ^ splitmix64(i as u64)));
            let gamma = spec.gamma.sample(&mut rng);
            let theta = spec.theta.sample(&mut rng);
            let u = spec.u.sample(&mut rng);
            let d = spec.d.sample(&mut rng);
            let p_bull = spec.p_bull.sample(&mut rng);
            let mut p_bear = spec.p_bear.sample(&mut rng);
            // redraw so the regime ordering holds per draw (ties between
            // separated supports have probability zero; overlapping supports
            // are admitted only behind the testing flag)
            if spec.allow_equal_regimes {
                while p_bear > p_bull {
                    p_bear = spec.p_bear.sample(&mut rng);
                }
            } else {
                while p_bear >= p_bull {
                    p_bear = spec.p_bear.sample(&mut rng);
                }
            }
            let p = spec.p_cn * p_bull + (1.0 - spec.p_cn) * p_bear;
            AgentSpec {
                prefs: AgentPreferences { gamma, theta, x0: 0.0 },
                market: MarketPeriodParams { u, d, p, p_bull, p_bear },
            }
        })
        .collect();
    Ok(SampledPopulation { agents, seed, cn })
}

impl SampledPopulation {
    /// Deterministically rebuilt population with each agent mapped through
    /// `f` (sweep transformations under common random numbers).
    pub fn transformed(
        &self,
        f: impl Fn(&AgentSpec) -> Result<AgentSpec> + Sync,
    ) -> Result<SampledPopulation> {
        let agents = self
            .agents
            .iter()
            .map(&f)
            .collect::<Result<Vec<_>>>()?;
        Ok(SampledPopulation { agents, seed: self.seed, cn: self.cn })
    }
}

/// Per-agent constants of the fixed-point map, precomputed once per solve.
struct FixedPointTerm {
    /// (bull drift - bear drift) / (gamma (u - d))
    coef: f64,
    /// ln((1-q) p_bull / (q (1-p_bull)))
    merton_log: f64,
    /// p_bear/p_bull - (1-p_bear)/(1-p_bull), negative under the regime order
    num: f64,
    /// (1-p_bear)/(1-p_bull)
    den: f64,
    /// gamma * theta
    gth: f64,
}

impl FixedPointTerm {
    fn build(a: &AgentSpec) -> Self {
        let m = &a.market;
        let q = m.risk_neutral_up_prob();
        let (bull, bear) = m.regime_drifts();
        FixedPointTerm {
            coef: (bull - bear) / (a.prefs.gamma * (m.u - m.d)),
            merton_log: ((1.0 - q) * m.p_bull / (q * (1.0 - m.p_bull))).ln(),
            num: m.p_bear / m.p_bull - (1.0 - m.p_bear) / (1.0 - m.p_bull),
            den: (1.0 - m.p_bear) / (1.0 - m.p_bull),
            gth: a.prefs.gamma * a.prefs.theta,
        }
    }

    fn eval(&self, odds_cn: f64, y: f64) -> f64 {
        // e^(gamma theta y) saturates the logistic term beyond the guard; the
        // clamped value equals the asymptote to machine precision
        let x = (self.gth * y).clamp(-nash::EXP_GUARD, nash::EXP_GUARD);
        self.coef * (self.merton_log + (1.0 + self.num / (odds_cn * x.exp() + self.den)).ln())
    }
}

/// Fixed-order pairwise summation; deterministic and accurate for large M.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// The sample-average fixed-point map
/// F(y) = mean_i (D1_i - D0_i)/(gamma_i (u_i - d_i)) [ ln((1-q_i)p1_i/(q_i(1-p1_i)))
///        + ln(1 + (p0/p1 - (1-p0)/(1-p1)) / ((p_cn/(1-p_cn)) e^(gamma theta y) + (1-p0)/(1-p1))) ].
pub fn mfg_fixed_point_map(y: f64, pop: &SampledPopulation) -> f64 {
    let odds = pop.cn.p_cn / (1.0 - pop.cn.p_cn);
    let terms: Vec<f64> = pop
        .agents
        .iter()
        .map(|a| FixedPointTerm::build(a).eval(odds, y))
        .collect();
    mean(&terms)
}

/// Mean-field solution: the population fixed point, per-agent equilibrium
/// strategies, and per-agent utility-update factors G(pi*).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MfgSolution {
    pub y_star: f64,
    pub strategies: Vec<f64>,
    pub g_factors: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Banach iteration y <- F(y) from y0 = 0.
///
/// F is a contraction with slope in (0, 1) for every valid population, so the
/// iteration converges geometrically regardless of the sign of individual
/// agents' excess returns; y* > 0 is guaranteed (and only claimed) when every
/// agent's expected excess return is positive, which makes F(0) > 0.
pub fn solve_mfg_fixed_point(
    pop: &SampledPopulation,
    tol: f64,
    max_iter: usize,
) -> Result<MfgSolution> {
    if tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if pop.agents.is_empty() {
        return Err(Error::Domain("population is empty".into()));
    }
    if max_iter == 0 {
        return Err(Error::Domain("max_iter must be at least 1".into()));
    }
    let odds = pop.cn.p_cn / (1.0 - pop.cn.p_cn);
    let terms: Vec<FixedPointTerm> = pop.agents.par_iter().map(FixedPointTerm::build).collect();
    let eval = |y: f64| -> f64 {
        let vals: Vec<f64> = terms.par_iter().map(|t| t.eval(odds, y)).collect();
        mean(&vals)
    };

    let mut y = 0.0;
    let mut last_step = f64::INFINITY;
    for k in 1..=max_iter {
        let next = eval(y);
        let step = (next - y).abs();
        if step < tol {
            let y_star = next;
            let strategies: Vec<f64> = pop
                .agents
                .par_iter()
                .map(|a| mfe_strategy(a, &pop.cn, y_star))
                .collect();
            let bulls: Vec<f64> = pop
                .agents
                .iter()
                .zip(&strategies)
                .map(|(a, pi)| pi * a.market.regime_drifts().0)
                .collect();
            let bears: Vec<f64> = pop
                .agents
                .iter()
                .zip(&strategies)
                .map(|(a, pi)| pi * a.market.regime_drifts().1)
                .collect();
            let y_bull = mean(&bulls);
            let y_bear = mean(&bears);
            let g_factors = pop
                .agents
                .iter()
                .zip(&strategies)
                .map(|(a, pi)| g_factor(a, &pop.cn, *pi, y_bull, y_bear))
                .collect::<Result<Vec<f64>>>()?;
            return Ok(MfgSolution {
                y_star,
                strategies,
                g_factors,
                iterations: k,
                residual: (eval(y_star) - y_star).abs(),
            });
        }
        let contraction = step / last_step;
        last_step = step;
        y = next;
        if k == max_iter {
            return Err(Error::Solver(format!(
                "fixed-point iteration did not reach tol {tol:.1e} in {max_iter} iterations \
                 (last step {step:.3e}, contraction estimate {contraction:.3})"
            )));
        }
    }
    unreachable!("loop returns or errors")
}

/// Mean-field equilibrium strategy of one agent given the population fixed
/// point:
/// pi* = ln[(1-q)(p_cn e^(gamma theta y*) p1 + (1-p_cn)p0)
///        / (q(p_cn e^(gamma theta y*)(1-p1) + (1-p_cn)(1-p0)))] / (gamma(u-d)).
pub fn mfe_strategy(agent: &AgentSpec, cn: &CommonNoiseParams, y_star: f64) -> f64 {
    let m = &agent.market;
    let q = m.risk_neutral_up_prob();
    let x = agent.prefs.gamma * agent.prefs.theta * y_star;
    // divide through by e^x when x > 0 so nothing overflows
    let (num, den) = if x >= 0.0 {
        let w = (-x).exp();
        (
            cn.p_cn * m.p_bull + (1.0 - cn.p_cn) * m.p_bear * w,
            cn.p_cn * (1.0 - m.p_bull) + (1.0 - cn.p_cn) * (1.0 - m.p_bear) * w,
        )
    } else {
        let w = x.exp();
        (
            cn.p_cn * m.p_bull * w + (1.0 - cn.p_cn) * m.p_bear,
            cn.p_cn * (1.0 - m.p_bull) * w + (1.0 - cn.p_cn) * (1.0 - m.p_bear),
        )
    };
    ((1.0 - q) * num / (q * den)).ln() / (agent.prefs.gamma * (m.u - m.d))
}

/// Split of the MFE strategy into the classical Merton portfolio and the
/// competition component that vanishes at theta = 0. Both parts are evaluated
/// independently; their sum reproduces [`mfe_strategy`] up to rounding.
pub fn mfe_decomposition(agent: &AgentSpec, cn: &CommonNoiseParams, y_star: f64) -> (f64, f64) {
    let m = &agent.market;
    let q = m.risk_neutral_up_prob();
    let scale = agent.prefs.gamma * (m.u - m.d);
    let merton = ((1.0 - q) * m.p / (q * (1.0 - m.p))).ln() / scale;

    let x = agent.prefs.gamma * agent.prefs.theta * y_star;
    let (num, den) = if x >= 0.0 {
        let w = (-x).exp();
        (
            cn.p_cn * m.p_bull + (1.0 - cn.p_cn) * m.p_bear * w,
            cn.p_cn * (1.0 - m.p_bull) + (1.0 - cn.p_cn) * (1.0 - m.p_bear) * w,
        )
    } else {
        let w = x.exp();
        (
            cn.p_cn * m.p_bull * w + (1.0 - cn.p_cn) * m.p_bear,
            cn.p_cn * (1.0 - m.p_bull) * w + (1.0 - cn.p_cn) * (1.0 - m.p_bear),
        )
    };
    let competition = ((1.0 - m.p) * num / (m.p * den)).ln() / scale;
    (merton, competition)
}

/// Single-period utility-update factor
/// G(pi) = p_cn e^(gamma theta y_bull)(p1 e^(-gamma pi(u-1)) + (1-p1) e^(-gamma pi(d-1)))
///       + (1-p_cn) e^(gamma theta y_bear)(p0 e^(-gamma pi(u-1)) + (1-p0) e^(-gamma pi(d-1))),
/// where y_bull/y_bear are the population-average gains per regime.
pub fn g_factor(
    agent: &AgentSpec,
    cn: &CommonNoiseParams,
    pi: f64,
    y_bull: f64,
    y_bear: f64,
) -> Result<f64> {
    let m = &agent.market;
    let g = agent.prefs.gamma;
    let th = agent.prefs.theta;
    let guard = |x: f64| -> Result<f64> {
        if x.abs() > nash::EXP_GUARD {
            return Err(Error::Overflow(format!(
                "exponent {x:.3e} in G factor exceeds the guard {}",
                nash::EXP_GUARD
            )));
        }
        Ok(x.exp())
    };
    let eu = guard(-g * pi * (m.u - 1.0))?;
    let ed = guard(-g * pi * (m.d - 1.0))?;
    let wb = guard(g * th * y_bull)?;
    let wr = guard(g * th * y_bear)?;
    Ok(cn.p_cn * wb * (m.p_bull * eu + (1.0 - m.p_bull) * ed)
        + (1.0 - cn.p_cn) * wr * (m.p_bear * eu + (1.0 - m.p_bear) * ed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Bull,
    Bear,
}

/// Average-wealth recursion: prev + mean_i pi_i * drift_i(regime).
pub fn average_wealth_update(
    pop: &SampledPopulation,
    strategies: &[f64],
    regime: Regime,
    prev_avg: f64,
) -> Result<f64> {
    if strategies.len() != pop.agents.len() {
        return Err(Error::Domain(format!(
            "strategy vector length {} does not match population size {}",
            strategies.len(),
            pop.agents.len()
        )));
    }
    let gains: Vec<f64> = pop
        .agents
        .iter()
        .zip(strategies)
        .map(|(a, pi)| {
            let (bull, bear) = a.market.regime_drifts();
            pi * match regime {
                Regime::Bull => bull,
                Regime::Bear => bear,
            }
        })
        .collect();
    Ok(prev_avg + mean(&gains))
}

/// One row of the finite-game-to-mean-field convergence table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitGapRow {
    pub n: usize,
    pub pi_n: f64,
    pub pi_mfe: f64,
    pub gap: f64,
}

/// Homogeneous N-agent equilibria against the mean-field strategy of the
/// matching constant population, for each N in `n_list`.
pub fn homogeneous_limit_check(
    prefs: &AgentPreferences,
    m: &MarketPeriodParams,
    cn: &CommonNoiseParams,
    n_list: &[usize],
) -> Result<Vec<LimitGapRow>> {
    let spec = PopulationSpec::constant(prefs, m, cn.p_cn);
    // constant population: the M = 1 sample already carries the exact
    // two-regime conditional expectations
    let pop = sample_population(&spec, 1, 0)?;
    let mfe = solve_mfg_fixed_point(&pop, 1e-14, 100_000)?;
    let pi_mfe = mfe.strategies[0];
    n_list
        .iter()
        .map(|&n| {
            let sol = nash::homogeneous_equilibrium(n, prefs, m, cn, 1e-10)?;
            let pi_n = sol.strategies[0];
            Ok(LimitGapRow { n, pi_n, pi_mfe, gap: (pi_n - pi_mfe).abs() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cn() -> CommonNoiseParams {
        CommonNoiseParams::new(0.6).unwrap()
    }

    fn benchmark_agent() -> AgentSpec {
        AgentSpec {
            prefs: AgentPreferences::new(3.0, 0.4, 0.0).unwrap(),
            market: MarketPeriodParams::new(1.2, 0.9, 0.6, 0.4, &cn()).unwrap(),
        }
    }

    fn constant_benchmark_population() -> SampledPopulation {
        let a = benchmark_agent();
        let spec = PopulationSpec::constant(&a.prefs, &a.market, 0.6);
        sample_population(&spec, 1, 0).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_and_in_support() {
        let spec = PopulationSpec::benchmark();
        let a = sample_population(&spec, 500, 42).unwrap();
        let b = sample_population(&spec, 500, 42).unwrap();
        for (x, y) in a.agents.iter().zip(&b.agents) {
            assert_eq!(x, y);
        }
        let c = sample_population(&spec, 500, 43).unwrap();
        assert!(a.agents.iter().zip(&c.agents).any(|(x, y)| x != y));
        for ag in &a.agents {
            ag.validate().unwrap();
            assert!((1.16..=1.24).contains(&ag.market.u));
            assert!((0.5..=0.7).contains(&ag.market.p_bull));
            assert!(ag.market.p_bull > ag.market.p_bear);
        }
    }

    #[test]
    fn sampling_is_prefix_stable() {
        // agent i depends only on (seed, i), not on M
        let spec = PopulationSpec::benchmark();
        let small = sample_population(&spec, 10, 7).unwrap();
        let large = sample_population(&spec, 100, 7).unwrap();
        assert_eq!(&large.agents[..10], &small.agents[..]);
    }

    #[test]
    fn benchmark_sample_means_within_three_sigma() {
        let spec = PopulationSpec::benchmark();
        let m = 10_000;
        let pop = sample_population(&spec, m, 11).unwrap();
        // uniform [lo, hi]: sd of the sample mean is (hi-lo)/sqrt(12 M)
        type Field = fn(&AgentSpec) -> f64;
        let cases: [(f64, f64, Field); 6] = [
            (2.0, 4.0, |a| a.prefs.gamma),
            (0.2, 0.6, |a| a.prefs.theta),
            (1.16, 1.24, |a| a.market.u),
            (0.86, 0.94, |a| a.market.d),
            (0.5, 0.7, |a| a.market.p_bull),
            (0.3, 0.5, |a| a.market.p_bear),
        ];
        for (lo, hi, get) in cases {
            let vals: Vec<f64> = pop.agents.iter().map(get).collect();
            let mean_v = pairwise_sum(&vals) / m as f64;
            let se = (hi - lo) / (12.0 * m as f64).sqrt();
            assert!(
                (mean_v - 0.5 * (lo + hi)).abs() < 3.0 * se,
                "mean {mean_v} outside 3 sigma of {}",
                0.5 * (lo + hi)
            );
        }
    }

    #[test]
    fn constant_spec_gives_identical_agents() {
        let a = benchmark_agent();
        let spec = PopulationSpec::constant(&a.prefs, &a.market, 0.6);
        let pop = sample_population(&spec, 20, 3).unwrap();
        for ag in &pop.agents {
            assert_eq!(ag, &pop.agents[0]);
            assert_eq!(ag.market, a.market);
        }
    }

    #[test]
    fn map_vanishes_for_equal_regimes() {
        let prefs = AgentPreferences::new(3.0, 0.4, 0.0).unwrap();
        let m = MarketPeriodParams::without_common_noise(1.2, 0.9, 0.6).unwrap();
        let spec = PopulationSpec::constant(&prefs, &m, 0.6);
        let pop = sample_population(&spec, 5, 0).unwrap();
        for y in [0.0, 0.3, 2.0] {
            assert_eq!(mfg_fixed_point_map(y, &pop), 0.0);
        }
        let sol = solve_mfg_fixed_point(&pop, 1e-12, 100).unwrap();
        assert_eq!(sol.y_star, 0.0);
        // strategies collapse to Merton
        let q = m.risk_neutral_up_prob();
        let merton = ((1.0 - q) * 0.6 / (q * 0.4)).ln() / (3.0 * 0.3);
        for s in &sol.strategies {
            assert!((s - merton).abs() < 1e-14);
        }
    }

    #[test]
    fn map_at_zero_matches_merton_log_term() {
        let pop = constant_benchmark_population();
        let a = &pop.agents[0];
        let m = &a.market;
        let q = m.risk_neutral_up_prob();
        let (bull, bear) = m.regime_drifts();
        let expected = (bull - bear) / (a.prefs.gamma * (m.u - m.d))
            * ((1.0 - q) * m.p / (q * (1.0 - m.p))).ln();
        let f0 = mfg_fixed_point_map(0.0, &pop);
        assert!((f0 - expected).abs() < 1e-14, "{f0} vs {expected}");
        assert!(f0 > 0.0);
    }

    #[test]
    fn map_slope_strictly_inside_unit_interval() {
        let spec = PopulationSpec::benchmark();
        let pop = sample_population(&spec, 2000, 5).unwrap();
        let h = 1e-6;
        let mut y = 0.0;
        while y <= 10.0 {
            let slope = (mfg_fixed_point_map(y + h, &pop) - mfg_fixed_point_map(y, &pop)) / h;
            assert!(slope > 0.0 && slope < 1.0, "slope {slope} at y = {y}");
            y += 0.5;
        }
    }

    #[test]
    fn benchmark_solution_properties() {
        let spec = PopulationSpec::benchmark();
        let pop = sample_population(&spec, 10_000, 1).unwrap();
        let sol = solve_mfg_fixed_point(&pop, 1e-12, 10_000).unwrap();
        assert!(sol.y_star > 0.0);
        assert!(sol.iterations < 100);
        assert!(sol.residual < 1e-12);
        // self-consistency: y* = mean pi* (bull - bear)
        let gaps: Vec<f64> = pop
            .agents
            .iter()
            .zip(&sol.strategies)
            .map(|(a, pi)| {
                let (b, r) = a.market.regime_drifts();
                pi * (b - r)
            })
            .collect();
        let implied = pairwise_sum(&gaps) / gaps.len() as f64;
        assert!((implied - sol.y_star).abs() < 1e-11, "implied {implied} vs {}", sol.y_star);
    }

    #[test]
    fn deterministic_solution_for_fixed_seed() {
        let spec = PopulationSpec::benchmark();
        let a = solve_mfg_fixed_point(&sample_population(&spec, 1000, 9).unwrap(), 1e-12, 1000)
            .unwrap();
        let b = solve_mfg_fixed_point(&sample_population(&spec, 1000, 9).unwrap(), 1e-12, 1000)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn strategy_exceeds_merton_and_decomposition_is_exact() {
        let pop = constant_benchmark_population();
        let sol = solve_mfg_fixed_point(&pop, 1e-14, 10_000).unwrap();
        let a = benchmark_agent();
        let pi = mfe_strategy(&a, &cn(), sol.y_star);
        let (merton, competition) = mfe_decomposition(&a, &cn(), sol.y_star);
        assert!(competition > 0.0);
        assert!(pi > merton);
        assert!((merton + competition - pi).abs() < 1e-14);
        // theta = 0 collapses to Merton regardless of y*
        let mut solo = a;
        solo.prefs.theta = 0.0;
        let (m0, c0) = mfe_decomposition(&solo, &cn(), sol.y_star);
        assert_eq!(c0, 0.0);
        assert!((mfe_strategy(&solo, &cn(), sol.y_star) - m0).abs() < 1e-15);
        // y* = 0 collapses too
        let (m1, c1) = mfe_decomposition(&a, &cn(), 0.0);
        assert!(c1.abs() < 1e-15);
        assert!((mfe_strategy(&a, &cn(), 0.0) - m1).abs() < 1e-15);
    }

    #[test]
    fn competition_grows_with_theta() {
        let pop = constant_benchmark_population();
        let sol = solve_mfg_fixed_point(&pop, 1e-14, 10_000).unwrap();
        let mut a = benchmark_agent();
        let mut last = 0.0;
        for theta in [0.1, 0.3, 0.5, 0.7, 0.9] {
            a.prefs.theta = theta;
            let (_, competition) = mfe_decomposition(&a, &cn(), sol.y_star);
            assert!(competition > last, "competition not increasing at theta = {theta}");
            last = competition;
        }
    }

    #[test]
    fn g_factor_identities() {
        let a = benchmark_agent();
        let c = cn();
        assert!((g_factor(&a, &c, 0.0, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        // theta = 0: independent of the population averages
        let mut solo = a;
        solo.prefs.theta = 0.0;
        let g1 = g_factor(&solo, &c, 0.7, 0.0, 0.0).unwrap();
        let g2 = g_factor(&solo, &c, 0.7, 5.0, -3.0).unwrap();
        assert!((g1 - g2).abs() < 1e-15);
        // at the single-agent optimum with theta = 0 the factor is the
        // (sub-unit) optimal expected utility magnitude
        let pi = mfe_strategy(&solo, &c, 0.0);
        let g = g_factor(&solo, &c, pi, 0.0, 0.0).unwrap();
        assert!(g < 1.0 && g > 0.0);
        // overflow guard
        assert!(matches!(
            g_factor(&a, &c, 1e6, 0.0, 0.0),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn average_wealth_updates() {
        let spec = PopulationSpec::benchmark();
        let pop = sample_population(&spec, 50, 2).unwrap();
        let zeros = vec![0.0; 50];
        assert_eq!(average_wealth_update(&pop, &zeros, Regime::Bull, 1.5).unwrap(), 1.5);

        let single = sample_population(&spec, 1, 2).unwrap();
        let (bull, _) = single.agents[0].market.regime_drifts();
        let next = average_wealth_update(&single, &[2.0], Regime::Bull, 0.0).unwrap();
        assert!((next - 2.0 * bull).abs() < 1e-15);

        assert!(average_wealth_update(&pop, &[1.0], Regime::Bear, 0.0).is_err());

        // at equilibrium the bull increment strictly exceeds the bear one
        let sol = solve_mfg_fixed_point(&pop, 1e-12, 10_000).unwrap();
        let up = average_wealth_update(&pop, &sol.strategies, Regime::Bull, 0.0).unwrap();
        let dn = average_wealth_update(&pop, &sol.strategies, Regime::Bear, 0.0).unwrap();
        assert!(up > dn);
        assert!((up - dn - sol.y_star).abs() < 1e-11);
    }

    #[test]
    fn limit_check_gap_shrinks() {
        let a = benchmark_agent();
        let rows = homogeneous_limit_check(&a.prefs, &a.market, &cn(), &[2, 10, 100]).unwrap();
        assert!(rows[0].gap > rows[1].gap && rows[1].gap > rows[2].gap);
    }

    #[test]
    fn million_agent_game_reaches_the_mean_field() {
        let a = benchmark_agent();
        let sol =
            crate::nash::homogeneous_equilibrium(1_000_000, &a.prefs, &a.market, &cn(), 1e-10)
                .unwrap();
        let spec = PopulationSpec::constant(&a.prefs, &a.market, 0.6);
        let mfe = solve_mfg_fixed_point(&sample_population(&spec, 1, 0).unwrap(), 1e-14, 10_000)
            .unwrap();
        assert!((sol.strategies[0] - mfe.strategies[0]).abs() < 1e-3);
    }

    #[test]
    fn equal_regimes_limit_gap_vanishes_after_rescaling() {
        // without common noise the N-agent strategy is Merton scaled by
        // 1/(1 - theta/N); undoing the scale closes the gap exactly
        let prefs = AgentPreferences::new(3.0, 0.4, 0.0).unwrap();
        let m = MarketPeriodParams::without_common_noise(1.2, 0.9, 0.6).unwrap();
        let rows = homogeneous_limit_check(&prefs, &m, &cn(), &[2, 10, 100]).unwrap();
        for row in &rows {
            let rescaled = row.pi_n * (1.0 - prefs.theta / row.n as f64);
            assert!(
                (rescaled - row.pi_mfe).abs() < 1e-12,
                "N = {}: rescaled gap {}",
                row.n,
                (rescaled - row.pi_mfe).abs()
            );
        }
    }

    #[test]
    fn rejects_overlapping_regime_supports() {
        let mut spec = PopulationSpec::benchmark();
        spec.p_bear = ParamDistribution::Uniform(0.3, 0.55);
        assert!(spec.validate().is_err());
        spec.allow_equal_regimes = true;
        // relaxed flag admits the overlap; per-draw ordering is then the
        // caller's responsibility
        assert!(spec.validate().is_ok());
    }
}
