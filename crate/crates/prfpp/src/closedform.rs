//! Closed-form equilibria for the two extreme market setups: all agents
//! trading one shared stock, and mutually independent stocks (no common
//! noise). These double as fast paths and as oracles for the general solvers,
//! whose degenerate limits must reproduce them.

use crate::error::{Error, Result, Violations};
use crate::market::{AgentPreferences, AgentSpec, MarketPeriodParams};
use crate::mfg::SampledPopulation;

/// Shared-stock game: one market, finitely many preference profiles.
#[derive(Debug, Clone)]
pub struct SingleStockInputs {
    /// The one traded stock; only (u, d, p) matter here.
    pub market: MarketPeriodParams,
    pub agents: Vec<AgentPreferences>,
}

/// Mean-field aggregates of the population's preference distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationAggregates {
    /// Mean competition weight, must be < 1.
    pub theta_bar: f64,
    /// Mean of 1/gamma.
    pub inv_gamma_bar: f64,
}

impl PopulationAggregates {
    pub fn new(theta_bar: f64, inv_gamma_bar: f64) -> Result<Self> {
        let mut v = Violations::new();
        if !(0.0..1.0).contains(&theta_bar) {
            v.push(format!("theta_bar must lie in [0, 1), got {theta_bar}"));
        }
        if !(inv_gamma_bar > 0.0) {
            v.push(format!("inv_gamma_bar must be positive, got {inv_gamma_bar}"));
        }
        v.into_result()?;
        Ok(PopulationAggregates { theta_bar, inv_gamma_bar })
    }

    pub fn from_preferences(prefs: &[AgentPreferences]) -> Result<Self> {
        if prefs.is_empty() {
            return Err(Error::Domain("cannot aggregate an empty population".into()));
        }
        let n = prefs.len() as f64;
        let theta_bar = prefs.iter().map(|p| p.theta).sum::<f64>() / n;
        let inv_gamma_bar = prefs.iter().map(|p| 1.0 / p.gamma).sum::<f64>() / n;
        Self::new(theta_bar, inv_gamma_bar)
    }

    pub fn from_population(pop: &SampledPopulation) -> Result<Self> {
        let prefs: Vec<AgentPreferences> = pop.agents.iter().map(|a| a.prefs).collect();
        Self::from_preferences(&prefs)
    }
}

/// ln(p(1-q)/((1-p)q)), the log odds ratio of the physical against the
/// risk-neutral up probability. Positive exactly when the expected excess
/// return is positive.
fn log_odds_ratio(m: &MarketPeriodParams) -> f64 {
    let q = m.risk_neutral_up_prob();
    (m.p * (1.0 - q) / ((1.0 - m.p) * q)).ln()
}

/// Finite-N Nash equilibrium when a single stock is traded by everyone:
/// pi_i = ln(p(1-q)/((1-p)q))/(u-d) * (1/gamma_i + theta_i sum_k(1/gamma_k) / (N(1 - mean theta))).
pub fn single_stock_nash(inputs: &SingleStockInputs) -> Result<Vec<f64>> {
    inputs.market.validate_relaxed().map_err(Error::Invalid)?;
    if inputs.agents.is_empty() {
        return Err(Error::Domain("single-stock game needs at least one agent".into()));
    }
    for a in &inputs.agents {
        a.validate().map_err(Error::Invalid)?;
    }
    let n = inputs.agents.len() as f64;
    let theta_sum: f64 = inputs.agents.iter().map(|a| a.theta).sum();
    let denom = n * (1.0 - theta_sum / n);
    if denom.abs() < 1e-14 {
        return Err(Error::Domain(
            "mean competition weight equals 1; the shared-stock equilibrium is singular".into(),
        ));
    }
    let inv_gamma_sum: f64 = inputs.agents.iter().map(|a| 1.0 / a.gamma).sum();
    let lead = log_odds_ratio(&inputs.market) / (inputs.market.u - inputs.market.d);
    Ok(inputs
        .agents
        .iter()
        .map(|a| lead * (1.0 / a.gamma + a.theta * inv_gamma_sum / denom))
        .collect())
}

/// Mean-field equilibrium of the shared-stock game for an agent with the
/// given preferences against a population described by its aggregates:
/// pi = ln(p(1-q)/((1-p)q))/(u-d) * (1/gamma + theta * inv_gamma_bar / (1 - theta_bar)).
pub fn single_stock_mfe(
    m: &MarketPeriodParams,
    prefs: &AgentPreferences,
    aggregates: &PopulationAggregates,
) -> Result<f64> {
    m.validate_relaxed().map_err(Error::Invalid)?;
    prefs.validate().map_err(Error::Invalid)?;
    if aggregates.theta_bar >= 1.0 {
        return Err(Error::Domain(format!(
            "theta_bar = {} must be < 1",
            aggregates.theta_bar
        )));
    }
    let lead = log_odds_ratio(m) / (m.u - m.d);
    Ok(lead * (1.0 / prefs.gamma + prefs.theta * aggregates.inv_gamma_bar / (1.0 - aggregates.theta_bar)))
}

/// Finite-N equilibrium with mutually independent stocks:
/// pi_i = ln(p_i(1-q_i)/((1-p_i)q_i)) / (gamma_i (1 - theta_i/N)(u_i - d_i)).
/// Each agent's strategy ignores the others entirely; competition only enters
/// through the modified risk aversion gamma_i (1 - theta_i/N).
pub fn independent_stocks_nash(agents: &[AgentSpec], n: usize) -> Result<Vec<f64>> {
    if agents.is_empty() {
        return Err(Error::Domain("independent-stocks game needs at least one agent".into()));
    }
    if n < agents.len().max(2) {
        return Err(Error::Domain(format!(
            "population size N = {n} must cover the {} listed agents (and be at least 2)",
            agents.len()
        )));
    }
    agents
        .iter()
        .map(|a| {
            a.validate_relaxed().map_err(Error::Invalid)?;
            let m = &a.market;
            Ok(log_odds_ratio(m)
                / (a.prefs.gamma * (1.0 - a.prefs.theta / n as f64) * (m.u - m.d)))
        })
        .collect()
}

/// Mean-field equilibrium with independent stocks: the classical Merton
/// portfolio ln(p(1-q)/((1-p)q)) / (gamma (u-d)).
pub fn independent_stocks_mfe(agent: &AgentSpec) -> Result<f64> {
    agent.validate_relaxed().map_err(Error::Invalid)?;
    let m = &agent.market;
    Ok(log_odds_ratio(m) / (agent.prefs.gamma * (m.u - m.d)))
}
