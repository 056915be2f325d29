//! Scenario execution: solve a scenario, run its sweep panels to CSV rows,
//! and run verification checks. All entry points are pure functions of the
//! loaded scenario (plus the solver settings it carries), so identical inputs
//! give identical outputs; sweep grid points are evaluated in parallel but
//! emitted in grid order.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::closedform::{self, PopulationAggregates, SingleStockInputs};
use crate::error::{Error, Result};
use crate::forward::{self, MartingaleMode, PeriodParams, ScenarioPath};
use crate::market::{AgentSpec, CommonNoiseParams};
use crate::mfg::{self, SampledPopulation};
use crate::nash;
use crate::scenario::{AgentOverride, Mode, Scenario, SolverSettings, SweepAxis, SweepBlock};

/// CLI-level overrides of the scenario's solver settings.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverOverrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl SolverOverrides {
    pub fn apply(&self, base: SolverSettings) -> SolverSettings {
        SolverSettings {
            seed: self.seed.unwrap_or(base.seed),
            samples: self.samples.unwrap_or(base.samples),
            tol: self.tol.unwrap_or(base.tol),
            max_iter: self.max_iter.unwrap_or(base.max_iter),
        }
    }
}

/// Everything a solve produces, serializable as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionRecord {
    pub mode: String,
    pub scenario: String,
    pub scenario_hash: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_star: Option<f64>,
    pub strategies: Vec<f64>,
    pub update_factors: Vec<f64>,
    /// Strategy of the scenario's fixed agent (mean-field scenarios).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_agent_strategy: Option<f64>,
    /// Mean-field closed-form strategy (single-stock / independent modes).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mfe_strategy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub wall_time_ms: f64,
}

fn cn_of(sc: &Scenario) -> Result<CommonNoiseParams> {
    let table = sc.file.common_noise.ok_or_else(|| Error::ScenarioSchema {
        path: sc.source.clone(),
        message: "missing [common-noise]".into(),
    })?;
    CommonNoiseParams::new(table.p_cn)
}

/// The scenario's fixed agent ([agent] preferences + [market]), with an
/// optional sweep-block override applied.
fn fixed_agent(
    sc: &Scenario,
    cn: Option<&CommonNoiseParams>,
    ov: Option<&AgentOverride>,
) -> Result<AgentSpec> {
    let prefs_table = sc.file.agent.ok_or_else(|| Error::ScenarioSchema {
        path: sc.source.clone(),
        message: "missing [agent]".into(),
    })?;
    let mut market_table = sc.file.market.ok_or_else(|| Error::ScenarioSchema {
        path: sc.source.clone(),
        message: "missing [market]".into(),
    })?;
    let mut prefs = prefs_table.to_prefs()?;
    if let Some(o) = ov {
        if let Some(g) = o.gamma {
            prefs.gamma = g;
        }
        if let Some(t) = o.theta {
            prefs.theta = t;
        }
        prefs.validate().map_err(Error::Invalid)?;
        if let Some(u) = o.u {
            market_table.u = u;
        }
        if let Some(d) = o.d {
            market_table.d = d;
        }
        if let Some(pb) = o.p_bull {
            market_table.p_bull = Some(pb);
            market_table.p = None;
        }
        if let Some(pr) = o.p_bear {
            market_table.p_bear = Some(pr);
            market_table.p = None;
        }
    }
    Ok(AgentSpec::new(prefs, market_table.to_market(cn)?))
}

fn sample_for(sc: &Scenario, settings: &SolverSettings) -> Result<SampledPopulation> {
    let cn = cn_of(sc)?;
    let spec = sc
        .file
        .population
        .as_ref()
        .ok_or_else(|| Error::ScenarioSchema {
            path: sc.source.clone(),
            message: "missing [population]".into(),
        })?
        .to_spec(&cn)?;
    mfg::sample_population(&spec, settings.samples, settings.seed)
}

/// Solve the scenario with its own solver settings.
pub fn run_solve(sc: &Scenario) -> Result<SolutionRecord> {
    run_solve_with(sc, &SolverOverrides::default())
}

pub fn run_solve_with(sc: &Scenario, overrides: &SolverOverrides) -> Result<SolutionRecord> {
    let settings = overrides.apply(sc.file.solver);
    let start = Instant::now();
    let mut record = SolutionRecord {
        mode: sc.file.mode.as_str().to_string(),
        scenario: sc.source.clone(),
        scenario_hash: sc.hash.clone(),
        seed: settings.seed,
        y_star: None,
        strategies: Vec::new(),
        update_factors: Vec::new(),
        fixed_agent_strategy: None,
        mfe_strategy: None,
        iterations: None,
        residual: None,
        wall_time_ms: 0.0,
    };

    match sc.file.mode {
        Mode::NashHomogeneous => {
            let cn = cn_of(sc)?;
            let agent = fixed_agent(sc, Some(&cn), None)?;
            let n = sc.file.n_agents.expect("schema-checked");
            let sol = nash::homogeneous_equilibrium(n, &agent.prefs, &agent.market, &cn, settings.tol)?;
            record.y_star = sol.fixed_point_y;
            record.strategies = sol.strategies;
            record.update_factors = sol.update_factors;
        }
        Mode::Nash2agent => {
            let cn = cn_of(sc)?;
            let a1 = sc.file.agents[0].to_spec(&cn)?;
            let a2 = sc.file.agents[1].to_spec(&cn)?;
            let sol = nash::two_agent_equilibrium(&a1, &a2, &cn, settings.tol)?;
            record.y_star = sol.fixed_point_y;
            record.strategies = sol.strategies;
            record.update_factors = sol.update_factors;
        }
        Mode::Mfg => {
            let cn = cn_of(sc)?;
            let pop = sample_for(sc, &settings)?;
            let sol = mfg::solve_mfg_fixed_point(&pop, settings.tol, settings.max_iter)?;
            let agent = fixed_agent(sc, Some(&cn), None)?;
            record.fixed_agent_strategy = Some(mfg::mfe_strategy(&agent, &cn, sol.y_star));
            record.y_star = Some(sol.y_star);
            record.iterations = Some(sol.iterations);
            record.residual = Some(sol.residual);
            record.strategies = sol.strategies;
            record.update_factors = sol.g_factors;
        }
        Mode::SingleStock => {
            let market = sc.file.market.expect("schema-checked").to_market(None)?;
            let table = sc.file.single_stock.as_ref().expect("schema-checked");
            if !table.agents.is_empty() {
                let agents = table
                    .agents
                    .iter()
                    .map(|p| p.to_prefs())
                    .collect::<Result<Vec<_>>>()?;
                record.strategies =
                    closedform::single_stock_nash(&SingleStockInputs { market, agents })?;
            }
            if let (Some(tb), Some(igb)) = (table.theta_bar, table.inv_gamma_bar) {
                let prefs = sc.file.agent.expect("schema-checked").to_prefs()?;
                let agg = PopulationAggregates::new(tb, igb)?;
                record.mfe_strategy = Some(closedform::single_stock_mfe(&market, &prefs, &agg)?);
            }
        }
        Mode::Independent => {
            let market = sc.file.market.expect("schema-checked").to_market(None)?;
            let prefs = sc.file.agent.expect("schema-checked").to_prefs()?;
            let spec = AgentSpec::new(prefs, market);
            let n = sc.file.n_agents.unwrap_or(2);
            record.strategies = closedform::independent_stocks_nash(&[spec], n)?;
            record.mfe_strategy = Some(closedform::independent_stocks_mfe(&spec)?);
        }
    }
    record.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(record)
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub panel: String,
    pub parameter: String,
    pub value: f64,
    pub fixed_agent_strategy: Option<f64>,
    pub y_star: Option<f64>,
    pub pop_mean_strategy: Option<f64>,
    pub pop_std_strategy: Option<f64>,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub error: Option<String>,
    pub scenario_hash: String,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        for row in &self.rows {
            writer
                .serialize(row)
                .map_err(|e| Error::Domain(format!("csv serialization: {e}")))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Domain(format!("csv not utf-8: {e}")))
    }
}

struct PointOutcome {
    fixed_agent_strategy: f64,
    y_star: f64,
    pop_mean_strategy: f64,
    pop_std_strategy: f64,
    iterations: usize,
    residual: f64,
}

fn population_stats(strategies: &[f64]) -> (f64, f64) {
    let n = strategies.len() as f64;
    let mean = mfg::pairwise_sum(strategies) / n;
    let sq: Vec<f64> = strategies.iter().map(|s| (s - mean) * (s - mean)).collect();
    (mean, (mfg::pairwise_sum(&sq) / n).sqrt())
}

/// Vary the fixed agent along an own-parameter axis.
fn vary_fixed_agent(
    axis: &SweepAxis,
    base: &AgentSpec,
    cn: &CommonNoiseParams,
    v: f64,
) -> Result<AgentSpec> {
    let mut agent = *base;
    match axis {
        SweepAxis::OwnTheta { .. } => agent.prefs.theta = v,
        SweepAxis::OwnGamma { .. } => agent.prefs.gamma = v,
        SweepAxis::OwnVolatility { .. } => agent.market = base.market.volatility_variant(v)?,
        SweepAxis::OwnExpectedReturn { .. } => {
            agent.market = base.market.expected_return_variant(v)?
        }
        SweepAxis::OwnSkewPositive { .. } => {
            agent.market = base.market.positive_skew_variant(v, cn)?
        }
        SweepAxis::OwnSkewNegative { .. } => {
            agent.market = base.market.negative_skew_variant(v, cn)?
        }
        _ => return Err(Error::Domain("network axis passed to own-agent variation".into())),
    }
    agent.prefs.validate().map_err(Error::Invalid)?;
    Ok(agent)
}

/// Transform one sampled population draw along a network axis at grid value
/// z. Preference shifts revalidate; market shifts go through the holding
/// variants so each draw keeps its mean where the protocol demands it.
fn network_transform(
    axis: &SweepAxis,
    cn: &CommonNoiseParams,
    z: f64,
    a: &AgentSpec,
) -> Result<AgentSpec> {
    let mut out = *a;
    match axis {
        SweepAxis::NetworkTheta { shift, .. } => {
            out.prefs.theta = a.prefs.theta + shift.at(z);
            out.prefs.validate().map_err(Error::Invalid)?;
        }
        SweepAxis::NetworkGamma { shift, .. } => {
            out.prefs.gamma = a.prefs.gamma + shift.at(z);
            out.prefs.validate().map_err(Error::Invalid)?;
        }
        SweepAxis::NetworkVolatility { u_shift, .. } => {
            out.market = a.market.volatility_variant(a.market.u + u_shift.at(z))?;
        }
        SweepAxis::NetworkExpectedReturn { u_shift, .. } => {
            out.market = a.market.expected_return_variant(a.market.u + u_shift.at(z))?;
        }
        SweepAxis::NetworkSkewPositive { u_shift, .. } => {
            out.market = a.market.positive_skew_variant(a.market.u + u_shift.at(z), cn)?;
        }
        SweepAxis::NetworkSkewNegative { d_shift, .. } => {
            out.market = a.market.negative_skew_variant(a.market.d + d_shift.at(z), cn)?;
        }
        _ => return Err(Error::Domain("own axis passed to network transformation".into())),
    }
    Ok(out)
}

fn sweep_point(
    block: &SweepBlock,
    base_pop: &SampledPopulation,
    base_agent: &AgentSpec,
    cn: &CommonNoiseParams,
    settings: &SolverSettings,
    v: f64,
    own_solution: Option<&mfg::MfgSolution>,
) -> Result<PointOutcome> {
    let (solution, agent) = if block.axis.is_network() {
        let pop = base_pop.transformed(|a| network_transform(&block.axis, cn, v, a))?;
        (mfg::solve_mfg_fixed_point(&pop, settings.tol, settings.max_iter)?, *base_agent)
    } else {
        let sol = own_solution.expect("own axes solve the base population once").clone();
        (sol, vary_fixed_agent(&block.axis, base_agent, cn, v)?)
    };
    let (mean, std) = population_stats(&solution.strategies);
    Ok(PointOutcome {
        fixed_agent_strategy: mfg::mfe_strategy(&agent, cn, solution.y_star),
        y_star: solution.y_star,
        pop_mean_strategy: mean,
        pop_std_strategy: std,
        iterations: solution.iterations,
        residual: solution.residual,
    })
}

/// Run every sweep panel of a mean-field scenario. The same seed is used for
/// every panel and grid point (common random numbers), so adjacent rows
/// differ only through the swept parameter. Failed points are recorded in
/// the error column and the sweep continues.
pub fn run_sweep(sc: &Scenario) -> Result<SweepTable> {
    run_sweep_with(sc, &SolverOverrides::default())
}

pub fn run_sweep_with(sc: &Scenario, overrides: &SolverOverrides) -> Result<SweepTable> {
    if sc.file.mode != Mode::Mfg || sc.file.sweep.is_empty() {
        return Err(Error::ScenarioSchema {
            path: sc.source.clone(),
            message: "sweeps need an mfg scenario with at least one [[sweep]] block".into(),
        });
    }
    let settings = overrides.apply(sc.file.solver);
    let cn = cn_of(sc)?;
    let base_spec = sc.file.population.as_ref().expect("schema-checked").to_spec(&cn)?;

    let mut rows = Vec::new();
    for block in &sc.file.sweep {
        let spec = match &block.population_override {
            Some(ov) => {
                let merged = ov.apply(&base_spec);
                merged.validate().map_err(Error::Invalid)?;
                merged
            }
            None => base_spec.clone(),
        };
        let base_pop = mfg::sample_population(&spec, settings.samples, settings.seed)?;
        let base_agent = fixed_agent(sc, Some(&cn), block.agent_override.as_ref())?;
        // own-parameter panels share one population solve
        let own_solution = if block.axis.is_network() {
            None
        } else {
            Some(mfg::solve_mfg_fixed_point(&base_pop, settings.tol, settings.max_iter)?)
        };

        let grid = block.axis.grid().to_vec();
        let outcomes: Vec<(f64, Result<PointOutcome>)> = grid
            .par_iter()
            .map(|&v| {
                (
                    v,
                    sweep_point(block, &base_pop, &base_agent, &cn, &settings, v, own_solution.as_ref()),
                )
            })
            .collect();
        for (v, outcome) in outcomes {
            let mut row = SweepRow {
                panel: block.name.clone(),
                parameter: block.axis.parameter().to_string(),
                value: v,
                fixed_agent_strategy: None,
                y_star: None,
                pop_mean_strategy: None,
                pop_std_strategy: None,
                iterations: None,
                residual: None,
                error: None,
                scenario_hash: sc.hash.clone(),
                seed: settings.seed,
            };
            match outcome {
                Ok(p) => {
                    row.fixed_agent_strategy = Some(p.fixed_agent_strategy);
                    row.y_star = Some(p.y_star);
                    row.pop_mean_strategy = Some(p.pop_mean_strategy);
                    row.pop_std_strategy = Some(p.pop_std_strategy);
                    row.iterations = Some(p.iterations);
                    row.residual = Some(p.residual);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            rows.push(row);
        }
    }
    Ok(SweepTable { rows })
}

/// Verification checks runnable against a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyCheck {
    /// Exact-tree forward martingale/supermartingale conditions.
    Martingale,
    /// Finite-difference contraction scan of the mean-field map.
    Contraction,
    /// Monotone convergence of the homogeneous N-agent game to the MFE.
    NToMfe,
}

impl std::str::FromStr for VerifyCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "martingale" => Ok(VerifyCheck::Martingale),
            "contraction" => Ok(VerifyCheck::Contraction),
            "n-to-mfe" => Ok(VerifyCheck::NToMfe),
            other => Err(Error::Domain(format!(
                "unknown check '{other}' (expected martingale, contraction, or n-to-mfe)"
            ))),
        }
    }
}

impl VerifyCheck {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerifyCheck::Martingale => "martingale",
            VerifyCheck::Contraction => "contraction",
            VerifyCheck::NToMfe => "n-to-mfe",
        }
    }
}

/// Machine-readable verification outcome.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub check: String,
    pub scenario: String,
    pub scenario_hash: String,
    pub pass: bool,
    pub summary: String,
    pub details: serde_json::Value,
}

/// Tolerance for the martingale equality residual.
pub const MARTINGALE_TOL: f64 = 1e-9;
/// Required gap at the largest N of the convergence table.
pub const N_TO_MFE_FINAL_GAP: f64 = 1e-3;

fn scenario_path(sc: &Scenario) -> Result<(ScenarioPath, MartingaleMode)> {
    let horizon = sc.file.horizon.unwrap_or(1);
    match sc.file.mode {
        Mode::Nash2agent => {
            let cn = cn_of(sc)?;
            let specs: Vec<AgentSpec> = sc
                .file
                .agents
                .iter()
                .map(|a| a.to_spec(&cn))
                .collect::<Result<Vec<_>>>()?;
            let path = ScenarioPath {
                agents: specs.iter().map(|s| s.prefs).collect(),
                periods: vec![
                    PeriodParams { markets: specs.iter().map(|s| s.market).collect(), cn };
                    horizon
                ],
            };
            Ok((path, MartingaleMode::Nash))
        }
        Mode::NashHomogeneous => {
            let cn = cn_of(sc)?;
            let agent = fixed_agent(sc, Some(&cn), None)?;
            let n = sc.file.n_agents.expect("schema-checked");
            let path = ScenarioPath {
                agents: vec![agent.prefs; n],
                periods: vec![PeriodParams { markets: vec![agent.market; n], cn }; horizon],
            };
            Ok((path, MartingaleMode::Nash))
        }
        Mode::Mfg => {
            let cn = cn_of(sc)?;
            let agent = fixed_agent(sc, Some(&cn), None)?;
            let path = ScenarioPath {
                agents: vec![agent.prefs],
                periods: vec![PeriodParams { markets: vec![agent.market], cn }; horizon],
            };
            Ok((path, MartingaleMode::MfgHomogeneous))
        }
        Mode::Independent => {
            let market = sc.file.market.expect("schema-checked").to_market(None)?;
            let prefs = sc.file.agent.expect("schema-checked").to_prefs()?;
            let n = sc.file.n_agents.unwrap_or(2);
            let cn = CommonNoiseParams::new(0.5)?; // inert: equal regimes
            let path = ScenarioPath {
                agents: vec![prefs; n],
                periods: vec![PeriodParams { markets: vec![market; n], cn }; horizon],
            };
            Ok((path, MartingaleMode::Nash))
        }
        Mode::SingleStock => Err(Error::Domain(
            "the shared-stock scenario has perfectly dependent returns; the exact-tree check \
             applies to distinct stocks only"
                .into(),
        )),
    }
}

pub fn run_verify(sc: &Scenario, check: VerifyCheck) -> Result<VerifyReport> {
    run_verify_with(sc, check, &SolverOverrides::default())
}

pub fn run_verify_with(
    sc: &Scenario,
    check: VerifyCheck,
    overrides: &SolverOverrides,
) -> Result<VerifyReport> {
    let settings = overrides.apply(sc.file.solver);
    let (pass, summary, details) = match check {
        VerifyCheck::Martingale => {
            let (path, mode) = scenario_path(sc)?;
            let report = forward::martingale_check_exact(&path, mode, MARTINGALE_TOL)?;
            (
                report.pass,
                format!(
                    "max equality residual {:.3e}, min perturbation margin {:.3e} over {} nodes",
                    report.max_equality_residual, report.min_perturbation_margin, report.nodes_checked
                ),
                serde_json::to_value(&report).map_err(|e| Error::Domain(e.to_string()))?,
            )
        }
        VerifyCheck::Contraction => {
            if sc.file.mode != Mode::Mfg {
                return Err(Error::Domain("contraction check applies to mfg scenarios".into()));
            }
            let pop = sample_for(sc, &settings)?;
            let h = 1e-6;
            let mut min_slope = f64::INFINITY;
            let mut max_slope = f64::NEG_INFINITY;
            let mut y = 0.0;
            while y <= 20.0 {
                let slope = (mfg::mfg_fixed_point_map(y + h, &pop) - mfg::mfg_fixed_point_map(y, &pop)) / h;
                min_slope = min_slope.min(slope);
                max_slope = max_slope.max(slope);
                y += 0.5;
            }
            let sol = mfg::solve_mfg_fixed_point(&pop, settings.tol, settings.max_iter)?;
            let pass = min_slope > 0.0 && max_slope < 1.0;
            (
                pass,
                format!(
                    "measured slope in [{min_slope:.3e}, {max_slope:.3e}]; converged in {} iterations",
                    sol.iterations
                ),
                serde_json::json!({
                    "min_slope": min_slope,
                    "max_slope": max_slope,
                    "h": h,
                    "iterations": sol.iterations,
                    "y_star": sol.y_star,
                    "residual": sol.residual,
                }),
            )
        }
        VerifyCheck::NToMfe => {
            let cn = cn_of(sc)?;
            let agent = fixed_agent(sc, Some(&cn), None)?;
            let rows =
                mfg::homogeneous_limit_check(&agent.prefs, &agent.market, &cn, &[2, 10, 100, 10_000])?;
            let decreasing = rows.windows(2).all(|w| w[1].gap < w[0].gap);
            let final_gap = rows.last().expect("nonempty").gap;
            let pass = decreasing && final_gap < N_TO_MFE_FINAL_GAP;
            (
                pass,
                format!(
                    "gaps {:?} strictly decreasing: {decreasing}, final gap {final_gap:.3e}",
                    rows.iter().map(|r| r.gap).collect::<Vec<_>>()
                ),
                serde_json::to_value(&rows).map_err(|e| Error::Domain(e.to_string()))?,
            )
        }
    };
    Ok(VerifyReport {
        check: check.as_str().to_string(),
        scenario: sc.source.clone(),
        scenario_hash: sc.hash.clone(),
        pass,
        summary,
        details,
    })
}

/// A solve plus every verification check that applies to the scenario's mode.
#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub solution: SolutionRecord,
    pub checks: Vec<VerifyReport>,
    pub skipped: Vec<String>,
    pub pass: bool,
}

pub fn run_report(sc: &Scenario, overrides: &SolverOverrides) -> Result<ReportBundle> {
    let solution = run_solve_with(sc, overrides)?;
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    let applicable: Vec<VerifyCheck> = match sc.file.mode {
        Mode::Mfg => vec![VerifyCheck::Contraction, VerifyCheck::NToMfe, VerifyCheck::Martingale],
        Mode::Nash2agent => vec![VerifyCheck::Martingale],
        Mode::NashHomogeneous => {
            let mut v = vec![VerifyCheck::NToMfe];
            if sc.file.n_agents.unwrap_or(0) < forward::MAX_BERNOULLI_SOURCES {
                v.push(VerifyCheck::Martingale);
            } else {
                skipped.push(format!(
                    "martingale: {} agents exceed the exact-tree cap",
                    sc.file.n_agents.unwrap_or(0)
                ));
            }
            v
        }
        Mode::Independent => {
            if sc.file.n_agents.unwrap_or(2) < forward::MAX_BERNOULLI_SOURCES {
                vec![VerifyCheck::Martingale]
            } else {
                skipped.push("martingale: n-agents exceeds the exact-tree cap".into());
                vec![]
            }
        }
        Mode::SingleStock => vec![],
    };
    for check in applicable {
        checks.push(run_verify_with(sc, check, overrides)?);
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(ReportBundle { solution, checks, skipped, pass })
}
