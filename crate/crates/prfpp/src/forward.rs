//! Multi-period forward performance processes and their verification.
//!
//! A forward process here is the sequence U_t(x) = -e^{-gamma x} / D_t with
//! D_t the running product of per-period update factors (A1 B1 + A2 B2 for
//! the finite game, G(pi*) for the mean-field game). This module chains the
//! factors, enumerates the exact joint outcome tree of (regime, B_1..B_N) to
//! verify the supermartingale/martingale conditions, provides the brute-force
//! grid oracle for the single-period optimization, and simulates wealth paths
//! at equilibrium.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result, Violations};
use crate::market::{AgentPreferences, CommonNoiseParams, MarketPeriodParams};
use crate::mfg::MfgSolution;
use crate::nash::{self, BestResponseInputs, IterationOutcome, NashSolution};

/// Caps for exact tree enumeration: at most N+1 = 4 Bernoulli sources per
/// period and T = 3 periods, i.e. 2^((N+1)T) <= 4096 path atoms. Beyond that
/// the check refuses instead of silently sampling.
pub const MAX_BERNOULLI_SOURCES: usize = 4;
pub const MAX_EXACT_HORIZON: usize = 3;

/// One period of a multi-period scenario: per-agent market parameters plus
/// the regime probability, all fixed before the period's outcomes.
#[derive(Debug, Clone)]
pub struct PeriodParams {
    pub markets: Vec<MarketPeriodParams>,
    pub cn: CommonNoiseParams,
}

/// Deterministic multi-period parameter path for a fixed set of agents.
#[derive(Debug, Clone)]
pub struct ScenarioPath {
    pub agents: Vec<AgentPreferences>,
    pub periods: Vec<PeriodParams>,
}

impl ScenarioPath {
    pub fn horizon(&self) -> usize {
        self.periods.len()
    }

    pub fn validate(&self) -> std::result::Result<(), Violations> {
        let mut v = Violations::new();
        if self.agents.is_empty() {
            v.push("scenario path needs at least one agent");
        }
        for (i, a) in self.agents.iter().enumerate() {
            if let Err(e) = a.validate() {
                v.0.extend(e.0.into_iter().map(|m| format!("agent {i}: {m}")));
            }
        }
        for (t, period) in self.periods.iter().enumerate() {
            if period.markets.len() != self.agents.len() {
                v.push(format!(
                    "period {}: {} markets for {} agents",
                    t + 1,
                    period.markets.len(),
                    self.agents.len()
                ));
            }
            for (i, m) in period.markets.iter().enumerate() {
                if let Err(e) = m.validate_relaxed() {
                    v.0
                        .extend(e.0.into_iter().map(|msg| format!("period {} market {i}: {msg}", t + 1)));
                }
                let implied = period.cn.p_cn * m.p_bull + (1.0 - period.cn.p_cn) * m.p_bear;
                if (m.p - implied).abs() > crate::market::TOTAL_PROBABILITY_TOL {
                    v.push(format!(
                        "period {} market {i}: total-probability mismatch (p = {}, implied {implied})",
                        t + 1,
                        m.p
                    ));
                }
            }
        }
        v.into_result()
    }
}

/// One joint outcome of a single period: the regime, every agent's Bernoulli
/// indicator, and the atom's probability.
#[derive(Debug, Clone)]
pub struct OutcomeAtom {
    pub bull: bool,
    pub ups: Vec<bool>,
    pub probability: f64,
}

/// Exact per-period outcome atoms of a scenario path.
#[derive(Debug, Clone)]
pub struct OutcomeTree {
    pub periods: Vec<Vec<OutcomeAtom>>,
}

impl OutcomeTree {
    /// Enumerate all 2^(N+1) atoms per period. Refuses when the implied
    /// path-atom count exceeds the exact-enumeration cap.
    pub fn build(path: &ScenarioPath) -> Result<Self> {
        path.validate().map_err(Error::Invalid)?;
        let n = path.agents.len();
        let t = path.horizon();
        if n + 1 > MAX_BERNOULLI_SOURCES || t > MAX_EXACT_HORIZON {
            let bits = (n + 1) * t;
            return Err(Error::Domain(format!(
                "exact tree too large: {n} agents over {t} periods implies 2^{bits} path atoms; \
                 caps are N+1 <= {MAX_BERNOULLI_SOURCES} Bernoulli sources and T <= {MAX_EXACT_HORIZON}"
            )));
        }
        let periods = path
            .periods
            .iter()
            .map(|period| {
                let mut atoms = Vec::with_capacity(1 << (n + 1));
                for regime in [true, false] {
                    let regime_prob = if regime { period.cn.p_cn } else { 1.0 - period.cn.p_cn };
                    for mask in 0_u32..(1 << n) {
                        let mut prob = regime_prob;
                        let mut ups = Vec::with_capacity(n);
                        for (i, m) in period.markets.iter().enumerate() {
                            let p_up = if regime { m.p_bull } else { m.p_bear };
                            let up = mask & (1 << i) != 0;
                            prob *= if up { p_up } else { 1.0 - p_up };
                            ups.push(up);
                        }
                        atoms.push(OutcomeAtom { bull: regime, ups, probability: prob });
                    }
                }
                atoms
            })
            .collect::<Vec<_>>();
        let tree = OutcomeTree { periods };
        for (t, atoms) in tree.periods.iter().enumerate() {
            let total: f64 = atoms.iter().map(|a| a.probability).sum();
            if (total - 1.0).abs() > 1e-14 {
                return Err(Error::Solver(format!(
                    "period {} atom probabilities sum to {total}, not 1",
                    t + 1
                )));
            }
        }
        Ok(tree)
    }
}

/// Per-period equilibrium used to chain a forward process.
#[derive(Debug, Clone)]
pub enum PeriodSolution {
    Nash(NashSolution),
    Mfg(MfgSolution),
}

impl PeriodSolution {
    pub fn strategies(&self) -> &[f64] {
        match self {
            PeriodSolution::Nash(s) => &s.strategies,
            PeriodSolution::Mfg(s) => &s.strategies,
        }
    }

    pub fn factors(&self) -> &[f64] {
        match self {
            PeriodSolution::Nash(s) => &s.update_factors,
            PeriodSolution::Mfg(s) => &s.g_factors,
        }
    }
}

/// The forward family U_t(x) = -e^{-gamma_i x} / cumulative_factors[i][t],
/// with cumulative_factors[i][0] = 1 so U_0 is exactly the CARA initial
/// datum.
#[derive(Debug, Clone)]
pub struct ForwardProcess {
    pub gammas: Vec<f64>,
    pub cumulative_factors: Vec<Vec<f64>>,
}

/// Chain per-period update factors into the forward process.
pub fn build_prfpp(path: &ScenarioPath, equilibria: &[PeriodSolution]) -> Result<ForwardProcess> {
    path.validate().map_err(Error::Invalid)?;
    if equilibria.len() != path.horizon() {
        return Err(Error::Domain(format!(
            "{} per-period solutions for a horizon of {} periods",
            equilibria.len(),
            path.horizon()
        )));
    }
    let n = path.agents.len();
    let mut cumulative = vec![vec![1.0_f64]; n];
    for (t, sol) in equilibria.iter().enumerate() {
        let factors = sol.factors();
        if factors.len() != n {
            return Err(Error::Domain(format!(
                "period {}: {} update factors for {n} agents",
                t + 1,
                factors.len()
            )));
        }
        for (i, f) in factors.iter().enumerate() {
            if !(*f > 0.0) {
                return Err(Error::Domain(format!(
                    "period {}: update factor {f} for agent {i} is not positive",
                    t + 1
                )));
            }
            let prev = *cumulative[i].last().expect("nonempty");
            cumulative[i].push(prev * f);
        }
    }
    Ok(ForwardProcess {
        gammas: path.agents.iter().map(|a| a.gamma).collect(),
        cumulative_factors: cumulative,
    })
}

impl ForwardProcess {
    /// U_t(x) for one agent.
    pub fn evaluate_utility(&self, agent: usize, t: usize, x: f64) -> Result<f64> {
        let factors = self
            .cumulative_factors
            .get(agent)
            .ok_or_else(|| Error::Domain(format!("agent index {agent} out of range")))?;
        let d = factors
            .get(t)
            .ok_or_else(|| Error::Domain(format!("period index {t} beyond horizon {}", factors.len() - 1)))?;
        Ok(-(-self.gammas[agent] * x).exp() / d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MartingaleMode {
    /// Finite-agent game: exact joint tree over (regime, B_1..B_N).
    Nash,
    /// Representative agent against the homogeneous constant population:
    /// exact two-source tree over (regime, B), population average moving by
    /// pi* times the regime drift.
    MfgHomogeneous,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PeriodCheck {
    pub period: usize,
    pub equality_residual: f64,
    pub min_perturbation_margin: f64,
}

/// Outcome of the exact-tree verification of the forward conditions: the
/// equality at the equilibrium strategy and the strict inequality for the
/// perturbation battery.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MartingaleReport {
    pub horizon: usize,
    pub atoms_per_period: usize,
    pub nodes_checked: usize,
    pub perturbations_checked: usize,
    pub max_equality_residual: f64,
    /// Smallest relative drop of the conditional expectation across all
    /// perturbed strategies; must stay strictly positive.
    pub min_perturbation_margin: f64,
    pub per_period: Vec<PeriodCheck>,
    pub violations: Vec<String>,
    pub tol: f64,
    pub pass: bool,
}

/// Relative perturbations of the equilibrium strategy, plus absolute +-1.
const PERTURBATION_REL: [f64; 4] = [-0.5, -0.1, 0.1, 0.5];
const PERTURBATION_ABS: [f64; 2] = [-1.0, 1.0];

fn perturbation_battery(pi: f64) -> Vec<f64> {
    let mut deltas: Vec<f64> = PERTURBATION_REL.iter().map(|r| r * pi).collect();
    deltas.extend_from_slice(&PERTURBATION_ABS);
    deltas.retain(|d| d.abs() > 1e-15);
    deltas
}

/// Solve one period of a finite-agent path with whichever solver applies:
/// homogeneous fixed point when all agents are identical, the 2-agent root
/// otherwise for N = 2, and the experimental iteration for heterogeneous
/// N > 2.
fn solve_period(path: &ScenarioPath, period: &PeriodParams, tol: f64) -> Result<NashSolution> {
    let n = path.agents.len();
    let homogeneous = path
        .agents
        .iter()
        .zip(&period.markets)
        .all(|(a, m)| (a, m) == (&path.agents[0], &period.markets[0]));
    if homogeneous {
        return nash::homogeneous_equilibrium(n, &path.agents[0], &period.markets[0], &period.cn, tol);
    }
    let specs: Vec<crate::market::AgentSpec> = path
        .agents
        .iter()
        .zip(&period.markets)
        .map(|(a, m)| crate::market::AgentSpec::new(*a, *m))
        .collect();
    if n == 2 {
        return nash::two_agent_equilibrium(&specs[0], &specs[1], &period.cn, tol);
    }
    match nash::best_response_iteration(&specs, &period.cn, tol, 10_000)? {
        IterationOutcome::Converged(out) => Ok(out.solution),
        IterationOutcome::NotConverged(r) => Err(Error::Solver(format!(
            "best-response iteration did not converge after {} sweeps (last change {:.3e})",
            r.sweeps, r.max_change
        ))),
    }
}

/// Exact verification of the forward conditions over the whole path.
///
/// For every period t and every F_(t-1) node of the outcome tree, checks that
/// the conditional expectation of U_t at the equilibrium equals U_(t-1)
/// (martingale), and strictly falls below it for every perturbed strategy in
/// the battery (supermartingale, with the population/others held at
/// equilibrium). The battery is the finite surrogate for "all admissible
/// strategies": perturbations of +-10%, +-50% and +-1.0 around pi*, backed by
/// the oracle's concavity scan in the test suite.
pub fn martingale_check_exact(
    path: &ScenarioPath,
    mode: MartingaleMode,
    tol: f64,
) -> Result<MartingaleReport> {
    if tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if path.horizon() == 0 {
        return Err(Error::Domain("martingale check needs at least one period".into()));
    }
    match mode {
        MartingaleMode::Nash => martingale_check_nash(path, tol),
        MartingaleMode::MfgHomogeneous => martingale_check_mfg(path, tol),
    }
}

#[allow(clippy::needless_range_loop)] // three parallel slices indexed by agent
fn martingale_check_nash(path: &ScenarioPath, tol: f64) -> Result<MartingaleReport> {
    let tree = OutcomeTree::build(path)?;
    let n = path.agents.len();
    let nf = n as f64;
    let solutions: Vec<NashSolution> = path
        .periods
        .iter()
        .map(|p| solve_period(path, p, tol.min(1e-9)))
        .collect::<Result<Vec<_>>>()?;
    let fp = build_prfpp(
        path,
        &solutions.iter().cloned().map(PeriodSolution::Nash).collect::<Vec<_>>(),
    )?;

    // wealth vectors at every F_(t-1) node, built by walking atom tuples
    let mut nodes: Vec<Vec<f64>> = vec![path.agents.iter().map(|a| a.x0).collect()];
    let mut report = ReportBuilder::new(tol);
    for (t, period) in path.periods.iter().enumerate() {
        let atoms = &tree.periods[t];
        let strategies = &solutions[t].strategies;
        for wealth in &nodes {
            for i in 0..n {
                let theta = path.agents[i].theta;
                let gamma = path.agents[i].gamma;
                let total: f64 = wealth.iter().sum();
                let x_rel = wealth[i] - theta / nf * total;
                let u_prev = -(-gamma * x_rel).exp() / fp.cumulative_factors[i][t];

                let expected = |own_pi: f64| -> f64 {
                    atoms
                        .iter()
                        .map(|atom| {
                            let mut incr_total = 0.0;
                            let mut incr_own = 0.0;
                            for k in 0..n {
                                let m = &period.markets[k];
                                let r = if atom.ups[k] { m.u } else { m.d };
                                let pi_k = if k == i { own_pi } else { strategies[k] };
                                let gain = pi_k * (r - 1.0);
                                incr_total += gain;
                                if k == i {
                                    incr_own = gain;
                                }
                            }
                            let x_next = x_rel + incr_own - theta / nf * incr_total;
                            atom.probability * (-(-gamma * x_next).exp())
                        })
                        .sum::<f64>()
                        / fp.cumulative_factors[i][t + 1]
                };

                report.record_equality(t + 1, expected(strategies[i]), u_prev);
                for delta in perturbation_battery(strategies[i]) {
                    report.record_perturbation(t + 1, i, delta, expected(strategies[i] + delta), u_prev);
                }
            }
        }
        report.finish_period(t + 1);
        // extend nodes by this period's atoms
        let mut next_nodes = Vec::with_capacity(nodes.len() * atoms.len());
        for wealth in &nodes {
            for atom in atoms {
                let mut w = wealth.clone();
                for k in 0..n {
                    let m = &period.markets[k];
                    let r = if atom.ups[k] { m.u } else { m.d };
                    w[k] += strategies[k] * (r - 1.0);
                }
                next_nodes.push(w);
            }
        }
        report.nodes_checked += nodes.len();
        nodes = next_nodes;
    }
    Ok(report.build(path.horizon(), tree.periods[0].len()))
}

fn martingale_check_mfg(path: &ScenarioPath, tol: f64) -> Result<MartingaleReport> {
    use crate::mfg::{sample_population, solve_mfg_fixed_point, PopulationSpec};

    for (t, p) in path.periods.iter().enumerate() {
        let homogeneous = path
            .agents
            .iter()
            .zip(&p.markets)
            .all(|(a, m)| a == &path.agents[0] && m == &p.markets[0]);
        if !homogeneous {
            return Err(Error::Domain(format!(
                "mean-field martingale check uses the homogeneous constant-population proxy; \
                 period {} mixes agent types",
                t + 1
            )));
        }
    }
    if path.horizon() > MAX_EXACT_HORIZON {
        return Err(Error::Domain(format!(
            "exact tree too large: horizon {} exceeds T <= {MAX_EXACT_HORIZON}",
            path.horizon()
        )));
    }
    path.validate().map_err(Error::Invalid)?;

    let agent = path.agents[0];
    // per-period mean-field solutions for the constant population (M = 1
    // carries the exact two-regime expectations)
    let solutions: Vec<MfgSolution> = path
        .periods
        .iter()
        .map(|p| {
            let spec = PopulationSpec::constant(&agent, &p.markets[0], p.cn.p_cn);
            let pop = sample_population(&spec, 1, 0)?;
            solve_mfg_fixed_point(&pop, (tol * 1e-3).clamp(1e-16, 1e-14), 100_000)
        })
        .collect::<Result<Vec<_>>>()?;
    let fp = build_prfpp(
        path,
        &solutions.iter().cloned().map(PeriodSolution::Mfg).collect::<Vec<_>>(),
    )?;

    let gamma = agent.gamma;
    let theta = agent.theta;
    // nodes: (own wealth, population average wealth)
    let mut nodes: Vec<(f64, f64)> = vec![(agent.x0, agent.x0)];
    let mut report = ReportBuilder::new(tol);
    for (t, period) in path.periods.iter().enumerate() {
        let m = &period.markets[0];
        let (bull_drift, bear_drift) = m.regime_drifts();
        let pi_star = solutions[t].strategies[0];
        let atoms = [
            (true, true, period.cn.p_cn * m.p_bull),
            (true, false, period.cn.p_cn * (1.0 - m.p_bull)),
            (false, true, (1.0 - period.cn.p_cn) * m.p_bear),
            (false, false, (1.0 - period.cn.p_cn) * (1.0 - m.p_bear)),
        ];
        for &(own_x, avg_x) in &nodes {
            let x_rel = own_x - theta * avg_x;
            let u_prev = -(-gamma * x_rel).exp() / fp.cumulative_factors[0][t];
            let expected = |own_pi: f64| -> f64 {
                atoms
                    .iter()
                    .map(|&(bull, up, prob)| {
                        let r = if up { m.u } else { m.d };
                        let avg_gain = pi_star * if bull { bull_drift } else { bear_drift };
                        let x_next = own_x + own_pi * (r - 1.0) - theta * (avg_x + avg_gain);
                        prob * (-(-gamma * x_next).exp())
                    })
                    .sum::<f64>()
                    / fp.cumulative_factors[0][t + 1]
            };
            report.record_equality(t + 1, expected(pi_star), u_prev);
            for delta in perturbation_battery(pi_star) {
                report.record_perturbation(t + 1, 0, delta, expected(pi_star + delta), u_prev);
            }
        }
        report.finish_period(t + 1);
        let mut next = Vec::with_capacity(nodes.len() * 4);
        for &(own_x, avg_x) in &nodes {
            for &(bull, up, _) in &atoms {
                let r = if up { m.u } else { m.d };
                let avg_gain = pi_star * if bull { bull_drift } else { bear_drift };
                next.push((own_x + pi_star * (r - 1.0), avg_x + avg_gain));
            }
        }
        report.nodes_checked += nodes.len();
        nodes = next;
    }
    Ok(report.build(path.horizon(), 4))
}

struct ReportBuilder {
    tol: f64,
    max_equality_residual: f64,
    min_perturbation_margin: f64,
    perturbations_checked: usize,
    nodes_checked: usize,
    violations: Vec<String>,
    per_period: Vec<PeriodCheck>,
    period_equality: f64,
    period_margin: f64,
}

impl ReportBuilder {
    fn new(tol: f64) -> Self {
        ReportBuilder {
            tol,
            max_equality_residual: 0.0,
            min_perturbation_margin: f64::INFINITY,
            perturbations_checked: 0,
            nodes_checked: 0,
            violations: Vec::new(),
            per_period: Vec::new(),
            period_equality: 0.0,
            period_margin: f64::INFINITY,
        }
    }

    fn record_equality(&mut self, period: usize, expected: f64, u_prev: f64) {
        let residual = (expected - u_prev).abs() / u_prev.abs();
        self.max_equality_residual = self.max_equality_residual.max(residual);
        self.period_equality = self.period_equality.max(residual);
        if residual > self.tol {
            self.violations.push(format!(
                "period {period}: equality residual {residual:.3e} exceeds tol {:.1e}",
                self.tol
            ));
        }
    }

    fn record_perturbation(&mut self, period: usize, agent: usize, delta: f64, expected: f64, u_prev: f64) {
        self.perturbations_checked += 1;
        // both utilities are negative; the perturbed expectation must be
        // strictly smaller (more negative)
        let margin = (u_prev - expected) / u_prev.abs();
        self.min_perturbation_margin = self.min_perturbation_margin.min(margin);
        self.period_margin = self.period_margin.min(margin);
        if margin <= 0.0 {
            self.violations.push(format!(
                "period {period}, agent {agent}: perturbation {delta:+.4} does not decrease the \
                 conditional expectation (margin {margin:.3e})"
            ));
        }
    }

    fn finish_period(&mut self, period: usize) {
        self.per_period.push(PeriodCheck {
            period,
            equality_residual: self.period_equality,
            min_perturbation_margin: self.period_margin,
        });
        self.period_equality = 0.0;
        self.period_margin = f64::INFINITY;
    }

    fn build(self, horizon: usize, atoms_per_period: usize) -> MartingaleReport {
        MartingaleReport {
            horizon,
            atoms_per_period,
            nodes_checked: self.nodes_checked,
            perturbations_checked: self.perturbations_checked,
            max_equality_residual: self.max_equality_residual,
            min_perturbation_margin: self.min_perturbation_margin,
            pass: self.violations.is_empty(),
            per_period: self.per_period,
            violations: self.violations,
            tol: self.tol,
        }
    }
}

/// Atom list for the single-period objective of one agent: probability
/// weight (with the opponents' terms folded in) and the exponential slope in
/// the agent's own strategy.
struct ObjectiveAtoms {
    weights: Vec<f64>,
    slopes: Vec<f64>,
}

impl ObjectiveAtoms {
    fn build(inputs: &BestResponseInputs) -> Result<Self> {
        let me = &inputs.me;
        let n = inputs.n_agents as f64;
        let gamma = me.prefs.gamma;
        let theta = me.prefs.theta;
        let n_opp = inputs.others.len();
        let mut weights = Vec::with_capacity(1 << (n_opp + 2));
        let mut slopes = Vec::with_capacity(1 << (n_opp + 2));
        for regime in [true, false] {
            let regime_prob = if regime { inputs.cn.p_cn } else { 1.0 - inputs.cn.p_cn };
            for own_up in [true, false] {
                let own_m = &me.market;
                let p_own = if regime { own_m.p_bull } else { own_m.p_bear };
                let prob_own = if own_up { p_own } else { 1.0 - p_own };
                let r_own = if own_up { own_m.u } else { own_m.d };
                let slope = gamma * (1.0 - theta / n) * (r_own - 1.0);
                for mask in 0_u32..(1 << n_opp) {
                    let mut prob = regime_prob * prob_own;
                    let mut shift = 0.0;
                    for (j, (spec, pi_j)) in inputs.others.iter().enumerate() {
                        let m = &spec.market;
                        let p_j = if regime { m.p_bull } else { m.p_bear };
                        let up = mask & (1 << j) != 0;
                        prob *= if up { p_j } else { 1.0 - p_j };
                        let r_j = if up { m.u } else { m.d };
                        shift += pi_j * (r_j - 1.0);
                    }
                    weights.push(prob * (gamma * theta / n * shift).exp());
                    slopes.push(slope);
                }
            }
        }
        Ok(ObjectiveAtoms { weights, slopes })
    }

    fn eval(&self, pi: f64) -> f64 {
        -self
            .weights
            .iter()
            .zip(&self.slopes)
            .map(|(w, s)| w * (-s * pi).exp())
            .sum::<f64>()
    }
}

/// Exact single-period expected utility of relative wealth (at zero initial
/// relative wealth) for one candidate strategy.
pub fn single_period_objective(inputs: &BestResponseInputs, pi: f64) -> Result<f64> {
    Ok(ObjectiveAtoms::build(inputs)?.eval(pi))
}

/// Brute-force maximizer of the exact single-period objective over the grid
/// lo, lo+step, ..., hi. Returns (argmax, max value). The objective is a
/// negated sum of exponentials in pi, so the per-atom factors advance by a
/// constant ratio along the grid.
pub fn grid_search_best_response_oracle(
    inputs: &BestResponseInputs,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<(f64, f64)> {
    if !(lo < hi) || !(step > 0.0) {
        return Err(Error::Domain(format!(
            "grid search requires lo < hi and step > 0, got [{lo}, {hi}] step {step}"
        )));
    }
    let atoms = ObjectiveAtoms::build(inputs)?;
    let n_atoms = atoms.weights.len();
    let mut current: Vec<f64> = atoms.slopes.iter().map(|s| (-s * lo).exp()).collect();
    let ratios: Vec<f64> = atoms.slopes.iter().map(|s| (-s * step).exp()).collect();
    let steps = ((hi - lo) / step).round() as usize;
    let mut best_pi = lo;
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..=steps {
        let mut total = 0.0;
        for a in 0..n_atoms {
            total += atoms.weights[a] * current[a];
            current[a] *= ratios[a];
        }
        let val = -total;
        if val > best_val {
            best_val = val;
            best_pi = lo + k as f64 * step;
        }
    }
    Ok((best_pi, best_val))
}

/// Per-agent wealth statistics from Monte Carlo simulation of the optimal
/// wealth recursion X_t = X_(t-1) + pi_t (R_t - 1).
#[derive(Debug, Clone, serde::Serialize)]
pub struct WealthStats {
    /// Mean wealth per period, index 0 = initial wealth.
    pub mean: Vec<f64>,
    /// Sample variance per period.
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct WealthPaths {
    pub n_paths: usize,
    pub per_agent: Vec<WealthStats>,
    /// Largest path-wise discrepancy between the incremental relative-wealth
    /// recursion and its direct definition (an exact algebraic identity, so
    /// this is rounding noise only).
    pub relative_identity_residual: f64,
}

/// Simulate `n_paths` joint outcome paths under the given per-period
/// strategies (strategies[t][i] is agent i's position in period t+1).
/// Reproducible for a fixed seed.
pub fn simulate_wealth_paths(
    path: &ScenarioPath,
    strategies: &[Vec<f64>],
    n_paths: usize,
    seed: u64,
) -> Result<WealthPaths> {
    path.validate().map_err(Error::Invalid)?;
    if n_paths == 0 {
        return Err(Error::Domain("n_paths must be at least 1".into()));
    }
    if strategies.len() != path.horizon() {
        return Err(Error::Domain(format!(
            "{} strategy vectors for horizon {}",
            strategies.len(),
            path.horizon()
        )));
    }
    let n = path.agents.len();
    for (t, s) in strategies.iter().enumerate() {
        if s.len() != n {
            return Err(Error::Domain(format!(
                "period {}: {} strategies for {n} agents",
                t + 1,
                s.len()
            )));
        }
    }

    let horizon = path.horizon();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // Welford accumulators per (agent, period)
    let mut means = vec![vec![0.0_f64; horizon + 1]; n];
    let mut m2 = vec![vec![0.0_f64; horizon + 1]; n];
    let mut identity_residual = 0.0_f64;

    let mut wealth = vec![0.0_f64; n];
    let mut rel_incremental = vec![0.0_f64; n];
    for path_idx in 0..n_paths {
        for i in 0..n {
            wealth[i] = path.agents[i].x0;
            let total0: f64 = path.agents.iter().map(|a| a.x0).sum();
            rel_incremental[i] = path.agents[i].x0 - path.agents[i].theta / n as f64 * total0;
        }
        record(&mut means, &mut m2, &wealth, 0, path_idx);
        for (t, period) in path.periods.iter().enumerate() {
            let bull = rng.random::<f64>() < period.cn.p_cn;
            let mut gains = vec![0.0_f64; n];
            for i in 0..n {
                let m = &period.markets[i];
                let p_up = if bull { m.p_bull } else { m.p_bear };
                let up = rng.random::<f64>() < p_up;
                let r = if up { m.u } else { m.d };
                gains[i] = strategies[t][i] * (r - 1.0);
            }
            let total_gain: f64 = gains.iter().sum();
            for i in 0..n {
                let theta = path.agents[i].theta;
                rel_incremental[i] += gains[i] - theta / n as f64 * total_gain;
                wealth[i] += gains[i];
            }
            let total: f64 = wealth.iter().sum();
            for i in 0..n {
                let direct = wealth[i] - path.agents[i].theta / n as f64 * total;
                identity_residual = identity_residual.max((direct - rel_incremental[i]).abs());
            }
            record(&mut means, &mut m2, &wealth, t + 1, path_idx);
        }
    }

    let denom = if n_paths > 1 { (n_paths - 1) as f64 } else { 1.0 };
    let per_agent = (0..n)
        .map(|i| WealthStats {
            mean: means[i].clone(),
            variance: m2[i].iter().map(|v| v / denom).collect(),
        })
        .collect();
    Ok(WealthPaths { n_paths, per_agent, relative_identity_residual: identity_residual })
}

fn record(means: &mut [Vec<f64>], m2: &mut [Vec<f64>], wealth: &[f64], t: usize, path_idx: usize) {
    let count = (path_idx + 1) as f64;
    for (i, &x) in wealth.iter().enumerate() {
        let delta = x - means[i][t];
        means[i][t] += delta / count;
        m2[i][t] += delta * (x - means[i][t]);
    }
}
