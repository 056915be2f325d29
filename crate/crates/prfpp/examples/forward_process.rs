//! Build a two-period forward performance process for a heterogeneous
//! 2-agent game and evaluate the resulting utility functions.

use prfpp::forward::{build_prfpp, PeriodParams, PeriodSolution, ScenarioPath};
use prfpp::market::{AgentPreferences, AgentSpec, CommonNoiseParams, MarketPeriodParams};
use prfpp::nash::two_agent_equilibrium;

fn main() -> prfpp::Result<()> {
    let cn = CommonNoiseParams::new(0.6)?;
    // parameters may change period by period; they only need to be known at
    // the period start
    let first = (
        MarketPeriodParams::new(1.1, 0.9, 0.6, 0.36, &cn)?,
        MarketPeriodParams::new(1.1, 0.9, 0.46, 0.2, &cn)?,
    );
    let second = (
        MarketPeriodParams::new(1.15, 0.92, 0.62, 0.4, &cn)?,
        MarketPeriodParams::new(1.12, 0.88, 0.5, 0.3, &cn)?,
    );
    let agents = vec![
        AgentPreferences::new(10.0, 0.9, 0.0)?,
        AgentPreferences::new(10.0, 0.9, 0.0)?,
    ];
    let path = ScenarioPath {
        agents: agents.clone(),
        periods: vec![
            PeriodParams { markets: vec![first.0, first.1], cn },
            PeriodParams { markets: vec![second.0, second.1], cn },
        ],
    };

    let mut solutions = Vec::new();
    for (t, period) in path.periods.iter().enumerate() {
        let a1 = AgentSpec::new(agents[0], period.markets[0]);
        let a2 = AgentSpec::new(agents[1], period.markets[1]);
        let sol = two_agent_equilibrium(&a1, &a2, &period.cn, 1e-10)?;
        println!(
            "period {}: pi = ({:+.6}, {:+.6}), factors = ({:.8}, {:.8})",
            t + 1,
            sol.strategies[0],
            sol.strategies[1],
            sol.update_factors[0],
            sol.update_factors[1]
        );
        solutions.push(PeriodSolution::Nash(sol));
    }

    let fp = build_prfpp(&path, &solutions)?;
    println!("\ncumulative factors, agent 1: {:?}", fp.cumulative_factors[0]);
    println!("U_t(0) over time for agent 1:");
    for t in 0..=path.horizon() {
        println!("  t = {t}: {:+.10}", fp.evaluate_utility(0, t, 0.0)?);
    }
    println!("U_2 stays strictly increasing in wealth:");
    for x in [-1.0, 0.0, 1.0] {
        println!("  U_2({x:+.1}) = {:+.10}", fp.evaluate_utility(0, 2, x)?);
    }
    Ok(())
}
