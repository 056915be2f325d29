//! Closed-form equilibria of the two extreme market setups, cross-checked
//! against the general solvers in their degenerate limits.

use prfpp::closedform::{
    independent_stocks_mfe, independent_stocks_nash, single_stock_mfe, single_stock_nash,
    PopulationAggregates, SingleStockInputs,
};
use prfpp::market::{AgentPreferences, AgentSpec, CommonNoiseParams, MarketPeriodParams};
use prfpp::nash::homogeneous_equilibrium;

fn main() -> prfpp::Result<()> {
    let shared = MarketPeriodParams::without_common_noise(1.2, 0.9, 0.6)?;
    let prefs = AgentPreferences::new(3.0, 0.4, 0.0)?;

    // shared stock, two identical agents
    let nash = single_stock_nash(&SingleStockInputs {
        market: shared,
        agents: vec![prefs, prefs],
    })?;
    println!("shared stock, N = 2: pi = {:.12}", nash[0]);

    let agg = PopulationAggregates::new(0.4, 1.0 / 3.0)?;
    let mfe = single_stock_mfe(&shared, &prefs, &agg)?;
    println!("shared stock, mean field: pi = {mfe:.12}");

    // independent stocks: Merton with modified risk aversion
    let spec = AgentSpec::new(prefs, shared);
    let nash = independent_stocks_nash(&[spec], 2)?;
    println!("\nindependent stocks, N = 2: pi = {:.12}", nash[0]);
    println!("independent stocks, mean field (Merton): pi = {:.12}", independent_stocks_mfe(&spec)?);

    // the general homogeneous solver reproduces both limits
    let cn = CommonNoiseParams::new(0.6)?;
    let indep = homogeneous_equilibrium(2, &prefs, &shared, &cn, 1e-10)?;
    println!(
        "\ngeneral solver at p_bull = p_bear: pi = {:.12} (gap {:.2e})",
        indep.strategies[0],
        (indep.strategies[0] - nash[0]).abs()
    );

    let corr = MarketPeriodParams::new(1.2, 0.9, 1.0 - 1e-9, 1e-9, &cn)?;
    let sol = homogeneous_equilibrium(5, &prefs, &corr, &cn, 1e-10)?;
    let shared_at_pcn = MarketPeriodParams::without_common_noise(1.2, 0.9, 0.6)?;
    let reference = single_stock_nash(&SingleStockInputs {
        market: shared_at_pcn,
        agents: vec![prefs; 5],
    })?;
    println!(
        "general solver at p_bull -> 1, p_bear -> 0: pi = {:.12} vs shared-stock {:.12} \
         (gap {:.2e})",
        sol.strategies[0],
        reference[0],
        (sol.strategies[0] - reference[0]).abs()
    );
    Ok(())
}
