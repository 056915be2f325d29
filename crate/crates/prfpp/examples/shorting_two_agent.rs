//! A two-agent equilibrium in which agent 1 shorts a stock with positive
//! expected excess return: her rival's stock has negative excess return and
//! strong common-noise exposure, so the relative-performance hedge dominates
//! the stand-alone investment motive.

use prfpp::market::{AgentPreferences, AgentSpec, CommonNoiseParams, MarketPeriodParams};
use prfpp::nash::{best_response, two_agent_equilibrium, BestResponseInputs};

fn main() -> prfpp::Result<()> {
    let cn = CommonNoiseParams::new(0.6)?;
    let stock1 = MarketPeriodParams::new(1.1, 0.9, 0.6, 0.36, &cn)?;
    let stock2 = MarketPeriodParams::new(1.1, 0.9, 0.46, 0.2, &cn)?;
    let agent1 = AgentSpec::new(AgentPreferences::new(10.0, 0.9, 0.0)?, stock1);
    let agent2 = AgentSpec::new(AgentPreferences::new(10.0, 0.9, 0.0)?, stock2);

    println!(
        "stock 1: p = {:.3}, excess return {:+.4}",
        stock1.p,
        stock1.expected_excess_return()
    );
    println!(
        "stock 2: p = {:.3}, excess return {:+.4}\n",
        stock2.p,
        stock2.expected_excess_return()
    );

    let sol = two_agent_equilibrium(&agent1, &agent2, &cn, 1e-10)?;
    println!("equilibrium fixed point y* = {:.12}", sol.fixed_point_y.unwrap());
    println!("pi_1* = {:+.6}  (short despite positive excess return)", sol.strategies[0]);
    println!("pi_2* = {:+.6}", sol.strategies[1]);
    println!("update factors: {:?}\n", sol.update_factors);

    // each strategy is its own best response to the other
    let br1 = best_response(&BestResponseInputs::new(
        agent1,
        vec![(agent2, sol.strategies[1])],
        cn,
    ))?;
    let br2 = best_response(&BestResponseInputs::new(
        agent2,
        vec![(agent1, sol.strategies[0])],
        cn,
    ))?;
    println!("self-consistency: |BR1 - pi_1| = {:.3e}", (br1 - sol.strategies[0]).abs());
    println!("                  |BR2 - pi_2| = {:.3e}", (br2 - sol.strategies[1]).abs());
    Ok(())
}
