//! The brute-force grid oracle: exhaustive maximization of the exact
//! single-period expected utility, used throughout the test suite to pin the
//! closed-form best response.

use prfpp::forward::{grid_search_best_response_oracle, single_period_objective};
use prfpp::market::{AgentPreferences, AgentSpec, CommonNoiseParams, MarketPeriodParams};
use prfpp::nash::{best_response, BestResponseInputs};

fn main() -> prfpp::Result<()> {
    let cn = CommonNoiseParams::new(0.6)?;
    let m1 = MarketPeriodParams::new(1.1, 0.9, 0.6, 0.36, &cn)?;
    let m2 = MarketPeriodParams::new(1.1, 0.9, 0.46, 0.2, &cn)?;
    let me = AgentSpec::new(AgentPreferences::new(10.0, 0.9, 0.0)?, m1);
    let rival = AgentSpec::new(AgentPreferences::new(10.0, 0.9, 0.0)?, m2);

    let inputs = BestResponseInputs::new(me, vec![(rival, -0.54)], cn);
    let closed = best_response(&inputs)?;
    let (argmax, max_value) = grid_search_best_response_oracle(&inputs, -10.0, 10.0, 1e-4)?;
    println!("closed-form best response: {closed:+.8}");
    println!("oracle argmax:             {argmax:+.8} (objective {max_value:.10})");
    println!("difference: {:.2e} (within one grid step)\n", (closed - argmax).abs());

    println!("objective profile around the optimum:");
    for k in -3..=3 {
        let pi = closed + k as f64 * 0.02;
        println!("  pi = {pi:+.4}: {:+.10}", single_period_objective(&inputs, pi)?);
    }
    Ok(())
}
