//! Single-period best response against fixed competitor positions: the
//! response coefficients, the optimal dollar position, and the utility-update
//! factor it implies.

use prfpp::market::{AgentPreferences, AgentSpec, CommonNoiseParams, MarketPeriodParams};
use prfpp::nash::{best_response, best_response_value_factor, response_coefficients, BestResponseInputs};

fn main() -> prfpp::Result<()> {
    let cn = CommonNoiseParams::new(0.6)?;
    let market = MarketPeriodParams::new(1.2, 0.9, 0.6, 0.4, &cn)?;
    let me = AgentSpec::new(AgentPreferences::new(3.0, 0.4, 0.0)?, market);
    let rival = AgentSpec::new(AgentPreferences::new(2.0, 0.3, 0.0)?, market);

    println!("market: u = {}, d = {}, p = {}", market.u, market.d, market.p);
    println!("risk-neutral q = {:.6}", market.risk_neutral_up_prob());
    println!("expected excess return = {:.6}\n", market.expected_excess_return());

    for rival_position in [-1.0, 0.0, 1.0, 2.0] {
        let inputs = BestResponseInputs::new(me, vec![(rival, rival_position)], cn);
        let coeffs = response_coefficients(&inputs)?;
        let pi = best_response(&inputs)?;
        let factor = best_response_value_factor(&inputs)?;
        println!(
            "rival at {rival_position:+.1}: best response {pi:+.6}, A1 = {:.6}, A2 = {:.6}, \
             update factor {factor:.6}",
            coeffs.a1, coeffs.a2
        );
    }

    // with theta = 0 the response ignores the rival entirely
    let merton = AgentSpec::new(AgentPreferences::new(3.0, 0.0, 0.0)?, market);
    let inputs = BestResponseInputs::new(merton, vec![(rival, 5.0)], cn);
    println!("\ntheta = 0 response (Merton): {:+.6}", best_response(&inputs)?);
    Ok(())
}
