//! Symmetric equilibrium of the homogeneous N-agent game for growing N,
//! including the experimental Gauss-Seidel iteration cross-check at small N.

use prfpp::market::{AgentPreferences, AgentSpec, CommonNoiseParams, MarketPeriodParams};
use prfpp::nash::{best_response_iteration, homogeneous_equilibrium, IterationOutcome};

fn main() -> prfpp::Result<()> {
    let cn = CommonNoiseParams::new(0.6)?;
    let market = MarketPeriodParams::new(1.2, 0.9, 0.6, 0.4, &cn)?;
    let prefs = AgentPreferences::new(3.0, 0.4, 0.0)?;

    println!("{:>8}  {:>16}  {:>16}  {:>12}", "N", "y*", "pi*", "factor");
    for n in [2, 3, 5, 10, 100, 1000] {
        let sol = homogeneous_equilibrium(n, &prefs, &market, &cn, 1e-10)?;
        println!(
            "{n:>8}  {:>16.12}  {:>16.12}  {:>12.8}",
            sol.fixed_point_y.unwrap(),
            sol.strategies[0],
            sol.update_factors[0]
        );
    }

    // the experimental heterogeneous iteration reproduces the homogeneous
    // solution when fed identical agents
    let agents = vec![AgentSpec::new(prefs, market); 5];
    match best_response_iteration(&agents, &cn, 1e-10, 1000)? {
        IterationOutcome::Converged(out) => {
            let direct = homogeneous_equilibrium(5, &prefs, &market, &cn, 1e-10)?;
            println!(
                "\niteration (N = 5) converged in {} sweeps; |gap to direct solver| = {:.3e}",
                out.sweeps,
                (out.solution.strategies[0] - direct.strategies[0]).abs()
            );
        }
        IterationOutcome::NotConverged(report) => {
            println!("\niteration did not converge: {report:?}");
        }
    }
    Ok(())
}
