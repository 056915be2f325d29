//! Finite-game-to-mean-field convergence: the homogeneous N-agent strategy
//! approaches the mean-field equilibrium as N grows.

use prfpp::market::{AgentPreferences, CommonNoiseParams, MarketPeriodParams};
use prfpp::mfg::homogeneous_limit_check;

fn main() -> prfpp::Result<()> {
    let cn = CommonNoiseParams::new(0.6)?;
    let market = MarketPeriodParams::new(1.2, 0.9, 0.6, 0.4, &cn)?;
    let prefs = AgentPreferences::new(3.0, 0.4, 0.0)?;

    let rows = homogeneous_limit_check(&prefs, &market, &cn, &[2, 10, 100, 1000, 10_000])?;
    println!("{:>8}  {:>16}  {:>16}  {:>12}", "N", "pi_N", "pi_MFE", "|gap|");
    for row in &rows {
        println!(
            "{:>8}  {:>16.12}  {:>16.12}  {:>12.3e}",
            row.n, row.pi_n, row.pi_mfe, row.gap
        );
    }
    Ok(())
}
