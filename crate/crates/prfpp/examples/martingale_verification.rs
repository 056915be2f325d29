//! Exact-tree verification of the forward conditions: at the equilibrium the
//! conditional expectation of next-period utility equals the current value,
//! and every perturbed strategy strictly lowers it.

use prfpp::forward::{martingale_check_exact, MartingaleMode, PeriodParams, ScenarioPath};
use prfpp::market::{AgentPreferences, CommonNoiseParams, MarketPeriodParams};

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> prfpp::Result<()> {
    let cn = CommonNoiseParams::new(0.6)?;

    // heterogeneous 2-agent shorting constellation, one period, 8 atoms
    let shorting = ScenarioPath {
        agents: vec![
            AgentPreferences::new(10.0, 0.9, 0.0)?,
            AgentPreferences::new(10.0, 0.9, 0.0)?,
        ],
        periods: vec![PeriodParams {
            markets: vec![
                MarketPeriodParams::new(1.1, 0.9, 0.6, 0.36, &cn)?,
                MarketPeriodParams::new(1.1, 0.9, 0.46, 0.2, &cn)?,
            ],
            cn,
        }],
    };
    let report = martingale_check_exact(&shorting, MartingaleMode::Nash, 1e-10)?;
    println!(
        "2-agent shorting, T = 1: {} (equality residual {:.2e}, min perturbation margin {:.2e})",
        pass_fail(report.pass),
        report.max_equality_residual,
        report.min_perturbation_margin
    );

    // homogeneous 3-agent game over two periods: 16 atoms per period,
    // 2^8 paths in total
    let market = MarketPeriodParams::new(1.2, 0.9, 0.6, 0.4, &cn)?;
    let homogeneous = ScenarioPath {
        agents: vec![AgentPreferences::new(3.0, 0.4, 0.0)?; 3],
        periods: vec![PeriodParams { markets: vec![market; 3], cn }; 2],
    };
    let report = martingale_check_exact(&homogeneous, MartingaleMode::Nash, 1e-9)?;
    println!(
        "homogeneous N = 3, T = 2: {} ({} atoms/period, {} nodes, residual {:.2e})",
        pass_fail(report.pass),
        report.atoms_per_period,
        report.nodes_checked,
        report.max_equality_residual
    );

    // mean-field representative agent against the constant population proxy
    let representative = ScenarioPath {
        agents: vec![AgentPreferences::new(3.0, 0.4, 0.0)?],
        periods: vec![PeriodParams { markets: vec![market], cn }; 3],
    };
    let report = martingale_check_exact(&representative, MartingaleMode::MfgHomogeneous, 1e-9)?;
    println!(
        "mean-field proxy, T = 3: {} (residual {:.2e}, margin {:.2e})",
        pass_fail(report.pass),
        report.max_equality_residual,
        report.min_perturbation_margin
    );

    // oversize trees are refused, not sampled
    let oversize = ScenarioPath {
        agents: vec![AgentPreferences::new(3.0, 0.4, 0.0)?; 4],
        periods: vec![PeriodParams { markets: vec![market; 4], cn }],
    };
    match martingale_check_exact(&oversize, MartingaleMode::Nash, 1e-9) {
        Err(e) => println!("4-agent tree refused as expected: {e}"),
        Ok(_) => println!("unexpectedly accepted an oversize tree"),
    }
    Ok(())
}
