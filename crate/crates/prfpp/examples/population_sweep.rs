//! Run the bundled competition-weight sweep at a reduced sample size and
//! print the CSV rows. The same seed is reused at every grid point, so the
//! columns move smoothly in the swept parameter alone.

use prfpp::runner::run_sweep;
use prfpp::scenario::load_scenario;

fn main() -> prfpp::Result<()> {
    let mut scenario = load_scenario("figure1")?;
    scenario.file.solver.samples = 2_000;
    let table = run_sweep(&scenario)?;
    print!("{}", table.to_csv_string()?);

    let own: Vec<f64> = table
        .rows
        .iter()
        .filter(|r| r.panel == "own-theta")
        .filter_map(|r| r.fixed_agent_strategy)
        .collect();
    let increasing = own.windows(2).all(|w| w[1] > w[0]);
    eprintln!("\nown-theta column strictly increasing: {increasing}");
    Ok(())
}
