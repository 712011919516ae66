//! Fits the interval networks on a simulated sample and prints the per-interval report.

use deephazard::data::TimeGrid;
use deephazard::presets::preset;
use deephazard::simulate::{generate_dataset, SimSettings};
use deephazard::train::fit;

fn main() -> deephazard::error::Result<()> {
    env_logger::init();
    let p = preset("ti1-model4")?;
    let out = generate_dataset(&SimSettings { model: p.model, n: 400, censoring: 0.0, n_pilot: 0, seed: 3 }, &p.grid)?;
    let tau = out.times().into_iter().fold(*p.grid.last().unwrap(), f64::max).next_up();
    let grid = TimeGrid::new(p.grid.clone(), tau)?;

    let (model, report) = fit(&out.records, &grid, &p.train)?;
    for r in &report.intervals {
        println!(
            "interval {}: {} at risk, {} events, {} epochs, loss {:.6} (data {:.6})",
            r.interval, r.at_risk, r.events, r.epochs, r.final_loss, r.final_data_loss
        );
    }
    println!("grid kept: {:?}, tau = {tau:.4}", model.grid.points());
    println!("baseline at tau: {:.4}", model.baseline.eval(tau));
    Ok(())
}
