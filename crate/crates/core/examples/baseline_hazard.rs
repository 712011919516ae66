//! The cumulative baseline hazard for fixed interval risks: Nelson-Aalen
//! minus the integrated at-risk mean risk, in both truncation variants.

use deephazard::data::TimeGrid;
use deephazard::train::{BaselineEstimator, BaselineVariant};

fn main() -> deephazard::error::Result<()> {
    let grid = TimeGrid::new(vec![0.0, 0.5], 1.5)?;
    let times = [0.2, 0.4, 0.7, 0.9, 1.2];
    let events = [true, false, true, true, false];
    // risk on interval 0 and interval 1 for each subject
    let risks = vec![vec![0.3, 0.0], vec![0.1, 0.0], vec![0.5, 0.4], vec![0.2, 0.1], vec![0.0, 0.6]];

    let est = BaselineEstimator::new(&times, &events, &risks, &grid)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "N-A", "int hbar", "up-to-t", "whole");
    for k in 0..=12 {
        let t = 0.125 * k as f64;
        println!(
            "{t:>6.3} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            est.nelson_aalen(t),
            est.risk_integral(t),
            est.eval(t, BaselineVariant::UpToTime),
            est.eval(t, BaselineVariant::WholeInterval)
        );
    }
    let step = est.to_step(BaselineVariant::UpToTime);
    println!("stored knots {:?}", step.knots);
    Ok(())
}
