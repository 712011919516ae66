//! Held-out concordance (time-dependent and traditional) and the integrated
//! squared error against the generating survival curves.

use deephazard::data::TimeGrid;
use deephazard::metrics::{c_index_td, c_index_traditional, imspe, SurvivalEvaluator};
use deephazard::predict::ModelEvaluator;
use deephazard::presets::preset;
use deephazard::simulate::{generate_dataset, SimSettings};
use deephazard::train::{fit, TrainConfig};

fn main() -> deephazard::error::Result<()> {
    let p = preset("ti1-model4")?;
    let sim = |seed, n| generate_dataset(&SimSettings { model: p.model, n, censoring: 0.0, n_pilot: 0, seed }, &p.grid);
    let (train, test) = (sim(20, 500)?, sim(21, 300)?);
    let tau = train.times().into_iter().fold(0.6, f64::max).next_up();
    let cfg = TrainConfig { max_epochs: 400, ..p.train.clone() };
    let (model, _) = fit(&train.records, &TimeGrid::new(p.grid.clone(), tau)?, &cfg)?;

    let k = model.grid.points().len();
    let covs: Vec<Vec<Vec<f64>>> = test.records.iter().map(|r| r.covariates[..k].to_vec()).collect();
    let (times, events) = (test.times(), test.events());
    let predicted = ModelEvaluator::new(&model, &covs, &times)?;
    let truth = test.truth();

    let median = {
        let mut t = times.clone();
        t.sort_by(f64::total_cmp);
        t[t.len() / 2]
    };
    let risks: Vec<f64> = (0..times.len()).map(|i| predicted.survival(i, median).map(|s| 1.0 - s)).collect::<Result<_, _>>()?;

    println!("time-dependent C-index  {:.4}", c_index_td(&times, &events, &predicted)?);
    println!("oracle C-index          {:.4}", c_index_td(&times, &events, &truth)?);
    println!("traditional C-index     {:.4}  (risk = 1 - S at t = {median:.3})", c_index_traditional(&times, &events, &risks)?);
    println!("IMSPE on [0, 0.6]       {:.5}", imspe(&predicted, &truth, 0.6, 200)?);
    Ok(())
}
