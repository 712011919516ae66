//! Survival curves for new subjects from a fitted model, plus the
//! per-subject variance of the event time implied by each curve.

use deephazard::data::TimeGrid;
use deephazard::predict::{conditional_variance, survival_curve};
use deephazard::presets::preset;
use deephazard::simulate::{generate_dataset, SimSettings};
use deephazard::train::{fit, TrainConfig};

fn main() -> deephazard::error::Result<()> {
    let p = preset("ti1-model1")?;
    let sim = |seed, n| generate_dataset(&SimSettings { model: p.model, n, censoring: 0.0, n_pilot: 0, seed }, &p.grid);
    let train = sim(10, 300)?;
    let tau = train.times().into_iter().fold(0.6, f64::max).next_up();
    let cfg = TrainConfig { max_epochs: 300, ..p.train.clone() };
    let (model, _) = fit(&train.records, &TimeGrid::new(p.grid.clone(), tau)?, &cfg)?;

    let new = sim(11, 3)?;
    let times: Vec<f64> = (0..=10).map(|k| tau * k as f64 / 10.0).collect();
    let k = model.grid.points().len();
    for r in &new.records {
        let curve = survival_curve(&model, &r.id, &r.covariates[..k], &times)?;
        let shown: Vec<String> = curve.values.iter().map(|v| format!("{v:.3}")).collect();
        println!("subject {}: S = [{}]", r.id, shown.join(" "));
        println!("  Var(T) ~ {:.5}", conditional_variance(&curve, tau));
    }
    Ok(())
}
