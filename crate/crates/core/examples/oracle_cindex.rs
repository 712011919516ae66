//! Concordance of the generating survival curves themselves: the ceiling a
//! fitted model can reach on a given model.

use deephazard::metrics::c_index_td;
use deephazard::simulate::{generate_dataset, SimModel, SimSettings};

fn main() -> deephazard::error::Result<()> {
    let grid = [0.001, 0.2, 0.4, 0.6];
    for id in 1..=6u8 {
        let model = SimModel::from_id(id)?;
        let mut values = Vec::new();
        for seed in 0..3 {
            let out = generate_dataset(&SimSettings { model, n: 500, censoring: 0.0, n_pilot: 0, seed }, &grid)?;
            values.push(c_index_td(&out.times(), &out.events(), &out.truth())?);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        println!("model {id}: oracle C-index {mean:.4}  ({values:.4?})");
    }
    Ok(())
}
