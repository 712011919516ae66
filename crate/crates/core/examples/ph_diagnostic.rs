//! Ratio of group-wise Nelson-Aalen estimates over time. A flat ratio is
//! what proportional hazards would predict; the simulated models drift.

use deephazard::metrics::ph_diagnostic;
use deephazard::simulate::{generate_dataset, SimModel, SimSettings};

fn main() -> deephazard::error::Result<()> {
    let out = generate_dataset(&SimSettings { model: SimModel::Model5, n: 2000, censoring: 0.15, n_pilot: 5000, seed: 4 }, &[0.0])?;
    // binary covariate Z16 sits at index 15; its path is sqrt(min(t, 0.6)) z0
    let group: Vec<bool> = out.z0.iter().map(|z| z[15] > 0.5).collect();
    let ratios = ph_diagnostic(&out.times(), &out.events(), &group)?;
    let step = (ratios.len() / 12).max(1);
    for (t, r) in ratios.iter().step_by(step) {
        println!("t = {t:.3}  ratio {r:.3}");
    }
    Ok(())
}
