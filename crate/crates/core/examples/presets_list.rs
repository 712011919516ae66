//! Every named preset with its model, sample size, grid and censoring.

use deephazard::presets::{preset, PRESET_NAMES};

fn main() -> deephazard::error::Result<()> {
    for name in PRESET_NAMES {
        let p = preset(name)?;
        let widths: Vec<usize> = p.train.layers.iter().map(|l| l.width).collect();
        println!(
            "{name:<20} {:?} n={:<5} grid={:?} censoring={:.2} layers={widths:?} lr={}",
            p.model, p.n, p.grid, p.censoring, p.train.learning_rate
        );
    }
    Ok(())
}
