pub mod data;
pub mod error;
pub mod loss;
pub mod nn;
pub mod step;
pub mod train;
pub mod metrics;
pub mod predict;
pub mod simulate;
pub mod presets;
pub mod cli;
pub mod io;
