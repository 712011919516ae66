//! Draws a censored sample from one of the generating models and prints a few rows.
//!
//!     cargo run --example simulate_dataset -- 5 200 0.15

use deephazard::simulate::{generate_dataset, SimModel, SimSettings};

fn main() -> deephazard::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let id: u8 = args.first().map_or(4, |s| s.parse().expect("model id"));
    let n: usize = args.get(1).map_or(200, |s| s.parse().expect("sample size"));
    let censoring: f64 = args.get(2).map_or(0.15, |s| s.parse().expect("censoring fraction"));

    let settings = SimSettings { model: SimModel::from_id(id)?, n, censoring, n_pilot: 5000, seed: 1 };
    let grid = [0.001, 0.2, 0.4, 0.6];
    let out = generate_dataset(&settings, &grid)?;

    println!("model {id}, n = {n}, censoring bound c = {:.4}", out.censoring_bound);
    println!("achieved censored fraction {:.3}", out.achieved_censoring);
    for r in out.records.iter().take(5) {
        println!("  id {:>3}  time {:.4}  event {}  Z(t_0)[0..2] = {:.3?}", r.id, r.time, r.event as u8, &r.covariates[0][..2]);
    }
    Ok(())
}
