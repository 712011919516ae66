//! Builds a working dataset for one interval and compares the analytic
//! gradient of its loss with central differences, first in the risks and
//! then through a small network.

use deephazard::data::{build_working_dataset, SurvivalRecord, TimeGrid};
use deephazard::loss::{interval_loss, interval_loss_and_grad};
use deephazard::nn::{Activation, IntervalNetwork, LayerSpec, Mode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> deephazard::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = TimeGrid::new(vec![0.0, 0.5], 1.0)?;
    let records: Vec<SurvivalRecord> = (0..8)
        .map(|i| {
            let z = vec![vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]; 2];
            SurvivalRecord::new(format!("s{i}"), rng.gen_range(0.05..0.95), rng.gen_bool(0.7), z)
        })
        .collect::<Result<_, _>>()?;
    let ds = build_working_dataset(&records, &grid, 0, &[])?;

    let h: Vec<f64> = (0..ds.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (loss, grad) = interval_loss_and_grad(&h, &ds)?;
    println!("loss {loss:.6}");
    for k in 0..h.len() {
        let (mut up, mut down) = (h.clone(), h.clone());
        up[k] += 1e-6;
        down[k] -= 1e-6;
        let fd = (interval_loss(&up, &ds)? - interval_loss(&down, &ds)?) / 2e-6;
        println!("  dL/dh[{k}] analytic {:+.8}  numeric {fd:+.8}", grad[k]);
    }

    let hidden = [LayerSpec { width: 4, activation: Activation::Tanh, dropout: 0.0 }];
    let mut net = IntervalNetwork::new(ds.feature_dim(), &hidden, &mut rng)?;
    let through = |net: &IntervalNetwork| -> deephazard::error::Result<f64> {
        let h: Vec<f64> = ds.records.iter().map(|r| net.predict(&r.features)).collect::<Result<_, _>>()?;
        interval_loss(&h, &ds)
    };
    let mut tapes = Vec::new();
    let mut hs = Vec::new();
    for r in &ds.records {
        let (v, t) = net.forward(&r.features, Mode::Eval, &mut rng)?;
        hs.push(v);
        tapes.push(t);
    }
    let (_, dh) = interval_loss_and_grad(&hs, &ds)?;
    let mut g = vec![0.0; net.n_params()];
    for (t, up) in tapes.iter().zip(&dh) {
        net.backward(t, *up, &mut g)?;
    }
    let mut worst = 0.0f64;
    for k in 0..g.len() {
        let orig = net.params()[k];
        net.params_mut()[k] = orig + 1e-6;
        let a = through(&net)?;
        net.params_mut()[k] = orig - 1e-6;
        let b = through(&net)?;
        net.params_mut()[k] = orig;
        worst = worst.max(((a - b) / 2e-6 - g[k]).abs());
    }
    println!("network parameters: {}, max |analytic - numeric| {worst:.2e}", g.len());
    Ok(())
}
