//! The same simulate / train / predict / evaluate chain the binary runs,
//! driven from config values, writing into a scratch directory.

use serde_json::json;

use deephazard::cli::{cmd_evaluate, cmd_predict, cmd_simulate, cmd_train, merge, parse_config, preset_base};

fn main() -> deephazard::error::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let root = std::env::temp_dir().join("deephazard-pipeline");
    let (train_dir, test_dir) = (root.join("train"), root.join("test"));

    let mut sim = preset_base("simulate", "ti1-model4")?;
    merge(&mut sim, json!({ "n": 300, "seed": 1 }));
    cmd_simulate(&parse_config(sim.clone())?, &train_dir)?;
    merge(&mut sim, json!({ "seed": 2 }));
    cmd_simulate(&parse_config(sim)?, &test_dir)?;

    let mut train = preset_base("train", "ti1-model4")?;
    merge(
        &mut train,
        json!({ "outcomes": train_dir.join("outcomes.csv"), "covariates": train_dir.join("covariates.csv"), "train": { "max_epochs": 300 } }),
    );
    cmd_train(&parse_config(train)?, &root.join("model"))?;

    cmd_predict(
        &parse_config(json!({
            "model": root.join("model/model.json"),
            "covariates": test_dir.join("covariates.csv"),
            "outcomes": test_dir.join("outcomes.csv"),
        }))?,
        &root.join("pred"),
    )?;
    cmd_evaluate(
        &parse_config(json!({
            "predictions": root.join("pred/survival.csv"),
            "outcomes": test_dir.join("outcomes.csv"),
            "truth": test_dir.join("truth.json"),
            "covariates": test_dir.join("covariates.csv"),
            "ph_covariates": [1],
        }))?,
        &root.join("eval"),
    )?;
    println!("{}", std::fs::read_to_string(root.join("eval/metrics.json"))?);
    Ok(())
}
