//! Driving the experiment runner from code instead of the binary.

use dynregret::harness::{fit_summary, run_experiment, ExperimentConfig, FIT_HEADER};

const CONFIG: &str = r#"
output_dir = "unused"
horizons = [500, 1000, 2000, 4000]
seeds = [1, 2]
comparators = [{ type = "per_round_minimizer" }]

[scenario]
kind = { type = "random_walk", budget = { exponent = 0.5 } }
horizon = 500
dim = 2

[[algorithms]]
learner = { type = "rls" }
schedule = { kind = "path_tuned" }

[[algorithms]]
id = "rls_undiscounted"
learner = { type = "rls" }
schedule = { kind = "fixed", gamma = 1.0 }
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ExperimentConfig::parse(CONFIG)?;
    let dir = std::env::temp_dir().join("dynregret-example");
    let outcome = run_experiment(&config, Some(&dir))?;
    println!("{} runs written to {}", outcome.rows.len(), dir.display());
    println!("{FIT_HEADER}");
    for fit in fit_summary(&outcome.rows) {
        println!("{}", fit.to_csv());
    }
    Ok(())
}
