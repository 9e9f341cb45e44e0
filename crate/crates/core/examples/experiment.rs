//! Running a TOML experiment config in-process and inspecting the bundle.

use varpot::cli::{run, ExperimentConfig};

const CONFIG: &str = r#"
name = "example"
lower = [-1.5, -1.5, -1.5]
upper = [1.5, 1.5, 1.5]
h = 0.125

[exponent]
rule = "log-perturbed"
a = 2.0
b = 0.5
center = [0.0, 0.0, 0.0]

[family]
count = 4

[[checks]]
kind = "norm"

[[checks]]
kind = "estimate"
estimate = "whole-poisson"
arm = "strong"

[[checks]]
kind = "acceptance"
criteria = [1, 5]
"#;

fn main() -> varpot::Result<()> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    let bundle = run(&config)?;
    for (name, table) in &bundle.tables {
        println!("{name}: {} rows", table.lines().count() - 1);
    }
    println!("{}", bundle.summary_json());
    Ok(())
}
