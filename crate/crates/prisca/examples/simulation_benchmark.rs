//! Runs a reduced version of the synthetic study: replicated draws from the
//! simulation law, scored for count bias, localization distance, credible
//! set length, and conditional coverage. The full study runs through the
//! binary: `prisca benchmark --T 200 --reps 300 --method prisca`.

use prisca::{generate_dataset, run_benchmark, BenchmarkMethod, ModelConfig, SimulationSpec};

fn main() {
    let spec = SimulationSpec::new(200).unwrap().with_replicates(50);

    let one = generate_dataset(&spec, 0).unwrap();
    println!(
        "replicate 0 plants changes at {:?} with segment variances {:?}",
        one.changes,
        one.variances.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
    );

    println!("method   bias  hausdorff  length  coverage  ms/fit");
    let config = ModelConfig::default();
    for (method, name) in [
        (BenchmarkMethod::Prisca, "prisca"),
        (BenchmarkMethod::Auto, "auto"),
        (BenchmarkMethod::Oracle, "oracle"),
    ] {
        let m = run_benchmark(&spec, method, &config).unwrap();
        println!(
            "{name:<7} {:>5.2} {:>10.2} {:>7.2} {:>9.3} {:>7.2}",
            m.bias,
            m.hausdorff,
            m.mean_set_length,
            m.conditional_coverage,
            m.mean_runtime_seconds * 1e3
        );
    }
}
