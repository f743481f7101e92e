//! Closed-form analysis of a single variance change: posterior location
//! weights, the point estimate, and the smallest credible set.

use prisca::{credible_set, map_estimate, single_effect_posterior, ModelConfig, TimeSeries};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let values: Vec<f64> = (1..=120)
        .map(|t| {
            let sd = if t >= 61 { 3.0 } else { 1.0 };
            Normal::new(0.0, sd).unwrap().sample(&mut rng)
        })
        .collect();
    let y = TimeSeries::new(values).unwrap();

    let config = ModelConfig::default();
    let posterior = single_effect_posterior(&y, &config).unwrap();
    let estimate = map_estimate(&posterior.alpha).unwrap();
    let set = credible_set(&posterior.alpha, config.p);

    println!("true change at t=61, estimated at t={estimate}");
    println!(
        "{}% credible set ({} instants, mass {:.3}): {:?}",
        (config.p * 100.0) as u32,
        set.indices.len(),
        set.total_mass,
        set.indices
    );
    let top: Vec<(usize, f64)> = {
        let mut weighted: Vec<(usize, f64)> =
            posterior.alpha.iter().enumerate().map(|(t0, &a)| (t0 + 1, a)).collect();
        weighted.sort_by(|x, y| y.1.total_cmp(&x.1));
        weighted.truncate(3);
        weighted
    };
    for (t, weight) in top {
        println!("alpha[{t}] = {weight:.3}");
    }
}
