//! Picks the effect count automatically: the search refits with one more
//! effect than the changes found so far and stops once the count settles.

use prisca::{auto_fit, detect, ModelConfig, TimeSeries};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let values: Vec<f64> = (1..=300)
        .map(|t| {
            let sd = if (101..201).contains(&t) { 3.0 } else { 1.0 };
            Normal::new(0.0, sd).unwrap().sample(&mut rng)
        })
        .collect();
    let y = TimeSeries::new(values).unwrap();

    let config = ModelConfig::default();
    let auto = auto_fit(&y, &config).unwrap();
    println!("changes planted at t=101 and t=201");
    println!("k_hat trace over the search: {:?}", auto.k_hat_trace);
    if auto.capped {
        println!("search stopped at the effect-count cap");
    }

    let report = detect(&auto.fit, config.p);
    for d in &report.detections {
        println!(
            "change at t={} (set of {} instants, mass {:.3})",
            d.point_estimate,
            d.credible_set.indices.len(),
            d.credible_set.total_mass
        );
    }
}
