//! Several observations per instant sharpen the posterior: the same change
//! is localized first from one observation per instant, then from four.

use prisca::{credible_set, map_estimate, single_effect_posterior, ModelConfig, TimeSeries};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() {
    let t_len = 60usize;
    let t0 = 31usize;
    let config = ModelConfig::default();

    for per_instant in [1usize, 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut values = Vec::with_capacity(t_len * per_instant);
        for t in 1..=t_len {
            let sd = if t >= t0 { 2.0 } else { 1.0 };
            for _ in 0..per_instant {
                values.push(Normal::new(0.0, sd).unwrap().sample(&mut rng));
            }
        }
        let y = if per_instant == 1 {
            TimeSeries::new(values).unwrap()
        } else {
            TimeSeries::with_counts(values, vec![per_instant; t_len]).unwrap()
        };

        let posterior = single_effect_posterior(&y, &config).unwrap();
        let estimate = map_estimate(&posterior.alpha).unwrap();
        let set = credible_set(&posterior.alpha, config.p);
        println!(
            "{} observation(s) per instant: change estimated at t={estimate} \
             (true {t0}), credible set holds {} of {} instants",
            per_instant,
            set.indices.len(),
            y.len()
        );
    }
}
