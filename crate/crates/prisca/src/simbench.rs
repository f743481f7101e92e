//! Synthetic data generator and benchmark harness.
//!
//! Replicates are seeded Gaussian sequences with variance changes planted at
//! rejection-sampled locations. The harness fits each replicate, detects
//! changes, and aggregates detection-count bias, one-sided Hausdorff
//! distance, credible-set length, conditional coverage, and runtime.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use rayon::prelude::*;

use crate::config::ModelConfig;
use crate::engine::{auto_fit, fit};
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::summaries::{detect, ChangePointReport};

/// Scenario description for seeded replicate generation.
///
/// Defaults follow the square-root scaling rules: ⌊√T/4⌋ changes with
/// pairwise spacing at least min{√T, 30}, segment variances i.i.d.
/// lognormal(0, ln(10)/2) unless a fixed pattern is supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub t_len: usize,
    pub num_changes: usize,
    /// Minimum gap between consecutive change locations (real-valued bound).
    pub min_spacing: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Fixed per-segment variances (length `num_changes + 1`); `None` draws
    /// them from the lognormal law each replicate.
    pub variances: Option<Vec<f64>>,
}

impl SimulationSpec {
    /// Spec with all defaults for a series of length `t_len`.
    pub fn new(t_len: usize) -> Result<Self> {
        let t = t_len as f64;
        let num_changes = (t.sqrt() / 4.0).floor() as usize;
        if num_changes == 0 {
            return Err(Error::Infeasible(format!(
                "no changes to place: floor(sqrt({t_len})/4) = 0"
            )));
        }
        let spec = SimulationSpec {
            t_len,
            num_changes,
            min_spacing: t.sqrt().min(30.0),
            replicates: 300,
            seed: 0,
            variances: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_changes(mut self, num_changes: usize) -> Self {
        self.num_changes = num_changes;
        self
    }

    pub fn with_variances(mut self, variances: Vec<f64>) -> Self {
        self.variances = Some(variances);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_len < 4 {
            return Err(Error::Infeasible(format!(
                "series length {} leaves no interior locations",
                self.t_len
            )));
        }
        if self.num_changes == 0 {
            return Err(Error::Infeasible("no changes to place".into()));
        }
        if self.num_changes as f64 * self.min_spacing >= self.t_len as f64 {
            return Err(Error::Infeasible(format!(
                "{} changes with spacing {} do not fit in length {}",
                self.num_changes, self.min_spacing, self.t_len
            )));
        }
        if let Some(v) = &self.variances {
            if v.len() != self.num_changes + 1 {
                return Err(Error::Infeasible(format!(
                    "{} segment variances supplied for {} segments",
                    v.len(),
                    self.num_changes + 1
                )));
            }
            if v.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                return Err(Error::Infeasible("segment variances must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One generated replicate: the series, the planted change locations
/// (1-based, ascending), and the per-segment variances.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    pub series: TimeSeries,
    pub changes: Vec<usize>,
    pub variances: Vec<f64>,
}

const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Generates replicate `replicate` of `spec`, deterministically in
/// (seed, replicate).
///
/// Locations are drawn uniformly on {2, …, T−2} and redrawn as a block until
/// all pairwise gaps reach `min_spacing`; then segment variances, then the
/// Gaussian noise. A change at location c means instants c.. follow the next
/// segment variance.
pub fn generate_dataset(spec: &SimulationSpec, replicate: u64) -> Result<GeneratedDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(replicate);

    let k = spec.num_changes;
    let mut changes = vec![0usize; k];
    let mut placed = false;
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        for c in changes.iter_mut() {
            *c = rng.random_range(2..=spec.t_len - 2);
        }
        changes.sort_unstable();
        if changes.windows(2).all(|w| (w[1] - w[0]) as f64 >= spec.min_spacing) {
            placed = true;
            break;
        }
    }
    if !placed {
        return Err(Error::Infeasible(
            "location rejection sampling did not terminate; spacing too tight".into(),
        ));
    }

    let variances = match &spec.variances {
        Some(v) => v.clone(),
        None => {
            let law = LogNormal::new(0.0, std::f64::consts::LN_10 / 2.0)
                .expect("valid lognormal parameters");
            (0..=k).map(|_| law.sample(&mut rng)).collect()
        }
    };

    let mut values = Vec::with_capacity(spec.t_len);
    let mut segment = 0usize;
    for t in 1..=spec.t_len {
        while segment < k && t >= changes[segment] {
            segment += 1;
        }
        let noise = Normal::new(0.0, variances[segment].sqrt()).expect("valid normal parameters");
        values.push(noise.sample(&mut rng));
    }

    Ok(GeneratedDataset { series: TimeSeries::new(values)?, changes, variances })
}

/// One-sided distance max over true changes of the gap to the nearest
/// estimate. An empty estimate set scores `series_len`, the largest
/// attainable distance.
pub fn hausdorff_like(estimated: &[usize], truth: &[usize], series_len: usize) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::InvalidInput("empty true change set".into()));
    }
    if estimated.is_empty() {
        return Ok(series_len as f64);
    }
    let worst = truth
        .iter()
        .map(|&eta| {
            estimated
                .iter()
                .map(|&x| (x as f64 - eta as f64).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(worst)
}

/// Effect-count rule used per benchmark replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkMethod {
    /// Fixed L = ⌊T/30⌋.
    Prisca,
    /// Automatic search over L.
    Auto,
    /// L set to the true change count.
    Oracle,
}

/// Aggregated scores across the replicates of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkMetrics {
    /// Mean of (true count − detected count), sign kept.
    pub bias: f64,
    /// Mean one-sided Hausdorff distance.
    pub hausdorff: f64,
    /// Mean cardinality over every kept credible set, pooled.
    pub mean_set_length: f64,
    /// Among true changes matched to a detection, the fraction whose true
    /// location lies in the matched credible set. Pooled across replicates.
    pub conditional_coverage: f64,
    /// Mean fit-plus-detect wall time per replicate.
    pub mean_runtime_seconds: f64,
    pub replicates: usize,
    /// Replicates whose fit returned an error; excluded from the means.
    pub failures: usize,
}

struct ReplicateScore {
    bias: f64,
    hausdorff: f64,
    set_length_sum: usize,
    set_count: usize,
    matched: usize,
    covered: usize,
    seconds: f64,
}

/// Matches detections to true changes within `radius`: candidate pairs sorted
/// by (distance, true location, detection index), each side used at most
/// once. Returns (matched, matched-with-truth-inside-set).
fn match_and_cover(report: &ChangePointReport, truth: &[usize], radius: f64) -> (usize, usize) {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (ti, &eta) in truth.iter().enumerate() {
        for (di, det) in report.detections.iter().enumerate() {
            let dist = (det.point_estimate as f64 - eta as f64).abs();
            if dist <= radius {
                pairs.push((dist, ti, di));
            }
        }
    }
    pairs.sort_by(|x, y| {
        x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2))
    });
    let mut truth_used = vec![false; truth.len()];
    let mut det_used = vec![false; report.detections.len()];
    let mut matched = 0;
    let mut covered = 0;
    for (_, ti, di) in pairs {
        if truth_used[ti] || det_used[di] {
            continue;
        }
        truth_used[ti] = true;
        det_used[di] = true;
        matched += 1;
        if report.detections[di].credible_set.contains(truth[ti]) {
            covered += 1;
        }
    }
    (matched, covered)
}

fn score_replicate(
    spec: &SimulationSpec,
    method: BenchmarkMethod,
    config: &ModelConfig,
    replicate: u64,
) -> Result<ReplicateScore> {
    let data = generate_dataset(spec, replicate)?;
    let start = Instant::now();
    let fitted = match method {
        BenchmarkMethod::Prisca => {
            let mut c = config.clone();
            c.l = spec.t_len / 30;
            fit(&data.series, &c)?
        }
        BenchmarkMethod::Auto => auto_fit(&data.series, config)?.fit,
        BenchmarkMethod::Oracle => {
            let mut c = config.clone();
            c.l = spec.num_changes;
            fit(&data.series, &c)?
        }
    };
    let report = detect(&fitted, config.p);
    let seconds = start.elapsed().as_secs_f64();

    let estimates: Vec<usize> = report.detections.iter().map(|d| d.point_estimate).collect();
    let radius = (spec.t_len as f64).sqrt().min(30.0) / 2.0;
    let (matched, covered) = match_and_cover(&report, &data.changes, radius);
    Ok(ReplicateScore {
        bias: data.changes.len() as f64 - report.k_hat as f64,
        hausdorff: hausdorff_like(&estimates, &data.changes, spec.t_len)?,
        set_length_sum: report.detections.iter().map(|d| d.credible_set.len()).sum(),
        set_count: report.detections.len(),
        matched,
        covered,
        seconds,
    })
}

/// Runs every replicate of `spec` under `method` and aggregates.
///
/// `config.l` is ignored; the method rule sets it. Replicates run on the
/// current rayon pool; the reduction is a sequential fold in replicate order,
/// so results do not depend on thread count.
pub fn run_benchmark(
    spec: &SimulationSpec,
    method: BenchmarkMethod,
    config: &ModelConfig,
) -> Result<BenchmarkMetrics> {
    spec.validate()?;
    if method == BenchmarkMethod::Prisca && spec.t_len / 30 == 0 {
        return Err(Error::InvalidConfig(format!(
            "fixed-L rule floor(T/30) gives no effects at T = {}",
            spec.t_len
        )));
    }
    let scores: Vec<Result<ReplicateScore>> = (0..spec.replicates as u64)
        .into_par_iter()
        .map(|r| score_replicate(spec, method, config, r))
        .collect();

    let mut ok = 0usize;
    let mut failures = 0usize;
    let mut bias_sum = 0.0;
    let mut hausdorff_sum = 0.0;
    let mut seconds_sum = 0.0;
    let mut length_sum = 0usize;
    let mut set_count = 0usize;
    let mut matched = 0usize;
    let mut covered = 0usize;
    for s in scores {
        match s {
            Ok(s) => {
                ok += 1;
                bias_sum += s.bias;
                hausdorff_sum += s.hausdorff;
                seconds_sum += s.seconds;
                length_sum += s.set_length_sum;
                set_count += s.set_count;
                matched += s.matched;
                covered += s.covered;
            }
            Err(_) => failures += 1,
        }
    }
    let mean = |sum: f64| if ok > 0 { sum / ok as f64 } else { f64::NAN };
    Ok(BenchmarkMetrics {
        bias: mean(bias_sum),
        hausdorff: mean(hausdorff_sum),
        mean_set_length: if set_count > 0 { length_sum as f64 / set_count as f64 } else { f64::NAN },
        conditional_coverage: if matched > 0 { covered as f64 / matched as f64 } else { f64::NAN },
        mean_runtime_seconds: mean(seconds_sum),
        replicates: spec.replicates,
        failures,
    })
}
