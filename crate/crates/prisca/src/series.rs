use crate::error::{Error, Result};

/// An ordered sequence of real observations, optionally with several samples
/// per time instant.
///
/// In the replicated case `values` stores the per-instant samples
/// back-to-back and `counts[t]` gives how many belong to instant `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    counts: Option<Vec<usize>>,
    /// Prefix offsets into `values`, length T+1; present iff `counts` is.
    offsets: Option<Vec<usize>>,
}

impl TimeSeries {
    /// One observation per instant.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("series must be nonempty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at position {} (1-based)",
                i + 1
            )));
        }
        Ok(Self { values, counts: None, offsets: None })
    }

    /// Replicated observations: `counts[t]` samples belong to instant `t`,
    /// stored consecutively in `values`.
    pub fn with_counts(values: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidInput("counts must be nonempty".into()));
        }
        if counts.contains(&0) {
            return Err(Error::InvalidInput("every instant needs at least one sample".into()));
        }
        let total: usize = counts.iter().sum();
        if total != values.len() {
            return Err(Error::InvalidInput(format!(
                "counts sum to {total} but {} values were given",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at sample position {} (1-based)",
                i + 1
            )));
        }
        let mut offsets = Vec::with_capacity(counts.len() + 1);
        offsets.push(0);
        for &n in &counts {
            offsets.push(offsets.last().unwrap() + n);
        }
        Ok(Self { values, counts: Some(counts), offsets: Some(offsets) })
    }

    /// Number of time instants T.
    pub fn len(&self) -> usize {
        match &self.counts {
            Some(c) => c.len(),
            None => self.values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total number of samples N (= T when unreplicated).
    pub fn num_samples(&self) -> usize {
        self.values.len()
    }

    pub fn has_replicates(&self) -> bool {
        self.counts.is_some()
    }

    /// All samples in storage order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counts(&self) -> Option<&[usize]> {
        self.counts.as_deref()
    }

    /// Samples belonging to instant `t0` (0-based).
    pub fn samples_at(&self, t0: usize) -> &[f64] {
        match &self.offsets {
            Some(off) => &self.values[off[t0]..off[t0 + 1]],
            None => std::slice::from_ref(&self.values[t0]),
        }
    }

    /// Per-instant sums of squares.
    pub(crate) fn instant_sq_sums(&self) -> Vec<f64> {
        match &self.counts {
            None => self.values.iter().map(|v| v * v).collect(),
            Some(counts) => {
                let mut out = Vec::with_capacity(counts.len());
                let mut k = 0;
                for &n in counts {
                    out.push(self.values[k..k + n].iter().map(|v| v * v).sum());
                    k += n;
                }
                out
            }
        }
    }

    /// Per-instant sample counts (all ones when unreplicated).
    pub(crate) fn instant_counts(&self) -> Vec<usize> {
        match &self.counts {
            Some(c) => c.clone(),
            None => vec![1; self.values.len()],
        }
    }
}
