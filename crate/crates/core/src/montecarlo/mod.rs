//! Seeded sampling and statistically honest estimation of tails and moments.
//!
//! Estimators split the sample budget into fixed chunks (see [`CHUNK_SIZE`])
//! and merge per-chunk results in chunk order. The worker count only decides
//! how many chunks run at once, so every estimate is bit-identical for any
//! shard count.

mod stats;
mod stream;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use stats::{
    clopper_pearson, ks_critical_value, ks_statistic, normal_cdf, normal_upper_tail,
    CONFIDENCE_LEVEL,
};
pub use stream::{
    sample_stream, seeded_rng, stream_id_for, stream_seed, InputDistribution, SampleSpec,
    SampleStream, CHUNK_SIZE,
};

/// `Pr[|f(x)| > t]` with an exact 99% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub threshold: f64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub count: u64,
    pub hits: u64,
    pub spec: SampleSpec,
}

impl TailEstimate {
    fn from_hits(hits: u64, threshold: f64, spec: &SampleSpec) -> Self {
        let (ci_low, ci_high) = clopper_pearson(hits, spec.count, CONFIDENCE_LEVEL);
        TailEstimate {
            threshold,
            p_hat: hits as f64 / spec.count as f64,
            ci_low,
            ci_high,
            count: spec.count,
            hits,
            spec: spec.clone(),
        }
    }
}

/// Sample mean of `|f|^p` with its jackknife standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: u32,
    pub mean: f64,
    pub std_error: f64,
    pub count: u64,
}

fn map_chunks<A, F>(spec: &SampleSpec, shards: usize, per_chunk: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(u64) -> A + Sync + Send,
{
    spec.validate()?;
    let chunks = spec.num_chunks();
    if shards <= 1 {
        return Ok((0..chunks).map(per_chunk).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(shards)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {shards} workers: {e}")))?;
    Ok(pool.install(|| (0..chunks).into_par_iter().map(per_chunk).collect()))
}

/// Tail estimates for several thresholds from one pass over the samples.
pub fn estimate_tails<F>(evaluator: F, spec: &SampleSpec, thresholds: &[f64], shards: usize) -> Result<Vec<TailEstimate>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if let Some(t) = thresholds.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidArgument(format!("threshold {t} must be non-negative")));
    }
    let per_chunk = map_chunks(spec, shards, |chunk| {
        let mut sampler = spec.sampler(chunk);
        let mut hits = vec![0u64; thresholds.len()];
        for _ in 0..spec.chunk_len(chunk) {
            let v = evaluator(sampler.next_point()).abs();
            for (h, t) in hits.iter_mut().zip(thresholds) {
                if v > *t {
                    *h += 1;
                }
            }
        }
        hits
    })?;
    let mut totals = vec![0u64; thresholds.len()];
    for hits in per_chunk {
        for (tot, h) in totals.iter_mut().zip(hits) {
            *tot += h;
        }
    }
    Ok(totals
        .into_iter()
        .zip(thresholds)
        .map(|(hits, &t)| TailEstimate::from_hits(hits, t, spec))
        .collect())
}

pub fn estimate_tail_sharded<F>(evaluator: F, spec: &SampleSpec, t: f64, shards: usize) -> Result<TailEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    Ok(estimate_tails(evaluator, spec, &[t], shards)?.remove(0))
}

/// `Pr[|f(x)| > t]` on a single worker.
pub fn estimate_tail<F>(evaluator: F, spec: &SampleSpec, t: f64) -> Result<TailEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    estimate_tail_sharded(evaluator, spec, t, 1)
}

#[derive(Clone, Copy)]
struct Running {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Running {
    const EMPTY: Running = Running { n: 0.0, mean: 0.0, m2: 0.0 };

    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Running) -> Running {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Running {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

pub fn estimate_moment_sharded<F>(evaluator: F, spec: &SampleSpec, p: u32, shards: usize) -> Result<MomentEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !matches!(p, 2 | 4 | 6 | 8) {
        return Err(Error::InvalidArgument(format!("moment order {p} must be one of 2, 4, 6, 8")));
    }
    let per_chunk = map_chunks(spec, shards, |chunk| {
        let mut sampler = spec.sampler(chunk);
        let mut acc = Running::EMPTY;
        for _ in 0..spec.chunk_len(chunk) {
            acc.push(evaluator(sampler.next_point()).abs().powi(p as i32));
        }
        acc
    })?;
    let acc = per_chunk.into_iter().fold(Running::EMPTY, Running::merge);
    // The delete-one jackknife of a sample mean reduces to s/√n.
    let std_error = if acc.n > 1.0 {
        (acc.m2 / (acc.n * (acc.n - 1.0))).sqrt()
    } else {
        f64::NAN
    };
    Ok(MomentEstimate {
        p,
        mean: acc.mean,
        std_error,
        count: spec.count,
    })
}

/// `E|f|^p` for even `p ≤ 8`, on a single worker.
pub fn estimate_moment<F>(evaluator: F, spec: &SampleSpec, p: u32) -> Result<MomentEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    estimate_moment_sharded(evaluator, spec, p, 1)
}

/// Header comment line of every CSV report.
pub const CSV_VERSION_LINE: &str = "# decouple-kit v1";
pub const CSV_COLUMNS: &str = "experiment,k,hypothesis,t,count,p_hat,ci_low,ci_high,seed";

/// One row of a tail-probability report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub k: usize,
    pub hypothesis: String,
    pub t: f64,
    pub count: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl ReportRow {
    pub fn from_estimate(experiment: &str, k: usize, hypothesis: &str, est: &TailEstimate) -> Self {
        ReportRow {
            experiment: experiment.to_string(),
            k,
            hypothesis: hypothesis.to_string(),
            t: est.threshold,
            count: est.count,
            p_hat: est.p_hat,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            seed: est.spec.master_seed,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.k,
            self.hypothesis,
            self.t,
            self.count,
            self.p_hat,
            self.ci_low,
            self.ci_high,
            self.seed
        )
    }
}

/// Full CSV document: version line, column header, rows.
pub fn render_csv(rows: &[ReportRow]) -> String {
    let mut out = format!("{CSV_VERSION_LINE}\n{CSV_COLUMNS}\n");
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}
