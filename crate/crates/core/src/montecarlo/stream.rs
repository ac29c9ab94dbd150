//! Reproducible random streams.
//!
//! Every sample belongs to a fixed-size chunk; chunk `c` of stream `s` under
//! master seed `m` draws from a ChaCha12 generator keyed by
//! `mix(m, s, c)`. Chunk boundaries do not depend on the number of worker
//! threads, so results are identical for any `--shards` value.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples per chunk.
pub const CHUNK_SIZE: usize = 1 << 14;

/// SplitMix64 finalizer (Stafford variant 13).
fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-chunk seed: each input is absorbed with a distinct odd increment and
/// re-mixed, so `(m, s, c)` triples that differ in any position diverge.
pub fn stream_seed(master_seed: u64, stream_id: u64, chunk: u64) -> u64 {
    let mut h = avalanche(master_seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    h = avalanche(h ^ stream_id.wrapping_add(0xd1b5_4a32_d192_ed03));
    avalanche(h ^ chunk.wrapping_add(0x8cb9_2ba7_2f3d_8dd7))
}

pub fn seeded_rng(master_seed: u64, stream_id: u64, chunk: u64) -> ChaCha12Rng {
    let base = stream_seed(master_seed, stream_id, chunk);
    let mut seed = [0u8; 32];
    for (i, word) in seed.chunks_mut(8).enumerate() {
        word.copy_from_slice(&avalanche(base.wrapping_add(i as u64)).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}

/// FNV-1a hash of a name; used to give each check its own stream ids.
pub fn stream_id_for(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Input distribution for one coordinate vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InputDistribution {
    /// Uniform ±1.
    Rademacher,
    /// Standard normal, drawn with the Ziggurat method (exact distribution).
    Gaussian,
    /// `x_i = +1` with probability `1 - λ` where `plus_leaning[i]` is set and
    /// `λ` otherwise.
    Biased { lambda: f64, plus_leaning: Vec<bool> },
}

/// What to sample and how much.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub distribution: InputDistribution,
    pub n: usize,
    pub count: u64,
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SampleSpec {
    pub fn new(distribution: InputDistribution, n: usize, count: u64, master_seed: u64, stream_id: u64) -> Result<Self> {
        let spec = SampleSpec {
            distribution,
            n,
            count,
            master_seed,
            stream_id,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        if let InputDistribution::Biased { lambda, plus_leaning } = &self.distribution {
            if !(*lambda > 0.0 && *lambda <= 0.5) {
                return Err(Error::InvalidLambda(*lambda));
            }
            if plus_leaning.len() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: plus_leaning.len(),
                });
            }
        }
        Ok(())
    }

    pub fn num_chunks(&self) -> u64 {
        self.count.div_ceil(CHUNK_SIZE as u64)
    }

    pub fn chunk_len(&self, chunk: u64) -> usize {
        let start = chunk * CHUNK_SIZE as u64;
        (self.count - start).min(CHUNK_SIZE as u64) as usize
    }

    pub(crate) fn sampler(&self, chunk: u64) -> PointSampler<'_> {
        PointSampler {
            rng: seeded_rng(self.master_seed, self.stream_id, chunk),
            distribution: &self.distribution,
            buf: vec![0.0; self.n],
        }
    }
}

/// Draws successive points into an internal buffer.
pub(crate) struct PointSampler<'a> {
    rng: ChaCha12Rng,
    distribution: &'a InputDistribution,
    buf: Vec<f64>,
}

impl PointSampler<'_> {
    pub(crate) fn next_point(&mut self) -> &[f64] {
        match self.distribution {
            InputDistribution::Rademacher => {
                for block in self.buf.chunks_mut(64) {
                    let bits = self.rng.next_u64();
                    for (i, x) in block.iter_mut().enumerate() {
                        *x = if bits >> i & 1 == 1 { -1.0 } else { 1.0 };
                    }
                }
            }
            InputDistribution::Gaussian => {
                for x in self.buf.iter_mut() {
                    *x = self.rng.sample(StandardNormal);
                }
            }
            InputDistribution::Biased { lambda, plus_leaning } => {
                for (x, &lean) in self.buf.iter_mut().zip(plus_leaning) {
                    let p_plus = if lean { 1.0 - lambda } else { *lambda };
                    *x = if self.rng.random::<f64>() < p_plus { 1.0 } else { -1.0 };
                }
            }
        }
        &self.buf
    }
}

/// Iterator over all points of a spec, chunk after chunk.
pub struct SampleStream<'a> {
    spec: &'a SampleSpec,
    chunk: u64,
    left_in_chunk: usize,
    sampler: Option<PointSampler<'a>>,
}

impl Iterator for SampleStream<'_> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.left_in_chunk == 0 {
            if self.chunk >= self.spec.num_chunks() {
                return None;
            }
            self.sampler = Some(self.spec.sampler(self.chunk));
            self.left_in_chunk = self.spec.chunk_len(self.chunk);
            self.chunk += 1;
        }
        self.left_in_chunk -= 1;
        self.sampler.as_mut().map(|s| s.next_point().to_vec())
    }
}

pub fn sample_stream(spec: &SampleSpec) -> Result<SampleStream<'_>> {
    spec.validate()?;
    Ok(SampleStream {
        spec,
        chunk: 0,
        left_in_chunk: 0,
        sampler: None,
    })
}
