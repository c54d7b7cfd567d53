//! Exhaustive and Monte-Carlo rotational-collision experiments.
//!
//! Exhaustive censuses split the input index space into contiguous ranges,
//! one per worker, and sum the per-range counts, so the result does not
//! depend on the worker count. Sampled experiments draw from fixed-size
//! blocks, each with its own substream derived from the master seed.

use std::num::NonZeroUsize;
use std::thread;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::arx::{
    permute_rounds, quarter_round, quarter_round_trace, QuarterRoundParams, RotAmount, State,
    WordSpec, WordVec4,
};
use crate::error::{domain, Error, Result};
use crate::exact::ExactProb;
use crate::rng;
use crate::stats;

/// Default exhaustive-search guard: at most `2^28` inputs.
pub const DEFAULT_GUARD_BITS: u32 = 28;

/// Largest permutation domain sampled in full by the random-permutation
/// Monte Carlo.
pub const PERM_GUARD_BITS: u32 = 20;

/// Samples per substream block in [`sampled_round_census`].
pub const SAMPLE_BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub workers: usize,
    pub guard_bits: u32,
    pub force: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            workers: default_workers(),
            guard_bits: DEFAULT_GUARD_BITS,
            force: false,
        }
    }
}

impl SearchOptions {
    pub fn with_workers(workers: usize) -> Self {
        SearchOptions {
            workers: workers.max(1),
            ..SearchOptions::default()
        }
    }

    fn check(&self, bits: u32, limit: u32) -> Result<()> {
        if bits > limit && !self.force {
            return Err(Error::Infeasible { bits, limit });
        }
        // u64 indices
        if bits > 63 {
            return Err(Error::Infeasible { bits, limit: 63 });
        }
        Ok(())
    }
}

pub fn default_workers() -> usize {
    thread::available_parallelism()
        .map(NonZeroUsize::get)
        .unwrap_or(1)
}

/// Counts indices in `0..total` satisfying `pred`, over `workers` contiguous
/// ranges.
pub fn parallel_count<F>(total: u64, workers: usize, pred: F) -> u64
where
    F: Fn(u64) -> bool + Sync,
{
    let workers = (workers.max(1) as u64).min(total.max(1));
    let chunk = total.div_ceil(workers);
    if workers == 1 {
        return (0..total).filter(|&i| pred(i)).count() as u64;
    }
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let start = (w * chunk).min(total);
                let end = ((w + 1) * chunk).min(total);
                let pred = &pred;
                scope.spawn(move || (start..end).filter(|&i| pred(i)).count() as u64)
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).sum()
    })
}

/// Runs `job(i)` for `i in 0..jobs` over `workers` contiguous ranges and
/// returns the results in index order.
pub fn parallel_map<T, F>(jobs: u64, workers: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let workers = (workers.max(1) as u64).min(jobs.max(1));
    let chunk = jobs.div_ceil(workers);
    if workers == 1 {
        return (0..jobs).map(&job).collect();
    }
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let start = (w * chunk).min(jobs);
                let end = ((w + 1) * chunk).min(jobs);
                let job = &job;
                scope.spawn(move || (start..end).map(job).collect::<Vec<T>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().unwrap())
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CensusMode {
    QuarterRound,
    Conditions,
    Addition,
    Chain,
    RoundSample,
    RandomPermutation,
}

/// Echo of the experiment configuration carried by every result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub mode: CensusMode,
    pub word_bits: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rots: Option<[u32; 4]>,
    pub rot: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rounds: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusResult {
    pub config: CensusConfig,
    pub count: u64,
    pub total: u64,
    pub probability: ExactProb,
}

impl CensusResult {
    fn new(config: CensusConfig, count: u64, bits: u32) -> Self {
        let total = 1u64 << bits;
        CensusResult {
            config,
            count,
            total,
            probability: ExactProb::new(BigInt::from(count), BigInt::from(total))
                .expect("count <= total"),
        }
    }
}

/// Proportion estimated by sampling, with a 95% Wilson interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledEstimate {
    pub config: CensusConfig,
    pub hits: u64,
    pub samples: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub seed: u64,
}

/// Mean of a per-trial count, with its standard error and a normal 95%
/// interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub config: CensusConfig,
    pub trials: u64,
    pub total: u64,
    pub min: u64,
    pub max: u64,
    pub mean: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub seed: u64,
}

#[inline(always)]
fn unpack4(idx: u64, spec: WordSpec) -> WordVec4 {
    let w = spec.bits();
    let m = spec.mask() as u64;
    [
        (idx & m) as u32,
        ((idx >> w) & m) as u32,
        ((idx >> (2 * w)) & m) as u32,
        ((idx >> (3 * w)) & m) as u32,
    ]
}

fn check_params(params: &QuarterRoundParams, rot: RotAmount) -> Result<()> {
    if params.spec() != rot.spec() {
        return Err(Error::SpecMismatch {
            left: params.spec().bits(),
            right: rot.word_bits(),
        });
    }
    Ok(())
}

fn qr_config(mode: CensusMode, params: &QuarterRoundParams, rot: RotAmount) -> CensusConfig {
    CensusConfig {
        mode,
        word_bits: rot.word_bits(),
        rots: Some(params.rots()),
        rot: rot.get(),
        k: None,
        rounds: None,
    }
}

/// Whether `x` is a parallel rotational collision of the quarter round.
#[inline(always)]
pub fn is_qr_collision(params: &QuarterRoundParams, rot: RotAmount, x: WordVec4) -> bool {
    let y = quarter_round(params, x);
    quarter_round(params, x.map(|v| rot.apply(v))) == y.map(|v| rot.apply(v))
}

#[inline(always)]
fn add_commutes(rot: RotAmount, a: u32, b: u32) -> bool {
    let s = rot.spec();
    s.add(rot.apply(a), rot.apply(b)) == rot.apply(s.add(a, b))
}

/// The four addition/rotation commutation conditions on the intermediate
/// words of one quarter-round evaluation.
#[inline(always)]
pub fn qr_conditions_hold(params: &QuarterRoundParams, rot: RotAmount, x: WordVec4) -> bool {
    let t = quarter_round_trace(params, x);
    let [x0, x1, x2, _] = x;
    add_commutes(rot, x0, x1)
        && add_commutes(rot, t.b3, x2)
        && add_commutes(rot, t.b0, t.b1)
        && add_commutes(rot, t.y[3], t.b2)
}

/// Exhaustive count of `x` with `Q(rot x) = rot Q(x)` over all `2^(4w)` inputs.
pub fn qr_census(
    params: &QuarterRoundParams,
    rot: RotAmount,
    opts: &SearchOptions,
) -> Result<CensusResult> {
    check_params(params, rot)?;
    let bits = 4 * rot.word_bits();
    opts.check(bits, opts.guard_bits)?;
    let spec = rot.spec();
    let count = parallel_count(1 << bits, opts.workers, |idx| {
        is_qr_collision(params, rot, unpack4(idx, spec))
    });
    Ok(CensusResult::new(
        qr_config(CensusMode::QuarterRound, params, rot),
        count,
        bits,
    ))
}

/// Exhaustive count of inputs satisfying all four commutation conditions.
pub fn condition_census(
    params: &QuarterRoundParams,
    rot: RotAmount,
    opts: &SearchOptions,
) -> Result<CensusResult> {
    check_params(params, rot)?;
    let bits = 4 * rot.word_bits();
    opts.check(bits, opts.guard_bits)?;
    let spec = rot.spec();
    let count = parallel_count(1 << bits, opts.workers, |idx| {
        qr_conditions_hold(params, rot, unpack4(idx, spec))
    });
    Ok(CensusResult::new(
        qr_config(CensusMode::Conditions, params, rot),
        count,
        bits,
    ))
}

/// Exhaustive count of `k`-tuples for which the rotated words sum to the
/// rotated sum.
pub fn addition_census(rot: RotAmount, k: u32, opts: &SearchOptions) -> Result<CensusResult> {
    if k < 2 {
        return Err(domain("k", k as u64, "addend count must be at least 2"));
    }
    let w = rot.word_bits();
    let bits = k.checked_mul(w).ok_or(Error::Infeasible {
        bits: u32::MAX,
        limit: opts.guard_bits,
    })?;
    opts.check(bits, opts.guard_bits)?;
    let spec = rot.spec();
    let mask = spec.mask() as u64;
    let count = parallel_count(1 << bits, opts.workers, |idx| {
        let mut plain = 0u32;
        let mut rotated = 0u32;
        for i in 0..k {
            let a = ((idx >> (i * w)) & mask) as u32;
            plain = spec.add(plain, a);
            rotated = spec.add(rotated, rot.apply(a));
        }
        rotated == rot.apply(plain)
    });
    Ok(CensusResult::new(
        CensusConfig {
            mode: CensusMode::Addition,
            word_bits: w,
            rots: None,
            rot: rot.get(),
            k: Some(k),
            rounds: None,
        },
        count,
        bits,
    ))
}

/// Exhaustive count of triples for which both the two-addend and the
/// three-addend commutation hold.
pub fn chain_census(rot: RotAmount, opts: &SearchOptions) -> Result<CensusResult> {
    let w = rot.word_bits();
    let bits = 3 * w;
    opts.check(bits, opts.guard_bits)?;
    let spec = rot.spec();
    let mask = spec.mask() as u64;
    let count = parallel_count(1 << bits, opts.workers, |idx| {
        let a1 = (idx & mask) as u32;
        let a2 = ((idx >> w) & mask) as u32;
        let a3 = ((idx >> (2 * w)) & mask) as u32;
        let s12 = spec.add(a1, a2);
        let r12 = spec.add(rot.apply(a1), rot.apply(a2));
        r12 == rot.apply(s12) && spec.add(r12, rot.apply(a3)) == rot.apply(spec.add(s12, a3))
    });
    Ok(CensusResult::new(
        CensusConfig {
            mode: CensusMode::Chain,
            word_bits: w,
            rots: None,
            rot: rot.get(),
            k: Some(3),
            rounds: None,
        },
        count,
        bits,
    ))
}

/// Draws a uniform state word by word from `rng`.
pub fn random_state(rng: &mut rng::SplitMix64, spec: WordSpec) -> State {
    let mut words = [0u32; 16];
    for word in &mut words {
        *word = rng::word(rng, spec);
    }
    State::from_words_unchecked(words)
}

/// Monte-Carlo estimate of `Pr[R^i(rot X) = rot R^i(X)]` over uniform states.
pub fn sampled_round_census(
    params: &QuarterRoundParams,
    rot: RotAmount,
    rounds: u32,
    samples: u64,
    seed: u64,
    opts: &SearchOptions,
) -> Result<SampledEstimate> {
    check_params(params, rot)?;
    if samples == 0 {
        return Err(domain("samples", 0, "must be at least 1"));
    }
    let spec = rot.spec();
    let r = rot.get();
    let blocks = samples.div_ceil(SAMPLE_BLOCK);
    let per_block = parallel_map(blocks, opts.workers, |block| {
        let mut rng = rng::substream(seed, block);
        let n = SAMPLE_BLOCK.min(samples - block * SAMPLE_BLOCK);
        (0..n)
            .filter(|_| {
                let x = random_state(&mut rng, spec);
                let y = permute_rounds(params, &x, rounds as usize);
                permute_rounds(params, &x.rotated(spec, r), rounds as usize) == y.rotated(spec, r)
            })
            .count() as u64
    });
    let hits = per_block.iter().sum();
    let (lower, upper) = stats::wilson_interval(hits, samples, stats::Z95);
    let mut config = qr_config(CensusMode::RoundSample, params, rot);
    config.rounds = Some(rounds);
    Ok(SampledEstimate {
        config,
        hits,
        samples,
        estimate: hits as f64 / samples as f64,
        lower,
        upper,
        seed,
    })
}

/// Parallel rotation of a packed `k`-word vector.
#[inline]
pub fn rotate_packed(idx: u64, rot: RotAmount, k: u32) -> u64 {
    let w = rot.word_bits();
    let mask = rot.spec().mask() as u64;
    (0..k).fold(0u64, |acc, i| {
        let word = ((idx >> (i * w)) & mask) as u32;
        acc | ((rot.apply(word) as u64) << (i * w))
    })
}

/// Number of rotational collisions `#{x : perm[rot x] = rot perm[x]}` of an
/// explicit permutation table over packed `k`-word vectors.
pub fn count_perm_collisions(perm: &[u64], rotation: &[u64]) -> u64 {
    (0..perm.len())
        .filter(|&x| perm[rotation[x] as usize] == rotation[perm[x] as usize])
        .count() as u64
}

/// Samples uniform permutations of the full `2^(wk)` space (Fisher-Yates)
/// and averages their rotational-collision counts.
pub fn random_perm_collision_mc(
    rot: RotAmount,
    k: u32,
    trials: u64,
    seed: u64,
    opts: &SearchOptions,
) -> Result<MeanEstimate> {
    if k == 0 {
        return Err(domain("k", 0, "word count must be at least 1"));
    }
    if trials == 0 {
        return Err(domain("trials", 0, "must be at least 1"));
    }
    let bits = rot.word_bits().saturating_mul(k);
    opts.check(bits, PERM_GUARD_BITS)?;
    let size = 1u64 << bits;
    let rotation: Vec<u64> = (0..size).map(|x| rotate_packed(x, rot, k)).collect();
    let counts = parallel_map(trials, opts.workers, |trial| {
        let mut rng = rng::substream(seed, trial);
        let mut perm: Vec<u64> = (0..size).collect();
        perm.shuffle(&mut rng);
        count_perm_collisions(&perm, &rotation)
    });
    let (mean, std_error, lower, upper) = stats::mean_interval(&counts);
    Ok(MeanEstimate {
        config: CensusConfig {
            mode: CensusMode::RandomPermutation,
            word_bits: rot.word_bits(),
            rots: None,
            rot: rot.get(),
            k: Some(k),
            rounds: None,
        },
        trials,
        total: counts.iter().sum(),
        min: counts.iter().copied().min().unwrap_or(0),
        max: counts.iter().copied().max().unwrap_or(0),
        mean,
        std_error,
        lower,
        upper,
        seed,
    })
}
