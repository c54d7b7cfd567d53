//! Toy-scale rotational distinguisher: query an oracle that runs either an
//! ARX permutation or a lazily sampled random permutation, and decide which
//! one it is from the presence of a parallel rotational collision.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::arx::{
    inverse_quarter_round, permute_rounds, quarter_round, QuarterRoundParams, RotAmount, State,
    WordSpec,
};
use crate::error::{domain, Error, Result};
use crate::exact::ExactProb;
use crate::rng;
use crate::search::parallel_map;
use crate::stats;

/// Largest lazily sampled permutation domain, in bits (inputs are packed into a u64).
pub const RANDOM_SPACE_BITS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleKind {
    /// `rounds` alternating column/diagonal rounds on a 16-word state.
    ChachaPerm { rounds: u32 },
    /// One quarter round on 4 words.
    QuarterRoundPerm,
    /// Uniform random permutation of `words`-word vectors.
    RandomPerm { words: u32 },
}

impl OracleKind {
    pub fn name(&self) -> &'static str {
        match self {
            OracleKind::ChachaPerm { .. } => "chacha-perm",
            OracleKind::QuarterRoundPerm => "quarter-round-perm",
            OracleKind::RandomPerm { .. } => "random-perm",
        }
    }

    pub fn words(&self) -> u32 {
        match self {
            OracleKind::ChachaPerm { .. } => 16,
            OracleKind::QuarterRoundPerm => 4,
            OracleKind::RandomPerm { words } => *words,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub kind: OracleKind,
    /// Word size and rotation constants; only the word size matters for the
    /// random kind.
    pub params: QuarterRoundParams,
    pub pin_zero: bool,
    pub seed: u64,
}

impl OracleSpec {
    pub fn quarter_round(params: QuarterRoundParams) -> Self {
        OracleSpec {
            kind: OracleKind::QuarterRoundPerm,
            params,
            pin_zero: false,
            seed: 0,
        }
    }

    pub fn chacha(params: QuarterRoundParams, rounds: u32) -> Self {
        OracleSpec {
            kind: OracleKind::ChachaPerm { rounds },
            params,
            pin_zero: false,
            seed: 0,
        }
    }

    /// Random permutation on the same domain as `self`, with `0 -> 0` pinned.
    pub fn matching_random(&self, seed: u64) -> Self {
        OracleSpec {
            kind: OracleKind::RandomPerm {
                words: self.kind.words(),
            },
            params: self.params,
            pin_zero: true,
            seed,
        }
    }

    pub fn spec(&self) -> WordSpec {
        self.params.spec()
    }
}

/// A permutation of `words()`-word vectors that can be queried.
pub trait PermutationOracle {
    fn kind(&self) -> OracleKind;
    fn word_spec(&self) -> WordSpec;
    fn query(&mut self, x: &[u32]) -> Vec<u32>;

    fn words(&self) -> usize {
        self.kind().words() as usize
    }
}

#[derive(Debug, Clone)]
pub struct QuarterRoundOracle {
    params: QuarterRoundParams,
}

impl QuarterRoundOracle {
    pub fn inverse(&self, y: &[u32]) -> Vec<u32> {
        inverse_quarter_round(&self.params, y.try_into().expect("4 words")).to_vec()
    }
}

impl PermutationOracle for QuarterRoundOracle {
    fn kind(&self) -> OracleKind {
        OracleKind::QuarterRoundPerm
    }

    fn word_spec(&self) -> WordSpec {
        self.params.spec()
    }

    fn query(&mut self, x: &[u32]) -> Vec<u32> {
        quarter_round(&self.params, x.try_into().expect("4 words")).to_vec()
    }
}

#[derive(Debug, Clone)]
pub struct ChachaOracle {
    params: QuarterRoundParams,
    rounds: u32,
}

impl PermutationOracle for ChachaOracle {
    fn kind(&self) -> OracleKind {
        OracleKind::ChachaPerm {
            rounds: self.rounds,
        }
    }

    fn word_spec(&self) -> WordSpec {
        self.params.spec()
    }

    fn query(&mut self, x: &[u32]) -> Vec<u32> {
        let words: [u32; 16] = x.try_into().expect("16 words");
        let state = State::new(self.params.spec(), words).expect("reduced words");
        permute_rounds(&self.params, &state, self.rounds as usize)
            .words()
            .to_vec()
    }
}

/// Random permutation sampled on demand: each fresh input gets an output
/// drawn uniformly from the outputs not yet assigned.
#[derive(Debug, Clone)]
pub struct LazyRandomPermutation {
    spec: WordSpec,
    words: u32,
    bits: u32,
    forward: HashMap<u64, u64>,
    backward: HashMap<u64, u64>,
    rng: rng::SplitMix64,
}

impl LazyRandomPermutation {
    pub fn new(spec: WordSpec, words: u32, pin_zero: bool, seed: u64) -> Result<Self> {
        let bits = spec.bits().saturating_mul(words);
        if words == 0 {
            return Err(domain("words", 0, "must be at least 1"));
        }
        if bits > RANDOM_SPACE_BITS {
            return Err(Error::Infeasible {
                bits,
                limit: RANDOM_SPACE_BITS,
            });
        }
        let mut perm = LazyRandomPermutation {
            spec,
            words,
            bits,
            forward: HashMap::new(),
            backward: HashMap::new(),
            rng: rng::seeded(seed),
        };
        if pin_zero {
            perm.forward.insert(0, 0);
            perm.backward.insert(0, 0);
        }
        Ok(perm)
    }

    pub fn space_bits(&self) -> u32 {
        self.bits
    }

    /// Number of input/output pairs fixed so far.
    pub fn assigned(&self) -> usize {
        self.forward.len()
    }

    pub fn pack(&self, x: &[u32]) -> u64 {
        let w = self.spec.bits();
        x.iter().enumerate().fold(0u64, |acc, (i, &word)| {
            acc | ((word as u64) << (i as u32 * w))
        })
    }

    pub fn unpack(&self, idx: u64) -> Vec<u32> {
        let w = self.spec.bits();
        let mask = self.spec.mask() as u64;
        (0..self.words)
            .map(|i| ((idx >> (i * w)) & mask) as u32)
            .collect()
    }

    pub fn apply(&mut self, x: u64) -> u64 {
        if let Some(&y) = self.forward.get(&x) {
            return y;
        }
        // x is unassigned, so some output is still free
        let y = loop {
            let candidate = rng::bits(&mut self.rng, self.bits);
            if !self.backward.contains_key(&candidate) {
                break candidate;
            }
        };
        self.forward.insert(x, y);
        self.backward.insert(y, x);
        y
    }

    pub fn apply_inverse(&mut self, y: u64) -> u64 {
        if let Some(&x) = self.backward.get(&y) {
            return x;
        }
        let x = loop {
            let candidate = rng::bits(&mut self.rng, self.bits);
            if !self.forward.contains_key(&candidate) {
                break candidate;
            }
        };
        self.forward.insert(x, y);
        self.backward.insert(y, x);
        x
    }
}

impl PermutationOracle for LazyRandomPermutation {
    fn kind(&self) -> OracleKind {
        OracleKind::RandomPerm { words: self.words }
    }

    fn word_spec(&self) -> WordSpec {
        self.spec
    }

    fn query(&mut self, x: &[u32]) -> Vec<u32> {
        let idx = self.pack(x);
        let y = self.apply(idx);
        self.unpack(y)
    }
}

pub fn make_oracle(spec: &OracleSpec) -> Result<Box<dyn PermutationOracle + Send>> {
    Ok(match spec.kind {
        OracleKind::QuarterRoundPerm => Box::new(QuarterRoundOracle {
            params: spec.params,
        }),
        OracleKind::ChachaPerm { rounds } => Box::new(ChachaOracle {
            params: spec.params,
            rounds,
        }),
        OracleKind::RandomPerm { words } => Box::new(LazyRandomPermutation::new(
            spec.params.spec(),
            words,
            spec.pin_zero,
            spec.seed,
        )?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Chacha,
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinguisherVerdict {
    pub budget: u64,
    pub collisions: u64,
    pub decision: Decision,
    pub queries: u64,
    /// The input that produced the collision, if any.
    pub witness: Option<Vec<u32>>,
}

/// Query budget `ceil(c / upper)`.
pub fn default_budget(upper: &ExactProb, c: u32) -> Result<u64> {
    if upper.numer() == &BigInt::from(0) {
        return Err(domain("upper", 0, "bound must be positive"));
    }
    let budget = (upper.denom() * c).div_ceil(upper.numer());
    u64::try_from(budget).map_err(|_| Error::Infeasible {
        bits: upper.log2().abs().ceil() as u32,
        limit: 64,
    })
}

/// Samples `budget` nonzero inputs `x`, queries `O(x)` and `O(rot x)`, and
/// stops at the first rotational collision.
pub fn run_distinguisher(
    oracle: &mut dyn PermutationOracle,
    rot: RotAmount,
    budget: u64,
    seed: u64,
) -> Result<DistinguisherVerdict> {
    let spec = oracle.word_spec();
    if spec != rot.spec() {
        return Err(Error::SpecMismatch {
            left: spec.bits(),
            right: rot.word_bits(),
        });
    }
    let words = oracle.words();
    let mut rng = rng::seeded(seed);
    let mut queries = 0;
    let mut x = vec![0u32; words];
    for _ in 0..budget {
        loop {
            for word in x.iter_mut() {
                *word = (rng.next_u64() as u32) & spec.mask();
            }
            if x.iter().any(|&word| word != 0) {
                break;
            }
        }
        let y = oracle.query(&x);
        let rotated: Vec<u32> = x.iter().map(|&v| rot.apply(v)).collect();
        let z = oracle.query(&rotated);
        queries += 2;
        if y.iter().zip(&z).all(|(&a, &b)| rot.apply(a) == b) {
            return Ok(DistinguisherVerdict {
                budget,
                collisions: 1,
                decision: Decision::Chacha,
                queries,
                witness: Some(x),
            });
        }
    }
    Ok(DistinguisherVerdict {
        budget,
        collisions: 0,
        decision: Decision::Random,
        queries,
        witness: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialConfig {
    /// The ARX side of the game; the random side is derived from it.
    pub oracle: OracleSpec,
    pub rot: u32,
    pub budget: u64,
    pub trials: u64,
    pub master_seed: u64,
}

/// One game, as written to the JSON-lines trial log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub oracle_kind: String,
    pub seed: u64,
    #[serde(rename = "N")]
    pub budget: u64,
    pub collisions: u64,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    pub budget: u64,
    pub true_positives: u64,
    pub false_positives: u64,
    pub tpr: f64,
    pub fpr: f64,
    pub advantage: f64,
    /// 95% Clopper-Pearson intervals.
    pub tpr_interval: (f64, f64),
    pub fpr_interval: (f64, f64),
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub stats: TrialStats,
    pub records: Vec<TrialRecord>,
}

/// Seeds for trial `t`: distinguisher vs ARX, distinguisher vs random, and
/// the random oracle itself.
pub fn trial_seeds(master: u64, trial: u64) -> (u64, u64, u64) {
    (
        rng::derive_seed(master, 3 * trial),
        rng::derive_seed(master, 3 * trial + 1),
        rng::derive_seed(master, 3 * trial + 2),
    )
}

pub fn run_trials(config: &TrialConfig, workers: usize) -> Result<TrialOutcome> {
    if config.trials == 0 {
        return Err(domain("trials", 0, "must be at least 1"));
    }
    if matches!(config.oracle.kind, OracleKind::RandomPerm { .. }) {
        return Err(domain("oracle", 0, "the tested oracle must be an ARX kind"));
    }
    let rot = RotAmount::new(config.oracle.spec(), config.rot)?;
    // surface configuration errors before fanning out
    make_oracle(&config.oracle.matching_random(0))?;

    let games = parallel_map(config.trials, workers, |trial| -> Result<_> {
        let (arx_seed, rand_seed, oracle_seed) = trial_seeds(config.master_seed, trial);
        let mut arx = make_oracle(&config.oracle)?;
        let mut random = make_oracle(&config.oracle.matching_random(oracle_seed))?;
        let a = run_distinguisher(arx.as_mut(), rot, config.budget, arx_seed)?;
        let b = run_distinguisher(random.as_mut(), rot, config.budget, rand_seed)?;
        Ok([
            TrialRecord {
                trial,
                oracle_kind: config.oracle.kind.name().to_string(),
                seed: arx_seed,
                budget: config.budget,
                collisions: a.collisions,
                decision: a.decision,
            },
            TrialRecord {
                trial,
                oracle_kind: "random-perm".to_string(),
                seed: rand_seed,
                budget: config.budget,
                collisions: b.collisions,
                decision: b.decision,
            },
        ])
    });
    let mut records = Vec::with_capacity(2 * config.trials as usize);
    for game in games {
        records.extend(game?);
    }
    let detected = |kind_is_random: bool| {
        records
            .iter()
            .filter(|r| (r.oracle_kind == "random-perm") == kind_is_random)
            .filter(|r| r.decision == Decision::Chacha)
            .count() as u64
    };
    let tp = detected(false);
    let fp = detected(true);
    let n = config.trials;
    let tpr = tp as f64 / n as f64;
    let fpr = fp as f64 / n as f64;
    Ok(TrialOutcome {
        stats: TrialStats {
            trials: n,
            budget: config.budget,
            true_positives: tp,
            false_positives: fp,
            tpr,
            fpr,
            advantage: tpr - fpr,
            tpr_interval: stats::clopper_pearson(tp, n, 0.05),
            fpr_interval: stats::clopper_pearson(fp, n, 0.05),
            master_seed: config.master_seed,
        },
        records,
    })
}
