//! Exact rotational probabilities of modular addition and the quarter-round,
//! round and multi-round bounds derived from them.
//!
//! Everything here is computed over arbitrary-precision integers and
//! rationals; no floating point is involved.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arx::RotAmount;
use crate::error::{domain, Result};
use crate::exact::ExactProb;

/// Upper limit on the number of addends accepted by the counting formulas.
pub const MAX_ADDENDS: u32 = 64;

/// Quarter rounds per ChaCha round.
pub const QUARTER_ROUNDS_PER_ROUND: u32 = 4;

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

fn prob(value: BigRational) -> ExactProb {
    ExactProb::from_ratio(value).expect("probability formula left [0, 1]")
}

/// Binomial coefficient `C(n, k)`, zero when `k < 0`, `n < 0` or `k > n`.
///
/// Evaluated as a falling-factorial product over `min(k, n - k)` terms, so
/// huge `n` is cheap as long as one side is small.
pub fn binomial(n: &BigInt, k: &BigInt) -> BigInt {
    if k.is_negative() || n.is_negative() || k > n {
        return BigInt::zero();
    }
    let other = n - k;
    let small = if &other < k { other } else { k.clone() };
    let mut acc = BigInt::one();
    let mut i = BigInt::zero();
    while i < small {
        acc *= n - &i;
        i += 1;
        acc /= &i;
    }
    acc
}

/// `C(lower + extra, lower)`, with the convention that a negative `lower`
/// gives zero.
fn choose_with_lower(lower: BigInt, extra: u32) -> BigInt {
    if lower.is_negative() {
        return BigInt::zero();
    }
    binomial(&(lower + extra), &BigInt::from(extra))
}

/// Count of bounded non-negative integer solutions behind the `k`-addend
/// rotational-addition probability: tuples `y_1..y_k`, each in
/// `0..2^q`, whose sum reduced mod `2^w` is below `2^q`.
pub fn f_count(q: u32, k: u32, w: u32) -> Result<BigUint> {
    if !(2..=32).contains(&w) {
        return Err(domain("w", w as u64, "word size must be in 2..=32"));
    }
    if q == 0 || q >= w {
        return Err(domain("q", q as u64, "must satisfy 1 <= q <= w-1"));
    }
    if !(2..=MAX_ADDENDS).contains(&k) {
        return Err(domain("k", k as u64, "addend count must be in 2..=64"));
    }
    let block = pow2(q as u64);
    let modulus = pow2(w as u64);
    let h_max: BigInt = (BigInt::from(k) * (&block - 1u32)).div_floor(&modulus);

    let mut total = BigInt::zero();
    let mut h = BigInt::zero();
    while h <= h_max {
        let base = &h * &modulus;
        for j in 0..=k {
            let jb = BigInt::from(j);
            // h 2^w - (j-1) 2^q - 1 and h 2^w - j 2^q - 1
            let upper = &base - (&jb - 1) * &block - 1;
            let lower = &base - &jb * &block - 1;
            let term = choose_with_lower(upper, k) - choose_with_lower(lower, k);
            let coeff = binomial(&BigInt::from(k), &jb);
            if j % 2 == 0 {
                total += &coeff * term;
            } else {
                total -= &coeff * term;
            }
        }
        h += 1;
    }
    Ok(total
        .to_biguint()
        .expect("inclusion-exclusion count is non-negative"))
}

/// Probability that rotation commutes with the sum of two uniform words:
/// `(2^r + 1)(2^(w-r) + 1) / 2^(w+2)`.
pub fn daum_prob(rot: RotAmount) -> ExactProb {
    let w = rot.word_bits() as u64;
    let r = rot.get() as u64;
    prob(ratio((pow2(r) + 1) * (pow2(w - r) + 1), pow2(w + 2)))
}

fn check_addends(k: u32) -> Result<()> {
    if !(2..=MAX_ADDENDS).contains(&k) {
        return Err(domain("k", k as u64, "addend count must be in 2..=64"));
    }
    Ok(())
}

/// Probability that rotation commutes with the sum of `k` uniform words.
pub fn multi_add_rot_prob(rot: RotAmount, k: u32) -> Result<ExactProb> {
    check_addends(k)?;
    let w = rot.word_bits();
    let r = rot.get();
    let left = f_count(r, k, w)?;
    let right = f_count(w - r, k, w)?;
    Ok(prob(ratio(
        BigInt::from(left * right),
        pow2(k as u64 * w as u64),
    )))
}

/// `D (2^r + 2)(2^(w-r) + 2) / (9 * 2^w)`; the chained three-addend
/// probability.
pub fn chain_prob_k(rot: RotAmount) -> ExactProb {
    let w = rot.word_bits() as u64;
    let r = rot.get() as u64;
    let d = daum_prob(rot).into_ratio();
    prob(d * ratio((pow2(r) + 2) * (pow2(w - r) + 2), BigInt::from(9) * pow2(w)))
}

/// Closed form for the three-addend probability: the chained value plus, for
/// `r = 1` or `r = w - 1`, the extra term `4 / 2^(3w) * C(2^(w-1), 2^(w-1) - 3)`.
pub fn triple_prob_p(rot: RotAmount) -> ExactProb {
    let w = rot.word_bits() as u64;
    let r = rot.get() as u64;
    let mut value = chain_prob_k(rot).into_ratio();
    if r == 1 || r == w - 1 {
        let half = pow2(w - 1);
        let extra = binomial(&half, &(&half - 3));
        value += ratio(BigInt::from(4) * extra, pow2(3 * w));
    }
    prob(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundVariant {
    /// Lower bound `D^3 K`; the one printed next to the toy-size census.
    #[default]
    Chain,
    /// Lower bound `D^3 P`; the one used for the full-size round table.
    Corrected,
}

impl BoundVariant {
    pub fn name(self) -> &'static str {
        match self {
            BoundVariant::Chain => "chain",
            BoundVariant::Corrected => "corrected",
        }
    }
}

impl std::str::FromStr for BoundVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "chain" => Ok(BoundVariant::Chain),
            "corrected" => Ok(BoundVariant::Corrected),
            other => Err(format!(
                "unknown variant {other:?} (expected chain|corrected)"
            )),
        }
    }
}

/// A lower/upper pair for a rotational probability.
///
/// `lower <= upper` is not guaranteed: with the corrected variant at
/// `r = 1` or `r = w - 1` and `w >= 5` the lower bound exceeds the upper one.
/// [`BoundsPair::is_ordered`] reports it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsPair {
    pub lower: ExactProb,
    pub upper: ExactProb,
    pub variant: BoundVariant,
}

impl BoundsPair {
    pub fn is_ordered(&self) -> bool {
        self.lower <= self.upper
    }

    pub fn contains(&self, value: &ExactProb) -> bool {
        &self.lower <= value && value <= &self.upper
    }
}

/// Bounds on the probability that a rotational pair survives one quarter
/// round.
pub fn qr_bounds(rot: RotAmount, variant: BoundVariant) -> BoundsPair {
    let d = daum_prob(rot);
    let k = chain_prob_k(rot);
    let upper = k.pow(2);
    let lower = match variant {
        BoundVariant::Chain => &d.pow(3) * &k,
        BoundVariant::Corrected => &d.pow(3) * &triple_prob_p(rot),
    };
    BoundsPair {
        lower,
        upper,
        variant,
    }
}

/// Quarter-round bounds raised to `4 * rounds`, assuming each round sees
/// independent uniform input. The independence is a heuristic.
pub fn multi_round_bounds(
    rot: RotAmount,
    rounds: u32,
    variant: BoundVariant,
) -> Result<BoundsPair> {
    if rounds == 0 {
        return Err(domain("rounds", 0, "must be at least 1"));
    }
    let qr = qr_bounds(rot, variant);
    let e = QUARTER_ROUNDS_PER_ROUND * rounds;
    Ok(BoundsPair {
        lower: qr.lower.pow(e),
        upper: qr.upper.pow(e),
        variant,
    })
}

fn check_words(k: u32) -> Result<()> {
    if k == 0 {
        return Err(domain("k", 0, "word count must be at least 1"));
    }
    Ok(())
}

/// Number of `k`-word vectors fixed by the parallel rotation: `2^(k gcd(w, r))`.
pub fn fixed_string_count(rot: RotAmount, k: u32) -> Result<BigUint> {
    check_words(k)?;
    let g = rot.word_bits().gcd(&rot.get()) as u64;
    Ok(BigUint::one() << (k as u64 * g))
}

/// Expected number of rotational collisions of a uniform permutation of
/// `k`-word vectors. May exceed one.
pub fn expected_collisions(rot: RotAmount, k: u32) -> Result<BigRational> {
    check_words(k)?;
    let space = pow2(rot.word_bits() as u64 * k as u64);
    let fixed = BigInt::from(fixed_string_count(rot, k)?);
    let num = &space + &fixed * &fixed - BigInt::from(2) * &fixed;
    Ok(ratio(num, space - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(w: u32, r: u32) -> RotAmount {
        RotAmount::of(w, r).unwrap()
    }

    fn q(n: i64, d: i64) -> ExactProb {
        ExactProb::new(n, d).unwrap()
    }

    /// Direct enumeration of `y in [0, 2^q)^k` with `sum mod 2^w < 2^q`.
    fn f_count_by_enumeration(q: u32, k: u32, w: u32) -> u64 {
        let block = 1u64 << q;
        let modulus = 1u64 << w;
        let mut count = 0;
        let total = block.pow(k);
        for idx in 0..total {
            let mut rest = idx;
            let mut sum = 0;
            for _ in 0..k {
                sum += rest % block;
                rest /= block;
            }
            if sum % modulus < block {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn binomial_edges() {
        let b = |n: i64, k: i64| binomial(&n.into(), &k.into());
        assert_eq!(b(10, 3), 120.into());
        assert_eq!(b(10, 7), 120.into());
        assert_eq!(b(5, 0), 1.into());
        assert_eq!(b(5, 6), 0.into());
        assert_eq!(b(-1, 0), 0.into());
        assert_eq!(b(4, -1), 0.into());
        let huge = pow2(31);
        assert_eq!(
            binomial(&huge, &(&huge - 3)),
            &huge * (&huge - 1) * (&huge - 2) / 6
        );
    }

    #[test]
    fn f_count_examples() {
        for w in 3..=12 {
            assert_eq!(f_count(1, 3, w).unwrap(), 4u32.into());
        }
        assert_eq!(f_count(1, 2, 4).unwrap(), 3u32.into());
        assert_eq!(f_count(3, 2, 4).unwrap(), 36u32.into());
        assert_eq!(f_count(2, 3, 6).unwrap(), 20u32.into());
        assert_eq!(f_count(3, 3, 4).unwrap(), 176u32.into());
    }

    #[test]
    fn f_count_matches_enumeration() {
        for w in 2..=6 {
            for q in 1..w {
                for k in 2..=4 {
                    if q * k > 18 {
                        continue;
                    }
                    assert_eq!(
                        f_count(q, k, w).unwrap(),
                        f_count_by_enumeration(q, k, w).into(),
                        "q={q} k={k} w={w}"
                    );
                }
            }
        }
    }

    #[test]
    fn f_count_domain() {
        assert!(f_count(0, 3, 4).is_err());
        assert!(f_count(4, 3, 4).is_err());
        assert!(f_count(1, 1, 4).is_err());
    }

    #[test]
    fn daum_examples() {
        assert_eq!(daum_prob(rot(4, 1)), q(27, 64));
        assert_eq!(daum_prob(rot(4, 3)), q(27, 64));
        let expected = ExactProb::new(BigInt::from(3) * (pow2(31) + 1), pow2(34)).unwrap();
        assert_eq!(daum_prob(rot(32, 1)), expected);
        assert!((expected.to_f64() - 0.375).abs() < 1e-9);
    }

    #[test]
    fn multi_add_examples() {
        assert_eq!(multi_add_rot_prob(rot(4, 1), 2).unwrap(), q(27, 64));
        assert_eq!(multi_add_rot_prob(rot(4, 2), 3).unwrap(), q(25, 256));
        assert_eq!(multi_add_rot_prob(rot(4, 1), 3).unwrap(), q(11, 64));
        assert!(multi_add_rot_prob(rot(4, 1), 1).is_err());
    }

    #[test]
    fn triple_and_chain_examples() {
        assert_eq!(triple_prob_p(rot(4, 2)), q(25, 256));
        assert_eq!(triple_prob_p(rot(4, 1)), q(11, 64));
        assert_eq!(chain_prob_k(rot(4, 1)), q(15, 128));
        assert_eq!(chain_prob_k(rot(4, 2)), q(25, 256));
        assert!(chain_prob_k(rot(5, 1)) < triple_prob_p(rot(5, 1)));

        // P(1, w) = 4 (2^(2w-3) + 1) / (3 * 2^(2w))
        for w in [3u32, 8, 32] {
            let closed = ExactProb::new(
                BigInt::from(4) * (pow2(2 * w as u64 - 3) + 1),
                BigInt::from(3) * pow2(2 * w as u64),
            )
            .unwrap();
            assert_eq!(triple_prob_p(rot(w, 1)), closed);
            assert_eq!(triple_prob_p(rot(w, w - 1)), closed);
        }
        assert_eq!(
            triple_prob_p(rot(32, 1)),
            multi_add_rot_prob(rot(32, 1), 3).unwrap()
        );
        assert!((triple_prob_p(rot(32, 1)).to_f64() - 1.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn qr_bounds_table_values() {
        let b = qr_bounds(rot(4, 1), BoundVariant::Chain);
        assert_eq!(b.lower.render().decimal, "0.00880");
        assert_eq!(b.upper.render().decimal, "0.01373");
        let b = qr_bounds(rot(6, 3), BoundVariant::Chain);
        assert_eq!(b.lower.render().decimal, "0.00174");
        assert_eq!(b.upper.render().decimal, "0.00302");
        let b = qr_bounds(rot(4, 1), BoundVariant::Corrected);
        assert_eq!(b.lower, &q(27, 64).pow(3) * &q(11, 64));
        assert!((b.lower.to_f64() - 0.012906).abs() < 2e-6);
        assert_eq!(b.lower.render().decimal, "0.01291");
    }

    #[test]
    fn corrected_ordering_breaks_at_extreme_rotations() {
        assert!(qr_bounds(rot(4, 1), BoundVariant::Corrected).is_ordered());
        for w in 5..=8 {
            assert!(!qr_bounds(rot(w, 1), BoundVariant::Corrected).is_ordered());
            assert!(!qr_bounds(rot(w, w - 1), BoundVariant::Corrected).is_ordered());
        }
    }

    #[test]
    fn multi_round_spot_values() {
        let check = |i: u32, lo: f64, up: f64| {
            let b = multi_round_bounds(rot(32, 1), i, BoundVariant::Corrected).unwrap();
            assert!(
                (b.lower.log2() - lo).abs() <= 0.01,
                "round {i}: {}",
                b.lower.log2()
            );
            assert!(
                (b.upper.log2() - up).abs() <= 0.01,
                "round {i}: {}",
                b.upper.log2()
            );
        };
        check(1, -27.32, -28.68);
        check(17, -464.45, -487.55);
        check(20, -546.41, -573.59);
        assert!(multi_round_bounds(rot(32, 1), 0, BoundVariant::Chain).is_err());
    }

    #[test]
    fn fixed_strings_by_enumeration() {
        let count = |w: u32, k: u32, r: u32| -> u64 {
            let spec = crate::arx::WordSpec::new(w).unwrap();
            (0..1u64 << (w * k))
                .filter(|&idx| {
                    (0..k).all(|i| {
                        let x = ((idx >> (i * w)) as u32) & spec.mask();
                        spec.rotl(x, r) == x
                    })
                })
                .count() as u64
        };
        for (w, k, r) in [
            (4, 1, 2),
            (4, 1, 1),
            (2, 2, 1),
            (6, 2, 2),
            (6, 1, 3),
            (4, 3, 2),
        ] {
            assert_eq!(
                fixed_string_count(rot(w, r), k).unwrap(),
                count(w, k, r).into(),
                "w={w} k={k} r={r}"
            );
        }
        assert_eq!(fixed_string_count(rot(4, 2), 1).unwrap(), 4u32.into());
        assert_eq!(fixed_string_count(rot(4, 1), 1).unwrap(), 2u32.into());
        assert_eq!(fixed_string_count(rot(2, 1), 2).unwrap(), 4u32.into());
        assert!(fixed_string_count(rot(2, 1), 0).is_err());
    }

    #[test]
    fn expected_collision_values() {
        assert_eq!(
            expected_collisions(rot(2, 1), 1).unwrap(),
            ratio(4.into(), 3.into())
        );
        assert_eq!(
            expected_collisions(rot(2, 2 - 1), 2).unwrap(),
            ratio(8.into(), 5.into())
        );
        let e = expected_collisions(rot(32, 1), 4).unwrap();
        let gap = (e - BigRational::one()).abs();
        assert!(gap < ratio(1.into(), pow2(100)));
    }
}
