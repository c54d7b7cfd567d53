//! Word-size-generic ChaCha quarter round, column/diagonal rounds and the
//! multi-round permutation.
//!
//! Words are stored in `u32` and reduced modulo `2^w`, with `w` chosen at
//! runtime so that the same engine runs toy (`w = 4`) and full (`w = 32`)
//! instances.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Word size in bits, `2 <= w <= 32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct WordSpec {
    bits: u32,
}

impl WordSpec {
    pub const CHACHA: WordSpec = WordSpec { bits: 32 };

    pub fn new(bits: u32) -> Result<Self> {
        if !(2..=32).contains(&bits) {
            return Err(Error::WordSize(bits));
        }
        Ok(WordSpec { bits })
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn mask(self) -> u32 {
        u32::MAX >> (32 - self.bits)
    }

    /// Number of lowercase hex digits used to print one word.
    pub fn hex_digits(self) -> usize {
        self.bits.div_ceil(4) as usize
    }

    pub fn check_word(self, value: u64) -> Result<u32> {
        if value > self.mask() as u64 {
            return Err(Error::WordOverflow {
                value,
                w: self.bits,
            });
        }
        Ok(value as u32)
    }

    /// Validated rotation amount in `1..=w-1`.
    pub fn rot(self, r: u32) -> Result<RotAmount> {
        RotAmount::new(self, r)
    }

    /// Left rotation by `r` within `w` bits. `x` must already be reduced and
    /// `r < w`.
    #[inline(always)]
    pub fn rotl(self, x: u32, r: u32) -> u32 {
        debug_assert!(r < self.bits && x <= self.mask());
        if r == 0 {
            x
        } else {
            ((x << r) | (x >> (self.bits - r))) & self.mask()
        }
    }

    #[inline(always)]
    pub fn rotr(self, x: u32, r: u32) -> u32 {
        if r == 0 {
            x
        } else {
            self.rotl(x, self.bits - r)
        }
    }

    #[inline(always)]
    pub fn add(self, a: u32, b: u32) -> u32 {
        a.wrapping_add(b) & self.mask()
    }

    #[inline(always)]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        a.wrapping_sub(b) & self.mask()
    }

    /// Checked rotation of a single word, `0 <= r <= w-1`.
    pub fn rotate(self, x: u64, r: u32) -> Result<u32> {
        self.check_shift(r)?;
        Ok(self.rotl(self.check_word(x)?, r))
    }

    /// Parallel rotation of a word vector.
    pub fn rotate_vec(self, x: WordVec4, r: u32) -> Result<WordVec4> {
        self.check_shift(r)?;
        for &word in &x {
            self.check_word(word as u64)?;
        }
        Ok(x.map(|word| self.rotl(word, r)))
    }

    fn check_shift(self, r: u32) -> Result<()> {
        if r >= self.bits {
            return Err(Error::Rotation {
                r,
                w: self.bits,
                min: 0,
                max: self.bits - 1,
            });
        }
        Ok(())
    }
}

impl TryFrom<u32> for WordSpec {
    type Error = Error;

    fn try_from(bits: u32) -> Result<Self> {
        WordSpec::new(bits)
    }
}

impl From<WordSpec> for u32 {
    fn from(spec: WordSpec) -> u32 {
        spec.bits
    }
}

/// A rotation distance `1 <= r <= w-1` bound to its word size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RotAmount {
    spec: WordSpec,
    r: u32,
}

impl RotAmount {
    pub fn new(spec: WordSpec, r: u32) -> Result<Self> {
        if r == 0 || r >= spec.bits() {
            return Err(Error::Rotation {
                r,
                w: spec.bits(),
                min: 1,
                max: spec.bits() - 1,
            });
        }
        Ok(RotAmount { spec, r })
    }

    /// Shorthand for `RotAmount::new(WordSpec::new(w)?, r)`.
    pub fn of(w: u32, r: u32) -> Result<Self> {
        RotAmount::new(WordSpec::new(w)?, r)
    }

    #[inline]
    pub fn spec(self) -> WordSpec {
        self.spec
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.r
    }

    #[inline]
    pub fn word_bits(self) -> u32 {
        self.spec.bits()
    }

    /// The complementary rotation `w - r`.
    pub fn complement(self) -> RotAmount {
        RotAmount {
            spec: self.spec,
            r: self.spec.bits() - self.r,
        }
    }

    #[inline(always)]
    pub fn apply(self, x: u32) -> u32 {
        self.spec.rotl(x, self.r)
    }
}

pub type WordVec4 = [u32; 4];

/// Word size plus the four rotation constants of one quarter round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuarterRoundParams {
    spec: WordSpec,
    rots: [u32; 4],
}

impl QuarterRoundParams {
    /// `w = 32`, `(16, 12, 8, 7)`.
    pub const CHACHA: QuarterRoundParams = QuarterRoundParams {
        spec: WordSpec::CHACHA,
        rots: [16, 12, 8, 7],
    };

    pub fn new(spec: WordSpec, rots: [u32; 4]) -> Result<Self> {
        for &r in &rots {
            spec.check_shift(r)?;
        }
        Ok(QuarterRoundParams { spec, rots })
    }

    pub fn toy(w: u32, rots: [u32; 4]) -> Result<Self> {
        QuarterRoundParams::new(WordSpec::new(w)?, rots)
    }

    #[inline]
    pub fn spec(&self) -> WordSpec {
        self.spec
    }

    #[inline]
    pub fn rots(&self) -> [u32; 4] {
        self.rots
    }

    /// Same word size and first three constants, different `r4`.
    pub fn with_r4(&self, r4: u32) -> Result<Self> {
        let [r1, r2, r3, _] = self.rots;
        QuarterRoundParams::new(self.spec, [r1, r2, r3, r4])
    }
}

impl Default for QuarterRoundParams {
    fn default() -> Self {
        QuarterRoundParams::CHACHA
    }
}

/// Intermediate words of one quarter-round evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QrTrace {
    pub b0: u32,
    pub b1: u32,
    pub b2: u32,
    pub b3: u32,
    pub y: WordVec4,
}

#[inline(always)]
pub fn quarter_round_trace(params: &QuarterRoundParams, x: WordVec4) -> QrTrace {
    let s = params.spec;
    let [r1, r2, r3, r4] = params.rots;
    let [x0, x1, x2, x3] = x;
    let b0 = s.add(x0, x1);
    let b3 = s.rotl(b0 ^ x3, r1);
    let b2 = s.add(b3, x2);
    let b1 = s.rotl(b2 ^ x1, r2);
    let y0 = s.add(b0, b1);
    let y3 = s.rotl(y0 ^ b3, r3);
    let y2 = s.add(y3, b2);
    let y1 = s.rotl(y2 ^ b1, r4);
    QrTrace {
        b0,
        b1,
        b2,
        b3,
        y: [y0, y1, y2, y3],
    }
}

#[inline(always)]
pub fn quarter_round(params: &QuarterRoundParams, x: WordVec4) -> WordVec4 {
    quarter_round_trace(params, x).y
}

pub fn inverse_quarter_round(params: &QuarterRoundParams, y: WordVec4) -> WordVec4 {
    let s = params.spec;
    let [r1, r2, r3, r4] = params.rots;
    let [y0, y1, y2, y3] = y;
    let b1 = s.rotr(y1, r4) ^ y2;
    let b2 = s.sub(y2, y3);
    let b3 = s.rotr(y3, r3) ^ y0;
    let b0 = s.sub(y0, b1);
    let x1 = s.rotr(b1, r2) ^ b2;
    let x2 = s.sub(b2, b3);
    let x3 = s.rotr(b3, r1) ^ b0;
    let x0 = s.sub(b0, x1);
    [x0, x1, x2, x3]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    Column,
    Diagonal,
}

impl RoundKind {
    /// Kind of the `index`-th round (1-based): odd rounds are column rounds.
    pub fn of_round(index: usize) -> RoundKind {
        if index % 2 == 1 {
            RoundKind::Column
        } else {
            RoundKind::Diagonal
        }
    }

    /// Cell coordinates `(row, col)` of the four words fed to quarter round
    /// number `lane`.
    #[inline]
    pub fn lane_cells(self, lane: usize) -> [(usize, usize); 4] {
        match self {
            RoundKind::Column => [(0, lane), (1, lane), (2, lane), (3, lane)],
            RoundKind::Diagonal => [
                (0, lane),
                (1, (lane + 1) % 4),
                (2, (lane + 2) % 4),
                (3, (lane + 3) % 4),
            ],
        }
    }
}

/// 4x4 matrix of `w`-bit words, stored row-major.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct State {
    words: [u32; 16],
}

impl State {
    pub const ZERO: State = State { words: [0; 16] };

    pub fn new(spec: WordSpec, words: [u32; 16]) -> Result<Self> {
        for &word in &words {
            spec.check_word(word as u64)?;
        }
        Ok(State { words })
    }

    pub(crate) fn from_words_unchecked(words: [u32; 16]) -> Self {
        State { words }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.words[4 * row + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u32) {
        self.words[4 * row + col] = value;
    }

    pub fn words(&self) -> &[u32; 16] {
        &self.words
    }

    pub fn column(&self, col: usize) -> WordVec4 {
        [
            self.get(0, col),
            self.get(1, col),
            self.get(2, col),
            self.get(3, col),
        ]
    }

    /// Parallel rotation of every word by `r`, `0 <= r <= w-1`.
    pub fn rotate(&self, spec: WordSpec, r: u32) -> Result<State> {
        spec.check_shift(r)?;
        for &word in &self.words {
            spec.check_word(word as u64)?;
        }
        Ok(self.rotated(spec, r))
    }

    #[inline]
    pub(crate) fn rotated(&self, spec: WordSpec, r: u32) -> State {
        State {
            words: self.words.map(|word| spec.rotl(word, r)),
        }
    }

    /// Space-separated fixed-width lowercase hex, row-major.
    pub fn to_hex(&self, spec: WordSpec) -> String {
        let digits = spec.hex_digits();
        self.words
            .iter()
            .map(|word| format!("{word:0digits$x}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn from_hex(spec: WordSpec, text: &str) -> Result<State> {
        let digits = spec.hex_digits();
        let mut words = [0u32; 16];
        let mut count = 0;
        for token in text.split_whitespace() {
            if count == 16 {
                return Err(Error::Parse("more than 16 words".into()));
            }
            if token.len() != digits {
                return Err(Error::Parse(format!(
                    "word {token:?} must have exactly {digits} hex digits"
                )));
            }
            if !token
                .bytes()
                .all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
            {
                return Err(Error::Parse(format!("word {token:?} is not lowercase hex")));
            }
            let value = u64::from_str_radix(token, 16)
                .map_err(|e| Error::Parse(format!("{token:?}: {e}")))?;
            words[count] = spec.check_word(value)?;
            count += 1;
        }
        if count != 16 {
            return Err(Error::Parse(format!("expected 16 words, found {count}")));
        }
        Ok(State { words })
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("State").field("words", &self.words).finish()
    }
}

pub fn round(params: &QuarterRoundParams, x: &State, kind: RoundKind) -> State {
    let mut out = *x;
    for lane in 0..4 {
        let cells = kind.lane_cells(lane);
        let input = cells.map(|(row, col)| x.get(row, col));
        let y = quarter_round(params, input);
        for ((row, col), value) in cells.into_iter().zip(y) {
            out.set(row, col, value);
        }
    }
    out
}

/// `rounds` alternating rounds starting with a column round; zero rounds is
/// the identity.
pub fn permute_rounds(params: &QuarterRoundParams, x: &State, rounds: usize) -> State {
    (1..=rounds).fold(*x, |state, i| round(params, &state, RoundKind::of_round(i)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> QuarterRoundParams {
        QuarterRoundParams::toy(4, [1, 3, 2, 1]).unwrap()
    }

    #[test]
    fn rotate_examples() {
        let w4 = WordSpec::new(4).unwrap();
        assert_eq!(w4.rotate(0b0001, 1).unwrap(), 0b0010);
        assert_eq!(w4.rotate(0b1011, 0).unwrap(), 0b1011);
        assert_eq!(WordSpec::CHACHA.rotate(0x8000_0000, 1).unwrap(), 1);
    }

    #[test]
    fn rotate_rejects_bad_input() {
        let w4 = WordSpec::new(4).unwrap();
        assert!(matches!(w4.rotate(1, 4), Err(Error::Rotation { .. })));
        assert!(matches!(w4.rotate(16, 1), Err(Error::WordOverflow { .. })));
        assert!(w4.rotate_vec([0, 0, 0, 17], 1).is_err());
        assert!(WordSpec::new(1).is_err());
        assert!(WordSpec::new(33).is_err());
        assert!(RotAmount::of(4, 0).is_err());
        assert!(RotAmount::of(4, 4).is_err());
    }

    #[test]
    fn rotate_inverse_exhaustive_small_words() {
        for w in 2..=8 {
            let spec = WordSpec::new(w).unwrap();
            for r in 0..w {
                for x in 0..=spec.mask() {
                    let back = spec.rotl(spec.rotl(x, r), (w - r) % w);
                    assert_eq!(back, x);
                }
            }
        }
    }

    #[test]
    fn rfc8439_quarter_round_vector() {
        let y = quarter_round(
            &QuarterRoundParams::CHACHA,
            [0x11111111, 0x01020304, 0x9b8d6f43, 0x01234567],
        );
        assert_eq!(y, [0xea2a92f4, 0xcb1cf8ce, 0x4581472e, 0x5881c4bb]);
    }

    #[test]
    fn toy_quarter_round_by_hand() {
        let t = quarter_round_trace(&toy(), [1, 0, 0, 0]);
        assert_eq!((t.b0, t.b3, t.b2, t.b1), (1, 2, 2, 1));
        assert_eq!(t.y, [2, 6, 2, 0]);
        assert_eq!(inverse_quarter_round(&toy(), [2, 6, 2, 0]), [1, 0, 0, 0]);
    }

    #[test]
    fn zero_is_preserved() {
        for params in [toy(), QuarterRoundParams::CHACHA] {
            let t = quarter_round_trace(&params, [0; 4]);
            assert_eq!((t.b0, t.b1, t.b2, t.b3, t.y), (0, 0, 0, 0, [0; 4]));
            assert_eq!(inverse_quarter_round(&params, [0; 4]), [0; 4]);
        }
        for i in 0..=20 {
            assert_eq!(
                permute_rounds(&QuarterRoundParams::CHACHA, &State::ZERO, i),
                State::ZERO
            );
        }
    }

    #[test]
    fn column_round_touches_only_column_zero() {
        let mut x = State::ZERO;
        x.set(0, 0, 1);
        let y = round(&toy(), &x, RoundKind::Column);
        let mut expected = State::ZERO;
        for (row, v) in [2, 6, 2, 0].into_iter().enumerate() {
            expected.set(row, 0, v);
        }
        assert_eq!(y, expected);
        assert_eq!(
            round(&toy(), &State::ZERO, RoundKind::Diagonal),
            State::ZERO
        );
    }

    #[test]
    fn hex_encoding() {
        let w4 = WordSpec::new(4).unwrap();
        let w6 = WordSpec::new(6).unwrap();
        let mut words = [0u32; 16];
        words[0] = 0xa;
        words[15] = 0x3f;
        let s = State::new(w6, words).unwrap();
        let text = s.to_hex(w6);
        assert!(text.starts_with("0a 00"));
        assert!(text.ends_with(" 3f"));
        assert_eq!(State::from_hex(w6, &text).unwrap(), s);
        assert!(State::from_hex(w4, "0 0 0").is_err());
        assert!(State::from_hex(w6, &text.to_uppercase()).is_err());
        assert!(State::from_hex(w4, &["f"; 16].join(" ")).is_ok());
        // two digits at w=6 still overflow when > 0x3f
        let mut bad = vec!["00"; 16];
        bad[3] = "40";
        assert!(matches!(
            State::from_hex(w6, &bad.join(" ")),
            Err(Error::WordOverflow { .. })
        ));
    }
}
