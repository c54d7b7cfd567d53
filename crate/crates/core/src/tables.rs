//! Configurations and row builders for the toy-size census table and the
//! full-size multi-round bound table.

use num_bigint::BigInt;
use num_traits::One;

use crate::arx::{QuarterRoundParams, RotAmount};
use crate::bounds::{multi_round_bounds, qr_bounds, BoundVariant, BoundsPair};
use crate::error::Result;
use crate::exact::ExactProb;
use crate::search::{qr_census, CensusResult, SearchOptions};

/// One toy configuration: word size, rotation constants, rotation amount.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CensusRowSpec {
    pub word_bits: u32,
    pub rots: [u32; 4],
    pub rot: u32,
    /// Published collision count.
    pub golden_count: u64,
}

pub const TABLE1_ROWS: [CensusRowSpec; 7] = [
    CensusRowSpec {
        word_bits: 4,
        rots: [1, 3, 2, 1],
        rot: 1,
        golden_count: 747,
    },
    CensusRowSpec {
        word_bits: 4,
        rots: [1, 3, 2, 1],
        rot: 2,
        golden_count: 388,
    },
    CensusRowSpec {
        word_bits: 5,
        rots: [4, 3, 2, 1],
        rot: 1,
        golden_count: 8917,
    },
    CensusRowSpec {
        word_bits: 5,
        rots: [4, 3, 2, 1],
        rot: 2,
        golden_count: 3405,
    },
    CensusRowSpec {
        word_bits: 6,
        rots: [5, 3, 2, 1],
        rot: 1,
        golden_count: 123317,
    },
    CensusRowSpec {
        word_bits: 6,
        rots: [5, 3, 2, 1],
        rot: 2,
        golden_count: 39482,
    },
    CensusRowSpec {
        word_bits: 6,
        rots: [5, 3, 2, 1],
        rot: 3,
        golden_count: 32628,
    },
];

impl CensusRowSpec {
    pub fn params(&self) -> QuarterRoundParams {
        QuarterRoundParams::toy(self.word_bits, self.rots).expect("table configuration is valid")
    }

    pub fn rot_amount(&self) -> RotAmount {
        RotAmount::of(self.word_bits, self.rot).expect("table configuration is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub spec: CensusRowSpec,
    pub count: u64,
    pub measured: ExactProb,
    pub bounds: BoundsPair,
    /// Rotational-collision probability of a random permutation, `2^(-4w)`.
    pub random_p: ExactProb,
}

impl CensusRow {
    fn build(spec: CensusRowSpec, count: u64, variant: BoundVariant) -> Self {
        let bits = 4 * spec.word_bits;
        let total = BigInt::one() << bits;
        CensusRow {
            spec,
            count,
            measured: ExactProb::new(count, total.clone()).expect("count <= total"),
            bounds: qr_bounds(spec.rot_amount(), variant),
            random_p: ExactProb::new(1, total).expect("positive"),
        }
    }

    pub fn from_census(spec: CensusRowSpec, census: &CensusResult, variant: BoundVariant) -> Self {
        CensusRow::build(spec, census.count, variant)
    }
}

/// Runs the exhaustive census for every toy row.
pub fn census_table(opts: &SearchOptions, variant: BoundVariant) -> Result<Vec<CensusRow>> {
    TABLE1_ROWS
        .iter()
        .map(|spec| {
            let census = qr_census(&spec.params(), spec.rot_amount(), opts)?;
            Ok(CensusRow::from_census(*spec, &census, variant))
        })
        .collect()
}

/// Same rows from the stored published counts, without running the census.
pub fn census_table_golden(variant: BoundVariant) -> Vec<CensusRow> {
    TABLE1_ROWS
        .iter()
        .map(|spec| CensusRow::build(*spec, spec.golden_count, variant))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundBoundRow {
    pub round: u32,
    pub bounds: BoundsPair,
}

/// Multi-round bounds for rounds `first..=last`.
pub fn round_bound_table(
    rot: RotAmount,
    first: u32,
    last: u32,
    variant: BoundVariant,
) -> Result<Vec<RoundBoundRow>> {
    (first..=last)
        .map(|round| {
            Ok(RoundBoundRow {
                round,
                bounds: multi_round_bounds(rot, round, variant)?,
            })
        })
        .collect()
}

/// Published `log2` values for `w = 32`, `r = 1`, rounds 1..=20, as
/// `(lower, upper)` pairs.
pub const TABLE2_LOG2: [(f64, f64); 20] = [
    (-27.32, -28.68),
    (-54.64, -57.36),
    (-81.96, -86.04),
    (-109.28, -114.72),
    (-136.60, -143.40),
    (-163.92, -172.08),
    (-191.24, -200.76),
    (-218.56, -229.44),
    (-245.88, -258.12),
    (-273.20, -286.80),
    (-300.52, -315.48),
    (-327.84, -344.16),
    (-355.16, -372.84),
    (-382.48, -401.52),
    (-409.80, -430.20),
    (-437.12, -458.88),
    (-464.45, -487.55),
    (-491.77, -516.23),
    (-519.09, -544.91),
    (-546.41, -573.59),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_rows_have_published_columns() {
        let rows = census_table_golden(BoundVariant::Chain);
        let first = &rows[0];
        assert_eq!(first.measured.render().decimal, "0.01140");
        assert_eq!(first.bounds.lower.render().decimal, "0.00880");
        assert_eq!(first.random_p.render().log2, "~2^-16.00");
        assert_eq!(rows[6].random_p.render().log2, "~2^-24.00");
    }

    #[test]
    fn table2_rows() {
        let rows = round_bound_table(
            RotAmount::of(32, 1).unwrap(),
            1,
            20,
            BoundVariant::Corrected,
        )
        .unwrap();
        assert_eq!(rows.len(), 20);
        for (row, (lo, up)) in rows.iter().zip(TABLE2_LOG2) {
            assert!(
                (row.bounds.lower.log2() - lo).abs() <= 0.01,
                "{}",
                row.round
            );
            assert!(
                (row.bounds.upper.log2() - up).abs() <= 0.01,
                "{}",
                row.round
            );
        }
    }
}
