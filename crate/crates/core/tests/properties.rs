use chacha_rot::arx::{
    inverse_quarter_round, permute_rounds, quarter_round, quarter_round_trace, round,
    QuarterRoundParams, RotAmount, RoundKind, State, WordSpec,
};
use chacha_rot::bounds::{
    chain_prob_k, daum_prob, multi_add_rot_prob, multi_round_bounds, qr_bounds, triple_prob_p,
    BoundVariant,
};
use chacha_rot::rng;
use chacha_rot::search::{qr_census, random_state, SearchOptions};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = QuarterRoundParams> {
    (2u32..=32).prop_flat_map(|w| {
        prop::array::uniform4(0..w).prop_map(move |rots| QuarterRoundParams::toy(w, rots).unwrap())
    })
}

fn rot(w: u32, r: u32) -> RotAmount {
    RotAmount::of(w, r).unwrap()
}

proptest! {
    #[test]
    fn inverse_undoes_quarter_round(params in params_strategy(), raw in prop::array::uniform4(any::<u32>())) {
        let x = raw.map(|v| v & params.spec().mask());
        prop_assert_eq!(inverse_quarter_round(&params, quarter_round(&params, x)), x);
        prop_assert_eq!(quarter_round(&params, inverse_quarter_round(&params, x)), x);
    }

    #[test]
    fn rotation_round_trip(w in 2u32..=32, r_seed in any::<u32>(), raw in any::<u32>()) {
        let spec = WordSpec::new(w).unwrap();
        let r = r_seed % w;
        let x = raw & spec.mask();
        let once = spec.rotate(x as u64, r).unwrap();
        prop_assert_eq!(spec.rotate(once as u64, (w - r) % w).unwrap(), x);
    }

    #[test]
    fn parallel_rotation_commutes_with_columns(seed in any::<u64>(), w in 2u32..=32, r_seed in any::<u32>()) {
        let spec = WordSpec::new(w).unwrap();
        let r = r_seed % w;
        let x = random_state(&mut rng::seeded(seed), spec);
        let rotated = x.rotate(spec, r).unwrap();
        for col in 0..4 {
            prop_assert_eq!(rotated.column(col), spec.rotate_vec(x.column(col), r).unwrap());
        }
    }

    #[test]
    fn hex_round_trip(seed in any::<u64>(), w in 2u32..=32) {
        let spec = WordSpec::new(w).unwrap();
        let x = random_state(&mut rng::seeded(seed), spec);
        prop_assert_eq!(State::from_hex(spec, &x.to_hex(spec)).unwrap(), x);
    }
}

#[test]
fn trace_agrees_with_quarter_round() {
    let mut g = rng::seeded(1);
    for params in [
        QuarterRoundParams::CHACHA,
        QuarterRoundParams::toy(4, [1, 3, 2, 1]).unwrap(),
    ] {
        let spec = params.spec();
        for _ in 0..10_000 {
            let x = [0; 4].map(|_: u32| rng::word(&mut g, spec));
            assert_eq!(quarter_round_trace(&params, x).y, quarter_round(&params, x));
        }
    }
}

/// Straight-line diagonal round written out cell by cell.
fn diagonal_round_scalar(params: &QuarterRoundParams, x: &State) -> State {
    let w = *x.words();
    let mut out = w;
    let lanes = [[0, 5, 10, 15], [1, 6, 11, 12], [2, 7, 8, 13], [3, 4, 9, 14]];
    for lane in lanes {
        let y = quarter_round(params, [w[lane[0]], w[lane[1]], w[lane[2]], w[lane[3]]]);
        for (cell, v) in lane.into_iter().zip(y) {
            out[cell] = v;
        }
    }
    State::new(params.spec(), out).unwrap()
}

#[test]
fn diagonal_round_matches_scalar_oracle() {
    let mut g = rng::seeded(2);
    for params in [
        QuarterRoundParams::CHACHA,
        QuarterRoundParams::toy(5, [4, 3, 2, 1]).unwrap(),
    ] {
        for _ in 0..1000 {
            let x = random_state(&mut g, params.spec());
            assert_eq!(
                round(&params, &x, RoundKind::Diagonal),
                diagonal_round_scalar(&params, &x)
            );
        }
    }
}

#[test]
fn two_rounds_are_column_then_diagonal() {
    let params = QuarterRoundParams::CHACHA;
    let mut g = rng::seeded(3);
    for _ in 0..1000 {
        let x = random_state(&mut g, params.spec());
        let expected = round(
            &params,
            &round(&params, &x, RoundKind::Column),
            RoundKind::Diagonal,
        );
        assert_eq!(permute_rounds(&params, &x, 2), expected);
        assert_eq!(permute_rounds(&params, &x, 0), x);
    }
}

#[test]
fn census_symmetric_in_rotation_amount() {
    for (w, rots) in [(3, [1, 2, 1, 1]), (4, [1, 3, 2, 1]), (5, [4, 3, 2, 1])] {
        let params = QuarterRoundParams::toy(w, rots).unwrap();
        for r in 1..w {
            let a = qr_census(&params, rot(w, r), &SearchOptions::default()).unwrap();
            let b = qr_census(&params, rot(w, w - r), &SearchOptions::default()).unwrap();
            assert_eq!(a.count, b.count, "w={w} r={r}");
        }
    }
}

#[test]
fn formula_symmetries_and_reductions() {
    for w in 2..=16 {
        for r in 1..w {
            let (a, b) = (rot(w, r), rot(w, w - r));
            assert_eq!(daum_prob(a), daum_prob(b));
            assert_eq!(
                multi_add_rot_prob(a, 2).unwrap(),
                daum_prob(a),
                "w={w} r={r}"
            );
            assert_eq!(
                multi_add_rot_prob(a, 3).unwrap(),
                multi_add_rot_prob(b, 3).unwrap()
            );
            assert_eq!(
                multi_add_rot_prob(a, 4).unwrap(),
                multi_add_rot_prob(b, 4).unwrap()
            );
        }
    }
}

#[test]
fn closed_form_triple_equals_general_formula() {
    for w in 2..=8 {
        for r in 1..w {
            assert_eq!(
                triple_prob_p(rot(w, r)),
                multi_add_rot_prob(rot(w, r), 3).unwrap(),
                "w={w} r={r}"
            );
        }
    }
}

#[test]
fn triple_exceeds_chain_only_at_extreme_rotations() {
    for w in 3..=16 {
        for r in 1..w {
            let (p, k) = (triple_prob_p(rot(w, r)), chain_prob_k(rot(w, r)));
            if r == 1 || r == w - 1 {
                assert!(p > k, "w={w} r={r}");
            } else {
                assert_eq!(p, k, "w={w} r={r}");
            }
        }
    }
}

#[test]
fn bound_ordering() {
    for w in 2..=8 {
        for r in 1..w {
            assert!(
                qr_bounds(rot(w, r), BoundVariant::Chain).is_ordered(),
                "w={w} r={r}"
            );
            let corrected = qr_bounds(rot(w, r), BoundVariant::Corrected);
            // the corrected lower bound overtakes the upper bound at the
            // extreme rotations once w >= 5
            let extreme = r == 1 || r == w - 1;
            assert_eq!(corrected.is_ordered(), !(extreme && w >= 5), "w={w} r={r}");
        }
    }
}

#[test]
fn multi_round_bounds_decay() {
    for (w, r) in [(4, 1), (6, 3), (32, 1), (32, 7)] {
        for variant in [BoundVariant::Chain, BoundVariant::Corrected] {
            let mut prev = multi_round_bounds(rot(w, r), 1, variant).unwrap();
            for i in 2..=20 {
                let next = multi_round_bounds(rot(w, r), i, variant).unwrap();
                assert!(next.lower < prev.lower && next.upper < prev.upper);
                prev = next;
            }
        }
    }
}

proptest! {
    #[test]
    fn exact_prob_json_round_trip(num in 0u64..1_000_000, extra in 0u64..1_000_000, shift in 0u32..200) {
        let den = num_bigint::BigInt::from(num + extra + 1) << shift;
        let p = chacha_rot::ExactProb::new(num, den).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<chacha_rot::ExactProb>(&json).unwrap(), p);
    }
}

#[test]
fn serde_rejects_invalid_values() {
    let above_one = r#"{"num":"3","den":"2","decimal":"1.50000","log2":"~2^0.58"}"#;
    assert!(serde_json::from_str::<chacha_rot::ExactProb>(above_one).is_err());
    assert!(serde_json::from_str::<WordSpec>("33").is_err());
    let params = serde_json::to_string(&QuarterRoundParams::CHACHA).unwrap();
    assert_eq!(
        serde_json::from_str::<QuarterRoundParams>(&params).unwrap(),
        QuarterRoundParams::CHACHA
    );
}
