use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use globaldrive::compiler::{compile, Circuit, CompileMode, Gate, ZFrame};
use globaldrive::engine::{apply_sequence, EngineChoice};
use globaldrive::lattice::{blockade_graph, build_universal_arrangement, build_wire};
use globaldrive::primitives::{Direction, PrimitiveLibrary};
use globaldrive::su2::{self, Mat2};
use globaldrive::verify::{
    apply_frame, chi_square_p, clifford_words, decode, encode, generate_corpus, ghz_circuit,
    reference_simulate, run_from, sample, shipped_corpus, LogicalState,
};
use globaldrive::{Error, Mode};
use num_complex::Complex64;
use proptest::prelude::*;

fn lib() -> &'static PrimitiveLibrary {
    static LIB: OnceLock<PrimitiveLibrary> = OnceLock::new();
    LIB.get_or_init(|| PrimitiveLibrary::design(4).unwrap())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn shipped_corpus_is_regenerable() {
    let shipped = shipped_corpus();
    assert_eq!(shipped, generate_corpus());
    assert_eq!(shipped.iter().filter(|e| e.circuit.n == 1).count(), 24);
    assert_eq!(shipped.iter().filter(|e| e.seed.is_some()).count(), 20);
    for e in shipped.iter().filter(|e| e.seed.is_some()) {
        assert_eq!(e.circuit.n, 2);
        assert!(e.circuit.depth() <= 4);
    }
}

#[test]
fn clifford_words_are_distinct() {
    let mats: Vec<Mat2> = clifford_words()
        .iter()
        .map(|w| {
            w.iter()
                .fold(su2::identity(), |m, &(phi, a)| su2::rotation(phi, a) * m)
        })
        .collect();
    assert_eq!(mats.len(), 24);
    for i in 0..mats.len() {
        for j in 0..i {
            assert!(su2::phase_distance(&mats[i], &mats[j]) > 0.1, "{i} {j}");
        }
    }
}

#[test]
fn ghz_reference_is_cat_state() {
    let s = reference_simulate(&ghz_circuit()).unwrap();
    let p = s.probabilities();
    assert!((p[0] - 0.5).abs() < 1e-12 && (p[7] - 0.5).abs() < 1e-12);
    assert!(p[1..7].iter().all(|&x| x < 1e-24));
    assert!((s.amps[7] / s.amps[0] - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn decode_applies_the_frame() {
    let arr = build_universal_arrangement(2).unwrap();
    let input = LogicalState::product(&[
        (c(0.6, 0.0), c(0.0, 0.8)),
        (c(FRAC_1_SQRT_2, 0.0), c(0.5, 0.5)),
    ]);
    let state = encode(&arr, 6, &input, Mode::Unit).unwrap();
    let frame = ZFrame {
        beta: vec![0.4, -1.3],
    };
    let r = decode(&state, &arr, 6, Some(&frame)).unwrap();
    assert!(r.frame_applied);
    assert!(r.logical.fidelity(&apply_frame(&input, &frame)) > 1.0 - 1e-14);
    let phased = r.logical.inner(&apply_frame(&input, &frame));
    assert!((phased - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn decode_rejects_states_off_the_code_space() {
    let arr = build_wire(11, &[4], false).unwrap();
    let state = encode(&arr, 4, &LogicalState::ones(1), Mode::Unit).unwrap();
    // the interface is at 4, not 5
    assert!(matches!(
        decode(&state, &arr, 5, None),
        Err(Error::DecodeFailure { invalid_weight }) if invalid_weight > 0.99
    ));
}

#[test]
fn sampling_follows_the_state() {
    let s = LogicalState::product(&[
        (c(0.6, 0.0), c(0.8, 0.0)),
        (c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)),
    ]);
    let a = sample(&s, 20_000, 3);
    assert_eq!(a, sample(&s, 20_000, 3));
    assert_ne!(a, sample(&s, 20_000, 4));
    assert!(chi_square_p(&a, &s) > 1e-4);
    let skewed = LogicalState::basis(2, 0);
    assert_eq!(chi_square_p(&a, &skewed), 0.0);
}

#[test]
fn transport_needs_two_sites_ahead() {
    let len = 11;
    let arr = build_wire(len, &[4], false).unwrap();
    let g = blockade_graph(&arr).unwrap();
    let plus = c(FRAC_1_SQRT_2, 0.0);
    let input = LogicalState::product(&[(plus, plus)]);
    for (from, fits) in [(len - 4, true), (len - 3, false)] {
        let start = encode(&arr, from, &input, Mode::Unit).unwrap();
        let seq = lib().transport(Direction::Right, from).unwrap().sequence;
        let out = apply_sequence(&start, &seq, &g, EngineChoice::Auto).unwrap();
        let r = decode(&out, &arr, from + 1, None);
        assert_eq!(r.is_ok(), fits, "from {from}");
    }
}

#[test]
fn compiled_schedules_agree_across_engines() {
    // pulse-by-pulse engines branch widely between runs, so stay on the
    // short dependent wire
    let circuit = Circuit::new(
        2,
        vec![
            Gate::Rot {
                q: 0,
                phi: 0.4,
                alpha: 1.1,
            },
            Gate::Cz { q1: 0, q2: 1 },
        ],
    );
    let (arr, s) = compile(&circuit, CompileMode::Dependent, lib()).unwrap();
    let input = LogicalState::ones(2);
    let auto = run_from(&arr, &s, &input, EngineChoice::Auto, Mode::Unit).unwrap();
    let fact = run_from(&arr, &s, &input, EngineChoice::Factorized, Mode::Unit).unwrap();
    let reference = reference_simulate(&circuit).unwrap();
    assert!(auto.logical.fidelity(&reference) > 1.0 - 1e-12);
    assert!(fact.logical.fidelity(&auto.logical) > 1.0 - 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn encode_decode_round_trip(
        amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
        k in prop::sample::select(vec![2usize, 3, 4, 6, 8]),
        physical in any::<bool>(),
    ) {
        let mut input = LogicalState::from_amplitudes(2, amps.iter().map(|&(re, im)| c(re, im)).collect());
        prop_assume!(input.norm_sqr() > 1e-3);
        input.normalize();
        let arr = build_universal_arrangement(2).unwrap();
        let mode = if physical { Mode::Physical } else { Mode::Unit };
        let state = encode(&arr, k, &input, mode).unwrap();
        let r = decode(&state, &arr, k, None).unwrap();
        prop_assert!(r.invalid_weight < 1e-12);
        prop_assert!((r.logical.inner(&input) - c(1.0, 0.0)).norm() < 1e-12);
    }
}
