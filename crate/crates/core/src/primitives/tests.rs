use super::*;
use crate::engine::{apply_sequence, EngineChoice};
use crate::lattice::{
    build_universal_arrangement, build_wire, universal_coupler_site, universal_single_site,
};
use crate::verify::{decode, encode, LogicalState};
use crate::{initial_state, SparseState};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn lib() -> &'static PrimitiveLibrary {
    static LIB: OnceLock<PrimitiveLibrary> = OnceLock::new();
    LIB.get_or_init(|| PrimitiveLibrary::design(4).unwrap())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn probe() -> LogicalState {
    let mut s = LogicalState::product(&[(c(0.6, 0.0), c(0.0, 0.8))]);
    s.normalize();
    s
}

fn run(arr: &Arrangement, state: &SparseState, seq: &PulseSequence) -> SparseState {
    let g = blockade_graph(arr).unwrap();
    apply_sequence(state, seq, &g, EngineChoice::Auto).unwrap()
}

/// Run `seq` from the standard configuration at `k0` and decode at `k1`.
fn logical_map(
    arr: &Arrangement,
    mode: Mode,
    k0: usize,
    k1: usize,
    input: &LogicalState,
    seq: &PulseSequence,
) -> LogicalState {
    let out = run(arr, &encode(arr, k0, input, mode).unwrap(), seq);
    decode(&out, arr, k1, None)
        .unwrap_or_else(|e| panic!("{k0} -> {k1}: {e}"))
        .logical
}

fn expect(input: &LogicalState, q: usize, m: &Mat2) -> LogicalState {
    let mut s = input.clone();
    s.apply_single(q, m);
    s
}

#[test]
fn transport_moves_interface_both_ways() {
    let arr = build_wire(11, &[4], false).unwrap();
    let input = probe();
    for k in 2..8 {
        let right = lib().transport(Direction::Right, k).unwrap();
        assert_eq!(right.len(), 9);
        let out = logical_map(&arr, Mode::Unit, k, k + 1, &input, &right.sequence);
        assert!(
            out.fidelity(&input) > 1.0 - 1e-10,
            "right from {k}: {}",
            out.fidelity(&input)
        );

        let left = lib().transport(Direction::Left, k + 1).unwrap();
        let back = logical_map(&arr, Mode::Unit, k + 1, k, &input, &left.sequence);
        assert!(back.fidelity(&input) > 1.0 - 1e-10, "left from {}", k + 1);
    }
}

#[test]
fn transport_in_physical_mode() {
    let arr = build_wire(9, &[4], false).unwrap();
    let input = probe();
    for k in 2..6 {
        let right = lib().transport(Direction::Right, k).unwrap();
        let out = logical_map(&arr, Mode::Physical, k, k + 1, &input, &right.sequence);
        assert!(out.fidelity(&input) > 1.0 - 1e-10, "right from {k}");
    }
}

#[test]
fn single_qubit_at_pi_half_is_hadamard() {
    let arr = build_wire(9, &[4], false).unwrap();
    let p = lib().single_qubit(FRAC_PI_2).unwrap();
    assert_eq!(p.len(), 9);
    let h = Mat2::new(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)) / c(2f64.sqrt(), 0.0);
    for mode in [Mode::Unit, Mode::Physical] {
        let out = logical_map(&arr, mode, 4, 4, &probe(), &p.sequence);
        assert!(
            out.fidelity(&expect(&probe(), 0, &h)) > 1.0 - 1e-10,
            "{mode:?}"
        );
    }
}

#[test]
fn single_qubit_elsewhere_is_z() {
    // Interfaces only park on device sites, which sit at least four apart.
    let arr = build_wire(13, &[6], false).unwrap();
    for phi in [0.0, 0.7, FRAC_PI_2, 2.9] {
        let p = lib().single_qubit(phi).unwrap();
        for k in [2, 6, 10] {
            if k == 6 {
                let target = su2::rotation(phi, FRAC_PI_2) * su2::pauli_z();
                let out = logical_map(&arr, Mode::Unit, k, k, &probe(), &p.sequence);
                assert!(out.fidelity(&expect(&probe(), 0, &target)) > 1.0 - 1e-10);
                continue;
            }
            let out = logical_map(&arr, Mode::Unit, k, k, &probe(), &p.sequence);
            let z = expect(&probe(), 0, &su2::pauli_z());
            assert!(out.fidelity(&z) > 1.0 - 1e-10, "phi {phi} k {k}");
        }
    }
}

#[test]
fn cz_star_on_coupler_and_z_elsewhere() {
    let arr = build_universal_arrangement(2).unwrap();
    let p = lib().cz_star().unwrap();
    let mut input =
        LogicalState::product(&[(c(0.6, 0.0), c(0.0, 0.8)), (c(0.8, 0.0), c(0.36, 0.48))]);
    input.normalize();
    let zz = |s: &LogicalState| expect(&expect(s, 0, &su2::pauli_z()), 1, &su2::pauli_z());

    let k = universal_coupler_site(2, 0);
    let out = logical_map(&arr, Mode::Unit, k, k, &input, &p.sequence);
    let mut want = zz(&input);
    want.apply_cz(0, 1);
    assert!(out.fidelity(&want) > 1.0 - 1e-10);

    for k in [2, universal_single_site(0), universal_single_site(1), k - 4] {
        let out = logical_map(&arr, Mode::Unit, k, k, &input, &p.sequence);
        assert!(out.fidelity(&zz(&input)) > 1.0 - 1e-10, "site {k}");
    }
}

#[test]
fn passing_devices_is_transparent() {
    let arr = build_universal_arrangement(2).unwrap();
    let input = LogicalState::product(&[(c(0.6, 0.0), c(0.8, 0.0)), (c(0.0, 1.0), c(0.0, 0.0))]);
    let mut seq = PulseSequence::default();
    let (k0, k1) = (2, arr.wire_length(0) - 3);
    for k in k0..k1 {
        seq.extend_from(&lib().transport(Direction::Right, k).unwrap().sequence);
    }
    let out = logical_map(&arr, Mode::Unit, k0, k1, &input, &seq);
    assert!(out.fidelity(&input) > 1.0 - 1e-10);
}

#[test]
fn init_prepares_ones_at_site_two() {
    for n in [1, 2] {
        let arr = build_universal_arrangement(n).unwrap();
        let p = lib().init(&arr).unwrap();
        assert_eq!(p.len(), 2 * 9 + 2 * 9);
        let g = blockade_graph(&arr).unwrap();
        let start = initial_state(&g, Mode::Unit);
        let out = run(&arr, &start, &p.sequence);
        let report = decode(&out, &arr, 2, None).unwrap();
        assert!(report.logical.fidelity(&LogicalState::ones(n)) > 1.0 - 1e-10);
    }
}

#[test]
fn init_requires_heads() {
    let arr = build_wire(9, &[4], false).unwrap();
    assert!(matches!(lib().init(&arr), Err(Error::LayoutMismatch(0))));
}

#[test]
fn missing_design_is_reported() {
    let empty = PrimitiveLibrary::empty(4);
    assert!(matches!(empty.cz_star(), Err(Error::DesignMissing(_))));
    assert!(empty.single_qubit(0.0).is_ok());
}

#[test]
fn transport_round_trip_restores_state() {
    let arr = build_wire(9, &[4], false).unwrap();
    let g = blockade_graph(&arr).unwrap();
    let input = encode(&arr, 3, &probe(), Mode::Unit).unwrap();
    let mut seq = lib().transport(Direction::Right, 3).unwrap().sequence;
    seq.extend_from(&lib().transport(Direction::Left, 4).unwrap().sequence);
    let out = apply_sequence(&input, &seq, &g, EngineChoice::Auto).unwrap();
    assert!(crate::fidelity(&out, &input).unwrap() > 1.0 - 1e-10);
    assert_eq!(out.len(), input.len());
}

#[test]
fn export_contains_fixed_primitives() {
    let ex = lib().export().unwrap();
    for name in [
        "UA_flip",
        "UB_flip",
        "transport_right",
        "transport_left",
        "z_tot",
        "single_qubit",
        "cz_star",
    ] {
        assert!(ex.contains_key(name), "{name}");
        assert!(ex[name].certificate.passed());
    }
    let json = serde_json::to_string(&ex).unwrap();
    let back: BTreeMap<String, Primitive> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, ex);
}

proptest! {
    #[test]
    fn rotation_plan_realizes_target(phi in -7.0f64..7.0, alpha in -7.0f64..7.0) {
        let plan = RotationPlan::new(phi, alpha);
        prop_assert!(plan.axes.len() <= 2);
        let target = su2::rz(plan.gamma) * su2::rotation(phi, alpha);
        prop_assert!(su2::phase_distance(&plan.realized(), &target) < 1e-9);
    }
}
