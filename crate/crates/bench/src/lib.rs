//! Shared workloads for the criterion benches.

use std::f64::consts::FRAC_1_SQRT_2;

use globaldrive::compiler::INIT_SITE;
use globaldrive::engine::PulseSequence;
use globaldrive::lattice::{blockade_graph, build_wire, DEFAULT_SUPERATOM_SIZE};
use globaldrive::primitives::{Direction, PrimitiveLibrary};
use globaldrive::verify::{encode, LogicalState};
use globaldrive::{BlockadeGraph, Mode, SparseState};
use num_complex::Complex64;

pub fn library() -> PrimitiveLibrary {
    PrimitiveLibrary::design(DEFAULT_SUPERATOM_SIZE).expect("library designs")
}

/// A superposed qubit carried down a wire of `length` sites with an A
/// superatom every four sites.
pub struct Transport {
    pub graph: BlockadeGraph,
    pub state: SparseState,
    pub sequence: PulseSequence,
}

impl Transport {
    pub fn new(lib: &PrimitiveLibrary, length: usize, mode: Mode) -> Self {
        let devices: Vec<usize> = (4..length.saturating_sub(2)).step_by(4).collect();
        let arr = build_wire(length, &devices, false).expect("valid wire");
        let plus = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let input = LogicalState::product(&[(plus, plus)]);
        let state = encode(&arr, INIT_SITE, &input, mode).expect("encodes");
        let mut sequence = PulseSequence::default();
        for k in INIT_SITE..length - 3 {
            sequence.extend_from(
                &lib.transport(Direction::Right, k)
                    .expect("transport")
                    .sequence,
            );
        }
        Self {
            graph: blockade_graph(&arr).expect("graph"),
            state,
            sequence,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use globaldrive::engine::{apply_sequence, EngineChoice};
    use globaldrive::verify::decode;

    #[test]
    fn transport_workload_arrives_intact() {
        let lib = library();
        let w = Transport::new(&lib, 14, Mode::Unit);
        let out = apply_sequence(&w.state, &w.sequence, &w.graph, EngineChoice::Auto).unwrap();
        let arr = build_wire(14, &[4, 8], false).unwrap();
        let r = decode(&out, &arr, 11, None).unwrap();
        assert!(r.invalid_weight < 1e-10);
    }
}
