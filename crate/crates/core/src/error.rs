use thiserror::Error;

use crate::lattice::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("A superatoms at sites {first} and {second} of wire {wire} are closer than 4 sites")]
    SpacingViolation {
        wire: usize,
        first: usize,
        second: usize,
    },
    #[error("A superatom requested at odd site {site} of wire {wire}")]
    ParityViolation { wire: usize, site: usize },
    #[error("two impurities placed at site {site} of wire {wire}")]
    OverlapViolation { wire: usize, site: usize },
    #[error("coupler requested at odd site {site}")]
    CouplerParityViolation { site: usize },
    #[error("invalid arrangement request: {0}")]
    InvalidLayout(String),
    #[error("superatom {superatom} is only partially inside the blockade radius of unit {other}")]
    PartialSuperatomOverlap { superatom: usize, other: usize },
    #[error("arrangement failed validation: {}", format_diagnostics(.0))]
    InvalidArrangement(Vec<Diagnostic>),

    #[error("basis size exceeds cap of {cap} configurations")]
    TooLarge { cap: usize },
    #[error("physical state leaks {leaked:.3e} weight outside the symmetric superatom subspace")]
    NonSymmetricLeakage { leaked: f64 },
    #[error("states live in different modes or registers")]
    ModeMismatch,

    #[error("driven units {0} and {1} are mutually blockaded")]
    DrivenAdjacency(usize, usize),
    #[error("reset removed all remaining weight")]
    AllWeightRemoved,

    #[error("no pulse design available for {0}")]
    DesignMissing(String),
    #[error("no solution found for {name} within budget {budget} (best residual {best:.3e})")]
    NoSolutionFound {
        name: String,
        budget: usize,
        best: f64,
    },
    #[error("certificate mismatch for {case}: residual {residual:.3e} exceeds {tolerance:.1e}")]
    CertificateMismatch {
        case: String,
        residual: f64,
        tolerance: f64,
    },
    #[error("arrangement lacks a head superatom on wire {0}")]
    LayoutMismatch(usize),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("placement infeasible: {0}")]
    PlacementInfeasible(String),
    #[error("device at site {site} unreachable (interface range {min}..={max})")]
    DeviceUnreachable { site: usize, min: usize, max: usize },

    #[error("{n} qubits exceed the reference simulator limit of {max}")]
    TooManyQubits { n: usize, max: usize },
    #[error("decode failed: invalid weight {invalid_weight:.3e}")]
    DecodeFailure { invalid_weight: f64 },
    #[error("channel is not unitary (distance {distance:.3e})")]
    NonUnitaryChannel { distance: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
