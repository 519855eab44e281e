use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::Args;
use globaldrive::compiler::INIT_SITE;
use globaldrive::engine::{apply_sequence, EngineChoice, PulseSequence};
use globaldrive::lattice::{blockade_graph, build_wire};
use globaldrive::primitives::{Direction, PrimitiveLibrary};
use globaldrive::verify::{encode, LogicalState};
use globaldrive::Mode;
use num_complex::Complex64;
use serde_json::json;

use crate::commands::{stamp, write_out};
use crate::{EngineArg, RepresentationArg};

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 10)]
    pub min_length: usize,
    #[arg(long, default_value_t = 18)]
    pub max_length: usize,
    #[arg(long, default_value_t = 2)]
    pub step: usize,
    /// Timed runs per point.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [EngineArg::Factorized, EngineArg::Dense])]
    pub engines: Vec<EngineArg>,
    #[arg(long, value_enum, default_value_t = RepresentationArg::Unit)]
    pub representation: RepresentationArg,
    /// CSV output (stdout when omitted).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// Transport a superposed qubit from the left end to the right end of a
/// plain wire of `length` sites.
fn workload(
    lib: &PrimitiveLibrary,
    length: usize,
    mode: Mode,
) -> Result<(
    globaldrive::Arrangement,
    globaldrive::SparseState,
    PulseSequence,
)> {
    let arr = build_wire(length, &[], false)?;
    let plus = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let input = LogicalState::product(&[(plus, plus)]);
    let state = encode(&arr, INIT_SITE, &input, mode)?;
    let mut seq = PulseSequence::default();
    for k in INIT_SITE..length - 3 {
        seq.extend_from(&lib.transport(Direction::Right, k)?.sequence);
    }
    Ok((arr, state, seq))
}

fn stats(times: &[f64]) -> (f64, f64, f64) {
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = if times.len() > 1 {
        times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let min = times.iter().cloned().fold(f64::INFINITY, f64::min);
    (mean, var.sqrt(), min)
}

pub fn run(a: &BenchArgs) -> Result<()> {
    if a.min_length < INIT_SITE + 4 || a.max_length < a.min_length || a.step == 0 {
        bail!(
            "lengths must satisfy {} <= min <= max and step > 0",
            INIT_SITE + 4
        );
    }
    if a.repeats == 0 {
        bail!("--repeats must be positive");
    }
    let lib = PrimitiveLibrary::design(globaldrive::lattice::DEFAULT_SUPERATOM_SIZE)?;
    let mode: Mode = a.representation.into();
    let engines: Vec<EngineChoice> = a.engines.iter().map(|&e| e.into()).collect();

    let s = stamp(
        "bench",
        json!({
            "lengths": [a.min_length, a.max_length, a.step],
            "repeats": a.repeats,
            "engines": engines,
            "representation": mode,
        }),
    );
    let mut out = format!("# {} config {}\n", s.toolkit, s.config_hash);
    out.push_str("engine,length,units,atoms,pulses,repeats,mean_s,std_s,min_s,max_deviation\n");
    for length in (a.min_length..=a.max_length).step_by(a.step) {
        let (arr, state, seq) = workload(&lib, length, mode)?;
        let g = blockade_graph(&arr)?;
        let mut reference = None;
        for &engine in &engines {
            let mut times = Vec::with_capacity(a.repeats);
            let mut last = None;
            for _ in 0..a.repeats {
                let t = Instant::now();
                let result = apply_sequence(&state, &seq, &g, engine)?;
                times.push(t.elapsed().as_secs_f64());
                last = Some(result);
            }
            let last = last.expect("repeats > 0");
            let deviation = match &reference {
                Some(r) => last.max_deviation(r)?,
                None => 0.0,
            };
            reference.get_or_insert(last);
            let (mean, std, min) = stats(&times);
            let name = serde_json::to_value(engine)?;
            let _ = writeln!(
                out,
                "{},{length},{},{},{},{},{mean:e},{std:e},{min:e},{deviation:e}",
                name.as_str().unwrap_or("?"),
                arr.units().len(),
                arr.atom_count(),
                seq.len(),
                a.repeats,
            );
            log::info!("{engine:?} L={length}: {mean:.3e} s");
        }
    }
    write_out(a.out.as_deref(), &out)
}
