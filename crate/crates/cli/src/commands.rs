use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use globaldrive::compiler::{self, Circuit, Schedule};
use globaldrive::designer::{
    certify_sequence, design_escalating, required_problems, verify_design, Certificate,
    DesignCache, DesignProblem,
};
use globaldrive::lattice::{
    build_universal_arrangement_with, render_svg, universal_atom_formula, SvgOptions,
};
use globaldrive::primitives::PrimitiveLibrary;
use globaldrive::verify::{decode_lenient, execute, sample as draw, verify_schedule};
use globaldrive::{config_hash, Arrangement, Error, Stamp};
use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{
    CompileArgs, DesignArgs, DesignPulsesArgs, EmitLayoutArgs, RunArgs, VerificationFailed,
    VerifyArgs,
};

const DEFAULT_CACHE: &str = "design-cache.json";

pub fn stamp(command: &str, config: Value) -> Stamp {
    let canonical = json!({ "command": command, "config": config });
    Stamp::new(config_hash(canonical.to_string().as_bytes()))
}

fn stamp_line(s: &Stamp) -> String {
    format!("{} config {}", s.toolkit, s.config_hash)
}

pub fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn problems(d: &DesignArgs) -> Vec<DesignProblem> {
    required_problems(d.superatom_size)
        .into_iter()
        .map(|mut p| {
            p.tolerance = d.design_tolerance;
            p.with_seed(d.design_seed).with_starts(d.starts)
        })
        .collect()
}

/// Certified library from the cache, designing and saving what is missing.
pub fn library(d: &DesignArgs) -> Result<(PrimitiveLibrary, Vec<String>)> {
    let mut cache = match &d.cache {
        Some(p) => DesignCache::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => DesignCache::default(),
    };
    let mut lib = PrimitiveLibrary::empty(d.superatom_size);
    let mut hashes = Vec::new();
    let mut dirty = false;
    for p in problems(d) {
        let sol = match cache.get(&p) {
            Some(sol) => sol.clone(),
            None => {
                info!("designing {}", p.name);
                dirty = true;
                let sol = design_escalating(&p)?;
                cache.insert(sol.clone());
                sol
            }
        };
        verify_design(&sol)?;
        hashes.push(sol.problem_hash.clone());
        lib.insert(sol);
    }
    if let (true, Some(path)) = (dirty, &d.cache) {
        cache.save(path)?;
    }
    Ok((lib, hashes))
}

#[derive(Serialize)]
struct DesignEntry {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    problem_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pulses: Option<usize>,
    residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    passed: bool,
}

#[derive(Serialize)]
struct DesignReport {
    stamp: Stamp,
    superatom_size: usize,
    designs: Vec<DesignEntry>,
    passed: bool,
}

pub fn design_pulses(a: &DesignPulsesArgs) -> Result<()> {
    let path = a
        .design
        .cache
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE));
    let mut cache =
        DesignCache::load(&path).with_context(|| format!("loading {}", path.display()))?;
    let mut designs = Vec::new();
    let mut hashes = Vec::new();
    for p in problems(&a.design) {
        hashes.push(p.hash());
        let sol = match cache.get(&p) {
            Some(sol) if !a.force => {
                info!("{}: cache hit", p.name);
                sol.clone()
            }
            _ => {
                info!("{}: designing from {} starts", p.name, p.starts);
                match design_escalating(&p) {
                    Ok(sol) => {
                        cache.insert(sol.clone());
                        sol
                    }
                    Err(e @ Error::NoSolutionFound { .. }) => {
                        designs.push(DesignEntry {
                            name: p.name.clone(),
                            problem_hash: None,
                            pulses: None,
                            residuals: Vec::new(),
                            certificate: None,
                            error: Some(e.to_string()),
                            passed: false,
                        });
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        };
        let cert = certify_sequence(&sol.sequence, &sol.problem, a.certificate_tolerance)?;
        designs.push(DesignEntry {
            name: sol.problem.name.clone(),
            problem_hash: Some(sol.problem_hash.clone()),
            pulses: Some(sol.sequence.len()),
            passed: sol.is_accepted() && cert.passed(),
            residuals: sol.residuals,
            certificate: Some(cert),
            error: None,
        });
    }
    cache.save(&path)?;

    let passed = designs.iter().all(|d| d.passed);
    let report = DesignReport {
        stamp: stamp(
            "design-pulses",
            json!({
                "problems": hashes,
                "certificate_tolerance": a.certificate_tolerance,
            }),
        ),
        superatom_size: a.design.superatom_size,
        designs,
        passed,
    };
    write_out(
        a.report.as_deref(),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    for d in &report.designs {
        let worst = d
            .certificate
            .as_ref()
            .map_or(f64::NAN, |c| c.max_residual());
        eprintln!(
            "{:<8} {:>2} pulses  certificate residual {worst:.2e}  {}",
            d.name,
            d.pulses.unwrap_or(0),
            if d.passed { "ok" } else { "FAILED" }
        );
    }
    if !passed {
        bail!(VerificationFailed(
            "one or more designs failed certification".into()
        ));
    }
    Ok(())
}

pub fn compile(a: &CompileArgs) -> Result<()> {
    let text = read(&a.circuit)?;
    let circuit = Circuit::from_json(&text)
        .with_context(|| format!("invalid circuit file {}", a.circuit.display()))?;
    let (lib, hashes) = library(&a.design)?;
    let mode = a.mode.into();
    let (arr, mut schedule) = compiler::compile(&circuit, mode, &lib)?;

    let s = stamp(
        "compile",
        json!({
            "circuit": config_hash(text.as_bytes()),
            "mode": mode,
            "superatom_size": a.design.superatom_size,
            "designs": hashes,
        }),
    );
    schedule.stamp = Some(s.clone());
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let arr_path = a.out_dir.join("arrangement.json");
    let sched_path = a.out_dir.join("schedule.json");
    write_out(Some(&arr_path), &(arr.to_json(Some(s))? + "\n"))?;
    write_out(Some(&sched_path), &(schedule.to_json()? + "\n"))?;

    let n = circuit.n;
    println!(
        "circuit: {} ({n} qubits, depth {})",
        circuit.id.as_deref().unwrap_or("unnamed"),
        circuit.depth()
    );
    println!("mode: {mode}");
    println!(
        "pulses: {} (initialization {}, {:.1} per qubit-layer)",
        schedule.pulse_count(),
        schedule.init_pulses(),
        schedule.overhead()
    );
    println!("atoms: {}", arr.atom_count());
    if mode == compiler::CompileMode::Universal {
        println!(
            "atoms by formula 2n^2 + 3(S+1)n - S: {}",
            universal_atom_formula(n, lib.superatom_size())
        );
    }
    println!("wrote {} and {}", arr_path.display(), sched_path.display());
    Ok(())
}

struct Loaded {
    arr: Arrangement,
    schedule: Schedule,
    inputs: Value,
}

fn load(a: &RunArgs) -> Result<Loaded> {
    let arr_text = read(&a.arrangement)?;
    let sched_text = read(&a.schedule)?;
    let arr = Arrangement::from_json(&arr_text)
        .with_context(|| format!("invalid arrangement file {}", a.arrangement.display()))?;
    let schedule = Schedule::from_json(&sched_text)
        .with_context(|| format!("invalid schedule file {}", a.schedule.display()))?;
    if arr.n_wires() != schedule.circuit.n {
        bail!(
            "arrangement has {} wires but the schedule is for {} qubits",
            arr.n_wires(),
            schedule.circuit.n
        );
    }
    let inputs = json!({
        "arrangement": config_hash(arr_text.as_bytes()),
        "schedule": config_hash(sched_text.as_bytes()),
        "engine": globaldrive::engine::EngineChoice::from(a.engine),
        "representation": globaldrive::Mode::from(a.representation),
        "decode_tolerance": a.decode_tolerance,
    });
    Ok(Loaded {
        arr,
        schedule,
        inputs,
    })
}

fn counts(shots: &[String]) -> BTreeMap<&str, usize> {
    let mut out = BTreeMap::new();
    for s in shots {
        *out.entry(s.as_str()).or_insert(0) += 1;
    }
    out
}

pub fn simulate(a: &RunArgs) -> Result<()> {
    let l = load(a)?;
    let state = execute(
        &l.arr,
        &l.schedule,
        a.engine.into(),
        a.representation.into(),
    )?;
    let report = decode_lenient(
        &state,
        &l.arr,
        l.schedule.final_site,
        Some(&l.schedule.frame),
    )?;
    let s = stamp("simulate", l.inputs);
    let header = format!(
        "{}\ninterface site {}, invalid weight {:e}",
        stamp_line(&s),
        report.interface_k,
        report.invalid_weight
    );
    write_out(a.out.as_deref(), &state.to_csv(Some(&header)))?;

    if report.invalid_weight > a.decode_tolerance || report.logical.norm_sqr() == 0.0 {
        return Err(Error::DecodeFailure {
            invalid_weight: report.invalid_weight,
        }
        .into());
    }
    eprintln!("logical state (frame applied):");
    for (i, amp) in report.logical.amps.iter().enumerate() {
        if amp.norm() > 1e-12 {
            eprintln!(
                "  |{}>  {:+.12} {:+.12}i",
                report.logical.bitstring(i),
                amp.re,
                amp.im
            );
        }
    }
    if a.shots > 0 {
        let shots = draw(&report.logical, a.shots, a.seed);
        for (outcome, c) in counts(&shots) {
            eprintln!("  {outcome}: {c}");
        }
    }
    Ok(())
}

pub fn sample(a: &RunArgs) -> Result<()> {
    if a.shots == 0 {
        bail!("sample needs --shots greater than zero");
    }
    let l = load(a)?;
    let state = execute(
        &l.arr,
        &l.schedule,
        a.engine.into(),
        a.representation.into(),
    )?;
    let report = decode_lenient(
        &state,
        &l.arr,
        l.schedule.final_site,
        Some(&l.schedule.frame),
    )?;
    if report.invalid_weight > a.decode_tolerance || report.logical.norm_sqr() == 0.0 {
        return Err(Error::DecodeFailure {
            invalid_weight: report.invalid_weight,
        }
        .into());
    }
    let shots = draw(&report.logical, a.shots, a.seed);
    let mut inputs = l.inputs;
    inputs["shots"] = json!(a.shots);
    inputs["seed"] = json!(a.seed);
    let s = stamp("sample", inputs);
    let mut out = format!("# {}\nshot,outcome\n", stamp_line(&s));
    for (i, shot) in shots.iter().enumerate() {
        out.push_str(&format!("{i},{shot}\n"));
    }
    write_out(a.out.as_deref(), &out)?;
    for (outcome, c) in counts(&shots) {
        eprintln!("{outcome}: {c}");
    }
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Result<()> {
    let l = load(&a.run)?;
    let mut report = verify_schedule(
        &l.arr,
        &l.schedule,
        l.schedule.mode,
        a.run.engine.into(),
        a.run.representation.into(),
        a.tolerance,
    )?;
    report.passed =
        report.invalid_weight <= a.run.decode_tolerance && report.fidelity >= 1.0 - a.tolerance;
    if !a.timing {
        report.wall_time = None;
    }
    let mut inputs = l.inputs;
    inputs["tolerance"] = json!(a.tolerance);
    report.stamp = Some(stamp("verify", inputs));
    write_out(
        a.run.out.as_deref(),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    let summary = format!(
        "fidelity {:.12} (infidelity {:.2e}, tolerance {:.1e}), invalid weight {:.2e}, {} pulses",
        report.fidelity,
        1.0 - report.fidelity,
        a.tolerance,
        report.invalid_weight,
        report.pulse_count
    );
    if !report.passed {
        bail!(VerificationFailed(format!(
            "verification failed: {summary}"
        )));
    }
    eprintln!("verified: {summary}");
    Ok(())
}

pub fn emit_layout(a: &EmitLayoutArgs) -> Result<()> {
    let (arr, source) = match (&a.arrangement, a.universal) {
        (Some(path), _) => {
            let text = read(path)?;
            let arr = Arrangement::from_json(&text)
                .with_context(|| format!("invalid arrangement file {}", path.display()))?;
            (arr, json!({ "arrangement": config_hash(text.as_bytes()) }))
        }
        (None, Some(n)) => (
            build_universal_arrangement_with(n, a.superatom_size, 1.0)?,
            json!({ "universal": n, "superatom_size": a.superatom_size }),
        ),
        (None, None) => bail!("give an arrangement file or --universal"),
    };
    let s = stamp("emit-layout", json!({ "source": source, "edges": a.edges }));
    let svg = render_svg(&arr, SvgOptions { edges: a.edges }, Some(&stamp_line(&s)));
    write_out(a.out.as_deref(), &svg)
}
