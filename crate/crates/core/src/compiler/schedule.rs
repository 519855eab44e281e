use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, Gate, ZFrame};
use crate::engine::PulseSequence;
use crate::error::{Error, Result};
use crate::lattice::{
    build_circuit_arrangement_with, Arrangement, Device, Placement, PlacementPlan,
    FIRST_DEVICE_SITE, MIN_SUPERATOM_SPACING, MIN_WIRE_LENGTH, TRAILING_SITES,
};
use crate::primitives::{Direction, PrimitiveLibrary, RotationPlan};
use crate::su2::wrap_signed;
use crate::Stamp;

/// Interface position right after initialization.
pub const INIT_SITE: usize = 2;

/// Pulses per transport cycle and per single-qubit invocation with
/// three-pulse flips.
pub const TRANSPORT_PULSES: usize = 9;
pub const SINGLE_QUBIT_PULSES: usize = 9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Operation {
    Init,
    Transport {
        direction: Direction,
        from: usize,
    },
    /// One single-qubit invocation with protocol axis `axis`; `wires` carry
    /// a device at the interface.
    SingleQubit {
        axis: f64,
        wires: Vec<usize>,
    },
    CzStar {
        pairs: Vec<(usize, usize)>,
    },
    /// Frame update without pulses.
    Frame {
        q: usize,
        beta: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    #[serde(flatten)]
    pub op: Operation,
    /// Source gates this step implements.
    pub gates: Vec<usize>,
    /// Interface site once the step is done.
    pub site: usize,
    /// Half-open range into [`Schedule::pulses`].
    pub pulses: (usize, usize),
    /// Frame once the step is done.
    pub frame: ZFrame,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stamp: Option<Stamp>,
    #[serde(default)]
    pub mode: CompileMode,
    pub circuit: Circuit,
    pub steps: Vec<Step>,
    pub pulses: PulseSequence,
    /// Interface site after each step.
    pub ledger: Vec<usize>,
    pub final_site: usize,
    pub frame: ZFrame,
}

impl Schedule {
    pub fn pulse_count(&self) -> usize {
        self.pulses.len()
    }

    /// Pulses spent in initialization.
    pub fn init_pulses(&self) -> usize {
        self.steps
            .iter()
            .find(|s| s.op == Operation::Init)
            .map_or(0, |s| s.pulses.1)
    }

    /// Everything after initialization, which starts from the standard
    /// configuration at [`INIT_SITE`] with a zero frame.
    pub fn body(&self) -> PulseSequence {
        PulseSequence::new(self.pulses.pulses[self.init_pulses()..].to_vec())
    }

    /// Pulses per qubit per circuit layer.
    pub fn overhead(&self) -> f64 {
        let layers = self.circuit.depth().max(1);
        self.pulse_count() as f64 / (self.circuit.n * layers) as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Schedule = serde_json::from_str(text)?;
        s.pulses.iter().try_for_each(|p| p.validate())?;
        Ok(s)
    }
}

struct Emitter<'l> {
    lib: &'l PrimitiveLibrary,
    steps: Vec<Step>,
    pulses: PulseSequence,
    site: usize,
    frame: ZFrame,
}

impl<'l> Emitter<'l> {
    fn new(lib: &'l PrimitiveLibrary, arr: &Arrangement) -> Result<Self> {
        let mut e = Self {
            lib,
            steps: Vec::new(),
            pulses: PulseSequence::default(),
            site: INIT_SITE,
            frame: ZFrame::zero(arr.n_wires()),
        };
        let init = lib.init(arr)?;
        e.emit(Operation::Init, &init.sequence, Vec::new());
        Ok(e)
    }

    fn emit(&mut self, op: Operation, seq: &PulseSequence, gates: Vec<usize>) {
        let start = self.pulses.len();
        self.pulses.extend_from(seq);
        self.steps.push(Step {
            op,
            gates,
            site: self.site,
            pulses: (start, self.pulses.len()),
            frame: self.frame.clone(),
        });
    }

    fn move_to(&mut self, target: usize) -> Result<()> {
        while self.site != target {
            let (direction, next) = if self.site < target {
                (Direction::Right, self.site + 1)
            } else {
                (Direction::Left, self.site - 1)
            };
            let t = self.lib.transport(direction, self.site)?;
            let from = self.site;
            self.site = next;
            self.emit(
                Operation::Transport { direction, from },
                &t.sequence,
                Vec::new(),
            );
        }
        Ok(())
    }

    fn z(&mut self, gate: usize, q: usize, beta: f64) {
        self.frame.add(q, beta);
        self.emit(
            Operation::Frame { q, beta },
            &PulseSequence::default(),
            vec![gate],
        );
    }

    /// Every wire in `wires` has a device at the interface and shares the
    /// same plan relative to its frame.
    fn rotation(
        &mut self,
        plan: &RotationPlan,
        wires: Vec<usize>,
        gates: Vec<usize>,
    ) -> Result<()> {
        let axes = plan.physical_axes(self.frame.beta[wires[0]]);
        for axis in axes {
            let p = self.lib.single_qubit(axis)?;
            self.frame.add_all(PI);
            self.emit(
                Operation::SingleQubit {
                    axis,
                    wires: wires.clone(),
                },
                &p.sequence,
                gates.clone(),
            );
        }
        for &w in &wires {
            self.frame.add(w, -plan.gamma);
        }
        if let Some(last) = self.steps.last_mut() {
            last.frame = self.frame.clone();
        }
        Ok(())
    }

    fn cz(&mut self, pairs: Vec<(usize, usize)>, gates: Vec<usize>) -> Result<()> {
        let p = self.lib.cz_star()?;
        self.frame.add_all(PI);
        self.emit(Operation::CzStar { pairs }, &p.sequence, gates);
        Ok(())
    }

    fn finish(self, circuit: &Circuit, mode: CompileMode) -> Schedule {
        Schedule {
            stamp: None,
            mode,
            circuit: circuit.clone(),
            ledger: self.steps.iter().map(|s| s.site).collect(),
            steps: self.steps,
            final_site: self.site,
            frame: self.frame,
            pulses: self.pulses,
        }
    }
}

/// Group key for rotations that can share one device site: the physical
/// axes depend only on `α` and `φ - β`.
fn group_key(plan: &RotationPlan, beta: f64) -> (i64, i64) {
    let q = |x: f64| (x * 1e9).round() as i64;
    (q(plan.alpha), q(wrap_signed(plan.phi - beta)))
}

/// Z gates of a layer as `(gate, qubit, beta)`.
type ZUpdates = Vec<(usize, usize, f64)>;

enum LayerWork {
    Rot {
        plan: RotationPlan,
        wires: Vec<usize>,
        gates: Vec<usize>,
    },
    Cz {
        pairs: Vec<(usize, usize)>,
        gates: Vec<usize>,
    },
}

/// Per-layer work after folding Z gates into `frame`. Returns `(gate, q, β)`
/// for the Z gates so they show up in the schedule.
fn plan_layer(c: &Circuit, layer: &[usize], frame: &ZFrame) -> (ZUpdates, Vec<LayerWork>) {
    let mut zs = Vec::new();
    let mut frame = frame.clone();
    for &i in layer {
        if let Gate::Z { q, beta } = c.gates[i] {
            zs.push((i, q, beta));
            frame.add(q, beta);
        }
    }
    // key -> (plan, wires, gates)
    let mut groups = BTreeMap::<(i64, i64), (RotationPlan, Vec<usize>, Vec<usize>)>::new();
    let mut pairs = Vec::new();
    let mut cz_gates = Vec::new();
    for &i in layer {
        match c.gates[i] {
            Gate::Rot { q, phi, alpha } => {
                let plan = RotationPlan::new(phi, alpha);
                if plan.axes.is_empty() {
                    continue;
                }
                let entry = groups
                    .entry(group_key(&plan, frame.beta[q]))
                    .or_insert_with(|| (plan, Vec::new(), Vec::new()));
                entry.1.push(q);
                entry.2.push(i);
            }
            Gate::Cz { q1, q2 } => {
                pairs.push((q1.min(q2), q1.max(q2)));
                cz_gates.push(i);
            }
            Gate::Z { .. } => {}
        }
    }
    let mut work: Vec<LayerWork> = groups
        .into_values()
        .map(|(plan, wires, gates)| LayerWork::Rot { plan, wires, gates })
        .collect();
    if !pairs.is_empty() {
        pairs.sort_unstable();
        work.push(LayerWork::Cz {
            pairs,
            gates: cz_gates,
        });
    }
    (zs, work)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompileMode {
    #[default]
    Dependent,
    Universal,
}

impl std::fmt::Display for CompileMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CompileMode::Dependent => "dependent",
            CompileMode::Universal => "universal",
        })
    }
}

/// Compile in either mode, building the universal layout when needed.
pub fn compile(
    c: &Circuit,
    mode: CompileMode,
    lib: &PrimitiveLibrary,
) -> Result<(Arrangement, Schedule)> {
    match mode {
        CompileMode::Dependent => compile_dependent(c, lib),
        CompileMode::Universal => {
            let layout =
                crate::lattice::build_universal_arrangement_with(c.n, lib.superatom_size(), 1.0)?;
            let schedule = compile_universal(c, &layout, lib)?;
            Ok((layout, schedule))
        }
    }
}

/// Circuit-specific layout: every rotation group and every entangling layer
/// gets its own site, in circuit order, four sites apart.
pub fn compile_dependent(c: &Circuit, lib: &PrimitiveLibrary) -> Result<(Arrangement, Schedule)> {
    c.validate()?;
    let layers = c.layer_indices();

    // Sites depend on the frame through the grouping, so plan with a frame
    // that tracks pulses without emitting any.
    let mut frame = ZFrame::zero(c.n);
    let mut site = FIRST_DEVICE_SITE;
    let mut placements = Vec::new();
    let mut planned: Vec<(ZUpdates, Vec<(usize, LayerWork)>)> = Vec::new();
    for layer in &layers {
        let (zs, work) = plan_layer(c, layer, &frame);
        for &(_, q, beta) in &zs {
            frame.add(q, beta);
        }
        let mut sited = Vec::new();
        for w in work {
            match &w {
                LayerWork::Rot { plan, wires, gates } => {
                    for (&q, &g) in wires.iter().zip(gates) {
                        placements.push(Placement {
                            gate: g,
                            device: Device::SingleQubit { wire: q, site },
                        });
                    }
                    frame.add_all(PI * plan.axes.len() as f64);
                    for &q in wires {
                        frame.add(q, -plan.gamma);
                    }
                }
                LayerWork::Cz { pairs, gates } => {
                    for (&(upper, _), &g) in pairs.iter().zip(gates) {
                        placements.push(Placement {
                            gate: g,
                            device: Device::Coupler { upper, site },
                        });
                    }
                    frame.add_all(PI);
                }
            }
            sited.push((site, w));
            site += MIN_SUPERATOM_SPACING;
        }
        planned.push((zs, sited));
    }
    // The trailing transport parks the interface one past the last device,
    // and a transport needs two sites beyond its destination.
    let last_site = site - MIN_SUPERATOM_SPACING;
    let wire_length = (last_site + 2 + TRAILING_SITES).max(MIN_WIRE_LENGTH);
    let plan = PlacementPlan {
        n_wires: c.n,
        wire_length,
        placements,
    };
    let (arr, _) = build_circuit_arrangement_with(&plan, lib.superatom_size(), 1.0)?;

    let mut e = Emitter::new(lib, &arr)?;
    for (zs, sited) in planned {
        for (g, q, beta) in zs {
            e.z(g, q, beta);
        }
        for (site, w) in sited {
            e.move_to(site)?;
            match w {
                LayerWork::Rot { plan, wires, gates } => e.rotation(&plan, wires, gates)?,
                LayerWork::Cz { pairs, gates } => e.cz(pairs, gates)?,
            }
        }
    }
    if site > FIRST_DEVICE_SITE {
        let next = e.site + 1;
        e.move_to(next)?;
    }
    Ok((arr, e.finish(c, CompileMode::Dependent)))
}

/// Compile onto a fixed layout with one single-qubit device per wire and
/// one coupler per neighbouring pair.
pub fn compile_universal(
    c: &Circuit,
    layout: &Arrangement,
    lib: &PrimitiveLibrary,
) -> Result<Schedule> {
    c.validate()?;
    if layout.n_wires() != c.n {
        return Err(Error::LayoutMismatch(c.n));
    }
    let mut single = BTreeMap::new();
    let mut coupler = BTreeMap::new();
    for d in layout.devices() {
        match d {
            Device::SingleQubit { wire, site } => {
                single.entry(wire).or_insert(site);
            }
            Device::Coupler { upper, site } => {
                coupler.entry(upper).or_insert(site);
            }
        }
    }
    let (min, max) = (INIT_SITE, layout.min_wire_length() - 1 - TRAILING_SITES);
    let reach = |site: usize| {
        if site < min || site > max {
            Err(Error::DeviceUnreachable { site, min, max })
        } else {
            Ok(site)
        }
    };

    let mut e = Emitter::new(lib, layout)?;
    for layer in c.layer_indices() {
        let mut jobs: Vec<(usize, usize)> = Vec::new();
        for &i in &layer {
            match c.gates[i] {
                Gate::Z { q, beta } => e.z(i, q, beta),
                Gate::Rot { q, .. } => {
                    let site = *single.get(&q).ok_or_else(|| {
                        Error::PlacementInfeasible(format!("no single-qubit device on wire {q}"))
                    })?;
                    jobs.push((reach(site)?, i));
                }
                Gate::Cz { q1, q2 } => {
                    let upper = q1.min(q2);
                    let site = *coupler.get(&upper).ok_or_else(|| {
                        Error::PlacementInfeasible(format!("no coupler below wire {upper}"))
                    })?;
                    jobs.push((reach(site)?, i));
                }
            }
        }
        // Visit the nearer end of the layer first.
        jobs.sort_unstable();
        if let (Some(first), Some(last)) = (jobs.first(), jobs.last()) {
            if e.site.abs_diff(last.0) < e.site.abs_diff(first.0) {
                jobs.reverse();
            }
        }
        for (site, i) in jobs {
            e.move_to(site)?;
            match c.gates[i] {
                Gate::Rot { q, phi, alpha } => {
                    let plan = RotationPlan::new(phi, alpha);
                    if !plan.axes.is_empty() {
                        e.rotation(&plan, vec![q], vec![i])?;
                    }
                }
                Gate::Cz { q1, q2 } => e.cz(vec![(q1.min(q2), q1.max(q2))], vec![i])?,
                Gate::Z { .. } => unreachable!(),
            }
        }
    }
    Ok(e.finish(c, CompileMode::Universal))
}
