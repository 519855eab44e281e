//! Named global-pulse protocols: conditional flips, transport cycles, the
//! collective phase pulse, single-qubit and entangling gates, and
//! initialization.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::compiler::euler_decompose;
use crate::designer::{
    self, certify_sequence, CaseRecord, Certificate, DesignCache, DesignProblem, DesignSolution,
    DesignTarget, CERTIFICATE_TOLERANCE,
};
use crate::engine::{GlobalPulse, PulseSequence};
use crate::error::{Error, Result};
use crate::lattice::{blockade_graph, Arrangement, Mode, Role, Species};
use crate::su2::{self, wrap_angle, Mat2};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub name: String,
    pub sequence: PulseSequence,
    pub certificate: Certificate,
}

impl Primitive {
    fn new(name: impl Into<String>, sequence: PulseSequence, certificate: Certificate) -> Self {
        let name = name.into();
        Self {
            sequence: sequence.named(name.clone()),
            name,
            certificate,
        }
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Right,
    Left,
}

/// The four A pulses of the single-qubit protocol for axis `π/2`, in time
/// order as `(phase, area)`.
pub const BLOCK_ONE: [(f64, f64); 4] = [
    (0.0, FRAC_PI_4),
    (FRAC_PI_2, FRAC_PI_2),
    (-FRAC_PI_4, 3.0 * FRAC_PI_4),
    (FRAC_PI_4, 3.0 * FRAC_PI_2),
];

/// Block one with every phase shifted by `φ - π/2`.
pub fn block_one(phi: f64) -> PulseSequence {
    BLOCK_ONE
        .iter()
        .map(|&(p, a)| GlobalPulse::new(Species::A, a, p + phi - FRAC_PI_2))
        .collect()
}

/// Two-level action of the single-qubit protocol on one A unit with
/// enhancement `e`, given the conditional phase the collective pulse leaves
/// on it (`cond` acts as `diag(cond_g, cond_r)`).
fn single_qubit_word(phi: f64, e: f64, cond: Mat2) -> Mat2 {
    let b1 = block_one(phi);
    designer::realize_word(&b1.inverse(), e) * cond * designer::realize_word(&b1, e)
}

/// Interface axes and frame correction for an arbitrary rotation built from
/// single-qubit protocol invocations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationPlan {
    pub phi: f64,
    pub alpha: f64,
    /// Logical axes of the successive `U(ψ, π/2)` invocations, in time order.
    pub axes: Vec<f64>,
    /// The invocations realize `e^{-iγZ/2} U(φ, α)` up to global phase.
    pub gamma: f64,
}

impl RotationPlan {
    pub fn new(phi: f64, alpha: f64) -> Self {
        let mut phi = phi;
        let mut alpha = alpha.rem_euclid(2.0 * PI);
        // U(φ + π, 2π - α) = -U(φ, α)
        if alpha > PI {
            phi += PI;
            alpha = 2.0 * PI - alpha;
        }
        let phi = wrap_angle(phi);
        if alpha < 1e-14 {
            return Self {
                phi,
                alpha: 0.0,
                axes: Vec::new(),
                gamma: 0.0,
            };
        }
        if (alpha - FRAC_PI_2).abs() < 1e-14 {
            return Self {
                phi,
                alpha,
                axes: vec![phi],
                gamma: 0.0,
            };
        }
        // U(π/2 - α, π/2) U(-π/2, π/2) = Rz(γ) U(φ0, α); shifting both axes
        // by s conjugates with Rz(s) and moves φ0 to φ0 + s.
        let m0 = su2::rotation(FRAC_PI_2 - alpha, FRAC_PI_2) * su2::rotation(-FRAC_PI_2, FRAC_PI_2);
        let (gamma, phi0, alpha0) = euler_decompose(&m0);
        debug_assert!(
            (alpha0 - alpha).abs() < 1e-9,
            "decomposed angle {alpha0} vs {alpha}"
        );
        let s = phi - phi0;
        let axes = vec![
            wrap_angle(-FRAC_PI_2 + s),
            wrap_angle(FRAC_PI_2 - alpha + s),
        ];
        let plan = Self {
            phi,
            alpha,
            axes,
            gamma,
        };
        debug_assert!(plan.residual() < 1e-10);
        plan
    }

    /// Logical product of the invocations.
    pub fn realized(&self) -> Mat2 {
        self.axes
            .iter()
            .fold(su2::identity(), |w, &psi| su2::rotation(psi, FRAC_PI_2) * w)
    }

    /// Distance between the invocations and `Rz(γ) U(φ, α)`, up to phase.
    pub fn residual(&self) -> f64 {
        su2::phase_distance(
            &self.realized(),
            &(su2::rz(self.gamma) * su2::rotation(self.phi, self.alpha)),
        )
    }

    /// Physical protocol axes for a wire whose frame phase is `beta` before
    /// the first invocation. Each invocation advances every frame by π and
    /// the finished rotation leaves `-γ` on the addressed wire.
    pub fn physical_axes(&self, beta: f64) -> Vec<f64> {
        self.axes
            .iter()
            .enumerate()
            .map(|(j, &psi)| physical_axis(psi, beta + j as f64 * PI))
            .collect()
    }
}

/// Protocol axis realizing logical `U(ψ, π/2)` on a wire with frame `beta`,
/// given that the invocation itself adds π to the frame.
pub fn physical_axis(logical_axis: f64, beta: f64) -> f64 {
    wrap_angle(logical_axis - beta + PI)
}

/// Designed composites plus the analytic protocols built on them.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimitiveLibrary {
    superatom_size: usize,
    designs: BTreeMap<String, DesignSolution>,
}

impl PrimitiveLibrary {
    pub fn empty(superatom_size: usize) -> Self {
        Self {
            superatom_size,
            designs: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, sol: DesignSolution) {
        self.designs.insert(sol.problem.name.clone(), sol);
    }

    /// Design and certify every required composite.
    pub fn design(superatom_size: usize) -> Result<Self> {
        let mut lib = Self::empty(superatom_size);
        for p in designer::required_problems(superatom_size) {
            let sol = designer::design_escalating(&p)?;
            designer::verify_design(&sol)?;
            lib.insert(sol);
        }
        Ok(lib)
    }

    /// Required composites from the cache, designing missing ones.
    pub fn from_cache(cache: &mut DesignCache, superatom_size: usize, force: bool) -> Result<Self> {
        let mut lib = Self::empty(superatom_size);
        for p in designer::required_problems(superatom_size) {
            lib.insert(cache.resolve(&p, force)?);
        }
        Ok(lib)
    }

    pub fn superatom_size(&self) -> usize {
        self.superatom_size
    }

    fn enhancement(&self) -> f64 {
        (self.superatom_size as f64).sqrt()
    }

    pub fn designs(&self) -> impl Iterator<Item = &DesignSolution> {
        self.designs.values()
    }

    pub fn solution(&self, name: &str) -> Result<&DesignSolution> {
        self.designs
            .get(name)
            .ok_or_else(|| Error::DesignMissing(name.to_string()))
    }

    fn designed(&self, name: &str) -> Result<Primitive> {
        let sol = self.solution(name)?;
        let cert = certify_sequence(&sol.sequence, &sol.problem, CERTIFICATE_TOLERANCE)?;
        Ok(Primitive::new(name, sol.sequence.clone(), cert))
    }

    /// `U_A` or `U_B`: free atoms flip as `-iX`, blockaded units idle, free
    /// A superatoms flip and free B superatoms idle.
    pub fn conditional_flip(&self, species: Species) -> Result<Primitive> {
        match species {
            Species::A => self.designed("UA_flip"),
            Species::B => self.designed("UB_flip"),
        }
    }

    /// Global 2π pulse on B.
    pub fn z_tot(&self) -> Result<Primitive> {
        let seq = PulseSequence::new(vec![GlobalPulse::new(Species::B, 2.0 * PI, 0.0)]);
        let e = self.enhancement();
        let problem = DesignProblem::new(
            "z_tot",
            Species::B,
            vec![
                DesignTarget::exact(1.0, -su2::identity()),
                DesignTarget::exact(e, su2::identity()),
                DesignTarget::blockaded(1.0),
                DesignTarget::blockaded(e),
            ],
        );
        let cert = certify_sequence(&seq, &problem, CERTIFICATE_TOLERANCE)?;
        Ok(Primitive::new("z_tot", seq, cert))
    }

    /// Move every interface one site. `site` is the interface position
    /// before the cycle; its parity picks the flip order.
    pub fn transport(&self, direction: Direction, site: usize) -> Result<Primitive> {
        match direction {
            Direction::Right => {
                let (outer, inner) = match Species::of_site(site) {
                    Species::A => (Species::B, Species::A),
                    Species::B => (Species::A, Species::B),
                };
                let o = self.conditional_flip(outer)?;
                let i = self.conditional_flip(inner)?;
                let mut seq = o.sequence.clone();
                seq.extend_from(&i.sequence);
                seq.extend_from(&o.sequence);
                let mut cert = o.certificate.clone();
                cert.cases.extend(i.certificate.cases);
                Ok(Primitive::new("transport_right", seq, cert))
            }
            Direction::Left => {
                if site == 0 {
                    return Err(Error::InvalidLayout("cannot move left of site 0".into()));
                }
                let right = self.transport(Direction::Right, site - 1)?;
                Ok(Primitive::new(
                    "transport_left",
                    right.sequence.inverse(),
                    right.certificate,
                ))
            }
        }
    }

    /// `π/2` rotation about axis `φ` on every A superatom at an interface,
    /// with a `Z` byproduct on every wire: physically `U(φ, π/2)·Z` on the
    /// addressed qubit and `Z` elsewhere.
    pub fn single_qubit(&self, phi: f64) -> Result<Primitive> {
        let b1 = block_one(phi);
        let mut seq = b1.clone();
        seq.extend_from(&self.z_tot()?.sequence);
        seq.extend_from(&b1.inverse());

        let e = self.enhancement();
        // The collective pulse marks a g interface with -1.
        let cond = -su2::pauli_z();
        let one = su2::identity();
        let checks = [
            (
                "interface superatom",
                single_qubit_word(phi, e, cond),
                su2::rotation(phi, FRAC_PI_2) * su2::pauli_z(),
            ),
            (
                "interface atom",
                single_qubit_word(phi, 1.0, cond),
                su2::pauli_z(),
            ),
            ("idle superatom", single_qubit_word(phi, e, one), one),
            ("idle atom", single_qubit_word(phi, 1.0, one), one),
        ];
        let cases = checks
            .into_iter()
            .map(|(case, realized, target)| CaseRecord {
                case: format!("single_qubit: {case}"),
                mode: Mode::Unit,
                residual: su2::phase_distance(&realized, &target),
                realized,
                target,
                up_to_phase: true,
            })
            .collect();
        let cert = Certificate {
            cases,
            tolerance: CERTIFICATE_TOLERANCE,
        };
        cert.check()?;
        Ok(Primitive::new("single_qubit", seq, cert))
    }

    /// Designed B composite: `Z_tot · CZ` on every wire pair whose coupler
    /// sits at the interface site.
    pub fn cz_star(&self) -> Result<Primitive> {
        self.designed("cz_star")
    }

    /// From all-g: bring every head superatom to r̄ with a π rotation, then
    /// two transport cycles, leaving each wire in the standard configuration
    /// at site 2 holding `|r>`.
    pub fn init(&self, arr: &Arrangement) -> Result<Primitive> {
        let g = blockade_graph(arr)?;
        for w in 0..arr.n_wires() {
            let head = arr.site_unit(w, 0).ok_or(Error::LayoutMismatch(w))?;
            let unit = arr.unit(head);
            let ok = matches!(unit.role, Role::Head { .. })
                && unit.is_superatom()
                && unit.species == Species::A
                && g.unit_graph().neighbors(head).len() == 1
                && g.unit_graph()
                    .neighbors(head)
                    .iter()
                    .all(|&v| g.unit_graph().species[v] == Species::B);
            if !ok {
                return Err(Error::LayoutMismatch(w));
            }
        }
        let plan = RotationPlan::new(0.0, PI);
        let mut seq = PulseSequence::default();
        let mut cert = Certificate {
            cases: Vec::new(),
            tolerance: CERTIFICATE_TOLERANCE,
        };
        for psi in plan.physical_axes(0.0) {
            let p = self.single_qubit(psi)?;
            seq.extend_from(&p.sequence);
            cert.cases.extend(p.certificate.cases);
        }
        for site in [0, 1] {
            let t = self.transport(Direction::Right, site)?;
            seq.extend_from(&t.sequence);
            if site == 0 {
                cert.cases.extend(t.certificate.cases);
            }
        }
        Ok(Primitive::new("init", seq, cert))
    }

    /// Every fixed primitive keyed by name, for export.
    pub fn export(&self) -> Result<BTreeMap<String, Primitive>> {
        let mut out = BTreeMap::new();
        for p in [
            self.conditional_flip(Species::A)?,
            self.conditional_flip(Species::B)?,
            self.transport(Direction::Right, 2)?,
            self.transport(Direction::Left, 3)?,
            self.z_tot()?,
            self.single_qubit(FRAC_PI_2)?,
            self.cz_star()?,
        ] {
            out.insert(p.name.clone(), p);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
