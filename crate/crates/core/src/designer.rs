//! Composite global-pulse design: find a short pulse list whose single-unit
//! action meets several two-level targets at once (different Rabi
//! enhancements and blockade conditions).

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Configuration, SparseState, SuperatomEncoding};
use crate::engine::{apply_sequence, EngineChoice, GlobalPulse, PulseSequence};
use crate::error::{Error, Result};
use crate::lattice::{BlockadeGraph, Mode, Species};
use crate::su2::{self, Mat2};

/// Acceptance threshold at design time.
pub const DESIGN_TOLERANCE: f64 = 1e-10;
/// Acceptance threshold for many-body replays.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_STARTS: usize = 64;
pub const DEFAULT_SEED: u64 = 20_240_611;
pub const DEFAULT_BUDGET: usize = 3;
pub const MAX_BUDGET: usize = 5;

const MAX_ITERATIONS: usize = 400;
const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignTarget {
    pub enhancement: f64,
    pub blockaded: bool,
    #[serde(with = "su2::serde_mat2")]
    pub target: Mat2,
    pub up_to_phase: bool,
}

impl DesignTarget {
    pub fn exact(enhancement: f64, target: Mat2) -> Self {
        Self {
            enhancement,
            blockaded: false,
            target,
            up_to_phase: false,
        }
    }

    /// A blockaded unit does not evolve; the target is the identity.
    pub fn blockaded(enhancement: f64) -> Self {
        Self {
            enhancement,
            blockaded: true,
            target: su2::identity(),
            up_to_phase: false,
        }
    }

    pub fn relaxed(mut self) -> Self {
        self.up_to_phase = true;
        self
    }

    pub fn residual(&self, seq: &PulseSequence) -> f64 {
        if self.blockaded {
            return 0.0;
        }
        let w = realize_word(seq, self.enhancement);
        if self.up_to_phase {
            su2::phase_distance(&w, &self.target)
        } else {
            su2::distance(&w, &self.target)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignProblem {
    pub name: String,
    pub species: Species,
    pub targets: Vec<DesignTarget>,
    pub budget: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub starts: usize,
}

impl DesignProblem {
    pub fn new(name: impl Into<String>, species: Species, targets: Vec<DesignTarget>) -> Self {
        Self {
            name: name.into(),
            species,
            targets,
            budget: DEFAULT_BUDGET,
            tolerance: DESIGN_TOLERANCE,
            seed: DEFAULT_SEED,
            starts: DEFAULT_STARTS,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts.max(1);
        self
    }

    /// Cache key: hash of the canonical JSON form.
    pub fn hash(&self) -> String {
        crate::config_hash(&serde_json::to_vec(self).expect("problem serializes"))
    }

    fn active(&self) -> Vec<&DesignTarget> {
        self.targets.iter().filter(|t| !t.blockaded).collect()
    }

    fn integer_enhancements(&self) -> bool {
        self.targets
            .iter()
            .all(|t| (t.enhancement - t.enhancement.round()).abs() < 1e-12)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub starts: usize,
    pub best_start: usize,
    pub iterations: usize,
    /// Sum of squared residuals after each accepted step of the winning start.
    pub costs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    pub problem: DesignProblem,
    pub problem_hash: String,
    pub sequence: PulseSequence,
    /// One entry per target, in problem order.
    pub residuals: Vec<f64>,
    pub trace: OptimizerTrace,
}

impl DesignSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn is_accepted(&self) -> bool {
        self.max_residual() <= self.problem.tolerance
    }
}

/// `R(φ_{m-1}, eθ_{m-1}) ⋯ R(φ_0, eθ_0)`: index 0 acts first.
pub fn realize_word(seq: &PulseSequence, enhancement: f64) -> Mat2 {
    seq.iter().fold(su2::identity(), |w, p| {
        su2::rotation(p.phase, enhancement * p.area) * w
    })
}

fn sequence_from(params: &[f64], species: Species) -> PulseSequence {
    params
        .chunks(2)
        .map(|c| GlobalPulse::new(species, c[0], c[1]))
        .collect()
}

/// Derivatives of `R(φ, eθ)` with respect to θ and φ.
fn rotation_derivatives(phi: f64, theta: f64, e: f64) -> (Mat2, Mat2, Mat2) {
    let r = su2::rotation(phi, e * theta);
    let (sp, cp) = phi.sin_cos();
    let axis = su2::pauli_x() * Complex64::new(cp, 0.0) + su2::pauli_y() * Complex64::new(sp, 0.0);
    let d_axis =
        su2::pauli_x() * Complex64::new(-sp, 0.0) + su2::pauli_y() * Complex64::new(cp, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let d_theta = axis * r * (minus_i * (e / 2.0));
    let d_phi = d_axis * (minus_i * (e * theta / 2.0).sin());
    (r, d_theta, d_phi)
}

/// Residual vector and Jacobian over the active targets.
fn residuals_and_jacobian(
    params: &[f64],
    targets: &[&DesignTarget],
) -> (DVector<f64>, DMatrix<f64>) {
    let m = params.len() / 2;
    let rows = 8 * targets.len();
    let mut r = DVector::zeros(rows);
    let mut jac = DMatrix::zeros(rows, params.len());
    for (t_idx, t) in targets.iter().enumerate() {
        let e = t.enhancement;
        let parts: Vec<(Mat2, Mat2, Mat2)> = (0..m)
            .map(|i| rotation_derivatives(params[2 * i + 1], params[2 * i], e))
            .collect();
        let mut prefix = vec![su2::identity(); m + 1];
        for i in 0..m {
            prefix[i + 1] = parts[i].0 * prefix[i];
        }
        let mut suffix = vec![su2::identity(); m + 1];
        for i in (0..m).rev() {
            suffix[i] = suffix[i + 1] * parts[i].0;
        }
        let w = prefix[m];
        let sign = if t.up_to_phase && (t.target.adjoint() * w).trace().re < 0.0 {
            -1.0
        } else {
            1.0
        };
        let diff = w - t.target * Complex64::new(sign, 0.0);
        let base = 8 * t_idx;
        for (k, z) in diff.iter().enumerate() {
            r[base + 2 * k] = z.re;
            r[base + 2 * k + 1] = z.im;
        }
        for i in 0..m {
            for (col, d) in [(2 * i, &parts[i].1), (2 * i + 1, &parts[i].2)] {
                let dw = suffix[i + 1] * d * prefix[i];
                for (k, z) in dw.iter().enumerate() {
                    jac[(base + 2 * k, col)] = z.re;
                    jac[(base + 2 * k + 1, col)] = z.im;
                }
            }
        }
    }
    (r, jac)
}

struct StartResult {
    params: Vec<f64>,
    cost: f64,
    costs: Vec<f64>,
    iterations: usize,
}

/// Levenberg-Marquardt from one starting point. The recorded cost only
/// ever decreases: rejected steps raise the damping and are not logged.
fn refine(mut x: Vec<f64>, targets: &[&DesignTarget]) -> StartResult {
    let n = x.len();
    let (mut r, mut jac) = residuals_and_jacobian(&x, targets);
    let mut cost = r.norm_squared();
    let mut costs = vec![cost];
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && cost > 1e-32 && lambda < 1e14 {
        iterations += 1;
        let jt = jac.transpose();
        let mut a = &jt * &jac;
        let g = &jt * &r;
        for i in 0..n {
            a[(i, i)] += lambda * (1.0 + a[(i, i)]);
        }
        let Some(chol) = a.cholesky() else {
            lambda *= 4.0;
            continue;
        };
        let step = chol.solve(&(-g));
        let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let (tr, tj) = residuals_and_jacobian(&trial, targets);
        let trial_cost = tr.norm_squared();
        if trial_cost < cost {
            x = trial;
            r = tr;
            jac = tj;
            let improvement = cost - trial_cost;
            cost = trial_cost;
            costs.push(cost);
            lambda = (lambda / 3.0).max(1e-15);
            if step.norm() < 1e-15 || improvement < 1e-34 {
                break;
            }
        } else {
            lambda *= 4.0;
        }
    }
    StartResult {
        params: x,
        cost,
        costs,
        iterations,
    }
}

/// Canonical parameters: non-negative areas (`R(φ, -θ) = R(φ + π, θ)`),
/// areas reduced mod 4π when every enhancement is an integer, phases in [0, 2π).
fn normalize(params: &mut [f64], integer_enhancements: bool) {
    for c in params.chunks_mut(2) {
        if c[0] < 0.0 {
            c[0] = -c[0];
            c[1] += std::f64::consts::PI;
        }
        if integer_enhancements {
            c[0] = c[0].rem_euclid(FOUR_PI);
        }
        c[1] = su2::wrap_angle(c[1]);
    }
}

/// Multi-start search at the problem's budget.
pub fn design(problem: &DesignProblem) -> Result<DesignSolution> {
    let targets = problem.active();
    let m = problem.budget;
    let hash = problem.hash();
    let finish = |seq: PulseSequence, trace: OptimizerTrace| {
        let residuals = problem.targets.iter().map(|t| t.residual(&seq)).collect();
        DesignSolution {
            problem: problem.clone(),
            problem_hash: hash.clone(),
            sequence: seq.named(problem.name.clone()),
            residuals,
            trace,
        }
    };
    if m == 0 || targets.is_empty() {
        let sol = finish(PulseSequence::default(), OptimizerTrace::default());
        return if sol.is_accepted() {
            Ok(sol)
        } else {
            Err(Error::NoSolutionFound {
                name: problem.name.clone(),
                budget: m,
                best: sol.max_residual(),
            })
        };
    }

    let results: Vec<StartResult> = (0..problem.starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
            rng.set_stream(start as u64);
            let x0: Vec<f64> = (0..m)
                .flat_map(|_| {
                    [
                        rng.random_range(0.0..FOUR_PI),
                        rng.random_range(0.0..std::f64::consts::TAU),
                    ]
                })
                .collect();
            refine(x0, &targets)
        })
        .collect();
    let (best_start, best) = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost).then(a.0.cmp(&b.0)))
        .expect("at least one start");

    let mut params = best.params.clone();
    normalize(&mut params, problem.integer_enhancements());
    let trace = OptimizerTrace {
        starts: problem.starts,
        best_start,
        iterations: best.iterations,
        costs: best.costs.clone(),
    };
    let sol = finish(sequence_from(&params, problem.species), trace);
    if sol.is_accepted() {
        Ok(sol)
    } else {
        Err(Error::NoSolutionFound {
            name: problem.name.clone(),
            budget: m,
            best: sol.max_residual(),
        })
    }
}

/// [`design`], raising the pulse budget one at a time up to [`MAX_BUDGET`].
pub fn design_escalating(problem: &DesignProblem) -> Result<DesignSolution> {
    let mut last = None;
    for budget in problem.budget..=MAX_BUDGET.max(problem.budget) {
        let attempt = DesignProblem {
            budget,
            ..problem.clone()
        };
        match design(&attempt) {
            Ok(mut sol) => {
                if budget != problem.budget {
                    log::info!(
                        "{}: solved with budget {budget} (requested {})",
                        problem.name,
                        problem.budget
                    );
                }
                // Key the solution by the request so cache lookups hit.
                sol.problem_hash = problem.hash();
                return Ok(sol);
            }
            Err(e @ Error::NoSolutionFound { .. }) => {
                log::info!("{}: no solution with {budget} pulses", problem.name);
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one budget tried"))
}

/// One replayed conditioning case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case: String,
    pub mode: Mode,
    /// Realized single-unit action. Blockaded cases only probe the `g`
    /// column; the `r` column is left zero in both matrices.
    #[serde(with = "su2::serde_mat2")]
    pub realized: Mat2,
    #[serde(with = "su2::serde_mat2")]
    pub target: Mat2,
    pub up_to_phase: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub cases: Vec<CaseRecord>,
    pub tolerance: f64,
}

impl Certificate {
    pub fn max_residual(&self) -> f64 {
        self.cases.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= self.tolerance
    }

    /// First failing case as an error.
    pub fn check(&self) -> Result<()> {
        match self
            .cases
            .iter()
            .find(|c| c.residual > self.tolerance || c.residual.is_nan())
        {
            Some(c) => Err(Error::CertificateMismatch {
                case: format!("{} ({:?})", c.case, c.mode),
                residual: c.residual,
                tolerance: self.tolerance,
            }),
            None => Ok(()),
        }
    }
}

/// Minimal context `Y - X - Y`: the driven unit of size `size` between two
/// single atoms of the other species.
fn context(species: Species, size: usize) -> BlockadeGraph {
    let other = species.other();
    BlockadeGraph::from_units(
        &[(other, 1), (species, size), (other, 1)],
        &[(0, 1), (1, 2)],
    )
}

/// Evolve the context in `mode` from unit-mode configuration `input` and
/// return the unit-mode result.
fn replay_context(
    seq: &PulseSequence,
    g: &BlockadeGraph,
    input: &Configuration,
    mode: Mode,
) -> Result<SparseState> {
    let start =
        SparseState::from_entries(Mode::Unit, 3, [(input.clone(), Complex64::new(1.0, 0.0))]);
    match mode {
        Mode::Unit => apply_sequence(&start, seq, g, EngineChoice::Auto),
        Mode::Physical => {
            let enc = SuperatomEncoding::new(g);
            let out = apply_sequence(&enc.lift(&start)?, seq, g, EngineChoice::Auto)?;
            enc.project(&out)
        }
    }
}

fn superatom_size(enhancement: f64) -> usize {
    (enhancement * enhancement).round().max(1.0) as usize
}

/// Replay `seq` in full many-body contexts for every target of `problem`,
/// in unit and physical mode.
pub fn certify_sequence(
    seq: &PulseSequence,
    problem: &DesignProblem,
    tolerance: f64,
) -> Result<Certificate> {
    let mut cases = Vec::new();
    for t in &problem.targets {
        let size = superatom_size(t.enhancement);
        let g = context(problem.species, size);
        let kind = if size == 1 { "atom" } else { "superatom" };
        for mode in [Mode::Unit, Mode::Physical] {
            let (realized, target, residual, case) = if t.blockaded {
                let input = Configuration::parse("100").expect("literal");
                let out = replay_context(seq, &g, &input, mode)?;
                let a = out.amplitude(&input);
                let realized = Mat2::new(
                    a,
                    Complex64::default(),
                    Complex64::default(),
                    Complex64::default(),
                );
                let target = Mat2::new(
                    Complex64::new(1.0, 0.0),
                    Complex64::default(),
                    Complex64::default(),
                    Complex64::default(),
                );
                let residual = if t.up_to_phase {
                    (a.norm() - 1.0).abs() + (1.0 - out.norm_sqr()).abs()
                } else {
                    (a - 1.0).norm() + (1.0 - out.norm_sqr()).abs()
                };
                (realized, target, residual, format!("{kind} blockaded"))
            } else {
                let cg = Configuration::parse("000").expect("literal");
                let cr = Configuration::parse("010").expect("literal");
                let from_g = replay_context(seq, &g, &cg, mode)?;
                let from_r = replay_context(seq, &g, &cr, mode)?;
                let realized = Mat2::new(
                    from_g.amplitude(&cg),
                    from_r.amplitude(&cg),
                    from_g.amplitude(&cr),
                    from_r.amplitude(&cr),
                );
                // Weight that went anywhere but the centre unit.
                let stray = (from_g.norm_sqr()
                    - from_g.amplitude(&cg).norm_sqr()
                    - from_g.amplitude(&cr).norm_sqr())
                .abs()
                    + (from_r.norm_sqr()
                        - from_r.amplitude(&cg).norm_sqr()
                        - from_r.amplitude(&cr).norm_sqr())
                    .abs();
                let d = if t.up_to_phase {
                    su2::phase_distance(&realized, &t.target)
                } else {
                    su2::distance(&realized, &t.target)
                };
                (realized, t.target, d + stray, format!("{kind} free"))
            };
            cases.push(CaseRecord {
                case: format!("{}: {case}", problem.name),
                mode,
                realized,
                target,
                up_to_phase: t.up_to_phase,
                residual,
            });
        }
    }
    Ok(Certificate { cases, tolerance })
}

/// Certificate for an accepted solution; fails with `CertificateMismatch`.
pub fn verify_design(sol: &DesignSolution) -> Result<Certificate> {
    let cert = certify_sequence(&sol.sequence, &sol.problem, CERTIFICATE_TOLERANCE)?;
    cert.check()?;
    Ok(cert)
}

fn minus_i_x() -> Mat2 {
    su2::pauli_x() * Complex64::new(0.0, -1.0)
}

/// Conditional flip on A: atoms and superatoms both flip.
pub fn ua_flip_problem(superatom_size: usize) -> DesignProblem {
    let e = (superatom_size as f64).sqrt();
    DesignProblem::new(
        "UA_flip",
        Species::A,
        vec![
            DesignTarget::exact(1.0, minus_i_x()),
            DesignTarget::exact(e, minus_i_x()),
            DesignTarget::blockaded(1.0),
            DesignTarget::blockaded(e),
        ],
    )
}

/// Conditional flip on B: atoms flip, superatoms (couplers) idle.
pub fn ub_flip_problem(superatom_size: usize) -> DesignProblem {
    let e = (superatom_size as f64).sqrt();
    DesignProblem::new(
        "UB_flip",
        Species::B,
        vec![
            DesignTarget::exact(1.0, minus_i_x()),
            DesignTarget::exact(e, su2::identity()),
            DesignTarget::blockaded(1.0),
            DesignTarget::blockaded(e),
        ],
    )
}

/// B drive giving -1 to free atoms and free superatoms alike.
pub fn cz_star_problem(superatom_size: usize) -> DesignProblem {
    let e = (superatom_size as f64).sqrt();
    let minus = -su2::identity();
    DesignProblem::new(
        "cz_star",
        Species::B,
        vec![
            DesignTarget::exact(1.0, minus),
            DesignTarget::exact(e, minus),
            DesignTarget::blockaded(1.0),
            DesignTarget::blockaded(e),
        ],
    )
}

pub fn required_problems(superatom_size: usize) -> Vec<DesignProblem> {
    vec![
        ua_flip_problem(superatom_size),
        ub_flip_problem(superatom_size),
        cz_star_problem(superatom_size),
    ]
}

/// Solutions keyed by problem hash.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DesignCache {
    pub entries: BTreeMap<String, DesignSolution>,
}

impl DesignCache {
    /// A missing file is an empty cache.
    pub fn load(path: &Path) -> Result<Self> {
        match std::fs::read_to_string(path) {
            Ok(text) => Ok(serde_json::from_str(&text)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn get(&self, problem: &DesignProblem) -> Option<&DesignSolution> {
        self.entries.get(&problem.hash())
    }

    pub fn insert(&mut self, sol: DesignSolution) {
        self.entries.insert(sol.problem_hash.clone(), sol);
    }

    /// Cached solution, or a fresh escalating design when absent or forced.
    /// Either way the result is re-verified before it is returned.
    pub fn resolve(&mut self, problem: &DesignProblem, force: bool) -> Result<DesignSolution> {
        let sol = match self.get(problem) {
            Some(sol) if !force => sol.clone(),
            _ => {
                let sol = design_escalating(problem)?;
                self.insert(sol.clone());
                sol
            }
        };
        verify_design(&sol)?;
        Ok(sol)
    }
}
