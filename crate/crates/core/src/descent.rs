//! Energy minimization over `M+` and `M−`.
//!
//! Each iterate lives on the requested branch. A step moves along the
//! negative Sobolev gradient (the weak residual mapped through the inverse
//! Dirichlet Laplacian) and is pulled back to the branch by the fibering
//! scaling; a backtracking line search enforces Armijo decrease of `J`.
//! Energy decreases are measured with [`ProblemParams::energy_change`] so
//! the line search keeps working after `J` itself stops resolving them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{Branch, NehariClass, ProblemParams, Tolerances};
use crate::error::{NehariError, Result};
use crate::fibering::{m0_empty_certificate, project_to_branch, ThresholdCertificate};
use crate::field::{Field, PairField};
use crate::keyvalue::{real, KeyValue};
use crate::laplacian::DirichletLaplacian;
use crate::mesh::Mesh;
use crate::sobolev::best_sobolev_constant;

/// Maximum number of seeds tried before a branch is declared infeasible.
pub const MAX_SEED_ATTEMPTS: usize = 10;
/// Relative `L²` distance below which two solutions are considered equal.
pub const DISTINCTNESS_THRESHOLD: f64 = 1e-3;
/// Accepted steps without a new best residual before an energy stall stops the run.
const STALL_WINDOW: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStrategy {
    Hat,
    Eigenfunction,
    Random(u64),
}

impl FromStr for SeedStrategy {
    type Err = NehariError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "hat" => return Ok(SeedStrategy::Hat),
            "eigenfunction" => return Ok(SeedStrategy::Eigenfunction),
            _ => {}
        }
        s.strip_prefix("random(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|n| n.trim().parse().ok())
            .map(SeedStrategy::Random)
            .ok_or_else(|| NehariError::InvalidParams(format!("unknown seed strategy `{s}`")))
    }
}

impl fmt::Display for SeedStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedStrategy::Hat => f.write_str("hat"),
            SeedStrategy::Eigenfunction => f.write_str("eigenfunction"),
            SeedStrategy::Random(s) => write!(f, "random({s})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub step_initial: f64,
    pub armijo_factor: f64,
    pub armijo_slope: f64,
    /// Absolute bound on the nodal residual max-norm.
    pub tol_residual: f64,
    /// Relative energy decrease that counts as a stalled step.
    pub tol_energy: f64,
    pub seed: SeedStrategy,
    pub positivity_floor: f64,
    pub tolerances: Tolerances,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 5000,
            step_initial: 1.0,
            armijo_factor: 0.5,
            armijo_slope: 1e-4,
            tol_residual: 1e-8,
            tol_energy: 1e-12,
            seed: SeedStrategy::Hat,
            positivity_floor: 0.0,
            tolerances: Tolerances::default(),
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(NehariError::InvalidParams(msg.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.step_initial > 0.0 && self.step_initial.is_finite()) {
            return bad("step_initial must be positive");
        }
        if !(self.armijo_factor > 0.0 && self.armijo_factor < 1.0) {
            return bad("armijo_factor must lie in (0, 1)");
        }
        if !(self.armijo_slope > 0.0 && self.armijo_slope < 1.0) {
            return bad("armijo_slope must lie in (0, 1)");
        }
        if !(self.tol_residual > 0.0 && self.tol_energy > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.tolerances.manifold > 0.0 && self.tolerances.zero > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.positivity_floor >= 0.0) {
            return bad("positivity_floor must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Residual,
    EnergyStall,
    LineSearchStall,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Residual => "residual",
            StopReason::EnergyStall => "energy-stall",
            StopReason::LineSearchStall => "line-search-stall",
        })
    }
}

/// Outcome of a minimization on one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub branch: Branch,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub energy: f64,
    /// Energy of every accepted iterate, seed first; accumulated from the
    /// per-step energy changes, hence non-increasing.
    pub energy_history: Vec<f64>,
    /// `‖(u,v)‖^p` of every accepted iterate.
    pub norm_history: Vec<f64>,
    /// Relative constraint residual of every accepted iterate.
    pub constraint_history: Vec<f64>,
    /// `(p−q)A + (p−r−s)B` of every accepted iterate.
    pub pairing_history: Vec<f64>,
    pub residual_max: f64,
    pub constraint_residual: f64,
    pub min_interior_u: f64,
    pub min_interior_v: f64,
    pub seed_used: String,
    pub seed_attempts: usize,
    pub solution: PairField,
}

impl KeyValue for SolverReport {
    fn key_values(&self) -> Vec<(String, String)> {
        [
            ("branch", self.branch.to_string()),
            ("converged", self.converged.to_string()),
            ("stop_reason", self.stop_reason.to_string()),
            ("iterations", self.iterations.to_string()),
            ("energy", real(self.energy)),
            ("residual_max", real(self.residual_max)),
            ("constraint_residual", real(self.constraint_residual)),
            ("min_interior_u", real(self.min_interior_u)),
            ("min_interior_v", real(self.min_interior_v)),
            ("seed", self.seed_used.clone()),
            ("seed_attempts", self.seed_attempts.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

impl SolverReport {
    /// Writes `iteration,energy,norm_p` rows.
    pub fn write_energy_history_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["iteration", "energy", "norm_p"])?;
        for (i, (e, k)) in self.energy_history.iter().zip(&self.norm_history).enumerate() {
            out.write_record([i.to_string(), real(*e), real(*k)])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn interior_max_abs(mesh: &Mesh, pair: &PairField) -> f64 {
    mesh.interior().iter().fold(0.0f64, |m, &i| {
        m.max(pair.u.values()[i].abs()).max(pair.v.values()[i].abs())
    })
}

fn inner(mesh: &Mesh, a: &PairField, b: &PairField) -> f64 {
    mesh.weights()
        .iter()
        .enumerate()
        .map(|(i, w)| w * (a.u.values()[i] * b.u.values()[i] + a.v.values()[i] * b.v.values()[i]))
        .sum()
}

/// `‖a − b‖_{L²} / max(‖a‖_{L²}, ‖b‖_{L²})` under quadrature.
pub fn relative_l2_distance(mesh: &Mesh, a: &PairField, b: &PairField) -> f64 {
    let diff = a.axpy(-1.0, b);
    let scale = a.l2_norm_sq(mesh).max(b.l2_norm_sq(mesh)).sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff.l2_norm_sq(mesh).sqrt() / scale
    }
}

/// The nonnegative seed pair of a strategy, before any projection.
pub fn seed_pair(params: &ProblemParams, strategy: SeedStrategy) -> Result<PairField> {
    let base = base_seed(params, strategy)?;
    Ok(PairField {
        u: base.u.map(|x| x.max(0.0)),
        v: base.v.map(|x| x.max(0.0)),
    })
}

fn base_seed(params: &ProblemParams, strategy: SeedStrategy) -> Result<PairField> {
    let mesh = params.mesh();
    let (u, v) = match strategy {
        SeedStrategy::Hat => (mesh.hat(), mesh.hat()),
        SeedStrategy::Eigenfunction => {
            let (_, phi) = crate::sobolev::first_eigenpair(mesh)?;
            (phi.clone(), phi)
        }
        SeedStrategy::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || {
                let mut f = Field::zeros(mesh.node_count());
                for &i in mesh.interior() {
                    f.values_mut()[i] = rng.gen::<f64>();
                }
                f
            };
            let u = draw();
            (u, draw())
        }
    };
    Ok(PairField { u, v })
}

/// Normalized positive part of `scale·w`, in `[0, 1]`.
fn positive_mask(w: &Field, scale: f64) -> Field {
    let pos = w.map(|x| (scale * x).max(0.0));
    let top = pos.max();
    if top > 0.0 {
        pos.scaled(1.0 / top)
    } else {
        pos
    }
}

fn masked(params: &ProblemParams, seed: &PairField, branch: Branch) -> PairField {
    let (mu_mask, mv_mask) = match branch {
        Branch::Plus => (
            positive_mask(params.f(), params.lambda()),
            positive_mask(params.g(), params.mu()),
        ),
        Branch::Minus => (positive_mask(params.h(), 1.0), positive_mask(params.h(), 1.0)),
    };
    let apply = |f: &Field, m: &Field| Field::new(f.values().iter().zip(m.values()).map(|(a, b)| a * b).collect());
    PairField {
        u: apply(&seed.u, &mu_mask),
        v: apply(&seed.v, &mv_mask),
    }
}

/// Seeds tried in order: the configured one, the other deterministic
/// shapes, then random draws; each followed by its copy restricted to where
/// the branch-relevant weight is positive.
fn seed_candidates(options: &SolverOptions) -> Vec<SeedStrategy> {
    let mut list = vec![options.seed];
    for s in [SeedStrategy::Hat, SeedStrategy::Eigenfunction] {
        if !list.contains(&s) {
            list.push(s);
        }
    }
    let start = match options.seed {
        SeedStrategy::Random(s) => s,
        _ => 0,
    };
    let mut k = 1;
    while list.len() < MAX_SEED_ATTEMPTS {
        list.push(SeedStrategy::Random(start.wrapping_add(k)));
        k += 1;
    }
    list
}

fn initial_point(
    params: &ProblemParams,
    branch: Branch,
    options: &SolverOptions,
) -> Result<(PairField, String, usize)> {
    let mut attempts = 0;
    for strategy in seed_candidates(options) {
        let base = seed_pair(params, strategy)?;
        for (label, seed) in [
            (strategy.to_string(), base.clone()),
            (format!("masked-{strategy}"), masked(params, &base, branch)),
        ] {
            if attempts == MAX_SEED_ATTEMPTS {
                break;
            }
            attempts += 1;
            match project_to_branch(params, &seed, branch) {
                Ok(pair) => return Ok((pair, label, attempts)),
                Err(NehariError::NoScaling(_) | NehariError::ZeroPair) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Err(NehariError::BranchInfeasible {
        branch: branch.into(),
        attempts,
    })
}

/// Minimizes `J` over the requested branch of the Nehari manifold.
pub fn minimize_on_branch(params: &ProblemParams, branch: Branch, options: &SolverOptions) -> Result<SolverReport> {
    options.validate()?;
    let mesh = params.mesh();
    let laplacian = DirichletLaplacian::new(mesh);
    let (mut x, seed_used, seed_attempts) = initial_point(params, branch, options)?;

    let mut diag = params.nehari_quantities_with(&x, options.tolerances)?;
    let mut energy_history = vec![params.energy(&x)?];
    let mut norm_history = vec![diag.k];
    let mut constraint_history = vec![diag.relative_constraint()];
    let mut pairing_history = vec![diag.pairing];
    let mut step = options.step_initial;
    let mut best_residual = f64::INFINITY;
    let mut since_best = 0;
    let mut iterations = 0;

    let (stop_reason, residual_max) = loop {
        let residual = params.weak_residual(&x)?;
        let residual_max = interior_max_abs(mesh, &residual);
        if residual_max <= options.tol_residual {
            break (StopReason::Residual, residual_max);
        }
        if residual_max < best_residual {
            best_residual = residual_max;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if iterations == options.max_iterations {
            return Err(NehariError::NonConvergence {
                context: format!("{branch} branch descent (residual {residual_max:e})"),
                iterations,
            });
        }

        let direction = PairField {
            u: Field::new(laplacian.solve(residual.u.values())),
            v: Field::new(laplacian.solve(residual.v.values())),
        };
        let slope = inner(mesh, &residual, &direction);

        let mut tau = step;
        let mut first_try = true;
        let mut accepted = None;
        while tau >= 1e-16 * options.step_initial {
            let trial = x.axpy(-tau, &direction);
            match project_to_branch(params, &trial, branch) {
                Ok(candidate) => {
                    let change = params.energy_change(&x, &candidate)?;
                    if change <= -options.armijo_slope * tau * slope {
                        accepted = Some((candidate, change));
                        break;
                    }
                }
                Err(NehariError::NoScaling(_) | NehariError::ZeroPair) => {}
                Err(e) => return Err(e),
            }
            tau *= options.armijo_factor;
            first_try = false;
        }
        let Some((candidate, change)) = accepted else {
            break (StopReason::LineSearchStall, residual_max);
        };

        iterations += 1;
        x = candidate;
        diag = params.nehari_quantities_with(&x, options.tolerances)?;
        let current = *energy_history.last().expect("history starts with the seed") + change;
        energy_history.push(current);
        norm_history.push(diag.k);
        constraint_history.push(diag.relative_constraint());
        pairing_history.push(diag.pairing);
        // minimizer of the quadratic through J(0), J'(0) and J(tau)
        let curvature = 2.0 * (change + tau * slope) / (tau * tau);
        let grow = if first_try { 1.0 / options.armijo_factor } else { 1.0 };
        step = if curvature > 0.0 {
            (slope / curvature).clamp(0.25 * tau, grow * 4.0 * tau)
        } else {
            grow * tau
        };

        if -change <= options.tol_energy * current.abs() && since_best >= STALL_WINDOW {
            let residual_max = interior_max_abs(mesh, &params.weak_residual(&x)?);
            break (StopReason::EnergyStall, residual_max);
        }
    };

    let constraint_residual = diag.relative_constraint();
    let converged = residual_max <= options.tol_residual
        && constraint_residual <= options.tolerances.manifold
        && diag.branch == NehariClass::from(branch);
    Ok(SolverReport {
        branch,
        converged,
        stop_reason,
        iterations,
        energy: params.energy(&x)?,
        energy_history,
        norm_history,
        constraint_history,
        pairing_history,
        residual_max,
        constraint_residual,
        min_interior_u: x.u.interior_min(mesh),
        min_interior_v: x.v.interior_min(mesh),
        seed_used,
        seed_attempts,
        solution: x,
    })
}

/// Both branch minimizers and how they compare.
#[derive(Debug, Clone)]
pub struct TwoSolutions {
    pub plus: SolverReport,
    pub minus: SolverReport,
    pub distinctness: f64,
    /// Both converged, all interior minima above the floor, and distinct.
    pub success: bool,
    pub certificate: Option<ThresholdCertificate>,
    pub warnings: Vec<String>,
}

/// Embedding-constant certificate for the parameters' own `(λ, μ)`.
pub fn certificate_for(params: &ProblemParams) -> Result<ThresholdCertificate> {
    let exps = params.exponents();
    let s_q = best_sobolev_constant(params.mesh(), exps.p, exps.q)?;
    let s_rs = best_sobolev_constant(params.mesh(), exps.p, exps.rs())?;
    m0_empty_certificate(params, s_rs.value, s_q.value, params.lambda(), params.mu())
}

/// Runs both branches (concurrently) and checks positivity and distinctness.
pub fn find_two_solutions(params: &ProblemParams, options: &SolverOptions) -> Result<TwoSolutions> {
    options.validate()?;
    let mut warnings = Vec::new();
    let certificate = match certificate_for(params) {
        Ok(cert) => {
            if !cert.certified {
                warnings.push(format!(
                    "(lambda, mu) = ({}, {}) lies outside the certified region |lambda| = |mu| < {}",
                    params.lambda(),
                    params.mu(),
                    cert.lambda0
                ));
            }
            Some(cert)
        }
        Err(e) => {
            warnings.push(format!("threshold certificate unavailable: {e}"));
            None
        }
    };

    let (plus, minus) = std::thread::scope(|scope| {
        let plus = scope.spawn(|| minimize_on_branch(params, Branch::Plus, options));
        let minus = minimize_on_branch(params, Branch::Minus, options);
        (plus.join().expect("plus-branch solver panicked"), minus)
    });
    let (plus, minus) = (plus?, minus?);

    let distinctness = relative_l2_distance(params.mesh(), &plus.solution, &minus.solution);
    if plus.converged && minus.converged && distinctness <= DISTINCTNESS_THRESHOLD {
        return Err(NehariError::DistinctnessFailure { distance: distinctness });
    }
    let floor = options.positivity_floor;
    let positive = [
        plus.min_interior_u,
        plus.min_interior_v,
        minus.min_interior_u,
        minus.min_interior_v,
    ]
    .iter()
    .all(|&m| m > floor);
    let success = plus.converged && minus.converged && positive && distinctness > DISTINCTNESS_THRESHOLD;
    Ok(TwoSolutions {
        plus,
        minus,
        distinctness,
        success,
        certificate,
        warnings,
    })
}

/// Certificates of a candidate solution, recomputed from scratch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub residual_max: f64,
    pub constraint_residual: f64,
    pub min_interior_u: f64,
    pub min_interior_v: f64,
    pub branch: NehariClass,
    pub energy: f64,
    pub passed: bool,
}

impl Verification {
    pub fn positivity(&self) -> f64 {
        self.min_interior_u.min(self.min_interior_v)
    }
}

impl KeyValue for Verification {
    fn key_values(&self) -> Vec<(String, String)> {
        [
            ("residual_max", real(self.residual_max)),
            ("constraint_residual", real(self.constraint_residual)),
            ("positivity", self.positivity().to_string()),
            ("branch", self.branch.to_string()),
            ("energy", real(self.energy)),
            ("passed", self.passed.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Checks a pair against the weak form and the manifold; `passed` requires
/// `residual_max ≤ tol` and a nondegenerate branch.
pub fn verify_solution(params: &ProblemParams, pair: &PairField, tol: f64) -> Result<Verification> {
    let diag = params.nehari_quantities(pair)?;
    let mesh = params.mesh();
    let residual_max = interior_max_abs(mesh, &params.weak_residual(pair)?);
    let passed = residual_max <= tol && matches!(diag.branch, NehariClass::Plus | NehariClass::Minus);
    Ok(Verification {
        residual_max,
        constraint_residual: diag.relative_constraint(),
        min_interior_u: pair.u.interior_min(mesh),
        min_interior_v: pair.v.interior_min(mesh),
        branch: diag.branch,
        energy: params.energy(pair)?,
        passed,
    })
}
