use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nehari_core::fibering::empirical_degeneracy_threshold;
use nehari_core::field::{read_field_csv, write_field_csv};
use nehari_core::keyvalue::real;
use nehari_core::{
    best_sobolev_constant, fibering_phi, find_nehari_scalings, find_two_solutions, m0_empty_certificate, seed_pair,
    verify_solution, Field, KeyValue, Mesh, PairField, SeedStrategy, SolverReport,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Artifact, RunSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Solve,
    Fibering,
    Thresholds,
    Sobolev,
    Verify,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Solve => "solve",
            Command::Fibering => "fibering",
            Command::Thresholds => "thresholds",
            Command::Sobolev => "sobolev",
            Command::Verify => "verify",
        })
    }
}

/// Summary plus the files a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: RunSummary,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }
}

/// Runs a command. Failures are recorded in the summary, never returned.
///
/// `fields_dir` is where `verify` looks for solution fields when the
/// configuration names none.
pub fn run_command(command: Command, config: &RunConfig, fields_dir: Option<&Path>) -> Outcome {
    let mut outcome = Outcome {
        summary: RunSummary::new(command),
        artifacts: Vec::new(),
    };
    outcome.summary.config_echo = Some(config.echo());
    let result = match command {
        Command::Solve => solve(config, &mut outcome),
        Command::Fibering => fibering(config, &mut outcome),
        Command::Thresholds => thresholds(config, &mut outcome),
        Command::Sobolev => sobolev(config, &mut outcome),
        Command::Verify => verify(config, fields_dir, &mut outcome),
    };
    if let Err(e) = result {
        outcome.summary.exit_code = e.exit_code();
        outcome.summary.error = Some(e.to_string());
    }
    outcome
}

fn field_csv(mesh: &Mesh, field: &Field) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_field_csv(mesh, field, &mut buf)?;
    Ok(buf)
}

fn push(outcome: &mut Outcome, name: impl Into<String>, bytes: Vec<u8>) {
    outcome.artifacts.push(Artifact {
        name: name.into(),
        bytes,
    });
}

fn solve(config: &RunConfig, outcome: &mut Outcome) -> Result<(), CliError> {
    let params = config.problem();
    let two = find_two_solutions(params, &config.solver)?;
    let summary = &mut outcome.summary;
    summary.warnings.extend(two.warnings.iter().cloned());
    summary.section(
        "solution",
        vec![
            ("success".into(), two.success.to_string()),
            ("distinctness".into(), real(two.distinctness)),
            (
                "distinctness_threshold".into(),
                real(nehari_core::descent::DISTINCTNESS_THRESHOLD),
            ),
            ("positivity_floor".into(), real(config.solver.positivity_floor)),
        ],
    );
    summary.section("plus", two.plus.key_values());
    summary.section("minus", two.minus.key_values());
    if let Some(cert) = &two.certificate {
        summary.section("certificate", cert.key_values());
    }

    let mesh = params.mesh();
    let reports: [(&str, &SolverReport); 2] = [("plus", &two.plus), ("minus", &two.minus)];
    if config.output.emit_fields {
        for (name, r) in reports {
            push(outcome, format!("u_{name}.csv"), field_csv(mesh, &r.solution.u)?);
            push(outcome, format!("v_{name}.csv"), field_csv(mesh, &r.solution.v)?);
        }
    }
    for (name, r) in reports {
        let mut buf = Vec::new();
        r.write_energy_history_csv(&mut buf)?;
        push(outcome, format!("energy_history_{name}.csv"), buf);
    }

    if !two.success {
        let mut reasons = Vec::new();
        for (name, r) in reports {
            if !r.converged {
                reasons.push(format!("{name} branch stopped without converging ({})", r.stop_reason));
            }
            if !(r.min_interior_u > config.solver.positivity_floor && r.min_interior_v > config.solver.positivity_floor)
            {
                reasons.push(format!("{name} solution is not positive"));
            }
        }
        return Err(CliError::Failed(reasons.join("; ")));
    }
    Ok(())
}

fn fibering(config: &RunConfig, outcome: &mut Outcome) -> Result<(), CliError> {
    let params = config.problem();
    let exps = params.exponents();
    let direction = seed_pair(params, config.solver.seed)?;
    let diag = params.nehari_quantities(&direction)?;
    let analysis = find_nehari_scalings(exps, &diag)?;
    outcome.summary.section(
        "direction",
        std::iter::once(("seed".to_string(), config.solver.seed.to_string()))
            .chain(diag.key_values())
            .collect(),
    );
    outcome.summary.section("analysis", analysis.key_values());

    let t_ref = if !analysis.roots.is_empty() {
        let logs: f64 = analysis.roots.iter().map(|r| r.t.ln()).sum();
        (logs / analysis.roots.len() as f64).exp()
    } else if let Some(t) = analysis.t_max {
        t
    } else if diag.b != 0.0 {
        (diag.k / diag.b.abs()).powf(1.0 / (exps.rs() - exps.p))
    } else {
        1.0
    };
    let (samples, span) = (config.fibering.samples, config.fibering.span);
    let mut csv = String::from("t,phi,dphi\n");
    for i in 0..samples {
        let frac = i as f64 / (samples - 1) as f64;
        let t = t_ref * span.powf(2.0 * frac - 1.0);
        let (phi, dphi) = fibering_phi(exps, &diag, t)?;
        csv.push_str(&format!("{},{},{}\n", real(t), real(phi), real(dphi)));
    }
    push(outcome, "fibering.csv", csv.into_bytes());
    Ok(())
}

/// Directions sampled for the empirical degeneracy estimate.
const EMPIRICAL_DIRECTIONS: u64 = 16;

fn thresholds(config: &RunConfig, outcome: &mut Outcome) -> Result<(), CliError> {
    let params = config.problem();
    let exps = params.exponents();
    let s_q = best_sobolev_constant(params.mesh(), exps.p, exps.q)?;
    let s_rs = best_sobolev_constant(params.mesh(), exps.p, exps.rs())?;
    let cert = m0_empty_certificate(params, s_rs.value, s_q.value, params.lambda(), params.mu())?;
    outcome.summary.section("certificate", cert.key_values());
    outcome.summary.section("S_q", s_q.key_values());
    outcome.summary.section("S_rs", s_rs.key_values());

    let mut directions = vec![
        seed_pair(params, SeedStrategy::Hat)?,
        seed_pair(params, SeedStrategy::Eigenfunction)?,
    ];
    for k in 1..=EMPIRICAL_DIRECTIONS - 2 {
        directions.push(seed_pair(params, SeedStrategy::Random(k))?);
    }
    let estimate = empirical_degeneracy_threshold(params, &directions)?;
    outcome.summary.section(
        "empirical",
        vec![
            ("directions".into(), directions.len().to_string()),
            (
                "degeneracy_threshold".into(),
                estimate.map_or_else(|| "none".to_string(), real),
            ),
            ("note".into(), "sampled estimate with mu = lambda, not a bound".into()),
        ],
    );
    Ok(())
}

fn sobolev(config: &RunConfig, outcome: &mut Outcome) -> Result<(), CliError> {
    let params = config.problem();
    let exps = params.exponents();
    for (name, l) in [("q", exps.q), ("rs", exps.rs()), ("p", exps.p)] {
        let c = best_sobolev_constant(params.mesh(), exps.p, l)?;
        outcome.summary.section(format!("sobolev.{name}"), c.key_values());
        if config.output.emit_fields {
            let bytes = field_csv(params.mesh(), &c.minimizer)?;
            push(outcome, format!("minimizer_{name}.csv"), bytes);
        }
    }
    Ok(())
}

fn read_field(mesh: &Mesh, path: &Path) -> Result<Field, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::ConfigInvalid {
        key: "u".into(),
        reason: format!("{}: {e}", path.display()),
        line: None,
    })?;
    Ok(read_field_csv(mesh, file)?)
}

fn verify(config: &RunConfig, fields_dir: Option<&Path>, outcome: &mut Outcome) -> Result<(), CliError> {
    let params = config.problem();
    let mut targets: Vec<(String, PathBuf, PathBuf)> = Vec::new();
    if let (Some(u), Some(v)) = (&config.verify.u, &config.verify.v) {
        targets.push(("given".into(), u.clone(), v.clone()));
    } else if let Some(dir) = fields_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output.directory.clone())
    {
        for name in ["plus", "minus"] {
            let (u, v) = (dir.join(format!("u_{name}.csv")), dir.join(format!("v_{name}.csv")));
            if u.exists() && v.exists() {
                targets.push((name.into(), u, v));
            }
        }
    }
    if targets.is_empty() {
        return Err(CliError::ConfigInvalid {
            key: "u".into(),
            reason: "no solution fields to verify".into(),
            line: None,
        });
    }

    let mut failures = Vec::new();
    for (name, u, v) in targets {
        let pair = PairField::new(
            params.mesh(),
            read_field(params.mesh(), &u)?,
            read_field(params.mesh(), &v)?,
        )?;
        let check = verify_solution(params, &pair, config.verify.tol)?;
        let mut entries = vec![
            ("u".to_string(), u.display().to_string()),
            ("v".to_string(), v.display().to_string()),
            ("tol".to_string(), real(config.verify.tol)),
        ];
        entries.extend(check.key_values());
        outcome.summary.section(format!("verify.{name}"), entries);
        if !check.passed {
            failures.push(format!(
                "{name}: residual_max {:e} (tol {:e}), branch {}",
                check.residual_max, config.verify.tol, check.branch
            ));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "verification failed for {}",
            failures.join("; ")
        )))
    }
}
