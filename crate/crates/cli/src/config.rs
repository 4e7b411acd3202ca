//! `key = value` run configuration grouped under `[section]` headers.
//!
//! ```text
//! [mesh]
//! dimension = 1
//! x = 0, 1
//! nodes = 201
//!
//! [params]
//! p = 2
//! q = 1.5
//! r = 3
//! s = 3
//! lambda = 0.1
//! mu = 0.1
//! f = cosine(1)
//! ```
//!
//! Weights accept `constant(c)`, `cosine(k)`, a bare number, or
//! `table(path)` naming a field CSV. Relative paths resolve against the
//! directory holding the configuration file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nehari_core::field::read_field_csv;
use nehari_core::{Exponents, Mesh, ProblemParams, SeedStrategy, SolverOptions, Tolerances, WeightPreset};

use crate::error::CliError;

const SECTIONS: &[(&str, &[&str])] = &[
    ("mesh", &["dimension", "x", "y", "nodes"]),
    (
        "params",
        &[
            "system", "p", "q", "r", "s", "alpha", "beta", "lambda", "mu", "f", "g", "h", "a", "b",
        ],
    ),
    (
        "solver",
        &[
            "max_iterations",
            "step_initial",
            "armijo_factor",
            "armijo_slope",
            "tol_residual",
            "tol_energy",
            "seed",
            "positivity_floor",
            "tol_manifold",
            "tol_zero",
        ],
    ),
    ("output", &["directory", "emit_fields"]),
    ("fibering", &["samples", "span"]),
    ("verify", &["u", "v", "tol"]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    /// The general coupled system.
    Coupled,
    /// The `p = 2` instance with `μ = λ`, `f = g = a`, `h = b`; its coupling
    /// coefficients are read as `α/(α+β)` and `β/(α+β)`.
    Laplacian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    pub dimension: usize,
    pub extents: Vec<(f64, f64)>,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Preset(WeightPreset),
    Table(PathBuf),
}

impl WeightSpec {
    fn echo(&self) -> String {
        match self {
            WeightSpec::Preset(p) => p.to_string(),
            WeightSpec::Table(path) => format!("table({})", path.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamsConfig {
    pub system: System,
    pub exponents: Exponents,
    pub lambda: f64,
    pub mu: f64,
    pub f: WeightSpec,
    pub g: WeightSpec,
    pub h: WeightSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: Option<PathBuf>,
    pub emit_fields: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberingConfig {
    pub samples: usize,
    /// Samples cover `[t_ref/span, t_ref·span]` geometrically.
    pub span: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub u: Option<PathBuf>,
    pub v: Option<PathBuf>,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub params: ParamsConfig,
    pub solver: SolverOptions,
    pub output: OutputConfig,
    pub fibering: FiberingConfig,
    pub verify: VerifyConfig,
    problem: ProblemParams,
}

impl RunConfig {
    /// The validated problem, with weights sampled on the mesh.
    pub fn problem(&self) -> &ProblemParams {
        &self.problem
    }

    /// Canonical text of every effective setting, defaults included; loading
    /// it reproduces the run.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let m = &self.mesh;
        let join = |xs: Vec<String>| xs.join(", ");
        let _ = writeln!(out, "[mesh]\ndimension = {}", m.dimension);
        for (name, (lo, hi)) in ["x", "y"].iter().zip(&m.extents) {
            let _ = writeln!(out, "{name} = {lo:?}, {hi:?}");
        }
        let _ = writeln!(out, "nodes = {}", join(m.nodes.iter().map(|n| n.to_string()).collect()));

        let p = &self.params;
        let e = &p.exponents;
        let _ = writeln!(out, "\n[params]");
        match p.system {
            System::Coupled => {
                let _ = writeln!(
                    out,
                    "system = coupled\np = {:?}\nq = {:?}\nr = {:?}\ns = {:?}",
                    e.p, e.q, e.r, e.s
                );
                let _ = writeln!(out, "lambda = {:?}\nmu = {:?}", p.lambda, p.mu);
                let _ = writeln!(out, "f = {}\ng = {}\nh = {}", p.f.echo(), p.g.echo(), p.h.echo());
            }
            System::Laplacian => {
                let _ = writeln!(
                    out,
                    "system = laplacian\nq = {:?}\nalpha = {:?}\nbeta = {:?}",
                    e.q, e.r, e.s
                );
                let _ = writeln!(out, "lambda = {:?}\na = {}\nb = {}", p.lambda, p.f.echo(), p.h.echo());
                let _ = writeln!(
                    out,
                    "# coupling coefficients read as alpha/(alpha+beta), beta/(alpha+beta)"
                );
            }
        }

        let s = &self.solver;
        let _ = writeln!(out, "\n[solver]");
        let _ = writeln!(out, "max_iterations = {}", s.max_iterations);
        let _ = writeln!(out, "step_initial = {:?}", s.step_initial);
        let _ = writeln!(out, "armijo_factor = {:?}", s.armijo_factor);
        let _ = writeln!(out, "armijo_slope = {:?}", s.armijo_slope);
        let _ = writeln!(out, "tol_residual = {:?}", s.tol_residual);
        let _ = writeln!(out, "tol_energy = {:?}", s.tol_energy);
        let _ = writeln!(out, "seed = {}", s.seed);
        let _ = writeln!(out, "positivity_floor = {:?}", s.positivity_floor);
        let _ = writeln!(out, "tol_manifold = {:?}", s.tolerances.manifold);
        let _ = writeln!(out, "tol_zero = {:?}", s.tolerances.zero);

        let _ = writeln!(out, "\n[output]");
        if let Some(dir) = &self.output.directory {
            let _ = writeln!(out, "directory = {}", dir.display());
        }
        let _ = writeln!(out, "emit_fields = {}", self.output.emit_fields);

        let _ = writeln!(
            out,
            "\n[fibering]\nsamples = {}\nspan = {:?}",
            self.fibering.samples, self.fibering.span
        );

        let _ = writeln!(out, "\n[verify]");
        if let Some(u) = &self.verify.u {
            let _ = writeln!(out, "u = {}", u.display());
        }
        if let Some(v) = &self.verify.v {
            let _ = writeln!(out, "v = {}", v.display());
        }
        let _ = writeln!(out, "tol = {:?}", self.verify.tol);
        out
    }
}

/// Drops a `#` comment that starts the line or follows whitespace.
fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    match (0..bytes.len()).find(|&i| bytes[i] == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace())) {
        Some(i) => &line[..i],
        None => line,
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Sections {
    map: BTreeMap<(String, String), Entry>,
    base: PathBuf,
}

fn invalid(key: &str, reason: impl Into<String>, line: Option<usize>) -> CliError {
    CliError::ConfigInvalid {
        key: key.to_string(),
        reason: reason.into(),
        line,
    }
}

impl Sections {
    fn parse(text: &str, base: PathBuf) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() || content.starts_with(';') {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|c| c.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(invalid(name, "unknown section", Some(line)));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(invalid(content, "expected `key = value`", Some(line)));
            };
            let key = key.trim();
            let Some(sec) = &section else {
                return Err(invalid(key, "key outside of any section", Some(line)));
            };
            let allowed = SECTIONS.iter().find(|(s, _)| s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(invalid(key, format!("unknown key in [{sec}]"), Some(line)));
            }
            let entry = Entry {
                value: value.trim().to_string(),
                line,
            };
            if let Some(prev) = map.insert((sec.clone(), key.to_string()), entry) {
                return Err(invalid(
                    key,
                    format!("duplicate key (first set on line {})", prev.line),
                    Some(line),
                ));
            }
        }
        Ok(Sections { map, base })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.map.get(&(section.to_string(), key.to_string()))
    }

    fn line(&self, section: &str, key: &str) -> Option<usize> {
        self.get(section, key).map(|e| e.line)
    }

    fn parsed<T: std::str::FromStr>(&self, section: &str, key: &str, what: &str) -> Result<Option<T>, CliError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|_| invalid(key, format!("expected {what}, got `{}`", e.value), Some(e.line))),
        }
    }

    fn real(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        match self.parsed::<f64>(section, key, "a number")? {
            Some(x) if !x.is_finite() => Err(invalid(key, "must be finite", self.line(section, key))),
            other => Ok(other),
        }
    }

    fn required_real(&self, section: &str, key: &str) -> Result<f64, CliError> {
        self.real(section, key)?
            .ok_or_else(|| invalid(key, format!("missing required key in [{section}]"), None))
    }

    fn list<T: std::str::FromStr>(&self, section: &str, key: &str, what: &str) -> Result<Option<Vec<T>>, CliError> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<T>()
                    .map_err(|_| invalid(key, format!("expected a comma-separated list of {what}"), Some(e.line)))
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    fn path(&self, section: &str, key: &str) -> Option<PathBuf> {
        self.get(section, key).map(|e| self.base.join(&e.value))
    }

    fn weight(&self, key: &str) -> Result<WeightSpec, CliError> {
        let Some(e) = self.get("params", key) else {
            return Ok(WeightSpec::Preset(WeightPreset::Constant(1.0)));
        };
        if let Some(path) = e.value.strip_prefix("table(").and_then(|r| r.strip_suffix(')')) {
            return Ok(WeightSpec::Table(self.base.join(path.trim())));
        }
        e.value
            .parse::<WeightPreset>()
            .map(WeightSpec::Preset)
            .map_err(|err| invalid(key, err.to_string(), Some(e.line)))
    }

    fn forbid(&self, section: &str, keys: &[&str], reason: &str) -> Result<(), CliError> {
        for key in keys {
            if let Some(e) = self.get(section, key) {
                return Err(invalid(key, reason, Some(e.line)));
            }
        }
        Ok(())
    }
}

fn parse_mesh(sec: &Sections) -> Result<MeshConfig, CliError> {
    let dimension = sec.parsed::<usize>("mesh", "dimension", "1 or 2")?.unwrap_or(1);
    if !(1..=2).contains(&dimension) {
        return Err(invalid("dimension", "must be 1 or 2", sec.line("mesh", "dimension")));
    }
    let mut extents = Vec::new();
    for axis in ["x", "y"].into_iter().take(dimension) {
        let pair = sec
            .list::<f64>("mesh", axis, "numbers")?
            .unwrap_or_else(|| vec![0.0, 1.0]);
        let line = sec.line("mesh", axis);
        if pair.len() != 2 {
            return Err(invalid(axis, "expected `lo, hi`", line));
        }
        if !(pair[0].is_finite() && pair[1].is_finite() && pair[1] > pair[0]) {
            return Err(invalid(axis, "requires finite lo < hi", line));
        }
        extents.push((pair[0], pair[1]));
    }
    if dimension == 1 {
        sec.forbid("mesh", &["y"], "only used when dimension = 2")?;
    }
    let line = sec.line("mesh", "nodes");
    let mut nodes = sec
        .list::<usize>("mesh", "nodes", "integers")?
        .ok_or_else(|| invalid("nodes", "missing required key in [mesh]", None))?;
    if nodes.len() == 1 && dimension == 2 {
        nodes.push(nodes[0]);
    }
    if nodes.len() != dimension {
        return Err(invalid("nodes", format!("expected {dimension} node count(s)"), line));
    }
    if nodes.iter().any(|&n| n < 3) {
        return Err(invalid("nodes", "requires at least 3 nodes per axis", line));
    }
    Ok(MeshConfig {
        dimension,
        extents,
        nodes,
    })
}

fn check_exponents(sec: &Sections, keys: [&str; 4], e: [f64; 4], dimension: usize) -> Result<Exponents, CliError> {
    let [p, q, r, s] = e;
    let line = |k: &str| sec.line("params", k);
    if !(p > 1.0) {
        return Err(invalid(keys[0], "requires p > 1", line(keys[0])));
    }
    if !(q > 1.0) {
        return Err(invalid(keys[1], "requires q > 1", line(keys[1])));
    }
    if !(q < p) {
        return Err(invalid(keys[1], "requires q < p", line(keys[1])));
    }
    if !(r > p) {
        return Err(invalid(keys[2], format!("requires {} > p", keys[2]), line(keys[2])));
    }
    if !(s > p) {
        return Err(invalid(keys[3], format!("requires {} > p", keys[3]), line(keys[3])));
    }
    let exps = Exponents::new(p, q, r, s).map_err(|err| invalid(keys[0], err.to_string(), line(keys[0])))?;
    let p_star = exps.p_star(dimension);
    if !(r + s < p_star) {
        return Err(invalid(
            keys[3],
            format!("requires {} + {} < p* = {p_star}", keys[2], keys[3]),
            line(keys[3]),
        ));
    }
    Ok(exps)
}

fn parse_params(sec: &Sections, dimension: usize) -> Result<ParamsConfig, CliError> {
    let system = match sec.get("params", "system").map(|e| (e.value.as_str(), e.line)) {
        None | Some(("coupled", _)) => System::Coupled,
        Some(("laplacian", _)) => System::Laplacian,
        Some((other, line)) => {
            return Err(invalid(
                "system",
                format!("expected `coupled` or `laplacian`, got `{other}`"),
                Some(line),
            ))
        }
    };
    let config = match system {
        System::Coupled => {
            sec.forbid(
                "params",
                &["alpha", "beta", "a", "b"],
                "only used with system = laplacian",
            )?;
            let keys = ["p", "q", "r", "s"];
            let mut e = [0.0; 4];
            for (slot, key) in e.iter_mut().zip(keys) {
                *slot = sec.required_real("params", key)?;
            }
            ParamsConfig {
                system,
                exponents: check_exponents(sec, keys, e, dimension)?,
                lambda: sec.required_real("params", "lambda")?,
                mu: sec.required_real("params", "mu")?,
                f: sec.weight("f")?,
                g: sec.weight("g")?,
                h: sec.weight("h")?,
            }
        }
        System::Laplacian => {
            sec.forbid(
                "params",
                &["p", "r", "s", "mu", "f", "g", "h"],
                "not used with system = laplacian",
            )?;
            let q = sec.required_real("params", "q")?;
            let alpha = sec.required_real("params", "alpha")?;
            let beta = sec.required_real("params", "beta")?;
            let lambda = sec.required_real("params", "lambda")?;
            let a = sec.weight("a")?;
            ParamsConfig {
                system,
                exponents: check_exponents(sec, ["p", "q", "alpha", "beta"], [2.0, q, alpha, beta], dimension)?,
                lambda,
                mu: lambda,
                f: a.clone(),
                g: a,
                h: sec.weight("b")?,
            }
        }
    };
    if config.lambda == 0.0 && config.mu == 0.0 {
        return Err(invalid(
            "lambda",
            "requires (lambda, mu) != (0, 0)",
            sec.line("params", "lambda"),
        ));
    }
    Ok(config)
}

fn parse_solver(sec: &Sections) -> Result<SolverOptions, CliError> {
    let d = SolverOptions::default();
    let real = |key: &str, default: f64| sec.real("solver", key).map(|v| v.unwrap_or(default));
    let options = SolverOptions {
        max_iterations: sec
            .parsed::<usize>("solver", "max_iterations", "a positive integer")?
            .unwrap_or(d.max_iterations),
        step_initial: real("step_initial", d.step_initial)?,
        armijo_factor: real("armijo_factor", d.armijo_factor)?,
        armijo_slope: real("armijo_slope", d.armijo_slope)?,
        tol_residual: real("tol_residual", d.tol_residual)?,
        tol_energy: real("tol_energy", d.tol_energy)?,
        seed: match sec.get("solver", "seed") {
            None => d.seed,
            Some(e) => e
                .value
                .parse::<SeedStrategy>()
                .map_err(|_| invalid("seed", "expected hat, eigenfunction or random(n)", Some(e.line)))?,
        },
        positivity_floor: real("positivity_floor", d.positivity_floor)?,
        tolerances: Tolerances {
            manifold: real("tol_manifold", d.tolerances.manifold)?,
            zero: real("tol_zero", d.tolerances.zero)?,
        },
    };
    let checks: [(&str, bool, &str); 9] = [
        ("max_iterations", options.max_iterations > 0, "must be positive"),
        ("step_initial", options.step_initial > 0.0, "must be positive"),
        (
            "armijo_factor",
            options.armijo_factor > 0.0 && options.armijo_factor < 1.0,
            "must lie in (0, 1)",
        ),
        (
            "armijo_slope",
            options.armijo_slope > 0.0 && options.armijo_slope < 1.0,
            "must lie in (0, 1)",
        ),
        ("tol_residual", options.tol_residual > 0.0, "must be positive"),
        ("tol_energy", options.tol_energy > 0.0, "must be positive"),
        (
            "positivity_floor",
            options.positivity_floor >= 0.0,
            "must be nonnegative",
        ),
        ("tol_manifold", options.tolerances.manifold > 0.0, "must be positive"),
        ("tol_zero", options.tolerances.zero > 0.0, "must be positive"),
    ];
    for (key, ok, reason) in checks {
        if !ok {
            return Err(invalid(key, reason, sec.line("solver", key)));
        }
    }
    Ok(options)
}

fn parse_bool(sec: &Sections, section: &str, key: &str, default: bool) -> Result<bool, CliError> {
    match sec.get(section, key) {
        None => Ok(default),
        Some(e) => match e.value.as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(invalid(
                key,
                format!("expected true or false, got `{other}`"),
                Some(e.line),
            )),
        },
    }
}

fn sample(mesh: &Mesh, key: &str, spec: &WeightSpec) -> Result<nehari_core::Field, CliError> {
    match spec {
        WeightSpec::Preset(p) => mesh.sample_weight(p).map_err(|e| invalid(key, e.to_string(), None)),
        WeightSpec::Table(path) => {
            let file = fs::File::open(path).map_err(|e| invalid(key, format!("{}: {e}", path.display()), None))?;
            read_field_csv(mesh, file).map_err(|e| invalid(key, format!("{}: {e}", path.display()), None))
        }
    }
}

/// Parses configuration text; relative paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, CliError> {
    let sec = Sections::parse(text, base.to_path_buf())?;
    let mesh_cfg = parse_mesh(&sec)?;
    let params = parse_params(&sec, mesh_cfg.dimension)?;
    let solver = parse_solver(&sec)?;
    let output = OutputConfig {
        directory: sec.path("output", "directory"),
        emit_fields: parse_bool(&sec, "output", "emit_fields", true)?,
    };
    let fibering = FiberingConfig {
        samples: sec.parsed::<usize>("fibering", "samples", "an integer")?.unwrap_or(401),
        span: sec.real("fibering", "span")?.unwrap_or(100.0),
    };
    if fibering.samples < 2 {
        return Err(invalid(
            "samples",
            "requires at least 2 samples",
            sec.line("fibering", "samples"),
        ));
    }
    if !(fibering.span > 1.0) {
        return Err(invalid("span", "requires span > 1", sec.line("fibering", "span")));
    }
    let verify = VerifyConfig {
        u: sec.path("verify", "u"),
        v: sec.path("verify", "v"),
        tol: sec.real("verify", "tol")?.unwrap_or(solver.tol_residual),
    };
    if verify.u.is_some() != verify.v.is_some() {
        return Err(invalid(
            "u",
            "u and v must be given together",
            sec.line("verify", "u").or(sec.line("verify", "v")),
        ));
    }
    if !(verify.tol > 0.0) {
        return Err(invalid("tol", "must be positive", sec.line("verify", "tol")));
    }

    let mesh = Mesh::new(mesh_cfg.dimension, &mesh_cfg.extents, &mesh_cfg.nodes)
        .map_err(|e| invalid("nodes", e.to_string(), sec.line("mesh", "nodes")))?;
    let (fk, gk, hk) = match params.system {
        System::Coupled => ("f", "g", "h"),
        System::Laplacian => ("a", "a", "b"),
    };
    let f = sample(&mesh, fk, &params.f)?;
    let g = sample(&mesh, gk, &params.g)?;
    let h = sample(&mesh, hk, &params.h)?;
    let problem = ProblemParams::new(mesh, params.exponents, params.lambda, params.mu, f, g, h)
        .map_err(|e| invalid("params", e.to_string(), None))?;

    Ok(RunConfig {
        mesh: mesh_cfg,
        params,
        solver,
        output,
        fibering,
        verify,
        problem,
    })
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::ConfigNotFound(path.to_path_buf()),
        _ => CliError::Io(e),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base)
}

#[cfg(test)]
mod tests {
    use super::*;

    const T1: &str = "[mesh]\nnodes = 201\n\n[params]\np = 2\nq = 1.5\nr = 3\ns = 3\nlambda = 0.1\nmu = 0.1\n";

    fn parse(text: &str) -> Result<RunConfig, CliError> {
        parse_config(text, Path::new("."))
    }

    fn invalid_key(text: &str) -> (String, String, Option<usize>) {
        match parse(text) {
            Err(CliError::ConfigInvalid { key, reason, line }) => (key, reason, line),
            other => panic!("expected ConfigInvalid, got {other:?}"),
        }
    }

    #[test]
    fn parses_t1() {
        let c = parse(T1).unwrap();
        assert_eq!(c.params.exponents.q, 1.5);
        assert_eq!((c.params.lambda, c.params.mu), (0.1, 0.1));
        assert_eq!(c.mesh.nodes, vec![201]);
        assert_eq!(c.solver, SolverOptions::default());
        assert_eq!(c.problem().mesh().node_count(), 201);
    }

    #[test]
    fn rejects_q_above_p() {
        let (key, reason, line) = invalid_key(&T1.replace("q = 1.5", "q = 2.5"));
        assert_eq!(key, "q");
        assert_eq!(reason, "requires q < p");
        assert_eq!(line, Some(6));
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        assert_eq!(invalid_key(&format!("{T1}nu = 3\n")).0, "nu");
        assert_eq!(invalid_key(&format!("{T1}[extra]\n")).0, "extra");
        assert_eq!(invalid_key("q = 1\n").0, "q");
        assert_eq!(invalid_key(&format!("{T1}q = 1.2\n")).0, "q");
    }

    #[test]
    fn rejects_bad_values() {
        assert_eq!(invalid_key(&T1.replace("nodes = 201", "nodes = 2")).0, "nodes");
        assert_eq!(invalid_key(&T1.replace("lambda = 0.1", "lambda = zero")).0, "lambda");
        assert_eq!(
            invalid_key(&T1.replace("lambda = 0.1\nmu = 0.1", "lambda = 0\nmu = 0")).0,
            "lambda"
        );
        assert_eq!(
            invalid_key(&format!("{T1}[solver]\narmijo_factor = 1.5\n")).0,
            "armijo_factor"
        );
        assert_eq!(invalid_key(&format!("{T1}[solver]\nseed = shuffle\n")).0, "seed");
        assert_eq!(invalid_key(&T1.replace("r = 3", "r = 1.5")).0, "r");
    }

    #[test]
    fn rejects_supercritical_in_2d() {
        let text = T1
            .replace("nodes = 201", "dimension = 2\nnodes = 9")
            .replace("p = 2", "p = 1.5")
            .replace("q = 1.5", "q = 1.2");
        // p* = 6 for p = 1.5 in 2D; r + s = 6
        assert_eq!(invalid_key(&text).0, "s");
    }

    #[test]
    fn laplacian_system() {
        let text = "[mesh]\nnodes = 51\n[params]\nsystem = laplacian\nq = 1.5\nalpha = 3\nbeta = 3\nlambda = 0.2\na = cosine(1)\n";
        let c = parse(text).unwrap();
        assert_eq!(c.params.mu, 0.2);
        assert_eq!(c.problem().f(), c.problem().g());
        assert!(c.echo().contains("alpha/(alpha+beta)"));
        assert_eq!(invalid_key(&format!("{text}mu = 1\n")).0, "mu");
    }

    #[test]
    fn echo_round_trips() {
        let text = format!(
            "{T1}f = cosine(1)\n[solver]\nseed = random(7)\ntol_residual = 1e-9\n[output]\nemit_fields = false\n"
        );
        let c = parse(&text).unwrap();
        let again = parse(&c.echo()).unwrap();
        assert_eq!(again.echo(), c.echo());
        assert_eq!(again.solver, c.solver);
        assert_eq!(again.problem(), c.problem());
    }

    #[test]
    fn inline_comments() {
        let text = T1
            .replace("[params]", "[params]   # exponents")
            .replace("q = 1.5", "q = 1.5  # concave");
        assert_eq!(parse(&text).unwrap().params.exponents.q, 1.5);
        assert_eq!(strip_comment("u = run#2/u.csv"), "u = run#2/u.csv");
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_config(Path::new("/nonexistent/run.ini")),
            Err(CliError::ConfigNotFound(_))
        ));
    }
}
