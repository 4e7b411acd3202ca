//! Nodal fields, pairs of fields, weight presets, and the field CSV format.

use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{NehariError, Result};
use crate::keyvalue::real;
use crate::mesh::Mesh;

/// Nodal values of a scalar function on a [`Mesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
}

/// Which signs a field takes on the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignProfile {
    pub has_positive: bool,
    pub has_negative: bool,
}

impl SignProfile {
    pub fn is_sign_changing(&self) -> bool {
        self.has_positive && self.has_negative
    }
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field { values }
    }

    pub fn zeros(len: usize) -> Self {
        Field::new(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, t: f64) -> Field {
        Field::new(self.values.iter().map(|v| t * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::new(self.values.iter().copied().map(f).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute value.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sign_profile(&self) -> SignProfile {
        SignProfile {
            has_positive: self.values.iter().any(|&v| v > 0.0),
            has_negative: self.values.iter().any(|&v| v < 0.0),
        }
    }

    /// Checks the length against `mesh` and that boundary values are exactly zero.
    pub fn check_dirichlet(&self, mesh: &Mesh) -> Result<()> {
        mesh.check_len(self.len())?;
        for (node, &value) in self.values.iter().enumerate() {
            if mesh.is_boundary(node) && value != 0.0 {
                return Err(NehariError::NotDirichlet { node, value });
            }
        }
        Ok(())
    }

    /// Minimum over the interior nodes of `mesh`.
    pub fn interior_min(&self, mesh: &Mesh) -> f64 {
        mesh.interior()
            .iter()
            .map(|&k| self.values[k])
            .fold(f64::INFINITY, f64::min)
    }
}

/// A pair `(u, v)` of Dirichlet fields on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PairField {
    pub u: Field,
    pub v: Field,
}

impl PairField {
    /// Validates that both components are Dirichlet fields on `mesh`.
    pub fn new(mesh: &Mesh, u: Field, v: Field) -> Result<Self> {
        u.check_dirichlet(mesh)?;
        v.check_dirichlet(mesh)?;
        Ok(PairField { u, v })
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        PairField {
            u: Field::zeros(mesh.node_count()),
            v: Field::zeros(mesh.node_count()),
        }
    }

    pub fn scaled(&self, t: f64) -> PairField {
        PairField {
            u: self.u.scaled(t),
            v: self.v.scaled(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.u.values().iter().chain(self.v.values()).all(|&x| x == 0.0)
    }

    pub fn abs(&self) -> PairField {
        PairField {
            u: self.u.map(f64::abs),
            v: self.v.map(f64::abs),
        }
    }

    /// `self + t * other`, componentwise.
    pub fn axpy(&self, t: f64, other: &PairField) -> PairField {
        let comb =
            |a: &Field, b: &Field| Field::new(a.values().iter().zip(b.values()).map(|(x, y)| x + t * y).collect());
        PairField {
            u: comb(&self.u, &other.u),
            v: comb(&self.v, &other.v),
        }
    }

    /// `∫u² + ∫v²` under the mesh quadrature.
    pub fn l2_norm_sq(&self, mesh: &Mesh) -> f64 {
        let sq = |f: &Field| mesh.integrate_values(&f.values().iter().map(|x| x * x).collect::<Vec<_>>());
        sq(&self.u) + sq(&self.v)
    }
}

/// Weight-function presets for `f`, `g`, `h`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightPreset {
    Constant(f64),
    /// Product over axes of `cos(2πk·(x − lo)/L)`: `k` full periods per axis.
    Cosine(u32),
    /// Nodal values supplied directly.
    Tabulated(Vec<f64>),
}

impl FromStr for WeightPreset {
    type Err = NehariError;

    /// Parses `constant(c)`, `cosine(k)`, or a bare number.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(c) = s.parse::<f64>() {
            return Ok(WeightPreset::Constant(c));
        }
        let unknown = || NehariError::UnknownPreset(s.to_string());
        let (name, rest) = s.split_once('(').ok_or_else(unknown)?;
        let arg = rest.strip_suffix(')').ok_or_else(unknown)?.trim();
        match name.trim() {
            "constant" => arg.parse().map(WeightPreset::Constant).map_err(|_| unknown()),
            "cosine" => arg.parse().map(WeightPreset::Cosine).map_err(|_| unknown()),
            _ => Err(unknown()),
        }
    }
}

impl std::fmt::Display for WeightPreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightPreset::Constant(c) => write!(f, "constant({c})"),
            WeightPreset::Cosine(k) => write!(f, "cosine({k})"),
            WeightPreset::Tabulated(v) => write!(f, "tabulated({} values)", v.len()),
        }
    }
}

const AXIS_NAMES: [&str; 2] = ["x", "y"];

/// Writes `field` as CSV: a header row, then one row per node holding the
/// node coordinates followed by the value. Floats use the shortest
/// representation that round-trips exactly.
pub fn write_field_csv<W: Write>(mesh: &Mesh, field: &Field, writer: W) -> Result<()> {
    mesh.check_len(field.len())?;
    let mut out = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = AXIS_NAMES[..mesh.dimension()].to_vec();
    header.push("value");
    out.write_record(&header)?;
    for (node, value) in field.values().iter().enumerate() {
        let mut row: Vec<String> = mesh.coordinates(node).iter().map(|&c| real(c)).collect();
        row.push(real(*value));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field_csv`], checking that the node
/// coordinates match `mesh`.
pub fn read_field_csv<R: Read>(mesh: &Mesh, reader: R) -> Result<Field> {
    let dim = mesh.dimension();
    let mut input = csv::Reader::from_reader(reader);
    let header = input.headers()?;
    let mut expected: Vec<&str> = AXIS_NAMES[..dim].to_vec();
    expected.push("value");
    if header.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(NehariError::FieldFormat(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut values = Vec::with_capacity(mesh.node_count());
    for (row, record) in input.records().enumerate() {
        let record = record?;
        if record.len() != dim + 1 {
            return Err(NehariError::FieldFormat(format!(
                "row {}: expected {} columns, found {}",
                row + 2,
                dim + 1,
                record.len()
            )));
        }
        let nums = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| NehariError::FieldFormat(format!("row {}: {e}", row + 2)))?;
        if row < mesh.node_count() {
            let coords = mesh.coordinates(row);
            let tol = 1e-9 * mesh.axes().iter().map(|a| a.length()).fold(1.0, f64::max);
            if coords.iter().zip(&nums).any(|(c, x)| (c - x).abs() > tol) {
                return Err(NehariError::FieldFormat(format!(
                    "row {}: coordinates do not match mesh node {row}",
                    row + 2
                )));
            }
        }
        values.push(nums[dim]);
    }
    mesh.check_len(values.len())?;
    Ok(Field::new(values))
}
