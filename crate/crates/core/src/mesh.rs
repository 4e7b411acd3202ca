//! Uniform tensor grids on intervals and rectangles.
//!
//! Nodes are numbered with the first axis running fastest, so node `(i, j)`
//! of a rectangle lives at index `i + nx * j`. Quadrature is the tensor
//! trapezoidal rule. Gradient energies are assembled per grid cell from
//! forward differences taken at the cell's lower corner; for `p = 2` this
//! reproduces the standard three-point (1D) and five-point (2D) Laplacian.

use crate::error::{NehariError, Result};
use crate::field::{Field, WeightPreset};

/// One axis of a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
    pub spacing: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return Err(NehariError::InvalidMesh(format!(
                "need at least 3 nodes per axis, got {nodes}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(NehariError::InvalidMesh(format!("degenerate extent ({lo}, {hi})")));
        }
        let spacing = (hi - lo) / (nodes - 1) as f64;
        Ok(Axis { lo, hi, nodes, spacing })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        if i + 1 == self.nodes {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing
        }
    }

    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.nodes {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }
}

/// A uniform grid on a 1D interval or a 2D rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    axes: Vec<Axis>,
    weights: Vec<f64>,
    boundary: Vec<bool>,
    interior: Vec<usize>,
}

impl Mesh {
    /// Builds a uniform grid. `extents` and `nodes_per_axis` carry one entry
    /// per axis.
    pub fn new(dimension: usize, extents: &[(f64, f64)], nodes_per_axis: &[usize]) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(NehariError::InvalidMesh(format!(
                "dimension must be 1 or 2, got {dimension}"
            )));
        }
        if extents.len() != dimension || nodes_per_axis.len() != dimension {
            return Err(NehariError::InvalidMesh(format!(
                "expected {dimension} extents and node counts, got {} and {}",
                extents.len(),
                nodes_per_axis.len()
            )));
        }
        let axes = extents
            .iter()
            .zip(nodes_per_axis)
            .map(|(&(lo, hi), &n)| Axis::new(lo, hi, n))
            .collect::<Result<Vec<_>>>()?;

        let total: usize = axes.iter().map(|a| a.nodes).product();
        let mut weights = Vec::with_capacity(total);
        let mut boundary = Vec::with_capacity(total);
        for index in 0..total {
            let mut w = 1.0;
            let mut on_boundary = false;
            for (axis, i) in axes.iter().zip(Self::split_index(&axes, index)) {
                w *= axis.weight(i);
                on_boundary |= i == 0 || i + 1 == axis.nodes;
            }
            weights.push(w);
            boundary.push(on_boundary);
        }
        let interior = (0..total).filter(|&k| !boundary[k]).collect();
        Ok(Mesh {
            axes,
            weights,
            boundary,
            interior,
        })
    }

    pub fn interval(lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        Self::new(1, &[(lo, hi)], &[nodes])
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64), nodes: (usize, usize)) -> Result<Self> {
        Self::new(2, &[x, y], &[nodes.0, nodes.1])
    }

    fn split_index(axes: &[Axis], index: usize) -> impl Iterator<Item = usize> + '_ {
        let mut rest = index;
        axes.iter().map(move |a| {
            let i = rest % a.nodes;
            rest /= a.nodes;
            i
        })
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        self.axes.iter().map(Axis::length).product()
    }

    /// Volume of one grid cell; also the quadrature weight of every interior node.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing).product()
    }

    pub fn coordinates(&self, node: usize) -> Vec<f64> {
        Self::split_index(&self.axes, node)
            .zip(&self.axes)
            .map(|(i, a)| a.coordinate(i))
            .collect()
    }

    /// Short resolution tag such as `1d:201` or `2d:65x65`.
    pub fn label(&self) -> String {
        let nodes: Vec<String> = self.axes.iter().map(|a| a.nodes.to_string()).collect();
        format!("{}d:{}", self.dimension(), nodes.join("x"))
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.node_count() {
            return Err(NehariError::MeshMismatch {
                expected: self.node_count(),
                found: len,
            });
        }
        Ok(())
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Field {
        Field::new((0..self.node_count()).map(|k| f(&self.coordinates(k))).collect())
    }

    /// Samples `f` at interior nodes and pins boundary nodes to zero.
    pub fn sample_dirichlet(&self, f: impl Fn(&[f64]) -> f64) -> Field {
        Field::new(
            (0..self.node_count())
                .map(|k| if self.boundary[k] { 0.0 } else { f(&self.coordinates(k)) })
                .collect(),
        )
    }

    /// Tent function with peak 1 at the domain center (product of 1D hats).
    pub fn hat(&self) -> Field {
        let axes = self.axes.clone();
        self.sample_dirichlet(move |x| {
            x.iter()
                .zip(&axes)
                .map(|(&xi, a)| 1.0 - (2.0 * (xi - a.lo) / a.length() - 1.0).abs())
                .product()
        })
    }

    pub fn integrate(&self, field: &Field) -> Result<f64> {
        self.check_len(field.len())?;
        Ok(self.integrate_values(field.values()))
    }

    pub(crate) fn integrate_values(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Calls `visit(base_node, gx, gy)` for every grid cell, where `(gx, gy)`
    /// are forward differences at the lower corner (`gy = 0` in 1D).
    pub(crate) fn for_each_cell(&self, values: &[f64], mut visit: impl FnMut(usize, f64, f64)) {
        match self.axes.as_slice() {
            [ax] => {
                let h = ax.spacing;
                for i in 0..ax.nodes - 1 {
                    visit(i, (values[i + 1] - values[i]) / h, 0.0);
                }
            }
            [ax, ay] => {
                let (nx, hx, hy) = (ax.nodes, ax.spacing, ay.spacing);
                for j in 0..ay.nodes - 1 {
                    for i in 0..nx - 1 {
                        let k = i + nx * j;
                        visit(k, (values[k + 1] - values[k]) / hx, (values[k + nx] - values[k]) / hy);
                    }
                }
            }
            _ => unreachable!("mesh dimension is 1 or 2"),
        }
    }

    /// Per-cell forward-difference gradients in cell order.
    pub(crate) fn cell_gradients(&self, values: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        self.for_each_cell(values, |_, gx, gy| out.push((gx, gy)));
        out
    }

    /// Discrete `∫|∇u|^p`.
    pub fn gradient_energy(&self, field: &Field, p: f64) -> Result<f64> {
        self.check_len(field.len())?;
        Ok(self.gradient_energy_values(field.values(), p))
    }

    pub(crate) fn gradient_energy_values(&self, values: &[f64], p: f64) -> f64 {
        let mut total = 0.0;
        self.for_each_cell(values, |_, gx, gy| {
            total += (gx * gx + gy * gy).powf(0.5 * p);
        });
        total * self.cell_volume()
    }

    /// Nodal `−div(|∇u|^{p−2}∇u)`, obtained by differencing the per-cell
    /// fluxes. Equals the gradient of `(1/p)·gradient_energy` divided by the
    /// interior quadrature weight. Boundary entries are zero.
    pub fn p_laplacian(&self, field: &Field, p: f64) -> Result<Vec<f64>> {
        self.check_len(field.len())?;
        Ok(self.p_laplacian_values(field.values(), p))
    }

    pub(crate) fn p_laplacian_values(&self, values: &[f64], p: f64) -> Vec<f64> {
        let n = self.node_count();
        let mut out = vec![0.0; n];
        let nx = self.axes[0].nodes;
        let hx = self.axes[0].spacing;
        let hy = self.axes.get(1).map_or(1.0, |a| a.spacing);
        let two_d = self.dimension() == 2;
        self.for_each_cell(values, |k, gx, gy| {
            let g2 = gx * gx + gy * gy;
            if g2 == 0.0 {
                return;
            }
            let scale = if p == 2.0 { 1.0 } else { g2.powf(0.5 * (p - 2.0)) };
            let fx = scale * gx / hx;
            out[k] -= fx;
            out[k + 1] += fx;
            if two_d {
                let fy = scale * gy / hy;
                out[k] -= fy;
                out[k + nx] += fy;
            }
        });
        // `cell_volume / weight` is 1 at interior nodes; boundary rows are dropped.
        for (k, o) in out.iter_mut().enumerate() {
            if self.boundary[k] {
                *o = 0.0;
            }
        }
        out
    }

    pub fn sample_weight(&self, preset: &WeightPreset) -> Result<Field> {
        match preset {
            WeightPreset::Constant(c) => Ok(Field::new(vec![*c; self.node_count()])),
            WeightPreset::Cosine(k) => {
                let axes = self.axes.clone();
                let k = *k as f64;
                Ok(self.sample(move |x| {
                    x.iter()
                        .zip(&axes)
                        .map(|(&xi, a)| (2.0 * std::f64::consts::PI * k * (xi - a.lo) / a.length()).cos())
                        .product()
                }))
            }
            WeightPreset::Tabulated(values) => {
                self.check_len(values.len())?;
                Ok(Field::new(values.clone()))
            }
        }
    }
}
