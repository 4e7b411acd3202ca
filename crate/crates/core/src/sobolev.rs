//! Discrete best embedding constants
//! `S_l = inf (∫|∇u|^p + ∫|∇v|^p) / (∫|u|^l + ∫|v|^l)^{p/l}` over pairs.
//!
//! The pair infimum is reduced to the single-field quotient: splitting the
//! `l`-mass of a single-field minimizer evenly between the two slots scales
//! the quotient by `2^{1−p/l}`, which wins exactly when `l < p`.

use crate::error::{NehariError, Result};
use crate::field::Field;
use crate::keyvalue::{real, KeyValue};
use crate::laplacian::DirichletLaplacian;
use crate::mesh::Mesh;

const MAX_POWER_ITERATIONS: usize = 1000;
const MAX_DESCENT_ITERATIONS: usize = 20_000;

/// An estimated embedding constant on a given mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingConstant {
    pub l: f64,
    pub p: f64,
    /// Pair constant: `pair_reduction_factor · single_field_value`.
    pub value: f64,
    pub single_field_value: f64,
    pub pair_reduction_factor: f64,
    /// Single-field minimizer with `∫|u|^l = 1`.
    pub minimizer: Field,
    pub iterations: usize,
    pub mesh_label: String,
}

impl KeyValue for EmbeddingConstant {
    fn key_values(&self) -> Vec<(String, String)> {
        [
            ("mesh", self.mesh_label.clone()),
            ("p", real(self.p)),
            ("l", real(self.l)),
            ("value", real(self.value)),
            ("single_field_value", real(self.single_field_value)),
            ("pair_reduction_factor", real(self.pair_reduction_factor)),
            ("iterations", self.iterations.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// `min(1, 2^{1−p/l})`.
pub fn pair_reduction_factor(p: f64, l: f64) -> f64 {
    2f64.powf(1.0 - p / l).min(1.0)
}

fn l_mass(mesh: &Mesh, values: &[f64], l: f64) -> f64 {
    mesh.weights()
        .iter()
        .zip(values)
        .map(|(w, x)| w * x.abs().powf(l))
        .sum()
}

/// `∫|∇u|^p / (∫|u|^l)^{p/l}` for a single Dirichlet field.
pub fn rayleigh_quotient(mesh: &Mesh, field: &Field, p: f64, l: f64) -> Result<f64> {
    let k = mesh.gradient_energy(field, p)?;
    let n = l_mass(mesh, field.values(), l);
    if n == 0.0 {
        return Err(NehariError::ZeroPair);
    }
    Ok(k / n.powf(p / l))
}

/// Smallest Dirichlet eigenvalue of the discrete Laplacian and its
/// eigenfunction (positive, unit `L²` norm), by inverse power iteration.
pub fn first_eigenpair(mesh: &Mesh) -> Result<(f64, Field)> {
    let solver = DirichletLaplacian::new(mesh);
    let normalize = |x: &mut Vec<f64>| {
        let norm = l_mass(mesh, x, 2.0).sqrt();
        let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        x.iter_mut().for_each(|v| *v *= sign / norm);
    };
    let mut x = mesh.hat().into_values();
    normalize(&mut x);
    let mut rho = mesh.gradient_energy_values(&x, 2.0);
    for _ in 0..MAX_POWER_ITERATIONS {
        let mut y = solver.solve(&x);
        normalize(&mut y);
        let next = mesh.gradient_energy_values(&y, 2.0);
        let moved = y.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let increment = (next - rho).abs();
        x = y;
        rho = next;
        if increment <= 1e-10 * rho && moved <= 1e-10 {
            return Ok((rho, Field::new(x)));
        }
    }
    Err(NehariError::NonConvergence {
        context: "inverse power iteration".into(),
        iterations: MAX_POWER_ITERATIONS,
    })
}

/// Estimates the pair embedding constant `S_l` by normalized descent on the
/// single-field quotient, seeded with the first eigenfunction and
/// preconditioned by the Dirichlet Laplacian.
pub fn best_sobolev_constant(mesh: &Mesh, p: f64, l: f64) -> Result<EmbeddingConstant> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(NehariError::InvalidParams(format!("requires p > 1, got {p}")));
    }
    let n = mesh.dimension() as f64;
    let p_star = if n > p { p * n / (n - p) } else { f64::INFINITY };
    if !(l > 1.0 && l <= p_star && l.is_finite()) {
        return Err(NehariError::InvalidParams(format!(
            "requires 1 < l <= p* = {p_star}, got {l}"
        )));
    }

    let solver = DirichletLaplacian::new(mesh);
    let normalize = |x: &mut Vec<f64>| {
        let scale = l_mass(mesh, x, l).powf(-1.0 / l);
        x.iter_mut().for_each(|v| *v *= scale);
    };
    let quotient = |x: &[f64]| mesh.gradient_energy_values(x, p) / l_mass(mesh, x, l).powf(p / l);

    let (_, seed) = first_eigenpair(mesh)?;
    let mut u = seed.into_values();
    normalize(&mut u);
    let mut value = quotient(&u);
    let mut step = 1.0;
    let mut iterations = 0;

    loop {
        // (1/p)·∇Q / w at unit mass: −Δ_p u − Q·|u|^{l−2}u
        let mut grad = mesh.p_laplacian_values(&u, p);
        for &i in mesh.interior() {
            grad[i] -= value * crate::energy::signed_pow(u[i], l - 1.0);
        }
        let dir = solver.solve(&grad);
        let slope: f64 = mesh
            .weights()
            .iter()
            .zip(&grad)
            .zip(&dir)
            .map(|((w, g), d)| w * g * d)
            .sum();
        if slope <= 1e-15 * value {
            break;
        }
        if iterations >= MAX_DESCENT_ITERATIONS {
            return Err(NehariError::NonConvergence {
                context: format!("embedding constant descent (l = {l})"),
                iterations,
            });
        }
        iterations += 1;

        let mut accepted = None;
        let mut first_try = true;
        while step > 1e-14 {
            let mut trial: Vec<f64> = u.iter().zip(&dir).map(|(x, d)| x - step * d).collect();
            normalize(&mut trial);
            let q_trial = quotient(&trial);
            if q_trial <= value - 1e-4 * step * p * slope {
                accepted = Some((trial, q_trial));
                break;
            }
            step *= 0.5;
            first_try = false;
        }
        match accepted {
            Some((trial, q_trial)) => {
                // minimizer of the quadratic through the two values and the slope
                let curvature = 2.0 * (q_trial - value + step * p * slope) / (step * step);
                let grow = if first_try { 2.0 } else { 1.0 };
                u = trial;
                value = q_trial;
                step = if curvature > 0.0 {
                    (p * slope / curvature).clamp(0.25 * step, grow * 4.0 * step)
                } else {
                    grow * step
                };
            }
            // decrease no longer resolvable in floating point
            None if slope <= 1e-10 * value => break,
            None => {
                return Err(NehariError::NonConvergence {
                    context: format!("embedding constant line search (l = {l})"),
                    iterations,
                })
            }
        }
    }

    normalize(&mut u);
    let minimizer = Field::new(u);
    let single = rayleigh_quotient(mesh, &minimizer, p, l)?;
    let factor = pair_reduction_factor(p, l);
    Ok(EmbeddingConstant {
        l,
        p,
        value: factor * single,
        single_field_value: single,
        pair_reduction_factor: factor,
        minimizer,
        iterations,
        mesh_label: mesh.label(),
    })
}
