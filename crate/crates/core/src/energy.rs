//! The energy functional of the concave–convex system, its weak-form
//! residual, and the Nehari-manifold quantities.
//!
//! For a pair `(u, v)` we write
//!
//! * `K = ‖(u,v)‖^p = ∫|∇u|^p + ∫|∇v|^p`
//! * `A = λ∫f|u|^q + μ∫g|v|^q`
//! * `B = ∫h|u|^r|v|^s`
//!
//! so that `J = K/p − A/q − B/(r+s)`, the Nehari constraint is `K − A − B = 0`
//! and the second fibering derivative on the manifold has the sign of
//! `(p−q)A + (p−r−s)B`.

use std::fmt;

use crate::error::{NehariError, Result};
use crate::field::{Field, PairField};
use crate::keyvalue::{real, KeyValue};
use crate::mesh::Mesh;

/// Exponents `p, q, r, s` of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl Exponents {
    /// Checks `1 < q < p < r + s`, `r > p` and `s > p`.
    pub fn new(p: f64, q: f64, r: f64, s: f64) -> Result<Self> {
        let e = Exponents { p, q, r, s };
        if ![p, q, r, s].iter().all(|x| x.is_finite()) {
            return Err(NehariError::InvalidParams("exponents must be finite".into()));
        }
        if p <= 1.0 {
            return Err(NehariError::InvalidParams("requires p > 1".into()));
        }
        if q <= 1.0 {
            return Err(NehariError::InvalidParams("requires q > 1".into()));
        }
        if q >= p {
            return Err(NehariError::InvalidParams("requires q < p".into()));
        }
        if r <= p || s <= p {
            return Err(NehariError::InvalidParams("requires r > p and s > p".into()));
        }
        Ok(e)
    }

    /// `r + s`.
    pub fn rs(&self) -> f64 {
        self.r + self.s
    }

    /// Critical Sobolev exponent `pN/(N−p)`, infinite when `N ≤ p`.
    pub fn p_star(&self, dimension: usize) -> f64 {
        let n = dimension as f64;
        if n > self.p {
            self.p * n / (n - self.p)
        } else {
            f64::INFINITY
        }
    }
}

/// Location of a pair relative to the three parts of the Nehari manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NehariClass {
    Plus,
    Zero,
    Minus,
    NotOnManifold,
}

impl fmt::Display for NehariClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NehariClass::Plus => "plus",
            NehariClass::Zero => "zero",
            NehariClass::Minus => "minus",
            NehariClass::NotOnManifold => "not-on-manifold",
        })
    }
}

/// One of the two nondegenerate branches `M+` and `M−`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Branch> for NehariClass {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Plus => NehariClass::Plus,
            Branch::Minus => NehariClass::Minus,
        }
    }
}

/// Relative tolerances for membership in the manifold and in `M0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub manifold: f64,
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            manifold: 1e-10,
            zero: 1e-8,
        }
    }
}

/// `K`, `A`, `B` of a pair together with the constraint and the pairing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NehariDiagnostics {
    pub k: f64,
    pub a: f64,
    pub b: f64,
    /// `K − A − B`.
    pub constraint: f64,
    /// `(p−q)A + (p−r−s)B`.
    pub pairing: f64,
    pub branch: NehariClass,
}

impl NehariDiagnostics {
    fn from_parts(exps: &Exponents, k: f64, a: f64, b: f64, tol: Tolerances) -> Self {
        let mut diag = NehariDiagnostics {
            k,
            a,
            b,
            constraint: k - a - b,
            pairing: (exps.p - exps.q) * a + (exps.p - exps.rs()) * b,
            branch: NehariClass::NotOnManifold,
        };
        diag.branch = diag.classify(tol);
        diag
    }

    /// Magnitude scale `max(K, |A|, |B|)` the tolerances are relative to.
    pub fn scale(&self) -> f64 {
        self.k.max(self.a.abs()).max(self.b.abs())
    }

    pub fn relative_constraint(&self) -> f64 {
        self.constraint.abs() / self.scale()
    }

    pub fn classify(&self, tol: Tolerances) -> NehariClass {
        let scale = self.scale();
        if self.constraint.abs() > tol.manifold * scale {
            NehariClass::NotOnManifold
        } else if self.pairing.abs() <= tol.zero * scale {
            NehariClass::Zero
        } else if self.pairing > 0.0 {
            NehariClass::Plus
        } else {
            NehariClass::Minus
        }
    }

    /// Diagnostics of `(t·u, t·v)` from homogeneity, without quadrature.
    pub fn scaled(&self, exps: &Exponents, t: f64, tol: Tolerances) -> Self {
        Self::from_parts(
            exps,
            t.powf(exps.p) * self.k,
            t.powf(exps.q) * self.a,
            t.powf(exps.rs()) * self.b,
            tol,
        )
    }
}

impl KeyValue for NehariDiagnostics {
    fn key_values(&self) -> Vec<(String, String)> {
        vec![
            ("K".into(), real(self.k)),
            ("A".into(), real(self.a)),
            ("B".into(), real(self.b)),
            ("constraint".into(), real(self.constraint)),
            ("pairing".into(), real(self.pairing)),
            ("branch".into(), self.branch.to_string()),
        ]
    }
}

/// `sign(x)·|x|^e`, with value 0 at `x = 0` for every `e`.
pub(crate) fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// `|a + d|^m − |a|^m` without cancellation when `d` is small against `a`.
fn pow_change(a: f64, d: f64, m: f64) -> f64 {
    let b = a + d;
    if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
        return b.abs().powf(m) - a.abs().powf(m);
    }
    a.abs().powf(m) * (m * (d / a).ln_1p()).exp_m1()
}

/// `|u+du|^r |v+dv|^s − |u|^r |v|^s`, accurate for small increments.
fn product_change(u: f64, du: f64, v: f64, dv: f64, r: f64, s: f64) -> f64 {
    let (u1, v1) = (u + du, v + dv);
    if u == 0.0 || v == 0.0 || u1 == 0.0 || v1 == 0.0 || u.signum() != u1.signum() || v.signum() != v1.signum() {
        return u1.abs().powf(r) * v1.abs().powf(s) - u.abs().powf(r) * v.abs().powf(s);
    }
    let base = u.abs().powf(r) * v.abs().powf(s);
    base * (r * (du / u).ln_1p() + s * (dv / v).ln_1p()).exp_m1()
}

/// Exponents, parameters `λ, μ` and weights `f, g, h` on a shared mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParams {
    mesh: Mesh,
    exps: Exponents,
    lambda: f64,
    mu: f64,
    f: Field,
    g: Field,
    h: Field,
}

impl ProblemParams {
    pub fn new(mesh: Mesh, exps: Exponents, lambda: f64, mu: f64, f: Field, g: Field, h: Field) -> Result<Self> {
        let p_star = exps.p_star(mesh.dimension());
        if exps.rs() >= p_star {
            return Err(NehariError::InvalidParams(format!("requires r + s < p* = {p_star}")));
        }
        if !(lambda.is_finite() && mu.is_finite()) {
            return Err(NehariError::InvalidParams("lambda and mu must be finite".into()));
        }
        if lambda == 0.0 && mu == 0.0 {
            return Err(NehariError::InvalidParams("requires (lambda, mu) != (0, 0)".into()));
        }
        for w in [&f, &g, &h] {
            mesh.check_len(w.len())?;
        }
        Ok(ProblemParams {
            mesh,
            exps,
            lambda,
            mu,
            f,
            g,
            h,
        })
    }

    /// The scalar-parameter Laplacian system: `p = 2`, `μ = λ`, `f = g = a`,
    /// `h = b`, `r = α`, `s = β`. The coupling coefficient is `α/(α+β)`.
    pub fn laplacian_system(
        mesh: Mesh,
        q: f64,
        alpha: f64,
        beta: f64,
        lambda: f64,
        a: Field,
        b: Field,
    ) -> Result<Self> {
        let exps = Exponents::new(2.0, q, alpha, beta)?;
        Self::new(mesh, exps, lambda, lambda, a.clone(), a, b)
    }

    /// Same problem with different `(λ, μ)`.
    pub fn with_lambda_mu(&self, lambda: f64, mu: f64) -> Result<Self> {
        Self::new(
            self.mesh.clone(),
            self.exps,
            lambda,
            mu,
            self.f.clone(),
            self.g.clone(),
            self.h.clone(),
        )
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn exponents(&self) -> &Exponents {
        &self.exps
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn f(&self) -> &Field {
        &self.f
    }

    pub fn g(&self) -> &Field {
        &self.g
    }

    pub fn h(&self) -> &Field {
        &self.h
    }

    pub fn p_star(&self) -> f64 {
        self.exps.p_star(self.mesh.dimension())
    }

    fn check_pair(&self, pair: &PairField) -> Result<()> {
        self.mesh.check_len(pair.u.len())?;
        self.mesh.check_len(pair.v.len())
    }

    fn raw_quantities(&self, pair: &PairField) -> (f64, f64, f64) {
        let Exponents { p, q, r, s } = self.exps;
        let mesh = &self.mesh;
        let (u, v) = (pair.u.values(), pair.v.values());
        let k = mesh.gradient_energy_values(u, p) + mesh.gradient_energy_values(v, p);
        let (mut fu, mut gv, mut b) = (0.0, 0.0, 0.0);
        for (i, w) in mesh.weights().iter().enumerate() {
            fu += w * self.f.values()[i] * u[i].abs().powf(q);
            gv += w * self.g.values()[i] * v[i].abs().powf(q);
            b += w * self.h.values()[i] * u[i].abs().powf(r) * v[i].abs().powf(s);
        }
        (k, self.lambda * fu + self.mu * gv, b)
    }

    /// `‖(u,v)‖ = (∫|∇u|^p + ∫|∇v|^p)^{1/p}`.
    pub fn w_norm(&self, pair: &PairField) -> Result<f64> {
        self.check_pair(pair)?;
        let p = self.exps.p;
        let k =
            self.mesh.gradient_energy_values(pair.u.values(), p) + self.mesh.gradient_energy_values(pair.v.values(), p);
        Ok(k.powf(1.0 / p))
    }

    /// `J(u,v) = K/p − A/q − B/(r+s)`.
    pub fn energy(&self, pair: &PairField) -> Result<f64> {
        self.check_pair(pair)?;
        let (k, a, b) = self.raw_quantities(pair);
        Ok(self.energy_from(k, a, b))
    }

    pub(crate) fn energy_from(&self, k: f64, a: f64, b: f64) -> f64 {
        let Exponents { p, q, .. } = self.exps;
        k / p - a / q - b / self.exps.rs()
    }

    /// `J(to) − J(from)` evaluated node by node from the increments, so the
    /// result stays accurate when it is far smaller than `J` itself.
    pub fn energy_change(&self, from: &PairField, to: &PairField) -> Result<f64> {
        self.check_pair(from)?;
        self.check_pair(to)?;
        let Exponents { p, q, r, s } = self.exps;
        let mesh = &self.mesh;
        let delta =
            |a: &Field, b: &Field| -> Vec<f64> { b.values().iter().zip(a.values()).map(|(y, x)| y - x).collect() };
        let (du, dv) = (delta(&from.u, &to.u), delta(&from.v, &to.v));

        let grad_change = |x: &[f64], dx: &[f64]| -> f64 {
            let g0 = mesh.cell_gradients(x);
            let dg = mesh.cell_gradients(dx);
            let total: f64 = g0
                .iter()
                .zip(&dg)
                .map(|(&(gx, gy), &(dgx, dgy))| {
                    let norm2 = gx * gx + gy * gy;
                    let inc = dgx * (2.0 * gx + dgx) + dgy * (2.0 * gy + dgy);
                    if norm2 == 0.0 {
                        (dgx * dgx + dgy * dgy).powf(0.5 * p)
                    } else if norm2 + inc <= 0.0 {
                        -norm2.powf(0.5 * p)
                    } else {
                        norm2.powf(0.5 * p) * (0.5 * p * (inc / norm2).ln_1p()).exp_m1()
                    }
                })
                .sum();
            total * mesh.cell_volume()
        };
        let dk = grad_change(from.u.values(), &du) + grad_change(from.v.values(), &dv);

        let (u, v) = (from.u.values(), from.v.values());
        let (mut dfu, mut dgv, mut db) = (0.0, 0.0, 0.0);
        for (i, w) in mesh.weights().iter().enumerate() {
            dfu += w * self.f.values()[i] * pow_change(u[i], du[i], q);
            dgv += w * self.g.values()[i] * pow_change(v[i], dv[i], q);
            db += w * self.h.values()[i] * product_change(u[i], du[i], v[i], dv[i], r, s);
        }
        let da = self.lambda * dfu + self.mu * dgv;
        Ok(self.energy_from(dk, da, db))
    }

    /// Nodal residual of the two weak-form equations; boundary entries are 0.
    ///
    /// Under the quadrature inner product, `⟨residual, d⟩` is the directional
    /// derivative of [`energy`](Self::energy) along any Dirichlet direction `d`.
    pub fn weak_residual(&self, pair: &PairField) -> Result<PairField> {
        self.check_pair(pair)?;
        let Exponents { p, q, r, s } = self.exps;
        let rs = self.exps.rs();
        let mesh = &self.mesh;
        let (u, v) = (pair.u.values(), pair.v.values());
        let mut ru = mesh.p_laplacian_values(u, p);
        let mut rv = mesh.p_laplacian_values(v, p);
        for &i in mesh.interior() {
            let (au, av) = (u[i].abs(), v[i].abs());
            ru[i] -= self.lambda * self.f.values()[i] * signed_pow(u[i], q - 1.0)
                + (r / rs) * self.h.values()[i] * signed_pow(u[i], r - 1.0) * av.powf(s);
            rv[i] -= self.mu * self.g.values()[i] * signed_pow(v[i], q - 1.0)
                + (s / rs) * self.h.values()[i] * au.powf(r) * signed_pow(v[i], s - 1.0);
        }
        Ok(PairField {
            u: Field::new(ru),
            v: Field::new(rv),
        })
    }

    /// `K`, `A`, `B`, constraint, pairing and the branch under default tolerances.
    pub fn nehari_quantities(&self, pair: &PairField) -> Result<NehariDiagnostics> {
        self.nehari_quantities_with(pair, Tolerances::default())
    }

    pub fn nehari_quantities_with(&self, pair: &PairField, tol: Tolerances) -> Result<NehariDiagnostics> {
        self.check_pair(pair)?;
        if pair.is_zero() {
            return Err(NehariError::ZeroPair);
        }
        let (k, a, b) = self.raw_quantities(pair);
        Ok(NehariDiagnostics::from_parts(&self.exps, k, a, b, tol))
    }

    pub fn classify(&self, pair: &PairField, tol_manifold: f64, tol_zero: f64) -> Result<NehariClass> {
        let tol = Tolerances {
            manifold: tol_manifold,
            zero: tol_zero,
        };
        Ok(self.nehari_quantities_with(pair, tol)?.branch)
    }

    /// The two manifold forms of the energy, obtained from `J` by eliminating
    /// `B` (first) or `A` (second) through `K = A + B`:
    ///
    /// * `(1/p − 1/(r+s))K − (1/q − 1/(r+s))A`
    /// * `(1/p − 1/q)K + (1/q − 1/(r+s))B`
    pub fn manifold_energy_forms(&self, diag: &NehariDiagnostics) -> Result<(f64, f64)> {
        if diag.branch == NehariClass::NotOnManifold {
            return Err(NehariError::NotOnManifold {
                residual: diag.relative_constraint(),
            });
        }
        let Exponents { p, q, .. } = self.exps;
        let rs = self.exps.rs();
        let form_a = (1.0 / p - 1.0 / rs) * diag.k - (1.0 / q - 1.0 / rs) * diag.a;
        let form_b = (1.0 / p - 1.0 / q) * diag.k + (1.0 / q - 1.0 / rs) * diag.b;
        Ok((form_a, form_b))
    }

    /// Sup norms `‖f‖∞`, `‖g‖∞`, `‖h‖∞`.
    pub fn weight_sup_norms(&self) -> (f64, f64, f64) {
        (self.f.sup_norm(), self.g.sup_norm(), self.h.sup_norm())
    }
}
