//! Fibering maps `φ(t) = J(tu, tv)` and the scalings that land on the
//! Nehari manifold.
//!
//! Writing `φ′(t) = t^{q−1}(m(t) − A)` with `m(t) = K t^{p−q} − B t^{r+s−q}`,
//! the critical points of `φ` are the solutions of `m(t) = A`. When `B > 0`,
//! `m` increases up to `t_max` and decreases afterwards, so there are at most
//! two solutions: the one below `t_max` lies in `M+`, the one above in `M−`.
//! When `B ≤ 0`, `m` is increasing and there is at most one, in `M+`.

use crate::energy::{Branch, Exponents, NehariClass, NehariDiagnostics, ProblemParams, Tolerances};
use crate::error::{NehariError, Result};
use crate::field::PairField;
use crate::keyvalue::{real, KeyValue};

/// Relative half-width of the band in which `A = m(t_max)` counts as a double root.
pub const DEGENERATE_BAND: f64 = 1e-9;

/// A critical point of the fibering map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberingRoot {
    pub t: f64,
    pub phi: f64,
    pub branch: NehariClass,
}

/// Complete description of the fibering map of one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberingAnalysis {
    pub k: f64,
    pub a: f64,
    pub b: f64,
    /// Maximizer of `m` when `B > 0`.
    pub t_max: Option<f64>,
    /// `m(t_max)` when `B > 0`.
    pub m_max: Option<f64>,
    /// Sorted ascending.
    pub roots: Vec<FiberingRoot>,
}

impl FiberingAnalysis {
    pub fn root(&self, branch: Branch) -> Option<&FiberingRoot> {
        let class = NehariClass::from(branch);
        self.roots.iter().find(|r| r.branch == class)
    }
}

impl KeyValue for FiberingAnalysis {
    fn key_values(&self) -> Vec<(String, String)> {
        let opt = |x: Option<f64>| x.map_or_else(|| "none".to_string(), real);
        let mut kv = vec![
            ("K".to_string(), real(self.k)),
            ("A".to_string(), real(self.a)),
            ("B".to_string(), real(self.b)),
            ("t_max".to_string(), opt(self.t_max)),
            ("m_max".to_string(), opt(self.m_max)),
            ("root_count".to_string(), self.roots.len().to_string()),
        ];
        for (i, r) in self.roots.iter().enumerate() {
            kv.push((format!("root{i}_t"), real(r.t)));
            kv.push((format!("root{i}_phi"), real(r.phi)));
            kv.push((format!("root{i}_branch"), r.branch.to_string()));
        }
        kv
    }
}

/// `(φ(t), φ′(t))` for the direction with quantities `diag`.
pub fn fibering_phi(exps: &Exponents, diag: &NehariDiagnostics, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(NehariError::NonpositiveT(t));
    }
    Ok(phi_values(exps, diag.k, diag.a, diag.b, t))
}

fn phi_values(exps: &Exponents, k: f64, a: f64, b: f64, t: f64) -> (f64, f64) {
    let Exponents { p, q, .. } = *exps;
    let rs = exps.rs();
    let (tp, tq, trs) = (t.powf(p), t.powf(q), t.powf(rs));
    let phi = tp / p * k - tq / q * a - trs / rs * b;
    let dphi = (tp * k - tq * a - trs * b) / t;
    (phi, dphi)
}

/// Bisection in `ln t` on a bracket where `f` changes sign. Runs until the
/// bracket no longer shrinks in floating point.
fn bisect_log(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut f_lo, mut f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return lo;
    }
    if f_hi == 0.0 {
        return hi;
    }
    for _ in 0..400 {
        let mid = lo * (hi / lo).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if f_lo.abs() <= f_hi.abs() {
        lo
    } else {
        hi
    }
}

/// Steps geometrically from `start` by `factor` until `pred` holds.
fn march(start: f64, factor: f64, pred: impl Fn(f64) -> bool) -> f64 {
    let mut t = start;
    for _ in 0..4000 {
        if pred(t) {
            return t;
        }
        let next = t * factor;
        if next == 0.0 || !next.is_finite() {
            break;
        }
        t = next;
    }
    t
}

/// Case analysis of the fibering map from `K`, `A`, `B`.
pub fn find_nehari_scalings(exps: &Exponents, diag: &NehariDiagnostics) -> Result<FiberingAnalysis> {
    analyze(exps, diag.k, diag.a, diag.b)
}

pub fn analyze(exps: &Exponents, k: f64, a: f64, b: f64) -> Result<FiberingAnalysis> {
    if !(k > 0.0) {
        return Err(NehariError::ZeroPair);
    }
    let Exponents { p, q, .. } = *exps;
    let rs = exps.rs();
    // φ′(t) = t^{q−1}·g(t)
    let g = |t: f64| k * t.powf(p - q) - b * t.powf(rs - q) - a;
    let root = |t: f64, branch: NehariClass| FiberingRoot {
        t,
        phi: phi_values(exps, k, a, b, t).0,
        branch,
    };

    let mut out = FiberingAnalysis {
        k,
        a,
        b,
        t_max: None,
        m_max: None,
        roots: Vec::new(),
    };

    if b > 0.0 {
        let t_max = ((p - q) * k / ((rs - q) * b)).powf(1.0 / (rs - p));
        let m_max = k * t_max.powf(p - q) - b * t_max.powf(rs - q);
        out.t_max = Some(t_max);
        out.m_max = Some(m_max);
        // m vanishes at t_zero > t_max
        let t_zero = (k / b).powf(1.0 / (rs - p));
        if (a - m_max).abs() <= DEGENERATE_BAND * a.abs().max(m_max) {
            out.roots.push(root(t_max, NehariClass::Zero));
        } else if a <= 0.0 {
            let hi = if a == 0.0 {
                t_zero
            } else {
                march(t_zero, 2.0, |t| g(t) < 0.0)
            };
            let t = if a == 0.0 { t_zero } else { bisect_log(t_max, hi, g) };
            out.roots.push(root(t, NehariClass::Minus));
        } else if a < m_max {
            let lo = march(t_max * 0.5, 0.5, |t| g(t) < 0.0);
            out.roots.push(root(bisect_log(lo, t_max, g), NehariClass::Plus));
            out.roots.push(root(bisect_log(t_max, t_zero, g), NehariClass::Minus));
        }
    } else if a > 0.0 {
        // g increases from −A to +∞; g(t0) ≥ 0 at the root of K t^{p−q} = A
        let t0 = (a / k).powf(1.0 / (p - q));
        let t = if b == 0.0 {
            t0
        } else {
            let lo = march(t0 * 0.5, 0.5, |t| g(t) < 0.0);
            bisect_log(lo, t0, g)
        };
        out.roots.push(root(t, NehariClass::Plus));
    }
    Ok(out)
}

/// Scales `pair` onto the requested branch; returns the scaled pair and `t`.
pub fn project_with_scale(params: &ProblemParams, pair: &PairField, branch: Branch) -> Result<(PairField, f64)> {
    let diag = params.nehari_quantities(pair)?;
    let analysis = find_nehari_scalings(params.exponents(), &diag)?;
    let root = analysis.root(branch).ok_or(NehariError::NoScaling(branch.into()))?;
    Ok((pair.scaled(root.t), root.t))
}

/// Scales `pair` onto `M+` or `M−`.
pub fn project_to_branch(params: &ProblemParams, pair: &PairField, branch: Branch) -> Result<PairField> {
    project_with_scale(params, pair, branch).map(|(p, _)| p)
}

/// Norm bounds that rule out `M0` for small `|λ|, |μ|`.
///
/// Every element of `M0` has norm at least `lower_bound` and at most
/// `upper_coefficient·(|λ|‖f‖∞ + |μ|‖g‖∞)^{upper_exponent}`; when the upper
/// bound falls below the lower bound, `M0` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCertificate {
    pub lower_bound: f64,
    pub upper_coefficient: f64,
    pub upper_exponent: f64,
    pub lambda: f64,
    pub mu: f64,
    pub upper_bound: f64,
    /// Symmetric threshold: `|λ| = |μ| < lambda0` is certified.
    pub lambda0: f64,
    pub mu0: f64,
    pub certified: bool,
    pub s_rs: f64,
    pub s_q: f64,
    pub mesh_label: String,
    sup_f: f64,
    sup_g: f64,
}

impl ThresholdCertificate {
    pub fn upper_bound_at(&self, lambda: f64, mu: f64) -> f64 {
        self.upper_coefficient * (lambda.abs() * self.sup_f + mu.abs() * self.sup_g).powf(self.upper_exponent)
    }

    pub fn is_certified_at(&self, lambda: f64, mu: f64) -> bool {
        self.upper_bound_at(lambda, mu) < self.lower_bound
    }
}

impl KeyValue for ThresholdCertificate {
    fn key_values(&self) -> Vec<(String, String)> {
        [
            ("mesh", self.mesh_label.clone()),
            ("S_rs", real(self.s_rs)),
            ("S_q", real(self.s_q)),
            ("lambda", real(self.lambda)),
            ("mu", real(self.mu)),
            ("lower_bound", real(self.lower_bound)),
            ("upper_coefficient", real(self.upper_coefficient)),
            ("upper_exponent", real(self.upper_exponent)),
            ("upper_bound", real(self.upper_bound)),
            ("lambda0", real(self.lambda0)),
            ("mu0", real(self.mu0)),
            ("certified", self.certified.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

fn check_constant(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(NehariError::InvalidConstant(format!(
            "{name} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

/// Emptiness certificate for `M0` at `(λ, μ)`, from the embedding constants
/// `S_{r+s}` and `S_q` of the pair space.
///
/// On `M0`, `(p−q)K = (r+s−q)B` and `(r+s−p)K = (r+s−q)A`. Bounding `B` by
/// `‖h‖∞ S_{r+s}^{−(r+s)/p}‖(u,v)‖^{r+s}` and `A` by
/// `(|λ|‖f‖∞ + |μ|‖g‖∞) S_q^{−q/p}‖(u,v)‖^q` gives the two norm bounds.
pub fn m0_empty_certificate(
    params: &ProblemParams,
    s_rs: f64,
    s_q: f64,
    lambda: f64,
    mu: f64,
) -> Result<ThresholdCertificate> {
    check_constant("S_rs", s_rs)?;
    check_constant("S_q", s_q)?;
    let Exponents { p, q, .. } = *params.exponents();
    let rs = params.exponents().rs();
    let (sup_f, sup_g, sup_h) = params.weight_sup_norms();

    let lower_bound = if sup_h == 0.0 {
        f64::INFINITY
    } else {
        ((p - q) * s_rs.powf(rs / p) / ((rs - q) * sup_h)).powf(1.0 / (rs - p))
    };
    let upper_exponent = 1.0 / (p - q);
    let upper_coefficient = ((rs - q) / (rs - p) * s_q.powf(-q / p)).powf(upper_exponent);
    let weight_sum = sup_f + sup_g;
    let lambda0 = if weight_sum == 0.0 {
        f64::INFINITY
    } else {
        (lower_bound / upper_coefficient).powf(p - q) / weight_sum
    };
    let mut cert = ThresholdCertificate {
        lower_bound,
        upper_coefficient,
        upper_exponent,
        lambda,
        mu,
        upper_bound: 0.0,
        lambda0,
        mu0: lambda0,
        certified: false,
        s_rs,
        s_q,
        mesh_label: params.mesh().label(),
        sup_f,
        sup_g,
    };
    cert.upper_bound = cert.upper_bound_at(lambda, mu);
    cert.certified = cert.upper_bound < cert.lower_bound;
    Ok(cert)
}

/// Lower bound for `J` on the manifold at norm `‖(u,v)‖^p = k`:
///
/// `(r+s−p)/(p(r+s))·K − (r+s−q)/(q(r+s))·(|λ|‖f‖∞ + |μ|‖g‖∞)·S_q^{−q/p}·K^{q/p}`.
pub fn coercivity_lower_bound(params: &ProblemParams, s_q: f64, k: f64) -> Result<f64> {
    check_constant("S_q", s_q)?;
    if !(k >= 0.0) {
        return Err(NehariError::InvalidParams(format!("K must be nonnegative, got {k}")));
    }
    let Exponents { p, q, .. } = *params.exponents();
    let rs = params.exponents().rs();
    let (sup_f, sup_g, _) = params.weight_sup_norms();
    let weights = params.lambda().abs() * sup_f + params.mu().abs() * sup_g;
    Ok((rs - p) / (p * rs) * k - (rs - q) / (q * rs) * weights * s_q.powf(-q / p) * k.powf(q / p))
}

/// Empirical stand-in for the threshold below which no sampled direction
/// admits a degenerate scaling, with `μ = λ`: the smallest `m(t_max)/Â` over
/// directions with `Â = ∫f|u|^q + ∫g|v|^q > 0` and `B > 0`. Returns `None`
/// when no direction constrains it.
pub fn empirical_degeneracy_threshold(params: &ProblemParams, directions: &[PairField]) -> Result<Option<f64>> {
    let unit = params.with_lambda_mu(1.0, 1.0)?;
    let mut best: Option<f64> = None;
    for dir in directions {
        let diag = unit.nehari_quantities_with(dir, Tolerances::default())?;
        if diag.a <= 0.0 || diag.b <= 0.0 {
            continue;
        }
        let analysis = analyze(unit.exponents(), diag.k, 0.0, diag.b)?;
        let ratio = analysis.m_max.expect("B > 0 has a maximum") / diag.a;
        best = Some(best.map_or(ratio, |b: f64| b.min(ratio)));
    }
    Ok(best)
}
