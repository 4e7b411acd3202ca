#![allow(dead_code)]

use nehari_core::{Branch, Exponents, Field, Mesh, PairField, ProblemParams, WeightPreset};
use rand::Rng;

pub fn t1_exponents() -> Exponents {
    Exponents::new(2.0, 1.5, 3.0, 3.0).unwrap()
}

pub fn problem(n: usize, f: WeightPreset, lambda: f64) -> ProblemParams {
    let mesh = Mesh::interval(0.0, 1.0, n).unwrap();
    let w = mesh.sample_weight(&f).unwrap();
    let one = mesh.sample_weight(&WeightPreset::Constant(1.0)).unwrap();
    ProblemParams::new(mesh, t1_exponents(), lambda, lambda, w.clone(), w, one).unwrap()
}

pub fn t1(n: usize) -> ProblemParams {
    problem(n, WeightPreset::Constant(1.0), 0.1)
}

pub fn t2(n: usize) -> ProblemParams {
    problem(n, WeightPreset::Cosine(1), 0.05)
}

/// Random Dirichlet field with interior values in `[lo, hi)`.
pub fn random_field(mesh: &Mesh, rng: &mut impl Rng, lo: f64, hi: f64) -> Field {
    let mut f = Field::zeros(mesh.node_count());
    for &i in mesh.interior() {
        f.values_mut()[i] = rng.gen_range(lo..hi);
    }
    f
}

/// Smooth random field: a short positive sine series.
pub fn smooth_field(mesh: &Mesh, rng: &mut impl Rng) -> Field {
    let c: Vec<f64> = (0..4).map(|k| rng.gen_range(0.0..1.0) / (k + 1) as f64).collect();
    let c0 = 1.0 + rng.gen_range(0.0..1.0);
    mesh.sample_dirichlet(|x| {
        let mut v = 1.0;
        for xi in x {
            let s = std::f64::consts::PI * xi;
            v *= c0 * s.sin()
                + c.iter()
                    .enumerate()
                    .map(|(k, a)| 0.2 * a * ((k + 2) as f64 * s).sin())
                    .sum::<f64>();
        }
        v
    })
}

pub fn random_pair(mesh: &Mesh, rng: &mut impl Rng) -> PairField {
    PairField::new(
        mesh,
        random_field(mesh, rng, 0.0, 1.0),
        random_field(mesh, rng, 0.0, 1.0),
    )
    .unwrap()
}

/// A random pair projected onto a randomly chosen feasible branch.
pub fn random_projected(params: &ProblemParams, rng: &mut impl Rng) -> (PairField, Branch) {
    loop {
        let pair = random_pair(params.mesh(), rng);
        let first = if rng.gen_bool(0.5) { Branch::Plus } else { Branch::Minus };
        let second = if first == Branch::Plus {
            Branch::Minus
        } else {
            Branch::Plus
        };
        for b in [first, second] {
            if let Ok(p) = nehari_core::project_to_branch(params, &pair, b) {
                return (p, b);
            }
        }
    }
}

/// Positive roots of `K t^{p−q} − B t^{rs−q} − A` (the sign-determining
/// factor of `φ′`) by a geometric sign scan over `[1e-16, 1e16]` with
/// `points` samples, each bracket refined by plain bisection.
pub fn sign_scan_roots(p: f64, q: f64, rs: f64, k: f64, a: f64, b: f64, points: usize) -> Vec<f64> {
    let g = |t: f64| k * t.powf(p - q) - b * t.powf(rs - q) - a;
    let (lo, hi) = (1e-16f64, 1e16f64);
    let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
    let (ra, rb) = (ratio.powf(p - q), ratio.powf(rs - q));
    let (mut xa, mut xb) = (lo.powf(p - q), lo.powf(rs - q));
    let mut t = lo;
    let mut prev = k * xa - b * xb - a;
    let mut roots = Vec::new();
    for _ in 1..points {
        let t_next = t * ratio;
        xa *= ra;
        xb *= rb;
        let cur = k * xa - b * xb - a;
        if (prev < 0.0) != (cur < 0.0) {
            let (mut l, mut h) = (t, t_next);
            let neg_low = g(l) < 0.0;
            for _ in 0..200 {
                let m = 0.5 * (l + h);
                if m <= l || m >= h {
                    break;
                }
                if (g(m) < 0.0) == neg_low {
                    l = m;
                } else {
                    h = m;
                }
            }
            roots.push(0.5 * (l + h));
        }
        prev = cur;
        t = t_next;
    }
    roots
}

pub fn relative(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
