//! Direct solver for the discrete Dirichlet Laplacian `−Δ_h x = b`.
//!
//! Used as the inner-product (preconditioner) operator by the descent
//! solvers and by inverse power iteration. 1D uses the Thomas algorithm;
//! 2D uses fast diagonalization in the discrete sine basis, which is exact
//! for the five-point operator on a rectangle.

use std::f64::consts::PI;

use crate::mesh::Mesh;

#[derive(Debug, Clone)]
enum Kind {
    Interval { interior: usize, inv_h2: f64 },
    Rectangle(SineBasis2d),
}

#[derive(Debug, Clone)]
struct SineBasis2d {
    nx: usize,
    mx: usize,
    my: usize,
    sx: Vec<f64>,
    sy: Vec<f64>,
    eig_x: Vec<f64>,
    eig_y: Vec<f64>,
}

fn sine_basis(m: usize, h: f64) -> (Vec<f64>, Vec<f64>) {
    let norm = (2.0 / (m + 1) as f64).sqrt();
    let mut s = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            s[i * m + k] = norm * (PI * ((i + 1) * (k + 1)) as f64 / (m + 1) as f64).sin();
        }
    }
    let eig = (0..m)
        .map(|k| {
            let x = (PI * (k + 1) as f64 / (2 * (m + 1)) as f64).sin();
            4.0 * x * x / (h * h)
        })
        .collect();
    (s, eig)
}

/// `out = a · b` for row-major `a` (`r × k`) and `b` (`k × c`).
fn matmul(a: &[f64], b: &[f64], r: usize, k: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for l in 0..k {
            let a_il = a[i * k + l];
            let row = &b[l * c..(l + 1) * c];
            for (o, &b_lj) in out[i * c..(i + 1) * c].iter_mut().zip(row) {
                *o += a_il * b_lj;
            }
        }
    }
    out
}

/// Factored `−Δ_h` with homogeneous Dirichlet conditions on a mesh.
#[derive(Debug, Clone)]
pub struct DirichletLaplacian {
    nodes: usize,
    kind: Kind,
}

impl DirichletLaplacian {
    pub fn new(mesh: &Mesh) -> Self {
        let kind = match mesh.axes() {
            [ax] => Kind::Interval {
                interior: ax.nodes - 2,
                inv_h2: 1.0 / (ax.spacing * ax.spacing),
            },
            [ax, ay] => {
                let (mx, my) = (ax.nodes - 2, ay.nodes - 2);
                let (sx, eig_x) = sine_basis(mx, ax.spacing);
                let (sy, eig_y) = sine_basis(my, ay.spacing);
                Kind::Rectangle(SineBasis2d {
                    nx: ax.nodes,
                    mx,
                    my,
                    sx,
                    sy,
                    eig_x,
                    eig_y,
                })
            }
            _ => unreachable!("mesh dimension is 1 or 2"),
        };
        DirichletLaplacian {
            nodes: mesh.node_count(),
            kind,
        }
    }

    /// Solves `−Δ_h x = rhs` at interior nodes. Boundary entries of `rhs` are
    /// ignored and those of the result are zero.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.nodes, "rhs length must match the mesh");
        match &self.kind {
            Kind::Interval { interior, inv_h2 } => solve_tridiagonal(rhs, *interior, *inv_h2),
            Kind::Rectangle(basis) => basis.solve(rhs),
        }
    }
}

/// Thomas algorithm for `(1/h²)·tridiag(−1, 2, −1)`.
fn solve_tridiagonal(rhs: &[f64], m: usize, inv_h2: f64) -> Vec<f64> {
    let mut c_prime = vec![0.0; m];
    let mut d_prime = vec![0.0; m];
    let (diag, off) = (2.0 * inv_h2, -inv_h2);
    c_prime[0] = off / diag;
    d_prime[0] = rhs[1] / diag;
    for i in 1..m {
        let denom = diag - off * c_prime[i - 1];
        c_prime[i] = off / denom;
        d_prime[i] = (rhs[i + 1] - off * d_prime[i - 1]) / denom;
    }
    let mut x = vec![0.0; m + 2];
    x[m] = d_prime[m - 1];
    for i in (0..m - 1).rev() {
        x[i + 1] = d_prime[i] - c_prime[i] * x[i + 2];
    }
    x
}

impl SineBasis2d {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (mx, my, nx) = (self.mx, self.my, self.nx);
        // interior block stored as (row = x index, col = y index)
        let mut b = vec![0.0; mx * my];
        for j in 0..my {
            for i in 0..mx {
                b[i * my + j] = rhs[(i + 1) + nx * (j + 1)];
            }
        }
        let mut hat = matmul(&matmul(&self.sx, &b, mx, mx, my), &self.sy, mx, my, my);
        for i in 0..mx {
            for j in 0..my {
                hat[i * my + j] /= self.eig_x[i] + self.eig_y[j];
            }
        }
        let x = matmul(&matmul(&self.sx, &hat, mx, mx, my), &self.sy, mx, my, my);
        let mut out = vec![0.0; rhs.len()];
        for j in 0..my {
            for i in 0..mx {
                out[(i + 1) + nx * (j + 1)] = x[i * my + j];
            }
        }
        out
    }
}
