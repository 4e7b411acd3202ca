//! Nehari-manifold solvers for concave-convex elliptic systems
//!
//! ```text
//! −div(|∇u|^{p−2}∇u) = λ f |u|^{q−2}u + r/(r+s) h |u|^{r−2}u |v|^s
//! −div(|∇v|^{p−2}∇v) = μ g |v|^{q−2}v + s/(r+s) h |u|^r |v|^{s−2}v
//! u = v = 0 on ∂Ω
//! ```
//!
//! with `1 < q < p < r + s` and sign-changing weights. The two positive
//! solutions are found as minimizers of the energy over the two branches
//! `M+` and `M−` of the Nehari manifold.
//!
//! Modules:
//! - [`mesh`] and [`field`]: uniform grids on intervals and rectangles, nodal fields, CSV.
//! - [`energy`]: the energy functional, its weak residual, Nehari quantities.
//! - [`fibering`]: fibering maps, branch projections, `M0` certificates.
//! - [`sobolev`]: discrete embedding constants.
//! - [`descent`]: projected descent on `M±` and solution verification.

// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod descent;
pub mod energy;
pub mod error;
pub mod fibering;
pub mod field;
pub mod keyvalue;
pub mod laplacian;
pub mod mesh;
pub mod sobolev;

pub use descent::{
    find_two_solutions, minimize_on_branch, seed_pair, verify_solution, SeedStrategy, SolverOptions, SolverReport,
    TwoSolutions, Verification,
};
pub use energy::{Branch, Exponents, NehariClass, NehariDiagnostics, ProblemParams, Tolerances};
pub use error::{NehariError, Result};
pub use fibering::{
    coercivity_lower_bound, fibering_phi, find_nehari_scalings, m0_empty_certificate, project_to_branch,
    FiberingAnalysis, FiberingRoot, ThresholdCertificate,
};
pub use field::{Field, PairField, WeightPreset};
pub use keyvalue::KeyValue;
pub use mesh::Mesh;
pub use sobolev::{best_sobolev_constant, first_eigenpair, EmbeddingConstant};
