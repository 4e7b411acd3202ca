//! Shared fixtures for the solver benchmarks.

use nehari_core::{Exponents, Mesh, PairField, ProblemParams, SeedStrategy, WeightPreset};

/// Model problem on (0,1): `p = 2`, `q = 1.5`, `r = s = 3`, constant weights
/// and `λ = μ = 0.1`.
pub fn model_problem(nodes: usize) -> ProblemParams {
    let mesh = Mesh::interval(0.0, 1.0, nodes).expect("valid mesh");
    let one = mesh
        .sample_weight(&WeightPreset::Constant(1.0))
        .expect("constant weight");
    let e = Exponents::new(2.0, 1.5, 3.0, 3.0).expect("valid exponents");
    ProblemParams::new(mesh, e, 0.1, 0.1, one.clone(), one.clone(), one).expect("valid problem")
}

/// A fixed positive pair to evaluate functionals at.
pub fn sample_pair(params: &ProblemParams) -> PairField {
    nehari_core::seed_pair(params, SeedStrategy::Random(1)).expect("seed pair")
}
