//! Finite element boundary-value problems solved as Ising ground-state
//! searches.
//!
//! A 1D problem `-(p u')' + q u = f` with Dirichlet ends is discretized with
//! hat functions ([`fem`]); each node's value is encoded in three qubits and
//! the discrete energy becomes an Ising hamiltonian ([`ising`]); a sampler
//! ([`sampler`]) finds its low-energy labelings, and the box search
//! ([`box_solver`]) recenters and shrinks the set of candidate values until
//! the nodal values are resolved to the requested slack.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod box_solver;
pub mod cli;
pub mod error;
pub mod fem;
pub mod input;
pub mod ising;
pub mod linalg;
pub mod quadrature;
pub mod sampler;

pub use box_solver::{
    bound_for, box_graph, box_step, candidates_from_box, error_bound, run_box, BoxConfig, BoxRun, BoxState,
    IterationRecord, MoveKind,
};
pub use error::{Error, Result};
pub use fem::{
    build_a_vector, classical_fem_solve, compute_element_vectors, functional_value, truss_functional_vectors,
    Coefficient, ElementVector, Mesh1D, NodalState, PiecewiseLinear, Problem1D,
};
pub use ising::{
    assemble, decode_state, estimate_element_coupling, ising_energy, nodal_graph, ElementCoupling, IsingGraph,
    NodeCandidates, QubitLabeling, Slot,
};
pub use sampler::{best_feasible, solve_exact, solve_sa, AnnealSchedule, SampleResult, Sampler, SamplerKind};
