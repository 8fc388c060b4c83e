//! Boundary element operators and swimming solvers.

pub mod assembly;
pub mod kernels;
pub mod quadrature;

pub use assembly::{assemble, assemble_entries, assemble_k, assemble_v, BemOperators, Operator};
pub mod solve;
pub mod validation;

pub use solve::{
    combine_split, dirichlet_to_neumann, drag_coefficient_head, monolithic_solve, solve_swimmer, split_solve,
    DirichletToNeumann, SolveMode, SwimSolution,
};
