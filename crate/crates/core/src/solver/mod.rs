//! Pseudo-spectral ETDRK4 solvers for the periodic benchmark PDEs.

pub mod config;
pub mod etdrk;
pub mod initial;
pub mod pde;
pub mod rhs;
pub mod simulate;

pub use config::{Benchmark, CanonicalSpec, SolverConfig};
pub use etdrk::{etdrk_coefficients, EtdrkCoefficients};
pub use initial::{sample_initial_condition, sample_initial_condition_with, InitialConditionOptions};
pub use pde::{linear_symbol, Pde};
pub use rhs::{nonlinear_term, NonlinearOperator};
pub use simulate::{simulate, Stepper};
