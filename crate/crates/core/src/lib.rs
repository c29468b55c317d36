//! Spectral parity for one-dimensional Hamiltonians `H = p² + V(x)`.
//!
//! Every Hermitian Hamiltonian of this form carries a linear Hermitian
//! involution `P = Σ_n (-1)^n |φ_n⟩⟨φ_n|` that commutes with `H` and grades
//! its eigenstates by `(-1)^n`, whether or not `V` is reflection symmetric.
//! This crate discretizes `H` on a Dirichlet grid, computes its full
//! eigensystem, builds `P`, the triparity `Q = Σ_n ω^n |φ_n⟩⟨φ_n|` and
//! arbitrary unimodular gradings, and checks their algebraic properties.
//!
//! ```
//! use hidden_parity::{build_parity, verify, Grid, HamiltonianMatrix, Potential};
//!
//! let grid = Grid::new(-6.0, 6.0, 99).unwrap();
//! let hm = HamiltonianMatrix::assemble(&Potential::quartic_cubic(), &grid);
//! let spectrum = hm.solve().unwrap();
//! let p = build_parity(&spectrum).unwrap();
//! assert!(verify::check_involution(&p).unwrap() < 1e-10);
//! assert!(verify::check_commutator(&p, &hm).unwrap() < 1e-10);
//! ```

pub mod error;
pub mod export;
pub mod grid;
pub mod hamiltonian;
pub mod operator;
pub mod potential;
pub mod sweep;
pub mod tridiag;
pub mod verify;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use grid::Grid;
pub use hamiltonian::{completeness_defect, HamiltonianMatrix, Spectrum};
pub use operator::{
    build_graded, build_parity, build_triparity, build_truncated, reconstruct_hamiltonian,
    spectral_projector, GradingWeights, OmegaBranch, OperatorKernel,
};
pub use potential::{NamedPotential, Potential, PotentialSpec};
pub use verify::{run_suite, verify_spectrum, SuiteOptions, Tolerances, VerificationReport};
