//! Benchmark fixtures shared by the criterion targets.

use hidden_parity::{Grid, HamiltonianMatrix, Potential, Spectrum};

/// Quartic-cubic Hamiltonian on `[-10, 10]` with `n` interior points.
pub fn quartic_cubic(n: usize) -> HamiltonianMatrix {
    let grid = Grid::new(-10.0, 10.0, n).expect("valid grid");
    HamiltonianMatrix::assemble(&Potential::quartic_cubic(), &grid)
}

pub fn solved(n: usize) -> (HamiltonianMatrix, Spectrum) {
    let hm = quartic_cubic(n);
    let s = hm.solve().expect("solvable");
    (hm, s)
}

/// Harmonic Hamiltonian on `[-8, 8]`; symmetric, so it takes the block-split path.
pub fn harmonic(n: usize) -> HamiltonianMatrix {
    let grid = Grid::new(-8.0, 8.0, n).expect("valid grid");
    HamiltonianMatrix::assemble(&Potential::harmonic(), &grid)
}
