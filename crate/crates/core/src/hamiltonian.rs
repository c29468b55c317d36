//! Finite-difference Hamiltonian `H = -d²/dx² + V(x)` and its eigensystem.
//!
//! Units are `ħ = 1`, `2m = 1`, so `p = -i d/dx` and the harmonic spectrum
//! is `2n + 1`. The three-point stencil with Dirichlet walls gives a real
//! symmetric tridiagonal (Jacobi) matrix `T`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::Potential;
use crate::tridiag::symmetric_tridiagonal_eigen;

/// Relative gap below which two eigenvalues are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Entries below this fraction of the mode's peak do not fix its sign.
const SIGN_THRESHOLD: f64 = 1e-8;
/// Entries below this fraction of the mode's peak are ignored by the node count.
const NODE_THRESHOLD: f64 = 1e-9;

/// Action matrix of the discretized Hamiltonian, stored as its two bands.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    grid: Grid,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl HamiltonianMatrix {
    /// Central-difference assembly: `diag[i] = 2/h² + V(x_i)`, `offdiag[i] = -1/h²`.
    pub fn assemble(potential: &Potential, grid: &Grid) -> Self {
        let h = grid.spacing();
        let kinetic = 1.0 / (h * h);
        let diag = grid
            .points()
            .iter()
            .map(|&x| 2.0 * kinetic + potential.evaluate(x))
            .collect();
        let offdiag = vec![-kinetic; grid.len() - 1];
        HamiltonianMatrix {
            grid: grid.clone(),
            diag,
            offdiag,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Largest entry magnitude, `‖T‖_max`.
    pub fn max_abs(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.offdiag)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `T f` for a real sample vector.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.grid.check_len(f.len())?;
        let n = self.len();
        let mut out: Vec<f64> = self.diag.iter().zip(f).map(|(d, x)| d * x).collect();
        for i in 0..n - 1 {
            out[i] += self.offdiag[i] * f[i + 1];
            out[i + 1] += self.offdiag[i] * f[i];
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut t = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag));
        for i in 0..n - 1 {
            t[(i, i + 1)] = self.offdiag[i];
            t[(i + 1, i)] = self.offdiag[i];
        }
        t
    }

    /// True when `J T J = T` holds bit for bit, `J` being the reflection
    /// `i -> n - 1 - i`. Even potentials on symmetric grids assemble this way.
    pub fn is_persymmetric(&self) -> bool {
        let n = self.len();
        (0..n / 2).all(|i| self.diag[i] == self.diag[n - 1 - i])
            && (0..(n - 1) / 2).all(|i| self.offdiag[i] == self.offdiag[n - 2 - i])
    }

    /// All eigenpairs of `T`, ascending, sign-fixed.
    ///
    /// Persymmetric matrices are split into reflection-even and -odd blocks.
    /// Their top-of-band modes come in mirror pairs localized at the two
    /// walls whose splitting sits below rounding, so a direct solve returns
    /// arbitrary mixtures of each pair. The block eigenvalues are merged by
    /// the oscillation theorem: mode `k` has `k` nodes, so its reflection
    /// parity is `(-1)^k` and the blocks interleave even, odd, even, ...
    pub fn solve(&self) -> Result<Spectrum> {
        let (energies, mut modes) = if self.is_persymmetric() {
            self.solve_persymmetric()?
        } else {
            let (energies, modes) = symmetric_tridiagonal_eigen(&self.diag, &self.offdiag)?;
            check_gaps(&energies, 0, 1)?;
            (energies, modes)
        };

        for mut col in modes.column_iter_mut() {
            let peak = col.amax();
            if let Some(first) = col.iter().find(|v| v.abs() > SIGN_THRESHOLD * peak) {
                if *first < 0.0 {
                    col.neg_mut();
                }
            }
        }

        Ok(Spectrum {
            grid: self.grid.clone(),
            energies,
            modes,
        })
    }

    fn solve_persymmetric(&self) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.len();
        let m = n / 2;
        let (d, e) = (&self.diag, &self.offdiag);
        let r2 = std::f64::consts::SQRT_2;

        // Basis (e_i ± e_{n-1-i}) / √2 for i < m, plus e_m itself when n is odd.
        let (even_d, even_e, odd_d, odd_e) = if n.is_multiple_of(2) {
            let mut even_d = d[..m].to_vec();
            let mut odd_d = even_d.clone();
            even_d[m - 1] += e[m - 1];
            odd_d[m - 1] -= e[m - 1];
            (even_d, e[..m - 1].to_vec(), odd_d, e[..m - 1].to_vec())
        } else {
            let mut even_e = e[..m].to_vec();
            even_e[m - 1] *= r2;
            (d[..=m].to_vec(), even_e, d[..m].to_vec(), e[..m - 1].to_vec())
        };

        let (even_vals, even_vecs) =
            symmetric_tridiagonal_eigen(&even_d, &even_e).map_err(|err| offset_index(err, 0, 2))?;
        let (odd_vals, odd_vecs) =
            symmetric_tridiagonal_eigen(&odd_d, &odd_e).map_err(|err| offset_index(err, 1, 2))?;
        check_gaps(&even_vals, 0, 2)?;
        check_gaps(&odd_vals, 1, 2)?;

        let mut energies = Vec::with_capacity(n);
        let mut modes = DMatrix::zeros(n, n);
        for k in 0..n {
            let (vals, vecs, sign) = if k % 2 == 0 {
                (&even_vals, &even_vecs, 1.0)
            } else {
                (&odd_vals, &odd_vecs, -1.0)
            };
            let b = k / 2;
            energies.push(vals[b]);
            let mut col = modes.column_mut(k);
            for i in 0..m {
                let v = vecs[(i, b)] / r2;
                col[i] = v;
                col[n - 1 - i] = sign * v;
            }
            if n % 2 == 1 && k % 2 == 0 {
                col[m] = vecs[(m, b)];
            }
        }

        // Interleaving can only be violated by rounding inside an unresolved
        // mirror pair; anything larger means the merge is wrong.
        let scale = self.max_abs();
        for k in 0..n - 1 {
            let overlap = energies[k] - energies[k + 1];
            if overlap > PAIR_RESOLUTION * f64::EPSILON * scale {
                return Err(Error::Degenerate {
                    index: k,
                    gap: -overlap,
                });
            }
        }
        energies.sort_by(f64::total_cmp);
        Ok((energies, modes))
    }
}

/// Eigenvalue slack, in units of `eps ‖T‖`, tolerated between mirror pairs.
const PAIR_RESOLUTION: f64 = 1e3;

/// Rejects gaps `<= DEGENERACY_TOL · max|E|`; indices map back as `offset + stride · k`.
fn check_gaps(values: &[f64], offset: usize, stride: usize) -> Result<()> {
    let scale = values.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    for (k, w) in values.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if gap <= DEGENERACY_TOL * scale {
            return Err(Error::Degenerate {
                index: offset + stride * k,
                gap,
            });
        }
    }
    Ok(())
}

fn offset_index(err: Error, offset: usize, stride: usize) -> Error {
    match err {
        Error::ConvergenceFailure { index } => Error::ConvergenceFailure {
            index: offset + stride * index,
        },
        other => other,
    }
}

/// Ordered eigenpairs of the discretized Hamiltonian.
///
/// `modes` holds Euclidean-orthonormal eigenvectors `u_n` as columns; the
/// quadrature-normalized eigenfunction samples are `φ_n(x_i) = u_n[i] / √h`.
/// A spectrum may carry fewer modes than grid points after truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    energies: Vec<f64>,
    modes: DMatrix<f64>,
}

impl Spectrum {
    /// Assembles a spectrum from externally computed eigenpairs.
    pub fn from_parts(grid: Grid, energies: Vec<f64>, modes: DMatrix<f64>) -> Result<Self> {
        grid.check_len(modes.nrows())?;
        if energies.len() != modes.ncols() {
            return Err(Error::LengthMismatch {
                expected: modes.ncols(),
                found: energies.len(),
            });
        }
        Ok(Spectrum {
            grid,
            energies,
            modes,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Eigenvector matrix, one mode per column.
    pub fn modes(&self) -> &DMatrix<f64> {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.energies.len()
    }

    pub fn is_full(&self) -> bool {
        self.mode_count() == self.grid.len()
    }

    pub(crate) fn require_full(&self) -> Result<()> {
        if self.is_full() {
            Ok(())
        } else {
            Err(Error::TruncatedSpectrum {
                have: self.mode_count(),
                need: self.grid.len(),
            })
        }
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k < self.mode_count() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: k,
                len: self.mode_count(),
            })
        }
    }

    /// Euclidean-normalized eigenvector `u_k`.
    pub fn mode(&self, k: usize) -> Result<&[f64]> {
        self.check_index(k)?;
        let n = self.grid.len();
        Ok(&self.modes.as_slice()[k * n..(k + 1) * n])
    }

    /// Quadrature-normalized eigenfunction samples `φ_k(x_i) = u_k[i] / √h`.
    pub fn eigenfunction(&self, k: usize) -> Result<Vec<f64>> {
        let scale = 1.0 / self.grid.spacing().sqrt();
        Ok(self.mode(k)?.iter().map(|u| u * scale).collect())
    }

    /// Keeps only the lowest `m` modes.
    pub fn truncated(&self, m: usize) -> Result<Spectrum> {
        if m > self.mode_count() {
            return Err(Error::IndexOutOfRange {
                index: m,
                len: self.mode_count(),
            });
        }
        Ok(Spectrum {
            grid: self.grid.clone(),
            energies: self.energies[..m].to_vec(),
            modes: self.modes.columns(0, m).into_owned(),
        })
    }

    /// Copy of this spectrum with `amplitude`-scaled uniform noise added to
    /// mode `k`, which is then renormalized. Deterministic in `seed`.
    pub fn with_perturbed_mode(&self, k: usize, amplitude: f64, seed: u64) -> Result<Spectrum> {
        self.check_index(k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        let mut col = out.modes.column_mut(k);
        for v in col.iter_mut() {
            *v += amplitude * rng.random_range(-1.0..1.0);
        }
        let norm = col.norm();
        col /= norm;
        Ok(out)
    }

    /// Largest `|⟨φ_m, φ_n⟩ - δ_mn|` over the lowest `rank` modes.
    pub fn check_orthonormality(&self, rank: usize) -> Result<f64> {
        if rank > self.mode_count() {
            return Err(Error::IndexOutOfRange {
                index: rank,
                len: self.mode_count(),
            });
        }
        let h = self.grid.spacing();
        let phi = self.modes.columns(0, rank) / h.sqrt();
        let gram = phi.transpose() * &phi * h;
        Ok(max_identity_deviation(&gram))
    }

    /// Largest `|h Σ_n φ_n(x_i) φ_n(x_j) - δ_ij|`, the discrete completeness
    /// relation. Requires every mode.
    pub fn check_completeness(&self) -> Result<f64> {
        self.require_full()?;
        Ok(completeness_defect(&self.modes))
    }

    /// Number of strict sign changes of `u_k`, ignoring near-zero entries.
    pub fn count_nodes(&self, k: usize) -> Result<usize> {
        let u = self.mode(k)?;
        let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut nodes = 0;
        let mut last_sign = 0.0f64;
        for &v in u {
            if v.abs() <= NODE_THRESHOLD * peak {
                continue;
            }
            let sign = v.signum();
            if last_sign != 0.0 && sign != last_sign {
                nodes += 1;
            }
            last_sign = sign;
        }
        Ok(nodes)
    }

    /// `|⟨φ_k, H φ_k⟩ - E_k|` with the quadrature inner product.
    pub fn rayleigh_defect(&self, hm: &HamiltonianMatrix, k: usize) -> Result<f64> {
        if hm.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let phi = self.eigenfunction(k)?;
        let h_phi = hm.apply(&phi)?;
        let value = self.grid.inner_product_real(&phi, &h_phi)?;
        Ok((value - self.energies[k]).abs())
    }
}

/// `max |Σ_n u_n[i] u_n[j] - δ_ij|` over whatever modes `modes` holds.
pub fn completeness_defect(modes: &DMatrix<f64>) -> f64 {
    let projector = modes * modes.transpose();
    max_identity_deviation(&projector)
}

fn max_identity_deviation(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for ((r, c), v) in m.iter().enumerate().map(|(k, v)| ((k % m.nrows(), k / m.nrows()), v)) {
        let target = if r == c { 1.0 } else { 0.0 };
        worst = worst.max((v - target).abs());
    }
    worst
}
