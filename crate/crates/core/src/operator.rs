//! Coordinate-space operators built from a computed eigenbasis.
//!
//! An operator is stored as its dense action matrix `A` on sample vectors,
//! `(A f)_i = Σ_j A_ij f_j`. The continuum kernel is `K(x_i, x_j) = A_ij / h`,
//! since `∫ dz K(x, z) f(z) ≈ h Σ_j K(x_i, x_j) f_j`. That conversion happens
//! here and nowhere else.
//!
//! Every spectral constructor is a grading `A = Σ_n w_n u_n u_nᵀ` over the
//! Euclidean-orthonormal modes `u_n`: parity uses `w_n = (-1)^n`, triparity
//! `w_n = ω^n` with `ω³ = 1`, and the Hamiltonian itself `w_n = E_n`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hamiltonian::Spectrum;
use crate::C64;

/// Allowed deviation of a grading weight from unit modulus.
const UNIMODULAR_TOL: f64 = 1e-12;

/// Dense action matrix of an operator on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorKernel {
    grid: Grid,
    re: DMatrix<f64>,
    im: Option<DMatrix<f64>>,
    /// Number of modes summed when built from a truncated basis.
    rank: Option<usize>,
}

impl OperatorKernel {
    pub fn from_real(grid: Grid, action: DMatrix<f64>) -> Self {
        assert_eq!(action.shape(), (grid.len(), grid.len()), "action must be n x n");
        OperatorKernel {
            grid,
            re: action,
            im: None,
            rank: None,
        }
    }

    pub fn from_complex(grid: Grid, re: DMatrix<f64>, im: DMatrix<f64>) -> Self {
        assert_eq!(re.shape(), (grid.len(), grid.len()), "action must be n x n");
        assert_eq!(re.shape(), im.shape());
        OperatorKernel {
            grid,
            re,
            im: Some(im),
            rank: None,
        }
    }

    pub fn identity(grid: &Grid) -> Self {
        let n = grid.len();
        Self::from_real(grid.clone(), DMatrix::identity(n, n))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn real_part(&self) -> &DMatrix<f64> {
        &self.re
    }

    /// Imaginary part, `None` for real operators.
    pub fn imag_part(&self) -> Option<&DMatrix<f64>> {
        self.im.as_ref()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_none()
    }

    /// `Some(m)` when built from only the lowest `m` of `n` modes.
    pub fn truncation(&self) -> Option<usize> {
        self.rank
    }

    pub(crate) fn require_full_basis(&self) -> Result<()> {
        match self.rank {
            Some(rank) => Err(Error::TruncatedOperator { rank, n: self.len() }),
            None => Ok(()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().all(|v| v.is_finite())
            && self.im.as_ref().is_none_or(|m| m.iter().all(|v| v.is_finite()))
    }

    /// Action matrix entry `A_ij`.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        C64::new(self.re[(i, j)], self.im.as_ref().map_or(0.0, |m| m[(i, j)]))
    }

    /// Continuum kernel value `K(x_i, x_j) = A_ij / h`.
    pub fn kernel_value(&self, i: usize, j: usize) -> C64 {
        self.entry(i, j) / self.grid.spacing()
    }

    fn check_grid(&self, other: &Grid) -> Result<()> {
        if &self.grid == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `A f`, the discrete `∫ dz K(x, z) f(z)`.
    pub fn apply(&self, f: &[C64]) -> Result<Vec<C64>> {
        self.grid.check_len(f.len())?;
        let fr = DVector::from_iterator(f.len(), f.iter().map(|z| z.re));
        let fi = DVector::from_iterator(f.len(), f.iter().map(|z| z.im));
        let (out_re, out_im) = self.apply_split(&fr, &fi);
        Ok(out_re
            .iter()
            .zip(out_im.iter())
            .map(|(&r, &i)| C64::new(r, i))
            .collect())
    }

    /// `A f` for a real input vector.
    pub fn apply_real(&self, f: &[f64]) -> Result<Vec<C64>> {
        self.grid.check_len(f.len())?;
        let fr = DVector::from_column_slice(f);
        let out_re = &self.re * &fr;
        let out_im = match &self.im {
            Some(im) => im * &fr,
            None => DVector::zeros(f.len()),
        };
        Ok(out_re
            .iter()
            .zip(out_im.iter())
            .map(|(&r, &i)| C64::new(r, i))
            .collect())
    }

    pub(crate) fn apply_split(
        &self,
        fr: &DVector<f64>,
        fi: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let mut out_re = &self.re * fr;
        let mut out_im = &self.re * fi;
        if let Some(im) = &self.im {
            out_re -= im * fi;
            out_im += im * fr;
        }
        (out_re, out_im)
    }

    /// Matrix product `A_self A_other`, the discrete `∫ dz K₁(x, z) K₂(z, y)`.
    pub fn compose(&self, other: &OperatorKernel) -> Result<OperatorKernel> {
        self.check_grid(&other.grid)?;
        let re_re = &self.re * &other.re;
        let (re, im) = match (&self.im, &other.im) {
            (None, None) => (re_re, None),
            (Some(ai), None) => (re_re, Some(ai * &other.re)),
            (None, Some(bi)) => (re_re, Some(&self.re * bi)),
            (Some(ai), Some(bi)) => (re_re - ai * bi, Some(&self.re * bi + ai * &other.re)),
        };
        Ok(OperatorKernel {
            grid: self.grid.clone(),
            re,
            im,
            rank: combine_rank(self.rank, other.rank),
        })
    }

    /// `A^k` by repeated composition; `k = 0` yields the identity.
    pub fn power(&self, k: usize) -> OperatorKernel {
        let mut out = OperatorKernel::identity(&self.grid);
        for _ in 0..k {
            out = out.compose(self).expect("same grid");
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> OperatorKernel {
        OperatorKernel {
            grid: self.grid.clone(),
            re: self.re.transpose(),
            im: self.im.as_ref().map(|m| -m.transpose()),
            rank: self.rank,
        }
    }

    /// Entrywise difference `A_self - A_other`.
    pub fn sub(&self, other: &OperatorKernel) -> Result<OperatorKernel> {
        self.check_grid(&other.grid)?;
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(-b),
            (Some(a), Some(b)) => Some(a - b),
        };
        Ok(OperatorKernel {
            grid: self.grid.clone(),
            re: &self.re - &other.re,
            im,
            rank: combine_rank(self.rank, other.rank),
        })
    }

    /// Entrywise max modulus `‖A‖_max`.
    pub fn max_abs(&self) -> f64 {
        match &self.im {
            None => self.re.amax(),
            Some(im) => self
                .re
                .iter()
                .zip(im.iter())
                .fold(0.0f64, |m, (r, i)| m.max(r.hypot(*i))),
        }
    }

    /// `‖A_self - A_other‖_max`.
    pub fn max_abs_diff(&self, other: &OperatorKernel) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// `‖A - I‖_max`.
    pub fn identity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        let n = self.len();
        for j in 0..n {
            for i in 0..n {
                let z = self.entry(i, j) - if i == j { 1.0 } else { 0.0 };
                worst = worst.max(z.norm());
            }
        }
        worst
    }

    /// Largest singular value, by power iteration on `A†A` from a fixed
    /// pseudo-random start vector.
    pub fn spectral_norm(&self) -> f64 {
        let n = self.len();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut vr: DVector<f64> = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let mut vi: DVector<f64> = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let adj = self.adjoint();

        let mut sigma_sq = 0.0;
        for _ in 0..1000 {
            let norm = (vr.norm_squared() + vi.norm_squared()).sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            vr /= norm;
            vi /= norm;
            let (wr, wi) = self.apply_split(&vr, &vi);
            let next = wr.norm_squared() + wi.norm_squared();
            let (nr, ni) = adj.apply_split(&wr, &wi);
            vr = nr;
            vi = ni;
            let converged = (next - sigma_sq).abs() <= 1e-15 * next;
            sigma_sq = next;
            if converged {
                break;
            }
        }
        sigma_sq.sqrt()
    }
}

fn combine_rank(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) | (None, x) => x,
    }
}

/// Branch of the primitive cube root of unity `ω = exp(±2πi/3)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmegaBranch {
    #[default]
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl OmegaBranch {
    pub fn sign(self) -> f64 {
        match self {
            OmegaBranch::Plus => 1.0,
            OmegaBranch::Minus => -1.0,
        }
    }

    /// `ω^k`, taken from the exact residue `k mod 3`.
    pub fn omega_pow(self, k: usize) -> C64 {
        let half_root3 = 0.75f64.sqrt();
        match k % 3 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(-0.5, self.sign() * half_root3),
            _ => C64::new(-0.5, -self.sign() * half_root3),
        }
    }

    pub fn omega(self) -> C64 {
        self.omega_pow(1)
    }
}

impl fmt::Display for OmegaBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OmegaBranch::Plus => "+",
            OmegaBranch::Minus => "-",
        })
    }
}

impl std::str::FromStr for OmegaBranch {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "+" | "plus" => Ok(OmegaBranch::Plus),
            "-" | "minus" => Ok(OmegaBranch::Minus),
            other => Err(format!("omega branch must be '+' or '-', got '{other}'")),
        }
    }
}

/// Unit-modulus weights `w_n`, one per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct GradingWeights(Vec<C64>);

impl GradingWeights {
    pub fn new(weights: Vec<C64>) -> Result<Self> {
        for (index, w) in weights.iter().enumerate() {
            let modulus = w.norm();
            if !((modulus - 1.0).abs() <= UNIMODULAR_TOL) {
                return Err(Error::NonUnimodularWeight { index, modulus });
            }
        }
        Ok(GradingWeights(weights))
    }

    /// `w_n = 1`.
    pub fn identity(len: usize) -> Self {
        GradingWeights(vec![C64::new(1.0, 0.0); len])
    }

    /// `w_n = (-1)^n`.
    pub fn parity(len: usize) -> Self {
        GradingWeights(
            (0..len)
                .map(|k| C64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
                .collect(),
        )
    }

    /// `w_n = ω^n`.
    pub fn triparity(len: usize, branch: OmegaBranch) -> Self {
        GradingWeights((0..len).map(|k| branch.omega_pow(k)).collect())
    }

    /// `w_n = exp(-i E_n t)`, which grades into the propagator `exp(-iHt)`.
    pub fn evolution(energies: &[f64], t: f64) -> Self {
        GradingWeights(
            energies
                .iter()
                .map(|&e| C64::from_polar(1.0, -e * t))
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pointwise product; grading maps it to operator composition.
    pub fn product(&self, other: &GradingWeights) -> Result<GradingWeights> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(GradingWeights(
            self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect(),
        ))
    }
}

/// `Σ_{n<m} (re_n + i im_n) u_n u_nᵀ` over the first `m = re.len()` modes.
fn spectral_sum(spectrum: &Spectrum, re: &[f64], im: Option<&[f64]>) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
    let m = re.len();
    let u = spectrum.modes().columns(0, m);
    let ut = u.transpose();
    let weighted = |w: &[f64]| {
        let mut scaled = u.into_owned();
        for (mut col, &wk) in scaled.column_iter_mut().zip(w) {
            col *= wk;
        }
        scaled * &ut
    };
    let re_part = weighted(re);
    let im_part = im.filter(|w| w.iter().any(|&v| v != 0.0)).map(weighted);
    (re_part, im_part)
}

fn graded_kernel(spectrum: &Spectrum, weights: &[C64], rank: Option<usize>) -> OperatorKernel {
    let re: Vec<f64> = weights.iter().map(|w| w.re).collect();
    let im: Vec<f64> = weights.iter().map(|w| w.im).collect();
    let (re, im) = spectral_sum(spectrum, &re, Some(&im));
    OperatorKernel {
        grid: spectrum.grid().clone(),
        re,
        im,
        rank,
    }
}

fn check_weight_len(spectrum: &Spectrum, weights: &GradingWeights) -> Result<()> {
    if weights.len() == spectrum.mode_count() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: spectrum.mode_count(),
            found: weights.len(),
        })
    }
}

/// `A = Σ_n w_n u_n u_nᵀ` over the full basis.
pub fn build_graded(spectrum: &Spectrum, weights: &GradingWeights) -> Result<OperatorKernel> {
    spectrum.require_full()?;
    check_weight_len(spectrum, weights)?;
    Ok(graded_kernel(spectrum, weights.as_slice(), None))
}

/// The parity operator `Σ_n (-1)^n u_n u_nᵀ`.
pub fn build_parity(spectrum: &Spectrum) -> Result<OperatorKernel> {
    build_graded(spectrum, &GradingWeights::parity(spectrum.mode_count()))
}

/// The triparity operator `Σ_n ω^n u_n u_nᵀ`, which cubes to the identity.
pub fn build_triparity(spectrum: &Spectrum, branch: OmegaBranch) -> Result<OperatorKernel> {
    build_graded(spectrum, &GradingWeights::triparity(spectrum.mode_count(), branch))
}

/// Graded sum over only the lowest `m` modes. The result is flagged as
/// truncated and has rank `m`.
pub fn build_truncated(spectrum: &Spectrum, weights: &GradingWeights, m: usize) -> Result<OperatorKernel> {
    if m > spectrum.mode_count() || m > weights.len() {
        return Err(Error::IndexOutOfRange {
            index: m,
            len: spectrum.mode_count().min(weights.len()),
        });
    }
    let rank = (m < spectrum.grid().len()).then_some(m);
    Ok(graded_kernel(spectrum, &weights.as_slice()[..m], rank))
}

/// Spectral projector `Σ_{n<m} u_n u_nᵀ`.
pub fn spectral_projector(spectrum: &Spectrum, m: usize) -> Result<OperatorKernel> {
    build_truncated(spectrum, &GradingWeights::identity(spectrum.mode_count()), m)
}

/// Hamiltonian rebuilt from its eigenpairs, `Σ_n E_n u_n u_nᵀ`.
pub fn reconstruct_hamiltonian(spectrum: &Spectrum) -> Result<OperatorKernel> {
    spectrum.require_full()?;
    let (re, _) = spectral_sum(spectrum, spectrum.energies(), None);
    Ok(OperatorKernel::from_real(spectrum.grid().clone(), re))
}
