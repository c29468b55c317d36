//! Truncated uniform grid with homogeneous Dirichlet boundaries.
//!
//! Only the `n` interior points carry samples; the endpoints are pinned to
//! zero. The discrete inner product uses the uniform weight `h` at every
//! interior point, so `∫ f*(x) g(x) dx` becomes `h · Σ conj(f_i) g_i`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::OperatorKernel;
use crate::C64;

const SYMMETRY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
    h: f64,
    #[serde(skip)]
    points: Vec<f64>,
    #[serde(skip)]
    symmetric: bool,
}

impl Grid {
    /// Builds the interior grid `x_i = x_min + (i + 1) h`, `h = (x_max - x_min) / (n + 1)`.
    ///
    /// A domain with `|x_min + x_max| <= 1e-14 (x_max - x_min)` is flagged
    /// symmetric; its points are then mirrored so that `x_i = -x_{n-1-i}` holds
    /// bit for bit.
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "bounds must be finite, got [{x_min}, {x_max}]"
            )));
        }
        if x_min >= x_max {
            return Err(Error::InvalidDomain(format!(
                "x_min must be below x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidDomain(format!(
                "at least 2 interior points required, got {n}"
            )));
        }

        let width = x_max - x_min;
        let h = width / (n + 1) as f64;
        let symmetric = (x_min + x_max).abs() <= SYMMETRY_TOL * width;

        let points = if symmetric {
            let mut points = vec![0.0; n];
            for i in 0..n / 2 {
                let x = x_min + (i + 1) as f64 * h;
                points[i] = x;
                points[n - 1 - i] = -x;
            }
            points
        } else {
            (0..n).map(|i| x_min + (i + 1) as f64 * h).collect()
        };

        Ok(Grid {
            x_min,
            x_max,
            n,
            h,
            points,
            symmetric,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Number of interior points.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Uniform spacing, also the quadrature weight of every interior point.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `h · Σ conj(f_i) g_i`, the discrete `∫ dx f*(x) g(x)`.
    pub fn inner_product(&self, f: &[C64], g: &[C64]) -> Result<C64> {
        self.check_len(f.len())?;
        self.check_len(g.len())?;
        let sum: C64 = f.iter().zip(g).map(|(a, b)| a.conj() * b).sum();
        Ok(sum * self.h)
    }

    /// Real-valued specialization of [`Grid::inner_product`].
    pub fn inner_product_real(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.check_len(f.len())?;
        self.check_len(g.len())?;
        Ok(self.h * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>())
    }

    /// The anti-identity permutation `J`, the discrete action of `δ(x + y)`.
    pub fn reflection_action(&self) -> Result<OperatorKernel> {
        self.require_symmetric()?;
        let n = self.n;
        let j = DMatrix::from_fn(n, n, |r, c| if r + c == n - 1 { 1.0 } else { 0.0 });
        Ok(OperatorKernel::from_real(self.clone(), j))
    }

    pub(crate) fn require_symmetric(&self) -> Result<()> {
        if self.symmetric {
            Ok(())
        } else {
            Err(Error::AsymmetricGrid {
                x_min: self.x_min,
                x_max: self.x_max,
            })
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.n,
                found: len,
            })
        }
    }
}
