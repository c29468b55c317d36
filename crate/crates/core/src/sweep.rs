//! Grid-refinement study: energy convergence, observed order, and the
//! distance of truncated or full parity kernels from their limits.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::export::fmt_f64;
use crate::grid::Grid;
use crate::hamiltonian::{HamiltonianMatrix, Spectrum};
use crate::operator::{build_parity, build_truncated, GradingWeights};
use crate::potential::Potential;
use crate::verify::EVENNESS_TOL;

/// Number of low-lying levels tracked per grid.
pub const TRACKED_LEVELS: usize = 10;
/// Truncation rank used when none is configured.
pub const DEFAULT_TRUNCATION: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// `E_k = 2k + 1`.
    Analytic,
    /// Richardson extrapolation (second order) from the two finest grids.
    Richardson,
}

/// Measurements taken on one grid.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub spectrum: Spectrum,
    /// `‖A_P - J‖_max`; `None` unless the grid is symmetric and `V` even.
    pub reflection_residual: Option<f64>,
    pub truncation: usize,
    /// `‖A_P^(M) - A_P‖_max` for the truncated parity of rank `M`.
    pub truncation_residual: f64,
}

impl SweepPoint {
    pub fn n(&self) -> usize {
        self.spectrum.grid().len()
    }

    pub fn h(&self) -> f64 {
        self.spectrum.grid().spacing()
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub point: SweepPoint,
    /// `|E_k(h) - E_k^ref|` for the tracked levels.
    pub errors: Vec<f64>,
    /// `log(e(h_prev) / e(h)) / log(h_prev / h)` per level; `None` on the coarsest row.
    pub orders: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub reference: Reference,
    pub reference_energies: Vec<f64>,
    /// Coarsest grid first.
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn levels(&self) -> usize {
        self.reference_energies.len()
    }

    /// Observed orders of `E_0` between consecutive grids.
    pub fn ground_orders(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.orders.as_ref().map(|o| o[0]))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let levels = self.levels();
        let mut header = vec!["n".to_string(), "h".to_string()];
        header.extend((0..levels).map(|k| format!("E{k}")));
        header.extend((0..levels).map(|k| format!("err{k}")));
        header.extend((0..levels).map(|k| format!("order{k}")));
        header.extend(["reflection_residual", "trunc_m", "trunc_residual"].map(String::from));
        writeln!(w, "{}", header.join(","))?;

        for row in &self.rows {
            let p = &row.point;
            let mut cells = vec![p.n().to_string(), fmt_f64(p.h())];
            cells.extend(p.spectrum.energies()[..levels].iter().map(|&e| fmt_f64(e)));
            cells.extend(row.errors.iter().map(|&e| fmt_f64(e)));
            match &row.orders {
                Some(o) => cells.extend(o.iter().map(|&v| fmt_f64(v))),
                None => cells.extend(std::iter::repeat_n(String::new(), levels)),
            }
            cells.push(p.reflection_residual.map(fmt_f64).unwrap_or_default());
            cells.push(p.truncation.to_string());
            cells.push(fmt_f64(p.truncation_residual));
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn measure(v: &Potential, grid: Grid, truncation: Option<usize>) -> Result<SweepPoint> {
    let hm = HamiltonianMatrix::assemble(v, &grid);
    let spectrum = hm.solve().map_err(Error::at("solve"))?;
    let n = grid.len();
    let parity = build_parity(&spectrum)?;

    let reflection_residual = if grid.is_symmetric() && v.is_even(&grid, EVENNESS_TOL)? {
        Some(parity.max_abs_diff(&grid.reflection_action()?)?)
    } else {
        None
    };

    let m = truncation.unwrap_or(DEFAULT_TRUNCATION).min(n);
    let truncated = build_truncated(&spectrum, &GradingWeights::parity(n), m)?;
    let truncation_residual = truncated.max_abs_diff(&parity)?;

    Ok(SweepPoint {
        spectrum,
        reflection_residual,
        truncation: m,
        truncation_residual,
    })
}

/// Solves `V` on `[x_min, x_max]` for every interior point count in `ns`, up
/// to `jobs` grids at a time, and tabulates convergence from coarse to fine.
pub fn run_sweep(
    v: &Potential,
    x_min: f64,
    x_max: f64,
    ns: &[usize],
    truncation: Option<usize>,
    jobs: usize,
) -> Result<SweepTable> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(Error::InvalidSweep(format!(
            "at least 3 distinct grid sizes required, got {}",
            ns.len()
        )));
    }
    let grids = ns
        .iter()
        .map(|&n| Grid::new(x_min, x_max, n))
        .collect::<Result<Vec<_>>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidSweep(e.to_string()))?;
    let points: Vec<SweepPoint> = pool.install(|| {
        grids
            .into_par_iter()
            .map(|g| measure(v, g, truncation))
            .collect::<Result<Vec<_>>>()
    })?;

    let levels = TRACKED_LEVELS.min(ns[0]);
    let (reference, reference_energies) = if v.is_harmonic() {
        (
            Reference::Analytic,
            (0..levels).map(|k| 2.0 * k as f64 + 1.0).collect(),
        )
    } else {
        let fine = &points[points.len() - 1];
        let coarse = &points[points.len() - 2];
        let (hf2, hc2) = (fine.h().powi(2), coarse.h().powi(2));
        let extrapolated: Vec<f64> = (0..levels)
            .map(|k| {
                let (ef, ec) = (fine.spectrum.energies()[k], coarse.spectrum.energies()[k]);
                (ef * hc2 - ec * hf2) / (hc2 - hf2)
            })
            .collect();
        (Reference::Richardson, extrapolated)
    };

    let mut rows: Vec<SweepRow> = Vec::with_capacity(points.len());
    for point in points {
        let errors: Vec<f64> = (0..levels)
            .map(|k| (point.spectrum.energies()[k] - reference_energies[k]).abs())
            .collect();
        let orders = rows.last().map(|prev| {
            let ratio = (prev.point.h() / point.h()).ln();
            prev.errors
                .iter()
                .zip(&errors)
                .map(|(ep, e)| (ep / e).ln() / ratio)
                .collect()
        });
        rows.push(SweepRow {
            point,
            errors,
            orders,
        });
    }
    // coarsest first = largest h first
    Ok(SweepTable {
        reference,
        reference_energies,
        rows,
    })
}

/// Interior point counts giving the requested spacings on `[x_min, x_max]`.
pub fn sizes_for_spacings(x_min: f64, x_max: f64, spacings: &[f64]) -> Result<Vec<usize>> {
    spacings
        .iter()
        .map(|&h| {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidSweep(format!("spacing must be positive, got {h}")));
            }
            let cells = ((x_max - x_min) / h).round();
            if cells < 3.0 {
                return Err(Error::InvalidSweep(format!("spacing {h} too coarse for the domain")));
            }
            Ok(cells as usize - 1)
        })
        .collect()
}
