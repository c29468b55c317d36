//! Property checks for spectral operators and the suite that runs them.
//!
//! Residuals use the entrywise max norm unless stated otherwise. Algebraic
//! identities that hold exactly on the discrete space default to `1e-10`;
//! the comparison of parity with spatial reflection defaults to `1e-6`.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hamiltonian::{HamiltonianMatrix, Spectrum};
use crate::operator::{
    build_graded, build_truncated, reconstruct_hamiltonian, spectral_projector, GradingWeights,
    OmegaBranch, OperatorKernel,
};
use crate::potential::{Potential, PotentialSpec};
use crate::C64;

/// Eigenvalue gaps below this make the reflection comparison fragile.
pub const SMALL_GAP_WARNING: f64 = 1e-8;
/// Relative tolerance used to decide whether `V` is even on the grid.
pub const EVENNESS_TOL: f64 = 1e-12;
/// Deviation from unit norm accepted for an initial state.
const NORMALIZATION_TOL: f64 = 1e-10;
/// Highest mode index covered by the node-count audit.
pub const NODE_AUDIT_MAX: usize = 50;
/// Highest mode index covered by the Rayleigh-quotient audit.
pub const RAYLEIGH_AUDIT_MAX: usize = 20;

/// `‖A - A†‖_max`.
pub fn check_hermiticity(k: &OperatorKernel) -> f64 {
    k.max_abs_diff(&k.adjoint()).expect("same grid")
}

/// `‖A - A†‖₂`, the spectral norm of the anti-Hermitian part (times two).
pub fn skew_spectral_norm(k: &OperatorKernel) -> f64 {
    k.sub(&k.adjoint()).expect("same grid").spectral_norm()
}

/// `‖A T - T A‖_max / ‖T‖_max`.
pub fn check_commutator(k: &OperatorKernel, hm: &HamiltonianMatrix) -> Result<f64> {
    if k.grid() != hm.grid() {
        return Err(Error::GridMismatch);
    }
    let n = k.len();
    let (d, e) = (hm.diag(), hm.offdiag());
    let re = k.real_part();
    let im = k.imag_part();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            // (A T)_ij = A_{i,j-1} e_{j-1} + A_ij d_j + A_{i,j+1} e_j
            // (T A)_ij = e_{i-1} A_{i-1,j} + d_i A_ij + e_i A_{i+1,j}
            let entry = |m: &nalgebra::DMatrix<f64>| {
                let mut at = m[(i, j)] * d[j];
                if j > 0 {
                    at += m[(i, j - 1)] * e[j - 1];
                }
                if j + 1 < n {
                    at += m[(i, j + 1)] * e[j];
                }
                let mut ta = d[i] * m[(i, j)];
                if i > 0 {
                    ta += e[i - 1] * m[(i - 1, j)];
                }
                if i + 1 < n {
                    ta += e[i] * m[(i + 1, j)];
                }
                at - ta
            };
            let r = entry(re);
            let c = im.map_or(0.0, entry);
            worst = worst.max(r.hypot(c));
        }
    }
    Ok(worst / hm.max_abs())
}

/// `‖A² - I‖_max`, the discrete `∫ dz P(x, z) P(z, y) = δ(x - y)`.
pub fn check_involution(k: &OperatorKernel) -> Result<f64> {
    k.require_full_basis()?;
    Ok(k.compose(k)?.identity_defect())
}

/// `‖A³ - I‖_max`.
pub fn check_cube(k: &OperatorKernel) -> Result<f64> {
    k.require_full_basis()?;
    Ok(k.power(3).identity_defect())
}

/// `max_n ‖A u_n - w_n u_n‖₂`. Modes beyond a truncated operator's rank are
/// expected to be annihilated.
pub fn check_alternation(k: &OperatorKernel, s: &Spectrum, w: &GradingWeights) -> Result<f64> {
    if k.grid() != s.grid() {
        return Err(Error::GridMismatch);
    }
    if w.len() < s.mode_count() {
        return Err(Error::LengthMismatch {
            expected: s.mode_count(),
            found: w.len(),
        });
    }
    let rank = k.truncation().unwrap_or(usize::MAX);
    let mut worst = 0.0f64;
    for n in 0..s.mode_count() {
        let u = s.mode(n)?;
        let au = k.apply_real(u)?;
        let target = if n < rank { w.as_slice()[n] } else { C64::new(0.0, 0.0) };
        let dist = au
            .iter()
            .zip(u)
            .map(|(a, &x)| (a - target * x).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(dist);
    }
    Ok(worst)
}

/// Result of comparing parity against spatial reflection.
#[derive(Debug, Clone, PartialEq)]
pub enum ReflectionOutcome {
    NotApplicable(String),
    Checked { residual: f64, warnings: Vec<String> },
}

/// `‖A_P - J‖_max` when the grid is symmetric and `V` is even.
///
/// `energies` are only consulted for the small-gap warning.
pub fn check_reflection_reduction(
    p: &OperatorKernel,
    v: &Potential,
    grid: &Grid,
    energies: &[f64],
) -> Result<ReflectionOutcome> {
    if !grid.is_symmetric() {
        return Ok(ReflectionOutcome::NotApplicable(
            "grid is not symmetric about the origin".into(),
        ));
    }
    if !v.is_even(grid, EVENNESS_TOL)? {
        return Ok(ReflectionOutcome::NotApplicable("potential is not even".into()));
    }
    let j = grid.reflection_action()?;
    let residual = p.max_abs_diff(&j)?;
    let mut warnings = Vec::new();
    if let Some((k, gap)) = energies
        .windows(2)
        .enumerate()
        .map(|(k, w)| (k, w[1] - w[0]))
        .find(|&(_, gap)| gap < SMALL_GAP_WARNING)
    {
        warnings.push(format!(
            "eigenvalue gap {gap:e} at index {k} risks parity mixing in finite precision"
        ));
    }
    Ok(ReflectionOutcome::Checked { residual, warnings })
}

/// Evolves `psi0` spectrally, `ψ(t) = Σ_n e^{-iE_n t} (u_n·ψ₀) u_n`, and returns
/// `max_t |⟨ψ(t)|A|ψ(t)⟩ - ⟨ψ(0)|A|ψ(0)⟩|`.
pub fn check_conservation(
    k: &OperatorKernel,
    s: &Spectrum,
    psi0: &[C64],
    times: &[f64],
) -> Result<f64> {
    if k.grid() != s.grid() {
        return Err(Error::GridMismatch);
    }
    s.require_full()?;
    s.grid().check_len(psi0.len())?;
    let norm = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(Error::UnnormalizedState { norm });
    }

    let u = s.modes();
    let pr = DVector::from_iterator(psi0.len(), psi0.iter().map(|z| z.re));
    let pi = DVector::from_iterator(psi0.len(), psi0.iter().map(|z| z.im));
    let cr = u.tr_mul(&pr);
    let ci = u.tr_mul(&pi);

    let expectation = |t: f64| {
        let (mut ar, mut ai) = (cr.clone(), ci.clone());
        for (n, &e) in s.energies().iter().enumerate() {
            let phase = C64::from_polar(1.0, -e * t);
            let c = C64::new(cr[n], ci[n]) * phase;
            ar[n] = c.re;
            ai[n] = c.im;
        }
        let psi_r = u * ar;
        let psi_i = u * ai;
        let (kr, ki) = k.apply_split(&psi_r, &psi_i);
        // ⟨ψ|Aψ⟩ = Σ conj(ψ) (Aψ)
        C64::new(
            psi_r.dot(&kr) + psi_i.dot(&ki),
            psi_r.dot(&ki) - psi_i.dot(&kr),
        )
    };

    let start = expectation(0.0);
    Ok(times
        .iter()
        .map(|&t| (expectation(t) - start).norm())
        .fold(0.0, f64::max))
}

/// `(u_0 + u_1) / √2`.
pub fn superposition_state(s: &Spectrum) -> Result<Vec<C64>> {
    let (u0, u1) = (s.mode(0)?, s.mode(1)?);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Ok(u0.iter().zip(u1).map(|(a, b)| C64::new(r * (a + b), 0.0)).collect())
}

/// Sampled Gaussian `exp(-(x - center)² / (2 width²))`, unit Euclidean norm.
pub fn gaussian_state(grid: &Grid, center: f64, width: f64) -> Vec<C64> {
    let raw: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| (-(x - center).powi(2) / (2.0 * width * width)).exp())
        .collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.iter().map(|v| C64::new(v / norm, 0.0)).collect()
}

/// `times` sampled uniformly on `[0, t_max]`.
pub fn uniform_times(t_max: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..samples)
            .map(|k| t_max * k as f64 / (samples - 1) as f64)
            .collect(),
    }
}

/// Named checks, in report order, with their default tolerances.
pub const DEFAULT_TOLERANCES: [(&str, f64); 16] = [
    ("alternation", 1e-10),
    ("commutator", 1e-10),
    ("completeness", 1e-10),
    ("conservation", 1e-10),
    ("conservation_gaussian", 1e-10),
    ("hermiticity", 1e-11),
    ("involution", 1e-10),
    ("node_count", 0.0),
    ("orthonormality", 1e-10),
    ("rayleigh", 1e-9),
    ("reconstruction", 1e-8),
    ("reflection_reduction", 1e-6),
    ("triparity_alternation", 1e-10),
    ("triparity_commutator", 1e-10),
    ("triparity_cube", 1e-10),
    ("triparity_skew_norm", 1e-10),
];

/// Per-check tolerances keyed by check name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances(
            DEFAULT_TOLERANCES
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
        )
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    /// Overrides one tolerance; the name must be a known check and the value
    /// a positive finite real.
    pub fn set(&mut self, name: &str, value: f64) -> std::result::Result<(), String> {
        if !self.0.contains_key(name) {
            let known: Vec<&str> = DEFAULT_TOLERANCES.iter().map(|(k, _)| *k).collect();
            return Err(format!(
                "unknown check '{name}' (known: {})",
                known.join(", ")
            ));
        }
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("tolerance for '{name}' must be a positive real, got {value}"));
        }
        self.0.insert(name.to_string(), value);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl TryFrom<BTreeMap<String, f64>> for Tolerances {
    type Error = String;

    /// Partial maps override the defaults.
    fn try_from(map: BTreeMap<String, f64>) -> std::result::Result<Self, String> {
        let mut tol = Tolerances::default();
        for (k, v) in map {
            tol.set(&k, v)?;
        }
        Ok(tol)
    }
}

impl From<Tolerances> for BTreeMap<String, f64> {
    fn from(t: Tolerances) -> Self {
        t.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub omega_branch: OmegaBranch,
    /// Sum only the lowest `M` modes when building parity and triparity.
    pub truncation: Option<usize>,
    pub tolerances: Tolerances,
    /// Sample times for the conservation checks.
    pub times: Vec<f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            omega_branch: OmegaBranch::Plus,
            truncation: None,
            tolerances: Tolerances::default(),
            times: uniform_times(10.0, 101),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Checked,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Wall-clock time; not reproducible between runs.
    pub seconds: f64,
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub h: f64,
}

impl From<&Grid> for GridDescriptor {
    fn from(g: &Grid) -> Self {
        GridDescriptor {
            x_min: g.x_min(),
            x_max: g.x_max(),
            n: g.len(),
            h: g.spacing(),
        }
    }
}

/// Outcome of a verification suite. Serializes as
/// `{potential, grid: {x_min, x_max, n, h}, checks: [...], pass}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub potential: PotentialSpec,
    pub grid: GridDescriptor,
    pub checks: Vec<CheckEntry>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with every `seconds` field zeroed; identical inputs give
    /// byte-identical output.
    pub fn to_stable_json(&self) -> String {
        let mut copy = self.clone();
        for c in &mut copy.checks {
            c.seconds = 0.0;
        }
        copy.to_json()
    }
}

struct ReportBuilder<'a> {
    tolerances: &'a Tolerances,
    checks: Vec<CheckEntry>,
}

impl ReportBuilder<'_> {
    fn timed(&mut self, name: &'static str, f: impl FnOnce() -> Result<f64>) -> Result<()> {
        self.timed_with_notes(name, || f().map(|r| (r, Vec::new())))
    }

    fn timed_with_notes(
        &mut self,
        name: &'static str,
        f: impl FnOnce() -> Result<(f64, Vec<String>)>,
    ) -> Result<()> {
        let start = Instant::now();
        let (residual, notes) = f().map_err(Error::at(name))?;
        let tolerance = self.tolerances.get(name);
        self.checks.push(CheckEntry {
            name: name.to_string(),
            residual,
            tolerance,
            pass: residual.is_finite() && residual <= tolerance,
            seconds: start.elapsed().as_secs_f64(),
            status: CheckStatus::Checked,
            notes,
        });
        Ok(())
    }

    fn not_applicable(&mut self, name: &'static str, reason: String) {
        self.checks.push(CheckEntry {
            name: name.to_string(),
            residual: 0.0,
            tolerance: self.tolerances.get(name),
            pass: true,
            seconds: 0.0,
            status: CheckStatus::NotApplicable,
            notes: vec![reason],
        });
    }
}

/// Assembles and solves `H = p² + V` on `grid`, then runs every check.
pub fn run_suite(v: &Potential, grid: &Grid, options: &SuiteOptions) -> Result<VerificationReport> {
    let hm = HamiltonianMatrix::assemble(v, grid);
    let s = hm.solve().map_err(Error::at("solve"))?;
    verify_spectrum(v, &hm, &s, options)
}

/// Runs every check against a given eigensystem of `hm`.
///
/// Split out from [`run_suite`] so that a deliberately corrupted spectrum can
/// be fed through the same pipeline.
pub fn verify_spectrum(
    v: &Potential,
    hm: &HamiltonianMatrix,
    s: &Spectrum,
    options: &SuiteOptions,
) -> Result<VerificationReport> {
    let grid = hm.grid();
    if s.grid() != grid {
        return Err(Error::GridMismatch);
    }
    s.require_full().map_err(Error::at("spectrum"))?;
    let n = grid.len();
    let m = options.truncation.unwrap_or(n);
    if m == 0 || m > n {
        return Err(Error::Stage {
            stage: "truncation",
            source: Box::new(Error::IndexOutOfRange { index: m, len: n }),
        });
    }
    let truncated = m < n;

    let parity_w = GradingWeights::parity(n);
    let tri_w = GradingWeights::triparity(n, options.omega_branch);
    let build = |w: &GradingWeights| {
        if truncated {
            build_truncated(s, w, m)
        } else {
            build_graded(s, w)
        }
    };
    let p = build(&parity_w).map_err(Error::at("build_parity"))?;
    let q = build(&tri_w).map_err(Error::at("build_triparity"))?;
    let a_h = reconstruct_hamiltonian(s).map_err(Error::at("reconstruct_hamiltonian"))?;
    let projector = if truncated {
        Some(spectral_projector(s, m).map_err(Error::at("projector"))?)
    } else {
        None
    };
    let truncation_note = || vec![format!("truncated to {m} of {n} modes")];

    let mut report = ReportBuilder {
        tolerances: &options.tolerances,
        checks: Vec::new(),
    };

    report.timed("alternation", || check_alternation(&p, s, &parity_w))?;
    report.timed("commutator", || check_commutator(&p, hm))?;
    report.timed("completeness", || s.check_completeness())?;
    report.timed("conservation", || {
        check_conservation(&p, s, &superposition_state(s)?, &options.times)
    })?;
    report.timed("conservation_gaussian", || {
        check_conservation(&p, s, &gaussian_state(grid, 1.0, 1.0), &options.times)
    })?;
    report.timed("hermiticity", || Ok(check_hermiticity(&p)))?;
    report.timed_with_notes("involution", || match &projector {
        None => Ok((check_involution(&p)?, Vec::new())),
        Some(proj) => Ok((p.compose(&p)?.max_abs_diff(proj)?, truncation_note())),
    })?;
    report.timed("node_count", || {
        let mut worst = 0usize;
        for k in 0..=NODE_AUDIT_MAX.min(n - 1) {
            worst = worst.max(s.count_nodes(k)?.abs_diff(k));
        }
        Ok(worst as f64)
    })?;
    report.timed("orthonormality", || s.check_orthonormality(n))?;
    report.timed("rayleigh", || {
        let mut worst = 0.0f64;
        for k in 0..=RAYLEIGH_AUDIT_MAX.min(n - 1) {
            let e = s.energies()[k];
            worst = worst.max(s.rayleigh_defect(hm, k)? / (1.0 + e.abs()));
        }
        Ok(worst)
    })?;
    report.timed("reconstruction", || {
        let t = OperatorKernel::from_real(grid.clone(), hm.to_dense());
        Ok(a_h.max_abs_diff(&t)? / hm.max_abs())
    })?;

    let start = Instant::now();
    match check_reflection_reduction(&p, v, grid, s.energies())
        .map_err(Error::at("reflection_reduction"))?
    {
        ReflectionOutcome::NotApplicable(reason) => {
            report.not_applicable("reflection_reduction", reason)
        }
        ReflectionOutcome::Checked {
            residual,
            mut warnings,
        } => {
            if truncated {
                warnings.extend(truncation_note());
            }
            let tolerance = options.tolerances.get("reflection_reduction");
            report.checks.push(CheckEntry {
                name: "reflection_reduction".into(),
                residual,
                tolerance,
                pass: residual <= tolerance,
                seconds: start.elapsed().as_secs_f64(),
                status: CheckStatus::Checked,
                notes: warnings,
            });
        }
    }

    report.timed("triparity_alternation", || check_alternation(&q, s, &tri_w))?;
    report.timed("triparity_commutator", || check_commutator(&q, hm))?;
    report.timed_with_notes("triparity_cube", || match &projector {
        None => Ok((check_cube(&q)?, Vec::new())),
        Some(proj) => Ok((q.power(3).max_abs_diff(proj)?, truncation_note())),
    })?;
    report.timed("triparity_skew_norm", || {
        Ok((skew_spectral_norm(&q) - 3f64.sqrt()).abs())
    })?;

    let mut checks = report.checks;
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        potential: v.spec(),
        grid: grid.into(),
        checks,
        pass,
    })
}
