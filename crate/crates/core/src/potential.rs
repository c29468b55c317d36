//! Real potentials `V(x)` for `H = p² + V(x)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Built-in potential families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedPotential {
    /// `x²`
    Harmonic,
    /// `x⁴`
    Quartic,
    /// `x⁴ + x³`
    QuarticCubic,
}

impl NamedPotential {
    pub const ALL: [NamedPotential; 3] = [Self::Harmonic, Self::Quartic, Self::QuarticCubic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Harmonic => "harmonic",
            Self::Quartic => "quartic",
            Self::QuarticCubic => "quartic_cubic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Monomial coefficients, lowest order first.
    pub fn coefficients(self) -> Vec<f64> {
        match self {
            Self::Harmonic => vec![0.0, 0.0, 1.0],
            Self::Quartic => vec![0.0, 0.0, 0.0, 0.0, 1.0],
            Self::QuarticCubic => vec![0.0, 0.0, 0.0, 1.0, 1.0],
        }
    }
}

/// Serialized form: `{"named": "quartic_cubic"}` or `{"poly": [c0, c1, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Named(NamedPotential),
    Poly(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialSpec", into = "PotentialSpec")]
pub enum Potential {
    Named(NamedPotential),
    /// `V(x) = Σ c_k x^k`; trailing zero coefficients are trimmed on construction.
    Polynomial(Vec<f64>),
}

impl Potential {
    pub fn named(p: NamedPotential) -> Self {
        Potential::Named(p)
    }

    pub fn harmonic() -> Self {
        Potential::Named(NamedPotential::Harmonic)
    }

    pub fn quartic() -> Self {
        Potential::Named(NamedPotential::Quartic)
    }

    pub fn quartic_cubic() -> Self {
        Potential::Named(NamedPotential::QuarticCubic)
    }

    /// The flat potential: a particle confined only by the Dirichlet walls.
    ///
    /// Not reachable through [`Potential::polynomial`], which only admits
    /// potentials that confine on the whole line.
    pub fn zero() -> Self {
        Potential::Polynomial(Vec::new())
    }

    /// A confining polynomial: real finite coefficients, even degree ≥ 2 with
    /// positive leading coefficient.
    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        let mut c = coefficients;
        if let Some(bad) = c.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "coefficient {bad} is not finite"
            )));
        }
        while c.last() == Some(&0.0) {
            c.pop();
        }
        let degree = match c.len() {
            0 | 1 => {
                return Err(Error::InvalidPotential(
                    "polynomial degree must be at least 1".into(),
                ))
            }
            len => len - 1,
        };
        let lead = c[degree];
        if degree % 2 == 1 {
            return Err(Error::InvalidPotential(format!(
                "odd degree {degree} is not confining on the real line"
            )));
        }
        if lead <= 0.0 {
            return Err(Error::InvalidPotential(format!(
                "leading coefficient {lead} of even degree {degree} must be positive"
            )));
        }
        Ok(Potential::Polynomial(c))
    }

    pub fn coefficients(&self) -> Vec<f64> {
        match self {
            Potential::Named(p) => p.coefficients(),
            Potential::Polynomial(c) => c.clone(),
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            Potential::Named(NamedPotential::Harmonic) => x * x,
            Potential::Named(NamedPotential::Quartic) => {
                let x2 = x * x;
                x2 * x2
            }
            Potential::Named(NamedPotential::QuarticCubic) => {
                let x2 = x * x;
                x2 * x2 + x2 * x
            }
            Potential::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck),
        }
    }

    /// Numerical evenness on a symmetric grid:
    /// `max |V(x_i) - V(-x_i)| <= tol (1 + max |V(x_i)|)`.
    pub fn is_even(&self, grid: &Grid, tol: f64) -> Result<bool> {
        grid.require_symmetric()?;
        let (mut asym, mut scale) = (0.0f64, 0.0f64);
        for &x in grid.points() {
            let v = self.evaluate(x);
            asym = asym.max((v - self.evaluate(-x)).abs());
            scale = scale.max(v.abs());
        }
        Ok(asym <= tol * (1.0 + scale))
    }

    /// True when this is `x²`, whose spectrum `2n + 1` is known in closed form.
    pub fn is_harmonic(&self) -> bool {
        self.coefficients() == [0.0, 0.0, 1.0]
    }

    pub fn spec(&self) -> PotentialSpec {
        self.clone().into()
    }
}

impl TryFrom<PotentialSpec> for Potential {
    type Error = Error;

    fn try_from(spec: PotentialSpec) -> Result<Self> {
        match spec {
            PotentialSpec::Named(p) => Ok(Potential::Named(p)),
            PotentialSpec::Poly(c) => Potential::polynomial(c),
        }
    }
}

impl From<Potential> for PotentialSpec {
    fn from(p: Potential) -> Self {
        match p {
            Potential::Named(p) => PotentialSpec::Named(p),
            Potential::Polynomial(c) => PotentialSpec::Poly(c),
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Named(p) => f.write_str(p.name()),
            Potential::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "poly[{}]", parts.join(","))
            }
        }
    }
}
