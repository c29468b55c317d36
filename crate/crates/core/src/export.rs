//! Plain-text outputs: spectra, kernel dumps and regression baselines.
//!
//! Every float is written with 17 significant digits (`{:.16e}`), which
//! round-trips an `f64` exactly. Complex entries are written as `a+bj`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::hamiltonian::Spectrum;
use crate::operator::OperatorKernel;
use crate::C64;

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_c64(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", fmt_f64(z.re), sign, fmt_f64(z.im.abs()))
}

/// Parses `a+bj`, `a-bj` or a plain real.
pub fn parse_c64(s: &str) -> Result<C64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a number: '{s}'"));
    let Some(body) = s.strip_suffix('j') else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // the split sign is the last '+'/'-' not following an exponent marker
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re = body[..split].parse::<f64>().map_err(|_| bad())?;
    let im = body[split..].parse::<f64>().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

/// `n,energy` rows; with `samples`, each row continues with `φ_n(x_i)` for every
/// grid point and the header lists the grid points.
pub fn write_spectrum_csv<W: Write>(mut w: W, s: &Spectrum, samples: bool) -> Result<()> {
    write!(w, "n,energy")?;
    if samples {
        for &x in s.grid().points() {
            write!(w, ",{}", fmt_f64(x))?;
        }
    }
    writeln!(w)?;
    for (k, &e) in s.energies().iter().enumerate() {
        write!(w, "{k},{}", fmt_f64(e))?;
        if samples {
            for v in s.eigenfunction(k)? {
                write!(w, ",{}", fmt_f64(v))?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

fn entry_text(k: &OperatorKernel, i: usize, j: usize) -> String {
    let z = k.kernel_value(i, j);
    if k.is_real() {
        fmt_f64(z.re)
    } else {
        fmt_c64(z)
    }
}

/// Kernel values `K(x_i, x_j) = A_ij / h`. The header row is `x` followed by
/// the grid points; each data row starts with its own `x_i`.
pub fn write_kernel_csv<W: Write>(mut w: W, k: &OperatorKernel) -> Result<()> {
    let points = k.grid().points();
    write!(w, "x")?;
    for &y in points {
        write!(w, ",{}", fmt_f64(y))?;
    }
    writeln!(w)?;
    for (i, &x) in points.iter().enumerate() {
        write!(w, "{}", fmt_f64(x))?;
        for j in 0..points.len() {
            write!(w, ",{}", entry_text(k, i, j))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Header-free baseline: one kernel row per line, space separated.
pub fn write_kernel_text<W: Write>(mut w: W, k: &OperatorKernel) -> Result<()> {
    let n = k.len();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| entry_text(k, i, j)).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

/// A kernel dump read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub points: Vec<f64>,
    /// Row-major kernel values.
    pub values: Vec<Vec<C64>>,
}

pub fn read_kernel_csv<R: BufRead>(r: R) -> Result<KernelTable> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty kernel file".into()))??;
    let mut cells = header.split(',');
    if cells.next() != Some("x") {
        return Err(Error::Parse("kernel header must start with 'x'".into()));
    }
    let points = cells
        .map(|c| c.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad grid point '{c}'"))))
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(points.len());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .skip(1)
            .map(parse_c64)
            .collect::<Result<Vec<_>>>()?;
        if row.len() != points.len() {
            return Err(Error::Parse(format!(
                "row has {} entries, expected {}",
                row.len(),
                points.len()
            )));
        }
        values.push(row);
    }
    if values.len() != points.len() {
        return Err(Error::Parse(format!(
            "{} rows for {} grid points",
            values.len(),
            points.len()
        )));
    }
    Ok(KernelTable { points, values })
}
