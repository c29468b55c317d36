use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hidden_parity::export::{write_kernel_csv, write_kernel_text, write_spectrum_csv};
use hidden_parity::sweep::{run_sweep, sizes_for_spacings, Reference};
use hidden_parity::verify::{verify_spectrum, CheckStatus};
use hidden_parity::{
    build_parity, build_triparity, build_truncated, GradingWeights, HamiltonianMatrix,
    OperatorKernel, Spectrum,
};

use crate::config::{CommonArgs, Settings};
use crate::CliError;

const PRINTED_LEVELS: usize = 10;
const PERTURBATION: f64 = 1e-3;
const PERTURBATION_SEED: u64 = 0x0ddba11;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn solve_spectrum(settings: &Settings) -> Result<(HamiltonianMatrix, Spectrum), CliError> {
    let hm = HamiltonianMatrix::assemble(&settings.potential, &settings.grid);
    let s = hm.solve()?;
    Ok((hm, s))
}

pub fn solve(args: &CommonArgs, samples: bool) -> Result<(), CliError> {
    let settings = args.resolve()?;
    let (_, s) = solve_spectrum(&settings)?;

    let mut out = create(&settings.out, "spectrum.csv")?;
    write_spectrum_csv(&mut out, &s, samples)?;
    out.flush()?;

    let g = &settings.grid;
    println!(
        "{} on [{}, {}], n = {}, h = {}",
        settings.potential,
        g.x_min(),
        g.x_max(),
        g.len(),
        g.spacing()
    );
    for (k, e) in s.energies().iter().take(PRINTED_LEVELS).enumerate() {
        println!("E{k} = {e:.12}");
    }
    Ok(())
}

pub fn verify(args: &CommonArgs, perturb_mode: Option<usize>) -> Result<(), CliError> {
    let settings = args.resolve()?;
    let (hm, mut s) = solve_spectrum(&settings)?;
    if let Some(k) = perturb_mode {
        s = s.with_perturbed_mode(k, PERTURBATION, PERTURBATION_SEED)?;
        eprintln!("negative control: mode {k} perturbed by {PERTURBATION:e} noise");
    }
    let report = verify_spectrum(&settings.potential, &hm, &s, &settings.suite)?;

    let mut out = create(&settings.out, "report.json")?;
    writeln!(out, "{}", report.to_json())?;
    out.flush()?;

    println!("{:<24} {:>12} {:>12}  result", "check", "residual", "tolerance");
    for c in &report.checks {
        let verdict = match (c.status, c.pass) {
            (CheckStatus::NotApplicable, _) => "n/a",
            (_, true) => "pass",
            (_, false) => "FAIL",
        };
        println!(
            "{:<24} {:>12.3e} {:>12.3e}  {verdict}",
            c.name, c.residual, c.tolerance
        );
        for note in &c.notes {
            println!("    {note}");
        }
    }
    println!("overall: {}", if report.pass { "pass" } else { "FAIL" });

    if report.pass {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

pub fn sweep(
    args: &CommonArgs,
    sweep_n: Option<Vec<usize>>,
    sweep_h: Option<Vec<f64>>,
) -> Result<(), CliError> {
    let settings = args.resolve()?;
    let g = &settings.grid;
    let ns = match (sweep_n, sweep_h) {
        (Some(ns), _) => ns,
        (None, Some(hs)) => sizes_for_spacings(g.x_min(), g.x_max(), &hs)?,
        (None, None) => match (&settings.sweep_n, &settings.sweep_h) {
            (Some(ns), _) => ns.clone(),
            (None, Some(hs)) => sizes_for_spacings(g.x_min(), g.x_max(), hs)?,
            (None, None) => {
                return Err(CliError::Config(
                    "sweep needs --sweep-n, --sweep-h or a sweep section in the config".into(),
                ))
            }
        },
    };

    let table = run_sweep(
        &settings.potential,
        g.x_min(),
        g.x_max(),
        &ns,
        settings.suite.truncation,
        settings.jobs,
    )?;

    for row in &table.rows {
        let mut out = create(&settings.out, &format!("spectrum_n{}.csv", row.point.n()))?;
        write_spectrum_csv(&mut out, &row.point.spectrum, false)?;
        out.flush()?;
    }
    let mut out = create(&settings.out, "sweep.csv")?;
    table.write_csv(&mut out)?;
    out.flush()?;

    let reference = match table.reference {
        Reference::Analytic => "analytic 2k+1",
        Reference::Richardson => "Richardson extrapolation",
    };
    println!("reference: {reference}");
    println!("{:>6} {:>10} {:>14} {:>8} {:>12}", "n", "h", "err(E0)", "order", "|P-J|");
    for row in &table.rows {
        let order = row
            .orders
            .as_ref()
            .map(|o| format!("{:.3}", o[0]))
            .unwrap_or_default();
        let refl = row
            .point
            .reflection_residual
            .map(|r| format!("{r:.3e}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:>6} {:>10.5} {:>14.6e} {:>8} {:>12}",
            row.point.n(),
            row.point.h(),
            row.errors[0],
            order,
            refl
        );
    }
    Ok(())
}

fn kernel(s: &Spectrum, weights: GradingWeights, truncation: Option<usize>) -> Result<OperatorKernel, CliError> {
    Ok(match truncation {
        Some(m) => build_truncated(s, &weights, m)?,
        None => hidden_parity::build_graded(s, &weights)?,
    })
}

pub fn export_kernel(args: &CommonArgs, with_q: bool, text: bool) -> Result<(), CliError> {
    let settings = args.resolve()?;
    let (_, s) = solve_spectrum(&settings)?;
    let n = settings.grid.len();
    let m = settings.suite.truncation;

    let p = match m {
        None => build_parity(&s)?,
        Some(_) => kernel(&s, GradingWeights::parity(n), m)?,
    };
    write_pair(&settings.out, "kernel_P", &p, text)?;

    if with_q {
        let branch = settings.suite.omega_branch;
        let q = match m {
            None => build_triparity(&s, branch)?,
            Some(_) => kernel(&s, GradingWeights::triparity(n, branch), m)?,
        };
        write_pair(&settings.out, "kernel_Q", &q, text)?;
    }

    println!(
        "wrote kernel_P.csv{} to {} ({} modes)",
        if with_q { " and kernel_Q.csv" } else { "" },
        settings.out.display(),
        m.unwrap_or(n)
    );
    Ok(())
}

fn write_pair(dir: &Path, stem: &str, k: &OperatorKernel, text: bool) -> Result<(), CliError> {
    let mut out = create(dir, &format!("{stem}.csv"))?;
    write_kernel_csv(&mut out, k)?;
    out.flush()?;
    if text {
        let mut out = create(dir, &format!("{stem}.txt"))?;
        write_kernel_text(&mut out, k)?;
        out.flush()?;
    }
    Ok(())
}
