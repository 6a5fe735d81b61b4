//! Job orchestration behind the `mopr` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rayon::prelude::*;

use mopr::io::{self, Format};
use mopr::nearest_neighbor::FreeParameter;
use mopr::numerics::{format_rational, table_decimal};
use mopr::{
    bessel_stepline, forward, marginal_mu1, moment_table, nn_from_marginals_general_r,
    nn_from_marginals_r2, nn_grid_oracle, nn_grid_oracle_r2, random_pair, random_system,
    sqrt_to_decimal, stepline_from_nn, Error, MarginalRecurrence, Rational, ShiftFamily,
    SweepCheck,
};
use num_traits::{Signed, Zero};

/// Environment variable for the default number of significant digits.
pub const DIGITS_ENV: &str = "MOPR_DIGITS";

#[derive(Debug, Clone, PartialEq)]
pub enum FreeSpec {
    Seed(Rational),
    Moments { m0: Rational, m1: Rational },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    /// Step-line table to nearest-neighbor grid and both marginals.
    Forward {
        stepline: PathBuf,
        free: Option<FreeSpec>,
        max_len: usize,
        out_dir: PathBuf,
    },
    /// Marginal tables to nearest-neighbor grid (and step-line for two measures).
    Inverse {
        marginals: Vec<PathBuf>,
        max_len: usize,
        out_dir: PathBuf,
    },
    /// Both pipelines on a generated pair, reporting the largest discrepancy.
    Roundtrip { seed: u64, max_len: usize },
    /// Marginal coefficients of the Bessel pair as a table.
    Bessel {
        alpha: Rational,
        nu: Rational,
        rows: usize,
        out: Option<PathBuf>,
    },
    /// Oracle comparison over generated systems.
    Verify {
        seeds: u64,
        first_seed: u64,
        r: usize,
        max_len: usize,
    },
    /// Recurrence table of a discrete measure file.
    Marginal {
        measure: PathBuf,
        id: usize,
        len: usize,
        out: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    pub digits: u32,
    pub format: Format,
}

impl JobConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.digits == 0 {
            bail!("precision must be at least 1 digit");
        }
        match &self.command {
            Command::Forward { free: None, .. } => {
                bail!("forward needs the free parameter: give --c00, or --m0 with --m1")
            }
            Command::Inverse { marginals, .. } if marginals.len() < 2 => {
                bail!("inverse needs at least two --marginal files")
            }
            Command::Verify { r, .. } if *r < 2 => bail!("verify needs r >= 2"),
            _ => Ok(()),
        }
    }
}

/// Exit status for a failed job: 2 parse, 3 normality or singularity,
/// 4 range, 1 anything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. }) => 2,
        Some(
            Error::Normality { .. }
            | Error::GridNormality { .. }
            | Error::SingularSweep { .. }
            | Error::Init { .. }
            | Error::SeedMismatch { .. }
            | Error::NonNormalIndex(_),
        ) => 3,
        Some(Error::Range { .. }) => 4,
        _ => 1,
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    Ok(io::read_file(path)?)
}

fn write_out(dir: &Path, stem: &str, ext: &str, text: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{stem}.{ext}"));
    io::write_file(&path, text)?;
    Ok(path)
}

/// Runs one job, writing human-readable progress to `out`.
pub fn run(config: &JobConfig, out: &mut dyn Write) -> anyhow::Result<()> {
    config.validate()?;
    let fmt = config.format;
    match &config.command {
        Command::Forward {
            stepline,
            free,
            max_len,
            out_dir,
        } => {
            let level0 = io::stepline_from_str(&read(stepline)?, Format::from_path(stepline))?;
            let free = match free.as_ref().expect("validated") {
                FreeSpec::Seed(c) => FreeParameter::raw_seed(c.clone()),
                FreeSpec::Moments { m0, m1 } => FreeParameter::exact_mu2(m0.clone(), m1.clone()),
            };
            let result = forward(&level0, &free, *max_len)?;
            let ext = fmt.extension();
            for path in [
                write_out(out_dir, "nn_grid", ext, &io::nn_grid_to_string(&result.grid, fmt)?)?,
                write_out(out_dir, "marginal_mu1", ext, &io::marginal_to_string(&result.mu1, config.digits, fmt)?)?,
                write_out(out_dir, "marginal_mu2", ext, &io::marginal_to_string(&result.mu2, config.digits, fmt)?)?,
            ] {
                writeln!(out, "wrote {}", path.display())?;
            }
        }
        Command::Inverse {
            marginals,
            max_len,
            out_dir,
        } => {
            let margs: Vec<MarginalRecurrence> = marginals
                .iter()
                .enumerate()
                .map(|(i, p)| Ok(io::marginal_from_str(&read(p)?, i + 1, Format::from_path(p))?))
                .collect::<anyhow::Result<_>>()?;
            let ext = fmt.extension();
            if margs.len() == 2 {
                let grid = nn_from_marginals_r2(&margs[0], &margs[1], *max_len)?;
                let level0 = stepline_from_nn(&grid, *max_len)?;
                for path in [
                    write_out(out_dir, "nn_grid", ext, &io::nn_grid_to_string(&grid, fmt)?)?,
                    write_out(out_dir, "stepline", ext, &io::stepline_to_string(&level0, fmt)?)?,
                ] {
                    writeln!(out, "wrote {}", path.display())?;
                }
            } else {
                let grid = nn_from_marginals_general_r(&margs, *max_len, SweepCheck::CrossCheck)?;
                let path = write_out(out_dir, "nn_grid_r", "json", &io::nn_grid_r_to_string(&grid)?)?;
                writeln!(out, "wrote {}", path.display())?;
            }
        }
        Command::Roundtrip { seed, max_len } => {
            let worst = roundtrip(*seed, *max_len)?;
            writeln!(out, "seed {seed}, N = {max_len}")?;
            writeln!(out, "max discrepancy: {}", format_rational(&worst))?;
            if !worst.is_zero() {
                bail!("round trip is not exact");
            }
        }
        Command::Bessel {
            alpha,
            nu,
            rows,
            out: path,
        } => {
            let text = bessel_table(alpha, nu, *rows, config.digits, fmt, path.is_none())?;
            match path {
                Some(p) => {
                    io::write_file(p, &text)?;
                    writeln!(out, "wrote {}", p.display())?;
                }
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Verify {
            seeds,
            first_seed,
            r,
            max_len,
        } => {
            let reports: Vec<(u64, Result<(), String>)> = (*first_seed..first_seed + seeds)
                .into_par_iter()
                .map(|s| (s, verify_seed(s, *r, *max_len).map_err(|e| e.to_string())))
                .collect();
            let failed = reports.iter().filter(|(_, r)| r.is_err()).count();
            for (s, res) in &reports {
                match res {
                    Ok(()) => writeln!(out, "seed {s}: PASS")?,
                    Err(why) => writeln!(out, "seed {s}: FAIL {why}")?,
                }
            }
            writeln!(out, "verify: {} passed, {failed} failed (r = {r}, |n| <= {max_len})", reports.len() - failed)?;
            if failed > 0 {
                bail!("{failed} seed(s) failed verification");
            }
        }
        Command::Marginal {
            measure,
            id,
            len,
            out: path,
        } => {
            let mu = io::measure_from_str(&read(measure)?, Format::from_path(measure))?;
            let rec = mu.recurrence(*len, *id)?;
            let text = io::marginal_to_string(&rec, config.digits, Format::from_path(path))?;
            io::write_file(path, &text)?;
            writeln!(out, "wrote {}", path.display())?;
        }
    }
    Ok(())
}

fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

fn max_diff<'a>(pairs: impl Iterator<Item = (&'a Rational, &'a Rational)>) -> Rational {
    pairs
        .map(|(a, b)| abs_diff(a, b))
        .max()
        .unwrap_or_default()
}

/// Largest absolute difference over both round trips at depth `max_len`.
pub fn roundtrip(seed: u64, max_len: usize) -> anyhow::Result<Rational> {
    let len = 2 * max_len + 1;
    let (mu1, mu2) = random_pair(seed, len + 1, 6)?;
    let m1 = mu1.recurrence(len + 1, 1)?;
    let m2 = mu2.recurrence(len + 1, 2)?;
    let grid = nn_from_marginals_r2(&m1, &m2, len)?;
    let level0 = stepline_from_nn(&grid, len)?;
    let moments = moment_table(&[mu1, mu2], 1)?;
    let free = FreeParameter::exact_mu2(moments.moment(1, 0)?.clone(), moments.moment(1, 1)?.clone());
    let fwd = forward(&level0, &free, max_len)?;

    let (t1, t2) = (m1.truncated(max_len + 1), m2.truncated(max_len + 1));
    let mut worst = Rational::default();
    for (got, want) in [(&fwd.mu1, &t1), (&fwd.mu2, &t2)] {
        worst = worst.max(max_diff(got.bs().iter().zip(want.bs())));
        worst = worst.max(max_diff(got.a_sqs().iter().zip(want.a_sqs())));
    }
    let back = stepline_from_nn(&fwd.grid, max_len)?;
    let orig = level0.truncated(max_len);
    for (x, y) in [
        (back.betas(), orig.betas()),
        (back.gammas(), orig.gammas()),
        (back.deltas(), orig.deltas()),
    ] {
        worst = worst.max(max_diff(x.values().iter().zip(y.values())));
    }
    let direct = grid.truncated(max_len);
    for ((_, _, a), (_, _, b)) in fwd.grid.iter().zip(direct.iter()) {
        worst = worst.max(max_diff([(&a.a, &b.a), (&a.b, &b.b), (&a.c, &b.c), (&a.d, &b.d)].into_iter()));
    }
    Ok(worst)
}

/// Inverse sweep against the moment oracle for one generated system.
pub fn verify_seed(seed: u64, r: usize, max_len: usize) -> anyhow::Result<()> {
    let size = max_len + 2;
    let sys = random_system(seed, r, size, 6)?;
    let margs: Vec<MarginalRecurrence> = sys
        .iter()
        .enumerate()
        .map(|(i, m)| m.recurrence(max_len + 1, i + 1))
        .collect::<mopr::Result<_>>()?;
    let moments = moment_table(&sys, 2 * max_len + 3)?;
    if r == 2 {
        let grid = nn_from_marginals_r2(&margs[0], &margs[1], max_len)?;
        let oracle = nn_grid_oracle_r2(&moments, max_len)?;
        let bad = grid
            .iter()
            .zip(oracle.iter())
            .find(|((_, _, a), (_, _, b))| a != b)
            .map(|((n, m, _), _)| (n, m));
        if let Some((n, m)) = bad {
            bail!("coefficients at ({n}, {m}) differ from the oracle");
        }
    } else {
        let grid = nn_from_marginals_general_r(&margs, max_len, SweepCheck::CrossCheck)?;
        let oracle = nn_grid_oracle(&moments, max_len)?;
        let bad = grid
            .iter()
            .find(|(idx, e)| oracle.get(idx).ok() != Some(*e))
            .map(|(idx, _)| idx);
        if let Some(idx) = bad {
            bail!("coefficients at {idx} differ from the oracle");
        }
    }
    Ok(())
}

/// Rows `n = 0..=rows` of `a_n` and `b_n` for the first measure.
pub fn bessel_table(
    alpha: &Rational,
    nu: &Rational,
    rows: usize,
    digits: u32,
    fmt: Format,
    text: bool,
) -> anyhow::Result<String> {
    let level0 = bessel_stepline(alpha, nu, 2 * rows + 1)?;
    let e1 = ShiftFamily::e1(&level0, rows)?;
    let mu1 = marginal_mu1(&e1, rows)?;
    if !text {
        return Ok(io::marginal_to_string(&mu1, digits, fmt)?);
    }
    let mut lines = Vec::with_capacity(rows + 2);
    let body: Vec<(String, String, String)> = (0..=rows)
        .map(|n| {
            let a = if n == 0 {
                "--".to_string()
            } else {
                sqrt_to_decimal(mu1.a_sq(n)?, digits)?
            };
            Ok((n.to_string(), a, table_decimal(mu1.b(n)?, digits)?))
        })
        .collect::<mopr::Result<_>>()?;
    let wa = body.iter().map(|r| r.1.len()).max().unwrap_or(0).max(3);
    let wn = body.iter().map(|r| r.0.len()).max().unwrap_or(0).max(1);
    lines.push(format!("{:>wn$}  {:<wa$}  b_n", "n", "a_n"));
    for (n, a, b) in body {
        lines.push(format!("{n:>wn$}  {a:<wa$}  {b}"));
    }
    Ok(lines.join("\n") + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use mopr::int;

    #[test]
    fn forward_requires_free_parameter() {
        let cfg = JobConfig {
            command: Command::Forward {
                stepline: "s.json".into(),
                free: None,
                max_len: 2,
                out_dir: ".".into(),
            },
            digits: 25,
            format: Format::Json,
        };
        assert!(cfg.validate().is_err());
        let cfg = JobConfig { digits: 0, ..cfg };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn exit_codes() {
        let code = |e: Error| exit_code(&anyhow::Error::from(e));
        assert_eq!(code(Error::Parse { line: 3, msg: "x".into() }), 2);
        assert_eq!(code(Error::SingularSweep { index: vec![0, 0], i: 0, j: 1 }), 3);
        assert_eq!(code(Error::Range { what: "x".into(), index: "1".into() }), 4);
        assert_eq!(code(Error::DivisionByZero), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("plain")), 1);
    }

    #[test]
    fn roundtrip_is_exact() {
        assert_eq!(roundtrip(3, 3).unwrap(), int(0));
    }

    #[test]
    fn bessel_first_rows() {
        let t = bessel_table(&int(0), &int(0), 2, 20, Format::Json, true).unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with("--                     1"));
        assert!(lines[2].contains("1.7320508075688772935") && lines[2].ends_with("9.6666666666666666667"));
    }

    #[test]
    fn verify_small() {
        verify_seed(1, 2, 3).unwrap();
        verify_seed(1, 3, 2).unwrap();
    }
}
