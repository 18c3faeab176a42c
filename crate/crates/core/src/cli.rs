//! Command-line front end. Reports go to stdout as JSON, diagnostics to stderr.
//!
//! Exit codes: 0 pass or feasible, 1 fail or infeasible, 2 usage or input
//! error, 3 no convergence.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::applications::{self, Family, MUB_INDEX_ORDER};
use crate::certificate::{Certificate, Correlation, Mode, ValidationTolerances};
use crate::error::{Error, Result};
use crate::hierarchy::{self, HierarchyConfig, Verdict};
use crate::linalg::{CMatrix, DEFAULT_RANK_TOL};
use crate::solver::{self, SolverConfig, SolverStatus};
use crate::spanning::{self, SpanningTolerances};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "syncnpa", version, about = "Synchronous NPA hierarchy certificates and spanning tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Sic,
    Mub,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Sic => Family::Sic,
            FamilyArg::Mub => Family::Mub,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Real,
    Complex,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Real => Mode::Real,
            ModeArg::Complex => Mode::Complex,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OracleArg {
    Sic2,
    Sic3,
    Mub2,
    Mub3,
    Mub5,
}

#[derive(clap::Args, Debug)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "real")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 50_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol_feas: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_psd: f64,
    /// Add a seeded random perturbation to the starting point.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            tol_feas: self.tol_feas,
            tol_psd: self.tol_psd,
            mode: self.mode.into(),
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the SIC or MUB correlation of dimension d.
    Gen {
        #[arg(value_enum)]
        family: FamilyArg,
        #[arg(long)]
        d: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve levels 1..=K. Level 1 reports the solver alone, higher levels
    /// run the hierarchy with rank-loop detection.
    Certify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
        /// Write the deepest feasible certificate here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a certificate and report the ranks of its level restrictions.
    Rank {
        #[arg(long)]
        input: PathBuf,
        /// Also check the certificate against this correlation.
        #[arg(long)]
        correlation: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Matricially-spanning test on a level-2 certificate.
    Spanning {
        #[arg(long)]
        t2: PathBuf,
        /// Level-1 certificate; defaults to the restriction of T2.
        #[arg(long)]
        t1: Option<PathBuf>,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        nullity_tol: f64,
        /// Cross-check the nullity with the SVD of S_M itself.
        #[arg(long)]
        svd: bool,
        /// Write S_M as JSON.
        #[arg(long)]
        dump_sm: Option<PathBuf>,
    },
    /// Closed-form factor L with L^T L = T_1.
    FactorT1 {
        #[arg(value_enum)]
        family: FamilyArg,
        #[arg(long)]
        d: usize,
        /// Check the factor, spectrum and rank; exit 1 on mismatch.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Certificate from a shipped reference projection family.
    Oracle {
        #[arg(value_enum)]
        family: OracleArg,
        #[arg(long, default_value_t = 2)]
        level: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write the level-K feasibility problem in SDPA sparse format.
    ExportSdpa {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long, value_enum, default_value = "real")]
        mode: ModeArg,
        #[arg(short, long)]
        out: PathBuf,
    },
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    match run(&cli.command, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn oracle_projections(family: OracleArg) -> Result<(Vec<CMatrix>, Option<&'static str>)> {
    Ok(match family {
        OracleArg::Sic2 => (applications::reference_sic(2)?, None),
        OracleArg::Sic3 => (applications::reference_sic(3)?, None),
        OracleArg::Mub2 => (applications::reference_mubs(2)?, Some(MUB_INDEX_ORDER)),
        OracleArg::Mub3 => (applications::reference_mubs(3)?, Some(MUB_INDEX_ORDER)),
        OracleArg::Mub5 => (applications::reference_mubs(5)?, Some(MUB_INDEX_ORDER)),
    })
}

fn status_code(status: SolverStatus) -> i32 {
    match status {
        SolverStatus::Feasible => EXIT_PASS,
        SolverStatus::InfeasibleGap => EXIT_FAIL,
        SolverStatus::NoConvergence => EXIT_NO_CONVERGENCE,
    }
}

pub fn run(command: &Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Gen { family, d, out: path } => {
            let p = match family {
                FamilyArg::Sic => applications::p_sic(*d)?,
                FamilyArg::Mub => applications::p_mub(*d)?,
            };
            match path {
                Some(path) => {
                    write_file(path, &p.to_json()?)?;
                    emit(out, &json!({ "family": Family::from(*family), "d": d, "n": p.n(), "output": path }))?;
                }
                None => writeln!(out, "{}", p.to_json()?)?,
            }
            Ok(EXIT_PASS)
        }
        Command::Certify { input, level, solver, rank_tol, out: path } => {
            let p = Correlation::read(input)?;
            let config = solver.config();
            let (code, cert) = if *level <= 1 {
                let report = solver::solve_feasibility(&p, 1, &config)?;
                emit(out, &report)?;
                let code = match (report.status, &report.validation) {
                    (SolverStatus::Feasible, Some(v)) if !v.pass => EXIT_FAIL,
                    (status, _) => status_code(status),
                };
                (code, report.certificate)
            } else {
                let report =
                    hierarchy::certify(&p, *level, &HierarchyConfig { solver: config, rank_rel_tol: *rank_tol })?;
                emit(out, &report)?;
                let code = match report.verdict {
                    Verdict::RankLoopDq | Verdict::ConsistentWithDqc => EXIT_PASS,
                    Verdict::RejectedAtLevel(_) => EXIT_FAIL,
                    Verdict::Inconclusive => EXIT_NO_CONVERGENCE,
                };
                (code, report.certificate)
            };
            if let Some(path) = path {
                match cert {
                    Some(cert) => write_file(path, &cert.to_json()?)?,
                    None => eprintln!("no feasible certificate; {} not written", path.display()),
                }
            }
            Ok(code)
        }
        Command::Rank { input, correlation, rank_tol } => {
            let cert = Certificate::read(input)?;
            let p = correlation.as_deref().map(Correlation::read).transpose()?;
            let report = hierarchy::certify_certificate(&cert, p.as_ref(), ValidationTolerances::default(), *rank_tol)?;
            emit(out, &report)?;
            Ok(if report.verdict == Verdict::Inconclusive { EXIT_FAIL } else { EXIT_PASS })
        }
        Command::Spanning { t2, t1, d, rank_tol, nullity_tol, svd, dump_sm } => {
            let t2 = Certificate::read(t2)?;
            let t1 = match t1 {
                Some(path) => Certificate::read(path)?,
                None => t2.restrict(1),
            };
            let tols = SpanningTolerances {
                rank_rel_tol: *rank_tol,
                nullity_rel_tol: *nullity_tol,
                svd_cross_check: *svd,
                ..SpanningTolerances::default()
            };
            let report = spanning::check_matricially_spanning(&t1, &t2, *d, &tols)?;
            if let Some(path) = dump_sm {
                let s = spanning::build_s_m(&t2)?;
                let rows = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
                    s.row_iter().map(|r| r.iter().map(f).collect()).collect()
                };
                let dump = json!({ "rows": s.nrows(), "cols": s.ncols(), "re": rows(|z| z.re), "im": rows(|z| z.im) });
                write_file(path, &serde_json::to_string(&dump)?)?;
            }
            emit(out, &report)?;
            Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::FactorT1 { family, d, verify, rank_tol } => {
            let family = Family::from(*family);
            let l = applications::t1_factor(family, *d)?;
            let factor: Vec<Vec<f64>> = l.row_iter().map(|r| r.iter().copied().collect()).collect();
            let check = verify.then(|| applications::check_t1_factor(family, *d, *rank_tol)).transpose()?;
            let pass = check.as_ref().is_none_or(|c| c.pass);
            emit(
                out,
                &json!({ "family": family, "d": d, "rows": l.nrows(), "cols": l.ncols(), "factor": factor, "check": check }),
            )?;
            Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Oracle { family, level, out: path } => {
            if *level == 0 {
                return Err(Error::Input("level must be at least 1".into()));
            }
            let (projections, order) = oracle_projections(*family)?;
            let cert = Certificate::from_projections(&projections, *level)?.with_index_order(order);
            let validation = cert.validate(None, ValidationTolerances::default());
            match path {
                Some(path) => {
                    write_file(path, &cert.to_json()?)?;
                    emit(
                        out,
                        &json!({ "n": cert.n(), "level": cert.level(), "size": cert.words().len(), "output": path, "validation": validation }),
                    )?;
                }
                None => writeln!(out, "{}", cert.to_json()?)?,
            }
            Ok(if validation.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::ExportSdpa { input, level, mode, out: path } => {
            let p = Correlation::read(input)?;
            let problem = solver::export_sdpa(&p, *level, (*mode).into(), path)?;
            eprintln!("wrote {}", path.display());
            emit(
                out,
                &json!({
                    "n": problem.n,
                    "level": problem.level,
                    "block_size": problem.block_size,
                    "free_classes": problem.free_classes.len(),
                    "output": path,
                }),
            )?;
            Ok(EXIT_PASS)
        }
    }
}
