//! Export of the feasibility problem in SDPA sparse format (`.dat-s`).
//!
//! The problem reads `F(x) = sum_i x_i F_i - F_0 >= 0` with one variable per
//! free class, a zero objective and a single block over the word index.
//! `F_i` is the 0/1 indicator of the positions of class `i` and `F_0` is the
//! negated pinned part, so `F(x)` is exactly the certificate.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::certificate::{Correlation, Mode};
use crate::error::{Error, Result};
use crate::words::CanonicalClass;

use super::AffineStructure;

#[derive(Clone, Debug)]
pub struct SdpaProblem {
    pub n: usize,
    pub level: usize,
    pub block_size: usize,
    pub free_classes: Vec<CanonicalClass>,
    /// `(matno, i, j, value)` with 1-based `i <= j`, in output order.
    pub entries: Vec<(usize, usize, usize, f64)>,
}

impl SdpaProblem {
    /// Builds the real-mode problem. Without a correlation only the empty
    /// word is pinned and the single-letter and pair classes stay free.
    pub fn build(n: usize, level: usize, mode: Mode, p: Option<&Correlation>) -> Result<Self> {
        if mode != Mode::Real {
            return Err(Error::Unsupported("SDPA export needs real mode (SDPA matrices are real symmetric)".into()));
        }
        let s = AffineStructure::new(n, level, mode, p)?;
        let dim = s.dim();
        let mut var_of = vec![0usize; s.classes.len()];
        let mut free_classes = Vec::new();
        for (id, (class, pin)) in s.classes().enumerate() {
            if pin.is_none() {
                free_classes.push(class.clone());
                var_of[id] = free_classes.len();
            }
        }
        let mut f0 = Vec::new();
        let mut fi: Vec<Vec<(usize, usize)>> = vec![Vec::new(); free_classes.len() + 1];
        for i in 0..dim {
            for j in i..dim {
                let (id, _) = s.slots()[i * dim + j];
                match s.pinned_value(id) {
                    Some(v) if v != 0.0 => f0.push((0, i + 1, j + 1, -v)),
                    Some(_) => {}
                    None => fi[var_of[id as usize]].push((i + 1, j + 1)),
                }
            }
        }
        let mut entries = f0;
        for (var, positions) in fi.iter().enumerate().skip(1) {
            entries.extend(positions.iter().map(|&(i, j)| (var, i, j, 1.0)));
        }
        Ok(SdpaProblem { n, level, block_size: dim, free_classes, entries })
    }

    pub fn to_sdpa_string(&self) -> String {
        let m = self.free_classes.len();
        let mut out = String::new();
        let _ = writeln!(out, "\"synchronous NPA feasibility: n = {}, level = {}, real mode", self.n, self.level);
        let _ = writeln!(out, "\"variables are the free moment classes; objective is zero");
        for (i, class) in self.free_classes.iter().enumerate() {
            let _ = writeln!(out, "\"x{} = class {}", i + 1, class);
        }
        let _ = writeln!(out, "{m}");
        let _ = writeln!(out, "1");
        let _ = writeln!(out, "{}", self.block_size);
        let _ = writeln!(out, "{}", vec!["0"; m].join(" "));
        for &(mat, i, j, v) in &self.entries {
            let _ = writeln!(out, "{mat} 1 {i} {j} {v}");
        }
        out
    }
}

/// Writes the level-`k` feasibility problem of `p` to `path`.
pub fn export_sdpa(p: &Correlation, k: usize, mode: Mode, path: &Path) -> Result<SdpaProblem> {
    let problem = SdpaProblem::build(p.n(), k, mode, Some(p))?;
    write_sdpa(&problem, path)?;
    Ok(problem)
}

pub fn write_sdpa(problem: &SdpaProblem, path: &Path) -> Result<()> {
    fs::write(path, problem.to_sdpa_string())?;
    Ok(())
}
