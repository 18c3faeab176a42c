//! Level-`k` feasibility: find a class-consistent positive semidefinite
//! completion of a correlation by Dykstra's alternating projections between
//! the PSD cone and the affine subspace of pinned class-constant matrices.

mod sdpa;

pub use sdpa::{export_sdpa, write_sdpa, SdpaProblem};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Correlation, Mode, ValidationReport, ValidationTolerances};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::words::{self, CanonicalClass, Word};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Feasible once the distance between the two projection images drops below this.
    pub tol_feas: f64,
    /// Eigenvalue tolerance for the returned certificate.
    pub tol_psd: f64,
    pub mode: Mode,
    /// `None` starts from the affine projection of the zero matrix; `Some`
    /// adds a seeded random Hermitian perturbation first.
    pub seed: Option<u64>,
    /// Stall detection for the infeasibility heuristic.
    pub stall_window: usize,
    pub stall_delta: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 50_000,
            tol_feas: 1e-7,
            tol_psd: 1e-10,
            mode: Mode::Real,
            seed: None,
            stall_window: 500,
            stall_delta: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Input("max_iters must be at least 1".into()));
        }
        if !(self.tol_feas > 0.0 && self.tol_psd > 0.0 && self.stall_delta > 0.0) {
            return Err(Error::Input("solver tolerances must be positive".into()));
        }
        if self.stall_window == 0 {
            return Err(Error::Input("stall_window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStatus {
    Feasible,
    NoConvergence,
    /// The residual stalled above tolerance. A heuristic, not a proof of infeasibility.
    InfeasibleGap,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    pub status: SolverStatus,
    pub level: usize,
    pub mode: Mode,
    pub iterations: usize,
    /// Frobenius distance between the last PSD and affine projections.
    pub residual: f64,
    pub note: Option<String>,
    #[serde(skip)]
    pub certificate: Option<Certificate>,
    pub validation: Option<ValidationReport>,
}

/// Frobenius-nearest PSD matrix: clip negative eigenvalues to zero.
pub fn project_psd(m: &CMatrix) -> Result<CMatrix> {
    let dev = linalg::hermitian_deviation(m);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    Ok(psd_part(&linalg::hermitian_part(m)))
}

fn psd_part(m: &CMatrix) -> CMatrix {
    let (values, vectors) = linalg::eigh(m);
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > 0.0).collect();
    if keep.is_empty() {
        return CMatrix::zeros(m.nrows(), m.ncols());
    }
    let half = CMatrix::from_fn(m.nrows(), keep.len(), |r, j| vectors[(r, keep[j])] * values[keep[j]].sqrt());
    let out = &half * half.adjoint();
    // exact Hermitian symmetry keeps the real path available downstream
    linalg::hermitian_part(&out)
}

/// Class layout of a level-`k` index: which class every matrix position
/// belongs to, whether it holds the conjugate, and which classes are pinned.
#[derive(Clone, Debug)]
pub struct AffineStructure {
    words: Vec<Word>,
    classes: Vec<CanonicalClass>,
    /// per position (row-major): class id and conjugation flag
    slots: Vec<(u32, bool)>,
    counts: Vec<usize>,
    real_valued: Vec<bool>,
    pinned: Vec<Option<f64>>,
}

impl AffineStructure {
    pub fn new(n: usize, level: usize, mode: Mode, p: Option<&Correlation>) -> Result<Self> {
        if let Some(p) = p {
            if p.n() != n {
                return Err(Error::Dimension(format!("correlation has n = {} but the problem has n = {n}", p.n())));
            }
        }
        let sym = mode.symmetry();
        let words = words::enumerate_words(n, level, true);
        let dim = words.len();
        let mut ids: std::collections::HashMap<CanonicalClass, u32> = std::collections::HashMap::new();
        let mut classes = Vec::new();
        let mut slots = Vec::with_capacity(dim * dim);
        for a in &words {
            for b in &words {
                let class = words::pair_class(a, b, sym);
                let adj = class.adjoint();
                let (key, conj) = if class <= adj { (class, false) } else { (adj, true) };
                let id = *ids.entry(key.clone()).or_insert_with(|| {
                    classes.push(key);
                    classes.len() as u32 - 1
                });
                slots.push((id, conj));
            }
        }
        let mut counts = vec![0; classes.len()];
        for &(id, _) in &slots {
            counts[id as usize] += 1;
        }
        let real_valued = classes.iter().map(|cl| mode == Mode::Real || cl.is_self_adjoint()).collect();
        let mut pinned = vec![None; classes.len()];
        let mut pin = |w: Word, v: f64| {
            let class = words::canonical_class(&w, sym);
            if let Some(&id) = ids.get(&class) {
                pinned[id as usize] = Some(v);
            }
        };
        pin(Word::empty(), 1.0);
        if let Some(p) = p {
            for x in 1..=n {
                for y in 1..=n {
                    pin(Word::new(vec![x as u32, y as u32]), p.get(x, y));
                }
            }
        }
        Ok(AffineStructure { words, classes, slots, counts, real_valued, pinned })
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// Classes with their pinned value, if any. Adjoint pairs appear once.
    pub fn classes(&self) -> impl Iterator<Item = (&CanonicalClass, Option<f64>)> {
        self.classes.iter().zip(self.pinned.iter().copied())
    }

    pub fn free_class_count(&self) -> usize {
        self.pinned.iter().filter(|v| v.is_none()).count()
    }

    /// Row-major class id and conjugation flag of every matrix position.
    pub(crate) fn slots(&self) -> &[(u32, bool)] {
        &self.slots
    }

    pub(crate) fn pinned_value(&self, id: u32) -> Option<f64> {
        self.pinned[id as usize]
    }

    /// Orthogonal projection onto the pinned class-constant matrices: free
    /// classes are averaged, pinned classes overwritten.
    pub fn project(&self, m: &CMatrix) -> CMatrix {
        let dim = self.dim();
        let mut sums = vec![c(0.0); self.classes.len()];
        for i in 0..dim {
            for j in 0..dim {
                let (id, conj) = self.slots[i * dim + j];
                let z = m[(i, j)];
                sums[id as usize] += if conj { z.conj() } else { z };
            }
        }
        let values: Vec<Complex64> = sums
            .iter()
            .enumerate()
            .map(|(id, s)| match self.pinned[id] {
                Some(v) => c(v),
                None => {
                    let mean = s / self.counts[id] as f64;
                    if self.real_valued[id] {
                        c(mean.re)
                    } else {
                        mean
                    }
                }
            })
            .collect();
        CMatrix::from_fn(dim, dim, |i, j| {
            let (id, conj) = self.slots[i * dim + j];
            let v = values[id as usize];
            if conj {
                v.conj()
            } else {
                v
            }
        })
    }

    /// Embeds a certificate of a lower (or equal) level as the leading block.
    fn embed(&self, start: &CMatrix) -> Result<CMatrix> {
        let k = start.nrows();
        if k > self.dim() || start.ncols() != k {
            return Err(Error::Dimension(format!(
                "warm start is {}x{} but the index has {} words",
                k,
                start.ncols(),
                self.dim()
            )));
        }
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        m.view_mut((0, 0), (k, k)).copy_from(start);
        Ok(m)
    }
}

/// Affine projection for the level-`k` problem of `p`.
pub fn project_affine(m: &CMatrix, n: usize, k: usize, mode: Mode, p: &Correlation) -> Result<CMatrix> {
    let s = AffineStructure::new(n, k, mode, Some(p))?;
    if m.nrows() != s.dim() || m.ncols() != s.dim() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{} but the index has {} words",
            m.nrows(),
            m.ncols(),
            s.dim()
        )));
    }
    Ok(s.project(m))
}

pub fn solve_feasibility(p: &Correlation, k: usize, config: &SolverConfig) -> Result<SolverReport> {
    solve_feasibility_from(p, k, config, None)
}

/// Like [`solve_feasibility`], starting from the leading block `start`
/// (e.g. the previous level's certificate or a known feasible point).
pub fn solve_feasibility_from(
    p: &Correlation,
    k: usize,
    config: &SolverConfig,
    start: Option<&CMatrix>,
) -> Result<SolverReport> {
    config.check()?;
    if k == 0 {
        return Err(Error::Input("level must be at least 1".into()));
    }
    let structure = AffineStructure::new(p.n(), k, config.mode, Some(p))?;
    let dim = structure.dim();

    let mut init = match start {
        Some(s) => structure.embed(s)?,
        None => CMatrix::zeros(dim, dim),
    };
    if let Some(seed) = config.seed {
        init += random_hermitian(dim, config.mode, seed);
    }

    let mut x = structure.project(&init);
    let mut correction = CMatrix::zeros(dim, dim);
    let mut residual = f64::INFINITY;
    let mut stalled = 0usize;
    let mut status = SolverStatus::NoConvergence;
    let mut iterations = 0;
    let mut polishing = 0usize;

    for it in 1..=config.max_iters {
        iterations = it;
        let shifted = &x + &correction;
        let y = psd_part(&shifted);
        correction = shifted - &y;
        let next = structure.project(&y);
        let r = linalg::frobenius(&(&y - &next));
        x = next;

        if r < config.tol_feas {
            // the affine iterate is within r of the cone; keep polishing until
            // it is PSD to tol_psd so the certificate itself validates
            residual = r;
            if linalg::min_eigenvalue(&x) >= -config.tol_psd {
                status = SolverStatus::Feasible;
                break;
            }
            polishing += 1;
            continue;
        }
        if (r - residual).abs() < config.stall_delta && r > 10.0 * config.tol_feas {
            stalled += 1;
        } else {
            stalled = 0;
        }
        residual = r;
        if stalled >= config.stall_window {
            status = SolverStatus::InfeasibleGap;
            break;
        }
    }

    let mut report = SolverReport {
        status,
        level: k,
        mode: config.mode,
        iterations,
        residual,
        note: None,
        certificate: None,
        validation: None,
    };
    match status {
        SolverStatus::Feasible => {
            let cert = Certificate::from_matrix(p.n(), k, config.mode, x)?.with_index_order(p.index_order());
            let validation = cert.validate(Some(p), ValidationTolerances::default());
            report.validation = Some(validation);
            report.certificate = Some(cert);
        }
        SolverStatus::InfeasibleGap => {
            report.note = Some(format!(
                "residual stalled at {residual:.3e} for {} iterations; heuristic evidence of infeasibility, not a proof",
                config.stall_window
            ));
        }
        SolverStatus::NoConvergence if polishing > 0 => {
            report.note = Some(format!(
                "residual {residual:.3e} below tolerance but the affine iterate is not yet PSD to {:.1e}",
                config.tol_psd
            ));
        }
        SolverStatus::NoConvergence => {
            report.note = Some(format!("residual {residual:.3e} after {iterations} iterations"));
        }
    }
    Ok(report)
}

fn random_hermitian(dim: usize, mode: Mode, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = if mode == Mode::Complex && i != j { rng.random_range(-1.0..1.0) } else { 0.0 };
            m[(i, j)] = Complex64::new(re, im);
            m[(j, i)] = Complex64::new(re, -im);
        }
    }
    m
}
