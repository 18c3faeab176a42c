//! Hierarchy certificates: moment matrices indexed by words, their class
//! tables, construction from explicit projections, and validation.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::words::{self, canonical_class, collapse_powers, CanonicalClass, Symmetry, Word};

/// Scalar field of a certificate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Real symmetric moments; classes identify reversals.
    Real,
    /// Hermitian moments; classes identify cyclic rotations only.
    #[default]
    Complex,
}

impl Mode {
    pub fn symmetry(self) -> Symmetry {
        match self {
            Mode::Real => Symmetry::CyclicReversal,
            Mode::Complex => Symmetry::Cyclic,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Mode::Real),
            "complex" => Ok(Mode::Complex),
            other => Err(Error::Input(format!("unknown mode {other:?}"))),
        }
    }
}

/// Which words index the rows of a certificate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IndexKind {
    /// Words without adjacent repeated letters.
    #[default]
    Reduced,
    /// Every word of length at most the level.
    Full,
}

const CORRELATION_TOL: f64 = 1e-10;

/// A synchronous correlation `p(x, y)`, an `N x N` symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Correlation {
    p: DMatrix<f64>,
    index_order: Option<String>,
}

impl Correlation {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        let n = p.nrows();
        if n == 0 || p.ncols() != n {
            return Err(Error::Input(format!("correlation must be square and nonempty, got {}x{}", n, p.ncols())));
        }
        for i in 0..n {
            for j in 0..n {
                let v = p[(i, j)];
                if !v.is_finite() || !(-CORRELATION_TOL..=1.0 + CORRELATION_TOL).contains(&v) {
                    return Err(Error::Input(format!("p({},{}) = {v} outside [0, 1]", i + 1, j + 1)));
                }
                if (v - p[(j, i)]).abs() > CORRELATION_TOL {
                    return Err(Error::Input(format!("p is not symmetric at ({},{})", i + 1, j + 1)));
                }
            }
        }
        Ok(Correlation { p, index_order: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Input("correlation rows must all have length n".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn with_index_order(mut self, order: &str) -> Self {
        self.index_order = Some(order.to_string());
        self
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    /// 1-based access, `p(x, y)`.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[(x - 1, y - 1)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn index_order(&self) -> Option<&str> {
        self.index_order.as_deref()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = CorrelationJson { n: self.n(), p: rows_of(&self.p), index_order: self.index_order.clone() };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CorrelationJson = serde_json::from_str(s)?;
        if doc.p.len() != doc.n {
            return Err(Error::Input(format!("n = {} but p has {} rows", doc.n, doc.p.len())));
        }
        let mut corr = Self::from_rows(&doc.p)?;
        corr.index_order = doc.index_order;
        Ok(corr)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct CorrelationJson {
    n: usize,
    p: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index_order: Option<String>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Scalar moment per canonical class: the free variables of a certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassTable {
    symmetry: Symmetry,
    values: BTreeMap<CanonicalClass, Complex64>,
}

impl ClassTable {
    pub fn new(symmetry: Symmetry) -> Self {
        ClassTable { symmetry, values: BTreeMap::new() }
    }

    /// The classes fixed by a correlation: the empty word, every `x` and every `xy`.
    pub fn pinned(p: &Correlation, symmetry: Symmetry) -> Self {
        let mut t = Self::new(symmetry);
        t.set_word(&Word::empty(), c(1.0));
        for x in 1..=p.n() {
            for y in 1..=p.n() {
                t.set_word(&Word::new(vec![x as u32, y as u32]), c(p.get(x, y)));
            }
        }
        t
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn set(&mut self, class: CanonicalClass, value: Complex64) {
        self.values.insert(class, value);
    }

    /// Stores `value` for the class of `w`.
    pub fn set_word(&mut self, w: &Word, value: Complex64) {
        self.values.insert(canonical_class(w, self.symmetry), value);
    }

    pub fn get(&self, class: &CanonicalClass) -> Option<Complex64> {
        self.values.get(class).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalClass, &Complex64)> {
        self.values.iter()
    }

    /// Value of `class` with conjugate pairing: a class missing from the table
    /// is resolved through its adjoint class. Self-adjoint classes are real.
    fn resolve(&self, class: &CanonicalClass) -> Option<Complex64> {
        let adj = class.adjoint();
        if adj == *class {
            return self.get(class).map(|z| c(z.re));
        }
        self.get(class).or_else(|| self.get(&adj).map(|z| z.conj()))
    }
}

/// A level-`k` moment matrix `M[a][b] = <a|b>` over an ordered word index.
#[derive(Clone, Debug)]
pub struct Certificate {
    n: usize,
    level: usize,
    mode: Mode,
    words: Vec<Word>,
    matrix: CMatrix,
    positions: HashMap<Word, usize>,
    index_order: Option<String>,
}

impl PartialEq for Certificate {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.level == other.level
            && self.mode == other.mode
            && self.words == other.words
            && self.matrix == other.matrix
    }
}

/// Tolerances for [`Certificate::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationTolerances {
    pub tol_psd: f64,
    pub tol_class: f64,
}

impl Default for ValidationTolerances {
    fn default() -> Self {
        ValidationTolerances { tol_psd: 1e-8, tol_class: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Minimum eigenvalue of `T_j` for `j = 1..=k` (for `k = 0`, just `T_0`).
    pub level_min_eigenvalues: Vec<f64>,
    pub psd_pass: bool,
    /// Largest deviation of an entry from its class value, including
    /// Hermitian (and, in real mode, imaginary) defects.
    pub class_spread: f64,
    pub class_pass: bool,
    pub correlation_error: Option<f64>,
    pub correlation_pass: bool,
    pub normalization_error: f64,
    pub normalization_pass: bool,
    pub tolerances: ValidationTolerances,
    pub failures: Vec<String>,
    pub pass: bool,
}

impl Certificate {
    fn assemble(n: usize, level: usize, mode: Mode, words: Vec<Word>, matrix: CMatrix) -> Self {
        let positions = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        Certificate { n, level, mode, words, matrix, positions, index_order: None }
    }

    /// Wraps an explicit matrix over the reduced index of level `level`.
    pub fn from_matrix(n: usize, level: usize, mode: Mode, matrix: CMatrix) -> Result<Self> {
        let words = words::enumerate_words(n, level, true);
        Self::from_parts(n, level, mode, words, matrix)
    }

    pub fn from_parts(n: usize, level: usize, mode: Mode, words: Vec<Word>, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != words.len() || matrix.ncols() != words.len() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but the index has {} words",
                matrix.nrows(),
                matrix.ncols(),
                words.len()
            )));
        }
        for w in &words {
            w.check_alphabet(n)?;
            if w.len() > level {
                return Err(Error::Input(format!("word {w} longer than level {level}")));
            }
        }
        if words.first().is_none_or(|w| !w.is_empty()) {
            return Err(Error::Input("the index must start with the empty word".into()));
        }
        if words.windows(2).any(|p| p[0].len() > p[1].len()) {
            return Err(Error::Input("index words must be ordered by length".into()));
        }
        Ok(Self::assemble(n, level, mode, words, matrix))
    }

    /// The level-1 certificate, fixed entirely by the correlation.
    pub fn build_t1(p: &Correlation) -> Result<Self> {
        let n = p.n();
        let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
        m[(0, 0)] = 1.0;
        for x in 1..=n {
            m[(0, x)] = p.get(x, x);
            m[(x, 0)] = p.get(x, x);
            for y in 1..=n {
                m[(x, y)] = p.get(x, y);
            }
        }
        Self::from_matrix(n, 1, Mode::Real, linalg::from_real(&m))
    }

    /// Dense certificate `M[a][b] = value(class(dagger(a)·b))` over the reduced index.
    pub fn materialize(table: &ClassTable, n: usize, k: usize, mode: Mode) -> Result<Self> {
        let sym = mode.symmetry();
        if table.symmetry() != sym {
            return Err(Error::Input(format!(
                "class table uses {:?} but mode {mode:?} needs {sym:?}",
                table.symmetry()
            )));
        }
        let words = words::enumerate_words(n, k, true);
        let dim = words.len();
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let class = words::pair_class(&words[i], &words[j], sym);
                let v = table.resolve(&class).ok_or_else(|| Error::MissingClass(class.to_string()))?;
                let v = if mode == Mode::Real { c(v.re) } else { v };
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        Ok(Self::assemble(n, k, mode, words, m))
    }

    /// Certificate of the normalized trace `Tr(P_a^† P_b) / d` of explicit projections.
    pub fn from_projections(projections: &[CMatrix], k: usize) -> Result<Self> {
        Self::from_projections_with_index(projections, k, IndexKind::Reduced)
    }

    pub fn from_projections_with_index(projections: &[CMatrix], k: usize, index: IndexKind) -> Result<Self> {
        let n = projections.len();
        if n == 0 {
            return Err(Error::Input("need at least one projection".into()));
        }
        let d = projections[0].nrows();
        for (i, p) in projections.iter().enumerate() {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::Dimension(format!(
                    "projection {} is {}x{}, expected {d}x{d}",
                    i + 1,
                    p.nrows(),
                    p.ncols()
                )));
            }
            let deviation = linalg::max_abs_diff(&(p * p), p).max(linalg::hermitian_deviation(p));
            if deviation >= 1e-10 {
                return Err(Error::NotProjection { index: i + 1, deviation });
            }
        }
        let words = words::enumerate_words(n, k, index == IndexKind::Reduced);
        // column a holds vec(P_a); then M = V^† V / d
        let mut v = CMatrix::zeros(d * d, words.len());
        let mut products: HashMap<Word, CMatrix> = HashMap::new();
        products.insert(Word::empty(), CMatrix::identity(d, d));
        for (col, w) in words.iter().enumerate() {
            let prod = match products.get(w) {
                Some(m) => m.clone(),
                None => {
                    let prefix = Word::new(w.letters()[..w.len() - 1].to_vec());
                    let last = w.letters()[w.len() - 1] as usize - 1;
                    let m = &products[&prefix] * &projections[last];
                    products.insert(w.clone(), m.clone());
                    m
                }
            };
            for (r, z) in prod.iter().enumerate() {
                v[(r, col)] = *z;
            }
        }
        let m = (v.adjoint() * &v).map(|z| z / d as f64);
        Ok(Self::assemble(n, k, Mode::Complex, words, m))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn index_order(&self) -> Option<&str> {
        self.index_order.as_deref()
    }

    pub fn with_index_order(mut self, order: Option<&str>) -> Self {
        self.index_order = order.map(str::to_string);
        self
    }

    /// Same moments relabelled with another mode. Dropping to real mode keeps
    /// the real part, which is again a valid real certificate.
    pub fn with_mode(&self, mode: Mode) -> Self {
        let m = match mode {
            Mode::Real => self.matrix.map(|z| c(z.re)),
            Mode::Complex => self.matrix.clone(),
        };
        let mut out = Self::assemble(self.n, self.level, mode, self.words.clone(), m);
        out.index_order = self.index_order.clone();
        out
    }

    pub fn position(&self, w: &Word) -> Option<usize> {
        self.positions.get(w).copied()
    }

    /// `<a|b>` for arbitrary words of length at most the level; repeated
    /// letters are absorbed (`|xxa> = |xa>`).
    pub fn entry(&self, a: &Word, b: &Word) -> Result<Complex64> {
        let find = |w: &Word| {
            self.position(w)
                .or_else(|| self.position(&collapse_powers(w)))
                .ok_or_else(|| Error::Input(format!("word {w} is not in the level-{} index", self.level)))
        };
        Ok(self.matrix[(find(a)?, find(b)?)])
    }

    /// Principal restriction to words of length at most `j`.
    pub fn restrict(&self, j: usize) -> Certificate {
        let keep: Vec<usize> = (0..self.words.len()).filter(|&i| self.words[i].len() <= j).collect();
        let words = keep.iter().map(|&i| self.words[i].clone()).collect();
        let m = CMatrix::from_fn(keep.len(), keep.len(), |r, s| self.matrix[(keep[r], keep[s])]);
        let mut out = Self::assemble(self.n, j.min(self.level), self.mode, words, m);
        out.index_order = self.index_order.clone();
        out
    }

    /// The correlation `p(x, y) = M[x][y]` read off the level-1 block.
    pub fn correlation(&self) -> Result<Correlation> {
        if self.level < 1 {
            return Err(Error::Input("a level-0 certificate carries no correlation".into()));
        }
        let mut p = DMatrix::zeros(self.n, self.n);
        for x in 1..=self.n {
            for y in 1..=self.n {
                p[(x - 1, y - 1)] = self.entry(&Word::letter(x as u32), &Word::letter(y as u32))?.re;
            }
        }
        let mut corr = Correlation::new(p)?;
        corr.index_order = self.index_order.clone();
        Ok(corr)
    }

    /// Class table holding the mean of every class over the matrix; the
    /// inverse of [`Certificate::materialize`] on class-consistent matrices.
    pub fn class_table(&self) -> ClassTable {
        let sym = self.mode.symmetry();
        let mut sums: BTreeMap<CanonicalClass, (Complex64, usize)> = BTreeMap::new();
        let dim = self.words.len();
        for i in 0..dim {
            for j in 0..dim {
                let class = words::pair_class(&self.words[i], &self.words[j], sym);
                let adj = class.adjoint();
                let (key, z) =
                    if class <= adj { (class, self.matrix[(i, j)]) } else { (adj, self.matrix[(i, j)].conj()) };
                let e = sums.entry(key).or_insert((c(0.0), 0));
                e.0 += z;
                e.1 += 1;
            }
        }
        let mut table = ClassTable::new(sym);
        for (class, (sum, count)) in sums {
            let mut v = sum / count as f64;
            if self.mode == Mode::Real || class.is_self_adjoint() {
                v = c(v.re);
            }
            table.set(class, v);
        }
        table
    }

    /// Largest deviation of any entry from the first entry seen in its class
    /// (conjugated for adjoint classes).
    pub fn class_spread(&self) -> f64 {
        let sym = self.mode.symmetry();
        let mut reference: HashMap<CanonicalClass, Complex64> = HashMap::new();
        let mut spread: f64 = 0.0;
        let dim = self.words.len();
        for i in 0..dim {
            for j in 0..dim {
                let class = words::pair_class(&self.words[i], &self.words[j], sym);
                let adj = class.adjoint();
                let (key, z) =
                    if class <= adj { (class, self.matrix[(i, j)]) } else { (adj, self.matrix[(i, j)].conj()) };
                let r = *reference.entry(key).or_insert(z);
                spread = spread.max((z - r).norm());
            }
        }
        if self.mode == Mode::Real {
            spread = spread.max(linalg::max_imag(&self.matrix));
        }
        spread
    }

    pub fn validate(&self, p: Option<&Correlation>, tols: ValidationTolerances) -> ValidationReport {
        let mut failures = Vec::new();

        let levels: Vec<usize> = if self.level == 0 { vec![0] } else { (1..=self.level).collect() };
        let level_min_eigenvalues: Vec<f64> = levels
            .iter()
            .map(|&j| {
                let m = if j == self.level { self.matrix.clone() } else { self.restrict(j).matrix };
                linalg::min_eigenvalue(&linalg::hermitian_part(&m))
            })
            .collect();
        let mut psd_pass = true;
        for (&j, &ev) in levels.iter().zip(&level_min_eigenvalues) {
            if ev.is_nan() || ev < -tols.tol_psd {
                psd_pass = false;
                failures.push(format!("T_{j} has eigenvalue {ev:.3e} below -{:.1e}", tols.tol_psd));
            }
        }

        let class_spread = self.class_spread();
        let class_pass = class_spread < tols.tol_class;
        if !class_pass {
            failures.push(format!("class spread {class_spread:.3e} not below {:.1e}", tols.tol_class));
        }

        let correlation_error = p.map(|p| self.correlation_error(p));
        let correlation_pass = match correlation_error {
            Some(Ok(e)) => e < tols.tol_class,
            Some(Err(_)) => false,
            None => true,
        };
        if let Some(result) = &correlation_error {
            match result {
                Ok(e) if !correlation_pass => failures.push(format!("max |M[x][y] - p(x,y)| = {e:.3e}")),
                Err(msg) => failures.push(msg.clone()),
                _ => {}
            }
        }

        let normalization_error = (self.matrix[(0, 0)] - c(1.0)).norm();
        let normalization_pass = normalization_error < tols.tol_class;
        if !normalization_pass {
            failures.push(format!("|M[0][0] - 1| = {normalization_error:.3e}"));
        }

        ValidationReport {
            level_min_eigenvalues,
            psd_pass,
            class_spread,
            class_pass,
            correlation_error: correlation_error.and_then(|r| r.ok()),
            correlation_pass,
            normalization_error,
            normalization_pass,
            tolerances: tols,
            pass: failures.is_empty(),
            failures,
        }
    }

    fn correlation_error(&self, p: &Correlation) -> std::result::Result<f64, String> {
        if p.n() != self.n {
            return Err(format!("correlation has n = {} but certificate has n = {}", p.n(), self.n));
        }
        if self.level < 1 {
            return Err("level-0 certificate cannot match a correlation".into());
        }
        let mut err: f64 = 0.0;
        for x in 1..=self.n {
            for y in 1..=self.n {
                let m = self.entry(&Word::letter(x as u32), &Word::letter(y as u32)).map_err(|e| e.to_string())?;
                err = err.max((m - c(p.get(x, y))).norm());
            }
        }
        Ok(err)
    }

    pub fn to_json(&self) -> Result<String> {
        let re = rows_of(&linalg::real_part(&self.matrix));
        let im = (self.mode == Mode::Complex || linalg::max_imag(&self.matrix) > 0.0)
            .then(|| rows_of(&self.matrix.map(|z| z.im)));
        let doc = CertificateJson {
            n: self.n,
            level: self.level,
            mode: self.mode,
            words: self.words.clone(),
            matrix: re,
            matrix_im: im,
            index_order: self.index_order.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CertificateJson = serde_json::from_str(s)?;
        let dim = doc.words.len();
        let bad_shape = |rows: &Vec<Vec<f64>>| rows.len() != dim || rows.iter().any(|r| r.len() != dim);
        if bad_shape(&doc.matrix) || doc.matrix_im.as_ref().is_some_and(bad_shape) {
            return Err(Error::Dimension(format!("matrix must be {dim}x{dim} to match the word index")));
        }
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            let im = doc.matrix_im.as_ref().map_or(0.0, |rows| rows[i][j]);
            Complex64::new(doc.matrix[i][j], im)
        });
        let mut cert = Self::from_parts(doc.n, doc.level, doc.mode, doc.words, m)?;
        cert.index_order = doc.index_order;
        Ok(cert)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    n: usize,
    level: usize,
    mode: Mode,
    words: Vec<Word>,
    matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix_im: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index_order: Option<String>,
}

/// Factor `L` with `L^† L = M` and one row per eigenvalue above `tol`.
/// Eigenvalues in `[-tol, tol]` are treated as zero.
pub fn gram_factor(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let dev = linalg::hermitian_deviation(m);
    if dev > tol.max(1e-12) {
        return Err(Error::NotHermitian(dev));
    }
    let (values, vectors) = linalg::eigh(&linalg::hermitian_part(m));
    if let Some(&min) = values.first() {
        if min < -tol {
            return Err(Error::NotPsd { min_eigenvalue: min, tol });
        }
    }
    let kept: Vec<usize> = (0..values.len()).rev().filter(|&i| values[i] > tol).collect();
    let dim = m.nrows();
    Ok(CMatrix::from_fn(kept.len(), dim, |r, col| {
        let i = kept[r];
        vectors[(col, i)].conj() * values[i].sqrt()
    }))
}
