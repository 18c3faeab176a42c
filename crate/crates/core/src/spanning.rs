//! The matricially-spanning test: a level-2 certificate whose level-1 and
//! level-2 ranks both equal `d^2` and whose commutator matrix `S_M` has a
//! one-dimensional kernel certifies projections spanning all of `M_d`.
//!
//! For `T = sum_i t_i P_i` to commute with every `P_k` we need
//! `<x|[T, P_k]|y> = sum_i t_i (M[ix][ky] - M[kx][iy]) = 0` for all words
//! `x, y` of length at most one. Stacking these `N x N` blocks gives `S_M`;
//! its kernel maps onto the central elements in the span of the projections.
//! When the projections are linearly dependent (every complete basis sums to
//! the identity) the kernel also contains the coefficient vectors of the zero
//! operator, so the raw nullity exceeds the dimension of that central span.
//! Both numbers are reported; the verdict uses the central dimension.

use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, ValidationReport, ValidationTolerances};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, DEFAULT_RANK_TOL};
use crate::words::Word;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanningTolerances {
    pub rank_rel_tol: f64,
    pub nullity_rel_tol: f64,
    pub validation: ValidationTolerances,
    /// Also compute the nullity from the SVD of `S_M` itself.
    pub svd_cross_check: bool,
}

impl Default for SpanningTolerances {
    fn default() -> Self {
        SpanningTolerances {
            rank_rel_tol: DEFAULT_RANK_TOL,
            nullity_rel_tol: DEFAULT_RANK_TOL,
            validation: ValidationTolerances::default(),
            svd_cross_check: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanningReport {
    pub d: usize,
    pub n: usize,
    pub rank_t1: usize,
    pub rank_t2: usize,
    /// Raw kernel dimension of `S_M`.
    pub nullity: usize,
    pub nullity_svd: Option<usize>,
    /// Dimension of `{sum_i t_i P_i : t in ker S_M}`, measured through the
    /// Gram matrix of the letter vectors `|i>`.
    pub center_dimension: usize,
    pub validation: ValidationReport,
    pub ranks_pass: bool,
    pub center_pass: bool,
    pub pass: bool,
    pub tolerances: SpanningTolerances,
}

/// Stacks the blocks `S(x, y)[k][i] = M[ix][ky] - M[kx][iy]` over words
/// `x, y` of length at most one (empty word first), `x` outermost.
pub fn build_s_m(t2: &Certificate) -> Result<CMatrix> {
    if t2.level() != 2 {
        return Err(Error::Input(format!("S_M needs a level-2 certificate, got level {}", t2.level())));
    }
    let n = t2.n();
    let short: Vec<Word> = std::iter::once(Word::empty()).chain((1..=n as u32).map(Word::letter)).collect();
    let prefixed = |letter: usize, w: &Word| Word::letter(letter as u32).concat(w);
    let mut s = CMatrix::zeros(short.len() * short.len() * n, n);
    let mut block = 0;
    for x in &short {
        for y in &short {
            for k in 1..=n {
                for i in 1..=n {
                    let v = t2.entry(&prefixed(i, x), &prefixed(k, y))? - t2.entry(&prefixed(k, x), &prefixed(i, y))?;
                    s[(block * n + k - 1, i - 1)] = v;
                }
            }
            block += 1;
        }
    }
    Ok(s)
}

/// Kernel dimension of `S` through the `N x N` Gram matrix `S^† S`.
pub fn nullity(s: &CMatrix, rel_tol: f64) -> usize {
    let gram = s.adjoint() * s;
    s.ncols() - linalg::numerical_rank(&gram, rel_tol)
}

/// Orthonormal basis (as columns) of the numerical kernel of `S`.
pub fn kernel_basis(s: &CMatrix, rel_tol: f64) -> CMatrix {
    let gram = s.adjoint() * s;
    let rank = linalg::numerical_rank(&gram, rel_tol);
    let (_, vectors) = linalg::eigh(&linalg::hermitian_part(&gram));
    let k = s.ncols() - rank;
    vectors.columns(0, k).into_owned()
}

/// Dimension of the span of `sum_i t_i |i>` over `t` in the kernel of `S_M`,
/// where the letter vectors have Gram matrix `M[i][j]`.
pub fn center_dimension(t2: &Certificate, s: &CMatrix, rel_tol: f64) -> Result<usize> {
    let n = t2.n();
    let mut gram = CMatrix::zeros(n, n);
    for i in 1..=n {
        for j in 1..=n {
            gram[(i - 1, j - 1)] = t2.entry(&Word::letter(i as u32), &Word::letter(j as u32))?;
        }
    }
    let k = kernel_basis(s, rel_tol);
    if k.ncols() == 0 {
        return Ok(0);
    }
    let reduced = k.adjoint() * gram * &k;
    Ok(linalg::numerical_rank(&reduced, rel_tol))
}

/// Kernel dimension of `S` from its own singular values.
pub fn nullity_svd(s: &CMatrix, rel_tol: f64) -> usize {
    s.ncols() - linalg::numerical_rank(s, rel_tol)
}

pub fn check_matricially_spanning(
    t1: &Certificate,
    t2: &Certificate,
    d: usize,
    tols: &SpanningTolerances,
) -> Result<SpanningReport> {
    let restricted = t2.restrict(1);
    if t1.level() != 1 || t1.n() != t2.n() || t1.words() != restricted.words() {
        return Err(Error::Dimension("T1 is not the level-1 restriction of T2".into()));
    }
    let gap = linalg::max_abs_diff(t1.matrix(), restricted.matrix());
    if gap > tols.validation.tol_class {
        return Err(Error::Input(format!("T1 differs from the level-1 block of T2 by {gap:.3e}")));
    }
    let p = t2.correlation()?;
    let validation = t2.validate(Some(&p), tols.validation);
    let rank_t1 = linalg::numerical_rank(t1.matrix(), tols.rank_rel_tol);
    let rank_t2 = linalg::numerical_rank(t2.matrix(), tols.rank_rel_tol);
    let s = build_s_m(t2)?;
    let nullity = nullity(&s, tols.nullity_rel_tol);
    let nullity_svd = tols.svd_cross_check.then(|| nullity_svd(&s, tols.nullity_rel_tol));
    let center_dimension = center_dimension(t2, &s, tols.nullity_rel_tol)?;
    let ranks_pass = rank_t1 == d * d && rank_t2 == d * d;
    let center_pass = center_dimension == 1;
    Ok(SpanningReport {
        d,
        n: t2.n(),
        rank_t1,
        rank_t2,
        nullity,
        nullity_svd,
        center_dimension,
        pass: ranks_pass && center_pass && validation.pass,
        validation,
        ranks_pass,
        center_pass,
        tolerances: *tols,
    })
}

/// [`check_matricially_spanning`] with `T1` taken from `T2` itself.
pub fn check_certificate(t2: &Certificate, d: usize, tols: &SpanningTolerances) -> Result<SpanningReport> {
    check_matricially_spanning(&t2.restrict(1), t2, d, tols)
}
