//! SIC-POVM and MUB correlations, their closed-form level-1 certificates and
//! factorizations, reference projection families used as oracles, and the
//! level-2 search harness.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::certificate::{Certificate, Correlation, Mode};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::solver::{self, SolverConfig, SolverReport, SolverStatus};
use crate::spanning::{self, SpanningReport, SpanningTolerances};

pub const MUB_INDEX_ORDER: &str = "basis-major";

/// Exact ratio of small integers rounded once to `f64`.
fn ratio(num: i64, den: i64) -> f64 {
    num as f64 / den as f64
}

fn check_dimension(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Input(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

/// Position of vector `i` of basis `x` (both 1-based) in the flattened MUB index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MubIndex {
    pub basis: usize,
    pub vector: usize,
}

impl MubIndex {
    /// 1-based flattened position `(x - 1) d + i`.
    pub fn flatten(self, d: usize) -> usize {
        (self.basis - 1) * d + self.vector
    }

    pub fn unflatten(pos: usize, d: usize) -> MubIndex {
        MubIndex { basis: (pos - 1) / d + 1, vector: (pos - 1) % d + 1 }
    }
}

/// `p(x, y) = 1/d` on the diagonal and `1/(d(d+1))` off it, for `N = d^2`.
pub fn p_sic(d: usize) -> Result<Correlation> {
    check_dimension(d)?;
    let di = d as i64;
    let n = d * d;
    Correlation::new(DMatrix::from_fn(n, n, |x, y| if x == y { ratio(1, di) } else { ratio(1, di * (di + 1)) }))
}

/// `1/d` on the diagonal, `0` within a basis, `1/d^2` across bases, for `N = d(d+1)`.
pub fn p_mub(d: usize) -> Result<Correlation> {
    check_dimension(d)?;
    let di = d as i64;
    let n = d * (d + 1);
    let p = DMatrix::from_fn(n, n, |r, s| {
        let a = MubIndex::unflatten(r + 1, d);
        let b = MubIndex::unflatten(s + 1, d);
        if a == b {
            ratio(1, di)
        } else if a.basis == b.basis {
            0.0
        } else {
            ratio(1, di * di)
        }
    });
    Ok(Correlation::new(p)?.with_index_order(MUB_INDEX_ORDER))
}

/// Closed-form level-1 certificate of `p_sic(d)`.
pub fn sic_t1(d: usize) -> Result<Certificate> {
    check_dimension(d)?;
    let di = d as i64;
    let n = d * d;
    let m = DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => ratio(1, di),
        _ if i == j => ratio(1, di),
        _ => ratio(1, di * (di + 1)),
    });
    Certificate::from_matrix(n, 1, Mode::Real, linalg::from_real(&m))
}

/// Diagonal entries `x_k = sqrt(d^2 - k) / sqrt((d+1)(d^2 - k + 1))` of the SIC factor.
pub fn sic_factor_diagonal(d: usize, k: usize) -> f64 {
    let dd = (d * d) as f64;
    let k = k as f64;
    ((dd - k) / ((d as f64 + 1.0) * (dd - k + 1.0))).sqrt()
}

/// Upper-triangular `d^2 x (d^2 + 1)` factor `L` with `L^T L = T_1` for SICs.
/// Row `k >= 1` is `x_k` on the diagonal followed by `-x_k / (d^2 - k)`.
pub fn sic_t1_factor(d: usize) -> Result<DMatrix<f64>> {
    check_dimension(d)?;
    let n = d * d;
    let mut l = DMatrix::zeros(n, n + 1);
    l[(0, 0)] = 1.0;
    for j in 1..=n {
        l[(0, j)] = 1.0 / d as f64;
    }
    for k in 1..n {
        let xk = sic_factor_diagonal(d, k);
        l[(k, k)] = xk;
        for j in k + 1..=n {
            l[(k, j)] = -xk / (n - k) as f64;
        }
    }
    Ok(l)
}

/// Orthogonal eigenvectors of the SIC `T_1` with their eigenvalues:
/// `2` once, `1/(d+1)` for `d^2 - 1` vectors, and `0` once.
pub fn sic_t1_eigensystem(d: usize) -> Result<Vec<(f64, DVector<f64>)>> {
    check_dimension(d)?;
    let n = d * d;
    let inv_d = 1.0 / d as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push((2.0, DVector::from_fn(n + 1, |i, _| if i == 0 { 1.0 } else { inv_d })));
    for k in 1..n {
        let v = DVector::from_fn(n + 1, |i, _| match i.cmp(&k) {
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => -1.0 / (n - k) as f64,
        });
        out.push((1.0 / (d as f64 + 1.0), v));
    }
    out.push((0.0, DVector::from_fn(n + 1, |i, _| if i == 0 { -1.0 } else { inv_d })));
    Ok(out)
}

/// Closed-form level-1 certificate of `p_mub(d)` in basis-major order.
pub fn mub_t1(d: usize) -> Result<Certificate> {
    check_dimension(d)?;
    let di = d as i64;
    let n = d * (d + 1);
    let m = DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => ratio(1, di),
        _ => {
            let a = MubIndex::unflatten(i, d);
            let b = MubIndex::unflatten(j, d);
            if a.basis != b.basis {
                ratio(1, di * di)
            } else if a.vector == b.vector {
                ratio(1, di)
            } else {
                0.0
            }
        }
    });
    Ok(Certificate::from_matrix(n, 1, Mode::Real, linalg::from_real(&m))?.with_index_order(Some(MUB_INDEX_ORDER)))
}

/// Entry `i` (1-based) of `v_k`: `0` before `k`, `1` at `k`, `-1/(d-k)` after.
fn mub_vk(d: usize, k: usize, i: usize) -> f64 {
    match i.cmp(&k) {
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => -1.0 / (d - k) as f64,
    }
}

/// `d^2 x (d^2 + d + 1)` factor `L` with `L^T L = T_1` for MUBs. `L^T` has a
/// unit first column, border `1/d`, and one block `C = [w_1 ... w_{d-1}]`
/// per basis with `w_k = sqrt((d-k) / (d(d-k+1))) v_k`.
pub fn mub_t1_factor(d: usize) -> Result<DMatrix<f64>> {
    check_dimension(d)?;
    let rows = d * d;
    let cols = d * (d + 1) + 1;
    let mut lt = DMatrix::zeros(cols, rows);
    lt[(0, 0)] = 1.0;
    for x in 1..=d + 1 {
        for i in 1..=d {
            let r = MubIndex { basis: x, vector: i }.flatten(d);
            lt[(r, 0)] = 1.0 / d as f64;
            for k in 1..d {
                let scale = ((d - k) as f64 / (d as f64 * (d - k + 1) as f64)).sqrt();
                lt[(r, 1 + (x - 1) * (d - 1) + (k - 1))] = scale * mub_vk(d, k, i);
            }
        }
    }
    Ok(lt.transpose())
}

/// Parameters `(a, b)` with `1 + a + d b = 0` and `1 + 2 d a b + (d-1) d b^2 = 0`,
/// taking the root with `b > 0`.
pub fn mub_null_parameters(d: usize) -> (f64, f64) {
    let df = d as f64;
    // eliminating a: (d^2 + d) b^2 + 2 d b - 1 = 0
    let b = (-df + (2.0 * df * df + df).sqrt()) / (df * df + df);
    (-1.0 - df * b, b)
}

/// Orthogonal eigenvectors of the MUB `T_1`: `(2d+1)/d` once, `1/d` for
/// `d^2 - 1` vectors, and the `d + 1` null vectors built from `(a, b)`.
pub fn mub_t1_eigensystem(d: usize) -> Result<Vec<(f64, DVector<f64>)>> {
    check_dimension(d)?;
    let n = d * (d + 1);
    let df = d as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(((2.0 * df + 1.0) / df, DVector::from_fn(n + 1, |i, _| if i == 0 { 1.0 } else { 1.0 / df })));
    for x in 1..=d + 1 {
        for k in 1..d {
            let v = DVector::from_fn(n + 1, |r, _| {
                if r == 0 {
                    return 0.0;
                }
                let idx = MubIndex::unflatten(r, d);
                if idx.basis == x {
                    mub_vk(d, k, idx.vector)
                } else {
                    0.0
                }
            });
            out.push((1.0 / df, v));
        }
    }
    let (a, b) = mub_null_parameters(d);
    for x in 1..=d + 1 {
        let v = DVector::from_fn(n + 1, |r, _| {
            if r == 0 {
                1.0
            } else if MubIndex::unflatten(r, d).basis == x {
                a
            } else {
                b
            }
        });
        out.push((0.0, v));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Sic,
    Mub,
}

/// Agreement of a closed-form `T_1` with its factor and spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct FactorCheck {
    pub family: Family,
    pub d: usize,
    /// `max |L^T L - T_1|`.
    pub factor_error: f64,
    /// Largest gap between the sorted numerical and closed-form spectra.
    pub eigenvalue_error: f64,
    pub rank: usize,
    /// MUB only: `max |T_1 u|` over the null vectors, and `|1 + a + d b|`.
    pub null_vector_error: Option<f64>,
    pub null_relation_error: Option<f64>,
    pub pass: bool,
}

/// Closed-form spectrum of `T_1`, ascending.
pub fn t1_spectrum(family: Family, d: usize) -> Vec<f64> {
    let df = d as f64;
    let mut v = match family {
        Family::Sic => {
            let mut v = vec![0.0, 2.0];
            v.extend(std::iter::repeat_n(1.0 / (df + 1.0), d * d - 1));
            v
        }
        Family::Mub => {
            let mut v = vec![0.0; d + 1];
            v.extend(std::iter::repeat_n(1.0 / df, d * d - 1));
            v.push((2.0 * df + 1.0) / df);
            v
        }
    };
    v.sort_by(f64::total_cmp);
    v
}

pub fn t1_factor(family: Family, d: usize) -> Result<DMatrix<f64>> {
    match family {
        Family::Sic => sic_t1_factor(d),
        Family::Mub => mub_t1_factor(d),
    }
}

pub fn check_t1_factor(family: Family, d: usize, rank_rel_tol: f64) -> Result<FactorCheck> {
    let t1 = match family {
        Family::Sic => sic_t1(d)?,
        Family::Mub => mub_t1(d)?,
    };
    let t = linalg::real_part(t1.matrix());
    let l = t1_factor(family, d)?;
    let factor_error = (l.transpose() * &l - &t).abs().max();
    let numeric = linalg::eigenvalues(t1.matrix());
    let eigenvalue_error =
        numeric.iter().zip(t1_spectrum(family, d)).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    let rank = linalg::numerical_rank(t1.matrix(), rank_rel_tol);
    let (null_vector_error, null_relation_error) = match family {
        Family::Sic => (None, None),
        Family::Mub => {
            let (a, b) = mub_null_parameters(d);
            let err = mub_t1_eigensystem(d)?
                .into_iter()
                .filter(|(lambda, _)| *lambda == 0.0)
                .map(|(_, u)| (&t * u).amax())
                .fold(0.0f64, f64::max);
            (Some(err), Some((1.0 + a + d as f64 * b).abs()))
        }
    };
    let pass = factor_error < 1e-12
        && eigenvalue_error < 1e-10
        && rank == d * d
        && null_vector_error.is_none_or(|e| e < 1e-10)
        && null_relation_error.is_none_or(|e| e < 1e-12);
    Ok(FactorCheck { family, d, factor_error, eigenvalue_error, rank, null_vector_error, null_relation_error, pass })
}

fn ket_bra(v: &DVector<Complex64>) -> CMatrix {
    v * v.adjoint()
}

fn pauli() -> [CMatrix; 3] {
    let i = Complex64::new(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    ]
}

/// Standard SICs: tetrahedral Bloch vectors for `d = 2`, and for `d = 3` the
/// clock-and-shift orbit of the fiducial `(0, 1, -1)/sqrt(2)`.
pub fn reference_sic(d: usize) -> Result<Vec<CMatrix>> {
    match d {
        2 => {
            let s = 1.0 / 3f64.sqrt();
            let bloch = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
            let sigma = pauli();
            Ok(bloch
                .iter()
                .map(|r| {
                    let mut p = CMatrix::identity(2, 2);
                    for (axis, &ri) in r.iter().enumerate() {
                        p += sigma[axis].map(|z| z * ri);
                    }
                    p.map(|z| z * 0.5)
                })
                .collect())
        }
        3 => {
            let h = 1.0 / 2f64.sqrt();
            let fiducial = DVector::from_vec(vec![c(0.0), c(h), c(-h)]);
            let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
            let mut out = Vec::with_capacity(9);
            for shift in 0..3 {
                for clock in 0..3 {
                    // X^shift Z^clock |psi>
                    let mut v = DVector::from_element(3, c(0.0));
                    for j in 0..3 {
                        v[(j + shift) % 3] = omega.powu((clock * j) as u32) * fiducial[j];
                    }
                    out.push(ket_bra(&v));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Unsupported(format!("no reference SIC shipped for d = {d}"))),
    }
}

pub fn is_prime(d: usize) -> bool {
    d >= 2 && (2..d).take_while(|q| q * q <= d).all(|q| !d.is_multiple_of(q))
}

/// The `d + 1` mutually unbiased bases of a prime dimension: the computational
/// basis, then (odd `d`) the quadratic-phase bases `omega^(a j^2 + b j)/sqrt(d)`,
/// or (`d = 2`) the eigenbases of the Pauli X and Y operators.
pub fn reference_mub_bases(d: usize) -> Result<Vec<Vec<DVector<Complex64>>>> {
    if !is_prime(d) {
        return Err(Error::Unsupported(format!("reference MUBs need a prime dimension, got {d}")));
    }
    let computational: Vec<DVector<Complex64>> =
        (0..d).map(|i| DVector::from_fn(d, |r, _| if r == i { c(1.0) } else { c(0.0) })).collect();
    let mut bases = vec![computational];
    let norm = 1.0 / (d as f64).sqrt();
    if d == 2 {
        let i = Complex64::new(0.0, 1.0);
        bases.push(vec![DVector::from_vec(vec![c(norm), c(norm)]), DVector::from_vec(vec![c(norm), c(-norm)])]);
        bases.push(vec![DVector::from_vec(vec![c(norm), i * norm]), DVector::from_vec(vec![c(norm), -i * norm])]);
    } else {
        for a in 0..d {
            let basis = (0..d)
                .map(|b| {
                    DVector::from_fn(d, |j, _| {
                        let phase = (a * j * j + b * j) % d;
                        Complex64::from_polar(norm, 2.0 * PI * phase as f64 / d as f64)
                    })
                })
                .collect();
            bases.push(basis);
        }
    }
    Ok(bases)
}

/// Rank-one projections of [`reference_mub_bases`], flattened basis-major.
pub fn reference_mubs(d: usize) -> Result<Vec<CMatrix>> {
    Ok(reference_mub_bases(d)?.iter().flatten().map(ket_bra).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchVerdict {
    SpanningConditionsMet,
    /// A level-2 point exists but misses the rank or nullity conditions. Says
    /// nothing about whether some other point meets them.
    InconclusiveConditionsUnmet,
    /// The solver stalled above tolerance. Heuristic only.
    InconclusiveStalled,
    InconclusiveNoConvergence,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub d: usize,
    pub solver: SolverReport,
    pub spanning: Option<SpanningReport>,
    pub verdict: SearchVerdict,
    pub message: String,
}

/// Level-2 feasibility for a correlation with claimed dimension `d`, followed
/// by the rank and nullity checks on whatever point the solver finds. A known
/// level-2 point (e.g. from reference projections) can be supplied as the start.
pub fn search_t2(
    p: &Correlation,
    d: usize,
    config: &SolverConfig,
    start: Option<&Certificate>,
    tols: &SpanningTolerances,
) -> Result<SearchReport> {
    let start_matrix = match start {
        Some(cert) => {
            if cert.n() != p.n() || cert.level() > 2 {
                return Err(Error::Input("starting certificate does not match the level-2 problem".into()));
            }
            Some(cert.matrix().clone())
        }
        None => None,
    };
    let solver = solver::solve_feasibility_from(p, 2, config, start_matrix.as_ref())?;
    let (spanning, verdict, message) = match (&solver.status, &solver.certificate) {
        (SolverStatus::Feasible, Some(cert)) => {
            let report = spanning::check_certificate(cert, d, tols)?;
            if report.pass {
                (
                    Some(report),
                    SearchVerdict::SpanningConditionsMet,
                    "level-2 certificate meets the spanning conditions".to_string(),
                )
            } else {
                (
                    Some(report),
                    SearchVerdict::InconclusiveConditionsUnmet,
                    "inconclusive: feasible point found, spanning conditions unmet".to_string(),
                )
            }
        }
        (SolverStatus::InfeasibleGap, _) => (
            None,
            SearchVerdict::InconclusiveStalled,
            "inconclusive: level-2 residual stalled above tolerance (heuristic, not a proof of nonexistence)"
                .to_string(),
        ),
        _ => (None, SearchVerdict::InconclusiveNoConvergence, "inconclusive: solver did not converge".to_string()),
    };
    Ok(SearchReport { d, solver, spanning, verdict, message })
}
