//! Dense linear-algebra helpers shared by the certificate, solver and rank code.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Dense complex matrix. Real-mode data keeps all imaginary parts at zero.
pub type CMatrix = DMatrix<Complex64>;

pub const DEFAULT_RANK_TOL: f64 = 1e-9;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(c)
}

pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_imag(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
}

/// `max |M - M^†|` entrywise.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    if n != m.ncols() {
        return f64::INFINITY;
    }
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
/// Matrices with no imaginary content take the real symmetric path.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let (values, vectors) = if max_imag(m) == 0.0 {
        let e = SymmetricEigen::new(real_part(m));
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), from_real(&e.eigenvectors))
    } else {
        let e = SymmetricEigen::new(m.clone());
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |r, col| vectors[(r, order[col])]);
    (sorted_values, sorted_vectors)
}

pub fn eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = if max_imag(m) == 0.0 {
        real_part(m).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = if max_imag(m) == 0.0 {
        real_part(m).singular_values().iter().copied().collect()
    } else {
        m.singular_values().iter().copied().collect()
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol * sigma_max * max(rows, cols)`.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else {
        return 0;
    };
    if smax == 0.0 {
        return 0;
    }
    let cutoff = rel_tol * smax * m.nrows().max(m.ncols()) as f64;
    s.iter().filter(|&&x| x > cutoff).count()
}

/// Real embedding `[[Re, -Im], [Im, Re]]` of a complex matrix.
pub fn real_embedding(m: &CMatrix) -> DMatrix<f64> {
    let (r, cols) = m.shape();
    DMatrix::from_fn(2 * r, 2 * cols, |i, j| {
        let z = m[(i % r, j % cols)];
        match (i < r, j < cols) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_zero_and_identity() {
        assert_eq!(numerical_rank(&CMatrix::zeros(4, 4), DEFAULT_RANK_TOL), 0);
        assert_eq!(numerical_rank(&CMatrix::identity(5, 5), DEFAULT_RANK_TOL), 5);
        assert_eq!(numerical_rank(&CMatrix::zeros(0, 3), DEFAULT_RANK_TOL), 0);
    }

    #[test]
    fn rank_ignores_tiny_singular_values() {
        let mut m = CMatrix::identity(3, 3);
        m[(2, 2)] = c(1e-13);
        assert_eq!(numerical_rank(&m, DEFAULT_RANK_TOL), 2);
        m[(2, 2)] = c(1e-6);
        assert_eq!(numerical_rank(&m, DEFAULT_RANK_TOL), 3);
    }

    #[test]
    fn complex_eigh_reconstructs() {
        let i = Complex64::new(0.0, 1.0);
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0), i, -i, c(2.0)]);
        let (vals, vecs) = eigh(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(2, vals.iter().map(|&x| c(x))));
        let back = &vecs * d * vecs.adjoint();
        assert!(max_abs_diff(&back, &m) < 1e-12);
    }

    #[test]
    fn embedding_doubles_spectrum() {
        let i = Complex64::new(0.0, 1.0);
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0), i, -i, c(-1.0)]);
        let mut emb: Vec<f64> = real_embedding(&m).symmetric_eigenvalues().iter().copied().collect();
        emb.sort_by(f64::total_cmp);
        let ev = eigenvalues(&m);
        for (k, v) in ev.iter().enumerate() {
            assert!((emb[2 * k] - v).abs() < 1e-12 && (emb[2 * k + 1] - v).abs() < 1e-12);
        }
    }
}
