#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use syncnpa::linalg::CMatrix;
use syncnpa::Word;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Orthogonal projection of rank `1..=d` onto the span of random columns.
pub fn random_projection(rng: &mut ChaCha8Rng, d: usize, complex: bool) -> CMatrix {
    let rank = rng.random_range(1..=d);
    let m = CMatrix::from_fn(d, d, |_, _| {
        let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
        Complex64::new(rng.random_range(-1.0..1.0), im)
    });
    let q = m.qr().q();
    let cols = q.columns(0, rank);
    cols * cols.adjoint()
}

pub fn random_family(rng: &mut ChaCha8Rng, d: usize, n: usize, complex: bool) -> Vec<CMatrix> {
    (0..n).map(|_| random_projection(rng, d, complex)).collect()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let im = if i == j { 0.0 } else { rng.random_range(-1.0..1.0) };
            let z = Complex64::new(rng.random_range(-1.0..1.0), im);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

pub fn random_psd(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let b = random_hermitian(rng, d);
    &b * b.adjoint()
}

/// `Tr(P_{w_1} ... P_{w_n}) / d`, with the empty word giving 1.
pub fn normalized_trace(family: &[CMatrix], w: &Word) -> Complex64 {
    let d = family[0].nrows();
    let mut acc = CMatrix::identity(d, d);
    for &x in w.letters() {
        acc *= &family[x as usize - 1];
    }
    acc.trace() / d as f64
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn real_matrix(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}
