//! Dense complex matrix helpers on top of `nalgebra`.
//!
//! Products go through `matrixmultiply::zgemm`, which is several times faster
//! than nalgebra's generic complex kernel at the bond dimensions used here.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Which form of an operand enters a product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    /// `A`
    Plain,
    /// `A†`
    Adjoint,
}

// Complex64 is #[repr(C)] { re, im }, layout-compatible with [f64; 2].
const _: () = assert!(std::mem::size_of::<C64>() == 16);

/// `c ← alpha·op(a)·op(b) + beta·c`.
pub fn gemm(alpha: C64, a: &CMatrix, op_a: Op, b: &CMatrix, op_b: Op, beta: C64, c: &mut CMatrix) {
    let conj_a;
    let (a_data, m, k, rsa, csa) = match op_a {
        Op::Plain => (a, a.nrows(), a.ncols(), 1isize, a.nrows() as isize),
        Op::Adjoint => {
            conj_a = a.map(|z| z.conj());
            (&conj_a, a.ncols(), a.nrows(), a.nrows() as isize, 1isize)
        }
    };
    let conj_b;
    let (b_data, kb, n, rsb, csb) = match op_b {
        Op::Plain => (b, b.nrows(), b.ncols(), 1isize, b.nrows() as isize),
        Op::Adjoint => {
            conj_b = b.map(|z| z.conj());
            (&conj_b, b.ncols(), b.nrows(), b.nrows() as isize, 1isize)
        }
    };
    assert_eq!(k, kb, "inner dimensions differ");
    assert_eq!((c.nrows(), c.ncols()), (m, n), "output shape");
    if m == 0 || n == 0 {
        return;
    }
    let rsc = 1isize;
    let csc = m as isize;
    // SAFETY: pointers come from live, correctly sized column-major buffers;
    // the strides describe those buffers exactly and c does not alias a or b.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a_data.as_ptr() as *const [f64; 2],
            rsa,
            csa,
            b_data.as_ptr() as *const [f64; 2],
            rsb,
            csb,
            [beta.re, beta.im],
            c.as_mut_ptr() as *mut [f64; 2],
            rsc,
            csc,
        );
    }
}

/// `op(a)·op(b)`.
pub fn mul(a: &CMatrix, op_a: Op, b: &CMatrix, op_b: Op) -> CMatrix {
    let m = if op_a == Op::Plain { a.nrows() } else { a.ncols() };
    let n = if op_b == Op::Plain { b.ncols() } else { b.nrows() };
    let mut c = CMatrix::zeros(m, n);
    gemm(C64::new(1.0, 0.0), a, op_a, b, op_b, C64::new(0.0, 0.0), &mut c);
    c
}

/// `a·b`.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    mul(a, Op::Plain, b, Op::Plain)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// `tr(a·b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `(a + a†)/2`.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the Hermitian part of
/// the input is used.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let h = hermitize(a);
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry modulus of `a − I`.
pub fn distance_from_identity(a: &CMatrix) -> f64 {
    assert!(a.is_square());
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Hilbert–Schmidt norm.
pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn from_real_diagonal(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) })
}

/// Row-major `[re, im]` pairs.
pub fn to_row_major_pairs(a: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(a.len());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let z = a[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub fn from_row_major_pairs(rows: usize, cols: usize, data: &[[f64; 2]]) -> Option<CMatrix> {
    (data.len() == rows * cols)
        .then(|| CMatrix::from_fn(rows, cols, |i, j| C64::new(data[i * cols + j][0], data[i * cols + j][1])))
}

/// Serde adapter writing a matrix as a list of rows of `[re, im]` pairs.
pub mod matrix_serde {
    use super::{CMatrix, C64};
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        Ok(CMatrix::from_fn(rows.len(), ncols, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
    }

    pub mod vec {
        use super::CMatrix;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        #[derive(Serialize, Deserialize)]
        struct Wrapped(#[serde(with = "super")] CMatrix);

        pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
            let wrapped: Vec<Wrapped> = ms.iter().cloned().map(Wrapped).collect();
            wrapped.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
            Ok(Vec::<Wrapped>::deserialize(d)?.into_iter().map(|w| w.0).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn gemm_matches_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(m, k, n) in &[(1, 1, 1), (3, 5, 2), (7, 4, 9), (16, 16, 16)] {
            let a = random(m, k, &mut rng);
            let b = random(k, n, &mut rng);
            let ah = random(k, m, &mut rng);
            let bh = random(n, k, &mut rng);
            let tol = 1e-12;
            assert!(max_abs(&(matmul(&a, &b) - &a * &b)) < tol);
            assert!(max_abs(&(mul(&ah, Op::Adjoint, &b, Op::Plain) - ah.adjoint() * &b)) < tol);
            assert!(max_abs(&(mul(&a, Op::Plain, &bh, Op::Adjoint) - &a * bh.adjoint())) < tol);
            assert!(
                max_abs(&(mul(&ah, Op::Adjoint, &bh, Op::Adjoint) - ah.adjoint() * bh.adjoint())) < tol
            );
            let c = random(k, m, &mut rng);
            assert!((trace(&(&a * &c)) - trace_of_product(&a, &c)).norm() < tol);
        }
    }

    #[test]
    fn accumulate() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(4, 4, &mut rng);
        let b = random(4, 4, &mut rng);
        let mut c = random(4, 4, &mut rng);
        let expected = &a * &b * C64::new(2.0, 0.0) + &c * C64::new(0.0, 1.0);
        gemm(C64::new(2.0, 0.0), &a, Op::Plain, &b, Op::Plain, C64::new(0.0, 1.0), &mut c);
        assert!(max_abs(&(c - expected)) < 1e-12);
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let d = from_real_diagonal(&[0.75, 0.25]);
        assert_eq!(hermitian_eigenvalues(&d), vec![0.25, 0.75]);
    }

    #[test]
    fn pairs_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(3, 2, &mut rng);
        let back = from_row_major_pairs(3, 2, &to_row_major_pairs(&a)).unwrap();
        assert_eq!(a, back);
        assert!(from_row_major_pairs(2, 2, &[[0.0, 0.0]]).is_none());
    }
}
