//! Small dense helpers.

use nalgebra::DMatrix;

use crate::scalar::Real;

/// Kronecker product `B ⊗ C`, the block matrix with blocks `b_ij·C`.
pub fn kron<T: Real>(b: &DMatrix<T>, c: &DMatrix<T>) -> DMatrix<T> {
    let (br, bc) = b.shape();
    let (cr, cc) = c.shape();
    DMatrix::from_fn(br * cr, bc * cc, |i, j| b[(i / cr, j / cc)] * c[(i % cr, j % cc)])
}

/// Frobenius inner product of equally shaped matrices.
pub fn inner<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_block_layout() {
        let (a, b, c, d) = (1.0, 2.0, 3.0, 4.0);
        let m = DMatrix::from_row_slice(2, 2, &[a, b, c, d]);
        let k = kron(&m, &m);
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                a * a,
                a * b,
                b * a,
                b * b,
                a * c,
                a * d,
                b * c,
                b * d,
                c * a,
                c * b,
                d * a,
                d * b,
                c * c,
                c * d,
                d * c,
                d * d,
            ],
        );
        assert_eq!(k, expected);
    }
}
