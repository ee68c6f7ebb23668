//! Row-major matrix kernels shared by the dense and convolution layers.
//!
//! The loops are written so that the innermost iteration runs over
//! contiguous slices without bounds checks; element results are
//! bit-identical to the naive triple loop regardless of vector width.

use super::scalar::Scalar;

/// `c += a · b` where `a` is `m×k`, `b` is `k×n`, `c` is `m×n`.
///
/// Rows of `a` are processed four at a time so each loaded `b` row is
/// reused across four accumulator rows.
pub fn matmul_acc<T: Scalar>(a: &[T], b: &[T], m: usize, k: usize, n: usize, c: &mut [T]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    if n == 0 || k == 0 {
        return;
    }

    let mut row = 0;
    while row + 4 <= m {
        let (a0, a1, a2, a3) = (
            &a[row * k..(row + 1) * k],
            &a[(row + 1) * k..(row + 2) * k],
            &a[(row + 2) * k..(row + 3) * k],
            &a[(row + 3) * k..(row + 4) * k],
        );
        // Split the destination rows without overlapping borrows.
        let (c01, c23) = c[row * n..(row + 4) * n].split_at_mut(2 * n);
        let (c0, c1) = c01.split_at_mut(n);
        let (c2, c3) = c23.split_at_mut(n);
        for (kk, b_row) in b.chunks_exact(n).enumerate() {
            let (v0, v1, v2, v3) = (a0[kk], a1[kk], a2[kk], a3[kk]);
            for ((((y0, y1), y2), y3), &bv) in c0
                .iter_mut()
                .zip(c1.iter_mut())
                .zip(c2.iter_mut())
                .zip(c3.iter_mut())
                .zip(b_row.iter())
            {
                *y0 += v0 * bv;
                *y1 += v1 * bv;
                *y2 += v2 * bv;
                *y3 += v3 * bv;
            }
        }
        row += 4;
    }
    while row < m {
        let a_row = &a[row * k..(row + 1) * k];
        let c_row = &mut c[row * n..(row + 1) * n];
        for (kk, b_row) in b.chunks_exact(n).enumerate() {
            let v = a_row[kk];
            for (y, &bv) in c_row.iter_mut().zip(b_row.iter()) {
                *y += v * bv;
            }
        }
        row += 1;
    }
}

/// `c += aᵀ · b` where `a` is `m×k`, `b` is `m×n`, `c` is `k×n`.
///
/// Used for weight gradients: accumulates one rank-1 update per row pair.
pub fn matmul_at_b_acc<T: Scalar>(a: &[T], b: &[T], m: usize, k: usize, n: usize, c: &mut [T]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), m * n);
    debug_assert_eq!(c.len(), k * n);
    for (a_row, b_row) in a.chunks_exact(k).zip(b.chunks_exact(n)).take(m) {
        for (&av, c_row) in a_row.iter().zip(c.chunks_exact_mut(n)) {
            for (y, &bv) in c_row.iter_mut().zip(b_row.iter()) {
                *y += av * bv;
            }
        }
    }
}

/// Out-of-place transpose of an `m×n` row-major matrix into `n×m`.
pub fn transpose<T: Scalar>(a: &[T], m: usize, n: usize) -> Vec<T> {
    debug_assert_eq!(a.len(), m * n);
    let mut out = vec![T::ZERO; m * n];
    for (i, a_row) in a.chunks_exact(n).enumerate() {
        for (j, &v) in a_row.iter().enumerate() {
            out[j * m + i] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                for kk in 0..k {
                    c[i * n + j] += a[i * k + kk] * b[kk * n + j];
                }
            }
        }
        c
    }

    #[test]
    fn matmul_matches_naive() {
        for &(m, k, n) in &[(1usize, 1usize, 1usize), (3, 4, 5), (6, 2, 7), (9, 5, 3)] {
            let a: Vec<f64> = (0..m * k).map(|i| (i as f64) * 0.7 - 1.3).collect();
            let b: Vec<f64> = (0..k * n).map(|i| 0.5 - (i as f64) * 0.11).collect();
            let mut c = vec![0.0; m * n];
            matmul_acc(&a, &b, m, k, n, &mut c);
            let want = naive(&a, &b, m, k, n);
            for (got, want) in c.iter().zip(want.iter()) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn at_b_matches_transposed_naive() {
        let (m, k, n) = (5usize, 3usize, 4usize);
        let a: Vec<f64> = (0..m * k).map(|i| i as f64 * 0.3).collect();
        let b: Vec<f64> = (0..m * n).map(|i| 1.0 - i as f64 * 0.2).collect();
        let mut c = vec![0.0; k * n];
        matmul_at_b_acc(&a, &b, m, k, n, &mut c);
        let at = transpose(&a, m, k);
        let want = naive(&at, &b, k, m, n);
        for (got, want) in c.iter().zip(want.iter()) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
