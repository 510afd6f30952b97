//! Small dense linear-algebra helpers shared by the TT routines.
//!
//! Tensor cores are stored as `ndarray` arrays; factorizations go through
//! `nalgebra`, which has pure-Rust deterministic SVD/QR. These bridges keep
//! the conversion noise in one place.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};

pub fn to_na(a: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_row_iterator(a.nrows(), a.ncols(), a.iter().cloned())
}

pub fn to_nd(m: &DMatrix<f64>) -> Array2<f64> {
    let (r, c) = m.shape();
    Array2::from_shape_fn((r, c), |(i, j)| m[(i, j)])
}

/// Kronecker product, row-major convention: `out[(i1*r2+i2),(j1*c2+j2)] = a[i1,j1]*b[i2,j2]`.
pub fn kron(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i1 in 0..ar {
        for j1 in 0..ac {
            let v = a[(i1, j1)];
            if v == 0.0 {
                continue;
            }
            for i2 in 0..br {
                for j2 in 0..bc {
                    out[(i1 * br + i2, j1 * bc + j2)] = v * b[(i2, j2)];
                }
            }
        }
    }
    out
}

/// Thin QR of an `m x n` matrix with `m >= n` or `m < n` alike:
/// returns `(q, r)` with `q: m x k`, `r: k x n`, `k = min(m, n)`.
pub fn thin_qr(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = a.nrows().min(a.ncols());
    let qr = a.clone().qr();
    let q = qr.q().columns(0, k).into_owned();
    let r = qr.r().rows(0, k).into_owned();
    (q, r)
}

/// Singular value decomposition with descending singular values:
/// `a = u * diag(s) * v_t`, thin factors.
pub fn svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = a
        .clone()
        .svd(true, true);
    let u = svd.u.expect("svd: U requested");
    let vt = svd.v_t.expect("svd: V^T requested");
    let s = svd.singular_values.iter().cloned().collect();
    (u, s, vt)
}

/// Truncation rank for a descending singular spectrum: the smallest `k` such
/// that the discarded tail satisfies `sum_{j>=k} s_j^2 <= budget^2`. Always at
/// least 1, and capped by `max_rank` when given.
pub fn truncation_rank(s: &[f64], budget: f64, max_rank: Option<usize>) -> usize {
    let mut tail = 0.0;
    let mut k = s.len();
    // Walk the spectrum backwards accumulating the discarded energy.
    while k > 1 {
        let next = tail + s[k - 1] * s[k - 1];
        if next > budget * budget {
            break;
        }
        tail = next;
        k -= 1;
    }
    if let Some(cap) = max_rank {
        k = k.min(cap.max(1));
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn kron_of_small_matrices() {
        let a = array![[1.0, 2.0]];
        let b = array![[0.0, 1.0], [3.0, 0.0]];
        let k = kron(a.view(), b.view());
        assert_eq!(k.dim(), (2, 4));
        assert_eq!(k, array![[0.0, 1.0, 0.0, 2.0], [3.0, 0.0, 6.0, 0.0]]);
    }

    #[test]
    fn svd_is_sorted_and_reconstructs() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let (u, s, vt) = svd(&a);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let rec = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s.clone())) * &vt;
        assert!((&a - &rec).norm() < 1e-12);
    }

    #[test]
    fn truncation_rank_respects_budget() {
        let s = [4.0, 2.0, 1.0, 0.5];
        assert_eq!(truncation_rank(&s, 0.0, None), 4);
        assert_eq!(truncation_rank(&s, 1.2, None), 2); // tail {1, 0.5} has energy 1.25 <= 1.44
        assert_eq!(truncation_rank(&s, 100.0, None), 1);
        assert_eq!(truncation_rank(&s, 0.0, Some(2)), 2);
    }
}
