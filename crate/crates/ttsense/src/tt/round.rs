//! TT-SVD recompression.

use ndarray::{Array2, Array3};

use super::TTTensor;
use crate::linalg::{svd, thin_qr, to_na, to_nd, truncation_rank};

fn unfold_right(core: &Array3<f64>) -> Array2<f64> {
    let (rl, i, rr) = core.dim();
    core.to_owned()
        .into_shape_with_order((rl, i * rr))
        .expect("standard layout")
}

fn unfold_left(core: &Array3<f64>) -> Array2<f64> {
    let (rl, i, rr) = core.dim();
    core.to_owned()
        .into_shape_with_order((rl * i, rr))
        .expect("standard layout")
}

fn fold(m: Array2<f64>, rl: usize, i: usize, rr: usize) -> Array3<f64> {
    m.into_shape_with_order((rl, i, rr))
        .expect("standard layout")
}

impl TTTensor {
    /// Recompress within a relative Frobenius-norm tolerance:
    /// `||self - result|| <= rel_tol * ||self||`, with resulting ranks no
    /// larger than the originals (and at most `max_rank`, when given).
    ///
    /// Right-to-left orthogonalization followed by a left-to-right truncated
    /// SVD sweep; the error budget is split as `rel_tol / sqrt(N - 1)` per
    /// truncated bond. With `rel_tol = 0` this returns an exactly
    /// re-orthogonalized copy (only exact zero modes are dropped).
    pub fn round(&self, rel_tol: f64, max_rank: Option<usize>) -> TTTensor {
        let n = self.len();
        if n == 1 {
            return self.clone();
        }
        let mut cores = self.cores.clone();
        // Right-to-left sweep: make cores 1..N right-orthogonal via LQ
        // (computed as QR of the transpose), absorbing the triangular factor
        // into the neighbor on the left.
        for k in (1..n).rev() {
            let (rl, i, rr) = cores[k].dim();
            let m = to_na(unfold_right(&cores[k]).view());
            let (q, r) = thin_qr(&m.transpose());
            let keep = q.ncols();
            // New core: Q^T reshaped to (keep, i, rr).
            cores[k] = fold(to_nd(&q.transpose()), keep, i, rr);
            // Absorb R^T on the right of the previous core.
            let prev = to_na(unfold_left(&cores[k - 1]).view());
            let merged = prev * r.transpose();
            let (pl, pi, _) = cores[k - 1].dim();
            cores[k - 1] = fold(to_nd(&merged), pl, pi, keep);
            let _ = rl;
        }
        // After the sweep the whole norm sits in the first core.
        let norm = cores[0].iter().map(|v| v * v).sum::<f64>().sqrt();
        let budget = rel_tol * norm / ((n - 1) as f64).sqrt();
        // Left-to-right truncation sweep.
        for k in 0..n - 1 {
            let (rl, i, rr) = cores[k].dim();
            let m = to_na(unfold_left(&cores[k]).view());
            let (u, s, vt) = svd(&m);
            let keep = truncation_rank(&s, budget, max_rank);
            let u_k = u.columns(0, keep).into_owned();
            cores[k] = fold(to_nd(&u_k), rl, i, keep);
            // carry = diag(s) * V^T, truncated.
            let mut carry = nalgebra::DMatrix::zeros(keep, vt.ncols());
            for a in 0..keep {
                for j in 0..vt.ncols() {
                    carry[(a, j)] = s[a] * vt[(a, j)];
                }
            }
            let next = to_na(unfold_right(&cores[k + 1]).view());
            let merged = carry * next;
            let (_, ni, nr) = cores[k + 1].dim();
            cores[k + 1] = fold(to_nd(&merged), keep, ni, nr);
            let _ = rr;
        }
        TTTensor {
            cores,
            trailing_rank_open: self.trailing_rank_open,
        }
    }
}
