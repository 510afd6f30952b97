//! Value-semantic tensor-train container and its compressed-domain algebra.
//!
//! A tensor train (TT) represents an `N`-way tensor as a chain of 3-way cores;
//! the entry at a multi-index is the product of one matrix slice per core:
//!
//! ```text
//! T[i1, ..., iN] = C1[0, i1, :] * C2[:, i2, :] * ... * CN[:, iN, 0]
//! ```
//!
//! Core `n` has shape `(R_{n-1}, I_n, R_n)` with boundary ranks
//! `R_0 = R_N = 1`. A "state-output" variant keeps the trailing rank open
//! (`R_N = K > 1`); contracting such a tensor against an ordinary one leaves a
//! `K`-vector on the free edge, which is how the automaton state tensors
//! report their final state.

mod io;
mod ops;
mod round;

use ndarray::{Array1, Array2, Array3, ArrayD, ArrayViewD, Axis, IxDyn};

use crate::error::{Error, Result};

/// Default cap on dense materialization and exhaustive maximization.
pub const FULL_ENTRY_CAP: usize = 1 << 25;

/// Tensor train with explicit boundary ranks.
///
/// Immutable after construction; all operations return new values and are
/// safe to call concurrently. Reductions are sequential, so results are
/// deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct TTTensor {
    cores: Vec<Array3<f64>>,
    trailing_rank_open: bool,
}

impl TTTensor {
    /// Builds a TT from its cores, checking the rank chain. Boundary ranks
    /// must both be 1.
    pub fn new(cores: Vec<Array3<f64>>) -> Result<Self> {
        Self::build(cores, false)
    }

    /// Builds a state-output TT: the trailing rank may exceed 1, exposing
    /// `K = R_N` output channels.
    pub fn new_state(cores: Vec<Array3<f64>>) -> Result<Self> {
        Self::build(cores, true)
    }

    fn build(cores: Vec<Array3<f64>>, trailing_rank_open: bool) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::Shape("a TT needs at least one core".into()));
        }
        if cores[0].dim().0 != 1 {
            return Err(Error::Shape(format!(
                "leading rank must be 1, got {}",
                cores[0].dim().0
            )));
        }
        let last = cores.last().unwrap().dim().2;
        if !trailing_rank_open && last != 1 {
            return Err(Error::Shape(format!("trailing rank must be 1, got {last}")));
        }
        for w in cores.windows(2) {
            if w[0].dim().2 != w[1].dim().0 {
                return Err(Error::Shape(format!(
                    "adjacent cores disagree on shared rank: {} vs {}",
                    w[0].dim().2,
                    w[1].dim().0
                )));
            }
        }
        for c in &cores {
            if c.dim().1 == 0 || c.dim().0 == 0 || c.dim().2 == 0 {
                return Err(Error::Shape("core with a zero dimension".into()));
            }
        }
        let cores = cores
            .into_iter()
            .map(|c| c.as_standard_layout().into_owned())
            .collect();
        Ok(Self {
            cores,
            trailing_rank_open,
        })
    }

    /// Number of modes `N`.
    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mode_sizes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dim().1).collect()
    }

    /// The full rank chain `R_0, ..., R_N` (length `N + 1`).
    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.cores.iter().map(|c| c.dim().0).collect();
        r.push(self.cores.last().unwrap().dim().2);
        r
    }

    /// Internal ranks `R_1, ..., R_{N-1}`.
    pub fn internal_ranks(&self) -> Vec<usize> {
        let r = self.ranks();
        r[1..r.len() - 1].to_vec()
    }

    pub fn max_internal_rank(&self) -> usize {
        self.internal_ranks().into_iter().max().unwrap_or(1)
    }

    pub fn trailing_rank_open(&self) -> bool {
        self.trailing_rank_open
    }

    /// Number of output channels: trailing rank (1 when not open).
    pub fn channels(&self) -> usize {
        self.cores.last().unwrap().dim().2
    }

    pub fn cores(&self) -> &[Array3<f64>] {
        &self.cores
    }

    pub fn num_elements(&self) -> usize {
        self.cores.iter().map(|c| c.len()).sum()
    }

    fn num_entries_checked(&self) -> Option<usize> {
        self.mode_sizes()
            .iter()
            .try_fold(1usize, |acc, &i| acc.checked_mul(i))
    }

    /// Rank-1 tensor of all ones.
    pub fn ones(mode_sizes: &[usize]) -> Result<Self> {
        Self::rank_one(
            &mode_sizes
                .iter()
                .map(|&i| vec![1.0; i])
                .collect::<Vec<_>>(),
        )
    }

    /// Rank-1 tensor of all zeros.
    pub fn zeros(mode_sizes: &[usize]) -> Result<Self> {
        Self::rank_one(
            &mode_sizes
                .iter()
                .map(|&i| vec![0.0; i])
                .collect::<Vec<_>>(),
        )
    }

    /// Rank-1 indicator of a single multi-index.
    pub fn delta(mode_sizes: &[usize], index: &[usize]) -> Result<Self> {
        if index.len() != mode_sizes.len() {
            return Err(Error::Shape("delta: index length != N".into()));
        }
        let factors: Vec<Vec<f64>> = mode_sizes
            .iter()
            .zip(index)
            .map(|(&i, &k)| {
                if k >= i {
                    return Err(Error::Range(format!("delta index {k} >= mode size {i}")));
                }
                let mut v = vec![0.0; i];
                v[k] = 1.0;
                Ok(v)
            })
            .collect::<Result<_>>()?;
        Self::rank_one(&factors)
    }

    /// Rank-1 tensor from per-mode factor vectors.
    pub fn rank_one(factors: &[Vec<f64>]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Shape("rank_one: no factors".into()));
        }
        let cores = factors
            .iter()
            .map(|f| {
                Array3::from_shape_vec((1, f.len(), 1), f.clone())
                    .map_err(|e| Error::Shape(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    /// Random TT with entries drawn i.i.d. standard normal and the given
    /// uniform internal rank (clamped to what the mode sizes allow).
    pub fn random<R: rand::Rng + ?Sized>(
        mode_sizes: &[usize],
        rank: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let n = mode_sizes.len();
        if n == 0 {
            return Err(Error::Shape("random: no modes".into()));
        }
        let mut ranks = vec![1usize; n + 1];
        let mut left = 1usize;
        let mut rights = vec![1usize; n + 1];
        let mut right = 1usize;
        for k in (0..n).rev() {
            right = right.saturating_mul(mode_sizes[k]).min(1 << 30);
            rights[k] = right;
        }
        for k in 1..n {
            left = left.saturating_mul(mode_sizes[k - 1]).min(1 << 30);
            ranks[k] = rank.min(left).min(rights[k]);
        }
        let cores = (0..n)
            .map(|k| {
                Array3::from_shape_fn((ranks[k], mode_sizes[k], ranks[k + 1]), |_| {
                    let u: f64 = rng.random();
                    let v: f64 = rng.random();
                    // Box-Muller; avoids depending on rand_distr.
                    (-2.0 * u.max(1e-300).ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
                })
            })
            .collect();
        Self::new(cores)
    }

    /// Exact TT-SVD of a dense tensor: the result reproduces `dense` up to
    /// `rel_tol` in Frobenius norm.
    pub fn from_dense(dense: ArrayViewD<'_, f64>, rel_tol: f64) -> Result<Self> {
        let shape = dense.shape().to_vec();
        if shape.is_empty() {
            return Err(Error::Shape("from_dense: zero-dimensional input".into()));
        }
        let n = shape.len();
        let norm = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
        let budget = if n > 1 {
            rel_tol * norm / ((n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let total: usize = shape.iter().product();
        let mut rest = dense
            .to_owned()
            .into_shape_with_order((1, total))
            .map_err(|e| Error::Shape(e.to_string()))?;
        let mut cores = Vec::with_capacity(n);
        let mut r_left = 1usize;
        for (k, &i_k) in shape.iter().enumerate().take(n - 1) {
            let cols = rest.len() / (r_left * i_k);
            let m = rest
                .into_shape_with_order((r_left * i_k, cols))
                .map_err(|e| Error::Shape(e.to_string()))?;
            let (u, s, vt) = crate::linalg::svd(&crate::linalg::to_na(m.view()));
            let k_new = crate::linalg::truncation_rank(&s, budget, None);
            let mut core = Array3::zeros((r_left, i_k, k_new));
            for a in 0..r_left {
                for i in 0..i_k {
                    for b in 0..k_new {
                        core[(a, i, b)] = u[(a * i_k + i, b)];
                    }
                }
            }
            cores.push(core);
            let mut carry = Array2::zeros((k_new, cols));
            for a in 0..k_new {
                for j in 0..cols {
                    carry[(a, j)] = s[a] * vt[(a, j)];
                }
            }
            rest = carry;
            r_left = k_new;
            let _ = k;
        }
        let last = rest
            .into_shape_with_order((r_left, shape[n - 1], 1))
            .map_err(|e| Error::Shape(e.to_string()))?;
        cores.push(last);
        Self::new(cores)
    }

    fn check_index(&self, index: &[usize]) -> Result<()> {
        if index.len() != self.len() {
            return Err(Error::Shape(format!(
                "index has {} entries, tensor has {} modes",
                index.len(),
                self.len()
            )));
        }
        for (n, (&i, c)) in index.iter().zip(&self.cores).enumerate() {
            if i >= c.dim().1 {
                return Err(Error::Range(format!(
                    "index {i} >= mode size {} at mode {n}",
                    c.dim().1
                )));
            }
        }
        Ok(())
    }

    /// Entry at a multi-index: the left-to-right product of the selected
    /// core slices.
    pub fn evaluate(&self, index: &[usize]) -> Result<f64> {
        if self.trailing_rank_open {
            return Err(Error::Shape(
                "evaluate: tensor has an open trailing rank; contract it first".into(),
            ));
        }
        self.check_index(index)?;
        Ok(self.evaluate_channels(index)[0])
    }

    /// Like `evaluate` but returns the full trailing-edge vector; length 1
    /// for ordinary tensors, `K` for state tensors. Index must be in range.
    pub(crate) fn evaluate_channels(&self, index: &[usize]) -> Vec<f64> {
        let mut v = vec![1.0];
        for (&i, core) in index.iter().zip(&self.cores) {
            let (rl, _, rr) = core.dim();
            let mut next = vec![0.0; rr];
            for a in 0..rl {
                let va = v[a];
                if va == 0.0 {
                    continue;
                }
                for (b, slot) in next.iter_mut().enumerate() {
                    *slot += va * core[(a, i, b)];
                }
            }
            v = next;
        }
        v
    }

    /// Dense materialization (row-major multi-index order). For state
    /// tensors the channel axis is appended last. Guarded by an entry cap.
    pub fn full(&self) -> Result<ArrayD<f64>> {
        self.full_with_cap(FULL_ENTRY_CAP)
    }

    pub fn full_with_cap(&self, cap: usize) -> Result<ArrayD<f64>> {
        let total = self
            .num_entries_checked()
            .ok_or_else(|| Error::Resource("full: entry count overflows".into()))?;
        let total_out = total
            .checked_mul(self.channels())
            .ok_or_else(|| Error::Resource("full: entry count overflows".into()))?;
        if total_out > cap {
            return Err(Error::Resource(format!(
                "full: {total_out} entries exceed cap {cap}"
            )));
        }
        let mut b = Array2::from_elem((1, 1), 1.0);
        for core in &self.cores {
            let (rl, i, rr) = core.dim();
            let unfolded = core
                .to_owned()
                .into_shape_with_order((rl, i * rr))
                .expect("standard layout");
            let prod = b.dot(&unfolded);
            let p = prod.dim().0;
            b = prod
                .into_shape_with_order((p * i, rr))
                .expect("standard layout");
        }
        let mut shape = self.mode_sizes();
        if self.trailing_rank_open {
            shape.push(self.channels());
            Ok(b
                .into_shape_with_order(IxDyn(&shape))
                .expect("standard layout"))
        } else {
            Ok(b
                .index_axis(Axis(1), 0)
                .to_owned()
                .into_shape_with_order(IxDyn(&shape))
                .expect("standard layout"))
        }
    }

    /// Exact maximum entry and one attaining multi-index (ties broken by the
    /// smallest index in row-major order). Exhaustive: every multi-index is
    /// visited, streaming partial prefix products so that only `N` small
    /// vectors are alive at any time.
    pub fn max_entry(&self) -> Result<(f64, Vec<usize>)> {
        self.max_entry_with_cap(FULL_ENTRY_CAP)
    }

    pub fn max_entry_with_cap(&self, cap: usize) -> Result<(f64, Vec<usize>)> {
        if self.trailing_rank_open {
            return Err(Error::Shape("max_entry: open trailing rank".into()));
        }
        let total = self
            .num_entries_checked()
            .ok_or_else(|| Error::Resource("max_entry: entry count overflows".into()))?;
        if total > cap {
            return Err(Error::Resource(format!(
                "max_entry: {total} entries exceed cap {cap}; reduce the mode count or raise the cap"
            )));
        }
        let n = self.len();
        let modes = self.mode_sizes();
        let ranks = self.ranks();
        // prefix[k] holds the product of slices 0..k at the current digits.
        let mut prefix: Vec<Array1<f64>> = ranks.iter().map(|&r| Array1::zeros(r)).collect();
        prefix[0][0] = 1.0;
        let mut digits = vec![0usize; n];
        let step = |prefix: &mut Vec<Array1<f64>>, cores: &[Array3<f64>], q: usize, i: usize| {
            let core = &cores[q];
            let (rl, _, rr) = core.dim();
            let (head, tail) = prefix.split_at_mut(q + 1);
            let v = &head[q];
            let out = &mut tail[0];
            for b in 0..rr {
                let mut acc = 0.0;
                for a in 0..rl {
                    acc += v[a] * core[(a, i, b)];
                }
                out[b] = acc;
            }
        };
        for q in 0..n {
            step(&mut prefix, &self.cores, q, 0);
        }
        let mut best_val = prefix[n][0];
        let mut best_idx = digits.clone();
        loop {
            // Row-major odometer: bump the deepest digit that can advance.
            let mut pos = n;
            while pos > 0 {
                if digits[pos - 1] + 1 < modes[pos - 1] {
                    break;
                }
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            let p = pos - 1;
            digits[p] += 1;
            for d in digits.iter_mut().take(n).skip(p + 1) {
                *d = 0;
            }
            for q in p..n {
                step(&mut prefix, &self.cores, q, digits[q]);
            }
            let val = prefix[n][0];
            if val > best_val {
                best_val = val;
                best_idx = digits.clone();
            }
        }
        Ok((best_val, best_idx))
    }
}
