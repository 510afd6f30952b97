//! Automaton tensors over `{0,1}^N`.
//!
//! A TT with mode sizes all 2 can encode a weighted finite automaton that
//! reads the `N` bits of a variable tuple: each core's two slices are the
//! transition matrices for the input symbols `0` and `1`, the first core
//! fixes the initial state, and the last core either collapses the state to
//! an acceptance scalar (mask tensors) or leaves it on an open trailing
//! rank as a one-hot result vector (state tensors).
//!
//! Provided families, with `|a|` the number of set bits of the tuple `a` and
//! `len(a)` the distance from its first to its last set bit (inclusive,
//! `len(empty) = 0`):
//!
//! - [`hamming_weight_tt`]: entry `|a|`, rank 2.
//! - [`hamming_mask_tt`]: entry `1` iff `|a| <= n`, rank `n + 1`.
//! - [`hamming_state_tt`]: one-hot of `|a|` over `N + 1` channels.
//! - [`length_mask_tt`]: entry `1` iff `len(a) <= n`, rank `n + 1`.
//! - [`length_state_tt`]: one-hot of `len(a)` over `N + 1` channels.
//! - [`reciprocal_weight_tt`]: entry `1 / max(|a|, 1)`, low rank up to a
//!   requested relative accuracy.

use ndarray::Array3;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::tt::TTTensor;

/// Hamming weight tensor: entry at a binary tuple is its number of set
/// bits. Rank 2: a running counter plus a carry lane.
pub fn hamming_weight_tt(n: usize) -> TTTensor {
    assert!(n >= 1);
    if n == 1 {
        let core = Array3::from_shape_vec((1, 2, 1), vec![0.0, 1.0]).unwrap();
        return TTTensor::new(vec![core]).unwrap();
    }
    let mut cores = Vec::with_capacity(n);
    // First core: row (bit, 1).
    let mut first = Array3::zeros((1, 2, 2));
    for bit in 0..2 {
        first[(0, bit, 0)] = bit as f64;
        first[(0, bit, 1)] = 1.0;
    }
    cores.push(first);
    // Middle cores: [[1, 0], [bit, 1]].
    for _ in 1..n - 1 {
        let mut mid = Array3::zeros((2, 2, 2));
        for bit in 0..2 {
            mid[(0, bit, 0)] = 1.0;
            mid[(1, bit, 0)] = bit as f64;
            mid[(1, bit, 1)] = 1.0;
        }
        cores.push(mid);
    }
    // Last core: column (1, bit)^T.
    let mut last = Array3::zeros((2, 2, 1));
    for bit in 0..2 {
        last[(0, bit, 0)] = 1.0;
        last[(1, bit, 0)] = bit as f64;
    }
    cores.push(last);
    TTTensor::new(cores).unwrap()
}

/// Hamming mask: entry `1` where the tuple has at most `n` set bits, else
/// `0`. A DFA with accepting states `s_0..s_n` (dummy-encoded as one-hot
/// vectors of length `n + 1`; the rejecting state is the zero vector).
pub fn hamming_mask_tt(big_n: usize, n: usize) -> Result<TTTensor> {
    assert!(big_n >= 1);
    if n > big_n {
        return Err(Error::Domain(format!(
            "mask threshold {n} exceeds the mode count {big_n}"
        )));
    }
    let d = n + 1;
    if big_n == 1 {
        let mut core = Array3::zeros((1, 2, 1));
        core[(0, 0, 0)] = 1.0;
        core[(0, 1, 0)] = if n >= 1 { 1.0 } else { 0.0 };
        return TTTensor::new(vec![core]);
    }
    let mut cores = Vec::with_capacity(big_n);
    // Initial state: s_0 on '0', s_1 on '1' (reject immediately when n = 0).
    let mut first = Array3::zeros((1, 2, d));
    first[(0, 0, 0)] = 1.0;
    if n >= 1 {
        first[(0, 1, 1)] = 1.0;
    }
    cores.push(first);
    // Transitions: '0' keeps the state, '1' advances it (s_n drops to the
    // rejecting zero vector).
    for _ in 1..big_n - 1 {
        let mut mid = Array3::zeros((d, 2, d));
        for j in 0..d {
            mid[(j, 0, j)] = 1.0;
            if j + 1 < d {
                mid[(j, 1, j + 1)] = 1.0;
            }
        }
        cores.push(mid);
    }
    // Acceptance: any live state on '0'; on '1' all but s_n survive.
    let mut last = Array3::zeros((d, 2, 1));
    for j in 0..d {
        last[(j, 0, 0)] = 1.0;
        if j + 1 < d {
            last[(j, 1, 0)] = 1.0;
        }
    }
    cores.push(last);
    TTTensor::new(cores)
}

/// Hamming state tensor: maps each tuple to the one-hot encoding of its
/// weight over `N + 1` output channels. Same automaton as the mask families
/// but the last core keeps the middle-core shape, leaving the state on an
/// open trailing rank.
pub fn hamming_state_tt(n: usize) -> TTTensor {
    assert!(n >= 1);
    let d = n + 1;
    let mut cores = Vec::with_capacity(n);
    let mut first = Array3::zeros((1, 2, d));
    first[(0, 0, 0)] = 1.0;
    first[(0, 1, 1)] = 1.0;
    cores.push(first);
    for _ in 1..n {
        let mut mid = Array3::zeros((d, 2, d));
        for j in 0..d {
            mid[(j, 0, j)] = 1.0;
            if j + 1 < d {
                mid[(j, 1, j + 1)] = 1.0;
            }
        }
        cores.push(mid);
    }
    TTTensor::new_state(cores).unwrap()
}

/// Length mask: entry `1` where `len(a) <= n`. States `s_0..s_n` count the
/// span from the first set bit, saturating at `s_n`:
///
/// - `s_0` ignores leading zeros;
/// - between bits, a zero advances the counter exactly like a one does,
///   because the span keeps growing whether or not the bit is set;
/// - `s_n` absorbs zeros (the span already exceeds `n` *if* another set bit
///   arrives) and rejects on a further one.
pub fn length_mask_tt(big_n: usize, n: usize) -> Result<TTTensor> {
    assert!(big_n >= 1);
    if n > big_n {
        return Err(Error::Domain(format!(
            "length threshold {n} exceeds the mode count {big_n}"
        )));
    }
    let d = n + 1;
    if big_n == 1 {
        let mut core = Array3::zeros((1, 2, 1));
        core[(0, 0, 0)] = 1.0;
        core[(0, 1, 0)] = if n >= 1 { 1.0 } else { 0.0 };
        return TTTensor::new(vec![core]);
    }
    let mut cores = Vec::with_capacity(big_n);
    let mut first = Array3::zeros((1, 2, d));
    first[(0, 0, 0)] = 1.0;
    if n >= 1 {
        first[(0, 1, 1)] = 1.0;
    }
    cores.push(first);
    for _ in 1..big_n - 1 {
        let mut mid = Array3::zeros((d, 2, d));
        // '0': stay at s_0, advance from s_1..s_{n-1}, stay at s_n.
        mid[(0, 0, 0)] = 1.0;
        for j in 1..d {
            if j + 1 < d {
                mid[(j, 0, j + 1)] = 1.0;
            } else {
                mid[(j, 0, j)] = 1.0;
            }
        }
        // '1': advance everywhere; s_n rejects.
        for j in 0..d {
            if j + 1 < d {
                mid[(j, 1, j + 1)] = 1.0;
            }
        }
        cores.push(mid);
    }
    let mut last = Array3::zeros((d, 2, 1));
    for j in 0..d {
        last[(j, 0, 0)] = 1.0;
        if j + 1 < d {
            last[(j, 1, 0)] = 1.0;
        }
    }
    cores.push(last);
    TTTensor::new(cores)
}

/// Length state tensor: one-hot of `len(a)` over `N + 1` channels.
///
/// Tracking the exact span online needs two coupled counters — the span as
/// if the tuple ended at the last set bit seen, and the gap since that bit —
/// so the automaton runs on (span, gap) pairs and is afterwards compressed
/// to its minimal ranks by an exact rounding sweep. Those minimal ranks
/// grow like `2t` at bond `t` (strictly more than the `N + 1` needed by the
/// Hamming state tensor: no smaller encoding exists for the span).
pub fn length_state_tt(n: usize) -> TTTensor {
    assert!(n >= 1);
    if n == 1 {
        let mut core = Array3::zeros((1, 2, 2));
        core[(0, 0, 0)] = 1.0;
        core[(0, 1, 1)] = 1.0;
        return TTTensor::new_state(vec![core]).unwrap();
    }

    // States: None = no set bit yet, Some((span, gap)).
    type State = Option<(usize, usize)>;
    let advance = |s: State, bit: usize| -> State {
        match (s, bit) {
            (None, 0) => None,
            (None, _) => Some((1, 0)),
            (Some((span, gap)), 0) => Some((span, gap + 1)),
            (Some((span, gap)), _) => Some((span + gap + 1, 0)),
        }
    };

    // Enumerate reachable states position by position, in a deterministic
    // order, and emit one transition core per position.
    let mut states: Vec<State> = vec![None];
    let mut cores: Vec<Array3<f64>> = Vec::with_capacity(n);
    for pos in 0..n - 1 {
        let mut next: Vec<State> = Vec::new();
        let mut index_of = std::collections::HashMap::new();
        let mut core_entries: Vec<(usize, usize, usize)> = Vec::new();
        for (i, &s) in states.iter().enumerate() {
            for bit in 0..2 {
                let t = advance(s, bit);
                let j = *index_of.entry(t).or_insert_with(|| {
                    next.push(t);
                    next.len() - 1
                });
                core_entries.push((i, bit, j));
            }
        }
        let mut core = Array3::zeros((states.len(), 2, next.len()));
        for (i, bit, j) in core_entries {
            core[(i, bit, j)] = 1.0;
        }
        cores.push(core);
        states = next;
        let _ = pos;
    }
    // Last core: take the final transition and read out the span as a
    // one-hot channel (the empty tuple reports span 0).
    let mut last = Array3::zeros((states.len(), 2, n + 1));
    for (i, &s) in states.iter().enumerate() {
        for bit in 0..2 {
            let span = advance(s, bit).map_or(0, |(span, _)| span);
            last[(i, bit, span)] = 1.0;
        }
    }
    cores.push(last);
    let raw = TTTensor::new_state(cores).unwrap();
    // Exact compression: drops the unreachable combinations of the product
    // state space down to the minimal ranks.
    raw.round(1e-14, None)
}

/// Reciprocal Hamming weight: entry `1 / max(|a|, 1)` within `rel_tol`
/// relative error per entry. Returns the tensor and its achieved maximal
/// internal rank.
///
/// Built deterministically from an exponential-sum quadrature
/// `1/w ~ sum_j c_j exp(-t_j w)` on `w in [1, N]` (each term factorizes
/// over the bits into a rank-1 tensor), the entry at the empty tuple pinned
/// to 1 by a rank-1 correction, then rounded to the smallest rank that
/// still verifies the requested accuracy.
pub fn reciprocal_weight_tt(n: usize, rel_tol: f64) -> Result<(TTTensor, usize)> {
    assert!(n >= 1);
    if !(rel_tol > 0.0) {
        return Err(Error::Domain("rel_tol must be positive".into()));
    }
    const RANK_CAP: usize = 30;

    // Trapezoid discretization of 1/w = int exp(-w e^s + s) ds, tuned so the
    // quadrature error is well below rel_tol on [1, n].
    let eps = (rel_tol / 32.0).min(1e-7);
    let h = std::f64::consts::PI.powi(2) / (4.0 / eps).ln();
    let s_hi = (4.0f64 / eps).ln().ln();
    let s_lo = -(4.0 * n as f64 / eps).ln();
    let j_lo = (s_lo / h).floor() as i64;
    let j_hi = (s_hi / h).ceil() as i64;
    let nodes: Vec<(f64, f64)> = (j_lo..=j_hi)
        .map(|j| {
            let s = j as f64 * h;
            (s.exp(), h * s.exp()) // (decay rate t_j, weight c_j)
        })
        .collect();
    let j = nodes.len();

    // Assemble sum_j c_j prod_n exp(-t_j bit_n) as a single rank-J train.
    let mut cores = Vec::with_capacity(n);
    if n == 1 {
        let mut core = Array3::zeros((1, 2, 1));
        for bit in 0..2 {
            core[(0, bit, 0)] = nodes
                .iter()
                .map(|&(t, c)| c * (-t * bit as f64).exp())
                .sum();
        }
        cores.push(core);
    } else {
        let mut first = Array3::zeros((1, 2, j));
        for (k, &(t, c)) in nodes.iter().enumerate() {
            for bit in 0..2 {
                first[(0, bit, k)] = c * (-t * bit as f64).exp();
            }
        }
        cores.push(first);
        for _ in 1..n - 1 {
            let mut mid = Array3::zeros((j, 2, j));
            for (k, &(t, _)) in nodes.iter().enumerate() {
                for bit in 0..2 {
                    mid[(k, bit, k)] = (-t * bit as f64).exp();
                }
            }
            cores.push(mid);
        }
        let mut last = Array3::zeros((j, 2, 1));
        for (k, &(t, _)) in nodes.iter().enumerate() {
            for bit in 0..2 {
                last[(k, bit, 0)] = (-t * bit as f64).exp();
            }
        }
        cores.push(last);
    }
    let sum_tt = TTTensor::new(cores)?;
    // Pin the empty-tuple entry to 1.
    let at_empty = sum_tt.evaluate(&vec![0; n])?;
    let delta = TTTensor::delta(&vec![2; n], &vec![0; n])?.scale(1.0 - at_empty);
    let raw = sum_tt.add(&delta)?;

    // Find the loosest rounding that still verifies, i.e. the smallest rank.
    // The Frobenius tolerance spreads over 2^N entries, so it can start far
    // above the per-entry target.
    let mut tau = 0.1;
    while tau > 1e-16 {
        let rounded = raw.round(tau, Some(RANK_CAP));
        if verify_reciprocal(&rounded, n, rel_tol)? {
            let rank = rounded.max_internal_rank();
            if rank <= RANK_CAP {
                return Ok((rounded, rank));
            }
        }
        tau /= 2.0;
    }
    Err(Error::Approximation(format!(
        "reciprocal weight tensor did not reach rel_tol {rel_tol} within rank {RANK_CAP}"
    )))
}

/// Checks the relative entry error of a reciprocal-weight candidate:
/// exhaustively up to 16 modes, otherwise on every weight-class
/// representative plus a fixed random sample.
fn verify_reciprocal(t: &TTTensor, n: usize, rel_tol: f64) -> Result<bool> {
    let check = |idx: &[usize]| -> Result<bool> {
        let w: usize = idx.iter().sum();
        let want = 1.0 / (w.max(1) as f64);
        let got = t.evaluate(idx)?;
        Ok((got - want).abs() <= rel_tol * want)
    };
    if n <= 16 {
        let mut idx = vec![0usize; n];
        loop {
            if !check(&idx)? {
                return Ok(false);
            }
            let mut pos = n;
            while pos > 0 && idx[pos - 1] == 1 {
                idx[pos - 1] = 0;
                pos -= 1;
            }
            if pos == 0 {
                return Ok(true);
            }
            idx[pos - 1] = 1;
        }
    }
    for w in 0..=n {
        let mut idx = vec![0usize; n];
        for b in idx.iter_mut().take(w) {
            *b = 1;
        }
        if !check(&idx)? {
            return Ok(false);
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5EED_1CE5);
    for _ in 0..256 {
        let idx: Vec<usize> = (0..n).map(|_| usize::from(rng.random::<bool>())).collect();
        if !check(&idx)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::IxDyn;

    fn bits_of(idx: &[usize]) -> (usize, usize) {
        // (weight, length)
        let ones: Vec<usize> = idx
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
            .collect();
        let w = ones.len();
        let len = if ones.is_empty() {
            0
        } else {
            ones[ones.len() - 1] - ones[0] + 1
        };
        (w, len)
    }

    fn for_all_tuples(n: usize, mut f: impl FnMut(&[usize])) {
        let mut idx = vec![0usize; n];
        loop {
            f(&idx);
            let mut pos = n;
            while pos > 0 && idx[pos - 1] == 1 {
                idx[pos - 1] = 0;
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            idx[pos - 1] = 1;
        }
    }

    #[test]
    fn weight_tensor_counts_bits() {
        let w = hamming_weight_tt(3);
        assert_eq!(w.evaluate(&[1, 0, 1]).unwrap(), 2.0);
        assert_eq!(w.evaluate(&[1, 1, 1]).unwrap(), 3.0);
        assert!(w.internal_ranks().iter().all(|&r| r == 2));
        assert_eq!(w.num_elements(), 8 * 3 - 8);
        // Dense check for N = 10.
        let w10 = hamming_weight_tt(10);
        let full = w10.full().unwrap();
        for_all_tuples(10, |idx| {
            let (weight, _) = bits_of(idx);
            assert_eq!(full[IxDyn(idx)], weight as f64);
        });
    }

    #[test]
    fn weight_tensor_max_is_all_ones_tuple() {
        let w = hamming_weight_tt(3);
        let (v, idx) = w.max_entry().unwrap();
        assert_eq!(v, 3.0);
        assert_eq!(idx, vec![1, 1, 1]);
    }

    #[test]
    fn weight_dot_ones_sums_bit_counts() {
        let w = hamming_weight_tt(2);
        let ones = TTTensor::ones(&[2, 2]).unwrap();
        assert_eq!(w.dot(&ones).unwrap(), 4.0);
    }

    #[test]
    fn hamming_mask_thresholds_weight() {
        let m = hamming_mask_tt(3, 2).unwrap();
        assert_eq!(m.evaluate(&[1, 1, 1]).unwrap(), 0.0);
        assert_eq!(m.evaluate(&[0, 1, 1]).unwrap(), 1.0);
        let all = hamming_mask_tt(4, 4).unwrap();
        assert!(all.full().unwrap().iter().all(|&v| v == 1.0));
        assert!(hamming_mask_tt(3, 4).is_err());
        for n in 0..=12usize {
            let mask = hamming_mask_tt(12, n).unwrap();
            assert!(mask.internal_ranks().iter().all(|&r| r == n + 1));
            assert_eq!(
                mask.num_elements(),
                2 * (n + 1) * (n + 1) * (12 - 2) + 4 * (n + 1)
            );
            let full = mask.full().unwrap();
            for_all_tuples(12, |idx| {
                let (weight, _) = bits_of(idx);
                let want = if weight <= n { 1.0 } else { 0.0 };
                assert_eq!(full[IxDyn(idx)], want, "n={n} idx={idx:?}");
            });
        }
    }

    #[test]
    fn hamming_state_is_one_hot_weight() {
        let s = hamming_state_tt(5);
        assert!(s.trailing_rank_open());
        assert_eq!(s.channels(), 6);
        assert!(s.internal_ranks().iter().all(|&r| r == 6));
        let d = TTTensor::delta(&[2; 5], &[1, 0, 0, 0, 1]).unwrap();
        let v = d.state_contract(&s).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let empty = TTTensor::delta(&[2; 5], &[0; 5]).unwrap();
        let v = empty.state_contract(&s).unwrap();
        assert_eq!(v[0], 1.0);
        // Channelwise indicator for N = 10.
        let s10 = hamming_state_tt(10);
        let full = s10.full().unwrap();
        for_all_tuples(10, |idx| {
            let (weight, _) = bits_of(idx);
            for k in 0..=10usize {
                let mut fidx = idx.to_vec();
                fidx.push(k);
                let want = if k == weight { 1.0 } else { 0.0 };
                assert_eq!(full[IxDyn(&fidx)], want);
            }
        });
    }

    #[test]
    fn length_mask_thresholds_span() {
        // Reference tuples for N = 5, n = 3.
        let m = length_mask_tt(5, 3).unwrap();
        assert_eq!(m.evaluate(&[1, 0, 0, 0, 1]).unwrap(), 0.0); // len 5
        assert_eq!(m.evaluate(&[0, 0, 0, 0, 1]).unwrap(), 1.0); // len 1
        for n in 0..=12usize {
            let mask = length_mask_tt(12, n).unwrap();
            assert!(mask.internal_ranks().iter().all(|&r| r == n + 1));
            let full = mask.full().unwrap();
            for_all_tuples(12, |idx| {
                let (_, len) = bits_of(idx);
                let want = if len <= n { 1.0 } else { 0.0 };
                assert_eq!(full[IxDyn(idx)], want, "n={n} idx={idx:?}");
            });
        }
    }

    #[test]
    fn length_state_is_one_hot_span() {
        let s = length_state_tt(5);
        assert!(s.trailing_rank_open());
        assert_eq!(s.channels(), 6);
        let d = TTTensor::delta(&[2; 5], &[1, 0, 0, 0, 1]).unwrap();
        let v = d.state_contract(&s).unwrap();
        for (k, &x) in v.iter().enumerate() {
            let want = if k == 5 { 1.0 } else { 0.0 };
            assert!((x - want).abs() <= 1e-10, "channel {k}: {x}");
        }
        let empty = TTTensor::delta(&[2; 5], &[0; 5]).unwrap();
        let v = empty.state_contract(&s).unwrap();
        assert!((v[0] - 1.0).abs() <= 1e-10);
        // Channelwise indicator for N = 10, after rounding entries are
        // integral to far better than 1e-12.
        let s10 = length_state_tt(10);
        let full = s10.full().unwrap();
        for_all_tuples(10, |idx| {
            let (_, len) = bits_of(idx);
            for k in 0..=10usize {
                let mut fidx = idx.to_vec();
                fidx.push(k);
                let want = if k == len { 1.0 } else { 0.0 };
                assert!((full[IxDyn(&fidx)] - want).abs() <= 1e-12);
            }
        });
    }

    #[test]
    fn length_state_minimal_ranks_grow_linearly() {
        // The exact span tensor needs rank 2t at bond t; this documents the
        // profile so rank regressions are caught.
        for n in [4usize, 6, 9] {
            let s = length_state_tt(n);
            let ranks = s.internal_ranks();
            for (t, &r) in ranks.iter().enumerate() {
                let bound = (2 * (t + 1)).min(1 << (t + 1));
                assert!(r <= bound, "N={n} bond {t}: rank {r} > {bound}");
            }
        }
    }

    #[test]
    fn state_tensors_partition_unity() {
        for n in [3usize, 7] {
            for s in [hamming_state_tt(n), length_state_tt(n)] {
                let full = s.full().unwrap();
                for_all_tuples(n, |idx| {
                    let mut sum = 0.0;
                    for k in 0..=n {
                        let mut fidx = idx.to_vec();
                        fidx.push(k);
                        sum += full[IxDyn(&fidx)];
                    }
                    assert!((sum - 1.0).abs() <= 1e-10);
                });
            }
        }
    }

    #[test]
    fn mask_consistency_with_delta_dots() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let idx: Vec<usize> = (0..8).map(|_| usize::from(rng.random::<bool>())).collect();
            let n = rng.random_range(0..=8usize);
            let d = TTTensor::delta(&[2; 8], &idx).unwrap();
            let dot = d.dot(&hamming_mask_tt(8, n).unwrap()).unwrap();
            let (weight, _) = bits_of(&idx);
            let want = if weight <= n { 1.0 } else { 0.0 };
            assert!((dot - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn reciprocal_weight_small_exhaustive() {
        let (t, rank) = reciprocal_weight_tt(10, 1e-6).unwrap();
        assert!(rank <= 30);
        let full = t.full().unwrap();
        for_all_tuples(10, |idx| {
            let (w, _) = bits_of(idx);
            let want = 1.0 / (w.max(1) as f64);
            assert!(
                (full[IxDyn(idx)] - want).abs() <= 1e-6 * want,
                "idx {idx:?}"
            );
        });
    }

    #[test]
    fn reciprocal_weight_quarter_at_weight_four() {
        let (t, _) = reciprocal_weight_tt(8, 1e-8).unwrap();
        let v = t.evaluate(&[1, 1, 0, 1, 0, 0, 1, 0]).unwrap();
        assert!((v - 0.25).abs() <= 1e-8 * 0.25);
    }

    #[test]
    fn reciprocal_weight_n50_rank_profile() {
        // Per-entry accuracy at 1e-6 needs rank ~10 on [1, 50]; the
        // well-known rank-7 figure refers to the relative Frobenius error,
        // which a rank-7 recompression beats by a wide margin.
        let (t, rank) = reciprocal_weight_tt(50, 1e-6).unwrap();
        assert!(rank <= 12, "achieved rank {rank}");
        assert!((t.evaluate(&vec![0; 50]).unwrap() - 1.0).abs() <= 1e-6);
        // Truncate a high-accuracy base so the measured error is the
        // truncation itself, not the base's own approximation error.
        let (base, _) = reciprocal_weight_tt(50, 1e-9).unwrap();
        let r7 = base.round(0.0, Some(7));
        assert!(r7.max_internal_rank() <= 7);
        let diff = base.sub(&r7).unwrap();
        let frob = diff.frobenius_norm() / base.frobenius_norm();
        assert!(frob <= 1e-6, "rank-7 Frobenius error {frob:e}");
    }
}

