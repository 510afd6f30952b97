//! Aggregate sensitivity metrics, computed as contractions between the
//! Sobol TT and the automaton tensors:
//!
//! - mean dimension: dot product with the Hamming weight tensor;
//! - dimension distribution: contraction against the Hamming state tensor;
//! - effective dimension, superposition sense: cumulative scan of the
//!   dimension distribution;
//! - effective dimension, truncation sense: entry maximization of the
//!   closed tensor under Hamming masks of growing threshold;
//! - effective dimension, successive sense: cumulative scan of the length
//!   spectrum (contraction against the length state tensor);
//! - Shapley values: closed transform of the Sobol TT weighted by the
//!   reciprocal Hamming weight, read at the singleton tuples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masks;
use crate::sobol::{closed_transform, SobolTt};
use crate::tt::TTTensor;

/// Threshold at which a nonzero empty-tuple residual in a contraction is
/// treated as a broken Sobol tensor rather than compression noise.
const RESIDUAL_ERROR_THRESHOLD: f64 = 1e-3;

/// Rounding applied after Hadamard products inside the metric pipelines;
/// far below every reported tolerance, it only tames the rank growth.
const PIPELINE_ROUND_TOL: f64 = 1e-12;

/// Variance mass per interaction order `1..=N`, plus whatever the
/// contraction left at order 0 (compression residual of the empty tuple).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionDistribution {
    /// Mass at orders `1..=N`; `mass[k]` is order `k + 1`.
    pub mass: Vec<f64>,
    /// Mass reported at order 0.
    pub residual: f64,
}

impl DimensionDistribution {
    pub fn sum(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Expected order under the distribution.
    pub fn expected_order(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(k, &m)| (k + 1) as f64 * m)
            .sum()
    }
}

/// An effective dimension together with the relative variance it captures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDimension {
    pub order: usize,
    pub achieved: f64,
}

/// Truncation-sense effective dimension: the best variable tuple of the
/// winning size and the scan of maxima for orders `1..=order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationDimension {
    pub order: usize,
    pub achieved: f64,
    /// 1-based variables of an attaining tuple.
    pub variables: Vec<usize>,
    /// `max_a { S^C_a : |a| <= n }` for `n = 1..=order`.
    pub scan: Vec<f64>,
}

/// Everything in one bundle, serializable as a stable JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub epsilon: f64,
    pub mean_dimension: f64,
    pub dimension_distribution: Vec<f64>,
    pub dimension_residual: f64,
    pub effective_superposition: EffectiveDimension,
    pub effective_truncation: TruncationDimension,
    pub effective_successive: EffectiveDimension,
    pub shapley: Vec<f64>,
    pub first_order: Vec<f64>,
    pub totals: Vec<f64>,
    /// `|D_S - sum_n S^T_n|`, which vanishes for an exact index tensor.
    pub liu_owen_discrepancy: f64,
}

/// Mean dimension `D_S = sum_a S_a |a|` as `<S, W>`.
pub fn mean_dimension(s: &SobolTt) -> f64 {
    let w = masks::hamming_weight_tt(s.dimension());
    s.tensor().dot(&w).expect("conforming shapes")
}

/// Dimension distribution `nu(n) = sum_{|a| = n} S_a` for `n = 1..=N`.
pub fn dimension_distribution(s: &SobolTt) -> Result<DimensionDistribution> {
    let state = masks::hamming_state_tt(s.dimension());
    let channels = s.tensor().state_contract(&state)?;
    split_spectrum(channels, "Sobol tensor not zeroed at the empty tuple")
}

fn split_spectrum(channels: Vec<f64>, complaint: &str) -> Result<DimensionDistribution> {
    let residual = channels[0];
    if residual.abs() > RESIDUAL_ERROR_THRESHOLD {
        return Err(Error::Consistency(format!(
            "{complaint}: order-0 residual {residual:.3e}"
        )));
    }
    Ok(DimensionDistribution {
        mass: channels[1..].to_vec(),
        residual,
    })
}

/// First `n` whose cumulative mass reaches `1 - epsilon`; falls back to
/// `(N, cumulative(N))` when the threshold is never reached.
fn cumulative_scan(mass: &[f64], epsilon: f64) -> EffectiveDimension {
    let mut acc = 0.0;
    for (k, &m) in mass.iter().enumerate() {
        acc += m;
        if acc >= 1.0 - epsilon {
            return EffectiveDimension {
                order: k + 1,
                achieved: acc,
            };
        }
    }
    EffectiveDimension {
        order: mass.len(),
        achieved: acc,
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon {epsilon} outside (0, 1)")));
    }
    Ok(())
}

/// Effective dimension in the superposition sense: the smallest interaction
/// order whose cumulative variance reaches `1 - epsilon`.
pub fn effective_superposition(s: &SobolTt, epsilon: f64) -> Result<EffectiveDimension> {
    check_epsilon(epsilon)?;
    let nu = dimension_distribution(s)?;
    Ok(cumulative_scan(&nu.mass, epsilon))
}

/// Effective dimension in the truncation sense, under the best possible
/// variable ordering: the smallest tuple size `n` for which some tuple of at
/// most `n` variables has closed index `>= 1 - epsilon`. The maximum of the
/// masked closed tensor is found exactly, so the scan is nondecreasing by
/// construction.
pub fn effective_truncation(s: &SobolTt, epsilon: f64) -> Result<TruncationDimension> {
    check_epsilon(epsilon)?;
    let n = s.dimension();
    let closed = s.closed_tt();
    let mut scan = Vec::with_capacity(n);
    let mut result: Option<(usize, f64, Vec<usize>)> = None;
    for k in 1..=n {
        let mask = masks::hamming_mask_tt(n, k)?;
        let masked = closed.hadamard(&mask)?.round(PIPELINE_ROUND_TOL, None);
        let (value, index) = masked.max_entry()?;
        scan.push(value);
        if value >= 1.0 - epsilon {
            result = Some((k, value, index));
            break;
        }
        if k == n {
            result = Some((k, value, index));
        }
    }
    let (order, achieved, index) = result.expect("loop always resolves");
    let variables = index
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == 1)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(TruncationDimension {
        order,
        achieved,
        variables,
        scan,
    })
}

/// Length spectrum: variance mass per tuple length `1..=N` (the distance
/// from a tuple's first to its last variable).
pub fn length_spectrum(s: &SobolTt) -> Result<DimensionDistribution> {
    let state = masks::length_state_tt(s.dimension());
    let channels = s.tensor().state_contract(&state)?;
    split_spectrum(channels, "Sobol tensor not zeroed at the empty tuple")
}

/// Effective dimension in the successive sense: the smallest `n` such that
/// tuples of length at most `n` account for `1 - epsilon` of the variance.
pub fn effective_successive(s: &SobolTt, epsilon: f64) -> Result<EffectiveDimension> {
    check_epsilon(epsilon)?;
    let l = length_spectrum(s)?;
    Ok(cumulative_scan(&l.mass, epsilon))
}

/// All Shapley values `phi_n = sum_{a : n in a} S_a / |a|`: the closed
/// transform of the reciprocal-weighted index tensor, read at the
/// singletons. Sums to 1 up to compression error.
pub fn shapley_values(s: &SobolTt) -> Result<Vec<f64>> {
    let n = s.dimension();
    let (recip, _) = masks::reciprocal_weight_tt(n, 1e-8)?;
    let weighted = s
        .tensor()
        .hadamard(&recip)?
        .round(PIPELINE_ROUND_TOL, None);
    let closed = closed_transform(&weighted);
    let mut phi = Vec::with_capacity(n);
    for v in 1..=n {
        let mut idx = vec![0usize; n];
        idx[v - 1] = 1;
        phi.push(closed.evaluate(&idx)?);
    }
    Ok(phi)
}

/// Computes every metric at once, plus per-variable first-order and total
/// indices and the Liu–Owen cross-check `D_S = sum_n S^T_n`.
pub fn full_report(s: &SobolTt, epsilon: f64) -> Result<SensitivityReport> {
    check_epsilon(epsilon)?;
    let n = s.dimension();
    let nu = dimension_distribution(s)?;
    let mean_dim = mean_dimension(s);
    let closed = s.closed_tt();
    let mut first_order = Vec::with_capacity(n);
    let mut totals = Vec::with_capacity(n);
    for v in 1..=n {
        first_order.push(s.query_index(&[v])?);
        // S^T = 1 - S^C at the complement.
        let mut idx = vec![1usize; n];
        idx[v - 1] = 0;
        totals.push(1.0 - closed.evaluate(&idx)?);
    }
    let total_sum: f64 = totals.iter().sum();
    Ok(SensitivityReport {
        epsilon,
        mean_dimension: mean_dim,
        dimension_distribution: nu.mass.clone(),
        dimension_residual: nu.residual,
        effective_superposition: cumulative_scan(&nu.mass, epsilon),
        effective_truncation: effective_truncation(s, epsilon)?,
        effective_successive: effective_successive(s, epsilon)?,
        shapley: shapley_values(s)?,
        first_order,
        totals,
        liu_owen_discrepancy: (mean_dim - total_sum).abs(),
    })
}
