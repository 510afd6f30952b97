//! Compressed-domain algebra: contractions, Hadamard products, linear
//! combinations.

use ndarray::{Array2, Array3, Axis};

use super::TTTensor;
use crate::error::{Error, Result};
use crate::linalg::kron;

impl TTTensor {
    fn check_same_modes(&self, other: &TTTensor, op: &str) -> Result<()> {
        if self.mode_sizes() != other.mode_sizes() {
            return Err(Error::Shape(format!(
                "{op}: mode sizes differ ({:?} vs {:?})",
                self.mode_sizes(),
                other.mode_sizes()
            )));
        }
        Ok(())
    }

    /// Transfer-matrix contraction of two TTs along all modes; returns the
    /// matrix living on the trailing edges (1x1 for two ordinary tensors).
    fn contract_all(&self, other: &TTTensor) -> Array2<f64> {
        let mut c = Array2::from_elem((1, 1), 1.0);
        for (ca, cb) in self.cores.iter().zip(&other.cores) {
            let i_n = ca.dim().1;
            let mut next = Array2::zeros((ca.dim().2, cb.dim().2));
            for i in 0..i_n {
                let a = ca.index_axis(Axis(1), i);
                let b = cb.index_axis(Axis(1), i);
                // next += A_i^T * C * B_i
                next = next + a.t().dot(&c).dot(&b);
            }
            c = next;
        }
        c
    }

    /// Inner product `sum_i a[i] * b[i]` computed core by core.
    pub fn dot(&self, other: &TTTensor) -> Result<f64> {
        self.check_same_modes(other, "dot")?;
        if self.trailing_rank_open || other.trailing_rank_open {
            return Err(Error::Shape(
                "dot: operands must not have an open trailing rank".into(),
            ));
        }
        Ok(self.contract_all(other)[(0, 0)])
    }

    /// Contraction against a state tensor: `v[k] = sum_i self[i] * state[i, k]`.
    /// Equals `dot` against each output channel of `state`.
    pub fn state_contract(&self, state: &TTTensor) -> Result<Vec<f64>> {
        self.check_same_modes(state, "state_contract")?;
        if self.trailing_rank_open {
            return Err(Error::Shape(
                "state_contract: left operand must be an ordinary tensor".into(),
            ));
        }
        if !state.trailing_rank_open {
            return Err(Error::Shape(
                "state_contract: right operand must have an open trailing rank".into(),
            ));
        }
        let c = self.contract_all(state);
        Ok(c.row(0).to_vec())
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        let c = self.contract_all(self);
        let sum: f64 = (0..c.dim().0).map(|k| c[(k, k)]).sum();
        sum.max(0.0).sqrt()
    }

    /// Exact entrywise product via slice-wise Kronecker products. Ranks
    /// multiply; follow with `round` to tame them.
    pub fn hadamard(&self, other: &TTTensor) -> Result<TTTensor> {
        self.check_same_modes(other, "hadamard")?;
        if self.trailing_rank_open && other.trailing_rank_open {
            return Err(Error::Shape(
                "hadamard: at most one operand may have an open trailing rank".into(),
            ));
        }
        let cores = self
            .cores
            .iter()
            .zip(&other.cores)
            .map(|(ca, cb)| {
                let i_n = ca.dim().1;
                let mut core =
                    Array3::zeros((ca.dim().0 * cb.dim().0, i_n, ca.dim().2 * cb.dim().2));
                for i in 0..i_n {
                    let k = kron(ca.index_axis(Axis(1), i), cb.index_axis(Axis(1), i));
                    core.index_axis_mut(Axis(1), i).assign(&k);
                }
                core
            })
            .collect();
        if self.trailing_rank_open || other.trailing_rank_open {
            TTTensor::new_state(cores)
        } else {
            TTTensor::new(cores)
        }
    }

    /// Entrywise sum via block concatenation; ranks add.
    pub fn add(&self, other: &TTTensor) -> Result<TTTensor> {
        self.check_same_modes(other, "add")?;
        if self.trailing_rank_open != other.trailing_rank_open {
            return Err(Error::Shape("add: trailing-rank kinds differ".into()));
        }
        if self.trailing_rank_open && self.channels() != other.channels() {
            return Err(Error::Shape(format!(
                "add: channel counts differ ({} vs {})",
                self.channels(),
                other.channels()
            )));
        }
        let n = self.len();
        if n == 1 {
            // Single core: shapes coincide, sum entries directly.
            let core = &self.cores[0] + &other.cores[0];
            return if self.trailing_rank_open {
                TTTensor::new_state(vec![core])
            } else {
                TTTensor::new(vec![core])
            };
        }
        let mut cores = Vec::with_capacity(n);
        for (k, (ca, cb)) in self.cores.iter().zip(&other.cores).enumerate() {
            let (la, i_n, ra) = ca.dim();
            let (lb, _, rb) = cb.dim();
            let first = k == 0;
            let last = k == n - 1;
            // First core concatenates columns, the last concatenates rows
            // (on an open last core the channel columns are shared), middle
            // cores are block diagonal.
            let row_off = if first { 0 } else { la };
            let col_off = if last { 0 } else { ra };
            let rl = if first { 1 } else { la + lb };
            let rr = if last { ra } else { ra + rb };
            let mut core = Array3::zeros((rl, i_n, rr));
            for i in 0..i_n {
                for a in 0..la {
                    for b in 0..ra {
                        core[(a, i, b)] = ca[(a, i, b)];
                    }
                }
                for a in 0..lb {
                    for b in 0..rb {
                        core[(row_off + a, i, col_off + b)] = cb[(a, i, b)];
                    }
                }
            }
            cores.push(core);
        }
        if self.trailing_rank_open {
            TTTensor::new_state(cores)
        } else {
            TTTensor::new(cores)
        }
    }

    /// Entrywise scaling (folded into the first core).
    pub fn scale(&self, factor: f64) -> TTTensor {
        let mut cores = self.cores.clone();
        cores[0].mapv_inplace(|v| v * factor);
        TTTensor {
            cores,
            trailing_rank_open: self.trailing_rank_open,
        }
    }

    /// `self - other`, a convenience over `add` + `scale`.
    pub fn sub(&self, other: &TTTensor) -> Result<TTTensor> {
        self.add(&other.scale(-1.0))
    }
}
