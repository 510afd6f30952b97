//! Sobol tensor trains.
//!
//! From a TT surrogate over a weighted grid, the discrete ANOVA
//! decomposition can be carried out core by core: splitting each core into
//! its weighted mean slice and zero-mean residual slices and squaring the
//! train (slice-wise Kronecker products) yields a `2^N` tensor whose entry
//! at the binary tuple index `a` is exactly `Var[f_a]` of the grid tensor
//! under the product measure — the residuals are orthogonal to the means, so
//! cross terms vanish. After removing the `(E[f])^2` mass at the empty tuple
//! and dividing by the total variance, the entry at `a` approximates the
//! Sobol index `S_a`.
//!
//! Variable tuples in the query API are 1-based, matching the usual
//! sensitivity-analysis convention; the binary index of `{4, 7}` on a
//! 7-variable model is `[0, 0, 0, 1, 0, 0, 1]`.

use std::path::Path;

use ndarray::{Array2, Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::kron;
use crate::space::ModelSpace;
use crate::tt::TTTensor;

/// Default compression tolerance used by [`SobolTt::build`].
pub const DEFAULT_ROUND_TOL: f64 = 1e-10;

/// All `2^N - 1` Sobol indices of a surrogate, compressed.
#[derive(Debug, Clone)]
pub struct SobolTt {
    tensor: TTTensor,
    mean: f64,
    variance: f64,
    round_tol: f64,
}

/// JSON sidecar stored next to the binary tensor file.
#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    mean: f64,
    variance: f64,
    round_tol: f64,
    names: Vec<String>,
}

impl SobolTt {
    /// Extracts the Sobol TT from a surrogate with the default compression
    /// tolerance.
    pub fn build(surrogate: &TTTensor, space: &ModelSpace) -> Result<Self> {
        Self::build_with_tol(surrogate, space, DEFAULT_ROUND_TOL)
    }

    pub fn build_with_tol(
        surrogate: &TTTensor,
        space: &ModelSpace,
        round_tol: f64,
    ) -> Result<Self> {
        if surrogate.trailing_rank_open() {
            return Err(Error::Shape("surrogate must be an ordinary tensor".into()));
        }
        if surrogate.mode_sizes() != space.mode_sizes() {
            return Err(Error::Shape(format!(
                "surrogate mode sizes {:?} do not match the grid {:?}",
                surrogate.mode_sizes(),
                space.mode_sizes()
            )));
        }
        if !(round_tol >= 0.0) {
            return Err(Error::Domain("round_tol must be nonnegative".into()));
        }
        // Cross-approximation can overestimate ranks; a tight pre-rounding
        // keeps the squared cores small.
        let surrogate = surrogate.round(1e-14, None);
        let n = surrogate.len();

        let mut mean_chain = Array2::from_elem((1, 1), 1.0);
        let mut var_cores = Vec::with_capacity(n);
        for (core, axis) in surrogate.cores().iter().zip(space.axes()) {
            let (rl, i_n, rr) = core.dim();
            let weights = axis.weights();
            // Weighted mean slice and zero-mean residuals.
            let mut mean_slice = Array2::zeros((rl, rr));
            for i in 0..i_n {
                mean_slice = mean_slice + &core.index_axis(Axis(1), i).mapv(|v| v * weights[i]);
            }
            let mut var_core = Array3::zeros((rl * rl, 2, rr * rr));
            var_core
                .index_axis_mut(Axis(1), 0)
                .assign(&kron(mean_slice.view(), mean_slice.view()));
            let mut fluct = Array2::zeros((rl * rl, rr * rr));
            for i in 0..i_n {
                let residual = &core.index_axis(Axis(1), i) - &mean_slice;
                fluct = fluct + kron(residual.view(), residual.view()).mapv(|v| v * weights[i]);
            }
            var_core.index_axis_mut(Axis(1), 1).assign(&fluct);
            var_cores.push(var_core);
            mean_chain = mean_chain.dot(&mean_slice);
        }
        let mean = mean_chain[(0, 0)];
        // Entry at the empty tuple is (E[f])^2; the sum over all tuples is
        // E[f^2].
        let variances = TTTensor::new(var_cores)?;
        let binary = vec![2usize; n];
        let at_empty = variances.evaluate(&vec![0; n])?;
        let second_moment = variances.dot(&TTTensor::ones(&binary)?)?;
        let variance = second_moment - at_empty;
        let scale_ref = second_moment.abs().max(1.0);
        if !(variance > 1e-14 * scale_ref) {
            return Err(Error::DegenerateModel(format!(
                "surrogate variance {variance:.3e} is not positive"
            )));
        }
        let delta = TTTensor::delta(&binary, &vec![0; n])?.scale(-at_empty);
        let tensor = variances
            .add(&delta)?
            .scale(1.0 / variance)
            .round(round_tol, None);
        Ok(Self {
            tensor,
            mean,
            variance,
            round_tol,
        })
    }

    /// Number of model variables.
    pub fn dimension(&self) -> usize {
        self.tensor.len()
    }

    /// The `2^N` index tensor itself (entry at the empty tuple is 0).
    pub fn tensor(&self) -> &TTTensor {
        &self.tensor
    }

    /// Surrogate mean `E[f]` on the grid measure.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Surrogate variance `Var[f]` on the grid measure.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn round_tol(&self) -> f64 {
        self.round_tol
    }

    /// Binary index of a 1-based variable tuple.
    pub fn binary_index(&self, vars: &[usize]) -> Result<Vec<usize>> {
        let n = self.dimension();
        let mut idx = vec![0usize; n];
        for &v in vars {
            if v == 0 || v > n {
                return Err(Error::Range(format!("variable {v} outside 1..={n}")));
            }
            idx[v - 1] = 1;
        }
        Ok(idx)
    }

    /// Complement tuple `-a` as a binary index.
    fn complement_index(&self, vars: &[usize]) -> Result<Vec<usize>> {
        let mut idx = self.binary_index(vars)?;
        for b in idx.iter_mut() {
            *b = 1 - *b;
        }
        Ok(idx)
    }

    /// Sobol index `S_a` of a 1-based variable tuple (0 for the empty
    /// tuple).
    pub fn query_index(&self, vars: &[usize]) -> Result<f64> {
        let idx = self.binary_index(vars)?;
        self.tensor.evaluate(&idx)
    }

    /// The closed-index tensor: entry at `a` is `S^C_a = sum_{b <= a} S_b`.
    /// Per core, slice 1 becomes the sum of both slices.
    pub fn closed_tt(&self) -> TTTensor {
        closed_transform(&self.tensor)
    }

    /// Closed index `S^C_a`.
    pub fn closed_index(&self, vars: &[usize]) -> Result<f64> {
        let idx = self.binary_index(vars)?;
        self.closed_tt().evaluate(&idx)
    }

    /// Total index `S^T_a = 1 - S^C_{-a}`; the tuple must be nonempty.
    pub fn total_index(&self, vars: &[usize]) -> Result<f64> {
        if vars.is_empty() {
            return Err(Error::Domain(
                "total index of the empty tuple is undefined".into(),
            ));
        }
        let idx = self.complement_index(vars)?;
        Ok(1.0 - self.closed_tt().evaluate(&idx)?)
    }

    /// Sum of all stored indices (1 up to compression error).
    pub fn index_sum(&self) -> f64 {
        let ones = TTTensor::ones(&self.tensor.mode_sizes()).expect("binary modes");
        self.tensor.dot(&ones).expect("conforming shapes")
    }

    /// Persists the tensor in the TT file format plus a JSON sidecar with
    /// the mean, variance, rounding tolerance and variable names.
    pub fn save(&self, path: impl AsRef<Path>, names: &[String]) -> Result<()> {
        let path = path.as_ref();
        self.tensor.save(path)?;
        let sidecar = Sidecar {
            mean: self.mean,
            variance: self.variance,
            round_tol: self.round_tol,
            names: names.to_vec(),
        };
        let json =
            serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(sidecar_path(path), json)?;
        Ok(())
    }

    /// Loads a tensor + sidecar pair written by [`SobolTt::save`]; returns
    /// the value and the stored variable names.
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, Vec<String>)> {
        let path = path.as_ref();
        let tensor = TTTensor::load(path)?;
        if tensor.mode_sizes().iter().any(|&i| i != 2) {
            return Err(Error::Format("not a Sobol tensor: mode sizes != 2".into()));
        }
        let raw = std::fs::read_to_string(sidecar_path(path))?;
        let sidecar: Sidecar =
            serde_json::from_str(&raw).map_err(|e| Error::Format(e.to_string()))?;
        Ok((
            Self {
                tensor,
                mean: sidecar.mean,
                variance: sidecar.variance,
                round_tol: sidecar.round_tol,
            },
            sidecar.names,
        ))
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    os.into()
}

/// Closed transform of a `2^N` tensor: per core, slice 0 is kept and slice 1
/// becomes the sum of both slices, turning entries into subset sums.
pub fn closed_transform(t: &TTTensor) -> TTTensor {
    let cores = t
        .cores()
        .iter()
        .map(|core| {
            let mut c = core.clone();
            let s0 = core.index_axis(Axis(1), 0).to_owned();
            let mut s1 = c.index_axis_mut(Axis(1), 1);
            s1 += &s0;
            c
        })
        .collect();
    if t.trailing_rank_open() {
        TTTensor::new_state(cores).expect("same shapes")
    } else {
        TTTensor::new(cores).expect("same shapes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ModelSpace;
    use rand::SeedableRng;

    fn additive_surrogate(points: usize) -> (TTTensor, ModelSpace) {
        // f(x1, x2) = x1 + x2 as an explicit rank-2 train.
        let space = ModelSpace::unit_cube(2, points).unwrap();
        let nodes: Vec<f64> = space.axes()[0].nodes().to_vec();
        let mut c0 = Array3::zeros((1, points, 2));
        let mut c1 = Array3::zeros((2, points, 1));
        for i in 0..points {
            c0[(0, i, 0)] = nodes[i];
            c0[(0, i, 1)] = 1.0;
            c1[(0, i, 0)] = 1.0;
            c1[(1, i, 0)] = nodes[i];
        }
        (TTTensor::new(vec![c0, c1]).unwrap(), space)
    }

    #[test]
    fn additive_model_has_no_interaction() {
        let (tt, space) = additive_surrogate(64);
        let s = SobolTt::build(&tt, &space).unwrap();
        assert!((s.query_index(&[1]).unwrap() - 0.5).abs() <= 1e-10);
        assert!((s.query_index(&[2]).unwrap() - 0.5).abs() <= 1e-10);
        assert!(s.query_index(&[1, 2]).unwrap().abs() <= 1e-10);
        assert!((s.index_sum() - 1.0).abs() <= 1e-6);
        assert!(s.query_index(&[]).unwrap().abs() <= 1e-9);
        // Closed chain: {1} -> 0.5, {1,2} -> 1.
        assert!((s.closed_index(&[1]).unwrap() - 0.5).abs() <= 1e-10);
        assert!((s.closed_index(&[1, 2]).unwrap() - 1.0).abs() <= 1e-6);
        // Totals: single variable owns half the variance.
        assert!((s.total_index(&[1]).unwrap() - 0.5).abs() <= 1e-10);
        assert!((s.total_index(&[1, 2]).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn binary_index_convention() {
        let (tt, space) = additive_surrogate(8);
        let s = SobolTt::build(&tt, &space).unwrap();
        assert_eq!(s.binary_index(&[1]).unwrap(), vec![1, 0]);
        assert!(s.binary_index(&[3]).is_err());
        assert!(s.total_index(&[]).is_err());
        // The documented 7-variable pattern for {4, 7}.
        let space7 = ModelSpace::unit_cube(7, 4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let t7 = TTTensor::random(&[4; 7], 2, &mut rng).unwrap();
        let s7 = SobolTt::build(&t7, &space7).unwrap();
        assert_eq!(
            s7.binary_index(&[4, 7]).unwrap(),
            vec![0, 0, 0, 1, 0, 0, 1]
        );
    }

    #[test]
    fn degenerate_constant_model_is_rejected() {
        let space = ModelSpace::unit_cube(3, 8).unwrap();
        let c = TTTensor::ones(&[8, 8, 8]).unwrap().scale(2.5);
        match SobolTt::build(&c, &space) {
            Err(Error::DegenerateModel(_)) => {}
            other => panic!("expected degenerate-model error, got {other:?}"),
        }
    }

    #[test]
    fn mean_and_variance_match_dense_statistics() {
        let space = ModelSpace::unit_cube(3, 6).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let t = TTTensor::random(&[6, 6, 6], 2, &mut rng).unwrap();
        let s = SobolTt::build(&t, &space).unwrap();
        let full = t.full().unwrap();
        let w = 1.0 / full.len() as f64;
        let mean: f64 = full.iter().sum::<f64>() * w;
        let var: f64 = full.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() * w;
        assert!((s.mean() - mean).abs() <= 1e-10 * (1.0 + mean.abs()));
        assert!((s.variance() - var).abs() <= 1e-10 * (1.0 + var));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.stt");
        let (tt, space) = additive_surrogate(16);
        let s = SobolTt::build(&tt, &space).unwrap();
        let names = vec!["x1".to_string(), "x2".to_string()];
        s.save(&path, &names).unwrap();
        let (back, loaded_names) = SobolTt::load(&path).unwrap();
        assert_eq!(loaded_names, names);
        assert_eq!(back.tensor(), s.tensor());
        assert_eq!(back.mean(), s.mean());
        assert_eq!(back.variance(), s.variance());
    }
}
