//! Batch-evaluable black-box models.
//!
//! Everything the surrogate builder and the Monte-Carlo baselines sample goes
//! through the [`Evaluator`] trait: built-in analytic benchmarks, tensors
//! replayed on a grid, user closures, and external simulators driven over a
//! line protocol (see [`SubprocessEvaluator`]).

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use ndarray::{Array1, ArrayView2};

use crate::error::{Error, Result};
use crate::space::ModelSpace;
use crate::tt::TTTensor;

/// A batch-evaluable function from `R^N` to `R` with an evaluation tally.
pub trait Evaluator: Send {
    /// Number of input variables.
    fn arity(&self) -> usize;

    /// Evaluates one row per input point; the output has exactly one entry
    /// per row. Implementations must tally `rows` onto the evaluation count.
    fn evaluate_batch(&mut self, points: ArrayView2<'_, f64>) -> Result<Array1<f64>>;

    /// Total number of points evaluated so far (monotone nondecreasing).
    fn eval_count(&self) -> u64;
}

fn check_arity(points: &ArrayView2<'_, f64>, arity: usize) -> Result<()> {
    if points.ncols() != arity {
        return Err(Error::Shape(format!(
            "evaluator arity {} but points have {} columns",
            arity,
            points.ncols()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Sobol "G" function.
// ---------------------------------------------------------------------------

/// The Sobol "G" benchmark on the unit cube:
/// `f(x) = prod_n (|4 x_n - 2| + a_n) / (1 + a_n)`.
#[derive(Debug, Clone)]
pub struct SobolG {
    a: Vec<f64>,
    count: u64,
}

impl SobolG {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Domain("sobol-g needs at least one coefficient".into()));
        }
        if a.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain("sobol-g coefficients must be >= 0".into()));
        }
        Ok(Self { a, count: 0 })
    }

    /// All-zero coefficients (the hardest, fully interacting case).
    pub fn with_zero_coefficients(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.a.len() {
            return Err(Error::Shape("sobol-g arity mismatch".into()));
        }
        let mut prod = 1.0;
        for (&xn, &an) in x.iter().zip(&self.a) {
            if !(0.0..=1.0).contains(&xn) {
                return Err(Error::Domain(format!(
                    "sobol-g input {xn} outside the unit interval"
                )));
            }
            prod *= ((4.0 * xn - 2.0).abs() + an) / (1.0 + an);
        }
        Ok(prod)
    }
}

impl Evaluator for SobolG {
    fn arity(&self) -> usize {
        self.a.len()
    }

    fn evaluate_batch(&mut self, points: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        check_arity(&points, self.arity())?;
        let mut out = Array1::zeros(points.nrows());
        for (r, row) in points.rows().into_iter().enumerate() {
            out[r] = self.value(row.as_slice().expect("contiguous row"))?;
        }
        self.count += points.nrows() as u64;
        Ok(out)
    }

    fn eval_count(&self) -> u64 {
        self.count
    }
}

/// Closed-form first-order and total Sobol index shared by all variables of
/// the `a = 0` G function: `S_n = 1 / (3 ((4/3)^N - 1))`,
/// `S^T_n = S_n (4/3)^(N-1)`.
pub fn sobol_g_analytic_indices(n: usize) -> (f64, f64) {
    assert!(n >= 1);
    let q = 4.0f64 / 3.0;
    let s = 1.0 / (3.0 * (q.powi(n as i32) - 1.0));
    (s, s * q.powi(n as i32 - 1))
}

// ---------------------------------------------------------------------------
// Decay chain.
// ---------------------------------------------------------------------------

/// Linear decay chain of [`DecayChain::SPECIES`] species; the inputs are the
/// daily decay fractions of the first ten species and the output is the
/// amount of the final (stable) species after a fixed number of days.
///
/// All mass starts in species 1. Each day every species passes
/// `lambda_n * m_n` of its current amount to its successor, using the
/// pre-step amounts, so total mass is conserved exactly.
#[derive(Debug, Clone)]
pub struct DecayChain {
    days: u32,
    count: u64,
}

impl DecayChain {
    pub const SPECIES: usize = 11;
    pub const RATES: usize = 10;
    /// Decay-rate range used in the reference experiments (half-lives from
    /// three years down to three months).
    pub const LAMBDA_RANGE: (f64, f64) = (0.000_632_81, 0.007_567_36);

    pub fn new(days: u32) -> Result<Self> {
        if days == 0 {
            return Err(Error::Domain("decay chain needs at least one day".into()));
        }
        Ok(Self { days, count: 0 })
    }

    pub fn days(&self) -> u32 {
        self.days
    }

    /// Full state vector after `days` daily steps.
    pub fn state_after(lambda: &[f64], days: u32) -> Result<[f64; Self::SPECIES]> {
        if lambda.len() != Self::RATES {
            return Err(Error::Shape(format!(
                "decay chain takes {} rates, got {}",
                Self::RATES,
                lambda.len()
            )));
        }
        for &l in lambda {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::Domain(format!("decay rate {l} outside [0, 1]")));
            }
        }
        let mut m = [0.0; Self::SPECIES];
        m[0] = 1.0;
        for _ in 0..days {
            // Transfers use the pre-step amounts: mass moves at most one
            // species per day.
            let prev = m;
            for (n, &l) in lambda.iter().enumerate() {
                let moved = l * prev[n];
                m[n] -= moved;
                m[n + 1] += moved;
            }
        }
        Ok(m)
    }

    pub fn value(&self, lambda: &[f64]) -> Result<f64> {
        Ok(Self::state_after(lambda, self.days)?[Self::SPECIES - 1])
    }
}

impl Evaluator for DecayChain {
    fn arity(&self) -> usize {
        Self::RATES
    }

    fn evaluate_batch(&mut self, points: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        check_arity(&points, self.arity())?;
        let mut out = Array1::zeros(points.nrows());
        for (r, row) in points.rows().into_iter().enumerate() {
            out[r] = self.value(row.as_slice().expect("contiguous row"))?;
        }
        self.count += points.nrows() as u64;
        Ok(out)
    }

    fn eval_count(&self) -> u64 {
        self.count
    }
}

// ---------------------------------------------------------------------------
// Closure and grid-replay evaluators.
// ---------------------------------------------------------------------------

/// Wraps a plain closure as an evaluator.
pub struct FnEvaluator<F> {
    arity: usize,
    f: F,
    count: u64,
}

impl<F: FnMut(&[f64]) -> f64 + Send> FnEvaluator<F> {
    pub fn new(arity: usize, f: F) -> Self {
        Self { arity, f, count: 0 }
    }
}

impl<F: FnMut(&[f64]) -> f64 + Send> Evaluator for FnEvaluator<F> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn evaluate_batch(&mut self, points: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        check_arity(&points, self.arity)?;
        let mut out = Array1::zeros(points.nrows());
        for (r, row) in points.rows().into_iter().enumerate() {
            let v = (self.f)(row.as_slice().expect("contiguous row"));
            if !v.is_finite() {
                return Err(Error::Data(format!("non-finite output {v} at {row:?}")));
            }
            out[r] = v;
        }
        self.count += points.nrows() as u64;
        Ok(out)
    }

    fn eval_count(&self) -> u64 {
        self.count
    }
}

/// Replays a TT tensor as a black-box function over a model space: each
/// physical point is snapped to its nearest grid node and the tensor entry
/// at that index is returned. Useful as a ground-truth evaluator in tests.
pub struct GridTensorEvaluator {
    tensor: TTTensor,
    space: ModelSpace,
    count: u64,
}

impl GridTensorEvaluator {
    pub fn new(tensor: TTTensor, space: &ModelSpace) -> Result<Self> {
        if tensor.mode_sizes() != space.mode_sizes() {
            return Err(Error::Shape(
                "tensor mode sizes do not match the space grid".into(),
            ));
        }
        Ok(Self {
            tensor,
            space: space.clone(),
            count: 0,
        })
    }
}

impl Evaluator for GridTensorEvaluator {
    fn arity(&self) -> usize {
        self.space.dimension()
    }

    fn evaluate_batch(&mut self, points: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        check_arity(&points, self.arity())?;
        let mut out = Array1::zeros(points.nrows());
        for (r, row) in points.rows().into_iter().enumerate() {
            let idx = self
                .space
                .nearest_index(row.as_slice().expect("contiguous row"))?;
            out[r] = self.tensor.evaluate(&idx)?;
        }
        self.count += points.nrows() as u64;
        Ok(out)
    }

    fn eval_count(&self) -> u64 {
        self.count
    }
}

// ---------------------------------------------------------------------------
// Subprocess evaluator.
// ---------------------------------------------------------------------------

/// Drives an external simulator over a pipelined line protocol.
///
/// The parent writes one request per line, `EVAL <N> <x_1> ... <x_N>`
/// (decimal floats, `.` separator, scientific notation allowed), and the
/// child answers each request with one line holding a single decimal float.
/// `QUIT` ends the session. Requests are pipelined up to `batch_size` lines
/// before replies are awaited; a dedicated reader thread drains the child's
/// stdout, so pipelining cannot deadlock.
pub struct SubprocessEvaluator {
    child: Child,
    stdin: std::process::ChildStdin,
    replies: mpsc::Receiver<std::io::Result<String>>,
    arity: usize,
    batch_size: usize,
    timeout: Duration,
    count: u64,
}

impl SubprocessEvaluator {
    /// Launches `command` through `sh -c`.
    pub fn spawn(command: &str, arity: usize, batch_size: usize) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::Domain("batch_size must be positive".into()));
        }
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Transport(format!("failed to spawn {command:?}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                let failed = line.is_err();
                if tx.send(line).is_err() || failed {
                    break;
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            replies: rx,
            arity,
            batch_size,
            timeout: Duration::from_secs(30),
            count: 0,
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn read_reply(&mut self) -> Result<f64> {
        let line = match self.replies.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(Error::Transport(format!("child read failed: {e}"))),
            Err(mpsc::RecvTimeoutError::Timeout) => return Err(Error::Timeout(self.timeout)),
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                return Err(Error::Transport("child closed its output".into()))
            }
        };
        let value: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::Transport(format!("unparseable reply line {line:?}")))?;
        if !value.is_finite() {
            return Err(Error::Data(format!("non-finite reply {line:?}")));
        }
        Ok(value)
    }
}

impl Evaluator for SubprocessEvaluator {
    fn arity(&self) -> usize {
        self.arity
    }

    fn evaluate_batch(&mut self, points: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        check_arity(&points, self.arity)?;
        let mut out = Array1::zeros(points.nrows());
        let mut done = 0usize;
        while done < points.nrows() {
            let chunk = (points.nrows() - done).min(self.batch_size);
            let mut request = String::new();
            for r in done..done + chunk {
                request.push_str("EVAL ");
                request.push_str(&self.arity.to_string());
                for v in points.row(r) {
                    request.push(' ');
                    request.push_str(&format!("{v}"));
                }
                request.push('\n');
            }
            self.stdin
                .write_all(request.as_bytes())
                .and_then(|_| self.stdin.flush())
                .map_err(|e| Error::Transport(format!("child write failed: {e}")))?;
            for r in done..done + chunk {
                out[r] = self.read_reply()?;
            }
            done += chunk;
        }
        self.count += points.nrows() as u64;
        Ok(out)
    }

    fn eval_count(&self) -> u64 {
        self.count
    }
}

impl Drop for SubprocessEvaluator {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"QUIT\n");
        let _ = self.stdin.flush();
        std::thread::sleep(Duration::from_millis(20));
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

// ---------------------------------------------------------------------------
// Parallel wrapper.
// ---------------------------------------------------------------------------

/// Fans a batch out over several worker-owned evaluators (contiguous chunks,
/// results concatenated in order, so the outcome is independent of the
/// partitioning for pure models).
pub struct ParallelEvaluator {
    workers: Vec<Box<dyn Evaluator>>,
}

impl ParallelEvaluator {
    pub fn new(workers: Vec<Box<dyn Evaluator>>) -> Result<Self> {
        if workers.is_empty() {
            return Err(Error::Domain("need at least one worker".into()));
        }
        let arity = workers[0].arity();
        if workers.iter().any(|w| w.arity() != arity) {
            return Err(Error::Shape("workers disagree on arity".into()));
        }
        Ok(Self { workers })
    }
}

impl Evaluator for ParallelEvaluator {
    fn arity(&self) -> usize {
        self.workers[0].arity()
    }

    fn evaluate_batch(&mut self, points: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        let rows = points.nrows();
        let n_workers = self.workers.len().min(rows.max(1));
        let chunk = rows.div_ceil(n_workers.max(1)).max(1);
        let mut results: Vec<Result<Array1<f64>>> = Vec::new();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for (w, worker) in self.workers.iter_mut().take(n_workers).enumerate() {
                let lo = w * chunk;
                if lo >= rows {
                    break;
                }
                let hi = (lo + chunk).min(rows);
                let part = points.slice(ndarray::s![lo..hi, ..]);
                handles.push(scope.spawn(move || worker.evaluate_batch(part)));
            }
            for h in handles {
                results.push(h.join().expect("worker thread panicked"));
            }
        });
        let mut out = Array1::zeros(rows);
        let mut offset = 0;
        for r in results {
            let part = r?;
            for (i, v) in part.iter().enumerate() {
                out[offset + i] = *v;
            }
            offset += part.len();
        }
        Ok(out)
    }

    fn eval_count(&self) -> u64 {
        self.workers.iter().map(|w| w.eval_count()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn sobol_g_known_values() {
        let g = SobolG::with_zero_coefficients(3).unwrap();
        assert_eq!(g.value(&[0.5, 0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(g.value(&[0.0, 0.0, 0.0]).unwrap(), 8.0);
        let g = SobolG::new(vec![1.0, 2.0]).unwrap();
        let v = g.value(&[0.25, 0.75]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sobol_g_rejects_points_outside_cube() {
        let g = SobolG::with_zero_coefficients(2).unwrap();
        assert!(matches!(g.value(&[1.5, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn sobol_g_analytic_endpoints() {
        let (s1, st1) = sobol_g_analytic_indices(1);
        assert!((s1 - 1.0).abs() < 1e-12 && (st1 - 1.0).abs() < 1e-12);
        let (s2, st2) = sobol_g_analytic_indices(2);
        assert!((s2 - 3.0 / 7.0).abs() < 1e-12);
        assert!((st2 - 4.0 / 7.0).abs() < 1e-12);
        let (s20, st20) = sobol_g_analytic_indices(20);
        assert!((s20 - 0.001).abs() < 5e-4);
        assert!((st20 - 0.251).abs() < 5e-4);
    }

    #[test]
    fn decay_chain_zero_and_full_rates() {
        let chain = DecayChain::new(100).unwrap();
        assert_eq!(chain.value(&[0.0; 10]).unwrap(), 0.0);
        let v = chain.value(&[1.0; 10]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let mut chain = DecayChain::new(5).unwrap();
        // With full rates mass travels one species per day; after 5 days it
        // sits in species 6, not yet at the stable end.
        let pts = Array2::from_shape_vec((1, 10), vec![1.0; 10]).unwrap();
        assert_eq!(chain.evaluate_batch(pts.view()).unwrap()[0], 0.0);
    }

    #[test]
    fn decay_chain_conserves_mass() {
        let lambda = [0.003_9, 0.001, 0.007, 0.002, 0.004, 0.0009, 0.0051, 0.0042, 0.0068, 0.0011];
        for days in [1u32, 10, 137, 730] {
            let m = DecayChain::state_after(&lambda, days).unwrap();
            let total: f64 = m.iter().sum();
            assert!((total - 1.0).abs() <= 1e-12, "day {days}: {total}");
        }
    }

    #[test]
    fn decay_chain_matches_matrix_power_oracle() {
        // Daily update is linear: m <- A m with A lower-bidiagonal.
        let lambda = [0.00378; 10];
        let days = 730u32;
        let mut a = nalgebra::DMatrix::<f64>::zeros(11, 11);
        for n in 0..11 {
            a[(n, n)] = if n < 10 { 1.0 - lambda[n] } else { 1.0 };
            if n < 10 {
                a[(n + 1, n)] = lambda[n];
            }
        }
        let mut m = nalgebra::DVector::<f64>::zeros(11);
        m[0] = 1.0;
        for _ in 0..days {
            m = &a * m;
        }
        let sim = DecayChain::state_after(&lambda, days).unwrap();
        assert!(sim[10] > 0.0);
        assert!((sim[10] - m[10]).abs() <= 1e-12);
    }

    #[test]
    fn decay_chain_rejects_bad_rates() {
        let chain = DecayChain::new(10).unwrap();
        assert!(matches!(chain.value(&[2.0; 10]), Err(Error::Domain(_))));
        assert!(matches!(chain.value(&[0.1; 9]), Err(Error::Shape(_))));
    }

    #[test]
    fn fn_evaluator_counts_and_rejects_nonfinite() {
        let mut e = FnEvaluator::new(2, |x: &[f64]| x[0] + x[1]);
        let pts = array![[1.0, 2.0], [3.0, 4.0]];
        let out = e.evaluate_batch(pts.view()).unwrap();
        assert_eq!(out, array![3.0, 7.0]);
        assert_eq!(e.eval_count(), 2);
        let mut bad = FnEvaluator::new(1, |_: &[f64]| f64::NAN);
        assert!(matches!(
            bad.evaluate_batch(array![[0.0]].view()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn subprocess_echo_first_coordinate() {
        let script = r#"while read cmd n x rest; do
            if [ "$cmd" = "QUIT" ]; then exit 0; fi
            echo "$x"
        done"#;
        let mut child = SubprocessEvaluator::spawn(script, 2, 8).unwrap();
        let out = child.evaluate_batch(array![[0.3, 0.5]].view()).unwrap();
        assert_eq!(out[0], 0.3);
        assert_eq!(child.eval_count(), 1);
    }

    #[test]
    fn subprocess_constant_child() {
        let script = r#"while read line; do
            case "$line" in QUIT*) exit 0;; esac
            echo 1
        done"#;
        let mut child = SubprocessEvaluator::spawn(script, 3, 4).unwrap();
        let pts = Array2::from_elem((10, 3), 0.25);
        let out = child.evaluate_batch(pts.view()).unwrap();
        assert!(out.iter().all(|&v| v == 1.0));
        assert_eq!(child.eval_count(), 10);
    }

    #[test]
    fn subprocess_sobol_g_matches_builtin() {
        // Shell child implementing the a = 0 G function, one awk call per
        // request (mawk block-buffers piped input, so a long-lived awk
        // process would stall the protocol).
        let script = r#"while read cmd n rest; do
            if [ "$cmd" = "QUIT" ]; then exit 0; fi
            echo "$rest" | awk '{
                p = 1.0;
                for (i = 1; i <= NF; i++) { v = 4.0 * $i - 2.0; if (v < 0) v = -v; p *= v; }
                printf "%.17g\n", p;
            }'
        done"#;
        let mut child = SubprocessEvaluator::spawn(script, 4, 16).unwrap();
        let reference = SobolG::with_zero_coefficients(4).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let pts = Array2::from_shape_fn((100, 4), |_| rng.random::<f64>());
        let got = child.evaluate_batch(pts.view()).unwrap();
        for (r, row) in pts.rows().into_iter().enumerate() {
            let want = reference.value(row.as_slice().unwrap()).unwrap();
            assert!((got[r] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn subprocess_malformed_reply_is_transport_error() {
        let script = r#"while read line; do
            case "$line" in QUIT*) exit 0;; esac
            echo "not-a-number"
        done"#;
        let mut child = SubprocessEvaluator::spawn(script, 1, 1).unwrap();
        match child.evaluate_batch(array![[0.0]].view()) {
            Err(Error::Transport(msg)) => assert!(msg.contains("not-a-number")),
            other => panic!("expected transport error, got {other:?}"),
        }
    }

    #[test]
    fn subprocess_timeout() {
        let mut child = SubprocessEvaluator::spawn("sleep 30", 1, 1)
            .unwrap()
            .with_timeout(Duration::from_millis(100));
        assert!(matches!(
            child.evaluate_batch(array![[0.0]].view()),
            Err(Error::Timeout(_))
        ));
    }

    #[test]
    fn parallel_evaluator_matches_serial() {
        let make = || -> Box<dyn Evaluator> { Box::new(SobolG::with_zero_coefficients(3).unwrap()) };
        let mut par = ParallelEvaluator::new(vec![make(), make(), make()]).unwrap();
        let mut ser = SobolG::with_zero_coefficients(3).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts = Array2::from_shape_fn((17, 3), |_| rng.random::<f64>());
        let a = par.evaluate_batch(pts.view()).unwrap();
        let b = ser.evaluate_batch(pts.view()).unwrap();
        assert_eq!(a, b);
        assert_eq!(par.eval_count(), 17);
    }
}
