//! Multi-restart derivative-free minimization over parameterized isometries,
//! stochastic matrices, and probability ensembles.
//!
//! The local search is a Nelder–Mead simplex with the adaptive coefficients
//! of Gao & Han; objectives involve eigendecompositions, so no gradients are
//! assumed anywhere. Restarts are seeded independently from
//! `(seed, restart index)` and may run in parallel; results are merged by
//! minimum, so the outcome is deterministic for a fixed seed.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::ComplexMatrix;
use crate::states::{Povm, QuantumChannel};
use crate::{Error, Result};

/// Real parameter vector decoding to an exact isometry (orthonormalized
/// complex columns).
#[derive(Debug, Clone)]
pub struct IsometryParam {
    pub in_dim: usize,
    pub out_dim: usize,
    pub raw: Vec<f64>,
}

impl IsometryParam {
    pub fn new(in_dim: usize, out_dim: usize, raw: Vec<f64>) -> Result<Self> {
        if out_dim < in_dim {
            return Err(Error::DimMismatch(format!(
                "isometry needs out_dim >= in_dim, got {out_dim} < {in_dim}"
            )));
        }
        if raw.len() != 2 * in_dim * out_dim {
            return Err(Error::DimMismatch(format!(
                "raw vector needs {} entries, got {}",
                2 * in_dim * out_dim,
                raw.len()
            )));
        }
        Ok(Self { in_dim, out_dim, raw })
    }

    pub fn raw_len(in_dim: usize, out_dim: usize) -> usize {
        2 * in_dim * out_dim
    }

    pub fn random(rng: &mut impl Rng, in_dim: usize, out_dim: usize) -> Self {
        let raw = (0..Self::raw_len(in_dim, out_dim))
            .map(|_| crate::states::random::normal(rng))
            .collect();
        Self { in_dim, out_dim, raw }
    }

    /// Exact encoding of an existing isometry (decode returns it unchanged up
    /// to floating-point noise).
    pub fn encode(v: &ComplexMatrix) -> Self {
        let mut raw = Vec::with_capacity(2 * v.rows() * v.cols());
        for r in 0..v.rows() {
            for c in 0..v.cols() {
                raw.push(v[(r, c)].re);
                raw.push(v[(r, c)].im);
            }
        }
        Self { in_dim: v.cols(), out_dim: v.rows(), raw }
    }

    /// Decode into an `out_dim × in_dim` matrix with orthonormal columns.
    pub fn decode(&self) -> ComplexMatrix {
        let m = ComplexMatrix::from_fn(self.out_dim, self.in_dim, |r, c| {
            let k = 2 * (r * self.in_dim + c);
            Complex64::new(self.raw[k], self.raw[k + 1])
        });
        orthonormalize_columns(&m)
    }
}

/// Modified Gram–Schmidt with re-orthogonalization; near-dependent columns
/// fall back to canonical basis vectors, so the result always has exactly
/// orthonormal columns (requires `rows >= cols`).
pub fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let rows = m.rows();
    let cols = m.cols();
    assert!(rows >= cols, "cannot orthonormalize {cols} columns in dimension {rows}");
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v: Vec<Complex64> = (0..rows).map(|r| m[(r, j)]).collect();
        let mut accepted = false;
        for attempt in 0..=rows {
            for prev in &q {
                let inner: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in v.iter_mut().zip(prev) {
                    *x -= inner * p;
                }
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for x in v.iter_mut() {
                    *x /= norm;
                }
                accepted = true;
                break;
            }
            // degenerate column: try canonical basis vectors
            let k = (j + attempt) % rows;
            v = vec![Complex64::new(0.0, 0.0); rows];
            v[k] = Complex64::new(1.0, 0.0);
        }
        assert!(accepted, "orthonormalization failed to complete a basis");
        q.push(v);
    }
    ComplexMatrix::from_fn(rows, cols, |r, c| q[c][r])
}

/// Stinespring realization: decode the parameter into an isometry from the
/// input space into `output ⊗ environment`.
pub fn channel_from_isometry(
    p: &IsometryParam,
    out_dim: usize,
    env_dim: usize,
) -> Result<QuantumChannel> {
    if p.out_dim != out_dim * env_dim {
        return Err(Error::DimMismatch(format!(
            "parameter decodes to {} rows, expected out*env = {}",
            p.out_dim,
            out_dim * env_dim
        )));
    }
    QuantumChannel::new(p.in_dim, out_dim, env_dim, p.decode())
}

/// Naimark-style realization: block `m` of the decoded isometry gives the
/// measurement operator `M_m`, so `E_m = M_m† M_m`.
pub fn povm_from_isometry(p: &IsometryParam, n_outcomes: usize) -> Result<Povm> {
    if p.out_dim != n_outcomes * p.in_dim {
        return Err(Error::DimMismatch(format!(
            "parameter decodes to {} rows, expected n_outcomes*d = {}",
            p.out_dim,
            n_outcomes * p.in_dim
        )));
    }
    let v = p.decode();
    Povm::new(povm_elements_from_isometry(&v, p.in_dim, n_outcomes))
}

/// The POVM elements `E_m = M_m† M_m` of a stacked measurement isometry
/// (rows grouped in `n_outcomes` blocks of `d`).
pub fn povm_elements_from_isometry(
    v: &ComplexMatrix,
    d: usize,
    n_outcomes: usize,
) -> Vec<ComplexMatrix> {
    (0..n_outcomes)
        .map(|m| {
            ComplexMatrix::from_fn(d, d, |r, c| {
                (0..d).map(|s| v[(m * d + s, r)].conj() * v[(m * d + s, c)]).sum()
            })
        })
        .collect()
}

/// Row-stochastic matrix from unconstrained parameters (softmax per row).
/// The all-zero vector decodes to uniform rows.
pub fn stochastic_from_raw(raw: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    assert_eq!(raw.len(), rows * cols, "raw length must be rows*cols");
    let mut out = vec![0.0f64; rows * cols];
    for r in 0..rows {
        let row = &raw[r * cols..(r + 1) * cols];
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for c in 0..cols {
            let e = (row[c] - m).exp();
            out[r * cols + c] = e;
            sum += e;
        }
        for c in 0..cols {
            out[r * cols + c] /= sum;
        }
    }
    out
}

/// Settings shared by every optimization-backed bound.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizerConfig {
    /// Number of random restarts (fixed candidate starts are extra).
    pub restarts: usize,
    /// Nelder–Mead iteration cap per restart.
    pub max_iters: usize,
    /// Relative spread of simplex values at which a restart counts as
    /// converged.
    pub tol: f64,
    /// Base seed; random restart `i` draws from stream `i`.
    pub seed: u64,
    /// Initial simplex edge length.
    pub step_init: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 12, max_iters: 500, tol: 1e-9, seed: 2024, step_init: 0.5 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::InvalidArgument("restarts must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        Ok(())
    }

    /// Copy with a scaled-down budget, for inner optimizations.
    pub fn inner(&self, restarts: usize, max_iters: usize) -> Self {
        Self { restarts, max_iters, ..*self }
    }
}

/// Result of a multi-restart minimization.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizationOutcome {
    pub best_value: f64,
    pub best_params: Vec<f64>,
    pub restarts_run: usize,
    pub converged: bool,
    /// Final value of each restart, fixed candidates first, then random
    /// restarts in stream order.
    pub restart_values: Vec<f64>,
}

/// Minimize over `R^dim` with `cfg.restarts` seeded random restarts.
pub fn multi_restart_minimize<F>(
    objective: F,
    dim: usize,
    cfg: &OptimizerConfig,
) -> Result<OptimizationOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    multi_restart_minimize_seeded(objective, dim, cfg, &[])
}

/// Minimize with additional fixed starting points evaluated before the random
/// restarts. Every fixed start is polished by the same local search, so the
/// reported best value never exceeds the objective at any start point.
pub fn multi_restart_minimize_seeded<F>(
    objective: F,
    dim: usize,
    cfg: &OptimizerConfig,
    fixed_starts: &[Vec<f64>],
) -> Result<OptimizationOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    if dim == 0 {
        return Err(Error::InvalidArgument("objective dimension must be >= 1".into()));
    }
    for s in fixed_starts {
        if s.len() != dim {
            return Err(Error::DimMismatch(format!(
                "fixed start has length {}, expected {dim}",
                s.len()
            )));
        }
    }
    let total = fixed_starts.len() + cfg.restarts;
    let runs: Vec<Result<RestartResult>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let x0: Vec<f64> = if i < fixed_starts.len() {
                fixed_starts[i].clone()
            } else {
                let stream = (i - fixed_starts.len()) as u64;
                let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
                rng.set_stream(stream);
                (0..dim).map(|_| crate::states::random::normal(&mut rng)).collect()
            };
            nelder_mead(&objective, &x0, cfg)
        })
        .collect();

    let mut restart_values = Vec::with_capacity(total);
    let mut best: Option<RestartResult> = None;
    for run in runs {
        let run = run?;
        restart_values.push(run.value);
        let replace = match &best {
            None => true,
            Some(b) => run.value < b.value,
        };
        if replace {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(OptimizationOutcome {
        best_value: best.value,
        best_params: best.params,
        restarts_run: total,
        converged: best.converged,
        restart_values,
    })
}

struct RestartResult {
    value: f64,
    params: Vec<f64>,
    converged: bool,
}

/// Nelder–Mead with Gao–Han adaptive coefficients.
fn nelder_mead<F>(objective: &F, x0: &[f64], cfg: &OptimizerConfig) -> Result<RestartResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = x0.len();
    let nf = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf; // expansion
    let gamma = 0.75 - 1.0 / (2.0 * nf); // contraction
    let delta = 1.0 - 1.0 / nf; // shrink

    let eval = |x: &[f64]| -> Result<f64> {
        let v = objective(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective)
        }
    };

    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    simplex.push((eval(x0)?, x0.to_vec()));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += cfg.step_init;
        simplex.push((eval(&x)?, x));
    }

    let mut converged = false;
    for _iter in 0..cfg.max_iters {
        simplex.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let f_best = simplex[0].0;
        let f_worst = simplex[n].0;
        if (f_worst - f_best).abs() <= cfg.tol * (1.0 + f_best.abs()) {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0f64; n];
        for (_, x) in simplex.iter().take(n) {
            for (ci, xi) in centroid.iter_mut().zip(x) {
                *ci += xi;
            }
        }
        for ci in centroid.iter_mut() {
            *ci /= nf;
        }
        let worst = simplex[n].1.clone();
        let shifted = |coef: f64| -> Vec<f64> {
            centroid.iter().zip(&worst).map(|(c, w)| c + coef * (c - w)).collect()
        };

        let xr = shifted(alpha);
        let fr = eval(&xr)?;
        if fr < simplex[0].0 {
            let xe = shifted(alpha * beta);
            let fe = eval(&xe)?;
            if fe < fr {
                simplex[n] = (fe, xe);
            } else {
                simplex[n] = (fr, xr);
            }
            continue;
        }
        if fr < simplex[n - 1].0 {
            simplex[n] = (fr, xr);
            continue;
        }
        // contraction
        if fr < f_worst {
            let xc = shifted(alpha * gamma);
            let fc = eval(&xc)?;
            if fc <= fr {
                simplex[n] = (fc, xc);
                continue;
            }
        } else {
            let xc = shifted(-gamma);
            let fc = eval(&xc)?;
            if fc < f_worst {
                simplex[n] = (fc, xc);
                continue;
            }
        }
        // shrink toward the best vertex
        let best_x = simplex[0].1.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x: Vec<f64> =
                best_x.iter().zip(&entry.1).map(|(b, x)| b + delta * (x - b)).collect();
            *entry = (eval(&x)?, x);
        }
    }
    simplex.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (value, params) = simplex.swap_remove(0);
    Ok(RestartResult { value, params, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::random::ginibre;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_state(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
        let g = ginibre(rng, d, d);
        let gram = g.matmul(&g.adjoint()).unwrap();
        let tr = gram.trace().re;
        gram.scale(Complex64::new(1.0 / tr, 0.0))
    }

    #[test]
    fn convex_bowl_converges() {
        let center = [0.3, -1.2, 2.0];
        let obj =
            |x: &[f64]| -> f64 { x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum() };
        let cfg =
            OptimizerConfig { restarts: 4, max_iters: 2000, tol: 1e-12, ..Default::default() };
        let out = multi_restart_minimize(obj, 3, &cfg).unwrap();
        assert!(out.best_value < 1e-8, "got {}", out.best_value);
        assert!(out.converged);
    }

    #[test]
    fn constant_objective_reports_constant() {
        let cfg = OptimizerConfig { restarts: 3, ..Default::default() };
        let out = multi_restart_minimize(|_| 4.25, 2, &cfg).unwrap();
        assert_eq!(out.best_value, 4.25);
        assert!(out.converged);
        assert_eq!(out.restart_values, vec![4.25, 4.25, 4.25]);
    }

    #[test]
    fn non_finite_objective_errors() {
        let cfg = OptimizerConfig { restarts: 1, ..Default::default() };
        let res = multi_restart_minimize(|x| (x[0]).ln(), 1, &cfg);
        assert!(matches!(res, Err(Error::NonFiniteObjective)));
    }

    #[test]
    fn determinism_and_monotone_restarts() {
        let obj = |x: &[f64]| -> f64 {
            // rugged objective with several local minima
            x.iter().map(|v| (v * 3.0).sin() + 0.05 * v * v).sum()
        };
        let cfg = OptimizerConfig { restarts: 6, seed: 99, ..Default::default() };
        let a = multi_restart_minimize(obj, 4, &cfg).unwrap();
        let b = multi_restart_minimize(obj, 4, &cfg).unwrap();
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.best_params, b.best_params);

        // growing the restart count keeps the seed-stream prefix
        let mut prev_best = f64::INFINITY;
        for r in 1..=6 {
            let cfg_r = OptimizerConfig { restarts: r, seed: 99, ..Default::default() };
            let out = multi_restart_minimize(obj, 4, &cfg_r).unwrap();
            assert!(out.best_value <= prev_best + 1e-12);
            prev_best = out.best_value;
        }
    }

    #[test]
    fn fixed_start_bounds_best_value() {
        let obj = |x: &[f64]| -> f64 { (x[0] - 2.0).powi(2) + 7.0 };
        let cfg = OptimizerConfig { restarts: 1, ..Default::default() };
        let start = vec![2.0];
        let at_start = obj(&start);
        let out = multi_restart_minimize_seeded(obj, 1, &cfg, &[start]).unwrap();
        assert!(out.best_value <= at_start);
        assert!((out.best_value - 7.0).abs() < 1e-9);
    }

    #[test]
    fn decoded_isometries_are_isometric() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for (din, dout) in [(2usize, 4usize), (3, 3), (2, 8), (4, 4)] {
            let p = IsometryParam::random(&mut rng, din, dout);
            let v = p.decode();
            let gram = v.adjoint().matmul(&v).unwrap();
            assert!(gram.max_entry_diff(&ComplexMatrix::identity(din)) < 1e-10);
        }
    }

    #[test]
    fn degenerate_raw_still_decodes_to_isometry() {
        let p = IsometryParam::new(3, 4, vec![0.0; 24]).unwrap();
        let v = p.decode();
        let gram = v.adjoint().matmul(&v).unwrap();
        assert!(gram.max_entry_diff(&ComplexMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn encode_decode_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..50 {
            let v = orthonormalize_columns(&ginibre(&mut rng, 6, 3));
            let p = IsometryParam::encode(&v);
            assert!(p.decode().max_entry_diff(&v) < 1e-10);
        }
    }

    #[test]
    fn channel_decoding_identity_and_trace_out() {
        // identity columns with env 1
        let p = IsometryParam::encode(&ComplexMatrix::identity(3));
        let ch = channel_from_isometry(&p, 3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let rho = random_state(&mut rng, 3);
        assert!(ch.apply_matrix(&rho).unwrap().max_entry_diff(&rho) < 1e-12);

        // out_dim = 1 traces out
        let pt = IsometryParam::encode(&ComplexMatrix::identity(3));
        let tr_ch = channel_from_isometry(&pt, 1, 3).unwrap();
        let out = tr_ch.apply_matrix(&rho).unwrap();
        assert_eq!(out.rows(), 1);
        assert!((out[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_channels_are_cptp() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..20 {
            let p = IsometryParam::random(&mut rng, 3, 6);
            let ch = channel_from_isometry(&p, 2, 3).unwrap();
            let rho = random_state(&mut rng, 3);
            let out = ch.apply_matrix(&rho).unwrap();
            assert!((out.trace().re - 1.0).abs() < 1e-9);
            let eig = crate::linalg::hermitian_eig(&out).unwrap();
            assert!(*eig.eigenvalues.last().unwrap() > -1e-9);
        }
    }

    #[test]
    fn povm_decoding() {
        // computational projectors
        let mut v = ComplexMatrix::zeros(4, 2);
        v[(0, 0)] = Complex64::new(1.0, 0.0); // outcome 0 block
        v[(3, 1)] = Complex64::new(1.0, 0.0); // outcome 1 block
        let p = IsometryParam::encode(&v);
        let povm = povm_from_isometry(&p, 2).unwrap();
        let mut e0 = ComplexMatrix::zeros(2, 2);
        e0[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(povm.elements()[0].max_entry_diff(&e0) < 1e-12);

        // single outcome is the identity
        let p1 = IsometryParam::encode(&ComplexMatrix::identity(3));
        let povm1 = povm_from_isometry(&p1, 1).unwrap();
        assert!(povm1.elements()[0].max_entry_diff(&ComplexMatrix::identity(3)) < 1e-12);

        // random POVMs sum to identity
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let p = IsometryParam::random(&mut rng, 3, 12);
        let povm = povm_from_isometry(&p, 4).unwrap();
        povm.validate().unwrap();
    }

    #[test]
    fn stochastic_rows_normalize() {
        let q = stochastic_from_raw(&[0.0; 6], 2, 3);
        for v in &q {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        let q = stochastic_from_raw(&[40.0, 0.0, 0.0, 40.0], 2, 2);
        assert!(q[0] > 1.0 - 1e-12 && q[3] > 1.0 - 1e-12);
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let raw: Vec<f64> = (0..12).map(|_| crate::states::random::normal(&mut rng)).collect();
        let q = stochastic_from_raw(&raw, 3, 4);
        for r in 0..3 {
            let s: f64 = q[r * 4..(r + 1) * 4].iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(q[r * 4..(r + 1) * 4].iter().all(|&x| x >= 0.0));
        }
    }
}
