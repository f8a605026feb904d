use std::time::Instant;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::constraints::{assemble_trace_constraints, TraceConstraints};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_eigen, hermitian_eigenvalues, reconstruct};
use crate::signal::SampleGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Bound on the distance between the affine iterate and the PSD cone.
    pub tol_psd: f64,
    /// Bound on the trace-constraint residuals.
    pub tol_eq: f64,
    /// Bound on `max |C_k| - lambda`.
    pub tol_ineq: f64,
    /// Relative objective change allowed over `obj_window` iterations.
    pub tol_obj: f64,
    pub obj_window: usize,
    /// Initial penalty.
    pub rho: f64,
    /// Over-relaxation in `(0, 2)`.
    pub alpha: f64,
    /// Penalty is rebalanced every `adapt_every` iterations when the primal and
    /// dual residuals differ by more than `adapt_ratio`; 0 disables it.
    pub adapt_every: usize,
    pub adapt_ratio: f64,
    /// Seeds a small random perturbation of the starting point.
    pub seed: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 50_000,
            tol_psd: 1e-7,
            tol_eq: 1e-7,
            tol_ineq: 1e-9,
            tol_obj: 1e-8,
            obj_window: 50,
            rho: 1.0,
            alpha: 1.6,
            adapt_every: 10,
            adapt_ratio: 10.0,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub y: SampleGrid,
    pub lambda: f64,
}

impl SdpProblem {
    pub fn new(y: SampleGrid, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
        }
        Ok(SdpProblem { y, lambda })
    }

    /// `lambda = 1 / n`.
    pub fn with_default_lambda(y: SampleGrid) -> Self {
        let lambda = 1.0 / y.n() as f64;
        SdpProblem { y, lambda }
    }

    pub fn n(&self) -> usize {
        self.y.n()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `max(0, -lambda_min)` of the returned bordered matrix.
    pub psd_residual: f64,
    /// Frobenius distance between the returned iterate and its PSD projection.
    pub psd_distance: f64,
    pub trace_residuals_max: f64,
    pub linf_violation: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_rho: f64,
    #[serde(skip)]
    pub runtime_secs: f64,
    /// Fixed-point residual `||z_{k+1} - z_k||` per iteration; non-increasing
    /// while the penalty is fixed.
    #[serde(skip)]
    pub merit: Vec<f64>,
    /// `(first iteration, rho)` for each constant-penalty segment.
    #[serde(skip)]
    pub rho_segments: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub c: SampleGrid,
    pub q0: Mat<Complex64>,
    pub lambda: f64,
    pub objective: f64,
    pub diagnostics: Diagnostics,
}

impl SdpSolution {
    /// The bordered matrix `[[Q0, vec C], [vec C^H, 1]]`.
    pub fn bordered(&self) -> Mat<Complex64> {
        let big = self.q0.nrows();
        let mut x = Mat::<Complex64>::zeros(big + 1, big + 1);
        for j in 0..big {
            for i in 0..big {
                x[(i, j)] = self.q0[(i, j)];
            }
            let c = self.c.as_slice()[j];
            x[(j, big)] = c;
            x[(big, j)] = c.conj();
        }
        x[(big, big)] = Complex64::new(1.0, 0.0);
        x
    }
}

/// Projection onto `{tr(Theta_k Q0) = delta_k, |c_k| <= lambda, corner = 1}`
/// combined with the linear objective, writing into `x`.
struct AffineStep<'a> {
    tc: &'a TraceConstraints,
    y: &'a [Complex64],
    lambda: f64,
    sums: Vec<Complex64>,
    corr: Vec<Complex64>,
}

impl AffineStep<'_> {
    fn apply(&mut self, v: &Mat<Complex64>, rho: f64, x: &mut Mat<Complex64>) {
        let big = self.y.len();
        let labels = self.tc.labels();
        let counts = self.tc.counts();
        self.sums.iter_mut().for_each(|s| *s = Complex64::new(0.0, 0.0));
        for col in 0..big {
            for row in 0..big {
                self.sums[labels[col * big + row]] += v[(row, col)];
            }
        }
        for (id, (s, &cnt)) in self.sums.iter().zip(counts).enumerate() {
            let target = if id == self.tc.zero_label() { 1.0 } else { 0.0 };
            self.corr[id] = (s - target) / cnt as f64;
        }
        for col in 0..big {
            for row in 0..big {
                x[(row, col)] = v[(row, col)] - self.corr[labels[col * big + row]];
            }
        }
        // restore exact Hermitian symmetry lost to rounding
        for col in 0..big {
            x[(col, col)] = Complex64::new(x[(col, col)].re, 0.0);
            for row in 0..col {
                let avg = 0.5 * (x[(row, col)] + x[(col, row)].conj());
                x[(row, col)] = avg;
                x[(col, row)] = avg.conj();
            }
        }
        for k in 0..big {
            let mid = 0.5 * (v[(k, big)] + v[(big, k)].conj());
            let mut c = mid + self.y[k] / (2.0 * rho);
            let a = c.norm();
            if a > self.lambda {
                c *= self.lambda / a;
            }
            x[(k, big)] = c;
            x[(big, k)] = c.conj();
        }
        x[(big, big)] = Complex64::new(1.0, 0.0);
    }
}

fn objective(x: &Mat<Complex64>, y: &[Complex64]) -> f64 {
    let big = y.len();
    (0..big).map(|k| (x[(k, big)].conj() * y[k]).re).sum()
}

fn axpby(a: f64, x: &Mat<Complex64>, b: f64, y: &Mat<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * a + y[(i, j)] * b)
}

/// Projects `t` onto the PSD cone using whichever eigen-half is smaller.
fn project(t: &Mat<Complex64>) -> Result<Mat<Complex64>> {
    let (vals, u) = hermitian_eigen(t)?;
    let pos: Vec<usize> = (0..vals.len()).filter(|&j| vals[j] > 0.0).collect();
    if 2 * pos.len() <= vals.len() {
        Ok(reconstruct(&u, &vals, &pos))
    } else {
        let neg: Vec<usize> = (0..vals.len()).filter(|&j| vals[j] < 0.0).collect();
        Ok(t - reconstruct(&u, &vals, &neg))
    }
}

/// ADMM on the split `X` (affine set, box on `C`, objective) = `W` (PSD cone)
/// with over-relaxation and residual-balancing penalty updates. The affine
/// iterate `X` is returned, so the trace and box constraints hold to rounding
/// and the PSD residual is reported separately.
pub fn solve_dual_sdp(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let start = Instant::now();
    let n = problem.n();
    let big = n * n;
    let dim = big + 1;
    let tc = assemble_trace_constraints(n)?;
    let y = problem.y.as_slice();

    let mut w = Mat::<Complex64>::zeros(dim, dim);
    for i in 0..big {
        w[(i, i)] = Complex64::new(1.0 / big as f64, 0.0);
    }
    w[(big, big)] = Complex64::new(1.0, 0.0);
    if let Some(seed) = opts.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for j in 0..dim {
            for i in 0..=j {
                let v = Complex64::new(rng.gen::<f64>() - 0.5, if i == j { 0.0 } else { rng.gen::<f64>() - 0.5 })
                    * (1e-3 / big as f64);
                w[(i, j)] += v;
                if i != j {
                    w[(j, i)] += v.conj();
                }
            }
        }
        w = project(&w)?;
    }
    let mut u = Mat::<Complex64>::zeros(dim, dim);
    let mut x = Mat::<Complex64>::zeros(dim, dim);
    let mut step = AffineStep {
        tc: &tc,
        y,
        lambda: problem.lambda,
        sums: vec![Complex64::new(0.0, 0.0); tc.counts().len()],
        corr: vec![Complex64::new(0.0, 0.0); tc.counts().len()],
    };

    let mut rho = opts.rho;
    let mut z_prev = &w + &u;
    let mut merit = Vec::new();
    let mut rho_segments = vec![(0, rho)];
    let mut objectives: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut primal_res = f64::INFINITY;

    for it in 0..opts.max_iters {
        iterations = it + 1;
        let v = &w - &u;
        step.apply(&v, rho, &mut x);
        let xh = axpby(opts.alpha, &x, 1.0 - opts.alpha, &w);
        let t = &xh + &u;
        let w_new = project(&t)?;
        u = &t - &w_new;
        // z = W + U equals t after the update
        merit.push(frobenius(&(&t - &z_prev)));
        primal_res = frobenius(&(&x - &w_new));
        let dual_res = rho * frobenius(&(&w_new - &w));
        w = w_new;
        z_prev = t;

        let obj = objective(&x, y);
        objectives.push(obj);
        let stalled = it >= opts.obj_window && {
            let old = objectives[it - opts.obj_window];
            (obj - old).abs() <= opts.tol_obj * obj.abs().max(1.0)
        };
        if primal_res <= opts.tol_psd && dual_res <= opts.tol_psd && stalled {
            let tr = tc.max_residual(|r, c| x[(r, c)]);
            let linf = (0..big).map(|k| x[(k, big)].norm()).fold(0.0, f64::max) - problem.lambda;
            if tr <= opts.tol_eq && linf <= opts.tol_ineq {
                converged = true;
                break;
            }
        }

        if opts.adapt_every > 0 && (it + 1) % opts.adapt_every == 0 {
            let scale = if primal_res > opts.adapt_ratio * dual_res {
                2.0
            } else if dual_res > opts.adapt_ratio * primal_res {
                0.5
            } else {
                1.0
            };
            if scale != 1.0 {
                rho *= scale;
                u = axpby(1.0 / scale, &u, 0.0, &u);
                z_prev = &w + &u;
                rho_segments.push((it + 1, rho));
            }
        }
    }

    let mut c = SampleGrid::zeros(n)?;
    for k in 0..big {
        c.as_mut_slice()[k] = x[(k, big)];
    }
    let q0 = Mat::from_fn(big, big, |i, j| x[(i, j)]);
    let lam_min = hermitian_eigenvalues(&x)?.into_iter().fold(f64::INFINITY, f64::min);
    let diagnostics = Diagnostics {
        psd_residual: (-lam_min).max(0.0),
        psd_distance: primal_res,
        trace_residuals_max: tc.max_residual(|r, col| x[(r, col)]),
        linf_violation: ((0..big).map(|k| x[(k, big)].norm()).fold(0.0, f64::max) - problem.lambda).max(0.0),
        iterations,
        converged,
        final_rho: rho,
        runtime_secs: start.elapsed().as_secs_f64(),
        merit,
        rho_segments,
    };
    Ok(SdpSolution {
        objective: objective(&x, y),
        c,
        q0,
        lambda: problem.lambda,
        diagnostics,
    })
}
