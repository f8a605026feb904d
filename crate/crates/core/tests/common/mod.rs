#![allow(dead_code)]

use std::path::PathBuf;

use faer::Mat;
use lse2d::signal::{AtomSet, Frequency2D, Index2, SampleGrid, SpikePattern};
use lse2d::Complex64;
use serde::Deserialize;

#[derive(Deserialize)]
struct RawInstance {
    n: usize,
    lambda: f64,
    atoms: Vec<[f64; 4]>,
    spikes: Vec<[f64; 4]>,
    y: Vec<[f64; 2]>,
    reference_objective: f64,
    primal_objective: f64,
}

#[derive(Deserialize)]
struct RawSet {
    instances: Vec<RawInstance>,
}

/// An observation together with the primal pair that generated it and the
/// optimal value reported by an interior-point reference solver.
pub struct RegressionInstance {
    pub n: usize,
    pub lambda: f64,
    pub atoms: AtomSet,
    pub spikes: SpikePattern,
    pub y: SampleGrid,
    pub reference_objective: f64,
    pub primal_objective: f64,
}

pub fn regression_set() -> Vec<RegressionInstance> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/sdp_regression.json");
    let text = std::fs::read_to_string(&path).expect("regression data");
    let raw: RawSet = serde_json::from_str(&text).expect("regression json");
    raw.instances
        .into_iter()
        .map(|r| {
            let freqs: Vec<Frequency2D> = r.atoms.iter().map(|a| Frequency2D::new(a[0], a[1])).collect();
            let amps: Vec<Complex64> = r.atoms.iter().map(|a| Complex64::new(a[2], a[3])).collect();
            let support = r.spikes.iter().map(|s| Index2::new(s[0] as i64, s[1] as i64)).collect();
            let values = r.spikes.iter().map(|s| Complex64::new(s[2], s[3])).collect();
            RegressionInstance {
                n: r.n,
                lambda: r.lambda,
                atoms: AtomSet::from_parts(&freqs, &amps).unwrap(),
                spikes: SpikePattern::new(r.n, support, values).unwrap(),
                y: SampleGrid::from_vec(r.n, r.y.iter().map(|v| Complex64::new(v[0], v[1])).collect()).unwrap(),
                reference_objective: r.reference_objective,
                primal_objective: r.primal_objective,
            }
        })
        .collect()
}

/// Succeeds iff `a + shift I` admits a Cholesky factorization, i.e. the
/// smallest eigenvalue of `a` exceeds `-shift`.
pub fn cholesky_with_shift(a: &Mat<Complex64>, shift: f64) -> bool {
    let n = a.nrows();
    let mut l = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let mut d = a[(j, j)].re + shift;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let dj = d.sqrt();
        l[j][j] = Complex64::new(dj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / dj;
        }
    }
    true
}

/// Largest deviation of `sum_{k[col]-k[row]=d} Q0[row, col]` from its target,
/// over every offset, computed from the raw index arithmetic.
pub fn brute_trace_residual(q0: &Mat<Complex64>, n: usize) -> f64 {
    let m = ((n - 1) / 2) as i64;
    let big = n * n;
    let k = |i: usize| ((i % n) as i64 - m, (i / n) as i64 - m);
    let span = 2 * n - 1;
    let mut sums = vec![Complex64::new(0.0, 0.0); span * span];
    for col in 0..big {
        for row in 0..big {
            let (c1, c2) = k(col);
            let (r1, r2) = k(row);
            let d1 = (c1 - r1 + 2 * m) as usize;
            let d2 = (c2 - r2 + 2 * m) as usize;
            sums[d2 * span + d1] += q0[(row, col)];
        }
    }
    let origin = (2 * m as usize) * span + 2 * m as usize;
    sums.iter()
        .enumerate()
        .map(|(i, s)| (s - if i == origin { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(g: &SampleGrid) -> f64 {
    g.as_slice().iter().map(|v| v.norm()).fold(0.0, f64::max)
}
