//! Support and amplitude recovery from a dual solution.
//!
//! Sources sit where the dual polynomial `Q(f) = sum_k C_k e^{-j 2 pi f.k}`
//! reaches modulus one; spikes sit where `|C_k|` reaches `lambda`.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{grid_position, synthesize, AtomSet, Frequency2D, Index2, SampleGrid, SpikePattern};
use crate::trigpoly::{Polarity, TrigPoly2D};

/// Success threshold on the normalized reconstruction error.
pub const SUCCESS_NMSE: f64 = 1e-3;

/// Reciprocal condition below which the least-squares design is rejected.
pub const MIN_FIT_RCOND: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoveryOptions {
    pub points_per_axis: usize,
    /// Peaks of `|Q|` below `1 - peak_tol` are ignored.
    pub peak_tol: f64,
    /// Coefficients with `|C_k| >= lambda (1 - sat_tol)` are spikes.
    pub sat_tol: f64,
    /// Newton steps on `|Q|^2` after the quadratic fit; 0 keeps the fit.
    pub newton_iters: usize,
    /// Detections whose fitted magnitude is at most `prune_tol * max |Y_k|`
    /// are dropped and the rest refitted; 0 keeps every detection.
    pub prune_tol: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            points_per_axis: 256,
            peak_tol: 1e-2,
            sat_tol: 1e-3,
            newton_iters: 10,
            prune_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub sources: AtomSet,
    pub spikes: SpikePattern,
    pub nmse: f64,
    pub success: bool,
}

/// `|Q|` on the `P x P` grid `f = (p1/P, p2/P)`, stored at `p2 * P + p1`.
pub fn eval_dual_poly_grid(c: &SampleGrid, points_per_axis: usize) -> Result<Vec<f64>> {
    if points_per_axis < 4 * c.n() {
        return Err(Error::InvalidInput(format!(
            "{points_per_axis} points per axis is below 4n = {}",
            4 * c.n()
        )));
    }
    Ok(TrigPoly2D::from_grid(c, Polarity::Negative).abs_grid(points_per_axis))
}

/// Vertex offset of the parabola through `(-1, l), (0, c), (1, r)`.
fn parabola_vertex(l: f64, c: f64, r: f64) -> f64 {
    let den = l - 2.0 * c + r;
    if den < 0.0 {
        (0.5 * (l - r) / den).clamp(-0.5, 0.5)
    } else {
        0.0
    }
}

/// Grid nodes that are strict local maxima over their 8 neighbours (with
/// wrap-around) and reach `threshold`.
fn strict_maxima(grid: &[f64], p: usize, threshold: f64) -> Vec<(usize, usize)> {
    let at = |a: usize, b: usize, da: isize, db: isize| {
        let i = (a as isize + da).rem_euclid(p as isize) as usize;
        let j = (b as isize + db).rem_euclid(p as isize) as usize;
        grid[j * p + i]
    };
    let mut out = Vec::new();
    for b in 0..p {
        for a in 0..p {
            let v = grid[b * p + a];
            if v < threshold {
                continue;
            }
            let strict = (-1..=1)
                .flat_map(|da| (-1..=1).map(move |db| (da, db)))
                .filter(|&d| d != (0, 0))
                .all(|(da, db)| v > at(a, b, da, db));
            if strict {
                out.push((a, b));
            }
        }
    }
    out
}

/// Frequencies where `|Q|` peaks at or above `1 - peak_tol`. Each strict grid
/// maximum is refined by a separable quadratic fit and Newton ascent; refined
/// peaks within one grid cell of a stronger one are dropped.
pub fn locate_sources(c: &SampleGrid, opts: &RecoveryOptions) -> Result<Vec<Frequency2D>> {
    let p = opts.points_per_axis;
    let grid = eval_dual_poly_grid(c, p)?;
    let poly = TrigPoly2D::from_grid(c, Polarity::Negative);
    let threshold = 1.0 - opts.peak_tol;
    let cell = 1.0 / p as f64;
    let g = |a: isize, b: isize| {
        let i = a.rem_euclid(p as isize) as usize;
        let j = b.rem_euclid(p as isize) as usize;
        grid[j * p + i]
    };

    let mut peaks: Vec<(Frequency2D, f64)> = Vec::new();
    for (a, b) in strict_maxima(&grid, p, threshold) {
        let (ai, bi) = (a as isize, b as isize);
        let v = g(ai, bi);
        let d1 = parabola_vertex(g(ai - 1, bi), v, g(ai + 1, bi));
        let d2 = parabola_vertex(g(ai, bi - 1), v, g(ai, bi + 1));
        let start = Frequency2D::new((a as f64 + d1) * cell, (b as f64 + d2) * cell);
        let (f, val) = if opts.newton_iters > 0 {
            poly.refine_peak(start, cell, opts.newton_iters)
        } else {
            (start, poly.eval(start, 0, 0).norm())
        };
        if val >= threshold {
            peaks.push((f, val));
        }
    }

    peaks.sort_by(|x, y| y.1.total_cmp(&x.1));
    let mut kept: Vec<Frequency2D> = Vec::new();
    for (f, _) in peaks {
        if kept.iter().all(|&k| crate::signal::wrap_distance(k, f) > cell) {
            kept.push(f);
        }
    }
    Ok(kept)
}

/// Indices with `|C_k| >= lambda (1 - sat_tol)`, in storage order.
pub fn locate_spikes(c: &SampleGrid, lambda: f64, sat_tol: f64) -> Vec<Index2> {
    let cut = lambda * (1.0 - sat_tol);
    c.indices().filter(|&k| c.get(k).norm() >= cut).collect()
}

/// Joint least-squares fit of source amplitudes and spike values to `y`.
pub fn estimate_amplitudes(
    y: &SampleGrid,
    sources: &[Frequency2D],
    spikes: &[Index2],
) -> Result<(AtomSet, SpikePattern)> {
    let n = y.n();
    let rows = n * n;
    let cols = sources.len() + spikes.len();
    if cols == 0 {
        return Ok((AtomSet::empty(), SpikePattern::empty(n)?));
    }
    if cols > rows {
        return Err(Error::DegenerateFit(0.0));
    }
    let mut a = Mat::<Complex64>::zeros(rows, cols);
    for (j, &f) in sources.iter().enumerate() {
        let col = synthesize(&AtomSet::from_parts(&[f], &[Complex64::new(1.0, 0.0)])?, n)?;
        for (i, v) in col.as_slice().iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    for (j, &k) in spikes.iter().enumerate() {
        if !y.contains(k) {
            return Err(Error::InvalidInput(format!("spike index {k:?} outside the grid")));
        }
        a[(grid_position(n, k), sources.len() + j)] = Complex64::new(1.0, 0.0);
    }

    let svd = a
        .thin_svd()
        .map_err(|err| Error::InvalidInput(format!("singular value decomposition failed: {err:?}")))?;
    let s: Vec<f64> = (0..cols).map(|j| svd.S()[j].re).collect();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
    if rcond < MIN_FIT_RCOND {
        return Err(Error::DegenerateFit(rcond));
    }
    let (u, v) = (svd.U(), svd.V());
    let mut coef = vec![Complex64::new(0.0, 0.0); cols];
    for (l, &sl) in s.iter().enumerate() {
        let proj: Complex64 = (0..rows).map(|i| u[(i, l)].conj() * y.as_slice()[i]).sum::<Complex64>() / sl;
        for (j, cj) in coef.iter_mut().enumerate() {
            *cj += v[(j, l)] * proj;
        }
    }
    let atoms = AtomSet::from_parts(sources, &coef[..sources.len()])?;
    let spikes = SpikePattern::new(n, spikes.to_vec(), coef[sources.len()..].to_vec())?;
    Ok((atoms, spikes))
}

/// `||X - X_hat|| / ||X||` over the samples outside `excluded`, with `X_hat`
/// synthesized from `sources`.
pub fn nmse(x_true: &SampleGrid, sources: &AtomSet, excluded: &[Index2]) -> Result<f64> {
    let n = x_true.n();
    let x_hat = synthesize(sources, n)?;
    let mut keep = vec![true; n * n];
    for &k in excluded {
        if !x_true.contains(k) {
            return Err(Error::InvalidInput(format!("index {k:?} outside the grid")));
        }
        keep[grid_position(n, k)] = false;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (i, (a, b)) in x_true.as_slice().iter().zip(x_hat.as_slice()).enumerate() {
        if keep[i] {
            num += (a - b).norm_sqr();
            den += a.norm_sqr();
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((num / den).sqrt())
}

/// Sources and spikes read off the dual coefficients, with amplitudes fitted
/// to the observation. A degenerate dual can sit on the threshold at places
/// that carry no signal; those detections fit to a negligible magnitude and
/// are pruned before a final refit.
pub fn extract(y: &SampleGrid, c: &SampleGrid, lambda: f64, opts: &RecoveryOptions) -> Result<(AtomSet, SpikePattern)> {
    if y.n() != c.n() {
        return Err(Error::DimensionMismatch(y.n(), c.n()));
    }
    let sources = locate_sources(c, opts)?;
    let spikes = locate_spikes(c, lambda, opts.sat_tol);
    let (atoms, z) = estimate_amplitudes(y, &sources, &spikes)?;
    prune_negligible(y, atoms, z, opts.prune_tol)
}

/// Drops fitted sources and spikes with magnitude at most `tol * max |Y_k|`
/// and refits the remainder; `tol <= 0` returns the fit unchanged.
pub fn prune_negligible(y: &SampleGrid, atoms: AtomSet, z: SpikePattern, tol: f64) -> Result<(AtomSet, SpikePattern)> {
    if tol <= 0.0 {
        return Ok((atoms, z));
    }
    let floor = tol * y.as_slice().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let sources: Vec<Frequency2D> = atoms.atoms().iter().filter(|a| a.amp.norm() > floor).map(|a| a.freq).collect();
    let spikes: Vec<Index2> = z
        .support()
        .iter()
        .zip(z.values())
        .filter(|(_, v)| v.norm() > floor)
        .map(|(k, _)| *k)
        .collect();
    if sources.len() == atoms.len() && spikes.len() == z.len() {
        return Ok((atoms, z));
    }
    estimate_amplitudes(y, &sources, &spikes)
}

/// [`extract`] followed by scoring against the clean signal.
pub fn recover(
    y: &SampleGrid,
    c: &SampleGrid,
    lambda: f64,
    x_true: &SampleGrid,
    opts: &RecoveryOptions,
) -> Result<RecoveryResult> {
    let (sources, spikes) = extract(y, c, lambda, opts)?;
    let nmse = nmse(x_true, &sources, spikes.support())?;
    Ok(RecoveryResult {
        success: nmse <= SUCCESS_NMSE,
        sources,
        spikes,
        nmse,
    })
}
