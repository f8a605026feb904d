//! Ground truth: spectral atoms, sample grids, spiky noise and separation.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attempts allowed when rejection-sampling a separated frequency set.
pub const REJECTION_BUDGET: usize = 10_000;

/// Reduce a real number onto the unit circle `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let w = x.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// A point of the two-dimensional torus `[0, 1)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frequency2D {
    pub f1: f64,
    pub f2: f64,
}

impl Frequency2D {
    /// Builds a frequency, wrapping both coordinates into `[0, 1)`.
    pub fn new(f1: f64, f2: f64) -> Self {
        Frequency2D {
            f1: wrap_unit(f1),
            f2: wrap_unit(f2),
        }
    }

    pub fn offset(self, d1: f64, d2: f64) -> Self {
        Frequency2D::new(self.f1 + d1, self.f2 + d2)
    }
}

fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Signed displacement `b - a` on the circle, in `[-1/2, 1/2)`.
pub fn circle_delta(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(1.0);
    if d >= 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// The l-infinity wrap-around distance on the torus.
pub fn wrap_distance(a: Frequency2D, b: Frequency2D) -> f64 {
    circle_distance(a.f1, b.f1).max(circle_distance(a.f2, b.f2))
}

/// Sample index `k = (k1, k2)` in the symmetric set `{-m..m}^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Index2 {
    pub k1: i64,
    pub k2: i64,
}

impl Index2 {
    pub fn new(k1: i64, k2: i64) -> Self {
        Index2 { k1, k2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub freq: Frequency2D,
    pub amp: Complex64,
}

/// A discrete spectral measure: frequencies with complex amplitudes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomSet {
    atoms: Vec<Atom>,
}

impl AtomSet {
    /// Rejects duplicated frequencies.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            for b in &atoms[..i] {
                if wrap_distance(a.freq, b.freq) == 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "duplicate frequency ({}, {})",
                        a.freq.f1, a.freq.f2
                    )));
                }
            }
        }
        Ok(AtomSet { atoms })
    }

    pub fn empty() -> Self {
        AtomSet { atoms: Vec::new() }
    }

    pub fn from_parts(freqs: &[Frequency2D], amps: &[Complex64]) -> Result<Self> {
        if freqs.len() != amps.len() {
            return Err(Error::DimensionMismatch(freqs.len(), amps.len()));
        }
        AtomSet::new(
            freqs
                .iter()
                .zip(amps)
                .map(|(&freq, &amp)| Atom { freq, amp })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn frequencies(&self) -> Vec<Frequency2D> {
        self.atoms.iter().map(|a| a.freq).collect()
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.atoms.iter().map(|a| a.amp).collect()
    }

    /// Total-variation norm of the measure, `sum |d_i|`.
    pub fn tv_norm(&self) -> f64 {
        self.atoms.iter().map(|a| a.amp.norm()).sum()
    }
}

/// Returns `m = (n - 1) / 2`, rejecting even or zero `n`.
pub fn half_width(n: usize) -> Result<usize> {
    if n % 2 == 0 {
        return Err(Error::EvenGrid(n));
    }
    Ok((n - 1) / 2)
}

/// `n x n` complex samples over the symmetric index set.
///
/// Storage is column-major with `k1` running fastest, matching `vec` of the
/// matrix whose rows are indexed by `k1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    n: usize,
    data: Vec<Complex64>,
}

impl SampleGrid {
    pub fn zeros(n: usize) -> Result<Self> {
        half_width(n)?;
        Ok(SampleGrid {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        })
    }

    pub fn from_vec(n: usize, data: Vec<Complex64>) -> Result<Self> {
        half_width(n)?;
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(data.len(), n * n));
        }
        Ok(SampleGrid { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> i64 {
        ((self.n - 1) / 2) as i64
    }

    pub fn contains(&self, k: Index2) -> bool {
        let m = self.m();
        k.k1.abs() <= m && k.k2.abs() <= m
    }

    /// Linear position of `k` in the storage.
    pub fn position(&self, k: Index2) -> usize {
        grid_position(self.n, k)
    }

    /// Index at linear position `i`.
    pub fn index_at(&self, i: usize) -> Index2 {
        grid_index(self.n, i)
    }

    pub fn get(&self, k: Index2) -> Complex64 {
        self.data[self.position(k)]
    }

    pub fn set(&mut self, k: Index2, v: Complex64) {
        let p = self.position(k);
        self.data[p] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn indices(&self) -> impl Iterator<Item = Index2> + '_ {
        (0..self.data.len()).map(move |i| self.index_at(i))
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).sum()
    }
}

pub fn grid_position(n: usize, k: Index2) -> usize {
    let m = ((n - 1) / 2) as i64;
    ((k.k2 + m) as usize) * n + (k.k1 + m) as usize
}

pub fn grid_index(n: usize, i: usize) -> Index2 {
    let m = ((n - 1) / 2) as i64;
    Index2::new((i % n) as i64 - m, (i / n) as i64 - m)
}

/// Sparse corruption: a support `Omega` in `J` with nonzero values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikePattern {
    n: usize,
    support: Vec<Index2>,
    values: Vec<Complex64>,
}

impl SpikePattern {
    pub fn new(n: usize, support: Vec<Index2>, values: Vec<Complex64>) -> Result<Self> {
        let m = half_width(n)? as i64;
        if support.len() != values.len() {
            return Err(Error::DimensionMismatch(support.len(), values.len()));
        }
        let mut seen = BTreeSet::new();
        for (k, v) in support.iter().zip(&values) {
            if k.k1.abs() > m || k.k2.abs() > m {
                return Err(Error::InvalidInput(format!("spike index {k:?} outside the grid")));
            }
            if !seen.insert(*k) {
                return Err(Error::InvalidInput(format!("repeated spike index {k:?}")));
            }
            if *v == Complex64::new(0.0, 0.0) {
                return Err(Error::InvalidInput(format!("zero spike value at {k:?}")));
            }
        }
        Ok(SpikePattern { n, support, values })
    }

    pub fn empty(n: usize) -> Result<Self> {
        SpikePattern::new(n, Vec::new(), Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[Index2] {
        &self.support
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    pub fn to_grid(&self) -> SampleGrid {
        let mut g = SampleGrid::zeros(self.n).expect("validated at construction");
        for (k, v) in self.support.iter().zip(&self.values) {
            g.set(*k, *v);
        }
        g
    }
}

/// How spike supports are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpikeMode {
    /// A uniformly random subset of exactly `s` indices.
    ExactS,
    /// Each index independently with probability `s / n^2`.
    Bernoulli,
}

/// Minimum pairwise wrap-around distance.
pub fn min_separation(atoms: &AtomSet) -> Result<f64> {
    min_separation_of(&atoms.frequencies())
}

pub fn min_separation_of(freqs: &[Frequency2D]) -> Result<f64> {
    if freqs.len() < 2 {
        return Err(Error::UndefinedSeparation(freqs.len()));
    }
    let mut best = f64::INFINITY;
    for i in 1..freqs.len() {
        for j in 0..i {
            best = best.min(wrap_distance(freqs[i], freqs[j]));
        }
    }
    Ok(best)
}

/// `|d| = 0.5 + g^2` with `g` standard normal, phase uniform on `[0, 2pi)`.
pub fn sample_amplitude<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let g: f64 = StandardNormal.sample(rng);
    let phase = rng.gen::<f64>() * TAU;
    Complex64::from_polar(0.5 + g * g, phase)
}

/// Draws `r` uniform frequencies conditioned on separation `delta_min`, then
/// their amplitudes.
pub fn sample_sources<R: Rng + ?Sized>(r: usize, delta_min: f64, rng: &mut R) -> Result<AtomSet> {
    let freqs = sample_frequencies(r, delta_min, rng)?;
    let amps: Vec<Complex64> = (0..r).map(|_| sample_amplitude(rng)).collect();
    AtomSet::from_parts(&freqs, &amps)
}

pub fn sample_frequencies<R: Rng + ?Sized>(
    r: usize,
    delta_min: f64,
    rng: &mut R,
) -> Result<Vec<Frequency2D>> {
    for _ in 0..REJECTION_BUDGET {
        let freqs: Vec<Frequency2D> = (0..r)
            .map(|_| Frequency2D::new(rng.gen(), rng.gen()))
            .collect();
        if r < 2 || min_separation_of(&freqs)? >= delta_min {
            return Ok(freqs);
        }
    }
    Err(Error::InfeasibleSeparation {
        r,
        delta_min,
        attempts: REJECTION_BUDGET,
    })
}

/// `X_k = sum_i d_i exp(j 2 pi f_i . k)` over the symmetric index set.
pub fn synthesize(atoms: &AtomSet, n: usize) -> Result<SampleGrid> {
    let mut x = SampleGrid::zeros(n)?;
    let m = x.m();
    for atom in atoms.atoms() {
        let e1 = phasors(atom.freq.f1, m, 1.0);
        let e2 = phasors(atom.freq.f2, m, 1.0);
        for (b, w2) in e2.iter().enumerate() {
            let scaled = atom.amp * w2;
            for (a, w1) in e1.iter().enumerate() {
                x.data[b * n + a] += scaled * w1;
            }
        }
    }
    Ok(x)
}

/// `exp(sign * j 2 pi f k)` for `k = -m..=m`.
pub fn phasors(f: f64, m: i64, sign: f64) -> Vec<Complex64> {
    (-m..=m)
        .map(|k| {
            // reduce the phase first so large k keeps full precision
            let t = wrap_unit(f * k as f64);
            Complex64::from_polar(1.0, sign * TAU * t)
        })
        .collect()
}

pub fn sample_spikes<R: Rng + ?Sized>(
    s: usize,
    n: usize,
    mode: SpikeMode,
    rng: &mut R,
) -> Result<SpikePattern> {
    half_width(n)?;
    let capacity = n * n;
    if s > capacity {
        return Err(Error::InvalidCount { s, capacity });
    }
    let mut positions: Vec<usize> = match mode {
        SpikeMode::ExactS => rand::seq::index::sample(rng, capacity, s).into_vec(),
        SpikeMode::Bernoulli => {
            let p = s as f64 / capacity as f64;
            (0..capacity).filter(|_| rng.gen_bool(p)).collect()
        }
    };
    positions.sort_unstable();
    let support: Vec<Index2> = positions.iter().map(|&i| grid_index(n, i)).collect();
    let values = support.iter().map(|_| sample_amplitude(rng)).collect();
    SpikePattern::new(n, support, values)
}

/// `Y = X + Z`.
pub fn observe(x: &SampleGrid, z: &SpikePattern) -> Result<SampleGrid> {
    if x.n != z.n {
        return Err(Error::DimensionMismatch(x.n, z.n));
    }
    let mut y = x.clone();
    for (k, v) in z.support.iter().zip(&z.values) {
        let p = y.position(*k);
        y.data[p] += v;
    }
    Ok(y)
}

/// A replayable ground-truth instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub atoms: AtomSet,
    pub spikes: SpikePattern,
}

impl Instance {
    pub fn clean(&self) -> Result<SampleGrid> {
        synthesize(&self.atoms, self.n)
    }

    pub fn observation(&self) -> Result<SampleGrid> {
        observe(&self.clean()?, &self.spikes)
    }
}
