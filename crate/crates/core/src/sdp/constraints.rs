use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::signal::{grid_index, half_width, Index2};

/// Entries `(row, col)` of `Q0` whose sum is pinned to `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFamily {
    /// `k[col] - k[row]` for every entry.
    pub offset: Index2,
    pub target: f64,
    pub entries: Vec<(usize, usize)>,
}

/// The trace constraints on the `n^2 x n^2` Gram block, one family per offset
/// up to conjugation: the family of `-k` is the transpose of the family of `k`
/// and its constraint is the complex conjugate, so only one of each pair is
/// kept. The full label map (both halves) is kept for the solver.
#[derive(Clone, Debug)]
pub struct TraceConstraints {
    n: usize,
    families: Vec<TraceFamily>,
    labels: Vec<usize>,
    counts: Vec<usize>,
    zero_label: usize,
}

fn canonical(d: Index2) -> bool {
    d.k2 > 0 || (d.k2 == 0 && d.k1 >= 0)
}

pub fn assemble_trace_constraints(n: usize) -> Result<TraceConstraints> {
    half_width(n)?;
    let big = n * n;
    let ks: Vec<Index2> = (0..big).map(|i| grid_index(n, i)).collect();
    let mut ids: HashMap<Index2, usize> = HashMap::new();
    let mut labels = vec![0; big * big];
    let mut counts = Vec::new();
    let mut families: Vec<TraceFamily> = Vec::new();
    let mut family_of_label: Vec<Option<usize>> = Vec::new();
    // column-major over (row, col) to match the solver's storage
    for col in 0..big {
        for row in 0..big {
            let d = Index2::new(ks[col].k1 - ks[row].k1, ks[col].k2 - ks[row].k2);
            let id = *ids.entry(d).or_insert_with(|| {
                counts.push(0);
                if canonical(d) {
                    families.push(TraceFamily {
                        offset: d,
                        target: if d == Index2::new(0, 0) { 1.0 } else { 0.0 },
                        entries: Vec::new(),
                    });
                    family_of_label.push(Some(families.len() - 1));
                } else {
                    family_of_label.push(None);
                }
                counts.len() - 1
            });
            labels[col * big + row] = id;
            counts[id] += 1;
            if let Some(f) = family_of_label[id] {
                families[f].entries.push((row, col));
            }
        }
    }
    let zero_label = ids[&Index2::new(0, 0)];
    Ok(TraceConstraints {
        n,
        families,
        labels,
        counts,
        zero_label,
    })
}

impl TraceConstraints {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Independent families, one per conjugate pair of offsets.
    pub fn families(&self) -> &[TraceFamily] {
        &self.families
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub(crate) fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub(crate) fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub(crate) fn zero_label(&self) -> usize {
        self.zero_label
    }

    /// `max_k |tr(Theta_k Q0) - delta_k|` for `Q0` given column-major.
    pub fn max_residual(&self, q0: impl Fn(usize, usize) -> Complex64) -> f64 {
        self.families
            .iter()
            .map(|f| {
                let s: Complex64 = f.entries.iter().map(|&(r, c)| q0(r, c)).sum();
                (s - f.target).norm()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    /// Entries of `Q0` selected by `tr((Theta_{k2} (x) Theta_{k1}) Q0)` with
    /// `Theta_k[i, j] = 1` iff `j - i = k`.
    fn dense_mask(n: usize, k: Index2) -> BTreeSet<(usize, usize)> {
        let theta = |k: i64| {
            let mut t = vec![vec![0u8; n]; n];
            for (i, row) in t.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    if j as i64 - i as i64 == k {
                        *v = 1;
                    }
                }
            }
            t
        };
        let (t1, t2) = (theta(k.k1), theta(k.k2));
        let mut out = BTreeSet::new();
        for p in 0..n * n {
            for q in 0..n * n {
                let (p1, p2, q1, q2) = (p % n, p / n, q % n, q / n);
                if t2[p2][q2] * t1[p1][q1] == 1 {
                    // tr(A Q0) = sum_{p,q} A[p,q] Q0[q,p]
                    out.insert((q, p));
                }
            }
        }
        out
    }

    #[test]
    fn n3_examples() {
        let tc = assemble_trace_constraints(3).unwrap();
        let zero = tc.families().iter().find(|f| f.offset == Index2::new(0, 0)).unwrap();
        assert_eq!(zero.target, 1.0);
        let diag: BTreeSet<_> = (0..9).map(|i| (i, i)).collect();
        assert_eq!(zero.entries.iter().copied().collect::<BTreeSet<_>>(), diag);
        let corner = tc.families().iter().find(|f| f.offset == Index2::new(2, 2)).unwrap();
        assert_eq!(corner.entries.len(), 1);
        assert_eq!(corner.target, 0.0);
    }

    #[test]
    fn families_match_dense_kronecker_masks() {
        for n in [3usize, 5] {
            let tc = assemble_trace_constraints(n).unwrap();
            let span = n as i64 - 1;
            let mut distinct = BTreeSet::new();
            for k1 in -span..=span {
                for k2 in -span..=span {
                    let mask = dense_mask(n, Index2::new(k1, k2));
                    let conj: BTreeSet<_> = mask.iter().map(|&(a, b)| (b, a)).collect();
                    distinct.insert(mask.clone().min(conj));
                }
            }
            assert_eq!(tc.len(), distinct.len());
            assert_eq!(tc.len(), ((2 * n - 1) * (2 * n - 1) + 1) / 2);
            for f in tc.families() {
                let mine: BTreeSet<_> = f.entries.iter().copied().collect();
                let conj: BTreeSet<_> = mine.iter().map(|&(a, b)| (b, a)).collect();
                assert!(distinct.contains(&mine.clone().min(conj)));
            }
        }
        assert_eq!(assemble_trace_constraints(3).unwrap().len(), 13);
    }

    #[test]
    fn even_grid_is_rejected() {
        assert!(assemble_trace_constraints(4).is_err());
    }

    #[test]
    fn identity_over_n_squared_is_feasible() {
        let n = 5;
        let tc = assemble_trace_constraints(n).unwrap();
        let res = tc.max_residual(|r, c| {
            if r == c {
                Complex64::new(1.0 / (n * n) as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert!(res < 1e-15);
    }
}
