use lse2d::recovery::{extract, locate_sources, locate_spikes, recover, RecoveryOptions};
use lse2d::sdp::{duality_gap, solve_dual_sdp, SdpProblem, SdpSolution, SolverOptions};
use lse2d::signal::{synthesize, wrap_distance, AtomSet, Frequency2D, Index2, SpikePattern};
use lse2d::Complex64;

fn solve(problem: &SdpProblem) -> SdpSolution {
    let sol = solve_dual_sdp(problem, &SolverOptions::default()).unwrap();
    assert!(sol.diagnostics.converged);
    sol
}

#[test]
fn single_noiseless_atom_is_localized() {
    let f0 = Frequency2D::new(0.3125, 0.5);
    let atoms = AtomSet::from_parts(&[f0], &[Complex64::new(0.9, -0.6)]).unwrap();
    let x = synthesize(&atoms, 9).unwrap();
    let problem = SdpProblem::with_default_lambda(x.clone());
    let sol = solve(&problem);
    let opts = RecoveryOptions::default();
    let found = locate_sources(&sol.c, &opts).unwrap();
    assert_eq!(found.len(), 1);
    assert!(wrap_distance(found[0], f0) <= 0.5 / opts.points_per_axis as f64);
    assert!(locate_spikes(&sol.c, problem.lambda, opts.sat_tol).is_empty());
}

#[test]
fn two_separated_atoms_give_two_peaks() {
    let n = 9;
    let sep = 3.0 / (n - 1) as f64;
    let freqs = [Frequency2D::new(0.2, 0.4), Frequency2D::new(0.2 + sep, 0.4 + 0.5 * sep)];
    let amps = [Complex64::new(1.0, 0.5), Complex64::new(-0.7, 0.8)];
    let atoms = AtomSet::from_parts(&freqs, &amps).unwrap();
    let x = synthesize(&atoms, n).unwrap();
    let problem = SdpProblem::with_default_lambda(x.clone());
    let sol = solve(&problem);
    let gap = duality_gap(&problem, &sol, &atoms, &SpikePattern::empty(n).unwrap()).unwrap();
    assert!(gap.abs() <= 1e-5 * atoms.tv_norm());

    let opts = RecoveryOptions::default();
    let res = recover(&x, &sol.c, problem.lambda, &x, &opts).unwrap();
    assert_eq!(res.sources.len(), 2);
    assert!(res.spikes.is_empty());
    for f in freqs {
        let d = res.sources.frequencies().iter().map(|g| wrap_distance(*g, f)).fold(f64::INFINITY, f64::min);
        assert!(d <= 1.0 / opts.points_per_axis as f64, "{d}");
    }
    assert!(res.success, "nmse {}", res.nmse);
}

#[test]
fn lone_spike_is_found() {
    let k0 = Index2::new(-1, 2);
    let z = SpikePattern::new(5, vec![k0], vec![Complex64::new(0.4, 1.0)]).unwrap();
    let problem = SdpProblem::new(z.to_grid(), 0.2).unwrap();
    let sol = solve(&problem);
    let opts = RecoveryOptions::default();
    assert_eq!(locate_spikes(&sol.c, problem.lambda, opts.sat_tol), vec![k0]);
    let (atoms, spikes) = extract(&problem.y, &sol.c, problem.lambda, &opts).unwrap();
    assert!(atoms.is_empty());
    assert_eq!(spikes.support(), &[k0]);
    assert!((spikes.values()[0] - z.values()[0]).norm() <= 1e-10);
}
