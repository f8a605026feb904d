"""Reference objectives for the SDP regression set.

Solves the bordered Gram-matrix dual program with cvxpy + Clarabel and writes
crates/core/tests/data/sdp_regression.json. Only instances whose ground-truth
primal cost matches the reference optimum are kept, so the stored primal pair
is optimal and the duality gap against it is zero up to solver accuracy.

    python3 scripts/reference_objectives.py
"""
import json
import pathlib

import cvxpy as cp
import numpy as np
import scipy.sparse as sp


def grid_index(n):
    m = (n - 1) // 2
    # column-major vec: k1 runs fastest
    return np.array([(i % n - m, i // n - m) for i in range(n * n)])


def reference_solve(y_grid, lam):
    n = y_grid.shape[0]
    big = n * n
    y = y_grid.reshape(-1, order="F")
    gram = cp.Variable((big + 1, big + 1), hermitian=True)
    c = gram[:big, big]
    ks = grid_index(n)
    d1 = ks[None, :, 0] - ks[:, None, 0]
    d2 = ks[None, :, 1] - ks[:, None, 1]
    rows, cols, rhs, fams = [], [], [], {}
    for a in range(big):
        for b in range(big):
            d = (int(d1[a, b]), int(d2[a, b]))
            if d < (0, 0):
                continue
            if d not in fams:
                fams[d] = len(fams)
                rhs.append(1.0 if d == (0, 0) else 0.0)
            rows.append(fams[d])
            cols.append(b * (big + 1) + a)
    sel = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(fams), (big + 1) ** 2))
    cons = [gram >> 0, gram[big, big] == 1, cp.abs(c) <= lam, sel @ cp.vec(gram, order="F") == np.array(rhs)]
    prob = cp.Problem(cp.Maximize(cp.real(np.conj(y) @ c)), cons)
    prob.solve(solver="CLARABEL", tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return prob.value


def amplitude(rng):
    return (0.5 + rng.standard_normal() ** 2) * np.exp(2j * np.pi * rng.random())


def make_instance(rng, n, r, s):
    ks = grid_index(n)
    freqs = rng.random((r, 2))
    amps = np.array([amplitude(rng) for _ in range(r)])
    x = np.zeros(n * n, complex)
    for f, d in zip(freqs, amps):
        x += d * np.exp(2j * np.pi * (ks @ f))
    support = rng.choice(n * n, s, replace=False)
    z = np.zeros(n * n, complex)
    for i in support:
        z[i] = amplitude(rng)
    return freqs, amps, support, z, x + z


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/data/sdp_regression.json"
    plan = [(3, 1, 0), (5, 1, 1), (5, 0, 2), (7, 2, 1), (7, 1, 3)]
    rng = np.random.default_rng(20180131)
    instances = []
    for n, r, s in plan:
        lam = 1.0 / n
        for attempt in range(50):
            freqs, amps, support, z, y = make_instance(rng, n, r, s)
            primal = float(np.abs(amps).sum() + lam * np.abs(z).sum())
            ref = reference_solve(y.reshape(n, n, order="F"), lam)
            if abs(ref - primal) <= 1e-7 * primal:
                break
        else:
            raise RuntimeError(f"no optimal instance for {(n, r, s)}")
        ks = grid_index(n)
        instances.append({
            "n": n,
            "lambda": lam,
            "atoms": [[float(f[0]), float(f[1]), float(d.real), float(d.imag)] for f, d in zip(freqs, amps)],
            "spikes": [[int(ks[i][0]), int(ks[i][1]), float(z[i].real), float(z[i].imag)] for i in support],
            "y": [[float(v.real), float(v.imag)] for v in y],
            "reference_objective": ref,
            "primal_objective": primal,
        })
        print(n, r, s, attempt, ref, primal)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"instances": instances}, indent=1) + "\n")


if __name__ == "__main__":
    main()
