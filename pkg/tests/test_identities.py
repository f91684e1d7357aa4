import numpy as np

from pdckit import qexact as qx
from pdckit.dists import convolve, depolarizing
from pdckit.identities import (check_identities, omega_state,
                               random_pauli_dist)


def test_omega_state_marginals():
    # the B-side channel leaves the AE marginal untouched and convolves AB
    p = 2
    P = depolarizing(0.1, p)
    Pt = depolarizing(0.2, p)
    omega = omega_state(P, Pt)
    om_ae = qx.partial_trace(omega, [0, 2])
    tau_ae = qx.partial_trace(qx.purify(P).density(), [0, 2])
    assert np.max(np.abs(om_ae.matrix - tau_ae.matrix)) < 1e-12
    om_ab = qx.partial_trace(omega, [0, 1])
    assert np.max(np.abs(om_ab.matrix
                         - qx.bell_diagonal(convolve(Pt, P)).matrix)) < 1e-12


def test_identity_suite_small_grid():
    rng = np.random.default_rng(0)
    for p in (2, 3):
        P = random_pauli_dist(p, rng)
        Pt = random_pauli_dist(p, rng)
        res = check_identities(P, Pt, ts=np.array([0.1, 0.5, 0.9]))
        assert res.within(1e-8), res


def test_identity_suite_depolarizing():
    res = check_identities(depolarizing(0.05, 2), depolarizing(0.05, 2),
                           ts=np.array([0.3, 0.7]))
    assert res.within(1e-8), res


def test_sandwich_solver_cold_start_agrees_with_seeded():
    # guards the seeded acceptance runs against a silently non-descending solver
    rng = np.random.default_rng(1)
    for p in (2, 3):
        P = random_pauli_dist(p, rng)
        tau_ae = qx.partial_trace(qx.purify(P).density(), [0, 2])
        states = np.stack([
            np.kron(qx.weyl(x, z, p).matrix, np.eye(p * p)) @ tau_ae.matrix
            @ np.kron(qx.weyl(x, z, p).matrix, np.eye(p * p)).conj().T
            for x in range(p) for z in range(p)])
        weights = np.full(p * p, 1.0 / (p * p))
        for t in (0.1, 0.5):
            f_cold, _ = qx._minimize_xi(states, weights, 1 + t)
            f_up, sig = qx._minimize_xi([tau_ae.matrix], [1.0], 1 + t,
                                        trace_first=p)
            f_seeded, _ = qx._minimize_xi(states, weights, 1 + t,
                                          sigma0=np.kron(np.eye(p) / p, sig))
            assert abs(np.log2(f_cold) - np.log2(f_seeded)) < 1e-9


def test_random_pauli_dist_strictly_positive():
    rng = np.random.default_rng(2)
    for p in (2, 3, 5):
        d = random_pauli_dist(p, rng)
        assert d.flat().min() > 1e-4
