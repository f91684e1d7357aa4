import numpy as np
import pytest

from pdckit.dists import PauliDist, convolve, depolarizing
from pdckit.gf import FieldVec
from pdckit.hashing import SeedSPrime
from pdckit.protocol import (AdversaryMode, ProtocolConfig, lnm_check,
                             monte_carlo, run_protocol1, run_protocol3,
                             verify, wilson_interval)
from pdckit.wiretap import identity_code, repetition_code


def noiseless_config(seed=0):
    p = 2
    delta = PauliDist.point_mass(0, 0, p)
    return ProtocolConfig(p=p, n=8, n1=4, n2=1, n3=2, P=delta, P_tilde=delta,
                          code=repetition_code(p, 4, 4, delta),
                          master_seed=seed)


def dep_config(seed=0, mix=0.05):
    p = 2
    d = depolarizing(mix, p)
    eff = convolve(d, d)
    return ProtocolConfig(p=p, n=8, n1=4, n2=1, n3=2, P=d, P_tilde=d,
                          code=repetition_code(p, 4, 4, eff), master_seed=seed)


# ---------------------------------------------------------------
# single runs
# ---------------------------------------------------------------

def test_noiseless_always_accepts():
    for seed in range(20):
        cfg = noiseless_config(seed)
        m = FieldVec([seed % 2], 2)
        tr = run_protocol1(cfg, m)
        assert tr.verdict == "accept"
        assert tr.m_hat == m.tolist()


def test_intercept_aborts_and_reports_bound():
    cfg = dep_config(3)
    tr = run_protocol1(cfg, FieldVec([1], 2), AdversaryMode.intercept())
    assert tr.verdict == "abort"
    assert tr.x_hat is None
    stats = monte_carlo(cfg, 10, AdversaryMode.intercept())
    assert stats["abort_rate"] == 1.0
    assert stats["eps_E_bound"] is not None


def test_transcript_determinism():
    m = FieldVec([1], 2)
    a = run_protocol1(dep_config(17), m).to_json()
    b = run_protocol1(dep_config(17), m).to_json()
    assert a == b
    c = run_protocol1(dep_config(18), m).to_json()
    assert a != c


def test_public_communication_ordering():
    tr = run_protocol1(dep_config(5), FieldVec([0], 2))
    ack = tr.events.index("reception_ack")
    pub = next(i for i, e in enumerate(tr.events) if e.startswith("public"))
    assert pub > ack
    tr3 = run_protocol3(dep_config(5), FieldVec([0], 2))
    ack = tr3.events.index("reception_ack")
    pub = next(i for i, e in enumerate(tr3.events) if e.startswith("public"))
    assert pub > ack


def test_accept_implies_hash_match():
    cfg = dep_config(23)
    sp = None
    for seed in range(30):
        cfg = dep_config(seed)
        tr = run_protocol1(cfg, FieldVec([1], 2))
        if tr.verdict == "accept":
            sp = SeedSPrime(FieldVec(tr.s_prime, 2), cfg.n2, cfg.n3)
            assert verify(sp, FieldVec(tr.m_hat, 2), FieldVec(tr.y_hat, 2),
                          FieldVec(tr.c, 2))


# ---------------------------------------------------------------
# masked/unmasked coupling
# ---------------------------------------------------------------

def test_protocol_coupling():
    rng = np.random.default_rng(0)
    for trial in range(200):
        cfg = dep_config(int(rng.integers(0, 2**31)), mix=0.1)
        m = FieldVec(rng.integers(0, 2, 1), 2)
        t1 = run_protocol1(cfg, m)
        t3 = run_protocol3(cfg, m)
        assert t1.verdict == t3.verdict
        assert t1.m_hat == t3.m_hat
        assert t1.x_hat == t3.x_hat  # the pad cancels exactly


def test_mask_uniformizes_transmission():
    # transmitted word (x + x_bar) is uniform regardless of the message
    rng = np.random.default_rng(1)
    counts = np.zeros(4)
    trials = 4000
    for i in range(trials):
        cfg = dep_config(i, mix=0.0)
        tr = run_protocol3(cfg, FieldVec([1], 2))
        sent = (np.array(tr.x) + np.array(tr.x_bar)) % 2
        counts[2 * sent[0] + sent[1]] += 1
    freqs = counts / trials
    # chi-square against uniform on the first pair
    chi2 = trials * np.sum((freqs - 0.25) ** 2 / 0.25)
    assert chi2 < 16.27  # 99.9% quantile of chi2(3)


# ---------------------------------------------------------------
# verification
# ---------------------------------------------------------------

def test_verify_exhaustive_tightness():
    p = 2
    n2 = n3 = 1
    for m in range(p):
        for mh in range(p):
            if m == mh:
                continue
            for y in range(p):
                for yh in range(p):
                    accepts = 0
                    for s in range(p ** (n2 + n3 - 1)):
                        sp = SeedSPrime(FieldVec([s], p), n2, n3)
                        c = FieldVec([(y + s * m) % p], p)
                        accepts += verify(sp, FieldVec([mh], p),
                                          FieldVec([yh], p), c)
                    assert accepts == p ** (n2 + n3 - 1 - n3) * 1  # = 1 of 2


def test_monte_carlo_tamper_bounded_by_verification():
    p = 2
    delta = PauliDist.point_mass(0, 0, p)
    # identity code at n = 8 gives n1 = 16, room for n2 = 1, n3 = 10
    cfg = ProtocolConfig(p=p, n=8, n1=16, n2=1, n3=10, P=delta, P_tilde=delta,
                         code=identity_code(p, 8), master_seed=0)
    stats = monte_carlo(cfg, 10**5, AdversaryMode.tamper())
    q = 2.0**-10
    sigma = np.sqrt(q * (1 - q) / stats["wrong_trials"])
    assert stats["undetected_error_rate"] <= q + 3 * sigma


def test_monte_carlo_noiseless():
    stats = monte_carlo(noiseless_config(4), 500)
    assert stats["abort_rate"] == 0.0
    assert stats["accepted_and_correct_rate"] == 1.0


def test_monte_carlo_abort_below_block_error():
    stats = monte_carlo(dep_config(9), 10**4)
    assert stats["abort_rate"] <= stats["ecc_block_error_rate"] + 1e-12


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert wilson_interval(0, 100)[0] == 0.0


# ---------------------------------------------------------------
# verification variables leak nothing extra
# ---------------------------------------------------------------

def test_lnm_independent():
    kernel = np.full((1, 4), 1.0)
    left, right = lnm_check(2, 1, 1, kernel)
    assert left < 1e-9 and right < 1e-9


def test_lnm_exact_copy():
    left, right = lnm_check(2, 1, 1, np.eye(4))
    assert left <= right + 1e-9
    assert right > 1.0  # Eve holding M' exactly is maximally revealing


def test_lnm_noisy_copy():
    rng = np.random.default_rng(2)
    kernel = 0.7 * np.eye(4) + 0.3 * rng.dirichlet(np.ones(4), size=4).T
    kernel /= kernel.sum(axis=0, keepdims=True)
    left, right = lnm_check(2, 1, 1, kernel)
    assert left <= right + 1e-9


# ---------------------------------------------------------------
# config validation
# ---------------------------------------------------------------

def test_config_validation():
    p = 2
    d = depolarizing(0.05, p)
    eff = convolve(d, d)
    with pytest.raises(ValueError):
        ProtocolConfig(p=p, n=1, n1=4, n2=1, n3=2, P=d, P_tilde=d,
                       code=repetition_code(p, 4, 4, eff))
    with pytest.raises(ValueError):
        ProtocolConfig(p=p, n=8, n1=4, n2=2, n3=2, P=d, P_tilde=d,
                       code=repetition_code(p, 4, 4, eff))
