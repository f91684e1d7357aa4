"""End-to-end protocol orchestration with adversary modes and Monte Carlo.

The quantum legs are replaced everywhere by their exact classical
equivalent: Bob's generalized Bell measurement outcome is X_hat_i =
X_i + N_i with N_i i.i.d. from the convolved noise, which is justified by
the Bell-diagonality of the received state and checked against the exact
oracle in the tests.  The masked variant (run_protocol3) adds a public
uniform one-time pad X_bar and decodes on X_under - X_bar; under coupled
randomness it is verdict-identical to the unmasked run.

Randomness discipline: one master seed derives a fixed tuple of named
substreams (seed-S, seed-S', Y, L2, channel noise, mask, adversary), so
transcripts are reproducible byte for byte and the masked/unmasked pair can
be coupled.  Secrecy under interception is never sampled; intercept mode
aborts at reception and reports the analytic secrecy bound instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import linprog

from .bounds import eps_E_bound
from .dists import PauliDist, convolve
from .qexact import SizeCapError
from .gf import FieldVec, toeplitz_matrix
from .hashing import SeedS, SeedSPrime, f_s_split, g_sprime, psi_s
from .wiretap import ClassicalChannelWc, LinearCodeSpec

_STREAMS = ("s", "s_prime", "y", "l2", "noise", "mask", "adversary", "message")


@dataclass(frozen=True)
class AdversaryMode:
    """Exactly one of: none, intercept, or tamper with a substitution rule.

    ``tamper_fn(x_hat, rng)`` returns the substituted reception; the default
    tamper rule replaces it with a uniformly random word.
    """

    kind: str = "none"
    tamper_fn: Callable[[np.ndarray, np.random.Generator], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("none", "intercept", "tamper"):
            raise ValueError(f"unknown adversary kind {self.kind!r}")

    @staticmethod
    def none() -> "AdversaryMode":
        return AdversaryMode("none")

    @staticmethod
    def intercept() -> "AdversaryMode":
        return AdversaryMode("intercept")

    @staticmethod
    def tamper(fn=None) -> "AdversaryMode":
        return AdversaryMode("tamper", fn)


@dataclass
class ProtocolConfig:
    p: int
    n: int
    n1: int
    n2: int
    n3: int
    P: PauliDist
    P_tilde: PauliDist
    code: LinearCodeSpec
    master_seed: int = 0

    def __post_init__(self):
        if self.n1 > 2 * self.n:
            raise ValueError(f"n1 = {self.n1} exceeds 2n = {2 * self.n}")
        if not (self.n1 > self.n2 + self.n3 > 0):
            raise ValueError("need n1 > n2 + n3 > 0")
        if self.P.p != self.p or self.P_tilde.p != self.p:
            raise ValueError("noise distributions must share the config modulus")
        if self.code.p != self.p or self.code.n != self.n or self.code.n1 != self.n1:
            raise ValueError("code parameters do not match the config")

    def effective_noise(self) -> PauliDist:
        return convolve(self.P_tilde, self.P)

    def streams(self) -> dict[str, np.random.Generator]:
        children = np.random.SeedSequence(self.master_seed).spawn(len(_STREAMS))
        return {name: np.random.default_rng(c) for name, c in zip(_STREAMS, children)}


@dataclass
class Transcript:
    """Full run record; ``events`` keeps the public-communication ordering."""

    s: list[int]
    s_prime: list[int]
    c: list[int]
    x_bar: list[int] | None
    x: list[int]
    x_hat: list[int] | None
    m_hat: list[int] | None
    y_hat: list[int] | None
    verdict: str
    events: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "s": self.s, "s_prime": self.s_prime, "c": self.c,
            "x_bar": self.x_bar, "x": self.x, "x_hat": self.x_hat,
            "m_hat": self.m_hat, "y_hat": self.y_hat,
            "verdict": self.verdict, "events": self.events,
        }
        return json.dumps(payload, sort_keys=True)


def verify(seed_sprime: SeedSPrime, m_hat: FieldVec, y_hat: FieldVec,
           c: FieldVec) -> bool:
    """Accept iff g_S'(M_hat, Y_hat) = C."""
    return g_sprime(seed_sprime, m_hat, y_hat) == c


def _draw_common(config: ProtocolConfig, M: FieldVec, streams):
    p = config.p
    seed_s = SeedS(FieldVec(streams["s"].integers(0, p, config.n1 - 1), p),
                   config.n1, config.n2, config.n3)
    seed_sp = SeedSPrime(
        FieldVec(streams["s_prime"].integers(0, p, config.n2 + config.n3 - 1), p),
        config.n2, config.n3)
    y = FieldVec(streams["y"].integers(0, p, config.n3), p)
    l2 = FieldVec(streams["l2"].integers(0, p, config.n1 - config.n2 - config.n3), p)
    c = g_sprime(seed_sp, M, y)
    info = psi_s(seed_s, M, y, l2)
    x = config.code.encode(info.values)
    return seed_s, seed_sp, y, l2, c, x


def _finish(config: ProtocolConfig, seed_s, seed_sp, c, x_hat_arr,
            events) -> tuple:
    y_hat, m_hat = None, None
    info = FieldVec(config.code.decode(x_hat_arr), config.p)
    y_hat, m_hat = f_s_split(seed_s, info)
    events.append("decode")
    ok = verify(seed_sp, m_hat, y_hat, c)
    events.append("verdict")
    return m_hat, y_hat, ("accept" if ok else "abort")


def run_protocol1(config: ProtocolConfig, M: FieldVec,
                  adversary: AdversaryMode | None = None) -> Transcript:
    """One unmasked run: encode, channel, reception, public S/S'/C, decode."""
    adversary = adversary or AdversaryMode.none()
    streams = config.streams()
    seed_s, seed_sp, y, l2, c, x = _draw_common(config, M, streams)
    events = ["encode", "transmit"]
    if adversary.kind == "intercept":
        events.append("intercepted")
        return Transcript(
            s=seed_s.vec.tolist(), s_prime=seed_sp.vec.tolist(), c=c.tolist(),
            x_bar=None, x=x.tolist(), x_hat=None, m_hat=None, y_hat=None,
            verdict="abort", events=events)
    channel = ClassicalChannelWc(config.effective_noise())
    x_hat = channel.sample(x, streams["noise"])
    events.append("reception_ack")
    events.append("public:s,s_prime,c")
    if adversary.kind == "tamper":
        fn = adversary.tamper_fn or uniform_tamper(config.p)
        x_hat = fn(x_hat, streams["adversary"])
        events.append("tampered")
    m_hat, y_hat, verdict = _finish(config, seed_s, seed_sp, c, x_hat, events)
    return Transcript(
        s=seed_s.vec.tolist(), s_prime=seed_sp.vec.tolist(), c=c.tolist(),
        x_bar=None, x=x.tolist(), x_hat=x_hat.tolist(),
        m_hat=m_hat.tolist(), y_hat=y_hat.tolist(), verdict=verdict,
        events=events)


def run_protocol3(config: ProtocolConfig, M: FieldVec,
                  adversary: AdversaryMode | None = None) -> Transcript:
    """Masked run: public uniform pad X_bar, decode on X_under - X_bar.

    Under the same master seed the pad cancels exactly, so the verdict and
    recovered message coincide with run_protocol1's.
    """
    adversary = adversary or AdversaryMode.none()
    streams = config.streams()
    seed_s, seed_sp, y, l2, c, x = _draw_common(config, M, streams)
    x_bar = streams["mask"].integers(0, config.p, 2 * config.n)
    events = ["encode", "transmit_masked"]
    if adversary.kind == "intercept":
        events.append("intercepted")
        return Transcript(
            s=seed_s.vec.tolist(), s_prime=seed_sp.vec.tolist(), c=c.tolist(),
            x_bar=x_bar.tolist(), x=x.tolist(), x_hat=None, m_hat=None,
            y_hat=None, verdict="abort", events=events)
    channel = ClassicalChannelWc(config.effective_noise())
    x_under = channel.sample((x + x_bar) % config.p, streams["noise"])
    events.append("reception_ack")
    events.append("public:s,s_prime,c,x_bar")
    x_hat = (x_under - x_bar) % config.p
    if adversary.kind == "tamper":
        fn = adversary.tamper_fn or uniform_tamper(config.p)
        x_hat = fn(x_hat, streams["adversary"])
        events.append("tampered")
    m_hat, y_hat, verdict = _finish(config, seed_s, seed_sp, c, x_hat, events)
    return Transcript(
        s=seed_s.vec.tolist(), s_prime=seed_sp.vec.tolist(), c=c.tolist(),
        x_bar=x_bar.tolist(), x=x.tolist(), x_hat=x_hat.tolist(),
        m_hat=m_hat.tolist(), y_hat=y_hat.tolist(), verdict=verdict,
        events=events)


def uniform_tamper(p: int):
    """Default substitution attack: replace the reception with a uniform word."""

    def fn(x_hat: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, p, x_hat.shape)

    return fn


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1.0 + z**2 / trials
    center = (phat + z**2 / (2 * trials)) / denom
    half = z * np.sqrt(phat * (1 - phat) / trials + z**2 / (4 * trials**2)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def monte_carlo(config: ProtocolConfig, trials: int,
                adversary: AdversaryMode | None = None) -> dict:
    """Vectorized Monte Carlo over i.i.d. protocol runs with uniform messages.

    Returns abort/undetected/accepted-and-correct rates with Wilson 95%
    intervals, the coupled ECC block-error rate, and (for intercept mode)
    the analytic secrecy bound, since Eve's advantage is a trace distance
    and not an event frequency.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    adversary = adversary or AdversaryMode.none()
    p, n1, n2, n3 = config.p, config.n1, config.n2, config.n3
    k = n2 + n3
    if adversary.kind == "intercept":
        return {
            "trials": trials, "abort_rate": 1.0, "undetected_error_rate": 0.0,
            "accepted_and_correct_rate": 0.0, "ecc_block_error_rate": None,
            "abort_ci": (1.0, 1.0), "undetected_ci": (0.0, 0.0),
            "accepted_correct_ci": (0.0, 0.0),
            "eps_E_bound": eps_E_bound(config.n, n1 - n2 - n3, config.P),
        }
    streams = config.streams()
    rng = streams["noise"]
    msgs = streams["message"].integers(0, p, (trials, n2))
    seeds_s = streams["s"].integers(0, p, (trials, n1 - 1))
    seeds_sp = streams["s_prime"].integers(0, p, (trials, k - 1))
    ys = streams["y"].integers(0, p, (trials, n3))
    l2s = streams["l2"].integers(0, p, (trials, n1 - k))

    mprime = np.concatenate([ys, msgs], axis=1)
    head = (mprime - _batch_toeplitz(seeds_s, l2s, k, n1 - k, p)) % p
    infos = np.concatenate([head, l2s], axis=1)
    G = np.stack([config.code.encode(e) for e in np.eye(n1, dtype=np.int64)], axis=1)
    words = infos @ G.T % p
    channel = ClassicalChannelWc(config.effective_noise())
    received = channel.sample_batch(words, rng)
    if adversary.kind == "tamper":
        if adversary.tamper_fn is not None:
            received = np.stack([adversary.tamper_fn(r, streams["adversary"])
                                 for r in received])
        else:
            received = streams["adversary"].integers(0, p, received.shape)
    if config.code.decode_batch is not None:
        decoded = config.code.decode_batch(received)
    else:
        decoded = np.stack([config.code.decode(r) for r in received])
    block_err = int(np.sum(np.any(decoded != infos, axis=1)))

    mprime_hat = (decoded[:, :k] + _batch_toeplitz(seeds_s, decoded[:, k:], k, n1 - k, p)) % p
    y_hat, m_hat = mprime_hat[:, :n3], mprime_hat[:, n3:]
    c = (ys + _batch_toeplitz(seeds_sp, msgs, n3, n2, p)) % p
    c_hat = (y_hat + _batch_toeplitz(seeds_sp, m_hat, n3, n2, p)) % p
    accept = np.all(c_hat == c, axis=1)
    wrong = np.any(m_hat != msgs, axis=1)

    n_accept = int(accept.sum())
    n_abort = trials - n_accept
    n_wrong = int(wrong.sum())
    n_undetected = int((accept & wrong).sum())
    n_good = int((accept & ~wrong).sum())
    return {
        "trials": trials,
        "abort_rate": n_abort / trials,
        "undetected_error_rate": (n_undetected / n_wrong) if n_wrong else 0.0,
        "accepted_and_correct_rate": n_good / trials,
        "ecc_block_error_rate": block_err / trials,
        "abort_ci": wilson_interval(n_abort, trials),
        "undetected_ci": wilson_interval(n_undetected, n_wrong) if n_wrong else (0.0, 0.0),
        "accepted_correct_ci": wilson_interval(n_good, trials),
        "wrong_trials": n_wrong,
        "eps_E_bound": None,
    }


def stats_csv(stats: dict) -> str:
    """Monte Carlo stats as CSV: counts, rates, and Wilson 95% intervals."""
    header = ["trials", "abort_rate", "abort_lo", "abort_hi",
              "undetected_error_rate", "undetected_lo", "undetected_hi",
              "accepted_and_correct_rate", "accepted_correct_lo",
              "accepted_correct_hi", "ecc_block_error_rate"]
    ecc = stats.get("ecc_block_error_rate")
    row = [stats["trials"], stats["abort_rate"], *stats["abort_ci"],
           stats["undetected_error_rate"], *stats["undetected_ci"],
           stats["accepted_and_correct_rate"], *stats["accepted_correct_ci"],
           "" if ecc is None else ecc]
    fmt = [str(row[0])] + [f"{v:.12g}" if v != "" else "" for v in row[1:]]
    return ",".join(header) + "\n" + ",".join(fmt) + "\n"


def _batch_toeplitz(seeds: np.ndarray, xs: np.ndarray, d1: int, d2: int,
                    p: int) -> np.ndarray:
    """Row-wise T(seed_r) @ x_r for per-trial seeds; output (trials, d1)."""
    trials = seeds.shape[0]
    out = np.zeros((trials, d1), dtype=np.int64)
    for i in range(1, d1 + 1):
        for j in range(1, d2 + 1):
            out[:, i - 1] += seeds[:, i - j + d2 - 1] * xs[:, j - 1]
    return out % p


# ---------------------------------------------------------------------------
# Lemma-style leakage comparison for the public verification variables
# ---------------------------------------------------------------------------

def _min_sigma_distance(joint: np.ndarray) -> float:
    """min over distributions sigma of sum_{m,f} |P(m,f) - P(m) sigma(f)|.

    ``joint`` has shape (M, F).  Solved exactly as a linear program.
    """
    m_count, f_count = joint.shape
    pm = joint.sum(axis=1)
    n_sigma = f_count
    n_u = m_count * f_count
    cost = np.concatenate([np.zeros(n_sigma), np.ones(n_u)])
    # u_{mf} >= +-(P(m,f) - pm sigma_f)
    rows = []
    rhs = []
    for m in range(m_count):
        for f in range(f_count):
            row = np.zeros(n_sigma + n_u)
            row[f] = pm[m]
            row[n_sigma + m * f_count + f] = -1.0
            rows.append(row)
            rhs.append(joint[m, f])
            row2 = np.zeros(n_sigma + n_u)
            row2[f] = -pm[m]
            row2[n_sigma + m * f_count + f] = -1.0
            rows.append(row2)
            rhs.append(-joint[m, f])
    a_eq = np.zeros((1, n_sigma + n_u))
    a_eq[0, :n_sigma] = 1.0
    res = linprog(cost, A_ub=np.stack(rows), b_ub=np.array(rhs), A_eq=a_eq,
                  b_eq=[1.0], bounds=[(0, None)] * (n_sigma + n_u),
                  method="highs")
    if not res.success:
        raise RuntimeError(f"leakage LP failed: {res.message}")
    return float(res.fun)


def lnm_check(p: int, n2: int, n3: int, eve_kernel: np.ndarray) -> tuple[float, float]:
    """Both sides of the public-verification leakage comparison.

    ``eve_kernel[e, m']`` is a classical channel from the wiretap message
    M' = (Y, M) to Eve's register E'.  Builds the full joint of
    (M, E', S', C) with uniform M, Y, S' and C = g_S'(M, Y), and returns
    (d(M; E' S' C), d(M'; E')), each an exact LP minimization.  The first
    never exceeds the second: the verification variables give no extra
    information about the message.
    """
    kernel = np.asarray(eve_kernel, dtype=float)
    m_count = p**n2
    y_count = p**n3
    s_count = p ** (n2 + n3 - 1)
    if kernel.shape[1] != m_count * y_count:
        raise ValueError("kernel must have one column per (Y, M) pair")
    e_count = kernel.shape[0]
    if m_count * y_count * s_count * e_count > 10**6:
        raise SizeCapError("instance too large for exact enumeration")

    def unrank(idx, length):
        out = np.zeros(length, dtype=np.int64)
        for j in range(length - 1, -1, -1):
            out[j] = idx % p
            idx //= p
        return out

    # d(M'; E'): joint over (m', e')
    joint_me = np.zeros((m_count * y_count, e_count))
    for mp in range(m_count * y_count):
        joint_me[mp] = kernel[:, mp] / (m_count * y_count)
    right = _min_sigma_distance(joint_me)

    # d(M; E' S' C): joint over (m, (e', s', c))
    joint = np.zeros((m_count, e_count * s_count * y_count))
    for m_idx in range(m_count):
        mv = unrank(m_idx, n2)
        for y_idx in range(y_count):
            yv = unrank(y_idx, n3)
            mp_idx = y_idx * m_count + m_idx
            for s_idx in range(s_count):
                sv = unrank(s_idx, n2 + n3 - 1)
                tmat = toeplitz_matrix(sv, n3, n2)
                cv = (yv + tmat @ mv) % p
                c_idx = 0
                for v in cv:
                    c_idx = c_idx * p + int(v)
                col_base = (s_idx * y_count + c_idx) * e_count
                w = 1.0 / (m_count * y_count * s_count)
                joint[m_idx, col_base:col_base + e_count] += w * kernel[:, mp_idx]
    left = _min_sigma_distance(joint)
    return left, right
