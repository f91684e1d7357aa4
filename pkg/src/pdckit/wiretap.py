"""Modular wire-tap coding: ECC baselines, the induced classical channel,
exact leakage enumeration, and the finite-length leakage bound.

A codeword is a vector in F_p^{2n} read as n symplectic pairs; the channel
adds i.i.d. pair noise drawn from a PauliDist (the convolution of the two
Pauli channel legs).  The wiretap code composes a linear error-correcting
code with the inverse-hash randomization from the hashing module: encoding
draws L2 uniformly and sends phi_e(psi_S(M, Y, L2)); decoding applies f_S
to the ECC decision.

Baseline codes: identity (n1 = 2n), r-fold symbol repetition, and random
linear codes, all decoded by exhaustive maximum likelihood at desk scale.
Polar/LDPC codes are deliberately only an interface; check_code_conformance
validates third-party plug-ins against the same contract.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import qexact
from .dists import PauliDist
from .gf import FieldVec, toeplitz_matrix
from .hashing import SeedS, f_s_split, psi_s

_ENUM_CAP = 10**6


# ---------------------------------------------------------------------------
# linear codes
# ---------------------------------------------------------------------------

@dataclass
class LinearCodeSpec:
    """Pluggable linear code phi = (encode, decode) on F_p^{n1} -> F_p^{2n}.

    ``encode`` maps an (n1,) int array to a (2n,) codeword; ``decode`` maps a
    (2n,) word back to an (n1,) information vector.  ``decode_batch`` is an
    optional vectorized decoder on (m, 2n) arrays used by Monte Carlo runs.
    """

    p: int
    n: int
    n1: int
    encode: Callable[[np.ndarray], np.ndarray]
    decode: Callable[[np.ndarray], np.ndarray]
    decode_batch: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "code"

    def all_messages(self) -> np.ndarray:
        """All p^{n1} information vectors, one per row."""
        total = self.p**self.n1
        if total > _ENUM_CAP:
            raise qexact.SizeCapError(
                f"enumeration of {total} messages exceeds cap {_ENUM_CAP}")
        idx = np.arange(total)
        out = np.zeros((total, self.n1), dtype=np.int64)
        for j in range(self.n1 - 1, -1, -1):
            out[:, j] = idx % self.p
            idx //= self.p
        return out

    def all_codewords(self) -> np.ndarray:
        msgs = self.all_messages()
        return np.stack([self.encode(m) for m in msgs])


def _batch_ml_decoder(table: np.ndarray, messages: np.ndarray,
                      noise: PauliDist):
    """Exhaustive ML decoding against a codeword table under pair noise."""
    p = noise.p
    logq = np.full(p * p, -1e18)
    flat = noise.flat()
    pos = flat > 0
    logq[pos] = np.log(flat[pos])
    n_pairs = table.shape[1] // 2
    cw_pairs = (table[:, 0::2] * p + table[:, 1::2]).astype(np.int64)
    # difference table on pair labels: d[v, v'] = (x-x', z-z') as a label
    v = np.arange(p * p)
    vx, vz = v // p, v % p
    diff = ((vx[:, None] - vx[None, :]) % p) * p + (vz[:, None] - vz[None, :]) % p

    def decode_batch(words: np.ndarray) -> np.ndarray:
        words = np.atleast_2d(words)
        rec_pairs = (words[:, 0::2] * p + words[:, 1::2]).astype(np.int64)
        out = np.empty((words.shape[0], messages.shape[1]), dtype=np.int64)
        chunk = max(1, int(2e7) // (cw_pairs.shape[0] * n_pairs))
        for start in range(0, words.shape[0], chunk):
            rp = rec_pairs[start:start + chunk]
            # log-likelihood of every codeword for every received word
            ll = logq[diff[rp[:, None, :], cw_pairs[None, :, :]]].sum(axis=2)
            out[start:start + chunk] = messages[np.argmax(ll, axis=1)]
        return out

    def decode(word: np.ndarray) -> np.ndarray:
        return decode_batch(word)[0]

    return decode, decode_batch


def identity_code(p: int, n: int) -> LinearCodeSpec:
    """The trivial rate-1 code with n1 = 2n."""
    ident = lambda v: np.asarray(v, dtype=np.int64) % p

    def decode_batch(words):
        return np.atleast_2d(np.asarray(words, dtype=np.int64) % p)

    return LinearCodeSpec(p=p, n=n, n1=2 * n, encode=ident, decode=ident,
                          decode_batch=decode_batch, name="identity")


def _generator_code(G: np.ndarray, p: int, n: int, noise: PauliDist,
                    name: str) -> LinearCodeSpec:
    n1 = G.shape[1]

    def encode(v):
        v = np.asarray(v, dtype=np.int64) % p
        return (G @ v) % p

    code = LinearCodeSpec(p=p, n=n, n1=n1, encode=encode, decode=lambda w: w,
                          name=name)
    table = code.all_codewords()
    decode, decode_batch = _batch_ml_decoder(table, code.all_messages(), noise)
    code.decode = decode
    code.decode_batch = decode_batch
    return code


def repetition_code(p: int, n1: int, r: int, noise: PauliDist) -> LinearCodeSpec:
    """Each information symbol repeated r times; exhaustive ML decoding.

    Needs r * n1 even so codewords split into symplectic pairs.
    """
    if (r * n1) % 2 != 0:
        raise ValueError("r * n1 must be even (codewords hold symplectic pairs)")
    G = np.zeros((r * n1, n1), dtype=np.int64)
    for j in range(n1):
        G[j * r:(j + 1) * r, j] = 1
    return _generator_code(G, p, (r * n1) // 2, noise, f"repetition-r{r}")


def random_linear_code(p: int, n: int, n1: int, noise: PauliDist,
                       rng: np.random.Generator) -> LinearCodeSpec:
    """Random full-rank generator with exhaustive ML decoding (2n <= 8, p <= 3)."""
    if 2 * n > 8 or p > 3:
        raise ValueError("random linear baseline limited to 2n <= 8, p <= 3")
    for _ in range(200):
        G = rng.integers(0, p, size=(2 * n, n1))
        if _gf_rank(G, p) == n1:
            return _generator_code(G.astype(np.int64), p, n, noise, "random-linear")
    raise RuntimeError("failed to draw a full-rank generator")


def _gf_rank(mat: np.ndarray, p: int) -> int:
    m = mat.astype(np.int64) % p
    m = m.copy()
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        piv = None
        for r in range(rank, rows):
            if m[r, c] % p:
                piv = r
                break
        if piv is None:
            continue
        m[[rank, piv]] = m[[piv, rank]]
        inv = pow(int(m[rank, c]), p - 2, p)
        m[rank] = (m[rank] * inv) % p
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] = (m[r] - m[r, c] * m[rank]) % p
        rank += 1
    return rank


def check_code_conformance(code: LinearCodeSpec, rng: np.random.Generator | None = None,
                           samples: int = 50) -> None:
    """Validate the plug-in contract: linearity, injectivity, round trip.

    Raises ValueError on the first violated property.
    """
    rng = rng or np.random.default_rng(0)
    p, n1 = code.p, code.n1
    zero = code.encode(np.zeros(n1, dtype=np.int64))
    if zero.shape != (2 * code.n,) or zero.any():
        raise ValueError("encode(0) must be the zero word of length 2n")
    seen = set()
    for _ in range(samples):
        a = rng.integers(0, p, n1)
        b = rng.integers(0, p, n1)
        c = int(rng.integers(0, p))
        lhs = code.encode((a + c * b) % p)
        rhs = (code.encode(a) + c * code.encode(b)) % p
        if not np.array_equal(lhs % p, rhs):
            raise ValueError("encode is not linear")
        if not np.array_equal(code.decode(code.encode(a)) % p, a % p):
            raise ValueError("decode(encode(x)) != x on noiseless input")
        seen.add(tuple(code.encode(a).tolist()))
    if p**n1 <= 4096:
        words = {tuple(w.tolist()) for w in code.all_codewords()}
        if len(words) != p**n1:
            raise ValueError("encode is not injective")


# ---------------------------------------------------------------------------
# channels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalChannelWc:
    """Additive pair-noise channel W^c(x,z | x',z') = noise(x-x', z-z')."""

    noise: PauliDist

    def sample(self, codeword: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """received_i = codeword_i + N_i with N_i i.i.d. pair noise."""
        return self.sample_batch(codeword[None, :], rng)[0]

    def sample_batch(self, codewords: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        cw = np.atleast_2d(np.asarray(codewords, dtype=np.int64))
        p = self.noise.p
        if cw.shape[1] % 2:
            raise ValueError("codewords must hold whole symplectic pairs")
        npairs = cw.shape[1] // 2
        labels = rng.choice(p * p, size=(cw.shape[0], npairs), p=self.noise.flat())
        noise = np.empty_like(cw)
        noise[:, 0::2] = labels // p
        noise[:, 1::2] = labels % p
        return (cw + noise) % p


def channel_sample(codeword: np.ndarray, channel: ClassicalChannelWc,
                   rng: np.random.Generator) -> np.ndarray:
    return channel.sample(np.asarray(codeword, dtype=np.int64), rng)


class ClassicalEveChannel:
    """Eve observes the codeword through a classical channel W[e, word-index].

    ``dist(codeword)`` returns the distribution over Eve's alphabet.
    """

    is_quantum = False

    def __init__(self, dist_fn: Callable[[np.ndarray], np.ndarray], n_outputs: int,
                 name: str = "classical-eve"):
        self._fn = dist_fn
        self.n_outputs = n_outputs
        self.name = name

    def state(self, codeword: np.ndarray) -> np.ndarray:
        d = np.asarray(self._fn(np.asarray(codeword, dtype=np.int64)), dtype=float)
        if d.shape != (self.n_outputs,) or abs(d.sum() - 1.0) > 1e-9:
            raise ValueError("Eve channel returned an invalid distribution")
        return d


def _word_index(word: np.ndarray, p: int) -> int:
    idx = 0
    for s in word:
        idx = idx * p + int(s)
    return idx


def eve_noiseless(p: int, n: int) -> ClassicalEveChannel:
    """Eve sees the transmitted word exactly."""
    total = p ** (2 * n)

    def fn(word):
        d = np.zeros(total)
        d[_word_index(word, p)] = 1.0
        return d

    return ClassicalEveChannel(fn, total, "eve-noiseless")


def eve_constant(p: int, n: int) -> ClassicalEveChannel:
    """Eve's observation carries no signal."""
    return ClassicalEveChannel(lambda word: np.ones(1), 1, "eve-constant")


def eve_additive(noise: PauliDist, n: int) -> ClassicalEveChannel:
    """Eve sees the word through the additive pair-noise channel."""
    p = noise.p
    total = p ** (2 * n)

    def fn(word):
        d = np.ones(1)
        for i in range(n):
            pair = np.roll(np.roll(noise.probs, int(word[2 * i]), axis=0),
                           int(word[2 * i + 1]), axis=1).reshape(-1)
            d = np.kron(d, pair)
        return d

    return ClassicalEveChannel(fn, total, "eve-additive")


def eve_first_symbol(p: int, n: int) -> ClassicalEveChannel:
    """Eve learns only the first symbol of the word (deterministic)."""

    def fn(word):
        d = np.zeros(p)
        d[int(word[0])] = 1.0
        return d

    return ClassicalEveChannel(fn, p, "eve-first-symbol")


class QuantumEveChannel:
    """Eve holds (U_{g_1} x ... x U_{g_n}) tau_AE^{x n} (.)^dag per codeword.

    Dimension grows as (p^3)^n, so n <= 2 and p = 2 are enforced.
    """

    is_quantum = True

    def __init__(self, P: PauliDist, n: int):
        if P.p != 2 or n > 2:
            raise ValueError("quantum Eve instances are limited to p = 2, n <= 2")
        self.p = P.p
        self.n = n
        psi = qexact.purify(P)
        self.tau_ae = qexact.partial_trace(psi.density(), [0, 2]).matrix
        self.name = "eve-quantum"

    def state(self, codeword: np.ndarray) -> np.ndarray:
        word = np.asarray(codeword, dtype=np.int64)
        p = self.p
        out = np.ones((1, 1), dtype=complex)
        for i in range(self.n):
            u = np.kron(qexact.weyl(int(word[2 * i]), int(word[2 * i + 1]), p).matrix,
                        np.eye(p * p))
            out = np.kron(out, u @ self.tau_ae @ u.conj().T)
        return out


# ---------------------------------------------------------------------------
# wiretap code operations
# ---------------------------------------------------------------------------

def wiretap_encode(code: LinearCodeSpec, seed: SeedS, M: FieldVec, Y: FieldVec,
                   rng: np.random.Generator) -> np.ndarray:
    """Draw L2 uniformly and transmit phi_e(psi_S(M, Y, L2))."""
    if seed.n1 != code.n1 or seed.p != code.p:
        raise ValueError("seed parameters do not match the code")
    l2 = FieldVec(rng.integers(0, code.p, seed.n1 - seed.n2 - seed.n3), code.p)
    info = psi_s(seed, M, Y, l2)
    return code.encode(info.values)


def wiretap_decode(code: LinearCodeSpec, seed: SeedS,
                   received: np.ndarray) -> tuple[FieldVec, FieldVec]:
    """(Y_hat, M_hat) = f_S(phi_d(received))."""
    info = FieldVec(code.decode(np.asarray(received, dtype=np.int64)), code.p)
    return f_s_split(seed, info)


def _all_vectors(p: int, length: int) -> np.ndarray:
    total = p**length
    idx = np.arange(total)
    out = np.zeros((total, length), dtype=np.int64)
    for j in range(length - 1, -1, -1):
        out[:, j] = idx % p
        idx //= p
    return out


def _hash_values(p: int, n1: int, k: int, seed_vec: np.ndarray,
                 infos: np.ndarray) -> np.ndarray:
    """f_S over a batch of information words, as M' row vectors."""
    T = toeplitz_matrix(seed_vec, k, n1 - k)
    return (infos[:, :k] + infos[:, k:] @ T.T) % p


def exact_leakage(code: LinearCodeSpec, n2: int, n3: int, eve,
                  seeds: np.ndarray | None = None) -> float:
    """Exact average leakage d_bar(M'; E S) by full enumeration.

    Enumerates every seed S (or the supplied subset), every message m', and
    the uniform randomization inside each hash preimage; Eve's conditional
    states come from ``eve.state`` on the encoded codewords.  Uses the
    paper's unhalved 1-norm, so values range up to 2.
    """
    p, n1 = code.p, code.n1
    k = n2 + n3
    if not (n1 >= k > 0):
        raise ValueError("need n1 >= n2 + n3 > 0")
    n_seeds = p ** (n1 - 1) if seeds is None else len(seeds)
    total_states = n_seeds * p**n1
    if total_states > _ENUM_CAP:
        raise qexact.SizeCapError(
            f"enumeration of {total_states} states exceeds cap {_ENUM_CAP}")
    infos = _all_vectors(p, n1)
    words = np.stack([code.encode(v) for v in infos])
    states = [eve.state(w) for w in words]
    avg = sum(states) / len(states)
    if seeds is None:
        seeds = _all_vectors(p, n1 - 1)

    def one_norm(mat):
        if eve.is_quantum:
            return float(np.abs(np.linalg.eigvalsh(mat)).sum())
        return float(np.abs(mat).sum())

    mprime_count = p**k
    total = 0.0
    for seed_vec in seeds:
        mvals = _hash_values(p, n1, k, seed_vec, infos)
        midx = np.zeros(len(infos), dtype=np.int64)
        for j in range(k):
            midx = midx * p + mvals[:, j]
        d_s = 0.0
        for m in range(mprime_count):
            members = np.nonzero(midx == m)[0]
            cond = sum(states[i] for i in members) / len(members)
            d_s += one_norm(cond - avg) / mprime_count
        total += d_s
    return total / len(seeds)


def per_message_leakage(code: LinearCodeSpec, n2: int, n3: int, eve,
                        seed_vec: np.ndarray) -> np.ndarray:
    """||tau_{E|m'} - tau_E||_1 for every m' at one fixed seed."""
    p, n1 = code.p, code.n1
    k = n2 + n3
    infos = _all_vectors(p, n1)
    words = np.stack([code.encode(v) for v in infos])
    states = [eve.state(w) for w in words]
    avg = sum(states) / len(states)
    mvals = _hash_values(p, n1, k, seed_vec, infos)
    midx = np.zeros(len(infos), dtype=np.int64)
    for j in range(k):
        midx = midx * p + mvals[:, j]

    def one_norm(mat):
        if eve.is_quantum:
            return float(np.abs(np.linalg.eigvalsh(mat)).sum())
        return float(np.abs(mat).sum())

    out = np.empty(p**k)
    for m in range(p**k):
        members = np.nonzero(midx == m)[0]
        cond = sum(states[i] for i in members) / len(members)
        out[m] = one_norm(cond - avg)
    return out


def theorem1_bound(l2_size: int, eve, code: LinearCodeSpec,
                   t_grid: np.ndarray | None = None,
                   return_curve: bool = False):
    """Finite-length leakage bound, capped at 2.

        d_bar <= min_t 2^{(1-t)/(1+t)} 2^{(t/(1+t)) (-log2 L2 + I(t))}

    with I(t) the optimized sandwiched Renyi mutual information of Eve's
    channel restricted to the code, under the uniform codeword distribution.
    Classical Eve channels use the Sibson closed form; quantum ones the
    oracle's numerical infimum (any feasible point only enlarges the bound,
    so validity is preserved).
    """
    from .dists import sibson_mutual_info

    if l2_size < 1:
        raise ValueError("L2 size must be >= 1")
    if t_grid is None:
        t_grid = np.linspace(0.05, 1.0, 20) if eve.is_quantum else np.linspace(0.01, 1.0, 100)
    words = code.all_codewords()
    weights = np.full(len(words), 1.0 / len(words))
    if eve.is_quantum:
        states = np.stack([eve.state(w) for w in words])
    else:
        Wmat = np.stack([eve.state(w) for w in words]).T  # (outputs, inputs)

    best = np.inf
    curve = []
    sigma = None
    for t in t_grid:
        alpha = 1.0 + t
        if eve.is_quantum:
            f, sigma = qexact._minimize_xi(states, weights, alpha, sigma0=sigma)
            info = float(np.log2(f) / t)
        else:
            info = sibson_mutual_info(weights, Wmat, alpha)
        log2_val = (1.0 - t) / (1.0 + t) + (t / (1.0 + t)) * (-np.log2(l2_size) + info)
        val = min(2.0, float(np.exp2(log2_val)))
        curve.append((float(t), val))
        best = min(best, val)
    if return_curve:
        return best, curve
    return best
