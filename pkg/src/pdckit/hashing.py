"""Toeplitz universal-hash families and the wiretap randomization encoder.

Two seeded linear hash families over F_p and the matching encoder:

  * f_S : F_p^{n1} -> F_p^{n2+n3},  M' = L1 + T(S) L2, the privacy hash
    whose preimages carry the wiretap randomization;
  * g_S': F_p^{n2} x F_p^{n3} -> F_p^{n3},  C = Y + T(S') M, the error
    verification hash;
  * psi_S, the inverse map feeding the error-correcting encoder.

The combined message block M' is always ordered (Y || M): the covering
variable Y occupies the first n3 symbols and the message M the last n2.
Seeds are plain FieldVecs drawn by the protocol layer from its seeded RNG
stream; hashing itself is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .gf import FieldVec, ToeplitzSeed, toeplitz_apply


@dataclass(frozen=True)
class SeedS:
    """Seed for f_S: a vector of length n1 - 1 plus the (n1, n2, n3) split."""

    vec: FieldVec
    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        if not (self.n1 > self.n2 + self.n3 > 0):
            raise ValueError(f"need n1 > n2 + n3 > 0, got {(self.n1, self.n2, self.n3)}")
        if len(self.vec) != self.n1 - 1:
            raise ValueError(f"seed length {len(self.vec)} != n1 - 1 = {self.n1 - 1}")

    @property
    def p(self) -> int:
        return self.vec.p

    def toeplitz(self) -> ToeplitzSeed:
        """The (n2+n3) x (n1-(n2+n3)) Toeplitz block consuming the full seed."""
        k = self.n2 + self.n3
        return ToeplitzSeed(self.vec, k, self.n1 - k)


@dataclass(frozen=True)
class SeedSPrime:
    """Seed for g_S': a vector of length n2 + n3 - 1."""

    vec: FieldVec
    n2: int
    n3: int

    def __post_init__(self):
        if self.n2 < 1 or self.n3 < 1:
            raise ValueError(f"need n2, n3 >= 1, got {(self.n2, self.n3)}")
        if len(self.vec) != self.n2 + self.n3 - 1:
            raise ValueError(
                f"seed length {len(self.vec)} != n2 + n3 - 1 = {self.n2 + self.n3 - 1}"
            )

    @property
    def p(self) -> int:
        return self.vec.p

    def toeplitz(self) -> ToeplitzSeed:
        return ToeplitzSeed(self.vec, self.n3, self.n2)


def f_s(seed: SeedS, L: FieldVec) -> FieldVec:
    """M' = L1 + T(S) L2, with L1 the first n2+n3 symbols of L.

    The output packs (Y, M): Y = M'[:n3], M = M'[n3:].
    """
    if L.p != seed.p:
        raise ValueError("modulus mismatch between seed and input")
    if len(L) != seed.n1:
        raise ValueError(f"input length {len(L)} != n1 = {seed.n1}")
    k = seed.n2 + seed.n3
    l1 = L.slice(0, k)
    l2 = L.slice(k, seed.n1)
    return l1.add(toeplitz_apply(seed.toeplitz(), l2))


def f_s_split(seed: SeedS, L: FieldVec) -> tuple[FieldVec, FieldVec]:
    """f_S with the (Y, M) slots returned separately."""
    mp = f_s(seed, L)
    return mp.slice(0, seed.n3), mp.slice(seed.n3, seed.n2 + seed.n3)


def g_sprime(seed: SeedSPrime, M: FieldVec, Y: FieldVec) -> FieldVec:
    """Error-verification hash C = Y + T(S') M."""
    if M.p != seed.p or Y.p != seed.p:
        raise ValueError("modulus mismatch between seed and inputs")
    if len(M) != seed.n2 or len(Y) != seed.n3:
        raise ValueError(
            f"lengths ({len(M)}, {len(Y)}) != (n2, n3) = ({seed.n2}, {seed.n3})"
        )
    return Y.add(toeplitz_apply(seed.toeplitz(), M))


def y_of(M: FieldVec, seed: SeedSPrime, C: FieldVec) -> FieldVec:
    """The unique Y with g_S'(M, Y) = C, namely Y = C - T(S') M."""
    if len(C) != seed.n3:
        raise ValueError(f"C length {len(C)} != n3 = {seed.n3}")
    return C.sub(toeplitz_apply(seed.toeplitz(), M))


def psi_s(seed: SeedS, M: FieldVec, Y: FieldVec, L2: FieldVec) -> FieldVec:
    """Randomized preimage (M' - T(S) L2, L2) of M' = (Y || M) under f_S.

    This is the information word handed to the error-correcting encoder;
    f_s(seed, psi_s(seed, M, Y, L2)) = (Y || M) for every L2 by cancellation.
    """
    if len(M) != seed.n2 or len(Y) != seed.n3:
        raise ValueError(
            f"lengths ({len(M)}, {len(Y)}) != (n2, n3) = ({seed.n2}, {seed.n3})"
        )
    if len(L2) != seed.n1 - (seed.n2 + seed.n3):
        raise ValueError(
            f"L2 length {len(L2)} != n1 - (n2+n3) = {seed.n1 - seed.n2 - seed.n3}"
        )
    mprime = Y.concat(M)
    head = mprime.sub(toeplitz_apply(seed.toeplitz(), L2))
    return head.concat(L2)


def collision_probability(l: FieldVec, lp: FieldVec, n1: int, n2: int, n3: int) -> Fraction:
    """Exact Pr over uniform seeds S that f_S(l) = f_S(l').

    The difference f_S(l) - f_S(l') = (L1 - L1') + T(S)(L2 - L2') is an
    affine function of the seed.  If the L2 parts agree the hash values
    collide never (for l != l'); otherwise the map S -> T(S)(L2 - L2') is
    surjective onto F_p^{n2+n3} (triangular in the seed entries), giving
    probability exactly p^-(n2+n3) = 1/M'.
    """
    if l == lp:
        raise ValueError("collision probability needs distinct inputs")
    if len(l) != n1 or len(lp) != n1:
        raise ValueError("inputs must have length n1")
    k = n2 + n3
    p = l.p
    dl2 = l.slice(k, n1).sub(lp.slice(k, n1))
    if not dl2.values.any():
        return Fraction(0)
    return Fraction(1, p**k)
