"""Prime-field arithmetic, vectors, and Toeplitz-matrix application.

Everything downstream (hashing, coding, protocol transcripts) works with
residues modulo a prime p.  Vectors are thin wrappers around int64 numpy
arrays; Toeplitz application is the naive O(d1*d2) matrix-vector product,
which is all a desk-scale run ever needs.

Index convention for Toeplitz matrices: with a seed vector V of length
d1+d2-1 (1-based entries V_1..V_{d1+d2-1}), the d1 x d2 matrix is

    T[i, j] = V_{i-j+d2}   (1-based i, j)

so every diagonal is constant and the whole seed is consumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def is_prime(n: int) -> bool:
    """Deterministic primality test by trial division (fine for desk-scale p)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _check_prime(p: int) -> int:
    p = int(p)
    if not is_prime(p):
        raise ValueError(f"modulus must be prime, got {p}")
    return p


@dataclass(frozen=True)
class FieldElem:
    """A residue in F_p.  Validates 0 <= value < p and that p is prime."""

    value: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "p", _check_prime(self.p))
        object.__setattr__(self, "value", int(self.value) % self.p)

    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.p != self.p:
                raise ValueError(f"modulus mismatch: {self.p} vs {other.p}")
            return other
        return FieldElem(int(other), self.p)

    def add(self, other) -> "FieldElem":
        o = self._coerce(other)
        return FieldElem((self.value + o.value) % self.p, self.p)

    def sub(self, other) -> "FieldElem":
        o = self._coerce(other)
        return FieldElem((self.value - o.value) % self.p, self.p)

    def mul(self, other) -> "FieldElem":
        o = self._coerce(other)
        return FieldElem((self.value * o.value) % self.p, self.p)

    def inv(self) -> "FieldElem":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse in F_p")
        return FieldElem(pow(self.value, self.p - 2, self.p), self.p)

    __add__ = add
    __sub__ = sub
    __mul__ = mul

    def __int__(self) -> int:
        return self.value


class FieldVec:
    """A nonempty vector over F_p with a uniform modulus.

    Stores an int64 numpy array of residues; arithmetic is componentwise
    modular.  Use ``.values`` for the raw array when speed matters.
    """

    __slots__ = ("p", "values")

    def __init__(self, values, p: int):
        self.p = _check_prime(p)
        arr = np.asarray(values, dtype=np.int64) % self.p
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("FieldVec requires a nonempty 1-d sequence")
        self.values = arr

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldVec)
            and self.p == other.p
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"FieldVec({self.values.tolist()}, p={self.p})"

    def _check(self, other: "FieldVec") -> None:
        if not isinstance(other, FieldVec):
            raise TypeError("expected a FieldVec")
        if other.p != self.p:
            raise ValueError(f"modulus mismatch: {self.p} vs {other.p}")
        if len(other) != len(self):
            raise ValueError(f"length mismatch: {len(self)} vs {len(other)}")

    def add(self, other: "FieldVec") -> "FieldVec":
        self._check(other)
        return FieldVec((self.values + other.values) % self.p, self.p)

    def sub(self, other: "FieldVec") -> "FieldVec":
        self._check(other)
        return FieldVec((self.values - other.values) % self.p, self.p)

    def scale(self, a) -> "FieldVec":
        a = int(a) % self.p
        return FieldVec((self.values * a) % self.p, self.p)

    def concat(self, other: "FieldVec") -> "FieldVec":
        if other.p != self.p:
            raise ValueError(f"modulus mismatch: {self.p} vs {other.p}")
        return FieldVec(np.concatenate([self.values, other.values]), self.p)

    def slice(self, start: int, stop: int) -> "FieldVec":
        return FieldVec(self.values[start:stop], self.p)

    def tolist(self) -> list[int]:
        return self.values.tolist()


@dataclass(frozen=True)
class ToeplitzSeed:
    """Seed vector defining the d1 x d2 Toeplitz matrix T[i,j] = V_{i-j+d2}."""

    entries: FieldVec
    d1: int
    d2: int

    def __post_init__(self):
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("Toeplitz shape must be positive")
        if len(self.entries) != self.d1 + self.d2 - 1:
            raise ValueError(
                f"seed length {len(self.entries)} != d1+d2-1 = {self.d1 + self.d2 - 1}"
            )

    @property
    def p(self) -> int:
        return self.entries.p

    def matrix(self) -> np.ndarray:
        """Materialize the dense matrix (int64, entries in [0, p))."""
        v = self.entries.values
        i = np.arange(1, self.d1 + 1)[:, None]
        j = np.arange(1, self.d2 + 1)[None, :]
        return v[i - j + self.d2 - 1]


def toeplitz_matrix(seed_values: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Dense Toeplitz matrix from a raw seed array (no FieldVec wrapping)."""
    v = np.asarray(seed_values, dtype=np.int64)
    if v.size != d1 + d2 - 1:
        raise ValueError(f"seed length {v.size} != d1+d2-1 = {d1 + d2 - 1}")
    i = np.arange(1, d1 + 1)[:, None]
    j = np.arange(1, d2 + 1)[None, :]
    return v[i - j + d2 - 1]


def toeplitz_apply(seed: ToeplitzSeed, x: FieldVec) -> FieldVec:
    """Apply the Toeplitz matrix of ``seed`` to ``x``: y_i = sum_j V_{i-j+d2} x_j mod p."""
    if x.p != seed.p:
        raise ValueError(f"modulus mismatch: {seed.p} vs {x.p}")
    if len(x) != seed.d2:
        raise ValueError(f"length mismatch: expected d2={seed.d2}, got {len(x)}")
    y = seed.matrix() @ x.values
    return FieldVec(y % seed.p, seed.p)
