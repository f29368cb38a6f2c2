"""Exact linear algebra over the prime field Z_p.

Matrices are numpy integer arrays with entries in 0..p-1.  Row reduction
always picks the lowest-index pivot, so every result here is deterministic.
"""

from __future__ import annotations

import numpy as np

DTYPE = np.int64


def _inverses(p):
    inv = np.zeros(p, dtype=DTYPE)
    for a in range(1, p):
        inv[a] = pow(a, p - 2, p)
    return inv


def rref(a, p: int):
    """Reduced row echelon form of ``a`` mod p.

    Returns ``(r, pivots)`` where ``r`` holds only the nonzero rows.
    """
    a = np.array(a, dtype=DTYPE) % p
    if a.ndim == 1:
        a = a.reshape(1, -1)
    rows, cols = a.shape
    inv = _inverses(p)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = (a[r] * inv[a[r, c]]) % p
        col = a[:, c].copy()
        col[r] = 0
        mask = col != 0
        if mask.any():
            a[mask] = (a[mask] - np.outer(col[mask], a[r])) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(a, p: int) -> int:
    return len(rref(a, p)[1])


def nullspace(a, p: int):
    """Basis (as rows, in reduced echelon form) of {x : a @ x = 0 mod p}."""
    a = np.array(a, dtype=DTYPE)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=DTYPE)
    r, pivots = rref(a, p)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=DTYPE)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, pc in enumerate(pivots):
            basis[i, pc] = (-r[row, f]) % p
    if len(free) == 0:
        return basis
    return rref(basis, p)[0]


def solve(a, b, p: int):
    """One solution x of a @ x = b mod p (free variables zero), or None."""
    a = np.array(a, dtype=DTYPE) % p
    b = np.array(b, dtype=DTYPE).reshape(-1) % p
    m, n = a.shape
    aug = np.concatenate([a, b.reshape(-1, 1)], axis=1)
    r, pivots = rref(aug, p)
    if pivots and pivots[-1] == n:
        return None
    x = np.zeros(n, dtype=DTYPE)
    for row, pc in enumerate(pivots):
        x[pc] = r[row, n]
    return x


def is_invertible(a, p: int) -> bool:
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and rank(a, p) == a.shape[0]


class Subspace:
    """A subspace of Z_p^n kept as a reduced echelon basis.

    Equality of two subspaces is equality of their echelon bases.
    """

    __slots__ = ("p", "n", "basis", "pivots")

    def __init__(self, p: int, n: int, vectors=()):
        self.p = p
        self.n = n
        vecs = np.array(list(vectors), dtype=DTYPE).reshape(-1, n)
        if vecs.shape[0]:
            self.basis, self.pivots = rref(vecs, p)
        else:
            self.basis, self.pivots = np.zeros((0, n), dtype=DTYPE), []
        self.basis.setflags(write=False)

    @classmethod
    def _from_rref(cls, p, n, basis, pivots):
        s = cls.__new__(cls)
        s.p, s.n, s.basis, s.pivots = p, n, basis, list(pivots)
        s.basis.setflags(write=False)
        return s

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def size(self) -> int:
        return self.p**self.dim

    def reduce(self, v):
        """Remainder of v after clearing the pivot columns with the basis."""
        v = np.array(v, dtype=DTYPE) % self.p
        single = v.ndim == 1
        v = v.reshape(-1, self.n)
        for row, pc in zip(self.basis, self.pivots):
            coef = v[:, pc].copy()
            if coef.any():
                v = (v - np.outer(coef, row)) % self.p
        return v[0] if single else v

    def contains(self, v) -> bool:
        return not self.reduce(v).any()

    def __contains__(self, v):
        return self.contains(v)

    def issubset(self, other: "Subspace") -> bool:
        return self.dim == 0 or not other.reduce(self.basis).any()

    def __le__(self, other):
        return self.issubset(other)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace(self.p, self.n, np.concatenate([self.basis, other.basis]))

    def with_vectors(self, vectors) -> "Subspace":
        vecs = np.array(list(vectors), dtype=DTYPE).reshape(-1, self.n)
        return Subspace(self.p, self.n, np.concatenate([self.basis, vecs]))

    def complement_in(self, bigger: "Subspace"):
        """Vectors of ``bigger`` spanning a complement of self inside it."""
        out = []
        cur = self
        for v in bigger.basis:
            if not cur.contains(v):
                out.append(v)
                cur = cur.with_vectors([v])
        return np.array(out, dtype=DTYPE).reshape(-1, self.n)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (self.p == other.p and self.n == other.n and self.pivots == other.pivots
                and np.array_equal(self.basis, other.basis))

    def __hash__(self):
        return hash((self.p, self.n, self.basis.tobytes()))

    def __repr__(self):
        return f"Subspace(p={self.p}, n={self.n}, dim={self.dim})"
