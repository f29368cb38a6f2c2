"""Niltriangular matrices NT(d, F): ring, group (a.b = a+b+ab) and Lie bracket.

A matrix is stored packed: the d(d-1)/2 strictly-lower entries in row-major
order (2,1), (3,1), (3,2), (4,1), ...  Entries are field encodings (ints).
Positions are 1-based (i, j) with i > j, matching the usual e_{i,j} notation.

The same packed layout doubles as a group element of UT(d, F) under the
product a.b = a + b + ab; the identity is the zero matrix.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, FieldMismatch, IndexOutOfRange, ParseError
from .gf import Field, FieldElem
from .linalg import DTYPE, Subspace, nullspace


@functools.lru_cache(maxsize=None)
def positions(d: int) -> tuple:
    """Packed order of the strictly-lower positions."""
    return tuple((i, j) for i in range(2, d + 1) for j in range(1, i))


@functools.lru_cache(maxsize=None)
def _index(d: int) -> dict:
    return {pos: n for n, pos in enumerate(positions(d))}


def pos_index(d: int, i: int, j: int) -> int:
    if not 1 <= j < i <= d:
        raise IndexOutOfRange(f"({i},{j}) is not a strictly-lower position for d={d}")
    return (i - 1) * (i - 2) // 2 + j - 1


@functools.lru_cache(maxsize=None)
def _triples(d: int) -> tuple:
    # (il, ij, jl) for i > j > l: entry (i,l) of ab gains a[i,j] * b[j,l]
    ix = _index(d)
    return tuple((ix[i, l], ix[i, j], ix[j, l])
                 for i in range(3, d + 1) for j in range(2, i) for l in range(1, j))


@functools.lru_cache(maxsize=None)
def canonical_order(d: int) -> tuple:
    """Positions by subdiagonal ascending, then row ascending."""
    return tuple((k + j, j) for k in range(1, d) for j in range(1, d - k + 1))


def subdiagonal_positions(d: int, k: int) -> tuple:
    return tuple((j + k, j) for j in range(1, d - k + 1))


class NtMat:
    """Strictly lower-triangular d x d matrix over a finite field (immutable)."""

    __slots__ = ("d", "field", "entries")

    def __init__(self, d: int, field: Field, entries=None):
        if d < 2:
            raise DimensionMismatch(f"d must be at least 2, got {d}")
        m = d * (d - 1) // 2
        if entries is None:
            entries = (0,) * m
        else:
            entries = tuple(int(e) for e in entries)
            if len(entries) != m:
                raise DimensionMismatch(f"expected {m} packed entries for d={d}, got {len(entries)}")
        self.d = d
        self.field = field
        self.entries = entries

    @classmethod
    def from_dict(cls, d: int, field: Field, coeffs: dict) -> "NtMat":
        """Build from ``{(i, j): x}``; repeated use is additive only via mat_add."""
        e = [0] * (d * (d - 1) // 2)
        for (i, j), x in coeffs.items():
            e[pos_index(d, i, j)] = field.check(x)
        return cls(d, field, e)

    @classmethod
    def from_dense(cls, rows, field: Field) -> "NtMat":
        d = len(rows)
        if any(int(rows[i][j]) for i in range(d) for j in range(i, d)):
            raise ValueError("matrix is not strictly lower triangular")
        return cls(d, field, [int(rows[i - 1][j - 1]) for i, j in positions(d)])

    def to_dense(self):
        d = self.d
        out = [[0] * d for _ in range(d)]
        for (i, j), x in zip(positions(d), self.entries):
            out[i - 1][j - 1] = x
        return out

    def __getitem__(self, ij) -> int:
        i, j = ij
        return self.entries[pos_index(self.d, i, j)]

    def items(self):
        """Nonzero entries as ((i, j), x)."""
        return [(pos, x) for pos, x in zip(positions(self.d), self.entries) if x]

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if not isinstance(other, NtMat):
            return NotImplemented
        return self.d == other.d and self.field == other.field and self.entries == other.entries

    def __hash__(self):
        return hash((self.d, self.entries))

    def __add__(self, other):
        return mat_add(self, other)

    def __sub__(self, other):
        return mat_add(self, mat_neg(other))

    def __neg__(self):
        return mat_neg(self)

    def __repr__(self):
        if self.is_zero():
            return f"NtMat(d={self.d}, 0)"
        terms = " + ".join(f"{x}e{i},{j}" for (i, j), x in self.items())
        return f"NtMat(d={self.d}, {terms})"


@dataclass(frozen=True)
class RootElem:
    """The matrix unit x e_{i,j}, i > j."""

    x: FieldElem
    i: int
    j: int

    def __post_init__(self):
        if not (self.i > self.j >= 1):
            raise IndexOutOfRange(f"root position ({self.i},{self.j}) needs i > j >= 1")

    @property
    def field(self) -> Field:
        return self.x.field


def root(field: Field, x, i: int, j: int) -> RootElem:
    return RootElem(FieldElem(field, field.check(x)), i, j)


def _check(a: NtMat, b: NtMat):
    if a.d != b.d:
        raise DimensionMismatch(f"d={a.d} vs d={b.d}")
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")


# -- elementary constructors and linear operations ---------------------------


def mat_zero(d: int, field: Field) -> NtMat:
    return NtMat(d, field)


def mat_from_root(r: RootElem, d: int) -> NtMat:
    if r.i > d:
        raise IndexOutOfRange(f"root ({r.i},{r.j}) does not fit d={d}")
    e = [0] * (d * (d - 1) // 2)
    e[pos_index(d, r.i, r.j)] = r.x.idx
    return NtMat(d, r.field, e)


def unit(d: int, field: Field, i: int, j: int, x: int = 1) -> NtMat:
    """x e_{i,j} as an NtMat (x an encoding)."""
    e = [0] * (d * (d - 1) // 2)
    e[pos_index(d, i, j)] = field.check(x)
    return NtMat(d, field, e)


def mat_add(a: NtMat, b: NtMat) -> NtMat:
    _check(a, b)
    add = a.field.add_table
    return NtMat(a.d, a.field, [add[x][y] for x, y in zip(a.entries, b.entries)])


def mat_neg(a: NtMat) -> NtMat:
    neg = a.field.neg_table
    return NtMat(a.d, a.field, [neg[x] for x in a.entries])


def mat_scale(a: NtMat, x: int) -> NtMat:
    row = a.field.mul_table[x]
    return NtMat(a.d, a.field, [row[e] for e in a.entries])


# -- the three products --------------------------------------------------------


def _ring_entries(a: NtMat, b: NtMat) -> list:
    add, mul = a.field.add_table, a.field.mul_table
    ea, eb = a.entries, b.entries
    out = [0] * len(ea)
    for il, ij, jl in _triples(a.d):
        x = ea[ij]
        if x:
            y = eb[jl]
            if y:
                out[il] = add[out[il]][mul[x][y]]
    return out


def ring_mul(a: NtMat, b: NtMat) -> NtMat:
    """Ordinary matrix product ab."""
    _check(a, b)
    return NtMat(a.d, a.field, _ring_entries(a, b))


def group_mul(a: NtMat, b: NtMat) -> NtMat:
    """a.b = a + b + ab."""
    _check(a, b)
    add = a.field.add_table
    ab = _ring_entries(a, b)
    return NtMat(a.d, a.field, [add[add[x][y]][z] for x, y, z in zip(a.entries, b.entries, ab)])


def group_inv(a: NtMat) -> NtMat:
    """-a + a^2 - a^3 + ..., finite since a^d = 0."""
    total = mat_neg(a)
    power = a
    sign = 1
    while True:
        power = ring_mul(power, a)
        if power.is_zero():
            return total
        total = mat_add(total, power if sign > 0 else mat_neg(power))
        sign = -sign


def group_pow(a: NtMat, n: int) -> NtMat:
    if n < 0:
        a, n = group_inv(a), -n
    out = mat_zero(a.d, a.field)
    while n:
        if n & 1:
            out = group_mul(out, a)
        a = group_mul(a, a)
        n >>= 1
    return out


def group_prod(mats, d: int, field: Field) -> NtMat:
    out = mat_zero(d, field)
    for m in mats:
        out = group_mul(out, m)
    return out


def commutator(a: NtMat, b: NtMat) -> NtMat:
    """Group commutator a^-1 . b^-1 . a . b."""
    _check(a, b)
    return group_mul(group_mul(group_mul(group_inv(a), group_inv(b)), a), b)


def bracket(a: NtMat, b: NtMat) -> NtMat:
    """Lie bracket ab - ba."""
    _check(a, b)
    ab = _ring_entries(a, b)
    ba = _ring_entries(b, a)
    sub = a.field.sub
    return NtMat(a.d, a.field, [sub(x, y) for x, y in zip(ab, ba)])


def conj(g: NtMat, x: NtMat) -> NtMat:
    """g^-1 . x . g."""
    return group_mul(group_mul(group_inv(g), x), g)


def conj_by_root(L: NtMat, r: RootElem) -> NtMat:
    """(-r) . L . r, which always equals L + [L, r]."""
    rm = mat_from_root(r, L.d)
    _check(L, rm)
    out = group_mul(group_mul(mat_neg(rm), L), rm)
    assert out == mat_add(L, bracket(L, rm)), "conjugation identity violated"
    return out


# -- the Gamma filtration --------------------------------------------------------


def _check_k(d, k):
    if not 1 <= k <= d:
        raise IndexOutOfRange(f"filtration index {k} outside 1..{d}")


def gamma_basis(d: int, k: int, field: Field) -> list:
    """F-basis {e_{i,j} : i - j >= k} of Gamma_k, in packed order."""
    _check_k(d, k)
    return [root(field, 1, i, j) for i, j in positions(d) if i - j >= k]


def gamma_member(a: NtMat, k: int) -> bool:
    _check_k(a.d, k)
    return all(x == 0 for (i, j), x in zip(positions(a.d), a.entries) if i - j < k)


# -- prime-field coordinates -------------------------------------------------------


def dim_p(d: int, field: Field) -> int:
    return d * (d - 1) // 2 * field.k


def to_vector(a: NtMat) -> np.ndarray:
    """Z_p coordinates: entry n contributes digits at n*k .. n*k+k-1."""
    f = a.field
    return np.array([c for x in a.entries for c in f.digits(x)], dtype=DTYPE)


def from_vector(v, d: int, field: Field) -> NtMat:
    k = field.k
    v = [int(c) for c in v]
    return NtMat(d, field, [field.from_digits(v[n * k:(n + 1) * k]) for n in range(len(v) // k)])


def basis_mats(d: int, field: Field) -> list:
    """Z_p basis b_t e_{i,j} in coordinate order."""
    return [unit(d, field, i, j, b) for i, j in positions(d) for b in field.basis()]


def span(mats, d: int, field: Field) -> Subspace:
    return Subspace(field.p, dim_p(d, field), [to_vector(m) for m in mats])


def subspace_mats(s: Subspace, d: int, field: Field) -> list:
    return [from_vector(v, d, field) for v in s.basis]


def gamma_subspace(d: int, field: Field, k: int) -> Subspace:
    _check_k(d, k)
    return span([unit(d, field, i, j, b) for i, j in positions(d) if i - j >= k
                 for b in field.basis()], d, field)


@functools.lru_cache(maxsize=None)
def structure(d: int, field: Field):
    """Structure constants over Z_p: (ring, lie) arrays with [u, v, w] = coeff of w in u*v."""
    basis = basis_mats(d, field)
    n = len(basis)
    ring = np.zeros((n, n, n), dtype=DTYPE)
    for u, a in enumerate(basis):
        for v, b in enumerate(basis):
            prod = _ring_entries(a, b)
            if any(prod):
                ring[u, v] = to_vector(NtMat(d, field, prod))
    lie = (ring - ring.transpose(1, 0, 2)) % field.p
    ring.setflags(write=False)
    lie.setflags(write=False)
    return ring, lie


def ad_matrix(vectors, d: int, field: Field, left: bool = False, kind: str = "lie") -> np.ndarray:
    """Stacked matrices of u -> [u, b] (or [b, u] when left) for each b in vectors.

    Rows are indexed by (b, w), columns by u; multiply a coordinate column by
    it to get all brackets at once.
    """
    ring, lie = structure(d, field)
    t = lie if kind == "lie" else ring
    vecs = np.array(vectors, dtype=DTYPE).reshape(-1, t.shape[0])
    if left:
        m = np.einsum("bv,vuw->bwu", vecs, t)
    else:
        m = np.einsum("bv,uvw->bwu", vecs, t)
    return (m % field.p).reshape(-1, t.shape[0])


# -- central series --------------------------------------------------------------


def full_space(d: int, field: Field) -> Subspace:
    return gamma_subspace(d, field, 1)


def lower_central_series(d: int, field: Field) -> list:
    """G_1 = NT, G_{k+1} = span of group commutators [b, c], b in basis(G_1), c in basis(G_k).

    The list ends with the first zero term.
    """
    g1 = basis_mats(d, field)
    series = [full_space(d, field)]
    while series[-1].dim:
        gk = subspace_mats(series[-1], d, field)
        series.append(span([commutator(a, b) for a in g1 for b in gk], d, field))
    return series


def _is_ring_ideal(s: Subspace, d: int, field: Field) -> bool:
    if s.dim == 0:
        return True
    gens = [to_vector(m) for m in basis_mats(d, field)]
    for left in (False, True):
        img = ad_matrix(gens, d, field, left=left, kind="ring") @ s.basis.T % field.p
        if not s.contains(img.T.reshape(-1, s.n)):
            return False
    return True


def upper_central_series(d: int, field: Field) -> list:
    """Z_0 = 0, Z_{m+1} = {z : [z, g] in Z_m for every generator b_t e_{i+1,i}}.

    When Z_m is a two-sided ring ideal, [z, g] = (1+z)^-1 (z*g) lies in Z_m
    exactly when the Lie bracket z*g does, which is linear in z; each step
    is therefore a nullspace computation.  The list ends with the full space.
    """
    n, p = dim_p(d, field), field.p
    gens = [to_vector(unit(d, field, i + 1, i, b)) for i in range(1, d) for b in field.basis()]
    ad = ad_matrix(gens, d, field)  # rows (g, w), cols z
    series = [Subspace(p, n)]
    while series[-1].dim < n:
        zm = series[-1]
        if not _is_ring_ideal(zm, d, field):
            raise AssertionError("upper central term is not a ring ideal")
        # reduce each image column modulo Z_m, then require it to vanish
        cols = ad.reshape(len(gens), n, n)  # [g, w, z]
        images = cols.transpose(0, 2, 1).reshape(-1, n)  # rows (g, z): image vector of z-th basis
        reduced = zm.reduce(images).reshape(len(gens), n, n)  # [g, z, w]
        constraint = reduced.transpose(0, 2, 1).reshape(-1, n)
        nxt = Subspace(p, n, nullspace(constraint, p))
        if nxt.dim <= zm.dim:
            raise AssertionError("upper central series stalled")
        series.append(nxt)
    return series


def gamma_chain(d: int, field: Field) -> list:
    return [gamma_subspace(d, field, k) for k in range(1, d + 1)]


# -- canonical factorization ----------------------------------------------------------


def root_factorize(g: NtMat) -> list:
    """Roots in canonical order whose ordered product is g.

    Multiplying by a root on subdiagonal k only touches deeper subdiagonals,
    so the coefficients can be peeled off greedily from the left.
    """
    d, f = g.d, g.field
    ix = _index(d)
    add, mul, neg = f.add_table, f.mul_table, f.neg_table
    res = list(g.entries)
    out = []
    for i, j in canonical_order(d):
        x = res[ix[i, j]]
        if not x:
            continue
        out.append(RootElem(FieldElem(f, x), i, j))
        # res <- (-x e_{i,j}) . res: entry (i,j) clears, row i gains -x * row j
        nx = neg[x]
        res[ix[i, j]] = 0
        for l in range(1, j):
            y = res[ix[j, l]]
            if y:
                p = ix[i, l]
                res[p] = add[res[p]][mul[nx][y]]
    assert not any(res)
    return out


def root_product(roots, d: int, field: Field) -> NtMat:
    return group_prod((mat_from_root(r, d) for r in roots), d, field)


# -- text format -------------------------------------------------------------------------


def format_matrix(a: NtMat) -> str:
    lines = [f"d={a.d}"]
    for i in range(2, a.d + 1):
        lines.append(" ".join(str(a[i, j]) for j in range(1, i)))
    return "\n".join(lines)


def parse_matrix(text, field: Field) -> NtMat:
    """Read a block written by :func:`format_matrix` (str or list of lines)."""
    lines = [ln.strip() for ln in (text.splitlines() if isinstance(text, str) else text)]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("d="):
        raise ParseError("matrix block must start with d=<int>")
    try:
        d = int(lines[0][2:])
    except ValueError as exc:
        raise ParseError(f"bad header {lines[0]!r}") from exc
    if len(lines) != d:
        raise ParseError(f"expected {d - 1} rows after header, got {len(lines) - 1}")
    entries = []
    for i, ln in enumerate(lines[1:], start=2):
        row = ln.split()
        if len(row) != i - 1:
            raise ParseError(f"row {i} needs {i - 1} entries")
        try:
            entries.extend(field.check(int(x)) for x in row)
        except ValueError as exc:
            raise ParseError(f"bad entry in row {i}") from exc
    return NtMat(d, field, entries)


# -- batch kernels (numpy) ---------------------------------------------------------------
#
# A batch is an int16 array of shape (N, m) of packed entries.


def batch_group_mul(a: np.ndarray, b: np.ndarray, d: int, field: Field) -> np.ndarray:
    add, mul, _ = field.tables()
    out = add[a, b]
    for il, ij, jl in _triples(d):
        out[:, il] = add[out[:, il], mul[a[:, ij], b[:, jl]]]
    return out


def batch_left_root_peel(res: np.ndarray, d: int, field: Field, i: int, j: int) -> np.ndarray:
    """Coefficients x at (i,j), and res <- (-x e_{i,j}) . res in place."""
    add, mul, neg = field.tables()
    ix = _index(d)
    x = res[:, ix[i, j]].copy()
    nx = neg[x]
    res[:, ix[i, j]] = 0
    for l in range(1, j):
        p = ix[i, l]
        res[:, p] = add[res[:, p], mul[nx, res[:, ix[j, l]]]]
    return x


def batch_encode(a: np.ndarray, field: Field) -> np.ndarray:
    """Integer index sum_n a[:, n] q^n of each row."""
    w = field.q ** np.arange(a.shape[1], dtype=np.int64)
    return a.astype(np.int64) @ w


def batch_decode(idx: np.ndarray, m: int, field: Field) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    return ((idx[:, None] // field.q ** np.arange(m, dtype=np.int64)) % field.q).astype(np.int16)


def to_batch(mats) -> np.ndarray:
    return np.array([m.entries for m in mats], dtype=np.int16)
