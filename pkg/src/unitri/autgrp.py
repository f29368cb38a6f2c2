"""Automorphisms of UT(d, F_q) given by images of the simple-root generators.

An :class:`AutMap` stores, for every simple root e_{i+1,i} and every element
b_t of the prime-field basis 1, t, t^2, ... of F, the image of b_t e_{i+1,i}.
The image of x e_{i+1,i} is the ordered product of powers of those images
given by the base-p digits of x, and images of deeper roots come from the
commutator relation [x e_{i,j+1}, e_{j+1,j}] = x e_{i,j}.  Any g is then
mapped through its canonical root factorization.

Automorphisms compose left to right: ``compose(phi, psi)`` applies phi first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import ntcore as nt
from .errors import (DimensionMismatch, DimensionTooSmall, EvenCharacteristic,
                     ExponentOutOfRange, FieldMismatch, MalformedAutMap, NotGF2, ParseError,
                     ZeroDiagonalEntry)
from .gf import Field, parse_field
from .linalg import DTYPE, is_invertible, nullspace
from .ntcore import NtMat

EXHAUSTIVE_PAIR_BOUND = 2**20


class AutMap:
    """Automorphism candidate of UT(d, F) stored as generator images.

    ``images[i-1][t]`` is the image of b_t e_{i+1,i}.  Nothing about
    bijectivity is assumed at construction; :func:`verify` decides and
    records the outcome in ``verified``.
    """

    def __init__(self, d: int, field: Field, images, verified: str = "unchecked"):
        images = [list(row) for row in images]
        if len(images) != d - 1 or any(len(row) != field.k for row in images):
            raise MalformedAutMap(f"need {d - 1} x {field.k} generator images")
        for row in images:
            for img in row:
                if not isinstance(img, NtMat) or img.d != d or img.field != field:
                    raise MalformedAutMap("generator image has the wrong size or field")
        self.d = d
        self.field = field
        self.images = tuple(tuple(row) for row in images)
        self.verified = verified
        self._cache = {}
        self._table = None

    def __eq__(self, other):
        return isinstance(other, AutMap) and aut_eq(self, other)

    def __hash__(self):
        return hash((self.d, self.images))

    def __repr__(self):
        return f"AutMap(d={self.d}, {self.field!r}, {self.verified})"

    def generator_images(self):
        """((i, t), image) for every stored generator."""
        return [((i + 1, t), img) for i, row in enumerate(self.images) for t, img in enumerate(row)]

    # -- extension to all roots and all elements ----------------------------------

    def root_image(self, i: int, j: int, x: int) -> NtMat:
        """Image of x e_{i,j} (x an encoding)."""
        key = (i, j, x)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        d, f = self.d, self.field
        if x == 0:
            out = nt.mat_zero(d, f)
        elif i == j + 1:
            out = nt.mat_zero(d, f)
            for img, c in zip(self.images[j - 1], f.digits(x)):
                if c:
                    out = nt.group_mul(out, nt.group_pow(img, c))
        else:
            out = nt.commutator(self.root_image(i, j + 1, x), self.root_image(j + 1, j, 1))
        self._cache[key] = out
        return out

    def image_table(self) -> np.ndarray:
        """Array [position, x, entry]: packed image of x e_{i,j} for every root."""
        if self._table is None:
            d, f = self.d, self.field
            self._table = np.array([[self.root_image(i, j, x).entries for x in range(f.q)]
                                    for i, j in nt.positions(d)], dtype=np.int16)
        return self._table

    def __call__(self, g: NtMat) -> NtMat:
        return apply(self, g)


def derived_root_image(phi: AutMap, r: nt.RootElem) -> NtMat:
    if r.field != phi.field:
        raise FieldMismatch(f"{r.field} vs {phi.field}")
    if r.i > phi.d:
        raise MalformedAutMap(f"root ({r.i},{r.j}) outside d={phi.d}")
    return phi.root_image(r.i, r.j, r.x.idx)


def apply(phi: AutMap, g: NtMat) -> NtMat:
    """Image of g: product of root images over its canonical factorization."""
    if g.d != phi.d:
        raise DimensionMismatch(f"d={g.d} vs d={phi.d}")
    if g.field != phi.field:
        raise FieldMismatch(f"{g.field} vs {phi.field}")
    out = nt.mat_zero(phi.d, phi.field)
    for r in nt.root_factorize(g):
        out = nt.group_mul(out, phi.root_image(r.i, r.j, r.x.idx))
    return out


def batch_apply(phi: AutMap, a: np.ndarray) -> np.ndarray:
    """Vectorized :func:`apply` over a batch (rows of packed entries)."""
    d, f = phi.d, phi.field
    table = phi.image_table()
    ix = nt._index(d)
    res = a.astype(np.int16, copy=True)
    out = np.zeros_like(res)
    for i, j in nt.canonical_order(d):
        x = nt.batch_left_root_peel(res, d, f, i, j)
        out = nt.batch_group_mul(out, table[ix[i, j]][x], d, f)
    return out


def compose(phi: AutMap, psi: AutMap) -> AutMap:
    """phi first, then psi."""
    if phi.d != psi.d:
        raise DimensionMismatch(f"d={phi.d} vs d={psi.d}")
    if phi.field != psi.field:
        raise FieldMismatch(f"{phi.field} vs {psi.field}")
    return AutMap(phi.d, phi.field, [[apply(psi, img) for img in row] for row in phi.images])


def compose_all(maps, d: int, field: Field) -> AutMap:
    out = identity(d, field)
    for m in maps:
        out = compose(out, m)
    return out


def aut_eq(phi: AutMap, psi: AutMap) -> bool:
    return phi.d == psi.d and phi.field == psi.field and phi.images == psi.images


def abelianization_matrix(phi: AutMap) -> np.ndarray:
    """Z_p matrix of phi on UT/Gamma_2 = F^(d-1); column (i, t) is the image of b_t e_{i+1,i}."""
    d, f = phi.d, phi.field
    cols = []
    for row in phi.images:
        for img in row:
            cols.append([c for i in range(1, d) for c in f.digits(img[i + 1, i])])
    return np.array(cols, dtype=DTYPE).T


def _from_generator_map(d, field, fn) -> AutMap:
    """AutMap whose generator images are fn(i, b) for b in the prime basis."""
    return AutMap(d, field, [[fn(i, b) for b in field.basis()] for i in range(1, d)])


def identity(d: int, field: Field) -> AutMap:
    return _from_generator_map(d, field, lambda i, b: nt.unit(d, field, i + 1, i, b))


# -- the six families --------------------------------------------------------------------


def flip_element(g: NtMat) -> NtMat:
    """J (1+g)^-T J - 1: reflection in the antidiagonal composed with inversion."""
    d = g.d
    inv = nt.group_inv(g)
    return NtMat(d, g.field, [inv[d + 1 - j, d + 1 - i] for i, j in nt.positions(d)])


def make_flip(d: int, field: Field) -> AutMap:
    """g -> J (g^-1)^T J.

    On simple roots x e_{i+1,i} -> -x e_{d-i+1,d-i}; in characteristic 2
    this is exactly x e_{i,j} -> x e_{d-j+1,d-i+1}.
    """
    return _from_generator_map(d, field, lambda i, b: flip_element(nt.unit(d, field, i + 1, i, b)))


def make_diag(diag, field: Field | None = None) -> AutMap:
    """Conjugation by diag(d_1..d_d): x e_{i,j} -> d_i^-1 x d_j e_{i,j}."""
    if field is None:
        field = diag[0].field
    ds = [field.check(x) for x in diag]
    if any(x == 0 for x in ds):
        raise ZeroDiagonalEntry("diagonal entries must be nonzero")
    d = len(ds)
    mul, inv = field.mul_table, field.inv_table

    def img(i, b):
        return nt.unit(d, field, i + 1, i, mul[mul[inv[ds[i]]][b]][ds[i - 1]])

    return _from_generator_map(d, field, img)


def make_field(d: int, field: Field, j: int) -> AutMap:
    """Entrywise Frobenius x -> x^(p^j)."""
    if not 0 <= j < field.k:
        raise ExponentOutOfRange(f"Frobenius exponent {j} outside 0..{field.k - 1}")
    frob = field.frobenius_map(j)
    return _from_generator_map(d, field, lambda i, b: nt.unit(d, field, i + 1, i, frob[b]))


def make_inner(g: NtMat) -> AutMap:
    """x -> g^-1 x g."""
    d, field = g.d, g.field
    return _from_generator_map(d, field, lambda i, b: nt.conj(g, nt.unit(d, field, i + 1, i, b)))


def make_central(d: int, field: Field, lam) -> AutMap:
    """x e_{i+1,i} -> x e_{i+1,i} + Lam_i(x) e_{d,1}.

    ``lam[i-1][t]`` is Lam_i(b_t); an additive map of F is fixed by its
    values on the prime basis.
    """
    if d < 3:
        raise DimensionTooSmall("central automorphisms need d >= 3")
    lam = [[field.check(x) for x in row] for row in lam]
    if len(lam) != d - 1 or any(len(row) != field.k for row in lam):
        raise MalformedAutMap(f"need {d - 1} x {field.k} central values")

    def img(i, b):
        t = field.basis().index(b)
        return NtMat.from_dict(d, field, {(i + 1, i): b, (d, 1): lam[i - 1][t]})

    return _from_generator_map(d, field, img)


def central_zero(d: int, field: Field) -> list:
    return [[0] * field.k for _ in range(d - 1)]


def make_extremal_odd(d: int, field: Field, a1, a2) -> AutMap:
    """x e_{2,1} -> x e_{2,1} + a1 x e_{d,2} + (a1/2) x^2 e_{d,1} and
    x e_{d,d-1} -> x e_{d,d-1} + a2 x e_{d-1,1} + (a2/2) x^2 e_{d,1}.

    (a/2) x^2 is the quadratic solution of l(x+y) - l(x) - l(y) = a x y.
    """
    if field.p == 2:
        raise EvenCharacteristic("odd-characteristic extremal automorphism over a field of characteristic 2")
    if d < 5:
        raise DimensionTooSmall("extremal automorphisms need d >= 5")
    a1, a2 = field.check(a1), field.check(a2)
    mul = field.mul_table
    half = field.inv(2 % field.p)

    def img(i, b):
        lam = lambda a: mul[mul[half][a]][mul[b][b]]
        if i == 1:
            return NtMat.from_dict(d, field, {(2, 1): b, (d, 2): mul[a1][b], (d, 1): lam(a1)})
        if i == d - 1:
            return NtMat.from_dict(d, field, {(d, d - 1): b, (d - 1, 1): mul[a2][b], (d, 1): lam(a2)})
        return nt.unit(d, field, i + 1, i, b)

    return _from_generator_map(d, field, img)


def extremal_even_shape(d: int, field: Field, a1, a2) -> AutMap:
    """The generator assignment x e_{2,1} -> x e_{2,1} + a1 x e_{d,3} together
    with x e_{d,d-1} -> x e_{d,d-1} + a2 x e_{d-2,1}, over any field.

    No field check: this is the raw shape, used to show it fails off GF(2).
    """
    if d < 5:
        raise DimensionTooSmall("extremal automorphisms need d >= 5")
    a1, a2 = field.check(a1), field.check(a2)
    mul = field.mul_table

    def img(i, b):
        if i == 1:
            return NtMat.from_dict(d, field, {(2, 1): b, (d, 3): mul[a1][b]})
        if i == d - 1:
            return NtMat.from_dict(d, field, {(d, d - 1): b, (d - 2, 1): mul[a2][b]})
        return nt.unit(d, field, i + 1, i, b)

    return _from_generator_map(d, field, img)


def make_extremal_even(d: int, field: Field, a1, a2) -> AutMap:
    """GF(2) extremal automorphism: the a1-side map followed by the a2-side map.

    The a2 side x e_{d,d-1} -> x e_{d,d-1} + a2 x e_{d-2,1} is the flip
    conjugate of the a1 side.  For d >= 6 the composite has exactly the
    generator images of :func:`extremal_even_shape`; at d = 5 the sides
    interact (e_{5,3} e_{3,1} = e_{5,1}), so the two are applied in turn.
    """
    if field.q != 2:
        raise NotGF2("even extremal automorphisms exist only over GF(2)")
    return compose(extremal_even_shape(d, field, a1, 0), extremal_even_shape(d, field, 0, a2))


# -- verification ---------------------------------------------------------------------------


@dataclass
class VerifyReport:
    passed: bool
    policy: str
    seed: int | None = None
    checks: dict = dc_field(default_factory=dict)
    witness: tuple | None = None
    reason: str = ""

    def summary(self) -> str:
        return f"passed:{self.policy}" if self.passed else "failed"


def _relation_failures(phi: AutMap):
    """Yield (kind, u, v) for defining relations of UT violated by phi.

    Generators are b_t e_r for every root r; the relations are order p,
    commutation inside a root group, and the commutator formula between
    root groups with its right side written in the generators.  Any word
    can be collected into the canonical form using these alone, so they
    present UT(d, F_q).
    """
    d, f = phi.d, phi.field
    basis = f.basis()
    gens = [(i, j, b) for i, j in nt.positions(d) for b in basis]
    for i, j, b in gens:
        img = phi.root_image(i, j, b)
        if not nt.group_pow(img, f.p).is_zero():
            u = nt.unit(d, f, i, j, b)
            yield "order", u, u
    for (i, j, x), (k, l, y) in itertools.product(gens, repeat=2):
        u = nt.unit(d, f, i, j, x)
        v = nt.unit(d, f, k, l, y)
        target = nt.commutator(u, v)
        # the right side as a word in the generators b_t e_r
        expected = nt.mat_zero(d, f)
        for r in nt.root_factorize(target):
            for b, c in zip(basis, f.digits(r.x.idx)):
                if c:
                    expected = nt.group_mul(expected, nt.group_pow(phi.root_image(r.i, r.j, b), c))
        got = nt.commutator(phi.root_image(i, j, x), phi.root_image(k, l, y))
        if got != expected:
            yield "commutator", u, v


def _pair_witness(phi: AutMap, u: NtMat, v: NtMat):
    """A pair (a, b) with apply(a.b) != apply(a).apply(b), found along [u, v]."""
    ui, vi = nt.group_inv(u), nt.group_inv(v)
    x1 = nt.group_mul(ui, vi)
    x2 = nt.group_mul(x1, u)
    cands = [(u, ui), (v, vi), (ui, vi), (x1, u), (x2, v), (u, u), (u, v)]
    if phi.field.p > 2:
        cands += [(nt.group_pow(u, n), u) for n in range(2, phi.field.p)]
    for a, b in cands:
        if apply(phi, nt.group_mul(a, b)) != nt.group_mul(apply(phi, a), apply(phi, b)):
            return a, b
    return None


def _first_bad_pair(phi, a, b):
    d, f = phi.d, phi.field
    lhs = batch_apply(phi, nt.batch_group_mul(a, b, d, f))
    rhs = nt.batch_group_mul(batch_apply(phi, a), batch_apply(phi, b), d, f)
    bad = np.nonzero((lhs != rhs).any(axis=1))[0]
    return None if bad.size == 0 else int(bad[0])


def _exhaustive_pairs(phi, chunk=256):
    d, f = phi.d, phi.field
    m = d * (d - 1) // 2
    total = f.q**m
    elems = nt.batch_decode(np.arange(total), m, f)
    images = batch_apply(phi, elems)
    for start in range(0, total, chunk):
        rows = np.arange(start, min(start + chunk, total))
        a = np.repeat(elems[rows], total, axis=0)
        b = np.tile(elems, (len(rows), 1))
        ab = nt.batch_group_mul(a, b, d, f)
        lhs = batch_apply(phi, ab)
        rhs = nt.batch_group_mul(np.repeat(images[rows], total, axis=0),
                                 np.tile(images, (len(rows), 1)), d, f)
        bad = np.nonzero((lhs != rhs).any(axis=1))[0]
        if bad.size:
            n = int(bad[0])
            return NtMat(d, f, a[n]), NtMat(d, f, b[n])
    return None


def parse_policy(policy: str):
    """``relations``, ``exhaustive`` or ``sampled:<n>:<seed>`` -> (kind, n, seed)."""
    parts = policy.split(":")
    if parts[0] in ("relations", "exhaustive") and len(parts) == 1:
        return parts[0], None, None
    if parts[0] == "sampled" and len(parts) == 3:
        return "sampled", int(parts[1]), int(parts[2], 0)
    raise ValueError(f"unknown verification policy {policy!r}")


def sampled(n: int, seed: int) -> str:
    return f"sampled:{n}:{seed}"


def verify(phi: AutMap, policy: str = "relations") -> VerifyReport:
    """Decide whether phi is an automorphism.

    Always checks that phi is invertible on UT/Gamma_2 and that the root
    images satisfy every defining relation; these two together are
    sufficient.  ``exhaustive`` (at most 2^20 ordered pairs) and
    ``sampled:<n>:<seed>`` add a direct homomorphism check on pairs.
    Sets ``phi.verified``; failures carry a witness pair.
    """
    kind, n, seed = parse_policy(policy)
    d, f = phi.d, phi.field
    report = VerifyReport(False, policy, seed)
    inv = is_invertible(abelianization_matrix(phi), f.p)
    report.checks["abelianization"] = inv
    if not inv:
        report.reason = "not invertible on UT/Gamma_2"
        # u lies outside Gamma_2 but its image does not
        v = nullspace(abelianization_matrix(phi), f.p)[0]
        u = NtMat.from_dict(d, f, {(i + 1, i): f.from_digits([int(c) for c in v[(i - 1) * f.k:i * f.k]])
                                   for i in range(1, d)})
        report.witness = (u, nt.mat_zero(d, f))
        phi.verified = "failed"
        return report
    bad = next(_relation_failures(phi), None)
    report.checks["relations"] = bad is None
    if bad is not None:
        rel, u, v = bad
        report.reason = f"{rel} relation fails for {u!r}, {v!r}"
        report.witness = _pair_witness(phi, u, v)
        phi.verified = "failed"
        return report
    m = d * (d - 1) // 2
    if kind == "exhaustive":
        if f.q ** (2 * m) > EXHAUSTIVE_PAIR_BOUND:
            raise ValueError(f"exhaustive verification needs at most {EXHAUSTIVE_PAIR_BOUND} pairs")
        w = _exhaustive_pairs(phi)
        report.checks["pairs"] = f.q ** (2 * m)
        if w is not None:
            report.witness = w
            report.reason = "homomorphism fails on a pair"
            phi.verified = "failed"
            return report
    elif kind == "sampled":
        rng = np.random.default_rng(seed)
        a = rng.integers(0, f.q, (n, m)).astype(np.int16)
        b = rng.integers(0, f.q, (n, m)).astype(np.int16)
        report.checks["pairs"] = n
        idx = _first_bad_pair(phi, a, b)
        if idx is not None:
            report.witness = (NtMat(d, f, a[idx]), NtMat(d, f, b[idx]))
            report.reason = "homomorphism fails on a sampled pair"
            phi.verified = "failed"
            return report
    report.passed = True
    phi.verified = f"passed:{policy}"
    return report


def is_automorphism(phi: AutMap) -> bool:
    return verify(phi, "relations").passed


# -- images of subspaces ------------------------------------------------------------------------


def image_space(phi: AutMap, space, d: int, field: Field):
    """Z_p span of the images of a basis of ``space``."""
    return nt.span([apply(phi, m) for m in nt.subspace_mats(space, d, field)], d, field)


# -- text format ---------------------------------------------------------------------------------


def format_aut(phi: AutMap) -> str:
    lines = [phi.field.header(), f"d={phi.d}", ""]
    blocks = [nt.format_matrix(img) for row in phi.images for img in row]
    lines.append("\n\n".join(blocks))
    lines.append("")
    lines.append(f"verified={phi.verified}")
    return "\n".join(lines) + "\n"


def parse_aut(text: str) -> AutMap:
    lines = text.splitlines()
    if len(lines) < 2:
        raise ParseError("automorphism file too short")
    field = parse_field(lines[0])
    if not lines[1].startswith("d="):
        raise ParseError("second line must be d=<int>")
    d = int(lines[1][2:])
    verified = "unchecked"
    blocks, cur = [], []
    for ln in lines[2:]:
        if ln.startswith("verified="):
            verified = ln.split("=", 1)[1].strip()
            continue
        if ln.strip():
            cur.append(ln)
        elif cur:
            blocks.append(cur)
            cur = []
    if cur:
        blocks.append(cur)
    if len(blocks) != (d - 1) * field.k:
        raise ParseError(f"expected {(d - 1) * field.k} matrix blocks, got {len(blocks)}")
    mats = [nt.parse_matrix(b, field) for b in blocks]
    rows = [mats[i * field.k:(i + 1) * field.k] for i in range(d - 1)]
    try:
        return AutMap(d, field, rows, verified)
    except MalformedAutMap as exc:
        raise ParseError(str(exc)) from exc
