"""Partition ideals, centralizers and the maximal abelian ideals of NT*(d, F).

Every subspace is handled as a Z_p-subspace in reduced echelon form, so an
F-subspace and a merely additive subgroup share one representation and
equality of subspaces is equality of echelon bases.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (DimensionTooSmall, IndexOutOfRange, NotASubgroup, ParseError, TooLarge,
                     WrongCharacteristic)
from .gf import Field, parse_field
from .linalg import DTYPE, Subspace, nullspace
from .ntcore import (NtMat, basis_mats, conj, conj_by_root, dim_p, format_matrix, gamma_subspace,
                     group_inv, group_mul, parse_matrix, pos_index, positions, root, span, structure,
                     subspace_mats, to_vector, unit)

DEFAULT_COSET_BOUND = 2**20


@dataclass
class IdealDesc:
    """A Z_p-subspace of NT(d, F) with a classification tag.

    ``tag`` is one of ``("Partition", i, j)``, ``("Mab2", m, c)``,
    ``("Mab3", i, c)`` or ``("Custom",)``.  ``maximal`` is filled in by
    :func:`mab_enumerate`.
    """

    d: int
    field: Field
    space: Subspace
    tag: tuple = ("Custom",)
    maximal: bool | None = dc_field(default=None, compare=False)

    @property
    def basis(self) -> list:
        return subspace_mats(self.space, self.d, self.field)

    @property
    def dim(self) -> int:
        return self.space.dim

    def same_space(self, other: "IdealDesc") -> bool:
        return self.space == other.space

    def tag_str(self) -> str:
        kind, *params = self.tag
        return kind if not params else f"{kind}({','.join(str(x) for x in params)})"


def custom(mats, d: int, field: Field) -> IdealDesc:
    return IdealDesc(d, field, span(mats, d, field))


def _units(d, field, pairs):
    return [unit(d, field, i, j, b) for i, j in pairs for b in field.basis()]


def _line(d, field, coeffs):
    """F-line {x * sum c e_ij : x in F} as Z_p generators x = b_t."""
    out = []
    mul = field.mul_table
    for b in field.basis():
        e = [0] * (d * (d - 1) // 2)
        for (i, j), c in coeffs.items():
            e[pos_index(d, i, j)] = mul[b][c]
        out.append(NtMat(d, field, e))
    return out


def partition_positions(i: int, j: int, d: int):
    return [(r, s) for r, s in positions(d) if r >= i and s <= j]


def partition(i: int, j: int, d: int, field: Field) -> IdealDesc:
    """N_{i,j}: matrices supported in rows >= i and columns <= j.

    Rectangles with i <= j are allowed (they arise as centralizers, e.g.
    C(N_{3,1}) = N_{2,2}); they are still strictly lower by intersection.
    """
    if not (2 <= i <= d and 1 <= j <= d - 1):
        raise IndexOutOfRange(f"N_({i},{j}) needs 2 <= i <= d and 1 <= j <= d-1 (d={d})")
    return IdealDesc(d, field, span(_units(d, field, partition_positions(i, j, d)), d, field),
                     ("Partition", i, j))


def gamma_ideal(k: int, d: int, field: Field) -> IdealDesc:
    return IdealDesc(d, field, gamma_subspace(d, field, k))


def mab2(m: int, c: int, d: int, field: Field) -> IdealDesc:
    """N_{m+1,m-1} plus the line x(e_{m,1} + c e_{d,m})."""
    if not 2 <= m <= d - 1:
        raise IndexOutOfRange(f"Mab2 position m={m} outside 2..{d - 1}")
    c = field.check(c)
    gens = _units(d, field, partition_positions(m + 1, m - 1, d))
    gens += _line(d, field, {(m, 1): 1, (d, m): c} if c else {(m, 1): 1})
    return IdealDesc(d, field, span(gens, d, field), ("Mab2", m, c))


def mab3(i: int, c: int, d: int, field: Field) -> IdealDesc:
    """Characteristic-2 exceptional ideal at rows/columns i, i+1.

    N_{i+2,i-1} plus the lines a(e_{i+1,1} + c e_{d,i}) and
    x(e_{i,1} + c e_{d,i+1}).  The two lines are coupled by the same c:
    bracketing the second line with e_{i+1,i} gives -(e_{i+1,1} - c e_{d,i}),
    which lies in the first line only when -1 = 1.
    """
    if field.p != 2:
        raise WrongCharacteristic("Mab3 ideals exist only in characteristic 2")
    if not 2 <= i <= d - 2:
        raise IndexOutOfRange(f"Mab3 position i={i} outside 2..{d - 2}")
    c = field.check(c)
    gens = _units(d, field, partition_positions(i + 2, i - 1, d))
    gens += _line(d, field, {(i + 1, 1): 1, (d, i): c} if c else {(i + 1, 1): 1})
    gens += _line(d, field, {(i, 1): 1, (d, i + 1): c} if c else {(i, 1): 1})
    return IdealDesc(d, field, span(gens, d, field), ("Mab3", i, c))


# -- bilinear helpers -------------------------------------------------------------------


def _lie(d, field):
    return structure(d, field)[1]


def _ring(d, field):
    return structure(d, field)[0]


def _pair_products(a, b, t, p):
    """[x, y, w]: coordinates of (row x of a) * (row y of b) under structure tensor t."""
    return np.einsum("xu,yv,uvw->xyw", a, b, t) % p


def _root_vectors(d, field):
    return np.eye(dim_p(d, field), dtype=DTYPE)


def bracket_image(s: Subspace, d: int, field: Field) -> np.ndarray:
    """All [b, g] for b in the basis of s and g in the Z_p root basis, as rows."""
    if s.dim == 0:
        return np.zeros((0, s.n), dtype=DTYPE)
    return _pair_products(s.basis, _root_vectors(d, field), _lie(d, field), field.p).reshape(-1, s.n)


def centralizer(s: IdealDesc) -> IdealDesc:
    """{M : [M, B] = 0 for every basis vector B of s}."""
    d, f = s.d, s.field
    n = dim_p(d, f)
    if s.dim == 0:
        return IdealDesc(d, f, Subspace(f.p, n, np.eye(n, dtype=DTYPE)))
    # rows (B, w), columns u: coefficient of w in [u, B]
    a = np.einsum("bv,uvw->bwu", s.space.basis, _lie(d, f)).reshape(-1, n) % f.p
    return IdealDesc(d, f, Subspace(f.p, n, nullspace(a, f.p)))


def is_abelian(s: IdealDesc) -> bool:
    if s.dim == 0:
        return True
    b = s.space.basis
    return not _pair_products(b, b, _lie(s.d, s.field), s.field.p).any()


def is_lie_ideal(s: IdealDesc) -> bool:
    return s.space.contains(bracket_image(s.space, s.d, s.field))


def is_ring_closed(s: IdealDesc) -> bool:
    """Closure of the subspace under the matrix product (equivalently under a.b)."""
    if s.dim == 0:
        return True
    b = s.space.basis
    prods = _pair_products(b, b, _ring(s.d, s.field), s.field.p).reshape(-1, s.space.n)
    return s.space.contains(prods)


def is_normal_subgroup(s: IdealDesc) -> bool:
    """Normality of s as a subgroup of (NT, .).

    Raises NotASubgroup when s is not closed under the group product.
    Because a.b = a + b + ab, a subspace is a subgroup exactly when it is
    closed under the matrix product; conjugation by roots is then checked on
    the basis, which suffices since L -> (-r).L.r = L + [L, r] is additive.
    """
    if not is_ring_closed(s):
        raise NotASubgroup("subspace is not closed under the group product")
    d, f = s.d, s.field
    mats = s.basis
    for m in mats:
        if not s.space.contains(to_vector(group_inv(m))):
            raise NotASubgroup("subspace is not closed under inverses")
    for m in mats:
        for i, j in positions(d):
            for b in f.basis():
                if not s.space.contains(to_vector(conj_by_root(m, root(f, b, i, j)))):
                    return False
    return True


def correspondence_check(s: IdealDesc) -> bool:
    """Lie-ideal property agrees with (subgroup and normal) for an abelian s."""
    try:
        group_side = is_normal_subgroup(s)
    except NotASubgroup:
        group_side = False
    return is_lie_ideal(s) == group_side


def lie_ideal_closure(space: Subspace, d: int, field: Field) -> Subspace:
    """Smallest Lie ideal containing the given subspace."""
    cur = space
    while True:
        nxt = cur.with_vectors(bracket_image(cur, d, field))
        if nxt.dim == cur.dim:
            return cur
        cur = nxt


def _coset_reps(comp: np.ndarray, p: int):
    """One representative per Z_p-line of the span of ``comp`` (first nonzero coeff 1)."""
    r = comp.shape[0]
    for lead in range(r):
        for tail in itertools.product(range(p), repeat=r - lead - 1):
            coeffs = np.zeros(r, dtype=DTYPE)
            coeffs[lead] = 1
            coeffs[lead + 1:] = tail
            yield coeffs @ comp % p


def maximality_oracle(s: IdealDesc, bound: int = DEFAULT_COSET_BOUND) -> bool:
    """Whether the abelian Lie ideal s lies in no strictly larger abelian ideal.

    Any abelian ideal properly containing s sits inside C(s), so it suffices
    to try every nonzero class v of C(s)/s: s is maximal iff the ideal
    generated by s and v is never abelian.  v and a nonzero multiple of v
    generate the same ideal, so one representative per line is tried.
    """
    if not (is_abelian(s) and is_lie_ideal(s)):
        raise ValueError("maximality is only defined for abelian Lie ideals")
    d, f = s.d, s.field
    c = centralizer(s)
    comp = s.space.complement_in(c.space)
    count = f.p ** comp.shape[0] - 1
    if count > bound:
        raise TooLarge(f"{count} coset representatives exceed the bound {bound}")
    for v in _coset_reps(comp, f.p):
        ext = lie_ideal_closure(s.space.with_vectors([v]), d, f)
        if is_abelian(IdealDesc(d, f, ext)):
            return False
    return True


def mab_enumerate(d: int, field: Field, families=None, oracle: bool = True) -> list:
    """Candidate maximal abelian ideals: the partitions N_{i+1,i}, the Mab2
    ideals and, in characteristic 2, the Mab3 ideals.

    Mab2 runs over m = 2..d-1 and every c in F; Mab3 over i = 2..d-2 and
    every c.  Each descriptor's ``maximal`` attribute records the oracle
    verdict; nothing is dropped.  ``families`` selects a subset of
    ``("partition", "mab2", "mab3")``.
    """
    if d < 5:
        raise DimensionTooSmall("classification needs d >= 5")
    if families is None:
        families = ("partition", "mab2", "mab3") if field.p == 2 else ("partition", "mab2")
    unknown = set(families) - {"partition", "mab2", "mab3"}
    if unknown:
        raise ValueError(f"unknown families {sorted(unknown)}")
    if "mab3" in families and field.p != 2:
        raise WrongCharacteristic("Mab3 ideals occur only in characteristic 2")
    out = []
    if "partition" in families:
        out += [partition(i + 1, i, d, field) for i in range(1, d)]
    if "mab2" in families:
        out += [mab2(m, c, d, field) for m in range(2, d) for c in range(field.q)]
    if "mab3" in families:
        out += [mab3(i, c, d, field) for i in range(2, d - 1) for c in range(field.q)]
    if oracle:
        for s in out:
            s.maximal = maximality_oracle(s)
    return out


# -- products inside an abelian ideal ------------------------------------------------------------------------------


@dataclass
class Lemma1Report:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def lemma1_suite(s: IdealDesc, samples: int | None = None, seed: int = 0) -> Lemma1Report:
    """Check H^2 in H, H^2 in N_{d,1}, H^2 annihilating every root, and
    a g b + b g a = 0.

    By default every pair of basis vectors is tried against every Z_p root
    basis element; each condition is multilinear, so this is exhaustive.
    With ``samples`` set, that many seeded random triples are tried instead.
    """
    d, f = s.d, s.field
    p = f.p
    ring = _ring(d, f)
    corner = partition(d, 1, d, f).space
    roots = _root_vectors(d, f)
    if samples is None:
        alphas = betas = s.space.basis
        pairs = [(a, b) for a in range(len(alphas)) for b in range(a, len(betas))]
        gammas = roots
    else:
        rng = np.random.default_rng(seed)
        alphas = rng.integers(0, p, (samples, s.dim)) @ s.space.basis % p
        betas = rng.integers(0, p, (samples, s.dim)) @ s.space.basis % p
        pairs = [(a, a) for a in range(samples)]
        gammas = roots[rng.integers(0, roots.shape[0], samples)]
    violations = []

    def mul(x, y):
        return np.einsum("u,v,uvw->w", x, y, ring) % p

    for a, b in pairs:
        x, y = alphas[a], betas[b]
        xy = mul(x, y)
        if not s.space.contains(xy):
            violations.append(f"H^2 not in H: basis pair ({a},{b})")
        if not corner.contains(xy):
            violations.append(f"H^2 not in N_(d,1): basis pair ({a},{b})")
        gam = gammas if samples is None else gammas[a:a + 1]
        for gi, g in enumerate(gam):
            if mul(xy, g).any() or mul(g, xy).any():
                violations.append(f"alpha*beta does not annihilate root {gi}: pair ({a},{b})")
            if ((mul(mul(x, g), y) + mul(mul(y, g), x)) % p).any():
                violations.append(f"alpha*gamma*beta + beta*gamma*alpha != 0: pair ({a},{b}), root {gi}")
    return Lemma1Report(violations)


# -- group-side brute force (small groups only) -------------------------------------------


def _elements(space: Subspace, d, field):
    p = field.p
    for coeffs in itertools.product(range(p), repeat=space.dim):
        v = np.array(coeffs, dtype=DTYPE) @ space.basis % p if space.dim else np.zeros(space.n, DTYPE)
        yield NtMat(d, field, [field.from_digits(v[n * field.k:(n + 1) * field.k])
                               for n in range(space.n // field.k)])


def normal_closure(elements, d: int, field: Field, limit: int = 1 << 16) -> frozenset:
    """Normal subgroup of (NT, .) generated by ``elements``, as a set (brute force)."""
    gens = [unit(d, field, i + 1, i, b) for i in range(1, d) for b in field.basis()]
    seen = {NtMat(d, field)}
    frontier = [e for e in elements]
    for e in frontier:
        seen.add(e)
    while frontier:
        new = []
        for x in frontier:
            cands = [conj(g, x) for g in gens] + [group_mul(x, y) for y in list(seen)]
            for y in cands:
                if y not in seen:
                    seen.add(y)
                    new.append(y)
                    if len(seen) > limit:
                        raise TooLarge("normal closure exceeds the element limit")
        frontier = new
    return frozenset(seen)


def group_maximality_oracle(s: IdealDesc) -> bool:
    """Group-side counterpart of :func:`maximality_oracle`, by element enumeration.

    For each nonzero class v of C(s)/s, forms the normal subgroup generated
    by s and v as an explicit set and tests whether it is abelian.
    """
    d, f = s.d, s.field
    base = list(_elements(s.space, d, f))
    comp = s.space.complement_in(centralizer(s).space)
    for v in _coset_reps(comp, f.p):
        vm = NtMat(d, f, [f.from_digits(v[n * f.k:(n + 1) * f.k]) for n in range(len(v) // f.k)])
        group = normal_closure(base + [vm], d, f)
        elems = list(group)
        if all(group_mul(a, b) == group_mul(b, a) for a, b in itertools.combinations(elems, 2)):
            return False
    return True


def is_abelian_normal_subgroup_set(s: IdealDesc) -> bool:
    """Brute-force: the elements of s form an abelian normal subgroup of (NT, .)."""
    d, f = s.d, s.field
    elems = set(_elements(s.space, d, f))
    gens = [unit(d, f, i + 1, i, b) for i in range(1, d) for b in f.basis()]
    for a in elems:
        for b in elems:
            ab = group_mul(a, b)
            if ab not in elems or ab != group_mul(b, a):
                return False
        if any(conj(g, a) not in elems for g in gens):
            return False
    return True


# -- text format ----------------------------------------------------------------------------


_TAG_RE = re.compile(r"^(Partition|Mab2|Mab3|Custom)(?:\(([\d,\s]*)\))?$")


def format_ideal(s: IdealDesc) -> str:
    blocks = [f"tag={s.tag_str()} d={s.d}", s.field.header(), ""]
    blocks.append("\n\n".join(format_matrix(m) for m in s.basis))
    return "\n".join(blocks).rstrip() + "\n"


def parse_ideal(text: str) -> IdealDesc:
    """Inverse of :func:`format_ideal`; tagged descriptors are rebuilt and compared."""
    lines = text.splitlines()
    if len(lines) < 2:
        raise ParseError("ideal file needs a tag line and a field header")
    head = dict(tok.split("=", 1) for tok in lines[0].split() if "=" in tok)
    try:
        d = int(head["d"])
        m = _TAG_RE.match(head["tag"])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad ideal header {lines[0]!r}") from exc
    if m is None:
        raise ParseError(f"unknown tag {head['tag']!r}")
    field = parse_field(lines[1])
    blocks, cur = [], []
    for ln in lines[2:]:
        if ln.strip():
            cur.append(ln)
        elif cur:
            blocks.append(cur)
            cur = []
    if cur:
        blocks.append(cur)
    mats = [parse_matrix(b, field) for b in blocks]
    if any(x.d != d for x in mats):
        raise ParseError("matrix block size disagrees with header")
    desc = custom(mats, d, field)
    kind = m.group(1)
    if kind != "Custom":
        params = [int(x) for x in m.group(2).split(",")] if m.group(2) else []
        build = {"Partition": partition, "Mab2": mab2, "Mab3": mab3}[kind]
        tagged = build(*params, d, field)
        if not tagged.same_space(desc):
            raise ParseError(f"basis does not match the shape of tag {head['tag']}")
        return tagged
    return desc
