"""Factor an automorphism of UT(d, F_q) into standard automorphisms.

Every automorphism phi (d >= 5) is written as

    phi = Central ; Inner ; Field ; Diag ; Extremal ; [Flip]

(left to right = order of application).  The stages peel these off from the
right: the flip is detected on the abelianization, extremal parameters are
read from the exceptional coefficients of the images of e_{2,1} and
e_{d,d-1}, field and diagonal parts from the action on UT/Gamma_2, the inner
part subdiagonal by subdiagonal, and the remaining central part from the
e_{d,1} coefficients.  The word is only returned after it is re-evaluated
and compared against phi on every generator image.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import autgrp as ag
from . import ntcore as nt
from .errors import (DimensionTooSmall, NotAnAutomorphism, ParseError, ResidualNotCentral)
from .gf import Field, parse_field
from .linalg import solve
from .ntcore import NtMat


@dataclass(frozen=True)
class FamilyElem:
    """One factor of a word: ``kind`` names the family, ``params`` its data.

    kinds and params:
      flip: ()          diag: (d_1, ..., d_d)     fld: (j,)
      inner: (g,)       central: (Lam rows,)      ext_odd / ext_even: (a1, a2)
    """

    kind: str
    params: tuple = ()

    def build(self, d: int, field: Field) -> ag.AutMap:
        k, p = self.kind, self.params
        if k == "flip":
            return ag.make_flip(d, field)
        if k == "diag":
            return ag.make_diag(list(p), field)
        if k == "fld":
            return ag.make_field(d, field, p[0])
        if k == "inner":
            return ag.make_inner(p[0])
        if k == "central":
            return ag.make_central(d, field, p[0])
        if k == "ext_odd":
            return ag.make_extremal_odd(d, field, *p)
        if k == "ext_even":
            return ag.make_extremal_even(d, field, *p)
        raise ValueError(f"unknown family {k!r}")


def eval_elems(elems, d: int, field: Field) -> ag.AutMap:
    return ag.compose_all([e.build(d, field) for e in elems], d, field)


@dataclass
class DecompWord:
    d: int
    field: Field
    flip: bool
    ext: tuple
    fld: int
    diag: tuple
    inner: NtMat
    central: list
    diagnostics: dict = dc_field(default_factory=dict, compare=False)

    def elems(self) -> list:
        """Factors in order of application."""
        ext_kind = "ext_even" if self.field.p == 2 else "ext_odd"
        out = [FamilyElem("central", (self.central,)), FamilyElem("inner", (self.inner,)),
               FamilyElem("fld", (self.fld,)), FamilyElem("diag", tuple(self.diag))]
        if self.d >= 5 and any(self.ext) and (self.field.p != 2 or self.field.q == 2):
            out.append(FamilyElem(ext_kind, tuple(self.ext)))
        if self.flip:
            out.append(FamilyElem("flip"))
        return out

    def is_trivial(self) -> bool:
        return (not self.flip and not any(self.ext) and self.fld == 0
                and all(x == 1 for x in self.diag) and self.inner.is_zero()
                and not any(any(row) for row in self.central))


def eval_word(w: DecompWord) -> ag.AutMap:
    return eval_elems(w.elems(), w.d, w.field)


# -- helpers ---------------------------------------------------------------------------------


def _gen_images(phi):
    """[(i, b, image of b e_{i+1,i})] over all stored generators."""
    basis = phi.field.basis()
    return [(i + 1, basis[t], img) for i, row in enumerate(phi.images) for t, img in enumerate(row)]


def _deviation(phi):
    """Generator images minus the generators, as NtMats (ring difference)."""
    return [(i, b, img - nt.unit(phi.d, phi.field, i + 1, i, b)) for i, b, img in _gen_images(phi)]


def _lowest_subdiagonal(a: NtMat) -> int:
    """Smallest k with a nonzero entry on subdiagonal k (d if a = 0)."""
    return min((i - j for (i, j), x in a.items() if x), default=a.d)


def identity_mod_gamma(phi, k: int) -> bool:
    """Every generator image agrees with the generator modulo Gamma_k."""
    return all(_lowest_subdiagonal(dev) >= k for _, _, dev in _deviation(phi))


def _fail(stage, msg):
    return NotAnAutomorphism(f"{stage}: {msg}", stage=stage)


# -- stage 1: flip ------------------------------------------------------------------------------


def _block_pattern(phi):
    """Boolean (d-1)x(d-1) matrix: block (r, i) of the abelianization is nonzero."""
    d, k = phi.d, phi.field.k
    a = ag.abelianization_matrix(phi)
    return np.array([[a[r * k:(r + 1) * k, i * k:(i + 1) * k].any() for i in range(d - 1)]
                     for r in range(d - 1)])


def detect_flip(phi: ag.AutMap) -> bool:
    """True iff phi swaps the simple root positions i and d-i on UT/Gamma_2."""
    pat = _block_pattern(phi)
    n = phi.d - 1
    ident = np.eye(n, dtype=bool)
    if np.array_equal(pat, ident):
        return False
    if np.array_equal(pat, ident[::-1]):
        return True
    raise _fail("flip", "abelianization is not block-monomial along i -> i or i -> d-i")


# -- stage 2: extremal --------------------------------------------------------------------------


def _ext_positions(d, field):
    """Exceptional positions read from the images of e_{2,1} and e_{d,d-1}."""
    if field.p == 2:
        return (d, 3), (d - 2, 1)
    return (d, 2), (d - 1, 1)


def extremal_inverse(d: int, field: Field, a1, a2) -> ag.AutMap:
    if field.p == 2:
        # each one-sided map is an involution over GF(2)
        return ag.compose(ag.extremal_even_shape(d, field, 0, a2), ag.extremal_even_shape(d, field, a1, 0))
    return ag.make_extremal_odd(d, field, field.neg(a1), field.neg(a2))


def solve_extremal(phi: ag.AutMap) -> tuple:
    """Extremal parameters (a1, a2) of a flip-free phi.

    a1 is the exceptional coefficient of phi(e_{2,1}) divided by its
    e_{2,1} coefficient, likewise a2 for e_{d,d-1}.
    """
    d, f = phi.d, phi.field
    p1, p2 = _ext_positions(d, f)
    g1 = ag.apply(phi, nt.unit(d, f, 2, 1))
    g2 = ag.apply(phi, nt.unit(d, f, d, d - 1))
    if g1[2, 1] == 0 or g2[d, d - 1] == 0:
        raise _fail("extremal", "boundary generator leaves its root group mod Gamma_2")
    a1 = f.div(g1[p1], g1[2, 1])
    a2 = f.div(g2[p2], g2[d, d - 1])
    if (a1 or a2) and f.p == 2 and f.q != 2:
        raise _fail("extremal", "exceptional coefficient over a field larger than GF(2)")
    return a1, a2


def _check_boundary_support(phi, stage):
    """After removing the extremal part, images of x e_{2,1} lie in column 1
    and images of x e_{d,d-1} lie in row d."""
    d = phi.d
    for img in phi.images[0]:
        if any(x and j != 1 for (i, j), x in img.items()):
            raise _fail(stage, "image of e_{2,1} has support outside column 1")
    for img in phi.images[d - 2]:
        if any(x and i != d for (i, j), x in img.items()):
            raise _fail(stage, f"image of e_{{{d},{d - 1}}} has support outside row {d}")


# -- stage 3: field and diagonal ---------------------------------------------------------------


def solve_field_diag(phi: ag.AutMap) -> tuple:
    """(j, D) with phi = Field(j) ; Diag(D) modulo Gamma_2, d_1 = 1."""
    d, f = phi.d, phi.field
    pat = _block_pattern(phi)
    if not np.array_equal(pat, np.eye(d - 1, dtype=bool)):
        raise _fail("field_diag", "generators not mapped into their own root groups mod Gamma_2")

    def lam(i, x):
        # additive extension of b_t -> coefficient of e_{i+1,i}
        out = 0
        for img, c in zip(phi.images[i - 1], f.digits(x)):
            out = f.add(out, f.mul(f.scalar(c), img[i + 1, i]))
        return out

    ks = [lam(i, 1) for i in range(1, d)]
    if any(k == 0 for k in ks):
        raise _fail("field_diag", "lambda_i(1) = 0")
    mu = [f.div(lam(1, x), ks[0]) for x in range(f.q)]
    for x in range(f.q):
        for y in range(f.q):
            if mu[f.mul(x, y)] != f.mul(mu[x], mu[y]):
                raise _fail("field_diag", "mu is not multiplicative")
    j = next((j for j in range(f.k) if tuple(mu) == f.frobenius_map(j)), None)
    if j is None:
        raise _fail("field_diag", "mu is not a field automorphism")
    for i in range(1, d):
        if any(lam(i, x) != f.mul(ks[i - 1], mu[x]) for x in range(f.q)):
            raise _fail("field_diag", f"lambda_{i} is not k_{i} mu")
    diag = [1]
    for k in ks:
        diag.append(f.mul(diag[-1], f.inv(k)))
    return j, tuple(diag)


# -- stage 4: inner -----------------------------------------------------------------------------


def _inner_step(phi: ag.AutMap, k: int) -> NtMat:
    """h on subdiagonal k-1 with phi ; Inner(h) fixing generators mod Gamma_{k+1}.

    Needs phi to fix generators mod Gamma_k.  Conjugation by h changes
    the image y' of y = b e_{i+1,i} by [y, h] on subdiagonal k, so the
    unknown h solves the Z_p-linear system [y, h] = -(deviation of y).
    """
    d, f = phi.d, phi.field
    hpos = nt.subdiagonal_positions(d, k - 1)
    tpos = nt.subdiagonal_positions(d, k)
    basis = f.basis()

    def coords(a: NtMat):
        return [c for ij in tpos for c in f.digits(a[ij])]

    devs = _deviation(phi)
    cols = []
    for ij in hpos:
        for b in basis:
            h = nt.unit(d, f, *ij, b)
            col = []
            for i, y, _ in devs:
                col.extend(coords(nt.bracket(nt.unit(d, f, i + 1, i, y), h)))
            cols.append(col)
    rhs = []
    for _, _, dev in devs:
        rhs.extend(coords(nt.mat_neg(dev)))
    if not cols:
        return nt.mat_zero(d, f)
    x = solve(np.array(cols, dtype=np.int64).T, rhs, f.p)
    if x is None:
        raise _fail("inner", f"subdiagonal {k} deviation is not an inner derivation")
    coeffs = {}
    for n, ij in enumerate(hpos):
        coeffs[ij] = f.from_digits([int(c) for c in x[n * f.k:(n + 1) * f.k]])
    return NtMat.from_dict(d, f, coeffs)


def solve_inner(phi: ag.AutMap) -> NtMat:
    """g with phi = R ; Inner(g) where R fixes generators mod Gamma_{d-1}.

    phi must fix every generator modulo Gamma_2.
    """
    d, f = phi.d, phi.field
    total = nt.mat_zero(d, f)
    cur = phi
    for k in range(2, d - 1):
        h = _inner_step(cur, k)
        if not h.is_zero():
            cur = ag.compose(cur, ag.make_inner(h))
            total = nt.group_mul(total, h)
        if not identity_mod_gamma(cur, k + 1):
            raise _fail("inner", f"subdiagonal {k} not cleared")
    return nt.group_inv(total)


# -- stage 5: central ---------------------------------------------------------------------------


def solve_central(phi: ag.AutMap) -> list:
    """Lam with phi = Central(Lam), read from the e_{d,1} coefficients."""
    d, f = phi.d, phi.field
    lam = []
    for i, row in enumerate(phi.images, start=1):
        vals = []
        for b, img in zip(f.basis(), row):
            rest = img - nt.unit(d, f, i + 1, i, b)
            if any(x and ij != (d, 1) for ij, x in rest.items()):
                raise ResidualNotCentral(f"generator {i} deviates outside e_{{{d},1}}", stage="central")
            vals.append(rest[d, 1])
        lam.append(vals)
    return lam


# -- driver ---------------------------------------------------------------------------------------


def decompose(phi: ag.AutMap, precheck: bool = True) -> DecompWord:
    """Word w of standard automorphisms with eval_word(w) == phi.

    With ``precheck`` the relation check of :func:`autgrp.verify` runs
    first; without it a non-automorphism is still rejected by a stage or by
    the final recomposition comparison.
    """
    d, f = phi.d, phi.field
    if d < 5:
        raise DimensionTooSmall("decomposition needs d >= 5")
    diag_info = {}
    if precheck:
        rep = ag.verify(ag.AutMap(d, f, phi.images), "relations")
        if not rep.passed:
            raise NotAnAutomorphism(f"verify: {rep.reason}", stage="verify")

    flip = detect_flip(phi)
    cur = ag.compose(phi, ag.make_flip(d, f)) if flip else phi
    if _block_pattern(cur).tolist() != np.eye(d - 1, dtype=bool).tolist():
        raise _fail("flip", "flip correction did not restore the positions")

    a1, a2 = solve_extremal(cur)
    if a1 or a2:
        cur = ag.compose(cur, extremal_inverse(d, f, a1, a2))
    _check_boundary_support(cur, "extremal")

    j, diag = solve_field_diag(cur)
    inv_diag = [f.inv(x) for x in diag]
    cur = ag.compose(ag.compose(cur, ag.make_diag(inv_diag, f)), ag.make_field(d, f, (f.k - j) % f.k))
    diag_info["mod_gamma2"] = identity_mod_gamma(cur, 2)
    if not diag_info["mod_gamma2"]:
        raise _fail("field_diag", "residual is not the identity mod Gamma_2")

    g = solve_inner(cur)
    cur = ag.compose(cur, ag.make_inner(nt.group_inv(g)))
    diag_info["mod_gamma_d_1"] = identity_mod_gamma(cur, d - 1)
    if not diag_info["mod_gamma_d_1"]:
        raise _fail("inner", "residual is not the identity mod Gamma_{d-1}")

    lam = solve_central(cur)
    diag_info["central_exact"] = ag.aut_eq(cur, ag.make_central(d, f, lam))
    if not diag_info["central_exact"]:
        raise _fail("central", "central residue does not reproduce the residual")

    w = DecompWord(d, f, flip, (a1, a2), j, diag, g, lam, diag_info)
    diag_info["recomposed"] = ag.aut_eq(eval_word(w), phi)
    if not diag_info["recomposed"]:
        raise _fail("recompose", "word does not re-evaluate to the input")
    return w


# -- random words and corrupted maps ------------------------------------------------------------


def families(field: Field) -> list:
    out = ["flip", "diag", "fld", "inner", "central"]
    if field.p != 2:
        out.append("ext_odd")
    elif field.q == 2:
        out.append("ext_even")
    return out


def random_elem(rng: np.random.Generator, d: int, field: Field, kind: str | None = None) -> FamilyElem:
    q, m = field.q, d * (d - 1) // 2
    if kind is None:
        fams = families(field)
        kind = fams[int(rng.integers(len(fams)))]
    if kind == "flip":
        return FamilyElem("flip")
    if kind == "diag":
        return FamilyElem("diag", (1,) + tuple(int(x) for x in rng.integers(1, q, d - 1)))
    if kind == "fld":
        return FamilyElem("fld", (int(rng.integers(field.k)),))
    if kind == "inner":
        return FamilyElem("inner", (NtMat(d, field, [int(x) for x in rng.integers(0, q, m)]),))
    if kind == "central":
        lam = [[int(x) for x in rng.integers(0, q, field.k)] for _ in range(d - 1)]
        return FamilyElem("central", (lam,))
    if kind in ("ext_odd", "ext_even"):
        return FamilyElem(kind, tuple(int(x) for x in rng.integers(0, q, 2)))
    raise ValueError(f"unknown family {kind!r}")


def random_word(rng: np.random.Generator, d: int, field: Field, length: int) -> list:
    return [random_elem(rng, d, field) for _ in range(length)]


def corrupt(phi: ag.AutMap, rng: np.random.Generator) -> ag.AutMap:
    """Change one entry (never e_{d,1}) of one generator image."""
    d, f = phi.d, phi.field
    rows = [list(r) for r in phi.images]
    i = int(rng.integers(d - 1))
    t = int(rng.integers(f.k))
    cand = [ij for ij in nt.positions(d) if ij != (d, 1)]
    ij = cand[int(rng.integers(len(cand)))]
    img = rows[i][t]
    shift = int(rng.integers(1, f.q))
    rows[i][t] = img + nt.unit(d, f, *ij, shift)
    return ag.AutMap(d, f, rows)


def corrupted_maps(n: int, d: int, field: Field, seed: int, length: int = 4) -> list:
    """n seeded corrupted automorphisms that fail verification."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        phi = corrupt(eval_elems(random_word(rng, d, field, length), d, field), rng)
        if not ag.verify(ag.AutMap(d, field, phi.images)).passed:
            out.append(phi)
    return out


# -- text format -------------------------------------------------------------------------------------


def format_word(w: DecompWord) -> str:
    lines = [w.field.header(), f"d={w.d}", f"flip={int(w.flip)}",
             f"ext={w.ext[0]},{w.ext[1]}", f"fld={w.fld}",
             "diag=" + ",".join(str(x) for x in w.diag), "inner=", nt.format_matrix(w.inner),
             "central=", " ".join(str(x) for row in w.central for x in row)]
    return "\n".join(lines) + "\n"


def parse_word(text: str) -> DecompWord:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    try:
        field = parse_field(lines[0])
        vals = {}
        n = 1
        while n < len(lines):
            key, _, val = lines[n].partition("=")
            if key == "inner":
                d = int(vals["d"])
                vals["inner"] = nt.parse_matrix(lines[n + 1:n + 1 + d], field)
                n += 1 + d
                continue
            if key == "central":
                vals["central"] = lines[n + 1] if n + 1 < len(lines) else ""
                n += 2
                continue
            vals[key] = val
            n += 1
        d = int(vals["d"])
        ext = tuple(field.check(int(x)) for x in vals["ext"].split(","))
        diag = tuple(field.check(int(x)) for x in vals["diag"].split(","))
        flat = [field.check(int(x)) for x in vals["central"].split()]
        central = [flat[i * field.k:(i + 1) * field.k] for i in range(d - 1)]
        if len(ext) != 2 or len(diag) != d or len(flat) != (d - 1) * field.k:
            raise ParseError("word has wrong field counts")
        return DecompWord(d, field, vals["flip"] == "1", ext, int(vals["fld"]), diag,
                          vals["inner"], central)
    except (KeyError, IndexError, ValueError) as exc:
        raise ParseError(f"malformed word: {exc}") from exc
