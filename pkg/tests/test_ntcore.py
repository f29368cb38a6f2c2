import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unitri import ntcore as nt
from unitri.errors import DimensionMismatch, FieldMismatch, IndexOutOfRange
from unitri.gf import field_make
from unitri.ntcore import NtMat

FIELDS = {q: field_make(*pk) for q, pk in {2: (2, 1), 3: (3, 1), 4: (2, 2), 5: (5, 1), 9: (3, 2)}.items()}


def dense_group_mul(a: NtMat, b: NtMat) -> NtMat:
    """(1+A)(1+B) - 1 computed on full d x d matrices."""
    f, d = a.field, a.d
    A, B = a.to_dense(), b.to_dense()
    one = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    A1 = [[f.add(A[i][j], one[i][j]) for j in range(d)] for i in range(d)]
    B1 = [[f.add(B[i][j], one[i][j]) for j in range(d)] for i in range(d)]
    C = [[0] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            s = 0
            for t in range(d):
                s = f.add(s, f.mul(A1[i][t], B1[t][j]))
            C[i][j] = f.sub(s, one[i][j])
    return NtMat.from_dense(C, f)


def random_mat(rng, d, f):
    return NtMat(d, f, [int(x) for x in rng.integers(0, f.q, d * (d - 1) // 2)])


def all_mats(d, f):
    return [NtMat(d, f, list(e)) for e in itertools.product(range(f.q), repeat=d * (d - 1) // 2)]


def eq2(d, f, x, ij, y, kl):
    """Right side of the commutator formula for two root elements."""
    (i, j), (k, l) = ij, kl
    if j == k:
        return nt.unit(d, f, i, l, f.mul(x, y))
    if i == l:
        return nt.unit(d, f, k, j, f.neg(f.mul(x, y)))
    return nt.mat_zero(d, f)


# -- examples -------------------------------------------------------------------------------


def test_packed_layout():
    assert nt.positions(4) == ((2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3))
    assert all(nt.pos_index(5, i, j) == n for n, (i, j) in enumerate(nt.positions(5)))


def test_basic_arithmetic_examples():
    f = FIELDS[2]
    e21, e32 = nt.unit(3, f, 2, 1), nt.unit(3, f, 3, 2)
    assert sum(1 for x in nt.mat_from_root(nt.root(f, 1, 2, 1), 3).entries if x) == 1
    assert nt.mat_add(e21, nt.mat_neg(e21)).is_zero()
    assert sum(1 for x in nt.mat_add(e21, e32).entries if x) == 2


def test_ring_and_group_products():
    f = FIELDS[3]
    e21, e32, e31 = (nt.unit(4, f, *ij) for ij in [(2, 1), (3, 2), (3, 1)])
    assert nt.ring_mul(e32, e21) == e31
    assert nt.ring_mul(e21, e32).is_zero()
    assert nt.group_mul(e32, e21) == e32 + e21 + e31
    assert nt.group_mul(e21, e32) == e21 + e32
    assert nt.group_inv(nt.unit(4, f, 4, 2, 2)) == nt.unit(4, f, 4, 2, 1)


def test_nilpotency():
    rng = np.random.default_rng(1)
    f = FIELDS[3]
    for _ in range(20):
        a = random_mat(rng, 5, f)
        out = a
        for _ in range(4):
            out = nt.ring_mul(out, a)
        assert out.is_zero()


def test_commutator_and_bracket_examples():
    f = FIELDS[3]
    e21, e32, e31 = (nt.unit(3, f, *ij) for ij in [(2, 1), (3, 2), (3, 1)])
    assert nt.commutator(e32, e21) == e31
    assert nt.commutator(e21, e32) == nt.mat_neg(e31)
    assert nt.commutator(e21 + e32, e21 + e32).is_zero()
    assert nt.bracket(e21, e32) == nt.mat_neg(e31)
    assert nt.bracket(e32, e21) == e31
    assert nt.bracket(e21 + e32, e21 + e32).is_zero()


def test_conj_by_root_examples():
    f = FIELDS[3]
    e31, e32 = nt.unit(3, f, 3, 1), nt.unit(3, f, 3, 2)
    assert nt.conj_by_root(e31, nt.root(f, 2, 2, 1)) == e31
    assert nt.conj_by_root(e32, nt.root(f, 1, 2, 1)) == e32 + e31


def test_gamma_basis_examples():
    f = FIELDS[2]
    assert [(r.i, r.j) for r in nt.gamma_basis(5, 4, f)] == [(5, 1)]
    assert nt.gamma_basis(5, 5, f) == []
    assert nt.gamma_member(nt.unit(3, f, 3, 1), 2)
    assert not nt.gamma_member(nt.unit(3, f, 2, 1), 2)
    with pytest.raises(IndexOutOfRange):
        nt.gamma_basis(5, 6, f)


def test_series_examples():
    f = FIELDS[2]
    lower = nt.lower_central_series(5, f)
    assert [s.dim for s in lower] == [10, 6, 3, 1, 0]
    upper = nt.upper_central_series(5, f)
    assert upper[1] == nt.span([nt.unit(5, f, 5, 1)], 5, f)


def test_factorization_examples():
    f = FIELDS[2]
    assert nt.root_factorize(nt.mat_zero(3, f)) == []
    e21, e32 = nt.unit(3, f, 2, 1), nt.unit(3, f, 3, 2)
    assert [(r.i, r.j) for r in nt.root_factorize(e21 + e32)] == [(2, 1), (3, 2)]
    assert [(r.i, r.j) for r in nt.root_factorize(nt.group_mul(e32, e21))] == [(2, 1), (3, 2), (3, 1)]


def test_mismatch_errors():
    with pytest.raises(DimensionMismatch):
        nt.group_mul(nt.mat_zero(3, FIELDS[2]), nt.mat_zero(4, FIELDS[2]))
    with pytest.raises(FieldMismatch):
        nt.group_mul(nt.mat_zero(3, FIELDS[2]), nt.mat_zero(3, FIELDS[3]))


def test_matrix_text_round_trip():
    rng = np.random.default_rng(5)
    f = FIELDS[9]
    a = random_mat(rng, 5, f)
    text = nt.format_matrix(a)
    assert text.splitlines()[0] == "d=5"
    assert nt.parse_matrix(text, f) == a


# -- exhaustive properties ------------------------------------------------------------------


@pytest.mark.parametrize("q", [2, 3])
def test_group_axioms_d4_exhaustive(q):
    f = FIELDS[q]
    d, m = 4, 6
    n = f.q**m
    elems = nt.batch_decode(np.arange(n), m, f)
    assert np.array_equal(nt.batch_group_mul(elems, np.zeros_like(elems), d, f), elems)
    inv = nt.to_batch([nt.group_inv(NtMat(d, f, list(e))) for e in elems])
    assert not nt.batch_group_mul(elems, inv, d, f).any()
    assert not nt.batch_group_mul(inv, elems, d, f).any()
    # every pair (a, b), against a seeded handful of third factors
    rng = np.random.default_rng(0)
    a = np.repeat(elems, n, axis=0)
    b = np.tile(elems, (n, 1))
    ab = nt.batch_group_mul(a, b, d, f)
    for c in elems[rng.integers(0, n, 4)]:
        c = np.broadcast_to(c, a.shape)
        left = nt.batch_group_mul(ab, c, d, f)
        right = nt.batch_group_mul(a, nt.batch_group_mul(b, c, d, f), d, f)
        assert np.array_equal(left, right)


def test_group_axioms_d4_gf2_all_triples():
    f = FIELDS[2]
    d, m = 4, 6
    elems = nt.batch_decode(np.arange(64), m, f)
    a = np.repeat(elems, 64 * 64, axis=0)
    b = np.tile(np.repeat(elems, 64, axis=0), (64, 1))
    c = np.tile(elems, (64 * 64, 1))
    left = nt.batch_group_mul(nt.batch_group_mul(a, b, d, f), c, d, f)
    right = nt.batch_group_mul(a, nt.batch_group_mul(b, c, d, f), d, f)
    assert np.array_equal(left, right)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("q", [2, 3, 4])
def test_commutator_formula_on_root_pairs(d, q):
    f = FIELDS[q]
    pos = nt.positions(d)
    scalars = range(1, f.q) if d <= 5 else [1, f.q - 1]
    for ij, kl in itertools.product(pos, repeat=2):
        for x, y in itertools.product(scalars, repeat=2):
            got = nt.commutator(nt.unit(d, f, *ij, x), nt.unit(d, f, *kl, y))
            assert got == eq2(d, f, x, ij, y, kl)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_jacobi_and_bilinearity(d):
    f = FIELDS[3]
    units = [nt.unit(d, f, *ij) for ij in nt.positions(d)]
    for a, b, c in itertools.product(units, repeat=3):
        jac = nt.mat_add(nt.mat_add(nt.bracket(a, nt.bracket(b, c)), nt.bracket(b, nt.bracket(c, a))),
                         nt.bracket(c, nt.bracket(a, b)))
        assert jac.is_zero()
        assert nt.bracket(nt.mat_add(a, b), c) == nt.mat_add(nt.bracket(a, c), nt.bracket(b, c))
        assert nt.bracket(a, nt.mat_scale(b, 2)) == nt.mat_scale(nt.bracket(a, b), 2)


def test_conjugation_identity_d4_gf2_exhaustive():
    f = FIELDS[2]
    for L in all_mats(4, f):
        for i, j in nt.positions(4):
            r = nt.root(f, 1, i, j)
            assert nt.conj_by_root(L, r) == nt.mat_add(L, nt.bracket(L, nt.mat_from_root(r, 4)))


def test_conjugation_identity_sampled():
    rng = np.random.default_rng(0xC0FFEE)
    for n in range(10_000):
        q = (2, 3, 4)[n % 3]
        f = FIELDS[q]
        d = int(rng.integers(2, 7))
        L = random_mat(rng, d, f)
        i, j = nt.positions(d)[int(rng.integers(d * (d - 1) // 2))]
        r = nt.root(f, int(rng.integers(f.q)), i, j)
        nt.conj_by_root(L, r)  # asserts the identity internally


@pytest.mark.parametrize("d,q", [(3, 2), (5, 3), (6, 4), (7, 2), (5, 9)])
def test_factorization_round_trip(d, q):
    f = FIELDS[q]
    rng = np.random.default_rng(d * 100 + q)
    order = {ij: n for n, ij in enumerate(nt.canonical_order(d))}
    batch = rng.integers(0, f.q, (10_000, d * (d - 1) // 2)).astype(np.int16)
    for row in batch[:500]:
        g = NtMat(d, f, [int(x) for x in row])
        roots = nt.root_factorize(g)
        assert nt.root_product(roots, d, f) == g
        keys = [order[(r.i, r.j)] for r in roots]
        assert keys == sorted(keys) and all(r.x.idx for r in roots)
    # the remaining samples through the vectorized peel
    res = batch.copy()
    prod = np.zeros_like(batch)
    for i, j in nt.canonical_order(d):
        x = nt.batch_left_root_peel(res, d, f, i, j)
        unit = np.zeros_like(batch)
        unit[:, nt.pos_index(d, i, j)] = x
        prod = nt.batch_group_mul(prod, unit, d, f)
    assert not res.any()
    assert np.array_equal(prod, batch)


@pytest.mark.parametrize("d", [4, 5, 6])
def test_grading(d):
    f = FIELDS[3]
    for ij, kl in itertools.product(nt.positions(d), repeat=2):
        c = nt.commutator(nt.unit(d, f, *ij, 2), nt.unit(d, f, *kl, 1))
        assert nt.gamma_member(c, min(d, (ij[0] - ij[1]) + (kl[0] - kl[1])))


@pytest.mark.parametrize("d,q", [(5, 2), (5, 3), (6, 2), (6, 3), (7, 2), (4, 4), (5, 9)])
def test_series_equal_gamma_chain(d, q):
    f = FIELDS[q]
    gamma = nt.gamma_chain(d, f)
    assert nt.lower_central_series(d, f) == gamma
    assert nt.upper_central_series(d, f)[::-1] == gamma


# -- batch kernels agree with scalar code ----------------------------------------------------


@pytest.mark.parametrize("d,q", [(4, 4), (5, 3), (6, 2)])
def test_batch_mul_matches_scalar_and_dense(d, q):
    f = FIELDS[q]
    rng = np.random.default_rng(3)
    a = rng.integers(0, f.q, (200, d * (d - 1) // 2)).astype(np.int16)
    b = rng.integers(0, f.q, (200, d * (d - 1) // 2)).astype(np.int16)
    out = nt.batch_group_mul(a, b, d, f)
    for n in range(0, 200, 7):
        x, y = NtMat(d, f, [int(v) for v in a[n]]), NtMat(d, f, [int(v) for v in b[n]])
        assert list(out[n]) == list(nt.group_mul(x, y).entries)
        assert nt.group_mul(x, y) == dense_group_mul(x, y)


def test_encode_decode():
    f = FIELDS[3]
    idx = np.arange(3**6)
    assert np.array_equal(nt.batch_encode(nt.batch_decode(idx, 6, f), f), idx)


# -- hypothesis ----------------------------------------------------------------------------------


@st.composite
def mats(draw, d=None, q=None):
    q = q if q is not None else draw(st.sampled_from([2, 3, 4, 5, 9]))
    d = d if d is not None else draw(st.integers(2, 6))
    f = FIELDS[q]
    entries = draw(st.lists(st.integers(0, f.q - 1), min_size=d * (d - 1) // 2, max_size=d * (d - 1) // 2))
    return NtMat(d, f, entries)


@st.composite
def mat_triples(draw):
    q = draw(st.sampled_from([2, 3, 4, 5, 9]))
    d = draw(st.integers(2, 6))
    return tuple(draw(mats(d, q)) for _ in range(3))


@settings(max_examples=200)
@given(mat_triples())
def test_group_laws(abc):
    a, b, c = abc
    assert nt.group_mul(nt.group_mul(a, b), c) == nt.group_mul(a, nt.group_mul(b, c))
    assert nt.group_mul(a, nt.group_inv(a)).is_zero()
    assert nt.group_mul(a, b) == dense_group_mul(a, b)
    assert nt.commutator(a, b) == nt.group_inv(nt.commutator(b, a))


@settings(max_examples=200)
@given(mat_triples())
def test_ring_laws(abc):
    a, b, c = abc
    assert nt.ring_mul(a, nt.mat_add(b, c)) == nt.mat_add(nt.ring_mul(a, b), nt.ring_mul(a, c))
    assert nt.ring_mul(nt.ring_mul(a, b), c) == nt.ring_mul(a, nt.ring_mul(b, c))
    assert nt.bracket(a, b) == nt.mat_neg(nt.bracket(b, a))


@given(mats())
def test_vector_round_trip_and_factorization(a):
    assert nt.from_vector(nt.to_vector(a), a.d, a.field) == a
    assert nt.root_product(nt.root_factorize(a), a.d, a.field) == a
    assert nt.parse_matrix(nt.format_matrix(a), a.field) == a


@given(mats(), st.integers(-5, 12))
def test_powers(a, n):
    p = a.field.p
    assert nt.group_pow(a, n) == nt.group_inv(nt.group_pow(a, -n))
    # exponent of UT(d, p^k) divides p^ceil(log_p d)
    e = 1
    while e < a.d:
        e *= p
    assert nt.group_pow(a, e).is_zero()
