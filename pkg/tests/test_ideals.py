import itertools

import numpy as np
import pytest

from unitri import ideals as idl
from unitri import ntcore as nt
from unitri.errors import (DimensionTooSmall, IndexOutOfRange, NotASubgroup, ParseError, TooLarge,
                           WrongCharacteristic)
from unitri.gf import field_make
from unitri.linalg import Subspace

F2, F3, F4 = field_make(2), field_make(3), field_make(2, 2)


def test_partition_examples():
    s = idl.partition(5, 1, 5, F3)
    assert s.dim == 1 and s.space == nt.span([nt.unit(5, F3, 5, 1)], 5, F3)
    s = idl.partition(2, 1, 5, F4)
    expected = nt.span([nt.unit(5, F4, i, 1, b) for i in range(2, 6) for b in F4.basis()], 5, F4)
    assert s.space == expected and s.dim == 8
    with pytest.raises(IndexOutOfRange):
        idl.partition(1, 1, 5, F2)


@pytest.mark.parametrize("i,j", [(2, 1), (3, 1), (4, 2), (5, 3), (5, 4)])
def test_partition_is_abelian_two_sided_ideal(i, j):
    s = idl.partition(i, j, 5, F3)
    for a, b in itertools.product(s.basis, repeat=2):
        assert nt.ring_mul(a, b).is_zero()
    assert idl.is_ring_closed(s) and idl.is_lie_ideal(s) and idl.is_abelian(s)
    for a in s.basis:
        for r in nt.basis_mats(5, F3):
            assert s.space.contains(nt.to_vector(nt.ring_mul(a, r)))
            assert s.space.contains(nt.to_vector(nt.ring_mul(r, a)))


def test_centralizer_examples():
    assert idl.centralizer(idl.partition(3, 1, 5, F2)).space == idl.partition(2, 2, 5, F2).space
    for i in range(1, 5):
        s = idl.partition(i + 1, i, 5, F3)
        assert idl.centralizer(s).space == s.space


@pytest.mark.parametrize("d", [3, 4, 5, 6])
@pytest.mark.parametrize("f", [F2, F3, F4], ids=["q2", "q3", "q4"])
def test_centralizer_formula(d, f):
    for i in range(2, d + 1):
        for j in range(1, i):
            c = idl.centralizer(idl.partition(i, j, d, f))
            if j + 1 > d or i - 1 < 1:
                continue
            assert c.space == idl.partition(j + 1, i - 1, d, f).space
    for k in range(1, d):
        assert idl.centralizer(idl.gamma_ideal(k, d, f)).space == idl.partition(d - k + 1, k, d, f).space


def test_centralizer_agrees_with_group_commutation():
    # brute-force group-side centralizer of N_{4,2} in UT(4, 2)
    s = idl.partition(4, 2, 4, F2)
    elems = [nt.NtMat(4, F2, list(e)) for e in itertools.product(range(2), repeat=6)]
    basis = s.basis
    group_c = {g for g in elems if all(nt.group_mul(g, b) == nt.group_mul(b, g) for b in basis)}
    lin_c = idl.centralizer(s)
    assert group_c == {g for g in elems if lin_c.space.contains(nt.to_vector(g))}


@pytest.mark.parametrize("d", [5, 6, 7])
def test_gamma_is_sum_of_partitions(d):
    for k in range(1, d):
        total = Subspace(F3.p, nt.dim_p(d, F3))
        for m in range(1, d - k + 1):
            total = total + idl.partition(k + m, m, d, F3).space
        assert total == nt.gamma_subspace(d, F3, k)


def test_abelian_and_normal_examples():
    s = idl.partition(3, 2, 5, F2)
    assert idl.is_abelian(s) and idl.is_lie_ideal(s) and idl.is_normal_subgroup(s)
    full = idl.gamma_ideal(1, 4, F2)
    assert not idl.is_abelian(full)


def test_normal_subgroup_requires_closure():
    s = idl.custom([nt.unit(4, F2, 2, 1), nt.unit(4, F2, 3, 2)], 4, F2)
    with pytest.raises(NotASubgroup):
        idl.is_normal_subgroup(s)
    assert idl.correspondence_check(s)


def test_correspondence_on_partitions_and_random_subspaces():
    for d in (4, 5):
        for i in range(2, d + 1):
            for j in range(1, i):
                assert idl.correspondence_check(idl.partition(i, j, d, F3))
    rng = np.random.default_rng(11)
    n = nt.dim_p(5, F2)
    for _ in range(200):
        vecs = rng.integers(0, 2, (int(rng.integers(1, 5)), n))
        s = idl.IdealDesc(5, F2, Subspace(2, n, vecs))
        assert idl.correspondence_check(s)


def test_lie_ideal_matches_brute_force_normality_d4():
    # every subspace spanned by up to two roots plus the corner, UT(4, 2)
    n = nt.dim_p(4, F2)
    units = [nt.to_vector(m) for m in nt.basis_mats(4, F2)]
    for combo in itertools.combinations(range(n), 2):
        s = idl.IdealDesc(4, F2, Subspace(2, n, [units[c] for c in combo]))
        brute = idl.is_abelian_normal_subgroup_set(s)
        assert brute == (idl.is_abelian(s) and idl.is_lie_ideal(s) and idl.is_ring_closed(s))


def test_mab_enumerate_shapes():
    descs = idl.mab_enumerate(5, F3, oracle=False)
    assert sum(1 for s in descs if s.tag[0] == "Partition") == 4
    assert all(idl.is_abelian(s) and idl.is_lie_ideal(s) for s in descs)
    with pytest.raises(DimensionTooSmall):
        idl.mab_enumerate(4, F2)
    with pytest.raises(WrongCharacteristic):
        idl.mab_enumerate(5, F3, families=("partition", "mab2", "mab3"))


def test_maximal_counts_d5():
    # frozen from the coset oracle (the group-side brute force below agrees)
    expected = {F2: (14, ["Mab2(3,0)", "Mab2(4,0)", "Mab3(3,0)"]),
                F3: (13, ["Mab2(3,0)", "Mab2(4,0)"])}
    for f, (count, non_max) in expected.items():
        descs = idl.mab_enumerate(5, f)
        assert len(descs) == count
        assert [s.tag_str() for s in descs if not s.maximal] == non_max


def test_ideal_and_group_maximality_agree_d5_q2():
    for s in idl.mab_enumerate(5, F2):
        assert idl.is_abelian_normal_subgroup_set(s)
        assert s.maximal == idl.group_maximality_oracle(s)


def test_maximality_examples():
    assert idl.maximality_oracle(idl.partition(2, 1, 5, F2))
    assert not idl.maximality_oracle(idl.partition(3, 1, 5, F2))
    with pytest.raises(TooLarge):
        idl.maximality_oracle(idl.partition(5, 1, 5, F2), bound=4)
    with pytest.raises(ValueError):
        idl.maximality_oracle(idl.gamma_ideal(1, 5, F2))


def test_mab3_restricted_to_characteristic_two():
    with pytest.raises(WrongCharacteristic):
        idl.mab3(2, 1, 5, F3)
    for f in (F2, F4):
        for i in (2, 3):
            for c in range(f.q):
                s = idl.mab3(i, c, 5, f)
                assert idl.is_abelian(s) and idl.is_lie_ideal(s)


def test_uncoupled_exceptional_shape_is_not_abelian():
    # free lines a e_{i+1,1} and b e_{d,i}: [e_{i,1}, e_{d,i}] = -e_{d,1} survives
    d, i = 5, 2
    gens = [nt.unit(d, F2, *ij) for ij in idl.partition_positions(i + 2, i - 1, d)]
    gens += [nt.unit(d, F2, i + 1, 1), nt.unit(d, F2, d, i), nt.unit(d, F2, i, 1) + nt.unit(d, F2, d, i + 1)]
    assert not idl.is_abelian(idl.custom(gens, d, F2))


def test_coupled_shape_needs_characteristic_two():
    # the same coupled construction over GF(3) is abelian but not an ideal
    d, i, c = 5, 2, 1
    gens = [nt.unit(d, F3, *ij) for ij in idl.partition_positions(i + 2, i - 1, d)]
    gens += [nt.unit(d, F3, i + 1, 1) + nt.unit(d, F3, d, i, c), nt.unit(d, F3, i, 1) + nt.unit(d, F3, d, i + 1, c)]
    s = idl.custom(gens, d, F3)
    assert idl.is_abelian(s) and not idl.is_lie_ideal(s)


def test_lemma1():
    assert idl.lemma1_suite(idl.partition(3, 2, 5, F3)).ok
    for c in range(1, 3):
        for m in range(2, 5):
            assert idl.lemma1_suite(idl.mab2(m, c, 5, F3)).ok
    assert idl.lemma1_suite(idl.mab2(3, 1, 6, F4), samples=300, seed=2).ok
    bad = idl.custom(idl.partition(4, 3, 5, F3).basis + [nt.unit(5, F3, 2, 1)], 5, F3)
    assert not idl.lemma1_suite(bad).ok


@pytest.mark.parametrize("desc", [lambda: idl.partition(3, 2, 5, F2), lambda: idl.mab2(3, 1, 5, F3),
                                  lambda: idl.mab3(2, 3, 6, F4),
                                  lambda: idl.custom([nt.unit(5, F3, 5, 1, 2)], 5, F3)])
def test_text_round_trip(desc):
    s = desc()
    back = idl.parse_ideal(idl.format_ideal(s))
    assert back.space == s.space and back.tag == s.tag


def test_parse_rejects_mismatched_tag():
    text = idl.format_ideal(idl.partition(3, 2, 5, F2)).replace("Partition(3,2)", "Partition(4,3)")
    with pytest.raises(ParseError):
        idl.parse_ideal(text)
    with pytest.raises(ParseError):
        idl.parse_ideal("tag=Bogus d=5\np=2 k=1\n")


def test_square_partition_is_ideal_but_not_abelian():
    s = idl.partition(3, 3, 5, F3)
    assert idl.is_lie_ideal(s) and idl.is_ring_closed(s) and not idl.is_abelian(s)
