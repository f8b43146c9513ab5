import random
from fractions import Fraction

import pytest

from equidist.decomposition import (
    InducedPointMap,
    NestedDecomposition,
    UnsupportedGeneratorError,
    UnsupportedSplitError,
    darboux_split,
    digit_reversal,
    preimage_of_cell,
    residue_decomposition,
    verify_decomposition,
)
from equidist.generators import Kronecker, RadicalInverse
from equidist.intsets import AP, Union, periodic_form
from equidist.measures import QadicCell


def reversal_oracle(q, n, j):
    # string-based digit reversal, independent of the arithmetic loop
    digits = []
    for _ in range(n):
        digits.append(j % q)
        j //= q
    out = 0
    for d in digits:
        out = out * q + d
    return out


def test_digit_reversal_against_string_oracle():
    for q in (2, 3, 5):
        for n in range(1, 7):
            for j in range(q**n):
                assert digit_reversal(q, n, j) == reversal_oracle(q, n, j)
    with pytest.raises(ValueError):
        digit_reversal(2, 3, 8)


def test_cells_are_residue_classes():
    d = residue_decomposition(2, 6)
    assert d.cell(3, 5) == AP(8, digit_reversal(2, 3, 5))
    assert d.cell_interval(3, 5) == QadicCell(2, 3, 5)
    with pytest.raises(ValueError):
        d.cell(7, 0)


def test_label_rows_are_permutations():
    d = residue_decomposition(3, 4)
    for n in range(1, 5):
        row = d.label_row(n)
        assert sorted(row) == list(range(3**n))


def test_verify_decomposition_passes():
    rep = verify_decomposition(residue_decomposition(2, 10), horizon=1 << 16)
    assert rep.passed
    assert len(rep.levels) == 10
    for lv in rep.levels:
        assert lv.partition_ok and lv.refinement_ok and lv.counts_ok

    rep3 = verify_decomposition(residue_decomposition(3, 6), horizon=3**9)
    assert rep3.passed


def test_verify_decomposition_horizon_guard():
    with pytest.raises(ValueError):
        verify_decomposition(residue_decomposition(2, 10), horizon=512)


def test_verify_decomposition_negative_control():
    def swapped(n, j):
        # exchange two sibling labels deep enough to break the nesting
        if n == 2 and j in (0, 1):
            return digit_reversal(2, n, 1 - j)
        return digit_reversal(2, n, j)

    broken = NestedDecomposition(2, 3, labeling=swapped)
    rep = verify_decomposition(broken, horizon=64)
    assert not rep.passed
    # partition still holds at every level; the refinement is what breaks
    assert all(lv.partition_ok for lv in rep.levels)
    assert not all(lv.refinement_ok for lv in rep.levels)


def test_verify_decomposition_catches_non_bijection():
    broken = NestedDecomposition(2, 2, labeling=lambda n, j: 0)
    rep = verify_decomposition(broken, horizon=64)
    assert not rep.passed
    assert not rep.levels[0].partition_ok


def test_preimage_is_exact_residue_class():
    gen = RadicalInverse(2)
    for n in range(0, 9):
        for j in (0, 1, (1 << n) - 1) if n else (0,):
            cell = QadicCell(2, n, j)
            pre = preimage_of_cell(gen, cell)
            if n == 0:
                assert pre == AP(1, 0)
            else:
                assert pre == AP(2**n, digit_reversal(2, n, j))
            lo, hi = cell.interval()
            for k in range(300):
                x = gen.exact(k)
                assert pre.contains(k) == (lo <= x < hi or (cell.is_last and x == hi))


def test_preimage_rejects_other_generators():
    with pytest.raises(UnsupportedGeneratorError):
        preimage_of_cell(Kronecker("sqrt2"), QadicCell(2, 1, 0))
    with pytest.raises(UnsupportedGeneratorError):
        preimage_of_cell(RadicalInverse(3), QadicCell(2, 1, 0))


def test_induced_map_reproduces_radical_inverse():
    d = residue_decomposition(2, 8)
    m = InducedPointMap(d)
    gen = RadicalInverse(2)
    for k in range(256):
        assert m.exact(k) == gen.exact(k)
        assert m(k) == gen(k)


def test_induced_map_base3():
    d = residue_decomposition(3, 5)
    m = InducedPointMap(d)
    gen = RadicalInverse(3)
    for k in range(3**5):
        assert m.exact(k) == gen.exact(k)


def test_induced_map_rejects_non_bijective_labeling():
    with pytest.raises(ValueError):
        InducedPointMap(NestedDecomposition(2, 2, labeling=lambda n, j: 0))


def test_darboux_split_halves_a_class():
    split = darboux_split(AP(3, 1), Fraction(1, 2))
    assert split == AP(6, 1)
    assert periodic_form(split).density == Fraction(1, 6)
    # the kept half really is a subset
    for k in range(200):
        if split.contains(k):
            assert k % 3 == 1


def test_darboux_split_general_ratio():
    split = darboux_split(AP(1, 0), Fraction(2, 5))
    assert split == Union((AP(5, 0), AP(5, 1)))
    assert periodic_form(split).density == Fraction(2, 5)


def test_darboux_split_of_union():
    spec = Union((AP(4, 0), AP(4, 1)))
    split = darboux_split(spec, Fraction(1, 2))
    assert periodic_form(split).density == Fraction(1, 4)
    for k in range(400):
        if split.contains(k):
            assert spec.contains(k)


def test_darboux_split_rejections():
    with pytest.raises(UnsupportedSplitError):
        darboux_split(AP(2, 0), 0.5)
    with pytest.raises(UnsupportedSplitError):
        darboux_split(AP(2, 0), Fraction(3, 2))
    with pytest.raises(UnsupportedSplitError):
        darboux_split(Union((AP(4, 1), AP(6, 1))), Fraction(1, 2))  # parts overlap
