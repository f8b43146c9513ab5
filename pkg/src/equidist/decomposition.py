"""Nested residue decompositions of the non-negative integers.

Level n splits the integers into the q^n residue classes mod q^n, labeled so
that class j at level n consists of k with k = sigma(n, j) (mod q^n), where
sigma reverses the n base-q digits of j. Under that labeling the class labels
track leading digits of the limit point: following a label path j, qj+d, ..
downward converges to the digit-reversal point of the class members.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .generators import RadicalInverse, SequenceGenerator
from .intsets import AP, Union, periodic_form
from .measures import QadicCell


class UnsupportedGeneratorError(TypeError):
    """Preimages are only resolvable for digit-reversal generators."""


class UnsupportedSplitError(ValueError):
    """Splits exist only for exact rational proportions of residue classes."""


def digit_reversal(q, n, j):
    """Value of j's n-digit base-q expansion read back to front."""
    if not 0 <= j < q**n:
        raise ValueError("label out of range")
    rev = 0
    for _ in range(n):
        j, d = divmod(j, q)
        rev = rev * q + d
    return rev


class NestedDecomposition:
    """Tower of residue partitions, one level per digit.

    A custom labeling (n, j) -> residue may be supplied; the default is
    digit reversal, which makes consecutive integers sweep the level-n
    cells in index order.
    """

    def __init__(self, q, depth, labeling=None):
        q = int(q)
        depth = int(depth)
        if q < 2:
            raise ValueError("base must be >= 2")
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.q = q
        self.depth = depth
        self.labeling = labeling if labeling is not None else self._reversal

    def _reversal(self, n, j):
        return digit_reversal(self.q, n, j)

    def label_row(self, n):
        """All level-n labels as an array indexed by cell."""
        return np.array([self.labeling(n, j) for j in range(self.q**n)], dtype=np.int64)

    def cell(self, n, j):
        """Level-n class j as an explicit residue class."""
        if not 1 <= n <= self.depth:
            raise ValueError("level out of range")
        return AP(self.q**n, int(self.labeling(n, j)))

    def cell_interval(self, n, j):
        """Geometric shadow of the class: the base-q cell with the same index."""
        return QadicCell(self.q, n, j)


def residue_decomposition(q, depth):
    return NestedDecomposition(q, depth)


def preimage_of_cell(gen, cell):
    """Index set pulled back from a digit cell through the generator.

    Only digit-reversal generators resolve cells to residue classes; the
    level-n cell starting at j/q^n pulls back to one class mod q^n.
    """
    if not isinstance(gen, RadicalInverse):
        raise UnsupportedGeneratorError(
            "cannot resolve cell preimages for %s" % type(gen).__name__
        )
    if gen.q != cell.base:
        raise UnsupportedGeneratorError(
            "generator base %d does not match cell base %d" % (gen.q, cell.base)
        )
    if cell.level == 0:
        return AP(1, 0)
    return AP(cell.base**cell.level, digit_reversal(cell.base, cell.level, cell.index))


def _as_ratio(ratio):
    if isinstance(ratio, float):
        raise UnsupportedSplitError(
            "split proportion must be an exact rational (Fraction or 'p/q'); "
            "floats and irrational proportions are not splittable"
        )
    if isinstance(ratio, tuple):
        ratio = Fraction(*ratio)
    else:
        ratio = Fraction(ratio)
    if not 0 < ratio < 1:
        raise UnsupportedSplitError("split proportion must lie strictly between 0 and 1")
    return ratio


def _ap_parts(spec):
    if isinstance(spec, AP):
        return [spec]
    if isinstance(spec, Union):
        parts = []
        for p in spec.parts:
            if not isinstance(p, AP):
                raise UnsupportedSplitError("can only split residue classes and their unions")
            parts.append(p)
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                g = math.gcd(parts[i].a, parts[j].a)
                if parts[i].b % g == parts[j].b % g:
                    raise UnsupportedSplitError(
                        "union parts overlap: %r and %r" % (parts[i], parts[j])
                    )
        return parts
    raise UnsupportedSplitError("can only split residue classes and their unions")


def darboux_split(spec, ratio):
    """Subset taking an exact rational share of each residue class.

    With ratio p/Q, class a*Z+b keeps its members at positions 0..p-1 of
    every run of Q consecutive ones: the union of a*Q*Z + (b + i*a).
    """
    ratio = _as_ratio(ratio)
    p, q_den = ratio.numerator, ratio.denominator
    out = []
    for part in _ap_parts(spec):
        for i in range(p):
            out.append(AP(part.a * q_den, part.b + i * part.a))
    return out[0] if len(out) == 1 else Union(tuple(out))


@dataclass(frozen=True)
class LevelCheck:
    level: int
    partition_ok: bool
    refinement_ok: bool
    counts_ok: bool
    max_count_gap: float

    def to_json(self):
        return {
            "level": self.level,
            "partition": self.partition_ok,
            "refinement": self.refinement_ok,
            "counts": self.counts_ok,
            "max_count_gap": self.max_count_gap,
        }


@dataclass(frozen=True)
class DecompositionReport:
    q: int
    depth: int
    horizon: int
    levels: tuple

    @property
    def passed(self):
        return all(
            lv.partition_ok and lv.refinement_ok and lv.counts_ok for lv in self.levels
        )

    def to_json(self):
        return {
            "q": self.q,
            "depth": self.depth,
            "horizon": self.horizon,
            "passed": self.passed,
            "levels": [lv.to_json() for lv in self.levels],
        }


def verify_decomposition(decomp, horizon=1 << 16):
    """Checks, level by level, that the labeled classes really tile.

    partition: the level-n labels are a permutation of the residues mod q^n.
    refinement: each level-(n+1) class sits inside its parent class, i.e.
        label(n+1, j) = label(n, j // q)  (mod q^n).
    counts: members below the horizon hit the exact density 1/q^n within
        the unavoidable 1/horizon edge slack, and the class density derived
        from its periodic normal form is exactly 1/q^n.
    """
    q, depth = decomp.q, decomp.depth
    if horizon < q**depth:
        raise ValueError("horizon too small to see the deepest level")
    levels = []
    prev_labels = None
    for n in range(1, depth + 1):
        m = q**n
        labels = decomp.label_row(n)
        partition_ok = bool(
            labels.min() >= 0 and labels.max() < m and np.unique(labels).size == m
        )
        refinement_ok = True
        if prev_labels is not None:
            parents = prev_labels[np.arange(m) // q]
            refinement_ok = bool(np.all(labels % (m // q) == parents))
        counts_ok = True
        max_gap = 0.0
        if partition_ok:
            for j in range(m):
                r = int(labels[j])
                count = (horizon - r + m - 1) // m if r < horizon else 0
                gap = abs(count * m - horizon)
                max_gap = max(max_gap, gap / (m * horizon))
                if gap > m:
                    counts_ok = False
                form = periodic_form(AP(m, r))
                if form.density != Fraction(1, m):
                    counts_ok = False
        levels.append(LevelCheck(n, partition_ok, refinement_ok, counts_ok, max_gap))
        prev_labels = labels
    return DecompositionReport(q, depth, horizon, tuple(levels))


class InducedPointMap(SequenceGenerator):
    """Point map read off a decomposition: k goes to j/q^depth where j is
    the index of the deepest cell whose class contains k. For the default
    labeling this reproduces digit reversal exactly on k < q^depth."""

    def __init__(self, decomp):
        self.decomp = decomp
        m = decomp.q**decomp.depth
        if m > 1 << 22:
            raise ValueError("decomposition too deep to tabulate")
        self._inverse = np.full(m, -1, dtype=np.int64)
        labels = decomp.label_row(decomp.depth)
        self._inverse[labels] = np.arange(m)
        if np.any(self._inverse < 0):
            raise ValueError("labeling is not a bijection at the deepest level")

    def exact(self, k):
        if k < 0:
            raise ValueError("sequence index must be >= 0")
        m = self.decomp.q**self.decomp.depth
        return Fraction(int(self._inverse[k % m]), m)

    def __call__(self, k):
        return float(self.exact(k))
