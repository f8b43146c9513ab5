"""Self-similar probability measures on [0,1] refined along q-adic cells.

Each measure splits every level-n cell into its q children with fixed
proportions, so a cell's mass is the product of the split ratios along its
digit path. The distribution function and its generalized inverse are
computed by exact digit descent: positions are carried as Fractions, so
queries at cell boundaries terminate with exact values instead of drifting.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations_with_replacement

import numpy as np


class IncompatibleCellError(ValueError):
    """Cell base does not match the measure's refinement base."""


@dataclass(frozen=True)
class QadicCell:
    """Half-open cell [j/q^n, (j+1)/q^n); the last cell of a level is closed."""

    base: int
    level: int
    index: int

    def __post_init__(self):
        if self.base < 2 or self.level < 0:
            raise ValueError("need base >= 2 and level >= 0")
        if not 0 <= self.index < self.base**self.level:
            raise ValueError("cell index out of range")

    def interval(self):
        w = self.base**self.level
        return Fraction(self.index, w), Fraction(self.index + 1, w)

    @property
    def is_last(self):
        return self.index == self.base**self.level - 1

    def contains(self, x):
        lo, hi = self.interval()
        if self.is_last:
            return lo <= x <= hi
        return lo <= x < hi

    def children(self):
        return [
            QadicCell(self.base, self.level + 1, self.base * self.index + d)
            for d in range(self.base)
        ]

    def parent(self):
        if self.level == 0:
            raise ValueError("root cell has no parent")
        return QadicCell(self.base, self.level - 1, self.index // self.base)

    def digits(self):
        """Digit path from the root, most significant first."""
        out = []
        j = self.index
        for _ in range(self.level):
            out.append(j % self.base)
            j //= self.base
        return out[::-1]


_MAX_EXACT_LEVELS = 80
_MAX_LEVELS = 200_000


def _descend(acc, mass, ratios, u, q):
    """Least child whose cumulative mass reaches u: (digit, cdf at its left
    edge, its mass). Falls back to the last child when rounding leaves u
    above every partial sum."""
    cum = acc
    child = mass
    for i in range(q):
        child = mass * ratios[i]
        if cum + child >= u:
            return i, cum, child
        cum += child
    return q - 1, cum - child, child


class Measure:
    base = None  # required cell base; None accepts any

    def split_ratios(self):
        """Child mass proportions as floats."""
        raise NotImplementedError

    def split_ratios_exact(self):
        """Exact Fractions summing to one (stochastic completion of the floats)."""
        raise NotImplementedError

    # -- cell masses ------------------------------------------------------

    def _check_cell(self, cell):
        if self.base is not None and cell.base != self.base:
            raise IncompatibleCellError(
                "%s refines base-%d cells, got base %d"
                % (type(self).__name__, self.base, cell.base)
            )

    def cell_mass(self, cell):
        self._check_cell(cell)
        ratios = self.split_ratios()
        mass = 1.0
        for d in cell.digits():
            mass *= ratios[d]
        return mass

    # -- distribution function and inverse --------------------------------

    def cdf(self, x, eps=1e-12):
        if eps <= 0:
            raise ValueError("eps must be positive")
        x = Fraction(x)
        if x <= 0:
            return 0.0
        if x >= 1:
            return 1.0
        q = len(self.split_ratios())
        ratios = self.split_ratios()
        cums = [0.0]
        for r in ratios:
            cums.append(cums[-1] + r)
        acc, mass = 0.0, 1.0
        for _ in range(_MAX_LEVELS):
            x *= q
            d = x.numerator // x.denominator
            x -= d
            acc += mass * cums[d]
            mass *= ratios[d]
            if x == 0:
                return acc
            if mass <= eps:
                return acc + mass * float(x)
        return acc

    def _ratio_scaled_ints(self):
        """Exact ratios as integers over a common power-of-two denominator,
        or None when some denominator is not a power of two."""
        ratios = self.split_ratios_exact()
        s = 1
        for r in ratios:
            d = r.denominator
            if d & (d - 1):
                return None
            s = max(s, d.bit_length() - 1)
        return s, [int(r.numerator << s) // r.denominator for r in ratios]

    def quantile(self, u, eps=1e-12):
        """Left-most x with |cdf(x) - u| <= eps; non-decreasing in u.

        Walks down the cell tree keeping exact arithmetic while cheap, so a
        u that is exactly a cell-boundary mass comes back as the boundary
        point itself (the support of every variant touches the right end of
        each positive-mass cell). Split ratios derived from floats have
        power-of-two denominators, letting the exact phase run on plain
        integers; a rational-ratio fallback covers anything else.
        """
        if eps <= 0:
            raise ValueError("eps must be positive")
        u = Fraction(u)
        if u <= 0:
            return 0.0
        if u >= 1:
            return 1.0
        scaled = self._ratio_scaled_ints()
        if scaled is None:
            return self._quantile_fraction_walk(u, eps)
        s, ps = scaled
        q = len(ps)
        un, ud = u.numerator, u.denominator
        eps_f = Fraction(eps)
        en, ed = eps_f.numerator, eps_f.denominator
        # state at level L: cdf-left = a/2^(s L), mass = m/2^(s L), U = un<<(s L)
        a, m, big_u = 0, 1, un
        left_num, level = 0, 0
        for _ in range(_MAX_EXACT_LEVELS):
            a <<= s
            big_u <<= s
            level += 1
            cum = a
            child = m
            d = q - 1
            for i in range(q):
                child = m * ps[i]
                if (cum + child) * ud >= big_u:
                    d = i
                    break
                cum += child
            else:
                cum -= child
            if (cum + child) * ud == big_u and ps[d] > 0:
                return float(Fraction(left_num * q + d + 1, q**level))
            left_num = left_num * q + d
            a, m = cum, child
            if m * ed <= en << (s * level):
                return float(Fraction(left_num, q**level))
        # deep tail: exact shortcuts no longer fire, track mass as float
        width = Fraction(1, q**level)
        left = Fraction(left_num, q**level)
        ratios_f = self.split_ratios()
        uf = float(u)
        accf = float(Fraction(a, 1 << (s * level)))
        massf = float(Fraction(m, 1 << (s * level)))
        for _ in range(_MAX_LEVELS):
            d, accf, massf = _descend(accf, massf, ratios_f, uf, q)
            left += width / q * d
            width /= q
            if massf <= eps:
                return float(left)
        return float(left)

    def _quantile_fraction_walk(self, u, eps):
        ratios = self.split_ratios_exact()
        q = len(ratios)
        left, width = Fraction(0), Fraction(1)
        acc, mass = Fraction(0), Fraction(1)
        eps_f = Fraction(eps)
        for _ in range(_MAX_EXACT_LEVELS):
            d, cum, child = _descend(acc, mass, ratios, u, q)
            if cum + child == u and ratios[d] > 0:
                return float(left + width / q * (d + 1))
            left += width / q * d
            width /= q
            acc, mass = cum, child
            if mass <= eps_f:
                return float(left)
        ratios_f = self.split_ratios()
        uf, accf, massf = float(u), float(acc), float(mass)
        for _ in range(_MAX_LEVELS):
            d, accf, massf = _descend(accf, massf, ratios_f, uf, q)
            left += width / q * d
            width /= q
            if massf <= eps:
                return float(left)
        return float(left)

    def interval_mass(self, a, b, eps=1e-12):
        if b < a:
            raise ValueError("empty interval: b < a")
        return max(0.0, self.cdf(b, eps) - self.cdf(a, eps))

    def is_continuity_interval(self, a, b):
        """Closed intervals never carry boundary atoms: singletons are null."""
        if not (0 <= a <= b <= 1):
            raise ValueError("interval must sit inside [0,1]")
        return True


class UniformMeasure(Measure):
    base = None

    def split_ratios(self):
        return (0.5, 0.5)

    def split_ratios_exact(self):
        return (Fraction(1, 2), Fraction(1, 2))

    def cell_mass(self, cell):
        return 1.0 / cell.base**cell.level

    def cdf(self, x, eps=1e-12):
        return float(min(1, max(0, Fraction(x))))

    def quantile(self, u, eps=1e-12):
        return float(min(1, max(0, Fraction(u))))


class BinomialMeasure(Measure):
    """Splits mass r left / 1-r right; cell mass is r^(n-k) (1-r)^k where
    k counts the 1-digits of the cell index."""

    base = 2

    def __init__(self, r):
        r = float(r)
        if not 0.0 < r < 1.0:
            raise ValueError("binomial parameter must lie in (0,1)")
        self.r = r

    def split_ratios(self):
        return (self.r, 1.0 - self.r)

    def split_ratios_exact(self):
        fr = Fraction(self.r)
        return (fr, 1 - fr)

    def __repr__(self):
        return "BinomialMeasure(%r)" % self.r


class MultinomialMeasure(Measure):
    def __init__(self, q, ratios):
        q = int(q)
        ratios = tuple(float(r) for r in ratios)
        if q < 2 or len(ratios) != q:
            raise ValueError("need q >= 2 ratios")
        if any(not 0.0 < r < 1.0 for r in ratios):
            raise ValueError("each ratio must lie in (0,1)")
        if abs(sum(ratios) - 1.0) > 1e-12:
            raise ValueError("ratios must sum to 1 within 1e-12")
        self.q = q
        self.ratios = ratios
        self.base = q

    def split_ratios(self):
        return self.ratios

    def split_ratios_exact(self):
        head = [Fraction(r) for r in self.ratios[:-1]]
        return tuple(head + [1 - sum(head)])

    def __repr__(self):
        return "MultinomialMeasure(%d, %r)" % (self.q, self.ratios)


class CantorMeasure(Measure):
    """Equal mass on the outer thirds, none in the middle; the cdf is the
    devil's staircase and the support is the middle-thirds set."""

    base = 3

    def split_ratios(self):
        return (0.5, 0.0, 0.5)

    def split_ratios_exact(self):
        return (Fraction(1, 2), Fraction(0), Fraction(1, 2))


# ---------------------------------------------------------------------------
# level aggregates

def level_mass_sum(measure, n, enumerate_limit=1 << 21):
    """Sum of cell_mass over all level-n cells.

    Small levels are enumerated outright. Beyond the limit the cells are
    grouped by digit multiset (mass depends only on digit counts), each
    group weighted by its exact multinomial cardinality.
    """
    ratios = measure.split_ratios()
    q = len(ratios)
    if q**n <= enumerate_limit:
        masses = reduce(np.kron, [np.array(ratios)] * n) if n else np.ones(1)
        return float(np.sum(masses))
    terms = []
    for combo in combinations_with_replacement(range(q), n):
        counts = [0] * q
        for d in combo:
            counts[d] += 1
        mult = math.factorial(n)
        for c in counts:
            mult //= math.factorial(c)
        rep = 0
        for d in combo:
            rep = rep * q + d
        terms.append(mult * measure.cell_mass(QadicCell(q, n, rep)))
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# JSON

def measure_to_json(m):
    if isinstance(m, UniformMeasure):
        return {"uniform": {}}
    if isinstance(m, BinomialMeasure):
        return {"binomial": {"r": m.r}}
    if isinstance(m, MultinomialMeasure):
        return {"multinomial": {"q": m.q, "r": list(m.ratios)}}
    if isinstance(m, CantorMeasure):
        return {"cantor": {}}
    raise TypeError("not a measure: %r" % (m,))


def measure_from_json(obj):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError("measure node must be a single-key object")
    (key, val), = obj.items()
    if key == "uniform":
        return UniformMeasure()
    if key == "binomial":
        return BinomialMeasure(float(val["r"]))
    if key == "multinomial":
        return MultinomialMeasure(int(val["q"]), [float(r) for r in val["r"]])
    if key == "cantor":
        return CantorMeasure()
    raise ValueError("unknown measure %r" % key)
