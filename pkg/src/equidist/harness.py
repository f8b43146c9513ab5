"""Empirical equidistribution checks for generated sequences.

All statistics run over an index battery: a rule n -> k_n (n = 1..N) choosing
which generator indices form the prefix, so the same generator can be probed
along shifted or hand-picked index paths without re-deriving anything.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .intsets import pnf_or_none


class IndexSequence:
    """Rule n -> k_n for n = 1..N; values are non-negative and distinct."""

    def k(self, n):
        raise NotImplementedError

    def indices(self, n_max):
        return np.array([self.k(n) for n in range(1, n_max + 1)], dtype=np.int64)

    def describe(self):
        return type(self).__name__


class Identity(IndexSequence):
    def k(self, n):
        return n

    def indices(self, n_max):
        return np.arange(1, n_max + 1, dtype=np.int64)


class Shifted(IndexSequence):
    def __init__(self, shift):
        shift = int(shift)
        if shift < 0:
            raise ValueError("shift must be >= 0")
        self.shift = shift

    def k(self, n):
        return n + self.shift

    def indices(self, n_max):
        return np.arange(1, n_max + 1, dtype=np.int64) + self.shift

    def describe(self):
        return "Shifted(%d)" % self.shift


class ExplicitList(IndexSequence):
    def __init__(self, ks):
        ks = [int(k) for k in ks]
        if any(k < 0 for k in ks):
            raise ValueError("indices must be >= 0")
        self.ks = ks

    def k(self, n):
        return self.ks[n - 1]

    def indices(self, n_max):
        if n_max > len(self.ks):
            raise ValueError("index list too short")
        return np.array(self.ks[:n_max], dtype=np.int64)


def _points(gen, idx, n):
    if n < 1:
        raise ValueError("need at least one point")
    xs = gen.values(idx.indices(n))
    if np.any(xs < 0.0) or np.any(xs > 1.0):
        raise ValueError("generator produced points outside [0,1]")
    return xs


def weyl_sum(gen, idx, h, n):
    """Normalized trigonometric average at frequency h (complex)."""
    if h < 1:
        raise ValueError("frequency must be >= 1")
    xs = _points(gen, idx, n)
    ang = 2.0 * math.pi * h * xs
    return complex(math.fsum(np.cos(ang)) / n, math.fsum(np.sin(ang)) / n)


def weyl_magnitude(gen, idx, h, n):
    return abs(weyl_sum(gen, idx, h, n))


def star_discrepancy(points):
    """Largest gap between the empirical prefix fractions and interval
    length, maximized exactly over anchored intervals [0, t)."""
    xs = np.sort(np.asarray(points, dtype=np.float64))
    n = xs.size
    if n == 0:
        raise ValueError("need at least one point")
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - xs), np.max(xs - (i - 1) / n)))


def ks_distance(points, measure, eps=1e-12):
    """Sup gap between the empirical distribution and the measure's cdf."""
    xs = np.sort(np.asarray(points, dtype=np.float64))
    n = xs.size
    if n == 0:
        raise ValueError("need at least one point")
    fs = np.array([measure.cdf(Fraction(float(x)), eps) for x in xs])
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - fs), np.max(fs - (i - 1) / n)))


@dataclass(frozen=True)
class IntervalCheck:
    a: float
    b: float
    frequency: float
    target: float
    gap: float
    ok: bool

    def to_json(self):
        return {
            "a": self.a,
            "b": self.b,
            "frequency": self.frequency,
            "target": self.target,
            "gap": self.gap,
            "ok": self.ok,
        }


def interval_check(gen, idx, a, b, n, target=None, tol=1e-2):
    """Frequency of hits in [a,b) against the target share; the interval
    closes at b when b = 1 so the right endpoint is never orphaned."""
    if not 0 <= a <= b <= 1:
        raise ValueError("interval must sit inside [0,1]")
    xs = _points(gen, idx, n)
    if b == 1.0:
        hits = np.count_nonzero((xs >= a) & (xs <= b))
    else:
        hits = np.count_nonzero((xs >= a) & (xs < b))
    freq = hits / n
    tgt = float(b - a) if target is None else float(target)
    gap = abs(freq - tgt)
    return IntervalCheck(float(a), float(b), freq, tgt, gap, gap <= tol)


@dataclass(frozen=True)
class SequenceDensity:
    n: int
    frequency: float
    target: float
    gap: float

    def to_json(self):
        return {
            "n": self.n,
            "frequency": self.frequency,
            "target": self.target,
            "gap": self.gap,
        }


def density_along_sequence(spec, idx, n, target=None):
    """How often the battery's indices land in the set, against the set's
    exact density when it has one."""
    ks = idx.indices(n)
    hits = int(np.count_nonzero(spec.mask(0, int(ks.max()) + 1)[ks]))
    freq = hits / n
    if target is None:
        form = pnf_or_none(spec)
        target = float(form.density) if form is not None else freq
    return SequenceDensity(n, freq, float(target), abs(freq - float(target)))


def function_average(gen, idx, fn, n):
    """Mean of fn along the sequence prefix (compensated summation)."""
    xs = _points(gen, idx, n)
    return math.fsum(fn(float(x)) for x in xs) / n


@dataclass(frozen=True)
class DiscrepancyReport:
    n: int
    battery: str
    star: float
    weyl: dict
    ks: float
    intervals: tuple

    def to_json(self):
        return {
            "n": self.n,
            "battery": self.battery,
            "star_discrepancy": self.star,
            "weyl": {str(h): v for h, v in sorted(self.weyl.items())},
            "ks_distance": self.ks,
            "intervals": [c.to_json() for c in self.intervals],
        }


def discrepancy_report(gen, idx, n, h_max=4, intervals=(), measure=None, tol=1e-2):
    from .measures import UniformMeasure

    xs = _points(gen, idx, n)
    m = measure if measure is not None else UniformMeasure()
    weyl = {}
    for h in range(1, h_max + 1):
        ang = 2.0 * math.pi * h * xs
        weyl[h] = abs(complex(math.fsum(np.cos(ang)) / n, math.fsum(np.sin(ang)) / n))
    checks = tuple(
        interval_check(gen, idx, a, b, n, tol=tol) for (a, b) in intervals
    )
    return DiscrepancyReport(
        n=n,
        battery=idx.describe(),
        star=star_discrepancy(xs),
        weyl=weyl,
        ks=ks_distance(xs, m),
        intervals=checks,
    )


def curve_checkpoints(n, start=16):
    """Doubling prefix lengths up to n, always ending at n itself."""
    if n < 1:
        raise ValueError("need at least one point")
    out = []
    c = start
    while c < n:
        out.append(c)
        c *= 2
    out.append(n)
    return out


def ks_curve(gen, idx, n, measure, eps=1e-12, checkpoints=None):
    """KS distance at doubling prefixes, reusing one cdf pass per point."""
    if checkpoints is None:
        checkpoints = curve_checkpoints(n)
    xs = _points(gen, idx, n)
    fs = np.array([measure.cdf(Fraction(float(x)), eps) for x in xs])
    rows = []
    for m in checkpoints:
        order = np.argsort(xs[:m], kind="stable")
        f = fs[:m][order]
        i = np.arange(1, m + 1)
        rows.append((m, float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))))
    return rows


def star_curve(gen, idx, n, checkpoints=None):
    if checkpoints is None:
        checkpoints = curve_checkpoints(n)
    xs = _points(gen, idx, n)
    return [(m, star_discrepancy(xs[:m])) for m in checkpoints]
