"""Density estimators and exact closure densities for integer-set specs.

Empirical estimates report liminf/limsup proxies over geometrically spaced
checkpoints in the tail half of the horizon; sets with a periodic normal
form additionally carry the exact rational value. "No verdict" outcomes are
first-class and never coerced to a number.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .intsets import (
    Bitmask,
    Intersection,
    Union,
    counts_at,
    periodic_form,
    pnf_or_none,
)
from ._util import fmt_real, frac_str

DEFAULT_TOL = 1e-3
_N_CHECKPOINTS = 32


class InvalidWeightError(ValueError):
    """A weight sequence produced a non-positive value."""


class DisjointnessError(ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__("sets are not disjoint: %d belongs to both" % witness)


@dataclass(frozen=True)
class DensityEstimate:
    lower: float
    upper: float
    horizon: int
    converged: bool
    exact: Optional[Fraction] = None
    window: Optional[int] = None

    def to_json(self):
        out = {
            "lower": fmt_real(self.lower),
            "upper": fmt_real(self.upper),
            "horizon": self.horizon,
            "converged": self.converged,
            "exact": frac_str(self.exact) if self.exact is not None else None,
        }
        if self.window is not None:
            out["window"] = self.window
        return out


def tail_checkpoints(horizon):
    """Geometrically spaced integers covering [horizon/2, horizon].

    The tail half is wide enough (one full factor of two) to catch the
    extremes of power-of-two block oscillators while keeping O(log) storage.
    """
    if horizon < 4:
        return [max(1, horizon)]
    half = horizon / 2.0
    pts = {int(round(half * 2.0 ** (i / _N_CHECKPOINTS))) for i in range(_N_CHECKPOINTS + 1)}
    pts.add(horizon)
    return sorted(p for p in pts if 1 <= p <= horizon)


# ---------------------------------------------------------------------------
# weight sequences

@dataclass(frozen=True)
class ConstantWeights:
    name = "constant"

    def values(self, n):
        return np.ones(n)


@dataclass(frozen=True)
class LogWeights:
    """c_k = 1/(k+1); the induced ratio is the logarithmic density."""

    name = "log"

    def values(self, n):
        return 1.0 / (np.arange(n, dtype=float) + 1.0)


@dataclass(frozen=True)
class CustomWeights:
    fn: object
    name: str = "custom"

    def values(self, n):
        vals = np.array([float(self.fn(k)) for k in range(n)])
        bad = np.nonzero(vals <= 0.0)[0]
        if len(bad):
            raise InvalidWeightError("weight at k=%d is %g" % (bad[0], vals[bad[0]]))
        return vals


def _exact_density(spec, weights=None):
    """Exact limiting ratio where the residue structure decides it.

    Constant and logarithmic weights are slowly varying, so periodic sets
    keep their residue density; arbitrary custom weights can skew it.
    """
    if weights is not None and isinstance(weights, CustomWeights):
        return None
    form = pnf_or_none(spec)
    return form.density if form is not None else None


def estimate_asymptotic_density(spec, horizon, tol=DEFAULT_TOL):
    cps = tail_checkpoints(horizon)
    counts = counts_at(spec, cps)
    ratios = [c / n for c, n in zip(counts, cps)]
    lo, hi = min(ratios), max(ratios)
    return DensityEstimate(lo, hi, horizon, hi - lo <= tol, _exact_density(spec))


def estimate_weighted_density(spec, weights, horizon, tol=DEFAULT_TOL):
    w = weights.values(horizon)
    member = spec.mask(0, horizon)
    cw = np.cumsum(w)
    cm = np.cumsum(np.where(member, w, 0.0))
    ratios = [cm[n - 1] / cw[n - 1] for n in tail_checkpoints(horizon)]
    lo, hi = float(min(ratios)), float(max(ratios))
    return DensityEstimate(lo, hi, horizon, hi - lo <= tol, _exact_density(spec, weights))


def estimate_uniform_density(spec, horizon, tol=DEFAULT_TOL):
    """Extremes of the hit ratio over every window [s, s+h), h = floor(sqrt(horizon))."""
    h = max(1, int(horizon**0.5))
    member = spec.mask(0, horizon)
    cum = np.zeros(horizon + 1, dtype=np.int64)
    cum[1:] = np.cumsum(member, dtype=np.int64)
    wins = cum[h:] - cum[:-h]
    lo = int(wins.min()) / h
    hi = int(wins.max()) / h
    return DensityEstimate(lo, hi, horizon, hi - lo <= tol, _exact_density(spec), window=h)


# ---------------------------------------------------------------------------
# closure (Buck) density

def buck_density(spec, max_period=None):
    """Exact measure of the set's closure under the residue topology.

    Computed combinatorially: the covered proportion of residues mod the
    combined period. Finite adjustments are invisible to the closure.
    """
    kwargs = {} if max_period is None else {"max_period": max_period}
    return periodic_form(spec, **kwargs).density


@dataclass(frozen=True)
class BuckReport:
    measurable: Optional[bool]
    value: Optional[Fraction]
    lower: float
    upper: float
    horizon: int

    def to_json(self):
        return {
            "measurable": self.measurable,
            "value": frac_str(self.value) if self.value is not None else None,
            "lower": fmt_real(self.lower),
            "upper": fmt_real(self.upper),
            "horizon": self.horizon,
        }


def is_buck_measurable(spec, horizon=1 << 20):
    """Verdict plus exact value when the residue form decides it.

    Sets with a periodic form always satisfy outer(S) + outer(complement) = 1,
    so the verdict is affirmative with the residue density. For block unions
    and bitmasks only at-horizon counting bounds are reported, no verdict.
    """
    form = pnf_or_none(spec)
    if form is not None:
        est = estimate_asymptotic_density(spec, horizon)
        return BuckReport(True, form.density, est.lower, est.upper, horizon)
    if isinstance(spec, Bitmask):
        horizon = min(horizon, spec.n)
    est = estimate_asymptotic_density(spec, horizon)
    return BuckReport(None, None, est.lower, est.upper, horizon)


# ---------------------------------------------------------------------------
# additivity witness

@dataclass(frozen=True)
class AdditivityReport:
    horizon: int
    tol: float
    left: DensityEstimate
    right: DensityEstimate
    union: DensityEstimate
    gap: float
    exact_gap: Optional[Fraction]
    additive: bool

    def to_json(self):
        return {
            "horizon": self.horizon,
            "tol": fmt_real(self.tol),
            "left": self.left.to_json(),
            "right": self.right.to_json(),
            "union": self.union.to_json(),
            "gap": fmt_real(self.gap),
            "exact_gap": frac_str(self.exact_gap) if self.exact_gap is not None else None,
            "additive": self.additive,
        }


def _find_common_element(a, b, horizon):
    inter = Intersection((a, b))
    form = pnf_or_none(inter)
    if form is not None:
        return form.min_element()
    chunk = 1 << 16
    for lo in range(0, horizon, chunk):
        hi = min(lo + chunk, horizon)
        both = np.nonzero(inter.mask(lo, hi))[0]
        if len(both):
            return lo + int(both[0])
    return None


def additivity_witness(a, b, horizon, tol=DEFAULT_TOL):
    """Check that densities add across a disjoint union.

    Precondition: a and b are disjoint (verified symbolically where possible,
    otherwise up to the horizon); a witness element is named on failure.
    """
    common = _find_common_element(a, b, horizon)
    if common is not None:
        raise DisjointnessError(common)
    union = Union((a, b))
    ea = estimate_asymptotic_density(a, horizon, tol)
    eb = estimate_asymptotic_density(b, horizon, tol)
    eu = estimate_asymptotic_density(union, horizon, tol)
    ca, cb, cu = (counts_at(s, [horizon])[0] for s in (a, b, union))
    gap = abs(cu - ca - cb) / horizon
    exact_gap = None
    if all(e.exact is not None for e in (ea, eb, eu)):
        exact_gap = abs(eu.exact - ea.exact - eb.exact)
    return AdditivityReport(horizon, tol, ea, eb, eu, gap, exact_gap, gap <= tol)
