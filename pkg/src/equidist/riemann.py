"""Darboux envelopes, integrability verdicts, and envelope-chasing sequences.

Upper and lower envelope sums are taken over the binary cells of [0,1] at a
given level, with the infimum and supremum ranging over the sample domain
only: restricting the domain can change the verdict (the dyadic indicator is
nowhere integrable against rational sampling but trivially integrable when
samples are confined to the dyadics).

A verdict is three-valued. Envelope gaps that stall at a fixed positive
value certify non-integrability; gaps that fall below tolerance certify the
integral; anything else is a no-verdict at the probed depth.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

from .generators import FactorialSchedule, Interleaved, SequenceGenerator


class ConstructionError(ValueError):
    """An envelope-chasing sample could not be placed."""


# ---------------------------------------------------------------------------
# sample domains

def simplest_between(lo, hi):
    """Least-denominator fraction strictly inside (lo, hi), 0 <= lo < hi."""
    lo, hi = Fraction(lo), Fraction(hi)
    if not 0 <= lo < hi:
        raise ValueError("need 0 <= lo < hi")

    def rec(a, b, c, d):
        fl = a // b
        a -= fl * b
        c -= fl * d
        if c > d:
            return (fl + 1, 1)
        if a == 0:
            q = d // c + 1
            return (fl * q + 1, q)
        p, q = rec(d, c, b, a)
        return (fl * p + q, p)

    p, q = rec(lo.numerator, lo.denominator, hi.numerator, hi.denominator)
    return Fraction(p, q)


def _is_pow2(n):
    return n & (n - 1) == 0


def dyadic_between(lo, hi):
    """Dyadic a/2^m with the least level strictly inside (lo, hi)."""
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo < hi:
        raise ValueError("empty interval")
    m = 0
    while True:
        w = 1 << m
        a = lo.numerator * w // lo.denominator + 1
        if Fraction(a, w) < hi:
            return Fraction(a, w)
        m += 1


def non_dyadic_between(lo, hi):
    """Least-denominator rational in (lo, hi) whose reduced denominator is
    not a power of two."""
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo < hi:
        raise ValueError("empty interval")
    x = simplest_between(lo, hi)
    if not _is_pow2(x.denominator):
        return x
    # denominators below the simplest one have no point in the interval at
    # all, and its own other multiples reduce to powers of two as well
    q = x.denominator + 1
    while True:
        if not _is_pow2(q):
            a = lo.numerator * q // lo.denominator + 1
            while Fraction(a, q) < hi:
                y = Fraction(a, q)
                if not _is_pow2(y.denominator):
                    return y
                a += 1
        q += 1


class SampleDomain:
    name = "abstract"

    def contains(self, x):
        raise NotImplementedError

    def pick(self, lo, hi):
        """Deterministic domain point strictly inside (lo, hi)."""
        raise NotImplementedError


class FullInterval(SampleDomain):
    name = "full"

    def contains(self, x):
        return 0 <= x <= 1

    def pick(self, lo, hi):
        lo, hi = Fraction(lo), Fraction(hi)
        if not lo < hi:
            raise ConstructionError("empty picking window")
        return (lo + hi) / 2


class DyadicRationals(SampleDomain):
    name = "dyadic"

    def contains(self, x):
        x = Fraction(x)
        return 0 <= x <= 1 and _is_pow2(x.denominator)

    def pick(self, lo, hi):
        return dyadic_between(lo, hi)


class Rationals(SampleDomain):
    name = "rational"

    def contains(self, x):
        return 0 <= Fraction(x) <= 1

    def pick(self, lo, hi):
        return simplest_between(lo, hi)


_DOMAINS = {"full": FullInterval, "dyadic": DyadicRationals, "rational": Rationals}


def domain_from_name(name):
    try:
        return _DOMAINS[name]()
    except KeyError:
        raise ValueError("unknown domain %r" % name) from None


# ---------------------------------------------------------------------------
# function variants

class RiemannFunction:
    """Bounded function on [0,1] with exact cell envelopes.

    Envelopes are taken relative to a sample domain. `envelope_sums` returns
    the level-n lower and upper sums; subclasses provide closed forms, so
    deep levels cost nothing.
    """

    exact_envelopes = True

    def value(self, x):
        raise NotImplementedError

    def cell_envelopes(self, domain, lo, hi):
        """(inf, sup) of the function over domain points in [lo, hi)."""
        raise NotImplementedError

    def envelope_sums(self, domain, level):
        """(lower sum, upper sum) over the 2^level binary cells."""
        raise NotImplementedError

    def pick_near_sup(self, domain, lo, hi, slack):
        raise NotImplementedError

    def pick_near_inf(self, domain, lo, hi, slack):
        raise NotImplementedError


class ConstantFn(RiemannFunction):
    def __init__(self, c):
        self.c = Fraction(c)

    def value(self, x):
        return self.c

    def cell_envelopes(self, domain, lo, hi):
        return self.c, self.c

    def envelope_sums(self, domain, level):
        return self.c, self.c

    def pick_near_sup(self, domain, lo, hi, slack):
        return domain.pick(lo, hi)

    pick_near_inf = pick_near_sup


class Affine(RiemannFunction):
    def __init__(self, slope=1, intercept=0):
        self.slope = Fraction(slope)
        self.intercept = Fraction(intercept)

    def value(self, x):
        return self.slope * Fraction(x) + self.intercept

    def cell_envelopes(self, domain, lo, hi):
        a, b = self.value(lo), self.value(hi)
        return min(a, b), max(a, b)

    def envelope_sums(self, domain, level):
        mid = self.slope / 2 + self.intercept
        half_osc = abs(self.slope) * Fraction(1, 2 ** (level + 1))
        return mid - half_osc, mid + half_osc

    def _edge_window(self, lo, hi, slack, at_hi):
        width = hi - lo
        if self.slope == 0:
            return lo, hi
        d = min(width / 16, Fraction(slack) / (2 * abs(self.slope)))
        return (hi - d, hi) if at_hi else (lo, lo + d)

    def pick_near_sup(self, domain, lo, hi, slack):
        a, b = self._edge_window(lo, hi, slack, self.slope >= 0)
        return domain.pick(a, b)

    def pick_near_inf(self, domain, lo, hi, slack):
        a, b = self._edge_window(lo, hi, slack, self.slope < 0)
        return domain.pick(a, b)


class StepFunction(RiemannFunction):
    """Right-continuous step function: constant on [b_i, b_{i+1}), with the
    final piece closed at 1."""

    def __init__(self, breakpoints, values):
        breaks = [Fraction(b) for b in breakpoints]
        vals = [Fraction(v) for v in values]
        if len(vals) != len(breaks) + 1:
            raise ValueError("need one more value than breakpoints")
        if any(not 0 < b < 1 for b in breaks):
            raise ValueError("breakpoints must lie strictly inside (0,1)")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise ValueError("breakpoints must increase strictly")
        self.breaks = breaks
        self.vals = vals

    def value(self, x):
        return self.vals[bisect_right(self.breaks, Fraction(x))]

    def _edges(self):
        return [Fraction(0)] + self.breaks + [Fraction(1)]

    def _overlapping(self, lo, hi):
        """Indices of pieces meeting [lo, hi); hi = 1 also sees the last
        (closed) piece, which the half-open test already includes."""
        edges = self._edges()
        out = []
        for i, v in enumerate(self.vals):
            if edges[i] < hi and edges[i + 1] > lo:
                out.append(i)
        return out

    def cell_envelopes(self, domain, lo, hi):
        vs = [self.vals[i] for i in self._overlapping(lo, hi)]
        return min(vs), max(vs)

    def integral(self):
        edges = self._edges()
        return sum(v * (edges[i + 1] - edges[i]) for i, v in enumerate(self.vals))

    def envelope_sums(self, domain, level):
        w = Fraction(1, 2**level)
        base = self.integral()
        cells = sorted(
            {b.numerator * 2**level // b.denominator for b in self.breaks
             if (b.numerator * 2**level) % b.denominator != 0}
        )
        lower, upper = base, base
        for j in cells:
            lo, hi = j * w, (j + 1) * w
            edges = self._edges()
            piece = Fraction(0)
            for i in self._overlapping(lo, hi):
                piece += self.vals[i] * (min(edges[i + 1], hi) - max(edges[i], lo))
            mn, mx = self.cell_envelopes(domain, lo, hi)
            upper += mx * w - piece
            lower += mn * w - piece
        return lower, upper

    def _pick_at(self, domain, lo, hi, target):
        edges = self._edges()
        for i in self._overlapping(lo, hi):
            if self.vals[i] == target:
                return domain.pick(max(edges[i], lo), min(edges[i + 1], hi))
        raise ConstructionError("no piece attains the envelope")

    def pick_near_sup(self, domain, lo, hi, slack):
        return self._pick_at(domain, lo, hi, self.cell_envelopes(domain, lo, hi)[1])

    def pick_near_inf(self, domain, lo, hi, slack):
        return self._pick_at(domain, lo, hi, self.cell_envelopes(domain, lo, hi)[0])


class IndicatorOfDyadics(RiemannFunction):
    """One on the dyadic rationals, zero elsewhere. Against a dense rational
    or full domain both envelopes are constant (0 below, 1 above), so the
    envelope gap is exactly one at every level."""

    def value(self, x):
        return Fraction(1) if _is_pow2(Fraction(x).denominator) else Fraction(0)

    def _trivial(self, domain):
        return isinstance(domain, DyadicRationals)

    def cell_envelopes(self, domain, lo, hi):
        if self._trivial(domain):
            return Fraction(1), Fraction(1)
        return Fraction(0), Fraction(1)

    def envelope_sums(self, domain, level):
        if self._trivial(domain):
            return Fraction(1), Fraction(1)
        return Fraction(0), Fraction(1)

    def pick_near_sup(self, domain, lo, hi, slack):
        return dyadic_between(lo, hi)

    def pick_near_inf(self, domain, lo, hi, slack):
        if self._trivial(domain):
            return dyadic_between(lo, hi)
        return non_dyadic_between(lo, hi)


class IndicatorOfInterval(RiemannFunction):
    """One on [a, b), zero elsewhere; b = 1 closes the right end."""

    def __init__(self, a, b):
        a, b = Fraction(a), Fraction(b)
        if not 0 <= a < b <= 1:
            raise ValueError("need 0 <= a < b <= 1")
        self.a = a
        self.b = b

    def _hit(self, x):
        if self.b == 1:
            return self.a <= x <= 1
        return self.a <= x < self.b

    def value(self, x):
        return Fraction(1) if self._hit(Fraction(x)) else Fraction(0)

    def cell_envelopes(self, domain, lo, hi):
        sup = Fraction(1) if (lo < self.b and hi > self.a) else Fraction(0)
        inf = Fraction(1) if (self.a <= lo and hi <= self.b) else Fraction(0)
        return inf, sup

    def envelope_sums(self, domain, level):
        w = 2**level
        j_lo = self.a.numerator * w // self.a.denominator
        j_hi = -((-self.b.numerator * w) // self.b.denominator) - 1  # ceil - 1
        upper = Fraction(max(0, j_hi - j_lo + 1), w)
        c_lo = -((-self.a.numerator * w) // self.a.denominator)
        c_hi = self.b.numerator * w // self.b.denominator
        lower = Fraction(max(0, c_hi - c_lo), w)
        return lower, upper

    def pick_near_sup(self, domain, lo, hi, slack):
        a, b = max(lo, self.a), min(hi, self.b)
        if not a < b:
            return domain.pick(lo, hi)  # sup is 0 here, anything works
        return domain.pick(a, b)

    def pick_near_inf(self, domain, lo, hi, slack):
        if self.a <= lo and hi <= self.b:
            return domain.pick(lo, hi)  # cell inside: inf is 1
        left = (lo, min(hi, self.a))
        right = (max(lo, self.b), hi)
        for (a, b) in (left, right):
            if a < b:
                return domain.pick(a, b)
        raise ConstructionError("no room outside the indicator interval")


class CustomFunction(RiemannFunction):
    """User-supplied evaluator with a declared bound on |f|.

    Envelopes are estimated from grid samples, so sums and verdicts carry an
    approximation flag and levels are capped.
    """

    exact_envelopes = False
    MAX_LEVEL = 16
    SAMPLES = 5

    def __init__(self, evaluator, bound, name="custom"):
        if bound is None:
            raise ValueError("a custom function needs a declared bound on |f|")
        self.evaluator = evaluator
        self.bound = float(bound)
        self.name = name

    def value(self, x):
        v = float(self.evaluator(float(x)))
        if abs(v) > self.bound:
            raise ValueError("evaluator exceeded its declared bound")
        return v

    def cell_envelopes(self, domain, lo, hi):
        lo, hi = Fraction(lo), Fraction(hi)
        step = (hi - lo) / (self.SAMPLES - 1)
        vals = [self.value(lo + i * step) for i in range(self.SAMPLES)]
        return min(vals), max(vals)

    def envelope_sums(self, domain, level):
        if level > self.MAX_LEVEL:
            level = self.MAX_LEVEL
        w = Fraction(1, 2**level)
        lows, highs = [], []
        for j in range(2**level):
            mn, mx = self.cell_envelopes(domain, j * w, (j + 1) * w)
            lows.append(mn)
            highs.append(mx)
        return math.fsum(lows) / 2**level, math.fsum(highs) / 2**level

    def pick_near_sup(self, domain, lo, hi, slack):
        lo, hi = Fraction(lo), Fraction(hi)
        step = (hi - lo) / (self.SAMPLES - 1)
        best = max(range(self.SAMPLES), key=lambda i: self.value(lo + i * step))
        x = lo + best * step
        return x if domain.contains(x) else domain.pick(lo, hi)

    def pick_near_inf(self, domain, lo, hi, slack):
        lo, hi = Fraction(lo), Fraction(hi)
        step = (hi - lo) / (self.SAMPLES - 1)
        best = min(range(self.SAMPLES), key=lambda i: self.value(lo + i * step))
        x = lo + best * step
        return x if domain.contains(x) else domain.pick(lo, hi)


# ---------------------------------------------------------------------------
# verdicts

@dataclass(frozen=True)
class IntegrabilityVerdict:
    status: str  # "integrable" | "not-integrable" | "no-verdict"
    value: float | None
    value_exact: Fraction | None
    level: int
    tol: float
    domain: str
    approximate: bool
    gap_history: tuple = field(default=())

    def to_json(self):
        out = {
            "status": self.status,
            "level": self.level,
            "tol": self.tol,
            "domain": self.domain,
            "approximate": self.approximate,
            "gaps": [float(g) for g in self.gap_history],
        }
        out["value"] = self.value
        if self.value_exact is not None:
            out["value_exact"] = "%d/%d" % (
                self.value_exact.numerator,
                self.value_exact.denominator,
            )
        return out


_STALL_RUN = 3


def integrability_verdict(f, domain, tol=1e-9, max_level=30):
    """Push envelope sums down the levels until they certify something.

    Gap below tol: integrable, value = envelope midpoint. The same positive
    gap three levels running: not integrable (the envelopes have stalled).
    Otherwise: no verdict at this depth.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    gaps = []
    exact = f.exact_envelopes
    for level in range(1, max_level + 1):
        lo, hi = f.envelope_sums(domain, level)
        gap = hi - lo
        gaps.append(gap)
        if gap <= tol:
            mid = (hi + lo) / 2
            return IntegrabilityVerdict(
                status="integrable",
                value=float(mid),
                value_exact=mid if exact and isinstance(mid, Fraction) else None,
                level=level,
                tol=tol,
                domain=domain.name,
                approximate=not exact,
                gap_history=tuple(gaps),
            )
        if (
            exact
            and len(gaps) >= _STALL_RUN
            and gaps[-_STALL_RUN:] == [gaps[-1]] * _STALL_RUN
        ):
            return IntegrabilityVerdict(
                status="not-integrable",
                value=None,
                value_exact=None,
                level=level,
                tol=tol,
                domain=domain.name,
                approximate=False,
                gap_history=tuple(gaps),
            )
    return IntegrabilityVerdict(
        status="no-verdict",
        value=None,
        value_exact=None,
        level=max_level,
        tol=tol,
        domain=domain.name,
        approximate=not exact,
        gap_history=tuple(gaps),
    )


# ---------------------------------------------------------------------------
# envelope-chasing sequences

class EnvelopeChaser(SequenceGenerator):
    """Walks the binary cells in digit-reversal order, dropping each sample
    within 1/(n+1) of the cell's envelope on the chosen side. Averages of
    f along the chased sequence track the corresponding envelope sums."""

    def __init__(self, f, domain, side):
        if side not in ("sup", "inf"):
            raise ValueError("side must be 'sup' or 'inf'")
        self.f = f
        self.domain = domain
        self.side = side

    def _cell(self, n):
        m = n + 1
        i = m.bit_length()
        rev = 0
        mm = m
        for _ in range(i):
            mm, d = divmod(mm, 2)
            rev = rev * 2 + d
        lo = Fraction(rev, 1 << i)
        return lo, lo + Fraction(1, 1 << i), Fraction(1, m)

    def exact(self, n):
        if n < 0:
            raise ValueError("sequence index must be >= 0")
        lo, hi, slack = self._cell(n)
        inf_c, sup_c = self.f.cell_envelopes(self.domain, lo, hi)
        if self.side == "sup":
            if self.domain.contains(lo) and self.f.value(lo) >= sup_c - slack:
                return lo
            x = self.f.pick_near_sup(self.domain, lo, hi, slack)
            ok = self.f.value(x) >= sup_c - slack
        else:
            if self.domain.contains(lo) and self.f.value(lo) <= inf_c + slack:
                return lo
            x = self.f.pick_near_inf(self.domain, lo, hi, slack)
            ok = self.f.value(x) <= inf_c + slack
        if not (lo <= x < hi and self.domain.contains(x)):
            raise ConstructionError("picked point left its cell or domain")
        if not ok:
            raise ConstructionError(
                "could not place a sample within slack of the %s envelope" % self.side
            )
        return Fraction(x)

    def __call__(self, n):
        return float(self.exact(n))


def adversarial_pair(f, domain, override=False, tol=1e-9, max_level=30):
    """Sup-chasing and inf-chasing sequences, interleaved in factorial
    blocks (sup side first), for a function that fails to integrate.

    The construction is refused for integrable functions unless overridden:
    there the two chasers average to the same number and expose nothing.
    """
    verdict = integrability_verdict(f, domain, tol=tol, max_level=max_level)
    if verdict.status == "integrable" and not override:
        raise ConstructionError(
            "function is integrable on this domain; pass override=True to force"
        )
    sup = EnvelopeChaser(f, domain, "sup")
    inf = EnvelopeChaser(f, domain, "inf")
    return sup, inf, Interleaved(sup, inf, FactorialSchedule())


def block_ends(count, schedule=None):
    sched = schedule if schedule is not None else FactorialSchedule()
    return [sched.block_end(t) for t in range(1, count + 1)]


def cesaro_trace(f, gen, checkpoints):
    """Running means of f along the sequence at the given prefix lengths.

    Values come from the generator's exact points when it has them; floats
    are always dyadic, which would poison domain-sensitive functions like
    the dyadic indicator.
    """
    checkpoints = sorted(set(int(c) for c in checkpoints))
    if not checkpoints or checkpoints[0] < 1:
        raise ValueError("checkpoints must be positive")
    n_max = checkpoints[-1]
    vals = []
    for k in range(n_max):
        x = gen.exact(k)
        if x is None:
            x = Fraction(gen(k))
        vals.append(float(f.value(x)))
    return [(m, math.fsum(vals[:m]) / m) for m in checkpoints]


# ---------------------------------------------------------------------------
# JSON

def function_to_json(f):
    if isinstance(f, ConstantFn):
        return {"constant": {"c": str(f.c)}}
    if isinstance(f, Affine):
        return {"affine": {"slope": str(f.slope), "intercept": str(f.intercept)}}
    if isinstance(f, StepFunction):
        return {
            "step": {
                "breakpoints": [str(b) for b in f.breaks],
                "values": [str(v) for v in f.vals],
            }
        }
    if isinstance(f, IndicatorOfDyadics):
        return {"dyadic-indicator": {}}
    if isinstance(f, IndicatorOfInterval):
        return {"interval-indicator": {"a": str(f.a), "b": str(f.b)}}
    raise TypeError("not a serializable function: %r" % (f,))


def function_from_json(obj):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError("function node must be a single-key object")
    (key, val), = obj.items()
    if key == "constant":
        return ConstantFn(Fraction(str(val["c"])))
    if key == "affine":
        return Affine(
            Fraction(str(val.get("slope", 1))), Fraction(str(val.get("intercept", 0)))
        )
    if key == "step":
        return StepFunction(
            [Fraction(str(b)) for b in val["breakpoints"]],
            [Fraction(str(v)) for v in val["values"]],
        )
    if key == "dyadic-indicator":
        return IndicatorOfDyadics()
    if key == "interval-indicator":
        return IndicatorOfInterval(Fraction(str(val["a"])), Fraction(str(val["b"])))
    raise ValueError("unknown function %r" % key)
