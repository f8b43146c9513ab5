"""Symbolic subsets of the non-negative integers.

A spec is an immutable expression tree built from arithmetic progressions,
finite sets, named block unions, explicit bitmasks, and boolean combinators.
Every spec answers exact membership queries; specs free of blocks/bitmasks
also reduce to a periodic normal form (period L, residue set, finitely many
exceptions) that yields exact rational densities.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np


class NotRepresentableError(ValueError):
    """Spec has no residue-class representation (blocks/bitmask nodes)."""


class IntegerSet:
    def contains(self, k):
        raise NotImplementedError

    def mask(self, lo, hi):
        """Boolean membership array for the range [lo, hi)."""
        raise NotImplementedError

    def __contains__(self, k):
        return self.contains(k)


@dataclass(frozen=True)
class AP(IntegerSet):
    """Arithmetic progression {k : k = b mod a}."""

    a: int
    b: int

    def __post_init__(self):
        if self.a < 1 or not 0 <= self.b < self.a:
            raise ValueError("AP requires a >= 1 and 0 <= b < a")

    def contains(self, k):
        return k % self.a == self.b

    def mask(self, lo, hi):
        out = np.zeros(hi - lo, dtype=bool)
        start = lo + (self.b - lo) % self.a
        if start < hi:
            out[start - lo :: self.a] = True
        return out


@dataclass(frozen=True)
class Finite(IntegerSet):
    elements: tuple

    def __post_init__(self):
        elems = tuple(sorted(set(int(e) for e in self.elements)))
        if elems and elems[0] < 0:
            raise ValueError("finite sets hold non-negative integers")
        object.__setattr__(self, "elements", elems)

    def contains(self, k):
        return k in self.elements

    def mask(self, lo, hi):
        out = np.zeros(hi - lo, dtype=bool)
        for e in self.elements:
            if lo <= e < hi:
                out[e - lo] = True
        return out


_BLOCK_KINDS = ("pow2-even", "pow2-odd")


@dataclass(frozen=True)
class BlockUnion(IntegerSet):
    """Union of a closed-form family of disjoint index intervals.

    pow2-even is the canonical oscillator: [2^(2i), 2^(2i+1)) for i >= 0,
    whose counting ratio swings between 1/3 and 2/3 forever.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in _BLOCK_KINDS:
            raise ValueError("unknown block kind %r" % (self.kind,))

    def blocks(self):
        i = 0
        while True:
            if self.kind == "pow2-even":
                yield 4**i, 2 * 4**i
            else:
                yield 2 * 4**i, 4 ** (i + 1)
            i += 1

    def contains(self, k):
        for l, r in self.blocks():
            if k < l:
                return False
            if k < r:
                return True

    def mask(self, lo, hi):
        out = np.zeros(hi - lo, dtype=bool)
        for l, r in self.blocks():
            if l >= hi:
                break
            a, b = max(l, lo), min(r, hi)
            if a < b:
                out[a - lo : b - lo] = True
        return out

    def count_below(self, n):
        c = 0
        for l, r in self.blocks():
            if l >= n:
                break
            c += min(r, n) - l
        return c


@dataclass(frozen=True)
class Bitmask(IntegerSet):
    """Explicit membership for k < n; bit k of value is the indicator."""

    n: int
    value: int

    def __post_init__(self):
        if self.n < 0 or self.value < 0 or self.value >> self.n:
            raise ValueError("bitmask value must fit below 2**n")

    def contains(self, k):
        if k >= self.n:
            raise ValueError("membership query beyond bitmask horizon %d" % self.n)
        return bool((self.value >> k) & 1)

    def mask(self, lo, hi):
        if hi > self.n:
            raise ValueError("mask range beyond bitmask horizon %d" % self.n)
        nbytes = (self.n + 7) // 8
        raw = np.frombuffer(self.value.to_bytes(nbytes, "little"), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")[: self.n]
        return bits[lo:hi].astype(bool)

    def count_below(self, n):
        n = min(n, self.n)
        return (self.value & ((1 << n) - 1)).bit_count()


@dataclass(frozen=True)
class Union(IntegerSet):
    parts: tuple

    def __post_init__(self):
        if len(self.parts) < 1:
            raise ValueError("union of nothing")

    def contains(self, k):
        return any(p.contains(k) for p in self.parts)

    def mask(self, lo, hi):
        out = self.parts[0].mask(lo, hi)
        for p in self.parts[1:]:
            out |= p.mask(lo, hi)
        return out


@dataclass(frozen=True)
class Intersection(IntegerSet):
    parts: tuple

    def __post_init__(self):
        if len(self.parts) < 1:
            raise ValueError("intersection of nothing")

    def contains(self, k):
        return all(p.contains(k) for p in self.parts)

    def mask(self, lo, hi):
        out = self.parts[0].mask(lo, hi)
        for p in self.parts[1:]:
            out &= p.mask(lo, hi)
        return out


@dataclass(frozen=True)
class Difference(IntegerSet):
    left: IntegerSet
    right: IntegerSet

    def contains(self, k):
        return self.left.contains(k) and not self.right.contains(k)

    def mask(self, lo, hi):
        return self.left.mask(lo, hi) & ~self.right.mask(lo, hi)


@dataclass(frozen=True)
class Complement(IntegerSet):
    part: IntegerSet

    def contains(self, k):
        return not self.part.contains(k)

    def mask(self, lo, hi):
        return ~self.part.mask(lo, hi)


# ---------------------------------------------------------------------------
# periodic normal form

class PeriodicForm:
    """Membership = residue table mod L, overridden on finite exception sets.

    plus holds members outside the residue classes, minus holds removed
    residue-class members. Density and closure-measure questions depend only
    on the residue table: finite adjustments are null.
    """

    def __init__(self, period, residue_mask, plus=frozenset(), minus=frozenset()):
        self.period = period
        self.residue_mask = residue_mask
        self.plus = plus
        self.minus = minus

    def member(self, k):
        if k in self.plus:
            return True
        if k in self.minus:
            return False
        return bool(self.residue_mask[k % self.period])

    @property
    def density(self):
        return Fraction(int(self.residue_mask.sum()), self.period)

    def residues(self):
        return np.nonzero(self.residue_mask)[0]

    def min_element(self):
        best = min(self.plus) if self.plus else None
        for r in self.residues():
            k = int(r)
            while k in self.minus:
                k += self.period
            if best is None or k < best:
                best = k
        return best

    def count_below(self, n):
        res = self.residues()
        c = int(np.maximum(0, (n - res + self.period - 1) // self.period).sum()) if len(res) else 0
        c += sum(1 for p in self.plus if p < n)
        c -= sum(1 for m in self.minus if m < n)
        return c


DEFAULT_MAX_PERIOD = 10_000_000


def _lift(mask, period, target):
    return np.tile(mask, target // period)


def _rebuild_exceptions(spec, period, mask, candidates):
    plus, minus = set(), set()
    for k in candidates:
        actual = spec.contains(k)
        predicted = bool(mask[k % period])
        if actual and not predicted:
            plus.add(k)
        elif predicted and not actual:
            minus.add(k)
    return frozenset(plus), frozenset(minus)


def periodic_form(spec, max_period=DEFAULT_MAX_PERIOD):
    """Reduce a spec to PeriodicForm, or raise NotRepresentableError.

    Block unions and bitmasks have no eventually-periodic structure; a period
    beyond max_period is refused rather than silently approximated.
    """
    if isinstance(spec, AP):
        mask = np.zeros(spec.a, dtype=bool)
        mask[spec.b] = True
        return PeriodicForm(spec.a, mask)
    if isinstance(spec, Finite):
        return PeriodicForm(1, np.zeros(1, dtype=bool), plus=frozenset(spec.elements))
    if isinstance(spec, Complement):
        inner = periodic_form(spec.part, max_period)
        return PeriodicForm(inner.period, ~inner.residue_mask, inner.minus, inner.plus)
    if isinstance(spec, (Union, Intersection)):
        forms = [periodic_form(p, max_period) for p in spec.parts]
        period = 1
        for f in forms:
            period = lcm(period, f.period)
            if period > max_period:
                raise NotRepresentableError("combined period %d exceeds limit" % period)
        lifted = [_lift(f.residue_mask, f.period, period) for f in forms]
        mask = lifted[0].copy()
        for m in lifted[1:]:
            mask = (mask | m) if isinstance(spec, Union) else (mask & m)
        cands = set().union(*(f.plus | f.minus for f in forms))
        plus, minus = _rebuild_exceptions(spec, period, mask, cands)
        return PeriodicForm(period, mask, plus, minus)
    if isinstance(spec, Difference):
        fl = periodic_form(spec.left, max_period)
        fr = periodic_form(spec.right, max_period)
        period = lcm(fl.period, fr.period)
        if period > max_period:
            raise NotRepresentableError("combined period %d exceeds limit" % period)
        mask = _lift(fl.residue_mask, fl.period, period) & ~_lift(fr.residue_mask, fr.period, period)
        cands = fl.plus | fl.minus | fr.plus | fr.minus
        plus, minus = _rebuild_exceptions(spec, period, mask, cands)
        return PeriodicForm(period, mask, plus, minus)
    raise NotRepresentableError(
        "%s has no residue-class representation" % type(spec).__name__
    )


def pnf_or_none(spec, max_period=DEFAULT_MAX_PERIOD):
    try:
        return periodic_form(spec, max_period)
    except NotRepresentableError:
        return None


# ---------------------------------------------------------------------------
# exact counting

_CHUNK = 1 << 18


def count_below(spec, n):
    """|spec intersected with [0, n)|, exactly."""
    return counts_at(spec, [n])[0]


def counts_at(spec, checkpoints):
    """Exact counts below each checkpoint (checkpoints ascending)."""
    if isinstance(spec, (BlockUnion, Bitmask)):
        return [spec.count_below(n) for n in checkpoints]
    form = pnf_or_none(spec)
    if form is not None:
        return [form.count_below(n) for n in checkpoints]
    out, acc, pos = [], 0, 0
    for n in checkpoints:
        while pos < n:
            hi = min(pos + _CHUNK, n)
            acc += int(spec.mask(pos, hi).sum())
            pos = hi
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# JSON expression trees

def spec_to_json(spec):
    if isinstance(spec, AP):
        return {"ap": [spec.a, spec.b]}
    if isinstance(spec, Finite):
        return {"finite": list(spec.elements)}
    if isinstance(spec, BlockUnion):
        return {"blocks": {"kind": spec.kind}}
    if isinstance(spec, Bitmask):
        return {"bitmask": {"n": spec.n, "hex": format(spec.value, "x")}}
    if isinstance(spec, Union):
        return {"union": [spec_to_json(p) for p in spec.parts]}
    if isinstance(spec, Intersection):
        return {"inter": [spec_to_json(p) for p in spec.parts]}
    if isinstance(spec, Difference):
        return {"diff": [spec_to_json(spec.left), spec_to_json(spec.right)]}
    if isinstance(spec, Complement):
        return {"compl": spec_to_json(spec.part)}
    raise TypeError("not a spec: %r" % (spec,))


def spec_from_json(obj):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError("spec node must be a single-key object")
    (key, val), = obj.items()
    if key == "ap":
        a, b = val
        return AP(int(a), int(b))
    if key == "finite":
        return Finite(tuple(val))
    if key == "blocks":
        return BlockUnion(val["kind"])
    if key == "bitmask":
        return Bitmask(int(val["n"]), int(val["hex"], 16))
    if key == "union":
        return Union(tuple(spec_from_json(v) for v in val))
    if key == "inter":
        return Intersection(tuple(spec_from_json(v) for v in val))
    if key == "diff":
        return Difference(spec_from_json(val[0]), spec_from_json(val[1]))
    if key == "compl":
        return Complement(spec_from_json(val))
    raise ValueError("unknown spec node %r" % key)

