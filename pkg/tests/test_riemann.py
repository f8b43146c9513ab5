import random
from fractions import Fraction

import pytest

from equidist.generators import FactorialSchedule, RadicalInverse
from equidist.riemann import (
    Affine,
    ConstantFn,
    ConstructionError,
    CustomFunction,
    DyadicRationals,
    EnvelopeChaser,
    FullInterval,
    IndicatorOfDyadics,
    IndicatorOfInterval,
    Rationals,
    StepFunction,
    adversarial_pair,
    block_ends,
    cesaro_trace,
    domain_from_name,
    dyadic_between,
    function_from_json,
    function_to_json,
    integrability_verdict,
    non_dyadic_between,
    simplest_between,
)


def is_pow2(n):
    return n & (n - 1) == 0


def brute_simplest(lo, hi):
    q = 1
    while True:
        a = lo.numerator * q // lo.denominator + 1
        if Fraction(a, q) < hi:
            return Fraction(a, q)
        q += 1


def test_simplest_between_is_minimal_denominator():
    rng = random.Random(9)
    for _ in range(200):
        d = rng.randint(2, 400)
        n = rng.randrange(d)
        lo = Fraction(n, d)
        hi = lo + Fraction(1, rng.randint(2, 400))
        got = simplest_between(lo, hi)
        assert lo < got < hi
        assert got == brute_simplest(lo, hi)


def test_simplest_between_golden():
    assert simplest_between(Fraction(0), Fraction(1)) == Fraction(1, 2)
    assert simplest_between(Fraction(1, 3), Fraction(1, 2)) == Fraction(2, 5)
    assert simplest_between(Fraction(1, 4), Fraction(3, 8)) == Fraction(1, 3)


def test_dyadic_between_least_level():
    rng = random.Random(13)
    for _ in range(100):
        d = rng.randint(2, 300)
        lo = Fraction(rng.randrange(d), d)
        hi = lo + Fraction(1, rng.randint(2, 300))
        x = dyadic_between(lo, hi)
        assert lo < x < hi and is_pow2(x.denominator)
        # no dyadic of a lower level fits
        m = x.denominator.bit_length() - 1
        for mm in range(m):
            w = 1 << mm
            a = lo.numerator * w // lo.denominator + 1
            assert not Fraction(a, w) < hi


def test_non_dyadic_between():
    rng = random.Random(29)
    for _ in range(100):
        d = rng.randint(2, 200)
        lo = Fraction(rng.randrange(d), d)
        hi = lo + Fraction(1, rng.randint(2, 200))
        x = non_dyadic_between(lo, hi)
        assert lo < x < hi
        assert not is_pow2(x.denominator)
    # tight dyadic window still yields a non-dyadic point
    x = non_dyadic_between(Fraction(1, 2), Fraction(1, 2) + Fraction(1, 1024))
    assert not is_pow2(x.denominator)
    assert Fraction(1, 2) < x < Fraction(1, 2) + Fraction(1, 1024)


def test_domains():
    dy = DyadicRationals()
    assert dy.contains(Fraction(3, 8)) and not dy.contains(Fraction(1, 3))
    ra = Rationals()
    assert ra.contains(Fraction(1, 3)) and not ra.contains(Fraction(3, 2))
    fu = FullInterval()
    assert fu.pick(Fraction(0), Fraction(1)) == Fraction(1, 2)
    assert domain_from_name("rational").name == "rational"
    with pytest.raises(ValueError):
        domain_from_name("imaginary")


def brute_envelope_sums(f, domain, level):
    w = Fraction(1, 2**level)
    lo_sum, hi_sum = Fraction(0), Fraction(0)
    for j in range(2**level):
        mn, mx = f.cell_envelopes(domain, j * w, (j + 1) * w)
        lo_sum += mn * w
        hi_sum += mx * w
    return lo_sum, hi_sum


def test_envelope_sums_match_cell_by_cell_totals():
    dom = Rationals()
    fns = [
        ConstantFn(Fraction(2, 7)),
        Affine(1, 0),
        Affine(Fraction(-3, 2), 1),
        StepFunction([Fraction(1, 3)], [Fraction(0), Fraction(1)]),
        StepFunction([Fraction(1, 5), Fraction(2, 3)], [1, Fraction(1, 2), 0]),
        IndicatorOfInterval(Fraction(1, 5), Fraction(7, 9)),
        IndicatorOfDyadics(),
    ]
    for f in fns:
        for level in range(1, 7):
            want = brute_envelope_sums(f, dom, level)
            assert f.envelope_sums(dom, level) == want


def test_affine_verdict_exact_half():
    v = integrability_verdict(Affine(1, 0), Rationals(), tol=1e-9)
    assert v.status == "integrable"
    assert v.value_exact == Fraction(1, 2)
    assert not v.approximate


def test_step_verdict():
    f = StepFunction([Fraction(1, 3)], [Fraction(0), Fraction(1)])
    assert f.integral() == Fraction(2, 3)
    v = integrability_verdict(f, Rationals(), tol=1e-9)
    assert v.status == "integrable"
    assert abs(v.value - 2 / 3) <= 1e-9


def test_dyadic_indicator_not_integrable_on_rationals():
    v = integrability_verdict(IndicatorOfDyadics(), Rationals())
    assert v.status == "not-integrable"
    assert v.level == 3
    assert all(g == 1 for g in v.gap_history)


def test_dyadic_indicator_integrable_on_dyadics():
    v = integrability_verdict(IndicatorOfDyadics(), DyadicRationals())
    assert v.status == "integrable" and v.value == 1.0


def test_no_verdict_when_depth_is_too_small():
    v = integrability_verdict(Affine(1, 0), Rationals(), tol=1e-12, max_level=5)
    assert v.status == "no-verdict"
    assert v.level == 5


def test_custom_function_approximate_verdict():
    f = CustomFunction(lambda x: x * x, bound=1.0)
    v = integrability_verdict(f, FullInterval(), tol=1e-3)
    assert v.status == "integrable"
    assert v.approximate
    assert abs(v.value - 1 / 3) < 2e-3
    with pytest.raises(ValueError):
        CustomFunction(lambda x: x, bound=None)


def test_verdict_tolerance_validation():
    with pytest.raises(ValueError):
        integrability_verdict(Affine(1, 0), Rationals(), tol=0)


def test_chaser_walks_reversed_cells():
    chaser = EnvelopeChaser(Affine(1, 0), Rationals(), "sup")
    vdc = RadicalInverse(2)
    for n in range(32):
        m = n + 1
        i = m.bit_length()
        lo, hi, slack = chaser._cell(n)
        assert hi - lo == Fraction(1, 1 << i)
        assert lo == vdc.exact(m) or lo == Fraction(vdc.exact(m))
        assert slack == Fraction(1, m)


def test_chaser_samples_track_envelopes():
    dom = Rationals()
    f = Affine(1, 0)
    sup = EnvelopeChaser(f, dom, "sup")
    inf = EnvelopeChaser(f, dom, "inf")
    for n in range(64):
        lo, hi, slack = sup._cell(n)
        x = sup.exact(n)
        assert lo <= x < hi
        assert f.value(x) >= f.value(hi) - slack
        y = inf.exact(n)
        assert lo <= y < hi
        assert f.value(y) <= f.value(lo) + slack


def test_chaser_respects_domain():
    sup = EnvelopeChaser(IndicatorOfDyadics(), Rationals(), "sup")
    inf = EnvelopeChaser(IndicatorOfDyadics(), Rationals(), "inf")
    for n in range(1, 40):
        assert is_pow2(sup.exact(n).denominator)
        assert not is_pow2(inf.exact(n).denominator)
    with pytest.raises(ValueError):
        EnvelopeChaser(Affine(1, 0), Rationals(), "sideways")


def test_adversarial_pair_refuses_integrable():
    with pytest.raises(ConstructionError):
        adversarial_pair(Affine(1, 0), Rationals())
    sup, inf, both = adversarial_pair(Affine(1, 0), Rationals(), override=True)
    assert both.first is sup and both.second is inf


def test_block_ends():
    assert block_ends(8) == [1, 3, 9, 33, 153, 873, 5913, 46233]


def test_adversary_trace_oscillates():
    f = IndicatorOfDyadics()
    _, _, both = adversarial_pair(f, Rationals())
    ends = block_ends(6)
    trace = dict(cesaro_trace(f, both, ends))
    # sup blocks (odd) pull the mean up, inf blocks (even) pull it down
    assert trace[9] > 0.85
    assert trace[33] < 0.3
    assert trace[153] > 0.8
    assert trace[873] < 0.2


def test_cesaro_trace_validation():
    with pytest.raises(ValueError):
        cesaro_trace(Affine(1, 0), RadicalInverse(2), [0, 4])


def test_cesaro_trace_uses_exact_points():
    # a dyadic-indicator trace along the radical inverse sees all ones;
    # the float path would agree here, the exact path must too
    trace = cesaro_trace(IndicatorOfDyadics(), RadicalInverse(2), [8, 16])
    assert [v for _, v in trace] == [1.0, 1.0]


def test_function_json_roundtrip():
    fns = [
        ConstantFn(Fraction(1, 3)),
        Affine(Fraction(2, 3), Fraction(1, 6)),
        StepFunction([Fraction(1, 4), Fraction(1, 2)], [0, 1, Fraction(1, 2)]),
        IndicatorOfDyadics(),
        IndicatorOfInterval(Fraction(1, 8), Fraction(5, 8)),
    ]
    for f in fns:
        f2 = function_from_json(function_to_json(f))
        assert type(f2) is type(f)
        for x in (Fraction(0), Fraction(1, 3), Fraction(1, 2), Fraction(1)):
            assert f2.value(x) == f.value(x)
    with pytest.raises(ValueError):
        function_from_json({"spline": {}})


def test_step_function_validation():
    with pytest.raises(ValueError):
        StepFunction([Fraction(1, 2)], [1])
    with pytest.raises(ValueError):
        StepFunction([Fraction(0)], [0, 1])
    with pytest.raises(ValueError):
        StepFunction([Fraction(1, 2), Fraction(1, 3)], [0, 1, 2])


def test_indicator_interval_validation():
    with pytest.raises(ValueError):
        IndicatorOfInterval(Fraction(1, 2), Fraction(1, 2))
    with pytest.raises(ValueError):
        IndicatorOfInterval(Fraction(-1, 2), Fraction(1, 2))
