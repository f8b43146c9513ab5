"""Command line front end.

Every run prints a single report object as canonical JSON on stdout (sorted
keys, fixed separators, reals at 15 significant digits) so repeated runs are
byte-identical; timing goes to stderr only. `generate` and `transport` print
CSV point rows instead. Exit codes: 0 success, 2 usage error, 3 a
verification or acceptance check failed.
"""

import argparse
import json
import math
import sys
import time
from fractions import Fraction

from . import __version__
from ._util import canonical_json, fmt_real, frac_str, parse_frac, real_str, seedless_mode, sha256_hex
from .decomposition import (
    InducedPointMap,
    darboux_split,
    digit_reversal,
    preimage_of_cell,
    residue_decomposition,
    verify_decomposition,
)
from .density import (
    ConstantWeights,
    DisjointnessError,
    LogWeights,
    additivity_witness,
    estimate_asymptotic_density,
    estimate_uniform_density,
    estimate_weighted_density,
    is_buck_measurable,
)
from .generators import (
    CantorCode,
    Kronecker,
    RadicalInverse,
    Transport,
    generator_from_json,
    generator_to_json,
)
from .harness import (
    Identity,
    Shifted,
    density_along_sequence,
    discrepancy_report,
    function_average,
    ks_curve,
    ks_distance,
    star_curve,
    star_discrepancy,
    weyl_magnitude,
)
from .intsets import AP, Union, periodic_form, spec_from_json, spec_to_json
from .measures import (
    BinomialMeasure,
    CantorMeasure,
    MultinomialMeasure,
    QadicCell,
    UniformMeasure,
    level_mass_sum,
    measure_from_json,
    measure_to_json,
)
from .riemann import (
    IndicatorOfDyadics,
    adversarial_pair,
    block_ends,
    cesaro_trace,
    domain_from_name,
    function_from_json,
    function_to_json,
    integrability_verdict,
)


def _usage_error(msg):
    print("error: %s" % msg, file=sys.stderr)
    sys.exit(2)


def _load_json_arg(text, what):
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            return json.load(fh)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        _usage_error("bad %s JSON: %s" % (what, exc))


def _battery(args):
    shift = getattr(args, "shift", 0) or 0
    return Shifted(shift) if shift else Identity()


def _out_stream(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _emit_report(args, command, config, results):
    report = {
        "command": command,
        "config": config,
        "results": results,
        "seedless": seedless_mode(),
        "threads": args.threads,
        "version": __version__,
        "digest": sha256_hex(canonical_json(results).encode()),
    }
    stream, close = _out_stream(getattr(args, "out", None))
    stream.write(canonical_json(report))
    if close:
        stream.close()


def _write_csv(path, rows):
    stream, close = _out_stream(path)
    for row in rows:
        stream.write(",".join(row) + "\n")
    if close:
        stream.close()


# ---------------------------------------------------------------------------
# subcommands

def _cmd_density(args):
    spec = spec_from_json(_load_json_arg(args.spec, "spec"))
    config = {
        "spec": spec_to_json(spec),
        "mode": args.mode,
        "horizon": args.horizon,
        "tolerance": fmt_real(args.tolerance),
    }
    if args.mode == "asymptotic":
        results = estimate_asymptotic_density(spec, args.horizon, args.tolerance).to_json()
    elif args.mode == "weighted":
        weights = LogWeights() if args.weights == "log" else ConstantWeights()
        config["weights"] = args.weights
        results = estimate_weighted_density(spec, weights, args.horizon, args.tolerance).to_json()
    elif args.mode == "uniform":
        results = estimate_uniform_density(spec, args.horizon, args.tolerance).to_json()
    elif args.mode == "buck":
        results = is_buck_measurable(spec, args.horizon).to_json()
    else:  # additivity
        if args.spec_b is None:
            _usage_error("--mode additivity needs --spec-b")
        other = spec_from_json(_load_json_arg(args.spec_b, "spec-b"))
        config["spec_b"] = spec_to_json(other)
        try:
            results = additivity_witness(spec, other, args.horizon, args.tolerance).to_json()
        except DisjointnessError as exc:
            results = {"error": "not-disjoint", "witness": exc.witness}
            _emit_report(args, "density", config, results)
            return 3
    _emit_report(args, "density", config, results)
    return 0


def _cmd_measure(args):
    m = measure_from_json(_load_json_arg(args.measure, "measure"))
    config = {"measure": measure_to_json(m), "eps": fmt_real(args.eps)}
    results = {}
    if args.cell:
        q, n, j = (int(p) for p in args.cell.split(","))
        config["cell"] = [q, n, j]
        results["cell_mass"] = fmt_real(m.cell_mass(QadicCell(q, n, j)))
    if args.cdf is not None:
        x = parse_frac(args.cdf)
        config["cdf"] = frac_str(x)
        results["cdf"] = fmt_real(m.cdf(x, args.eps))
    if args.quantile is not None:
        u = parse_frac(args.quantile)
        config["quantile"] = frac_str(u)
        results["quantile"] = fmt_real(m.quantile(u, args.eps))
    if args.interval:
        a, b = (parse_frac(p) for p in args.interval.split(","))
        config["interval"] = [frac_str(a), frac_str(b)]
        results["interval_mass"] = fmt_real(m.interval_mass(a, b, args.eps))
        results["continuity_interval"] = m.is_continuity_interval(a, b)
    if args.level_sum is not None:
        config["level_sum"] = args.level_sum
        results["level_sum"] = fmt_real(level_mass_sum(m, args.level_sum))
    if not results:
        _usage_error("nothing to compute: pass --cell/--cdf/--quantile/--interval/--level-sum")
    _emit_report(args, "measure", config, results)
    return 0


def _point_rows(gen, start, n):
    for k in range(start, start + n):
        yield (str(k), real_str(gen(k)))


def _cmd_generate(args):
    gen = generator_from_json(_load_json_arg(args.gen, "generator"))
    _write_csv(args.out, _point_rows(gen, args.start, args.n))
    return 0


def _cmd_transport(args):
    inner = generator_from_json(_load_json_arg(args.inner, "generator"))
    measure = measure_from_json(_load_json_arg(args.measure, "measure"))
    gen = Transport(inner, measure, args.eps)
    if args.curve_csv:
        rows = ks_curve(gen, _battery(args), args.n, measure)
        _write_csv(args.curve_csv, ((str(n), real_str(v)) for n, v in rows))
    if args.curve_csv is None or args.out is not None:
        _write_csv(args.out, _point_rows(gen, args.start, args.n))
    return 0


def _cmd_discrepancy(args):
    gen = generator_from_json(_load_json_arg(args.gen, "generator"))
    measure = None
    if args.measure:
        measure = measure_from_json(_load_json_arg(args.measure, "measure"))
    intervals = []
    for spec in args.interval or []:
        a, b = (float(parse_frac(p)) for p in spec.split(","))
        intervals.append((a, b))
    battery = _battery(args)
    rep = discrepancy_report(
        gen, battery, args.n, h_max=args.h_max, intervals=tuple(intervals),
        measure=measure, tol=args.tolerance,
    )
    if args.csv:
        m = measure if measure is not None else UniformMeasure()
        star_rows = star_curve(gen, battery, args.n)
        ks_rows = ks_curve(gen, battery, args.n, m)
        rows = [
            (str(n), real_str(s), real_str(k))
            for (n, s), (_, k) in zip(star_rows, ks_rows)
        ]
        _write_csv(args.csv, rows)
    config = {
        "gen": generator_to_json(gen),
        "n": args.n,
        "h_max": args.h_max,
        "shift": args.shift,
        "tolerance": fmt_real(args.tolerance),
    }
    if measure is not None:
        config["measure"] = measure_to_json(measure)
    _emit_report(args, "discrepancy", config, rep.to_json())
    return 0


def _cmd_riemann(args):
    f = function_from_json(_load_json_arg(args.function, "function"))
    domain = domain_from_name(args.domain)
    verdict = integrability_verdict(f, domain, tol=args.tolerance, max_level=args.max_level)
    config = {
        "function": function_to_json(f),
        "domain": args.domain,
        "tolerance": fmt_real(args.tolerance),
        "max_level": args.max_level,
    }
    results = {"verdict": verdict.to_json()}
    if args.adversary:
        config["blocks"] = args.blocks
        _, _, both = adversarial_pair(
            f, domain, override=args.override, tol=args.tolerance, max_level=args.max_level
        )
        ends = block_ends(args.blocks)
        trace = cesaro_trace(f, both, ends)
        results["trace"] = [{"n": n, "mean": fmt_real(v)} for n, v in trace]
        if args.trace_csv:
            _write_csv(args.trace_csv, ((str(n), real_str(v)) for n, v in trace))
    _emit_report(args, "riemann", config, results)
    return 0


# ---------------------------------------------------------------------------
# verification battery

def _check(checks, name, ok, detail=""):
    checks.append({"name": name, "ok": bool(ok), "detail": detail})
    print("%s %s%s" % ("PASS" if ok else "FAIL", name, " " + detail if detail else ""),
          file=sys.stderr)


def _suite_density(horizon):
    checks = []
    battery = [(AP(2, 0), Fraction(1, 2)), (AP(3, 1), Fraction(1, 3)),
               (AP(12, 7), Fraction(1, 12))]
    for spec, want in battery:
        est = estimate_asymptotic_density(spec, horizon)
        _check(checks, "density.exact.%r" % (spec,),
               est.exact == want and est.lower <= float(want) <= est.upper + 1e-15,
               "exact=%s" % est.exact)
    u = Union((AP(4, 0), AP(4, 1)))
    _check(checks, "density.union-form", periodic_form(u).density == Fraction(1, 2))
    rep = additivity_witness(AP(4, 0), AP(4, 1), horizon, tol=1e-6)
    _check(checks, "density.additivity", rep.additive and rep.exact_gap == 0,
           "gap=%g" % rep.gap)
    try:
        additivity_witness(AP(2, 0), AP(4, 0), horizon)
        _check(checks, "density.disjointness-guard", False, "no error raised")
    except DisjointnessError as exc:
        _check(checks, "density.disjointness-guard", exc.witness == 0,
               "witness=%d" % exc.witness)
    buck = is_buck_measurable(AP(6, 1), horizon)
    _check(checks, "density.buck", buck.measurable is True and buck.value == Fraction(1, 6))
    est = estimate_uniform_density(AP(5, 2), horizon)
    _check(checks, "density.uniform-window",
           abs(est.lower - 0.2) < 2e-2 and abs(est.upper - 0.2) < 2e-2)
    return checks


def _suite_decomposition(depth, horizon):
    checks = []
    for q in (2, 3):
        d = residue_decomposition(q, min(depth, 8 if q == 3 else depth))
        rep = verify_decomposition(d, horizon=max(horizon, q ** d.depth))
        _check(checks, "decomposition.q%d" % q, rep.passed,
               "depth=%d" % d.depth)
    d = residue_decomposition(2, 4)
    gen = RadicalInverse(2)
    ok = all(InducedPointMap(d).exact(k) == gen.exact(k) for k in range(16))
    _check(checks, "decomposition.induced-map", ok)
    cell = QadicCell(2, 3, 5)
    pre = preimage_of_cell(gen, cell)
    ok = pre == AP(8, digit_reversal(2, 3, 5))
    lo, hi = cell.interval()
    ok = ok and all((lo <= gen.exact(k) < hi) == pre.contains(k) for k in range(256))
    _check(checks, "decomposition.preimage", ok, "%r" % (pre,))
    split = darboux_split(AP(2, 0), Fraction(1, 2))
    _check(checks, "decomposition.split", split == AP(4, 0) and
           periodic_form(split).density == Fraction(1, 4))
    from .decomposition import NestedDecomposition

    broken = NestedDecomposition(2, 3, labeling=_corrupt_labeling)
    rep = verify_decomposition(broken, horizon=64)
    _check(checks, "decomposition.negative-control", not rep.passed)
    return checks


def _corrupt_labeling(n, j):
    v = digit_reversal(2, n, j)
    if n == 2 and j in (0, 1):  # swap two labels: partition holds, nesting breaks
        return digit_reversal(2, n, 1 - j)
    return v


def _suite_measure():
    checks = []
    cases = [
        ("binomial.3", BinomialMeasure(0.3), 12),
        ("binomial.5", BinomialMeasure(0.5), 12),
        ("multinomial", MultinomialMeasure(3, (0.2, 0.5, 0.3)), 8),
        ("cantor", CantorMeasure(), 8),
        ("uniform", UniformMeasure(), 10),
    ]
    for name, m, n in cases:
        total = level_mass_sum(m, n)
        _check(checks, "measure.level-sum.%s" % name, abs(total - 1.0) < 1e-12,
               "sum=%s" % fmt_real(total))
    b = BinomialMeasure(0.3)
    _check(checks, "measure.cell-closed-form",
           abs(b.cell_mass(QadicCell(2, 3, 5)) - 0.3 * 0.7 * 0.7) < 1e-15)
    _check(checks, "measure.cdf-dyadic-exact", b.cdf(Fraction(1, 2)) == 0.3)
    c = CantorMeasure()
    _check(checks, "measure.cantor-quantile", c.quantile(Fraction(1, 2)) == float(Fraction(1, 3)))
    _check(checks, "measure.cantor-middle-null", c.interval_mass(Fraction(1, 3), Fraction(2, 3)) == 0.0)
    for m in (b, c, MultinomialMeasure(3, (0.2, 0.5, 0.3))):
        ok = True
        for i in range(1, 40):
            u = Fraction(i, 40)
            x = m.quantile(u)
            ok = ok and abs(m.cdf(Fraction(x)) - float(u)) <= 1e-9
        _check(checks, "measure.quantile-roundtrip.%s" % type(m).__name__, ok)
    cell = QadicCell(2, 4, 11)
    lo, hi = cell.interval()
    _check(checks, "measure.interval-vs-cell",
           abs(b.interval_mass(lo, hi) - b.cell_mass(cell)) < 1e-12)
    return checks


def _suite_transport(n):
    checks = []
    vdc = RadicalInverse(2)
    ident = Transport(vdc, BinomialMeasure(0.5))
    ok = all(Fraction(ident(k)) == vdc.exact(k) for k in range(64))
    _check(checks, "transport.balanced-identity", ok)
    for name, m in (("binomial.3", BinomialMeasure(0.3)), ("cantor", CantorMeasure())):
        t = Transport(vdc, m)
        d = ks_distance(t.values(Identity().indices(n)), m)
        _check(checks, "transport.ks.%s" % name, d <= 0.05, "ks=%s n=%d" % (fmt_real(d), n))
    code = CantorCode(vdc)
    ok = True
    for k in range(1, 200):
        x = code.exact(k)
        digs = []
        y = x
        for _ in range(12):
            y *= 3
            d = y.numerator // y.denominator
            y -= d
            digs.append(d)
        ok = ok and all(d in (0, 2) for d in digs)
    _check(checks, "transport.cantor-code-digits", ok)
    d = ks_distance(code.values(Identity().indices(n)), CantorMeasure())
    _check(checks, "transport.ks.cantor-code", d <= 0.05, "ks=%s" % fmt_real(d))
    return checks


def _suite_discrepancy(n):
    checks = []
    vdc = RadicalInverse(2)
    idx = Identity()
    for k in (8, 10):
        pts = vdc.values(idx.indices(1 << k))
        _check(checks, "discrepancy.vdc-pow2.%d" % k,
               star_discrepancy(pts) == 1.0 / (1 << k))
    for m in (1000, n):
        d = star_discrepancy(vdc.values(idx.indices(m)))
        bound = (math.log2(m) + 2) / m
        _check(checks, "discrepancy.vdc-log-bound.%d" % m, d <= bound,
               "N*D=%s" % fmt_real(m * d))
    kron = Kronecker("sqrt2")
    alpha = float(kron.alpha)
    ok = True
    worst = 0.0
    for h in range(1, 9):
        mag = weyl_magnitude(kron, idx, h, n)
        bound = 1.0 / (n * abs(math.sin(math.pi * h * alpha)))
        worst = max(worst, mag / bound)
        ok = ok and mag <= bound
    _check(checks, "discrepancy.kronecker-weyl", ok, "worst ratio=%s" % fmt_real(worst))
    mean = function_average(vdc, idx, lambda t: t, n)
    _check(checks, "discrepancy.mean-identity", abs(mean - 0.5) <= 1e-3,
           "mean=%s" % fmt_real(mean))
    dens = density_along_sequence(AP(4, 1), Shifted(17), n)
    _check(checks, "discrepancy.index-density", dens.gap <= 1e-2,
           "gap=%s" % fmt_real(dens.gap))
    return checks


def _suite_riemann():
    checks = []
    from .riemann import Affine, StepFunction
    dom = domain_from_name("rational")
    v = integrability_verdict(Affine(1, 0), dom, tol=1e-9)
    _check(checks, "riemann.affine", v.status == "integrable" and v.value_exact == Fraction(1, 2),
           "level=%d" % v.level)
    step = StepFunction([Fraction(1, 3)], [Fraction(0), Fraction(1)])
    v = integrability_verdict(step, dom, tol=1e-9)
    _check(checks, "riemann.step", v.status == "integrable" and abs(v.value - 2 / 3) <= 1e-9)
    v = integrability_verdict(IndicatorOfDyadics(), dom)
    _check(checks, "riemann.dyadic-indicator", v.status == "not-integrable" and v.level == 3,
           "gaps=%s" % (tuple(float(g) for g in v.gap_history),))
    v = integrability_verdict(IndicatorOfDyadics(), domain_from_name("dyadic"))
    _check(checks, "riemann.dyadic-indicator-restricted",
           v.status == "integrable" and v.value == 1.0)
    f = IndicatorOfDyadics()
    _, _, both = adversarial_pair(f, dom)
    ends = block_ends(8)
    trace = dict(cesaro_trace(f, both, ends))
    swing = max(trace.values()) - min(trace[m] for m in ends[1::2])
    _check(checks, "riemann.adversary-oscillation",
           trace[ends[6]] >= 0.85 and trace[ends[7]] <= 0.15 and swing >= 0.7,
           "c7=%s c8=%s" % (fmt_real(trace[ends[6]]), fmt_real(trace[ends[7]])))
    return checks


def _cmd_verify(args):
    suites = {
        "density": lambda: _suite_density(args.horizon),
        "decomposition": lambda: _suite_decomposition(args.depth, args.horizon),
        "measure": _suite_measure,
        "transport": lambda: _suite_transport(args.n),
        "discrepancy": lambda: _suite_discrepancy(args.n),
        "riemann": _suite_riemann,
    }
    names = list(suites) if args.suite == "all" else [args.suite]
    results = {"suites": {}, "passed": True}
    for name in names:
        checks = suites[name]()
        results["suites"][name] = checks
        if not all(c["ok"] for c in checks):
            results["passed"] = False
    config = {"suite": args.suite, "horizon": args.horizon, "depth": args.depth, "n": args.n}
    _emit_report(args, "verify", config, results)
    return 0 if results["passed"] else 3


# ---------------------------------------------------------------------------
# parser

def _add_common(p):
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads (validated; execution is single-threaded)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="equidist",
        description="exact and empirical equidistribution toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="density estimates and measurability verdicts")
    p.add_argument("--spec", required=True, help="integer-set JSON (or @file)")
    p.add_argument("--spec-b", default=None, help="second set for --mode additivity")
    p.add_argument("--mode", default="asymptotic",
                   choices=["asymptotic", "weighted", "uniform", "buck", "additivity"])
    p.add_argument("--weights", default="log", choices=["constant", "log"])
    p.add_argument("--horizon", type=int, default=1 << 20)
    p.add_argument("--tolerance", type=float, default=1e-3)
    _add_common(p)
    p.set_defaults(fn=_cmd_density)

    p = sub.add_parser("measure", help="cell masses, cdf, quantile, interval mass")
    p.add_argument("--measure", required=True, help="measure JSON (or @file)")
    p.add_argument("--cell", default=None, help="q,level,index")
    p.add_argument("--cdf", default=None, help="point in [0,1], rational p/q allowed")
    p.add_argument("--quantile", default=None, help="mass in [0,1], rational p/q allowed")
    p.add_argument("--interval", default=None, help="a,b")
    p.add_argument("--level-sum", type=int, default=None)
    p.add_argument("--eps", type=float, default=1e-12)
    _add_common(p)
    p.set_defaults(fn=_cmd_measure)

    p = sub.add_parser("generate", help="emit k,x CSV rows for a generator")
    p.add_argument("--gen", required=True, help="generator JSON (or @file)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--start", type=int, default=0)
    _add_common(p)
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("transport", help="push a sequence through a measure quantile")
    p.add_argument("--inner", required=True, help="inner generator JSON")
    p.add_argument("--measure", required=True, help="target measure JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-12)
    p.add_argument("--shift", type=int, default=0)
    p.add_argument("--curve-csv", default=None,
                   help="write n,ks rows at doubling prefixes to this file")
    _add_common(p)
    p.set_defaults(fn=_cmd_transport)

    p = sub.add_parser("discrepancy", help="star discrepancy, Weyl sums, KS distance")
    p.add_argument("--gen", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--h-max", type=int, default=4)
    p.add_argument("--interval", action="append", default=None, help="a,b (repeatable)")
    p.add_argument("--measure", default=None)
    p.add_argument("--shift", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-2)
    p.add_argument("--csv", default=None, help="write n,star,ks curve rows")
    _add_common(p)
    p.set_defaults(fn=_cmd_discrepancy)

    p = sub.add_parser("riemann", help="integrability verdicts and adversarial traces")
    p.add_argument("--function", required=True, help="function JSON (or @file)")
    p.add_argument("--domain", default="rational", choices=["full", "dyadic", "rational"])
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--max-level", type=int, default=30)
    p.add_argument("--adversary", action="store_true",
                   help="build the envelope-chasing pair and trace block-end means")
    p.add_argument("--override", action="store_true",
                   help="build the pair even for integrable functions")
    p.add_argument("--blocks", type=int, default=8)
    p.add_argument("--trace-csv", default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_riemann)

    p = sub.add_parser("verify", help="run the deterministic verification battery")
    p.add_argument("--suite", default="all",
                   choices=["all", "density", "decomposition", "measure",
                            "transport", "discrepancy", "riemann"])
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--horizon", type=int, default=1 << 16)
    p.add_argument("--n", type=int, default=1 << 12)
    _add_common(p)
    p.set_defaults(fn=_cmd_verify)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        build_parser().error("--threads must be >= 1")
    t0 = time.perf_counter()
    try:
        code = args.fn(args)
    except KeyError as exc:
        print("error: missing field %s" % exc, file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    print("elapsed %.3fs" % (time.perf_counter() - t0), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
