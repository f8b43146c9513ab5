"""Shared formatting and serialization helpers.

Everything here is deterministic: identical inputs produce identical bytes,
which the verify suites rely on for digest comparison.
"""

import hashlib
import json
import os
from fractions import Fraction

SIG_DIGITS = 15


def fmt_real(x):
    """Round a float to 15 significant digits, returned as a float.

    Report payloads carry reals at this precision so that re-serialization
    cannot drift.
    """
    return float("%.*g" % (SIG_DIGITS, x))


def real_str(x):
    return "%.*g" % (SIG_DIGITS, x)


def frac_str(f):
    f = Fraction(f)
    return "%d/%d" % (f.numerator, f.denominator)


def parse_frac(s):
    """Parse 'p/q', an integer string, or a decimal string into a Fraction."""
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, float):
        return Fraction(s)
    s = s.strip()
    if "/" in s:
        p, q = s.split("/")
        return Fraction(int(p), int(q))
    return Fraction(s)


def canonical_json(obj):
    """Serialize with sorted keys and fixed separators; one trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def sha256_hex(data):
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()



def seedless_mode():
    return os.environ.get("EQUIDIST_SEEDLESS", "") == "1"
