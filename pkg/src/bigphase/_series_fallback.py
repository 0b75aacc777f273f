"""Pure-Python kernels for sparse series arithmetic.

This module mirrors the interface of the compiled kernel
(bigphase._series_kernel); one of the two is selected at import time by
bigphase.series. Keep both implementations in sync.

If gmpy2 is importable its mpq rationals are used inside the Cauchy
product (they are several times faster than Fraction for the bulk
multiply-accumulate); coefficients still enter and leave as Fractions,
so callers never see the difference.
"""
from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover - environment dependent
    _mpq = None


def mono_mul(m1, m2):
    """Multiply two monomials (sorted tuples of ((level, cls), exp))."""
    if not m1:
        return m2
    if not m2:
        return m1
    acc = dict(m1)
    for var, exp in m2:
        prev = acc.get(var)
        acc[var] = exp if prev is None else prev + exp
    return tuple(sorted(acc.items()))


def _from_mpq(c):
    """mpq -> Fraction without re-running gcd (mpq is already reduced)."""
    f = Fraction.__new__(Fraction)
    f._numerator = int(c.numerator)
    f._denominator = int(c.denominator)
    return f


def mul_terms(a_terms, b_terms, cap):
    """Cauchy product of two term maps, dropping total degree > cap.

    Terms are bucketed by total degree so that pairs above the cap are
    skipped wholesale; for heavily truncated products this is the
    difference between thousands and millions of monomial merges.
    """
    wrap = _mpq if _mpq is not None else (lambda c: c)
    a_buckets = _degree_buckets(a_terms, wrap)
    b_buckets = _degree_buckets(b_terms, wrap)
    out = {}
    for deg_a, items_a in a_buckets.items():
        for deg_b, items_b in b_buckets.items():
            if deg_a + deg_b > cap:
                continue
            for ma, ca in items_a:
                for mb, cb in items_b:
                    key = mono_mul(ma, mb)
                    prev = out.get(key)
                    prod = ca * cb
                    out[key] = prod if prev is None else prev + prod
    if _mpq is not None:
        return {m: _from_mpq(c) for m, c in out.items() if c}
    return {m: c for m, c in out.items() if c != 0}


def _degree_buckets(terms, wrap):
    buckets = {}
    for mono, coef in terms.items():
        deg = 0
        for _, exp in mono:
            deg += exp
        bucket = buckets.get(deg)
        if bucket is None:
            buckets[deg] = [(mono, wrap(coef))]
        else:
            bucket.append((mono, wrap(coef)))
    return buckets
