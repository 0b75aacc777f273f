# cython: language_level=3
"""Compiled kernels for sparse series arithmetic.

Same interface as bigphase._series_fallback; selected at import time by
bigphase.series when available. Coefficients stay exact rationals: mpq
(gmpy2) inside the multiply-accumulate when available, Fractions at the
boundary, so the speedup comes from tightening the merge loops and the
cheaper rational arithmetic, never from rounding.
"""
from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover - environment dependent
    _mpq = None


cpdef tuple mono_mul(tuple m1, tuple m2):
    """Multiply two monomials (sorted tuples of ((level, cls), exp))."""
    if not m1:
        return m2
    if not m2:
        return m1
    cdef dict acc = dict(m1)
    cdef tuple var
    cdef object exp, prev
    for var, exp in m2:
        prev = acc.get(var)
        if prev is None:
            acc[var] = exp
        else:
            acc[var] = prev + exp
    return tuple(sorted(acc.items()))


cdef object _from_mpq(object c):
    """mpq -> Fraction without re-running gcd (mpq is already reduced)."""
    f = Fraction.__new__(Fraction)
    f._numerator = int(c.numerator)
    f._denominator = int(c.denominator)
    return f


def mul_terms(dict a_terms, dict b_terms, cap):
    """Cauchy product of two term maps, dropping total degree > cap."""
    cdef bint use_mpq = _mpq is not None
    cdef dict a_buckets = _degree_buckets(a_terms, use_mpq)
    cdef dict b_buckets = _degree_buckets(b_terms, use_mpq)
    cdef dict out = {}
    cdef long deg_a, deg_b
    cdef long long cap_l = cap if cap < (1 << 60) else (1 << 60)
    cdef list items_a, items_b
    cdef tuple ma, mb, key
    cdef object ca, cb, prev, prod
    for deg_a, items_a in a_buckets.items():
        for deg_b, items_b in b_buckets.items():
            if deg_a + deg_b > cap_l:
                continue
            for ma, ca in items_a:
                for mb, cb in items_b:
                    key = mono_mul(ma, mb)
                    prev = out.get(key)
                    prod = ca * cb
                    if prev is None:
                        out[key] = prod
                    else:
                        out[key] = prev + prod
    if use_mpq:
        return {m: _from_mpq(c) for m, c in out.items() if c}
    return {m: c for m, c in out.items() if c != 0}


cdef dict _degree_buckets(dict terms, bint use_mpq):
    cdef dict buckets = {}
    cdef tuple mono
    cdef object coef
    cdef long deg
    cdef list bucket
    for mono, coef in terms.items():
        deg = 0
        for _, exp in mono:
            deg += exp
        if use_mpq:
            coef = _mpq(coef)
        bucket = buckets.get(deg)
        if bucket is None:
            buckets[deg] = [(mono, coef)]
        else:
            bucket.append((mono, coef))
    return buckets
