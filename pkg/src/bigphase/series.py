"""Truncated multivariate formal power series over exact rationals.

Variables are the descendant coordinates of a finite window of the big
phase space: a variable is a pair (level, class_idx) with
0 <= level <= window.max_level and 1 <= class_idx <= window.num_classes.
A monomial is a sorted tuple of ((level, class_idx), exponent) pairs with
strictly positive exponents; the empty tuple is the constant monomial.

Every series carries two trust bounds:

* valid_order: coefficients of total degree <= valid_order are exact;
  higher ones are unknown and never stored. Exact polynomials use the
  ORDER_EXACT sentinel.
* level_trust: coefficients of monomials whose variables all have
  level <= level_trust are exact. Operations that have to discard data
  above the level window lower this bound on everything the discarded
  data could have touched; residual checks quantify only over the doubly
  trusted region, so an unsound bound shows up as a test failure, never
  as a silent pass.

All coefficients are Fractions. No floating point anywhere.
"""
from __future__ import annotations

import os
from fractions import Fraction
from math import comb
from typing import Iterable, NamedTuple

if os.environ.get("BIGPHASE_PURE"):
    from . import _series_fallback as _kernel
else:
    try:
        from . import _series_kernel as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _series_fallback as _kernel

KERNEL_NAME = _kernel.__name__.rsplit(".", 1)[-1]

ORDER_EXACT = 1 << 30

Rational = Fraction | int
VarId = tuple[int, int]  # (level, class_idx)
Mono = tuple[tuple[VarId, int], ...]

MONO_ONE: Mono = ()


class WindowMismatchError(ValueError):
    pass


class CapacityError(RuntimeError):
    """Raised when an operation would corrupt the trusted region entirely."""


class UntrustedCoefficientError(LookupError):
    """A coefficient outside the trusted (order, level) region was requested."""


class ShiftBoundError(ValueError):
    """s_shift input is not polynomial in the shifted variable up to the bound."""


class VarWindow(NamedTuple):
    max_level: int
    num_classes: int

    def check_var(self, v: VarId) -> None:
        level, cls = v
        if not (0 <= level <= self.max_level and 1 <= cls <= self.num_classes):
            raise WindowMismatchError(f"variable {v} outside window {self}")

    def variables(self) -> Iterable[VarId]:
        for level in range(self.max_level + 1):
            for cls in range(1, self.num_classes + 1):
                yield (level, cls)


# ---------------------------------------------------------------------------
# monomial helpers
# ---------------------------------------------------------------------------

def mono_from_pairs(pairs: Iterable[tuple[VarId, int]]) -> Mono:
    acc: dict[VarId, int] = {}
    for var, exp in pairs:
        if exp:
            acc[var] = acc.get(var, 0) + exp
    return tuple(sorted((v, e) for v, e in acc.items() if e != 0))


def mono_degree(m: Mono) -> int:
    return sum(e for _, e in m)


def mono_max_level(m: Mono) -> int:
    """Largest variable level in the monomial; -1 for the constant."""
    return max((v[0] for v, _ in m), default=-1)


def mono_mul(m1: Mono, m2: Mono) -> Mono:
    return _kernel.mono_mul(m1, m2)


def mono_str(m: Mono) -> str:
    if not m:
        return "1"
    parts = []
    for (level, cls), exp in m:
        name = f"t[{level},{cls}]"
        parts.append(name if exp == 1 else f"{name}^{exp}")
    return "*".join(parts)


# ---------------------------------------------------------------------------
# the series type
# ---------------------------------------------------------------------------

class TruncSeries:
    __slots__ = ("terms", "valid_order", "window", "level_trust")

    def __init__(self, window: VarWindow, terms: dict[Mono, Fraction],
                 valid_order: int, level_trust: int | None = None):
        self.window = window
        self.valid_order = valid_order
        self.level_trust = window.max_level if level_trust is None else level_trust
        if valid_order < ORDER_EXACT:
            terms = {m: c for m, c in terms.items() if mono_degree(m) <= valid_order}
        self.terms = terms

    @classmethod
    def _raw(cls, window, terms, valid_order, level_trust):
        """Internal constructor for terms already known to respect
        valid_order; skips the degree filter of __init__."""
        self = object.__new__(cls)
        self.window = window
        self.terms = terms
        self.valid_order = valid_order
        self.level_trust = level_trust
        return self

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(window: VarWindow, valid_order: int = ORDER_EXACT) -> "TruncSeries":
        return TruncSeries(window, {}, valid_order)

    @staticmethod
    def const(window: VarWindow, value: Rational,
              valid_order: int = ORDER_EXACT) -> "TruncSeries":
        value = Fraction(value)
        terms = {MONO_ONE: value} if value else {}
        return TruncSeries(window, terms, valid_order)

    @staticmethod
    def variable(window: VarWindow, v: VarId,
                 valid_order: int = ORDER_EXACT) -> "TruncSeries":
        window.check_var(v)
        return TruncSeries(window, {((v, 1),): Fraction(1)}, valid_order)

    # -- bookkeeping --------------------------------------------------------

    def with_trust(self, level_trust: int) -> "TruncSeries":
        if level_trust == self.level_trust:
            return self
        return TruncSeries._raw(self.window, self.terms, self.valid_order,
                                level_trust)

    def with_order(self, valid_order: int) -> "TruncSeries":
        if valid_order == self.valid_order:
            return self
        return TruncSeries(self.window, dict(self.terms), valid_order, self.level_trust)

    def is_stored_zero(self) -> bool:
        return not self.terms

    def min_term_level(self) -> int:
        """min over stored monomials of the monomial's max variable level.

        Used for trust accounting: when this series multiplies unknown data,
        every corrupted monomial contains one of our monomials as a factor,
        hence has max level >= this value. Returns -1 for a series with a
        constant term (corruption could land anywhere) and max_level + 1 for
        the zero series (no corruption at all).
        """
        if not self.terms:
            return self.window.max_level + 1
        return min(mono_max_level(m) for m in self.terms)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        _check_windows(self, other)
        order = min(self.valid_order, other.valid_order)
        trust = min(self.level_trust, other.level_trust)
        big, small = (self.terms, other.terms)
        if len(big) < len(small):
            big, small = small, big
        terms = dict(big)
        for m, c in small.items():
            acc = terms.get(m, 0) + c
            if acc:
                terms[m] = acc
            else:
                terms.pop(m, None)
        if self.valid_order == other.valid_order:
            return TruncSeries._raw(self.window, terms, order, trust)
        return TruncSeries(self.window, terms, order, trust)

    def __neg__(self) -> "TruncSeries":
        return TruncSeries._raw(self.window,
                                {m: -c for m, c in self.terms.items()},
                                self.valid_order, self.level_trust)

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            _check_windows(self, other)
            order = min(self.valid_order, other.valid_order)
            trust = min(self.level_trust, other.level_trust)
            terms = _kernel.mul_terms(self.terms, other.terms, order)
            return TruncSeries._raw(self.window, terms, order, trust)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, factor: Rational) -> "TruncSeries":
        factor = Fraction(factor)
        if not factor:
            return TruncSeries._raw(self.window, {}, self.valid_order,
                                    self.level_trust)
        return TruncSeries._raw(self.window,
                                {m: c * factor for m, c in self.terms.items()},
                                self.valid_order, self.level_trust)

    def __eq__(self, other) -> bool:
        """Exact stored-data equality (terms, order, trust). For identity
        checks within the trusted region use series_match instead."""
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return (self.window == other.window and self.terms == other.terms
                and self.valid_order == other.valid_order
                and self.level_trust == other.level_trust)

    def __hash__(self):
        return hash((self.window, tuple(sorted(self.terms.items())),
                     self.valid_order, self.level_trust))

    def __repr__(self) -> str:
        if not self.terms:
            body = "0"
        else:
            monos = sorted(self.terms, key=lambda m: (mono_degree(m), m))
            parts = [f"{self.terms[m]}*{mono_str(m)}" for m in monos[:6]]
            if len(monos) > 6:
                parts.append(f"... {len(monos) - 6} more")
            body = " + ".join(parts)
        order = "exact" if self.valid_order >= ORDER_EXACT else self.valid_order
        return f"<series {body} | order {order}, level_trust {self.level_trust}>"


def _check_windows(a: TruncSeries, b: TruncSeries) -> None:
    if a.window != b.window:
        raise WindowMismatchError(f"window mismatch: {a.window} vs {b.window}")


# ---------------------------------------------------------------------------
# derivative, coefficient-access, and comparison helpers
# ---------------------------------------------------------------------------

def s_add(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    return a + b


def s_mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    return a * b


def s_partial(a: TruncSeries, v: VarId) -> TruncSeries:
    """Formal partial derivative with respect to the variable v.

    Order drops by one (floor 0). Differentiating along a level above the
    trust bound can strip the marker variable off corrupted monomials, so
    in that case the result's trust collapses to -1; callers with more
    context (fields.nabla) recover a sharper bound themselves.
    """
    a.window.check_var(v)
    terms: dict[Mono, Fraction] = {}
    for m, c in a.terms.items():
        for i, (var, exp) in enumerate(m):
            if var == v:
                if exp == 1:
                    key = m[:i] + m[i + 1:]
                else:
                    key = m[:i] + ((var, exp - 1),) + m[i + 1:]
                terms[key] = terms.get(key, 0) + c * exp
                break
    terms = {m: c for m, c in terms.items() if c != 0}
    if a.valid_order >= ORDER_EXACT:
        order = ORDER_EXACT
    else:
        order = max(a.valid_order - 1, 0)
    trust = a.level_trust if v[0] <= a.level_trust else -1
    return TruncSeries(a.window, terms, order, trust)


def s_shift(a: TruncSeries, v: VarId, c: Rational, degree_bound: int) -> TruncSeries:
    """Exact Taylor shift v -> v + c.

    Requires the stored series to be polynomial in v of degree at most
    degree_bound (the caller guarantees that nothing above valid_order
    depends on v; this cannot be checked here and is documented at the
    call sites).
    """
    a.window.check_var(v)
    c = Fraction(c)
    if not c:
        return a
    out: dict[Mono, Fraction] = {}
    for m, coef in a.terms.items():
        exp = 0
        rest = m
        for i, (var, e) in enumerate(m):
            if var == v:
                exp = e
                rest = m[:i] + m[i + 1:]
                break
        if exp > degree_bound:
            raise ShiftBoundError(
                f"degree {exp} in {v} exceeds the declared bound {degree_bound}")
        for j in range(exp + 1):
            value = coef * comb(exp, j) * c ** (exp - j)
            key = rest if j == 0 else mono_mul(rest, ((v, j),))
            acc = out.get(key, 0) + value
            if acc:
                out[key] = acc
            else:
                out.pop(key, None)
    return TruncSeries(a.window, out, a.valid_order, a.level_trust)


def s_coeff(a: TruncSeries, m: Mono) -> Fraction:
    if mono_degree(m) > a.valid_order:
        raise UntrustedCoefficientError(
            f"coefficient of {mono_str(m)} is above valid_order {a.valid_order}")
    if mono_max_level(m) > a.level_trust:
        raise UntrustedCoefficientError(
            f"coefficient of {mono_str(m)} is above level_trust {a.level_trust}")
    return Fraction(a.terms.get(m, 0))


def s_inverse(a: TruncSeries) -> TruncSeries:
    """Multiplicative inverse of a series with invertible constant term.

    Only meaningful at finite valid_order (the result is truncated there).
    """
    c0 = a.terms.get(MONO_ONE, Fraction(0))
    if c0 == 0:
        raise ZeroDivisionError("series has no constant term; not invertible")
    if a.valid_order >= ORDER_EXACT:
        raise ValueError("inverse needs a finite valid_order to truncate at")
    one = TruncSeries.const(a.window, 1, a.valid_order)
    # w has no constant term, so the geometric series terminates.
    w = (one - a.scale(Fraction(1, 1) / c0)).with_trust(a.level_trust)
    acc = one.with_trust(a.level_trust)
    power = acc
    for _ in range(a.valid_order):
        power = power * w
        if power.is_stored_zero():
            break
        acc = acc + power
    return acc.scale(Fraction(1, 1) / c0)


# ---------------------------------------------------------------------------
# trusted-region comparisons
# ---------------------------------------------------------------------------

def trusted_terms(a: TruncSeries) -> dict[Mono, Fraction]:
    """The stored terms inside the doubly trusted region."""
    return {m: c for m, c in a.terms.items()
            if mono_degree(m) <= a.valid_order
            and mono_max_level(m) <= a.level_trust}


def first_bad_monomial(a: TruncSeries):
    """First (lexicographically smallest, lowest degree) nonzero trusted
    coefficient, or None if the series vanishes on its trusted region.

    Raises CapacityError if the trusted region is empty, so a residual
    check can never pass vacuously.
    """
    if a.valid_order < 0 or a.level_trust < 0:
        raise CapacityError(
            f"empty trusted region (order {a.valid_order}, level {a.level_trust})")
    bad = trusted_terms(a)
    if not bad:
        return None
    key = min(bad, key=lambda m: (mono_degree(m), m))
    return key, bad[key]


def series_match(a: TruncSeries, b: TruncSeries):
    """Compare two series on the intersection of their trusted regions.

    Returns None on agreement, otherwise (monomial, a_value, b_value).
    """
    diff = first_bad_monomial(a - b)
    if diff is None:
        return None
    m, _ = diff
    return m, a.terms.get(m, Fraction(0)), b.terms.get(m, Fraction(0))
