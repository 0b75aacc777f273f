"""Unit and property tests for the truncated series core."""
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bigphase import _series_fallback
from bigphase.series import (
    ORDER_EXACT,
    CapacityError,
    ShiftBoundError,
    TruncSeries,
    UntrustedCoefficientError,
    VarWindow,
    WindowMismatchError,
    first_bad_monomial,
    mono_degree,
    mono_from_pairs,
    mono_max_level,
    s_coeff,
    s_inverse,
    s_partial,
    s_shift,
    series_match,
    trusted_terms,
)

try:
    from bigphase import _series_kernel
except ImportError:
    _series_kernel = None

W = VarWindow(3, 2)


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------

fractions = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 7))

var_ids = st.tuples(st.integers(0, W.max_level), st.integers(1, W.num_classes))

monomials = st.lists(st.tuples(var_ids, st.integers(1, 3)), max_size=3).map(
    mono_from_pairs)


@st.composite
def polynomials(draw):
    """Exact polynomial series over the fixed test window."""
    terms = draw(st.dictionaries(monomials, fractions, max_size=5))
    terms = {m: c for m, c in terms.items() if c != 0}
    return TruncSeries(W, terms, ORDER_EXACT)


# ---------------------------------------------------------------------------
# ring axioms
# ---------------------------------------------------------------------------

@given(polynomials(), polynomials(), polynomials())
def test_mul_associative(a, b, c):
    assert ((a * b) * c).terms == (a * (b * c)).terms


@given(polynomials(), polynomials())
def test_mul_commutative(a, b):
    assert (a * b).terms == (b * a).terms


@given(polynomials(), polynomials(), polynomials())
def test_distributive(a, b, c):
    assert (a * (b + c)).terms == (a * b + a * c).terms


@given(polynomials())
def test_additive_inverse(a):
    assert (a + (-a)).is_stored_zero()


@given(polynomials())
def test_units(a):
    one = TruncSeries.const(W, 1)
    zero = TruncSeries.zero(W)
    assert (a * one).terms == a.terms
    assert (a + zero).terms == a.terms
    assert (a * zero).is_stored_zero()


@given(polynomials(), st.integers(0, 6))
def test_truncated_product_matches_exact(a, b_order):
    b = a.with_order(b_order)
    full = (a * a).terms
    cut = (b * b).terms
    assert cut == {m: c for m, c in full.items() if mono_degree(m) <= b_order}


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------

@given(polynomials(), polynomials(), var_ids)
def test_partial_is_linear(a, b, v):
    assert s_partial(a + b, v).terms == (s_partial(a, v) + s_partial(b, v)).terms


@given(polynomials(), polynomials(), var_ids)
def test_partial_leibniz(a, b, v):
    lhs = s_partial(a * b, v)
    rhs = s_partial(a, v) * b + a * s_partial(b, v)
    assert lhs.terms == rhs.terms


@given(polynomials(), var_ids, var_ids)
def test_partials_commute(a, v, w):
    assert s_partial(s_partial(a, v), w).terms == s_partial(s_partial(a, w), v).terms


def test_partial_drops_order_and_trust():
    a = TruncSeries(W, {mono_from_pairs([((3, 1), 2)]): Fraction(1)}, 4,
                    level_trust=2)
    d = s_partial(a, (3, 1))
    assert d.valid_order == 3
    assert d.level_trust == -1  # differentiated along an untrusted level
    d2 = s_partial(a, (0, 1))
    assert d2.level_trust == 2


# ---------------------------------------------------------------------------
# Taylor shift
# ---------------------------------------------------------------------------

@given(polynomials(), var_ids, fractions)
def test_shift_round_trip(a, v, c):
    shifted = s_shift(a, v, c, degree_bound=16)
    back = s_shift(shifted, v, -c, degree_bound=16)
    assert back.terms == a.terms


@given(polynomials(), var_ids, fractions, fractions)
def test_shift_composes(a, v, c1, c2):
    twice = s_shift(s_shift(a, v, c1, 16), v, c2, 16)
    once = s_shift(a, v, c1 + c2, 16)
    assert twice.terms == once.terms


def test_shift_bound_enforced():
    a = TruncSeries(W, {mono_from_pairs([((1, 1), 5)]): Fraction(1)}, ORDER_EXACT)
    with pytest.raises(ShiftBoundError):
        s_shift(a, (1, 1), 1, degree_bound=4)


def test_shift_constant_extraction():
    # (u + 2)^2 shifted by u -> u + 1 gives constant term 9
    u = TruncSeries.variable(W, (0, 1))
    two = TruncSeries.const(W, 2)
    p = (u + two) * (u + two)
    shifted = s_shift(p, (0, 1), 1, degree_bound=2)
    assert s_coeff(shifted, ()) == 9


# ---------------------------------------------------------------------------
# trust bookkeeping and coefficient access
# ---------------------------------------------------------------------------

def test_coeff_outside_order_raises():
    a = TruncSeries(W, {}, 2)
    with pytest.raises(UntrustedCoefficientError):
        s_coeff(a, mono_from_pairs([((0, 1), 3)]))


def test_coeff_outside_trust_raises():
    a = TruncSeries(W, {}, 5, level_trust=1)
    with pytest.raises(UntrustedCoefficientError):
        s_coeff(a, mono_from_pairs([((2, 1), 1)]))
    assert s_coeff(a, mono_from_pairs([((1, 2), 1)])) == 0


@given(polynomials(), polynomials())
def test_binary_ops_take_min_trust(a, b):
    a = a.with_trust(2).with_order(5)
    b = b.with_trust(1).with_order(4)
    assert (a + b).level_trust == 1
    assert (a * b).level_trust == 1
    assert (a * b).valid_order == 4


def test_min_term_level_conventions():
    assert TruncSeries.zero(W).min_term_level() == W.max_level + 1
    assert TruncSeries.const(W, 3).min_term_level() == -1
    s = TruncSeries(W, {mono_from_pairs([((2, 1), 1), ((0, 1), 1)]): Fraction(1)},
                    ORDER_EXACT)
    assert s.min_term_level() == 2


def test_window_mismatch_rejected():
    other = TruncSeries.const(VarWindow(2, 1), 1)
    with pytest.raises(WindowMismatchError):
        TruncSeries.const(W, 1) + other


# ---------------------------------------------------------------------------
# trusted-region comparison helpers
# ---------------------------------------------------------------------------

def test_first_bad_monomial_reports_lowest_degree():
    m1 = mono_from_pairs([((0, 1), 1)])
    m2 = mono_from_pairs([((0, 1), 2)])
    a = TruncSeries(W, {m2: Fraction(5), m1: Fraction(3)}, 4)
    assert first_bad_monomial(a) == (m1, Fraction(3))


def test_first_bad_monomial_ignores_untrusted_levels():
    bad_high = mono_from_pairs([((3, 1), 1)])
    a = TruncSeries(W, {bad_high: Fraction(1)}, 4, level_trust=2)
    assert first_bad_monomial(a) is None
    assert trusted_terms(a) == {}


def test_empty_trusted_region_is_an_error():
    a = TruncSeries(W, {}, 4, level_trust=-1)
    with pytest.raises(CapacityError):
        first_bad_monomial(a)


def test_series_match_reports_offender():
    m = mono_from_pairs([((1, 1), 1)])
    a = TruncSeries(W, {m: Fraction(2)}, 3)
    b = TruncSeries(W, {m: Fraction(5)}, 3)
    assert series_match(a, a) is None
    assert series_match(a, b) == (m, Fraction(2), Fraction(5))


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------

@given(polynomials(), fractions.filter(lambda c: c != 0), st.integers(0, 5))
@settings(max_examples=50)
def test_inverse_is_right_inverse(a, c0, order):
    s = (a + TruncSeries.const(W, c0)).with_order(order)
    # make sure the constant term did not cancel away
    if s.terms.get((), Fraction(0)) == 0:
        s = s + TruncSeries.const(W, 1, order)
    inv = s_inverse(s)
    prod = s * inv
    assert trusted_terms(prod) == {(): Fraction(1)}


def test_inverse_requires_constant_term():
    u = TruncSeries.variable(W, (0, 1)).with_order(4)
    with pytest.raises(ZeroDivisionError):
        s_inverse(u)


# ---------------------------------------------------------------------------
# compiled kernel vs pure fallback
# ---------------------------------------------------------------------------

@pytest.mark.skipif(_series_kernel is None, reason="compiled kernel not built")
@given(st.dictionaries(monomials, fractions, max_size=5),
       st.dictionaries(monomials, fractions, max_size=5),
       st.integers(0, 8))
def test_kernels_agree(a_terms, b_terms, cap):
    a_terms = {m: c for m, c in a_terms.items() if c != 0}
    b_terms = {m: c for m, c in b_terms.items() if c != 0}
    fast = _series_kernel.mul_terms(a_terms, b_terms, cap)
    slow = _series_fallback.mul_terms(a_terms, b_terms, cap)
    assert fast == slow


@pytest.mark.skipif(_series_kernel is None, reason="compiled kernel not built")
@given(monomials, monomials)
def test_kernel_mono_mul_agrees(m1, m2):
    assert _series_kernel.mono_mul(m1, m2) == _series_fallback.mono_mul(m1, m2)


# ---------------------------------------------------------------------------
# monomial helpers
# ---------------------------------------------------------------------------

def test_mono_helpers():
    m = mono_from_pairs([((2, 1), 1), ((0, 2), 3), ((2, 1), 1)])
    assert mono_degree(m) == 5
    assert mono_max_level(m) == 2
    assert mono_max_level(()) == -1
    assert mono_from_pairs([((1, 1), 0)]) == ()
