"""Topological recursion relations and the genus-2 tensors A1, A2, B.

The genus-1 relation says <<T(W)>>_1 is a genus-0 quantity; the genus-2
relations express <<T^2(W)>>_2, the T-pair combination, and the triple
Belorousski-Pandharipande combination through the symmetric tensors A1,
A2, B built from genus-0 and genus-1 data only.

The module also carries a named catalog of identity checks: every
displayed identity of the calculus is evaluated as an exact-zero
residual on a Context.  Catalog ids are stable strings exposed to the
command line filter.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .fields import (
    Context,
    Gstar,
    VectorField,
    apply_field,
    bar,
    big_T,
    correlator,
    dilaton_field,
    euler_field,
    field_first_bad,
    nabla,
    qprod,
    string_field,
    tau_minus,
    xbar_power,
)
from .model import ModelError
from .series import (
    CapacityError,
    TruncSeries,
    first_bad_monomial,
    mono_str,
)
from .virasoro import rho, stau, virasoro_field


def _c(ctx: Context, g: int, *fields: VectorField) -> TruncSeries:
    return correlator(ctx, g, list(fields))


# ---------------------------------------------------------------------------
# the three symmetric tensors
# ---------------------------------------------------------------------------

def A1(ctx: Context, w: VectorField) -> TruncSeries:
    """Five-term genus-0/1 tensor governing <<T^2(W)>>_2; linear in W."""
    total = TruncSeries.zero(ctx.window)
    pairs = ctx.gamma_pairs()
    for up, down in pairs:
        gw = qprod(ctx, up, w)
        total = total + (_c(ctx, 1, down) * _c(ctx, 1, gw)).scale(
            Fraction(7, 10))
        total = total + _c(ctx, 1, down, gw).scale(Fraction(1, 10))
        total = total - _c(ctx, 1, w, qprod(ctx, down, up)).scale(
            Fraction(1, 240))
        for upb, downb in pairs:
            total = total + (_c(ctx, 0, w, down, up, upb)
                             * _c(ctx, 1, downb)).scale(Fraction(13, 240))
            total = total + _c(ctx, 0, w, up, down, upb, downb).scale(
                Fraction(1, 960))
    return total


def A2(ctx: Context, w: VectorField, v: VectorField) -> TruncSeries:
    """Symmetric bilinear genus-0/1 tensor governing the T-pair relation."""
    total = TruncSeries.zero(ctx.window)
    pairs = ctx.gamma_pairs()
    wv = qprod(ctx, w, v)
    for up, down in pairs:
        gw = qprod(ctx, down, w)
        gv = qprod(ctx, down, v)
        total = total + (_c(ctx, 1, w, up) * _c(ctx, 1, gv)).scale(
            Fraction(4, 5))
        total = total + (_c(ctx, 1, v, up) * _c(ctx, 1, gw)).scale(
            Fraction(4, 5))
        total = total - (_c(ctx, 1, wv, up) * _c(ctx, 1, down)).scale(
            Fraction(4, 5))
        total = total - _c(ctx, 1, w, v, qprod(ctx, up, down)).scale(
            Fraction(1, 80))
        total = total + _c(ctx, 1, down, qprod(ctx, up, w), v).scale(
            Fraction(1, 30))
        total = total + _c(ctx, 1, down, qprod(ctx, up, v), w).scale(
            Fraction(1, 30))
        total = total - _c(ctx, 1, wv, down, up).scale(Fraction(1, 30))
        for upb, downb in pairs:
            total = total + (_c(ctx, 0, w, v, up, upb) * _c(ctx, 1, down)
                             * _c(ctx, 1, downb)).scale(Fraction(13, 10))
            total = total + (_c(ctx, 0, w, v, up, down, upb)
                             * _c(ctx, 1, downb)).scale(Fraction(23, 240))
            total = total + (_c(ctx, 0, w, up, down, upb)
                             * _c(ctx, 1, downb, v)).scale(Fraction(1, 48))
            total = total + (_c(ctx, 0, v, up, down, upb)
                             * _c(ctx, 1, downb, w)).scale(Fraction(1, 48))
            total = total + (_c(ctx, 0, w, v, up, upb)
                             * _c(ctx, 1, down, downb)).scale(Fraction(7, 30))
            total = total + _c(ctx, 0, w, v, up, down, upb, downb).scale(
                Fraction(1, 576))
    return total


def Btensor(ctx: Context, w1: VectorField, w2: VectorField,
            w3: VectorField) -> TruncSeries:
    """Totally symmetric trilinear genus-0/1 tensor of the triple relation."""
    total = TruncSeries.zero(ctx.window)
    pairs = ctx.gamma_pairs()
    for up, down in pairs:
        total = total - _c(ctx, 1, w1, w2, w3,
                           qprod(ctx, up, down)).scale(Fraction(1, 120))
        for upb, downb in pairs:
            total = total + (_c(ctx, 0, w1, w2, w3, up, upb)
                             * _c(ctx, 1, down) * _c(ctx, 1, downb)).scale(
                Fraction(1, 5))
            total = total - (_c(ctx, 0, w1, w2, w3, up)
                             * _c(ctx, 1, down, upb) * _c(ctx, 1, downb)
                             ).scale(Fraction(6, 5))
            total = total + (_c(ctx, 0, w1, w2, w3, up, down, upb)
                             * _c(ctx, 1, downb)).scale(Fraction(1, 120))
            total = total + (_c(ctx, 0, w1, w2, w3, up, upb)
                             * _c(ctx, 1, down, downb)).scale(Fraction(1, 10))
            total = total - (_c(ctx, 0, w1, w2, w3, up)
                             * _c(ctx, 1, down, upb, downb)).scale(
                Fraction(1, 20))
    for s1, s2, s3 in itertools.permutations((w1, w2, w3)):
        s23 = qprod(ctx, s2, s3)
        for up, down in pairs:
            total = total + (_c(ctx, 1, qprod(ctx, s1, down))
                             * _c(ctx, 1, up, s2, s3)).scale(Fraction(2, 5))
            total = total - (_c(ctx, 1, s1, qprod(ctx, s2, up))
                             * _c(ctx, 1, down, s3)).scale(Fraction(3, 5))
            total = total + (_c(ctx, 1, s1, down)
                             * _c(ctx, 1, up, s23)).scale(Fraction(3, 10))
            total = total - (_c(ctx, 1, down)
                             * _c(ctx, 1, up, s1, s23)).scale(Fraction(1, 5))
            total = total + _c(ctx, 1, s1, s2, down,
                               qprod(ctx, up, s3)).scale(Fraction(1, 60))
            total = total - _c(ctx, 1, s1, up, down, s23).scale(
                Fraction(1, 120))
            for upb, downb in pairs:
                total = total - (_c(ctx, 0, s1, s2, up, upb)
                                 * _c(ctx, 1, down) * _c(ctx, 1, downb, s3)
                                 ).scale(Fraction(1, 5))
                total = total - (_c(ctx, 0, s1, s2, up, down, upb)
                                 * _c(ctx, 1, downb, s3)).scale(
                    Fraction(1, 80))
                total = total + (_c(ctx, 0, s1, up, down, upb)
                                 * _c(ctx, 1, downb, s2, s3)).scale(
                    Fraction(1, 80))
                total = total - (_c(ctx, 1, s1, down, downb)
                                 * _c(ctx, 0, up, upb, s2, s3)).scale(
                    Fraction(1, 20))
    return total


def nabla_A1(ctx: Context, w: VectorField, v: VectorField) -> TruncSeries:
    """Covariant derivative of the A1 tensor: W(A1(V)) - A1(nabla_W V)."""
    return apply_field(w, A1(ctx, v)) - A1(ctx, nabla(ctx, w, v))


# ---------------------------------------------------------------------------
# recursion relation residuals (left minus right; zero on consistent data)
# ---------------------------------------------------------------------------

def trr_g1_residual(ctx: Context, w: VectorField) -> TruncSeries:
    """<<T(W)>>_1 - (1/24) sum <<W gamma^mu gamma_mu>>_0."""
    res = _c(ctx, 1, big_T(ctx, w))
    for up, down in ctx.gamma_pairs():
        res = res - _c(ctx, 0, w, up, down).scale(Fraction(1, 24))
    return res


def trr_g1_der1_residual(ctx: Context, w: VectorField,
                         v: VectorField) -> TruncSeries:
    """First derivative of the genus-1 relation."""
    res = _c(ctx, 1, big_T(ctx, w), v) - _c(ctx, 1, qprod(ctx, w, v))
    for up, down in ctx.gamma_pairs():
        res = res - _c(ctx, 0, w, v, up, down).scale(Fraction(1, 24))
    return res


def trr_g1_der2_residual(ctx: Context, w: VectorField, v1: VectorField,
                         v2: VectorField) -> TruncSeries:
    """Second derivative of the genus-1 relation."""
    res = (_c(ctx, 1, big_T(ctx, w), v1, v2)
           - _c(ctx, 1, qprod(ctx, w, v1), v2)
           - _c(ctx, 1, qprod(ctx, w, v2), v1))
    for up, down in ctx.gamma_pairs():
        res = res - _c(ctx, 0, w, v1, v2, up) * _c(ctx, 1, down)
        res = res - _c(ctx, 0, w, v1, v2, up, down).scale(Fraction(1, 24))
    return res


def trr1_residual(ctx: Context, w: VectorField) -> TruncSeries:
    """<<T^2(W)>>_2 - A1(W)."""
    return _c(ctx, 2, big_T(ctx, big_T(ctx, w))) - A1(ctx, w)


def trr2_residual(ctx: Context, w: VectorField, v: VectorField) -> TruncSeries:
    """<<T(W) T(V)>>_2 - 3<<T(W bullet V)>>_2 - A2(W, V)."""
    return (_c(ctx, 2, big_T(ctx, w), big_T(ctx, v))
            - _c(ctx, 2, big_T(ctx, qprod(ctx, w, v))).scale(3)
            - A2(ctx, w, v))


def bp_residual(ctx: Context, w1: VectorField, w2: VectorField,
                w3: VectorField) -> TruncSeries:
    """The eight-term genus-2 triple combination minus B(W1, W2, W3)."""
    res = _c(ctx, 2, qprod(ctx, qprod(ctx, w1, w2), w3)).scale(2)
    for up, down in ctx.gamma_pairs():
        res = res - (_c(ctx, 0, w1, w2, w3, up)
                     * _c(ctx, 2, big_T(ctx, down))).scale(2)
    for a, b, c in ((w1, w2, w3), (w2, w1, w3), (w3, w1, w2)):
        res = res - _c(ctx, 2, big_T(ctx, a), qprod(ctx, b, c))
        res = res + _c(ctx, 2, a, big_T(ctx, qprod(ctx, b, c)))
    return res - Btensor(ctx, w1, w2, w3)


def trr2_residuals(ctx: Context, kind: str,
                   *fields: VectorField) -> TruncSeries:
    """Dispatch over the three genus-2 residual families."""
    if kind == "trr1":
        return trr1_residual(ctx, *fields)
    if kind == "trr2":
        return trr2_residual(ctx, *fields)
    if kind == "bp":
        return bp_residual(ctx, *fields)
    raise ModelError(f"unknown genus-2 relation kind {kind!r}")


def trr1_raw_residual(ctx: Context, i: int, cls: int) -> TruncSeries:
    """Literal coordinate form of the first genus-2 relation.

    Kept as an independent transcription (no operator calculus) to guard
    the operator form against a common-mode translation error.
    """
    if i < 0:
        raise ModelError("the coordinate form needs i >= 0")
    window = ctx.window
    x_i = VectorField.basis(window, (i, cls))
    x_i1 = VectorField.basis(window, (i + 1, cls))
    x_i2 = VectorField.basis(window, (i + 2, cls))
    res = _c(ctx, 2, x_i2)
    for up, down in ctx.gamma_pairs():
        res = res - _c(ctx, 0, x_i1, up) * _c(ctx, 2, down)
        res = res - _c(ctx, 0, x_i, up) * _c(ctx, 2, _tau1(ctx, down))
        for upb, downb in ctx.gamma_pairs():
            res = res + (_c(ctx, 0, x_i, up) * _c(ctx, 0, down, upb)
                         * _c(ctx, 2, downb))
            res = res - (_c(ctx, 0, x_i, up, upb) * _c(ctx, 1, down)
                         * _c(ctx, 1, downb)).scale(Fraction(7, 10))
            res = res - (_c(ctx, 0, x_i, up, upb)
                         * _c(ctx, 1, down, downb)).scale(Fraction(1, 10))
            res = res + (_c(ctx, 1, x_i, down)
                         * _c(ctx, 0, up, downb, upb)).scale(Fraction(1, 240))
            res = res - (_c(ctx, 0, x_i, down, up, upb)
                         * _c(ctx, 1, downb)).scale(Fraction(13, 240))
            res = res - _c(ctx, 0, x_i, up, down, upb, downb).scale(
                Fraction(1, 960))
    return res


def _tau1(ctx: Context, primary: VectorField) -> VectorField:
    """Shift a primary combination up one level."""
    comps = {(1, v[1]): s for v, s in primary.components.items()}
    return VectorField(ctx.window, comps, primary.level_trust)


def trrex_residual(ctx: Context, g: int, w: VectorField) -> TruncSeries:
    """<<T^{3g-1}(W)>>_g; vanishes identically for g = 1, 2."""
    if g not in (1, 2):
        raise ModelError("the iterated-T vanishing is checked for g in {1,2}")
    out = w
    for _ in range(3 * g - 1):
        out = big_T(ctx, out)
    return _c(ctx, g, out)


# ---------------------------------------------------------------------------
# identity catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityCheck:
    id: str
    description: str
    arity: str
    needs_f2: bool
    evaluate: Callable[[Context], list]


@dataclass(frozen=True)
class CheckResult:
    id: str
    status: str  # "pass" | "fail" | "skip"
    detail: str | None = None


def _first_offense(residual) -> str | None:
    """Lexicographically-first nonzero trusted monomial, rendered."""
    if isinstance(residual, VectorField):
        hit = field_first_bad(residual)
        if hit is None:
            return None
        v, mono, coeff = hit
        return f"component d[{v[0]},{v[1]}] at {mono_str(mono)}: {coeff}"
    hit = first_bad_monomial(residual)
    if hit is None:
        return None
    mono, coeff = hit
    return f"{mono_str(mono)}: {coeff}"


def _psi(ctx: Context, k: int) -> TruncSeries:
    """<<Xbar^k>>_2 - <<T(bar(tau_-(L_{k-1})))>>_2."""
    return (_c(ctx, 2, xbar_power(ctx, k))
            - _c(ctx, 2, big_T(ctx, stau(ctx, 1, k - 1))))


def _l1l2_rhs(ctx: Context) -> TruncSeries:
    """Genus-0/1 expression the L1-constraint forces psi_3 to equal."""
    x = euler_field(ctx)
    tx = big_T(ctx, x)
    tl1 = tau_minus(virasoro_field(ctx, 1))
    return ((A1(ctx, nabla(ctx, tx, tau_minus(tl1)))
             + A2(ctx, x, tl1)).scale(Fraction(3, 2))
            + Btensor(ctx, x, x, x).scale(Fraction(1, 2))
            - apply_field(tx, rho(ctx, 2, 1)).scale(Fraction(3, 2)))


def _a1_of_dilaton(ctx: Context) -> TruncSeries:
    out = TruncSeries.zero(ctx.window)
    pairs = ctx.gamma_pairs()
    for up, down in pairs:
        out = out + _c(ctx, 1, qprod(ctx, up, down)).scale(Fraction(1, 20))
        for upb, downb in pairs:
            out = out + _c(ctx, 0, down, up, downb, upb).scale(
                Fraction(1, 480))
    return out


def _a1_of_l0(ctx: Context) -> TruncSeries:
    x = euler_field(ctx)
    model = ctx.model
    out = TruncSeries.zero(ctx.window)
    pairs = ctx.gamma_pairs()
    for up, down in pairs:
        xg = qprod(ctx, x, up)
        out = out - (_c(ctx, 1, xg) * _c(ctx, 1, down)).scale(Fraction(7, 10))
        out = out - _c(ctx, 1, xg, down).scale(Fraction(1, 10))
        for b, (upb, downb) in enumerate(pairs):
            out = out + (_c(ctx, 0, up, down, upb) * _c(ctx, 1, downb)).scale(
                Fraction(7 * model.b[b] - 13, 120))
            out = out - _c(ctx, 0, down, up, downb, upb).scale(
                Fraction(1, 480))
    return out


def _x2g1_residuals(ctx: Context) -> list:
    model = ctx.model
    pairs = ctx.gamma_pairs()
    x = euler_field(ctx)
    x2 = xbar_power(ctx, 2)
    tl1 = tau_minus(virasoro_field(ctx, 1))
    out = []
    # one-point display, one residual per free upper index
    for a, (up, down) in enumerate(pairs):
        ba = model.b[a]
        res = _c(ctx, 1, x2, up) - _c(ctx, 1, qprod(ctx, tl1, up))
        for b, (upb, downb) in enumerate(pairs):
            bb = model.b[b]
            res = res - (_c(ctx, 0, x, up, upb)
                         * _c(ctx, 1, downb)).scale(1 - ba + bb)
            res = res - _c(ctx, 0, up, downb, upb).scale(
                Fraction(bb * (1 - bb), 2) + Fraction((1 - ba) * (2 - ba), 24))
            res = res - _c(ctx, 0, tl1, up, downb, upb).scale(Fraction(1, 24))
        out.append((f"one-point, class {a + 1}", res))
    # two-point display, indices contracted on both sides
    res = TruncSeries.zero(ctx.window)
    for a, (up, down) in enumerate(pairs):
        ba = model.b[a]
        res = res + _c(ctx, 1, x2, up, down)
        res = res - _c(ctx, 1, qprod(ctx, tl1, up), down).scale(2)
        for b, (upb, downb) in enumerate(pairs):
            bb = model.b[b]
            res = res - (_c(ctx, 0, x, up, upb)
                         * _c(ctx, 1, down, downb)).scale(2 * (1 - ba + bb))
            res = res - (_c(ctx, 0, up, down, upb)
                         * _c(ctx, 1, downb)).scale(
                (1 - ba + bb) * (2 - ba - bb) + ba * (ba + 1))
            res = res - _c(ctx, 0, down, up, downb, upb).scale(
                Fraction(bb * (1 - bb), 2)
                + Fraction((1 - ba) * (2 - ba), 24)
                + Fraction(ba * (ba + 1), 24))
            res = res - (_c(ctx, 0, tl1, up, down, upb)
                         * _c(ctx, 1, downb))
            res = res - _c(ctx, 0, tl1, down, up, downb, upb).scale(
                Fraction(1, 24))
    out.append(("two-point, contracted", res))
    return out


def _three_a2_bxxx_residual(ctx: Context) -> TruncSeries:
    model = ctx.model
    b1 = model.b[0]
    pairs = ctx.gamma_pairs()
    x = euler_field(ctx)
    tl1 = tau_minus(virasoro_field(ctx, 1))
    tl2 = tau_minus(tau_minus(virasoro_field(ctx, 2)))
    lhs = A2(ctx, x, tl1).scale(3) + Btensor(ctx, x, x, x)
    rhs = A1(ctx, tl2).scale(5) - A1(ctx, tl1).scale(3 * (b1 + 1))
    for a, (up, down) in enumerate(pairs):
        ba = model.b[a]
        for b, (upb, downb) in enumerate(pairs):
            bb = model.b[b]
            rhs = rhs + (_c(ctx, 0, x, up, upb) * _c(ctx, 1, down)
                         * _c(ctx, 1, downb)).scale(
                Fraction(5 * ba * (ba + bb) - 5 * ba + 21 * (b1 + 1), 5))
            rhs = rhs + (_c(ctx, 0, x, up, upb)
                         * _c(ctx, 1, down, downb)).scale(
                Fraction(10 * ba * (ba + bb) - 10 * ba + 6 * (b1 + 1), 10))
            rhs = rhs + (_c(ctx, 0, up, down, upb)
                         * _c(ctx, 1, downb)).scale(Fraction(
                             -5 * bb ** 3 - 15 * b1 * bb ** 2 - 27 * b1 * bb
                             - 37 * bb + 114 * (b1 + 1)
                             + 180 * (bb + b1 + 1) * ba * (1 - ba), 120))
            rhs = rhs + _c(ctx, 0, down, up, downb, upb).scale(
                Fraction(b1 + 1, 40) * (-5 * ba ** 2 + 5 * ba + 1))
    return lhs - rhs


def _txg1l1_residual(ctx: Context) -> TruncSeries:
    model = ctx.model
    b1 = model.b[0]
    pairs = ctx.gamma_pairs()
    x = euler_field(ctx)
    lhs = -apply_field(big_T(ctx, x), rho(ctx, 2, 1))
    rhs = TruncSeries.zero(ctx.window)
    for a, (up, down) in enumerate(pairs):
        ba = model.b[a]
        xg = qprod(ctx, x, up)
        rhs = rhs + (_c(ctx, 1, xg) * _c(ctx, 1, down)
                     + _c(ctx, 1, xg, down)).scale(ba * (1 - ba))
        for b, (upb, downb) in enumerate(pairs):
            bb = model.b[b]
            rhs = rhs + (_c(ctx, 0, up, down, upb)
                         * _c(ctx, 1, downb)).scale(
                Fraction(1, 2) * (ba * (1 - ba) + Fraction(bb * (1 - bb), 12))
                * (1 - b1 - bb))
            rhs = rhs - _c(ctx, 0, down, up, downb, upb).scale(
                Fraction(b1 * ba * (1 - ba), 24))
    return lhs - rhs


def _g2l2v2_rhs(ctx: Context) -> TruncSeries:
    model = ctx.model
    pairs = ctx.gamma_pairs()
    x = euler_field(ctx)
    rhs = TruncSeries.zero(ctx.window)
    for a, (up, down) in enumerate(pairs):
        ba = model.b[a]
        for b, (upb, downb) in enumerate(pairs):
            bb = model.b[b]
            rhs = rhs + (_c(ctx, 0, x, up, upb)
                         * (_c(ctx, 1, down) * _c(ctx, 1, downb)
                            + _c(ctx, 1, down, downb))).scale(
                Fraction(-2 * ba ** 2 + 2 * ba + ba * bb, 2))
            rhs = rhs + (_c(ctx, 0, up, down, upb)
                         * _c(ctx, 1, downb)).scale(
                Fraction(3, 2) * ba * (1 - ba)
                + Fraction(bb * (1 - bb) * (2 - bb), 24))
            rhs = rhs + _c(ctx, 0, down, up, downb, upb).scale(
                Fraction(ba * (1 - ba), 16))
    return rhs


def _catalog() -> list[IdentityCheck]:
    def gam(ctx):
        return ctx.gamma(1)

    def tau(ctx, m):
        return VectorField.basis(ctx.window, (m, 1))

    def e_trr_g1(ctx):
        return [("W=gamma", trr_g1_residual(ctx, gam(ctx))),
                ("W=tau2", trr_g1_residual(ctx, tau(ctx, 2))),
                ("W=S", trr_g1_residual(ctx, string_field(ctx)))]

    def e_trr_g1_der1(ctx):
        return [("(gamma,gamma)",
                 trr_g1_der1_residual(ctx, gam(ctx), gam(ctx))),
                ("(tau1,gamma)",
                 trr_g1_der1_residual(ctx, tau(ctx, 1), gam(ctx)))]

    def e_trr_g1_der2(ctx):
        return [("(gamma,gamma,gamma)",
                 trr_g1_der2_residual(ctx, gam(ctx), gam(ctx), gam(ctx))),
                ("(tau1,gamma,tau1)",
                 trr_g1_der2_residual(ctx, tau(ctx, 1), gam(ctx),
                                      tau(ctx, 1)))]

    def e_trr1(ctx):
        return [("W=gamma", trr1_residual(ctx, gam(ctx))),
                ("W=tau1", trr1_residual(ctx, tau(ctx, 1))),
                ("W=S", trr1_residual(ctx, string_field(ctx)))]

    def e_trr1_raw(ctx):
        out = []
        for i in (0, 1):
            for cls in range(1, ctx.model.num_classes + 1):
                out.append((f"i={i}, class {cls}",
                            trr1_raw_residual(ctx, i, cls)))
        return out

    def e_trr2(ctx):
        return [("(gamma,gamma)", trr2_residual(ctx, gam(ctx), gam(ctx))),
                ("(gamma,tau1)", trr2_residual(ctx, gam(ctx), tau(ctx, 1))),
                ("(S,gamma)",
                 trr2_residual(ctx, string_field(ctx), gam(ctx)))]

    def e_bp(ctx):
        g = gam(ctx)
        return [("(g,g,g)", bp_residual(ctx, g, g, g)),
                ("(g,g,tau1)", bp_residual(ctx, g, g, tau(ctx, 1))),
                ("(S,T(g),g)",
                 bp_residual(ctx, string_field(ctx), big_T(ctx, g), g))]

    def e_trrex_g1(ctx):
        return [("W=gamma", trrex_residual(ctx, 1, gam(ctx))),
                ("W=S", trrex_residual(ctx, 1, string_field(ctx)))]

    def e_trrex_g2(ctx):
        return [("W=gamma", trrex_residual(ctx, 2, gam(ctx))),
                ("W=S", trrex_residual(ctx, 2, string_field(ctx)))]

    def e_t2vw(ctx):
        out = []
        for label, v, w in (("(gamma,tau1)", gam(ctx), tau(ctx, 1)),
                            ("(gamma,gamma)", gam(ctx), gam(ctx))):
            res = (_c(ctx, 2, big_T(ctx, big_T(ctx, v)), w)
                   - _c(ctx, 2, big_T(ctx, qprod(ctx, v, w)))
                   - nabla_A1(ctx, w, v))
            out.append((label, res))
        return out

    def e_tvtsw(ctx):
        v, w = gam(ctx), tau(ctx, 1)
        res = (_c(ctx, 2, big_T(ctx, v), big_T(ctx, bar(ctx, w)))
               - _c(ctx, 2, big_T(ctx, v), big_T(ctx, w))
               + nabla_A1(ctx, big_T(ctx, v), tau_minus(w)))
        return [("(gamma,tau1)", res)]

    def e_a1a2(ctx):
        out = []
        for label, v, w in (("(gamma,gamma)", gam(ctx), gam(ctx)),
                            ("(gamma,tau1)", gam(ctx), tau(ctx, 1)),
                            ("(tau1,gamma)", tau(ctx, 1), gam(ctx))):
            res = (A2(ctx, v, big_T(ctx, w))
                   - nabla_A1(ctx, big_T(ctx, v), w))
            out.append((label, res))
        return out

    def e_a1a2str(ctx):
        s = string_field(ctx)
        d = dilaton_field(ctx)
        out = []
        for label, w in (("W=tau1", tau(ctx, 1)), ("W=tau2", tau(ctx, 2))):
            out.append((f"string pairing, {label}",
                        A2(ctx, s, w) - A1(ctx, tau_minus(w)).scale(3)))
        out.append(("primary argument", A2(ctx, s, gam(ctx))))
        for label, w in (("W=gamma", gam(ctx)), ("W=tau1", tau(ctx, 1))):
            out.append((f"dilaton scaling, {label}",
                        nabla_A1(ctx, d, w) - A1(ctx, w).scale(3)))
        return out

    def e_ab(ctx):
        out = []
        for label, w1, w2, v in (
                ("(gamma,gamma;gamma)", gam(ctx), gam(ctx), gam(ctx)),
                ("(gamma,tau1;gamma)", gam(ctx), tau(ctx, 1), gam(ctx))):
            w12 = qprod(ctx, w1, w2)
            res = (Btensor(ctx, w1, w2, big_T(ctx, v))
                   - A2(ctx, w12, v) + nabla_A1(ctx, w12, v))
            out.append((label, res))
        return out

    def e_a1wwbar(ctx):
        out = []
        for label, w in (("W=tau1", tau(ctx, 1)), ("W=tau2", tau(ctx, 2))):
            b1w = bar(ctx, tau_minus(w))
            b2w = bar(ctx, tau_minus(tau_minus(w)))
            res = A1(ctx, w) - A1(ctx, bar(ctx, w))
            for up, down in ctx.gamma_pairs():
                res = res - _c(ctx, 1, qprod(ctx, qprod(ctx, b1w, down),
                                             up)).scale(Fraction(1, 20))
                for upb, downb in ctx.gamma_pairs():
                    res = res - _c(ctx, 0, qprod(ctx, b1w, down), up,
                                   downb, upb).scale(Fraction(1, 480))
                    res = res - _c(ctx, 0, b1w, qprod(ctx, down, up),
                                   downb, upb).scale(Fraction(1, 1152))
                    res = res - _c(ctx, 0, qprod(ctx, qprod(ctx, b2w, down),
                                                 up),
                                   downb, upb).scale(Fraction(1, 1152))
            out.append((label, res))
        return out

    def e_strdil2(ctx):
        s = string_field(ctx)
        d = dilaton_field(ctx)
        out = []
        for label, w in (("W=gamma", gam(ctx)), ("W=tau1", tau(ctx, 1))):
            out.append((f"string, {label}",
                        _c(ctx, 2, s, w) - _c(ctx, 2, tau_minus(w))))
            out.append((f"dilaton, {label}",
                        _c(ctx, 2, d, w) - _c(ctx, 2, w).scale(3)))
        return out

    def e_virg2(ctx):
        out = []
        for k in (0, 1):
            lk = virasoro_field(ctx, k)
            res = (_c(ctx, 2, lk) + _c(ctx, 2, xbar_power(ctx, k + 1))
                   - _c(ctx, 2, big_T(ctx, stau(ctx, 1, k)))
                   - A1(ctx, tau_minus(tau_minus(lk))))
            out.append((f"k={k}", res))
        return out

    def e_bpxxx(ctx):
        x = euler_field(ctx)
        b1 = ctx.model.b[0]
        x2 = xbar_power(ctx, 2)
        v1 = x2.scale(3 * (3 * b1 + 2)) - Gstar(ctx.model, x2).scale(3)
        for up, down in ctx.gamma_pairs():
            v1 = v1 + down.scale(_c(ctx, 0, x, x, x, up).scale(2))
        v1_alt = (stau(ctx, 1, 2).scale(2)
                  - qprod(ctx, x, stau(ctx, 1, 1)).scale(9)
                  - nabla(ctx, big_T(ctx, x), stau(ctx, 1, 1)).scale(3))
        res = (Btensor(ctx, x, x, x)
               - _c(ctx, 2, xbar_power(ctx, 3)).scale(2)
               + apply_field(big_T(ctx, x), _c(ctx, 2, x2)).scale(3)
               + _c(ctx, 2, big_T(ctx, v1)))
        return [("scalar relation", res),
                ("alternative insertion field", v1 - v1_alt)]

    def e_l1l2(ctx):
        return [("psi_3 assembly", _psi(ctx, 3) - _l1l2_rhs(ctx))]

    def e_dertau2l1(ctx):
        x = euler_field(ctx)
        b1 = ctx.model.b[0]
        l1 = virasoro_field(ctx, 1)
        l2 = virasoro_field(ctx, 2)
        res = (nabla(ctx, big_T(ctx, x), tau_minus(tau_minus(l1)))
               + tau_minus(tau_minus(l2))
               - tau_minus(l1).scale(b1 + 1)
               - virasoro_field(ctx, 0).scale(2 * (b1 + 1))
               + dilaton_field(ctx).scale(2 * (b1 + 1)))
        return [("field identity", res)]

    def e_a1l0d(ctx):
        return [("dilaton argument",
                 A1(ctx, dilaton_field(ctx)) - _a1_of_dilaton(ctx)),
                ("grading argument",
                 A1(ctx, virasoro_field(ctx, 0)) - _a1_of_l0(ctx))]

    def e_3bto2b(ctx):
        model = ctx.model
        out = []
        for g in (0, 1):
            for label, extra in (("no insertions", []),
                                 ("one insertion", [gam(ctx)])):
                res = TruncSeries.zero(ctx.window)
                for a, (up, down) in enumerate(ctx.gamma_pairs()):
                    ba = model.b[a]
                    coeff = ba * (1 - ba ** 2) - Fraction(3, 2) * ba * (1 - ba)
                    if coeff:
                        res = res + _c(ctx, g, down, up, *extra).scale(coeff)
                out.append((f"g={g}, {label}", res))
        return out

    def e_g2l2v2(ctx):
        return [("rewritten anomaly", -rho(ctx, 2, 2) - _g2l2v2_rhs(ctx))]

    def e_psi3(ctx):
        l2 = virasoro_field(ctx, 2)
        prediction = A1(ctx, tau_minus(tau_minus(l2))) - rho(ctx, 2, 2)
        return [("prediction vs assembly", prediction - _l1l2_rhs(ctx))]

    return [
        IdentityCheck("trr-g1", "genus-1 recursion for T(W)", "W",
                      False, e_trr_g1),
        IdentityCheck("trr-g1-der1", "first derivative of the genus-1 "
                      "recursion", "W, V", False, e_trr_g1_der1),
        IdentityCheck("trr-g1-der2", "second derivative of the genus-1 "
                      "recursion", "W, V1, V2", False, e_trr_g1_der2),
        IdentityCheck("trr1", "genus-2 recursion for T^2(W)", "W",
                      True, e_trr1),
        IdentityCheck("trr1-raw", "coordinate transcription of the T^2 "
                      "recursion", "level i, class", True, e_trr1_raw),
        IdentityCheck("trr2", "genus-2 recursion for the T-pair", "W, V",
                      True, e_trr2),
        IdentityCheck("bp", "genus-2 triple-product recursion",
                      "W1, W2, W3", True, e_bp),
        IdentityCheck("trrex-g1", "<<T^2(W)>>_1 vanishes", "W",
                      False, e_trrex_g1),
        IdentityCheck("trrex-g2", "<<T^5(W)>>_2 vanishes", "W",
                      True, e_trrex_g2),
        IdentityCheck("lem:T2VW", "two-point form of the T^2 recursion",
                      "V, W", True, e_t2vw),
        IdentityCheck("cor:TVTSW", "T-pair with one primary projection",
                      "V, W", True, e_tvtsw),
        IdentityCheck("cor:A1A2", "A2 against the derivative of A1",
                      "V, W", False, e_a1a2),
        IdentityCheck("cor:A1A2str", "string and dilaton action on A1/A2",
                      "W", False, e_a1a2str),
        IdentityCheck("lem:AB", "B with a T-image argument reduces to "
                      "A2 and the derivative of A1", "W1, W2, V",
                      False, e_ab),
        IdentityCheck("eqn:A1WWbar", "A1 through the primary projection "
                      "of its argument", "W", False, e_a1wwbar),
        IdentityCheck("eqn:StrDil2pt", "genus-2 string and dilaton "
                      "two-point forms", "W", True, e_strdil2),
        IdentityCheck("eqn:Virg2", "genus-2 constraint split by the "
                      "level decomposition", "level k", True, e_virg2),
        IdentityCheck("eqn:BPXXX", "triple recursion at the Euler field",
                      "none", True, e_bpxxx),
        IdentityCheck("lem:L1L2", "psi_3 from genus-0/1 data given the "
                      "L1-constraint", "none", True, e_l1l2),
        IdentityCheck("lem:dertau-2L1", "T(X)-derivative of the "
                      "twice-lowered level-1 field", "none", False,
                      e_dertau2l1),
        IdentityCheck("lem:A1L0-D", "closed forms of A1 at the dilaton "
                      "and grading fields", "none", False, e_a1l0d),
        IdentityCheck("lem:X2g1", "genus-1 one- and two-point functions "
                      "of the quantum square of the Euler field", "none",
                      False, e_x2g1_entry),
        IdentityCheck("lem:3A2+BXXX", "combined A2/B evaluation at the "
                      "Euler field", "none", False, e_3a2bxxx_entry),
        IdentityCheck("lem:TXg1L1", "T(X)-derivative of the genus-2 "
                      "level-1 anomaly", "none", False, e_txg1l1_entry),
        IdentityCheck("lem:3bto2b", "cubic-to-quadratic grading weight "
                      "exchange", "insertions", False, e_3bto2b),
        IdentityCheck("lem:g2L2v2", "rewritten genus-2 level-2 anomaly",
                      "none", False, e_g2l2v2),
        IdentityCheck("psi3", "level-2 prediction equals the assembled "
                      "psi_3", "none", False, e_psi3),
    ]


def e_x2g1_entry(ctx: Context) -> list:
    return _x2g1_residuals(ctx)


def e_3a2bxxx_entry(ctx: Context) -> list:
    return [("scalar relation", _three_a2_bxxx_residual(ctx))]


def e_txg1l1_entry(ctx: Context) -> list:
    return [("scalar relation", _txg1l1_residual(ctx))]


CATALOG: list[IdentityCheck] = _catalog()
CATALOG_IDS: list[str] = [entry.id for entry in CATALOG]


def run_catalog(ctx: Context, only=None) -> list[CheckResult]:
    """Evaluate catalog entries; pass/fail/skip per entry.

    `only` filters by id (a string or an iterable of strings); unknown
    ids raise so a typo cannot silently verify nothing.
    """
    if only is None:
        wanted = None
    elif isinstance(only, str):
        wanted = {only}
    else:
        wanted = set(only)
    if wanted is not None:
        unknown = wanted - set(CATALOG_IDS)
        if unknown:
            raise ModelError(
                f"unknown catalog ids: {', '.join(sorted(unknown))}")
    results = []
    for entry in CATALOG:
        if wanted is not None and entry.id not in wanted:
            continue
        if entry.needs_f2 and not ctx.genfun.has(2):
            results.append(CheckResult(entry.id, "skip",
                                       "genus-2 data not available"))
            continue
        try:
            residuals = entry.evaluate(ctx)
        except CapacityError as exc:
            results.append(CheckResult(entry.id, "skip",
                                       f"insufficient window: {exc}"))
            continue
        failure = None
        for label, res in residuals:
            offense = _first_offense(res)
            if offense is not None:
                failure = f"{label}: {offense}"
                break
        if failure is None:
            results.append(CheckResult(entry.id, "pass"))
        else:
            results.append(CheckResult(entry.id, "fail", failure))
    return results
