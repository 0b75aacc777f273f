"""Virasoro vector fields, lower-genus anomaly terms, constraint residuals.

The Virasoro fields L_n are generated by iterating the recursion operator
R on the string field; closed forms for the first few are kept as an
independent cross-check. The constraint residual <<L_n>>_g - rho_{g,n}
must vanish identically; rho depends only on data of genus below g.
"""
from fractions import Fraction

from .fields import (
    Context,
    Gstar,
    Cmap,
    Rop,
    Rplus,
    VectorField,
    bar,
    correlator,
    qprod,
    string_field,
    dilaton_field,
    euler_field,
    tau_minus,
    tau_plus,
    xbar_power,
    _tilde_t,
)
from .model import ModelError
from .series import CapacityError, TruncSeries, VarId


def check_headroom(ctx: Context, n: int) -> None:
    """The window must keep n+3 levels of slack above the primaries so the
    level-raising in L_n and its residual checks stays inside the window."""
    if ctx.window.max_level < n + 3:
        raise CapacityError(
            f"window max_level {ctx.window.max_level} is too small for the "
            f"level-{n} Virasoro field; need at least {n + 3}")


def virasoro_field(ctx: Context, n: int) -> VectorField:
    """L_n = R^{n+1}(-S) for n >= -1."""
    if n < -1:
        raise ModelError("Virasoro fields are indexed by n >= -1")
    check_headroom(ctx, n)
    key = ("virasoro", n)
    cached = ctx._fields.get(key)
    if cached is None:
        cached = -string_field(ctx)
        for _ in range(n + 1):
            cached = Rop(ctx, cached)
        ctx._fields[key] = cached
    return cached


def _one_point(ctx: Context, w: VectorField) -> TruncSeries:
    return correlator(ctx, 0, [w])


def virasoro_closed_form(ctx: Context, n: int) -> VectorField:
    """Explicit formulas for L_{-1}..L_2, independent of the R-iteration."""
    if n == -1:
        return -string_field(ctx)
    model = ctx.model
    b1 = model.b[0]
    if n == 0:
        return -euler_field(ctx) - dilaton_field(ctx).scale(b1 + 1)
    if n not in (1, 2):
        raise ModelError("closed forms are available for -1 <= n <= 2 only")

    nclasses = model.num_classes
    chern = model.chern
    c2 = [[sum(chern[a][m] * chern[m][b] for m in range(nclasses))
           for b in range(nclasses)] for a in range(nclasses)]
    c3 = [[sum(c2[a][m] * chern[m][b] for m in range(nclasses))
           for b in range(nclasses)] for a in range(nclasses)]

    contributions: list[tuple[VarId, TruncSeries]] = []
    for m in range(ctx.window.max_level + 1):
        for a in range(nclasses):
            tt = _tilde_t(ctx, m, a + 1)
            ba = model.b[a]
            if n == 1:
                contributions.append(
                    ((m + 1, a + 1), tt.scale((m + ba) * (m + ba + 1))))
                for b in range(nclasses):
                    if chern[a][b]:
                        contributions.append(
                            ((m, b + 1),
                             tt.scale((2 * m + 2 * ba + 1) * chern[a][b])))
                    if c2[a][b] and m >= 1:
                        contributions.append(((m - 1, b + 1),
                                              tt.scale(c2[a][b])))
            else:
                contributions.append(
                    ((m + 2, a + 1),
                     tt.scale((m + ba) * (m + ba + 1) * (m + ba + 2))))
                for b in range(nclasses):
                    if chern[a][b]:
                        coeff = (3 * (m + ba) ** 2 + 6 * (m + ba) + 2)
                        contributions.append(
                            ((m + 1, b + 1), tt.scale(coeff * chern[a][b])))
                    if c2[a][b]:
                        contributions.append(
                            ((m, b + 1),
                             tt.scale(3 * (m + ba + 1) * c2[a][b])))
                    if c3[a][b] and m >= 1:
                        contributions.append(((m - 1, b + 1),
                                              tt.scale(c3[a][b])))

    comps: dict[VarId, TruncSeries] = {}
    trust = ctx.window.max_level
    for v, s in contributions:
        if v[0] > ctx.window.max_level:
            trust = min(trust, s.min_term_level() - 1)
        elif v in comps:
            comps[v] = comps[v] + s
        else:
            comps[v] = s
    out = VectorField(ctx.window, comps, trust)

    pairs = ctx.gamma_pairs()
    if n == 1:
        for a, (up, down) in enumerate(pairs):
            ba = model.b[a]
            if ba * (ba - 1):
                out = out - down.scale(_one_point(ctx, up).scale(
                    ba * (ba - 1)))
    else:
        for a, (up, down) in enumerate(pairs):
            ba = model.b[a]
            if ba * (ba * ba - 1):
                coeff = ba * (ba * ba - 1)
                out = out - down.scale(
                    _one_point(ctx, tau_plus(up)).scale(coeff))
                out = out - tau_plus(down).scale(
                    _one_point(ctx, up).scale(coeff))
        for b, (upb, _) in enumerate(pairs):
            bb = model.b[b]
            for a, (_, downa) in enumerate(pairs):
                if chern[b][a]:
                    out = out - upb.scale(
                        _one_point(ctx, downa).scale(
                            (3 * bb * bb - 1) * chern[b][a]))
    return out


def _eta_quadratic(ctx: Context, mat) -> TruncSeries:
    """sum_{a,b} mat[a][b] t_0^a t_0^b as a series at the chosen base."""
    window = ctx.window
    total = TruncSeries.zero(window)
    t0 = {}
    for a in range(ctx.model.num_classes):
        s = TruncSeries.variable(window, (0, a + 1))
        base = ctx.genfun.base_point.get((0, a + 1), Fraction(0))
        if base:
            s = s + TruncSeries.const(window, base)
        t0[a] = s
    for a in range(ctx.model.num_classes):
        for b in range(ctx.model.num_classes):
            if mat[a][b]:
                total = total + (t0[a] * t0[b]).scale(mat[a][b])
    return total


def _chern_power_lower(ctx: Context, k: int):
    """(C^k)_{ab} with both indices lowered by the pairing."""
    model = ctx.model
    n = model.num_classes
    mat = [[Fraction(1) if a == b else Fraction(0) for b in range(n)]
           for a in range(n)]
    for _ in range(k):
        mat = [[sum(mat[a][m] * model.chern[m][b] for m in range(n))
                for b in range(n)] for a in range(n)]
    # lower the second index: (C^k)_a^m eta_{mb}
    return [[sum(mat[a][m] * model.eta[m][b] for m in range(n))
             for b in range(n)] for a in range(n)]


def rho(ctx: Context, g: int, n: int) -> TruncSeries:
    """The anomaly term of the level-n constraint at genus g."""
    window = ctx.window
    model = ctx.model
    if n < -1:
        raise ModelError("constraints are indexed by n >= -1")
    if n == -1:
        if g == 0:
            return _eta_quadratic(ctx, model.eta).scale(Fraction(-1, 2))
        return TruncSeries.zero(window)
    if n == 0:
        if g == 0:
            return _eta_quadratic(
                ctx, _chern_power_lower(ctx, 0 + 1)).scale(Fraction(-1, 2))
        if g == 1:
            kappa = Fraction(model.c1_cd1 - (model.b[0] + 1)
                             * model.euler_char, 24)
            return TruncSeries.const(window, kappa)
        return TruncSeries.zero(window)

    pairs = ctx.gamma_pairs()
    total = TruncSeries.zero(window)
    for up, down in pairs:
        ci = down
        for i in range(n):
            if i > 0:
                ci = Cmap(model, ci)
            if ci.is_stored_zero():
                break
            left_base = Gstar(model, ci)
            right_base = Gstar(model, up)
            left = left_base
            for j in range(n - i):
                if j > 0:
                    left = Rplus(ctx, left)
                right = right_base
                for _ in range(n - 1 - i - j):
                    right = Rplus(ctx, right)
                if g == 0:
                    total = total + (correlator(ctx, 0, [left])
                                     * correlator(ctx, 0, [right])).scale(
                        Fraction(1, 2))
                else:
                    piece = correlator(ctx, g - 1, [left, right])
                    for h in range(1, g):
                        piece = piece + (correlator(ctx, h, [left])
                                         * correlator(ctx, g - h, [right]))
                    total = total - piece.scale(Fraction(1, 2))
    if g == 0:
        total = total - _eta_quadratic(
            ctx, _chern_power_lower(ctx, n + 1)).scale(Fraction(1, 2))
    return total


def rho1_alt(ctx: Context, k: int) -> TruncSeries:
    """Genus-1 anomaly written through quantum powers of the Euler field;
    must agree with rho(ctx, 1, k)."""
    if k < 0:
        raise ModelError("rho1_alt is defined for k >= 0")
    from .fields import qpower  # local import to keep module top light
    x = euler_field(ctx)
    s = string_field(ctx)

    def xpow(i):
        return s if i == 0 else qpower(ctx, x, i)

    pairs = ctx.gamma_pairs()
    total = TruncSeries.zero(ctx.window)
    for up, down in pairs:
        total = total - correlator(ctx, 0, [xpow(k), down, up]).scale(
            Fraction(k + 1, 8))
    model = ctx.model
    for a, (upa, downa) in enumerate(pairs):
        for b, (upb, downb) in enumerate(pairs):
            coeff = Fraction(model.b[a] * model.b[b], 4)
            if not coeff:
                continue
            for i in range(k + 1):
                total = total + (
                    correlator(ctx, 0, [downa, xpow(i), upb])
                    * correlator(ctx, 0, [downb, xpow(k - i), upa])
                ).scale(coeff)
    return total


def constraint_residual(ctx: Context, g: int, n: int) -> TruncSeries:
    """<<L_n>>_g - rho_{g,n}; identically zero when the constraint holds."""
    return correlator(ctx, g, [virasoro_field(ctx, n)]) - rho(ctx, g, n)


def stau(ctx: Context, m: int, n: int) -> VectorField:
    """bar(tau_-^m(L_n)) computed by the level-lowering recursion.

    Anchors: m = 0 gives -xbar_power(n+1); n = -1 is evaluated directly
    on the string field.
    """
    if m < 0 or n < -1:
        raise ModelError("stau needs m >= 0 and n >= -1")
    key = ("stau", m, n)
    cached = ctx._fields.get(key)
    if cached is not None:
        return cached
    if m == 0:
        out = -xbar_power(ctx, n + 1)
    elif n == -1:
        w = -string_field(ctx)
        for _ in range(m):
            w = tau_minus(w)
        out = bar(ctx, w)
    else:
        x = euler_field(ctx)
        prev_same = stau(ctx, m, n - 1)
        prev_less = stau(ctx, m - 1, n - 1)
        out = (qprod(ctx, x, prev_same) + prev_less.scale(m)
               + Gstar(ctx.model, prev_less))
    ctx._fields[key] = out
    return out
