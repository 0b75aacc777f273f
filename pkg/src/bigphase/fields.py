"""Vector fields on the truncated big phase space and the operator calculus.

A vector field is a finite map from descendant coordinates (level, class)
to coefficient series. Correlation functions contract coefficient series
against mixed partials of the generating functions; they never
differentiate the coefficients themselves (nabla does that), so the two
interact exactly through the product rule for correlators.

Level bookkeeping: raising operators (tau_plus, big_T, Rop, Rplus) push
components above the window's top level. Such components are shed and the
field's level_trust drops so that every coefficient the lost data could
have touched is marked untrusted; a CapacityError is raised only when
nothing trusted would remain. The diagonal operators (the grading field,
the *-identity and the Chern matrix action) act on components directly
and are never materialized as infinite fields.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable

from .model import GenFunSet, ManifoldModel, ModelError
from .series import (
    ORDER_EXACT,
    CapacityError,
    Mono,
    Rational,
    TruncSeries,
    VarId,
    VarWindow,
    WindowMismatchError,
    first_bad_monomial,
    mono_degree,
    s_partial,
    trusted_terms,
)


class VectorField:
    """Finite component map VarId -> TruncSeries over a shared window.

    level_trust is the field-level bound: coefficients of result monomials
    whose variables all have level <= level_trust are unaffected by any
    component this field may have shed.
    """

    __slots__ = ("window", "components", "level_trust")

    def __init__(self, window: VarWindow, components: dict[VarId, TruncSeries],
                 level_trust: int | None = None):
        self.window = window
        comps: dict[VarId, TruncSeries] = {}
        for v, s in components.items():
            window.check_var(v)
            if s.window != window:
                raise WindowMismatchError(f"component {v} has window {s.window}")
            # zero components are kept when they carry a finite validity
            # order or reduced trust: "zero through degree d" is information
            # that must survive into sums and residual comparisons
            if (not s.is_stored_zero() or s.valid_order < ORDER_EXACT
                    or s.level_trust < window.max_level):
                comps[v] = s
        self.components = comps
        self.level_trust = window.max_level if level_trust is None else level_trust

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero(window: VarWindow) -> "VectorField":
        return VectorField(window, {})

    @staticmethod
    def basis(window: VarWindow, v: VarId) -> "VectorField":
        """The unit coordinate field at (level, class)."""
        return VectorField(window, {v: TruncSeries.const(window, 1)})

    # -- bookkeeping ----------------------------------------------------------

    def component(self, v: VarId) -> TruncSeries:
        """Component series with the field-level trust folded in."""
        s = self.components.get(v)
        if s is None:
            return TruncSeries.zero(self.window).with_trust(self.level_trust)
        return s.with_trust(min(s.level_trust, self.level_trust))

    def items(self):
        for v in sorted(self.components):
            yield v, self.component(v)

    @property
    def valid_order(self) -> int:
        return min((s.valid_order for s in self.components.values()),
                   default=ORDER_EXACT)

    def is_stored_zero(self) -> bool:
        return not self.components

    def is_primary(self) -> bool:
        return all(v[0] == 0 for v in self.components)

    def with_trust(self, level_trust: int) -> "VectorField":
        if level_trust == self.level_trust:
            return self
        return VectorField(self.window, self.components, level_trust)

    # -- linear structure ------------------------------------------------------

    def __add__(self, other: "VectorField") -> "VectorField":
        if self.window != other.window:
            raise WindowMismatchError("field window mismatch")
        comps = dict(self.components)
        for v, s in other.components.items():
            comps[v] = comps[v] + s if v in comps else s
        return VectorField(self.window, comps,
                           min(self.level_trust, other.level_trust))

    def __neg__(self) -> "VectorField":
        return VectorField(self.window, {v: -s for v, s in self.components.items()},
                           self.level_trust)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def scale(self, factor) -> "VectorField":
        factor = Fraction(factor) if not isinstance(factor, TruncSeries) else factor
        if isinstance(factor, TruncSeries):
            comps = {v: s * factor for v, s in self.components.items()}
            return VectorField(self.window, comps,
                               min(self.level_trust, factor.level_trust))
        if not factor:
            return VectorField.zero(self.window).with_trust(self.level_trust)
        return VectorField(self.window,
                           {v: s.scale(factor) for v, s in self.components.items()},
                           self.level_trust)

    def __mul__(self, factor):
        return self.scale(factor)

    def __rmul__(self, factor):
        return self.scale(factor)

    def __repr__(self) -> str:
        if not self.components:
            return f"<field 0 | trust {self.level_trust}>"
        parts = [f"d[{v[0]},{v[1]}]: {s!r}" for v, s in list(self.items())[:4]]
        if len(self.components) > 4:
            parts.append(f"... {len(self.components) - 4} more")
        return f"<field {'; '.join(parts)} | trust {self.level_trust}>"


def field_first_bad(w: VectorField):
    """First nonzero trusted coefficient across all components.

    Returns None when every component vanishes on the trusted region;
    raises CapacityError when no component has a nonempty trusted region
    to check (so a residual test cannot pass vacuously).
    """
    if w.level_trust < 0:
        raise CapacityError(f"field trust is {w.level_trust}; nothing to check")
    best = None
    for v, s in w.items():
        hit = first_bad_monomial(s)
        if hit is not None:
            mono, coeff = hit
            key = (mono_degree(mono), v, mono)
            if best is None or key < best[0]:
                best = (key, (v, mono, coeff))
    if not w.components:
        # the zero field is trivially fine on its (nonempty) trusted region
        return None
    return best[1] if best else None


def field_match(a: VectorField, b: VectorField):
    """None if the fields agree on the shared trusted region, else the
    offending (varid, monomial, a_coeff, b_coeff)."""
    diff = field_first_bad(a - b)
    if diff is None:
        return None
    v, mono, _ = diff
    return (v, mono, a.component(v).terms.get(mono, Fraction(0)),
            b.component(v).terms.get(mono, Fraction(0)))


# ---------------------------------------------------------------------------
# context: model + generating functions + caches
# ---------------------------------------------------------------------------

class Context:
    """Immutable pairing of a manifold model with its generating functions.

    Caches mixed partials of F_g (the hot path of every correlator) and
    the distinguished fields. Safe for parallel readers: cache inserts are
    idempotent.
    """

    def __init__(self, model: ManifoldModel, genfun: GenFunSet):
        if model.num_classes != genfun.window.num_classes:
            raise ModelError("model and generating functions disagree on the "
                             "number of classes")
        self.model = model
        self.genfun = genfun
        self.window = genfun.window
        self._partials: dict[tuple[int, tuple[VarId, ...]], TruncSeries] = {}
        self._fields: dict = {}
        self._xbar: dict[int, VectorField] = {}

    def mixed_partial(self, g: int, variables: tuple[VarId, ...]) -> TruncSeries:
        """d^k F_g / d(variables), cached on the sorted variable multiset."""
        key = (g, tuple(sorted(variables)))
        cached = self._partials.get(key)
        if cached is not None:
            return cached
        if not key[1]:
            out = self.genfun.get(g)
        else:
            prefix = self.mixed_partial(g, key[1][:-1])
            out = s_partial(prefix, key[1][-1])
        self._partials[key] = out
        return out

    # -- index gymnastics ----------------------------------------------------

    def gamma(self, cls: int) -> VectorField:
        """The primary basis field gamma_cls (1-based class index)."""
        return VectorField.basis(self.window, (0, cls))

    def gamma_pairs(self) -> list[tuple[VectorField, VectorField]]:
        """All (gamma^alpha, gamma_alpha) pairs for contracted sums."""
        out = []
        n = self.model.num_classes
        for a in range(n):
            up = VectorField.zero(self.window)
            for b in range(n):
                if self.model.eta_inv[a][b]:
                    up = up + self.gamma(b + 1).scale(self.model.eta_inv[a][b])
            out.append((up, self.gamma(a + 1)))
        return out


# ---------------------------------------------------------------------------
# correlation functions and the quantum product
# ---------------------------------------------------------------------------

def correlator(ctx: Context, g: int, fields: list[VectorField]) -> TruncSeries:
    """The k-point function: coefficients contracted against mixed partials
    of F_g. Multilinear and totally symmetric; coefficient series are not
    differentiated."""
    if not fields:
        raise ModelError("correlator needs at least one field")
    base = ctx.genfun.get(g)
    k = len(fields)
    order = base.valid_order if base.valid_order >= ORDER_EXACT else max(
        base.valid_order - k, 0)
    trust = min((w.level_trust for w in fields), default=ctx.window.max_level)
    total = TruncSeries.zero(ctx.window, order).with_trust(trust)
    comp_lists = [list(w.items()) for w in fields]
    if any(not lst for lst in comp_lists):
        return total
    for combo in itertools.product(*comp_lists):
        variables = tuple(v for v, _ in combo)
        part = ctx.mixed_partial(g, variables)
        if part.is_stored_zero():
            term = part
        else:
            term = part
            for _, coeff in combo:
                term = term * coeff
        total = total + term
    return total.with_trust(min(total.level_trust, trust))


def qprod(ctx: Context, u: VectorField, w: VectorField) -> VectorField:
    """Quantum product: the genus-0 three-point function contracted with a
    raised index; always a primary field."""
    out = VectorField.zero(ctx.window).with_trust(
        min(u.level_trust, w.level_trust))
    for up, down in ctx.gamma_pairs():
        out = out + down.scale(correlator(ctx, 0, [u, w, up]))
    return out


def qpower(ctx: Context, w: VectorField, k: int) -> VectorField:
    """k-th quantum power (k >= 1)."""
    if k < 1:
        raise ModelError("quantum powers need k >= 1")
    acc = w
    for _ in range(k - 1):
        acc = qprod(ctx, acc, w)
    return acc


# ---------------------------------------------------------------------------
# level-shift operators
# ---------------------------------------------------------------------------

def tau_plus(w: VectorField) -> VectorField:
    """Shift all components one level up, shedding the top level.

    Shedding component f at the top level means every corrupted downstream
    monomial contains a monomial of f as a factor, so trust drops to one
    below the smallest max-level among f's monomials.
    """
    comps: dict[VarId, TruncSeries] = {}
    trust = w.level_trust
    order_cap = ORDER_EXACT
    for (lv, cls), s in w.components.items():
        if lv + 1 > w.window.max_level:
            if not s.is_stored_zero():
                trust = min(trust, s.min_term_level() - 1)
            # whatever the shed coefficient hides beyond its validity order
            # can only corrupt higher-degree results
            order_cap = min(order_cap, s.valid_order)
        else:
            comps[(lv + 1, cls)] = s
    if trust < 0:
        raise CapacityError(
            "tau_plus shed a component whose coefficient reaches level 0; "
            "no trusted region would remain")
    if order_cap < ORDER_EXACT:
        comps = {v: s.with_order(min(s.valid_order, order_cap))
                 for v, s in comps.items()}
    return VectorField(w.window, comps, trust)


def tau_minus(w: VectorField) -> VectorField:
    """Shift all components one level down; level 0 is annihilated."""
    comps = {(lv - 1, cls): s for (lv, cls), s in w.components.items() if lv >= 1}
    return VectorField(w.window, comps, w.level_trust)


def pi(w: VectorField) -> VectorField:
    """The primary (level-0) part."""
    comps = {v: s for v, s in w.components.items() if v[0] == 0}
    return VectorField(w.window, comps, w.level_trust)


def big_T(ctx: Context, w: VectorField) -> VectorField:
    """T(W) = tau_plus(W) - <<W gamma^a>>_0 gamma_a; kills the quantum
    product against anything."""
    out = tau_plus(w)
    for up, down in ctx.gamma_pairs():
        coeff = correlator(ctx, 0, [w, up])
        out = out - down.scale(coeff)
    return out


def bar(ctx: Context, w: VectorField) -> VectorField:
    """The primary field equivalent to W: <<tau_-(W) gamma^a>>_0 gamma_a
    plus the primary part of W."""
    shifted = tau_minus(w)
    out = pi(w)
    for up, down in ctx.gamma_pairs():
        out = out + down.scale(correlator(ctx, 0, [shifted, up]))
    return out


def equivalent(ctx: Context, u: VectorField, w: VectorField) -> bool:
    """True iff the two fields have the same primary projection on the
    shared trusted region."""
    return field_match(bar(ctx, u), bar(ctx, w)) is None


# ---------------------------------------------------------------------------
# covariant derivative and Lie bracket
# ---------------------------------------------------------------------------

def nabla(ctx: Context, v: VectorField, w: VectorField) -> VectorField:
    """Directional derivative of W's coefficients along V (componentwise)."""
    out = VectorField.zero(ctx.window).with_trust(
        min(v.level_trust, w.level_trust))
    for (n, beta), g in v.items():
        for target, f in w.items():
            df = s_partial(f, (n, beta))
            if (df.is_stored_zero() and df.valid_order >= ORDER_EXACT
                    and df.level_trust >= f.level_trust):
                continue
            if n > f.level_trust:
                # the derivative itself is suspect, but every monomial it
                # contributes carries a factor from g, so coefficients
                # below g's smallest max-level stay exact
                safe = min(g.level_trust, g.min_term_level() - 1)
                term = (g * df.with_trust(ctx.window.max_level)).with_trust(safe)
            else:
                term = g * df
            out = out + VectorField(ctx.window, {target: term},
                                    min(out.level_trust, term.level_trust))
    return out


def lie_bracket(ctx: Context, v: VectorField, w: VectorField) -> VectorField:
    return nabla(ctx, v, w) - nabla(ctx, w, v)


def apply_field(w: VectorField, f: TruncSeries) -> TruncSeries:
    """W applied to a scalar function: sum_v W^v df/dt_v."""
    out = TruncSeries.zero(w.window).with_trust(w.level_trust)
    for v, g in w.items():
        df = s_partial(f, v)
        if df.is_stored_zero() and df.valid_order >= ORDER_EXACT:
            continue
        out = out + g * df
    return out


# ---------------------------------------------------------------------------
# diagonal operators
# ---------------------------------------------------------------------------

def star(u: VectorField, w: VectorField) -> VectorField:
    """Componentwise product of matching components."""
    if u.window != w.window:
        raise WindowMismatchError("field window mismatch")
    comps = {}
    for v, s in u.components.items():
        t = w.components.get(v)
        if t is not None:
            comps[v] = s * t
    return VectorField(u.window, comps, min(u.level_trust, w.level_trust))


def Gstar(model: ManifoldModel, w: VectorField, offset: Rational = 0) -> VectorField:
    """The grading field acting diagonally: component (m, a) scales by
    (m + b_a + offset). offset = -1/2 realizes the (G - Z/2)* action."""
    offset = Fraction(offset)
    comps = {}
    for (m, cls), s in w.components.items():
        factor = m + model.b[cls - 1] + offset
        if factor:
            comps[(m, cls)] = s.scale(factor)
    return VectorField(w.window, comps, w.level_trust)


def Cmap(model: ManifoldModel, w: VectorField) -> VectorField:
    """The Chern matrix acting on the class index, levelwise."""
    comps: dict[VarId, TruncSeries] = {}
    for (m, a), s in w.components.items():
        for bb in range(model.num_classes):
            c = model.chern[a - 1][bb]
            if c:
                key = (m, bb + 1)
                piece = s.scale(c)
                comps[key] = comps[key] + piece if key in comps else piece
    return VectorField(w.window, comps, w.level_trust)


def Rop(ctx: Context, w: VectorField) -> VectorField:
    """The recursion operator R(W) = G*T(W) + C(W)."""
    return Gstar(ctx.model, big_T(ctx, w)) + Cmap(ctx.model, w)


def Rplus(ctx: Context, w: VectorField) -> VectorField:
    """R_plus(W) = G*tau_plus(W) + C(W)."""
    return Gstar(ctx.model, tau_plus(w)) + Cmap(ctx.model, w)


# ---------------------------------------------------------------------------
# distinguished fields
# ---------------------------------------------------------------------------

def _tilde_t(ctx: Context, m: int, cls: int) -> TruncSeries:
    """t^cls_m - delta_{m,1} delta_{cls,1}, as a series in displacements
    from the base point."""
    w = ctx.window
    out = TruncSeries.variable(w, (m, cls))
    shift = ctx.genfun.base_point.get((m, cls), Fraction(0))
    if m == 1 and cls == 1:
        shift -= 1
    if shift:
        out = out + TruncSeries.const(w, shift)
    return out


def string_field(ctx: Context) -> VectorField:
    """S: minus the sum of shifted coordinates times one level down."""
    comps = {}
    for m in range(1, ctx.window.max_level + 1):
        for cls in range(1, ctx.window.num_classes + 1):
            comps[(m - 1, cls)] = -_tilde_t(ctx, m, cls)
    return VectorField(ctx.window, comps)


def dilaton_field(ctx: Context) -> VectorField:
    """D: minus the sum of shifted coordinates times the same level."""
    comps = {}
    for m in range(ctx.window.max_level + 1):
        for cls in range(1, ctx.window.num_classes + 1):
            comps[(m, cls)] = -_tilde_t(ctx, m, cls)
    return VectorField(ctx.window, comps)


def euler_field(ctx: Context) -> VectorField:
    """X: the grading part plus the Chern part, truncated to the window."""
    model = ctx.model
    b1 = model.b[0]
    comps: dict[VarId, TruncSeries] = {}
    for m in range(ctx.window.max_level + 1):
        for a in range(1, ctx.window.num_classes + 1):
            tt = _tilde_t(ctx, m, a)
            factor = -(m + model.b[a - 1] - b1 - 1)
            if factor:
                key = (m, a)
                piece = tt.scale(factor)
                comps[key] = comps[key] + piece if key in comps else piece
            if m >= 1:
                for bb in range(1, ctx.window.num_classes + 1):
                    c = model.chern[a - 1][bb - 1]
                    if c:
                        key = (m - 1, bb)
                        piece = tt.scale(-c)
                        comps[key] = comps[key] + piece if key in comps else piece
    return VectorField(ctx.window, comps)


def _cached_field(ctx: Context, name: str, builder) -> VectorField:
    got = ctx._fields.get(name)
    if got is None:
        got = builder(ctx)
        ctx._fields[name] = got
    return got


def euler_pairing_matrix(ctx: Context) -> list[list[TruncSeries]]:
    """M with entries <<gamma_a X gamma^b>>_0 (series valued)."""
    cached = ctx._fields.get("euler_matrix")
    if cached is not None:
        return cached
    x = _cached_field(ctx, "X", euler_field)
    n = ctx.model.num_classes
    pairs = ctx.gamma_pairs()
    mat = [[correlator(ctx, 0, [ctx.gamma(a + 1), x, pairs[b][0]])
            for b in range(n)] for a in range(n)]
    ctx._fields["euler_matrix"] = mat
    return mat


def xbar_power(ctx: Context, k: int) -> VectorField:
    """bar(X^k) via repeated application of the Euler pairing matrix to
    bar(S); k = 0 gives bar(S)."""
    if k < 0:
        raise ModelError("xbar_power needs k >= 0")
    cached = ctx._xbar.get(k)
    if cached is not None:
        return cached
    if k == 0:
        out = bar(ctx, _cached_field(ctx, "S", string_field))
    else:
        prev = xbar_power(ctx, k - 1)
        mat = euler_pairing_matrix(ctx)
        n = ctx.model.num_classes
        # bar(X^k) = bar(X^{k-1}) bullet X: apply M to the component row
        out = VectorField.zero(ctx.window).with_trust(prev.level_trust)
        for b in range(n):
            acc = TruncSeries.zero(ctx.window).with_trust(prev.level_trust)
            for a in range(n):
                comp = prev.component((0, a + 1))
                if not comp.is_stored_zero() or comp.valid_order < ORDER_EXACT:
                    acc = acc + comp * mat[a][b]
            out = out + ctx.gamma(b + 1).scale(acc)
    ctx._xbar[k] = out
    return out
