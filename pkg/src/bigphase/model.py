"""Geometric input data and generating functions for the point target.

Contains the manifold model (pairing, grading, Chern matrix), the
ground-truth oracle for psi-class intersection numbers on the moduli of
curves (string + dilaton + the standard double-factorial recursion), the
assembly of truncated generating functions F0/F1/F2 around an arbitrary
base point on the t^1_0 axis, and JSON import/export of GW invariant
tables.
"""
from __future__ import annotations

import json
from fractions import Fraction
from math import factorial
from typing import Iterable

from .series import (
    ORDER_EXACT,
    Mono,
    Rational,
    TruncSeries,
    VarId,
    VarWindow,
    mono_from_pairs,
)


class ModelError(ValueError):
    pass


class TableError(ValueError):
    pass


# ---------------------------------------------------------------------------
# rational (de)serialization and small exact linear algebra
# ---------------------------------------------------------------------------

def frac_to_str(x: Rational) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def frac_from_str(s: str) -> Fraction:
    return Fraction(s.strip())


def invert_rational_matrix(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    """Gauss-Jordan inverse over the rationals; raises on singular input."""
    n = len(mat)
    aug = [[Fraction(mat[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ModelError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = Fraction(1, 1) / aug[col][col]
        aug[col] = [v * inv_p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


# ---------------------------------------------------------------------------
# manifold model
# ---------------------------------------------------------------------------

class ManifoldModel:
    """Pairing eta, grading exponents b, and the first-Chern matrix C.

    chern[a][b] is C_alpha^beta (c1 action written in the chosen basis).
    euler_char and c1_cd1 (the integral of c1 cup c_{dim-1}) feed the
    genus-1 constants of the dilaton and quasi-homogeneity bookkeeping.
    """

    def __init__(self, num_classes: int, eta, b, chern,
                 euler_char: Rational | None = None, c1_cd1: Rational = 0):
        self.num_classes = num_classes
        self.eta = [[Fraction(x) for x in row] for row in eta]
        self.b = [Fraction(x) for x in b]
        self.chern = [[Fraction(x) for x in row] for row in chern]
        self.eta_inv = invert_rational_matrix(self.eta)
        self.euler_char = Fraction(num_classes if euler_char is None else euler_char)
        self.c1_cd1 = Fraction(c1_cd1)

    def chern_lower(self, a: int, bb: int) -> Fraction:
        """C_{alpha beta} = C_alpha^mu eta_{mu beta} (0-based indices)."""
        return sum((self.chern[a][m] * self.eta[m][bb]
                    for m in range(self.num_classes)), Fraction(0))


def point_model() -> ManifoldModel:
    return ManifoldModel(1, [[1]], [Fraction(1, 2)], [[0]], euler_char=1, c1_cd1=0)


def validate_model(m: ManifoldModel) -> list[str]:
    """Empty list iff the pairing/grading/Chern compatibility rules hold."""
    bad: list[str] = []
    n = m.num_classes
    if len(m.eta) != n or any(len(r) != n for r in m.eta):
        return [f"eta is not {n}x{n}"]
    if len(m.b) != n:
        return [f"b has length {len(m.b)}, expected {n}"]
    if len(m.chern) != n or any(len(r) != n for r in m.chern):
        return [f"chern is not {n}x{n}"]
    for a in range(n):
        for c in range(a, n):
            if m.eta[a][c] != m.eta[c][a]:
                bad.append(f"eta not symmetric at ({a + 1},{c + 1})")
    ident = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    prod = [[sum((m.eta_inv[i][k] * m.eta[k][j] for k in range(n)), Fraction(0))
             for j in range(n)] for i in range(n)]
    if prod != ident:
        bad.append("eta_inv * eta is not the identity")
    for a in range(n):
        for c in range(n):
            if (m.eta[a][c] != 0 or m.eta_inv[a][c] != 0) and m.b[a] + m.b[c] != 1:
                bad.append(
                    f"pairing-grading violation: eta pairs classes {a + 1},{c + 1} "
                    f"but b_{a + 1} + b_{c + 1} = {m.b[a] + m.b[c]} != 1")
            if m.chern[a][c] != 0 and m.b[c] != 1 + m.b[a]:
                bad.append(
                    f"chern-grading violation: C_{a + 1}^{c + 1} != 0 "
                    f"but b_{c + 1} != b_{a + 1} + 1")
            if m.chern_lower(a, c) != 0 and m.b[c] != -m.b[a]:
                bad.append(
                    f"chern-pairing violation: C_{{{a + 1}{c + 1}}} != 0 "
                    f"but b_{c + 1} != -b_{a + 1}")
    return bad


# ---------------------------------------------------------------------------
# intersection-number oracle (point target)
# ---------------------------------------------------------------------------

_dvv_memo: dict[tuple[int, tuple[int, ...]], Fraction] = {}


def _dfact(n: int) -> int:
    """Double factorial n!! for odd n >= -1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def dvv_oracle(insertions: Iterable[int], genus: int) -> Fraction:
    """Exact <tau_{d_1} ... tau_{d_n}>_g for the point target.

    Returns 0 whenever the dimension constraint sum(d) = 3g - 3 + n fails.
    Reduction order: string equation for zero levels, dilaton for ones,
    then the double-factorial recursion on the largest level. Memoized on
    the sorted multiset (concurrent reads are safe; inserts idempotent).
    """
    ins = tuple(sorted(insertions, reverse=True))
    if genus < 0 or any(d < 0 for d in ins):
        return Fraction(0)
    return _dvv(ins, genus)


def _dvv(ins: tuple[int, ...], g: int) -> Fraction:
    n = len(ins)
    if sum(ins) != 3 * g - 3 + n:
        return Fraction(0)
    if n == 0 or (g == 0 and n < 3):
        return Fraction(0)
    if g == 0 and ins == (0, 0, 0):
        return Fraction(1)
    if g == 1 and ins == (1,):
        return Fraction(1, 24)
    key = (g, ins)
    cached = _dvv_memo.get(key)
    if cached is not None:
        return cached

    if ins[-1] == 0:
        # string equation: remove one tau_0, decrement one other insertion
        rest = ins[:-1]
        total = Fraction(0)
        for j, d in enumerate(rest):
            if d >= 1:
                total += _dvv(_resort(rest, j, d - 1), g)
    elif ins[-1] == 1:
        # dilaton equation
        rest = ins[:-1]
        total = Fraction(2 * g - 2 + n - 1) * _dvv(rest, g)
    else:
        # recursion on the largest insertion, written for tau_{k+1}
        k = ins[0] - 1
        rest = ins[1:]
        total = Fraction(0)
        for j, d in enumerate(rest):
            total += Fraction(_dfact(2 * (k + d) + 1), _dfact(2 * d - 1)) \
                * _dvv(_resort(rest, j, k + d), g)
        half = Fraction(1, 2)
        m = len(rest)
        for a in range(k):
            b = k - 1 - a
            weight = Fraction(_dfact(2 * a + 1) * _dfact(2 * b + 1))
            total += half * weight * _dvv(tuple(sorted(rest + (a, b), reverse=True)), g - 1)
            for bits in range(1 << m):
                left = tuple(rest[i] for i in range(m) if bits >> i & 1)
                right = tuple(rest[i] for i in range(m) if not bits >> i & 1)
                for g1 in range(g + 1):
                    la = _dvv(tuple(sorted(left + (a,), reverse=True)), g1)
                    if la:
                        total += half * weight * la \
                            * _dvv(tuple(sorted(right + (b,), reverse=True)), g - g1)
        total /= _dfact(2 * k + 3)

    _dvv_memo[key] = total
    return total


def _resort(tup: tuple[int, ...], idx: int, value: int) -> tuple[int, ...]:
    lst = list(tup)
    lst[idx] = value
    return tuple(sorted(lst, reverse=True))


# ---------------------------------------------------------------------------
# tau_0 resummation (fast path for coefficients at a shifted base)
# ---------------------------------------------------------------------------

_resum_memo: dict[tuple[int, tuple[int, ...], int], Fraction] = {}


def tau0_resummed(genus: int, levels: tuple[int, ...], zeros: int) -> Fraction:
    """<tau_{d_1}...tau_{d_m} tau_0^zeros>_genus with all d_i >= 1.

    Iterating the string equation zeros times turns this into a sum over
    terminal exponent vectors e <= d with sum(e) = 3g - 3 + m, weighted by
    the multinomial zeros!/prod((d_i - e_i)!). The terminal values have no
    large tau_0 multiplicity and go back through the plain recursion. This
    is what makes shifted-base generating functions affordable: the naive
    string recursion explodes combinatorially in the tau_0 count.
    """
    if genus == 0:
        # closed form (n-3)!/prod(d_i!), n = total insertion count
        n = len(levels) + zeros
        if sum(levels) != n - 3 or n < 3:
            return Fraction(0)
        denom = 1
        for d in levels:
            denom *= factorial(d)
        return Fraction(factorial(n - 3), denom)
    if sum(levels) != 3 * genus - 3 + len(levels) + zeros:
        return Fraction(0)
    if not levels:
        return dvv_oracle((0,) * zeros, genus)
    key = (genus, levels, zeros)
    cached = _resum_memo.get(key)
    if cached is not None:
        return cached
    target = 3 * genus - 3 + len(levels)
    total = Fraction(0)
    if target >= 0:
        d = list(levels)
        suffix = [0] * (len(d) + 1)
        for i in range(len(d) - 1, -1, -1):
            suffix[i] = suffix[i + 1] + min(d[i], target)
        # DP over insertion positions. A state is the sorted multiset of
        # terminal exponents chosen so far; paths that reach the same
        # multiset are merged, which keeps the state count tiny even when
        # the raw path count explodes. Weights stay exact integers: each
        # path weight zeros!/prod((d_i - e_i)!) is a prefix multinomial,
        # so every floor division below is exact, and exactness survives
        # summing merged paths.
        states: dict[tuple[int, ...], int] = {(): factorial(zeros)}
        for i, di in enumerate(d):
            cap_after = suffix[i + 1]
            nxt: dict[tuple[int, ...], int] = {}
            for term, wgt in states.items():
                rem = target - sum(term)
                lo = max(0, rem - cap_after)
                hi = min(di, rem)
                for ei in range(lo, hi + 1):
                    key_t = tuple(sorted(term + (ei,), reverse=True))
                    part = wgt // factorial(di - ei)
                    prev = nxt.get(key_t)
                    nxt[key_t] = part if prev is None else prev + part
            states = nxt
        for terminal, weight in states.items():
            value = dvv_oracle(terminal, genus)
            if value:
                total += weight * value
    _resum_memo[key] = total
    return total


# ---------------------------------------------------------------------------
# generating functions
# ---------------------------------------------------------------------------

class GenFunSet:
    """Truncated F0, F1 and optionally F2 around a common base point.

    Series variables are displacements u = t - base from the base point;
    base_point maps VarId -> rational displacement of the base from the
    origin of the t coordinates.
    """

    def __init__(self, window: VarWindow, F0: TruncSeries, F1: TruncSeries,
                 F2: TruncSeries | None, base_point: dict[VarId, Fraction]):
        self.window = window
        self.F0 = F0
        self.F1 = F1
        self.F2 = F2
        self.base_point = {v: Fraction(c) for v, c in base_point.items() if c != 0}

    def get(self, g: int) -> TruncSeries:
        fg = {0: self.F0, 1: self.F1, 2: self.F2}.get(g)
        if fg is None:
            raise ModelError(f"F_{g} is not available in this generating-function set")
        return fg

    def has(self, g: int) -> bool:
        return g in (0, 1) or (g == 2 and self.F2 is not None)

    def replace_F2(self, F2: TruncSeries | None) -> "GenFunSet":
        return GenFunSet(self.window, self.F0, self.F1, F2, self.base_point)


def genfun_degrees(degree: int) -> dict[int, int]:
    """Per-genus build orders for a requested genus-2 order.

    F0 gets +4 and F1 gets +2 so the higher-arity lower-genus correlators
    in the genus-2 tensors are trusted at least as far as the genus-2 data.
    """
    return {0: degree + 4, 1: degree + 2, 2: degree}


def build_point_genfun(window: VarWindow, degree: int, shift_t00: Rational = 0,
                       with_F2: bool = True) -> GenFunSet:
    """Assemble F0/F1(/F2) for the point target around t^1_0 = shift_t00.

    The coefficient of a displacement monomial prod u_m^{e_m} is
    sum_r <prod tau_m^{e_m} tau_0^r> c^r / (r! prod e_m!), and the
    dimension constraint picks out a single admissible r per monomial, so
    the shift is exact and finite.
    """
    if window.num_classes != 1:
        raise ModelError("the built-in construction only covers the point target")
    if degree < 0:
        raise ModelError("degree must be nonnegative")
    c = Fraction(shift_t00)
    degrees = genfun_degrees(degree)
    built: dict[int, TruncSeries] = {}
    for g in (0, 1, 2):
        if g == 2 and not with_F2:
            continue
        deg_g = degrees[g]
        terms: dict[Mono, Fraction] = {}
        for expo in _iter_exponents(window.max_level, deg_g):
            size = sum(expo)
            sumlev = sum(m * e for m, e in enumerate(expo))
            r = sumlev - (3 * g - 3) - size
            if r < 0 or (c == 0 and r > 0):
                continue
            nz = tuple(sorted((m for m, e in enumerate(expo) if m > 0 for _ in range(e)),
                              reverse=True))
            zeros = expo[0] + r
            raw = tau0_resummed(g, nz, zeros)
            if not raw:
                continue
            denom = factorial(r)
            for e in expo:
                denom *= factorial(e)
            value = raw * c ** r / denom
            if value:
                terms[_mono_from_exponents(expo)] = value
        built[g] = TruncSeries(window, terms, deg_g)
    base = {(0, 1): c} if c else {}
    return GenFunSet(window, built[0], built[1], built.get(2), base)


def _iter_exponents(max_level: int, degree: int):
    """All exponent tuples over levels 0..max_level with total <= degree."""
    expo = [0] * (max_level + 1)

    def rec(level: int, budget: int):
        if level > max_level:
            yield tuple(expo)
            return
        for e in range(budget + 1):
            expo[level] = e
            yield from rec(level + 1, budget - e)
        expo[level] = 0

    yield from rec(0, degree)


def _mono_from_exponents(expo: tuple[int, ...]) -> Mono:
    return mono_from_pairs(((m, 1), e) for m, e in enumerate(expo) if e)


# ---------------------------------------------------------------------------
# GW table import/export
# ---------------------------------------------------------------------------

TABLE_FORMAT = "bigphase-gw-table"


def export_gw_table(path: str, model: ManifoldModel, genfun: GenFunSet) -> None:
    """Write the model plus the invariant records behind genfun as JSON.

    Records carry origin-based invariants (with the tau_0 padding needed
    for a shifted base), so ingest_gw_table reproduces the generating
    functions exactly.
    """
    window = genfun.window
    c = genfun.base_point.get((0, 1), Fraction(0))
    records: dict[tuple[int, tuple[tuple[int, int], ...]], Fraction] = {}
    for g in (0, 1, 2):
        if not genfun.has(g):
            continue
        deg_g = genfun.get(g).valid_order
        for expo in _iter_exponents(window.max_level, deg_g):
            ins = _padded_insertions(g, expo, c)
            if ins is None:
                continue
            key = (g, ins)
            if key not in records:
                nz = tuple(sorted((lv for lv, _ in ins if lv > 0), reverse=True))
                zeros = sum(1 for lv, _ in ins if lv == 0)
                records[key] = tau0_resummed(g, nz, zeros)
    doc = {
        "format": TABLE_FORMAT,
        "model": {
            "num_classes": model.num_classes,
            "eta": [[frac_to_str(x) for x in row] for row in model.eta],
            "b": [frac_to_str(x) for x in model.b],
            "chern": [[frac_to_str(x) for x in row] for row in model.chern],
            "euler_char": frac_to_str(model.euler_char),
            "c1_cd1": frac_to_str(model.c1_cd1),
        },
        "window": {"max_level": window.max_level, "num_classes": window.num_classes},
        "degrees": {str(g): genfun.get(g).valid_order
                    for g in (0, 1, 2) if genfun.has(g)},
        "base_point": [[list(v), frac_to_str(x)] for v, x in sorted(genfun.base_point.items())],
        "records": [
            {"genus": g, "insertions": [list(p) for p in ins], "value": frac_to_str(v)}
            for (g, ins), v in sorted(records.items())
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _padded_insertions(g: int, expo: tuple[int, ...], c: Fraction):
    """The invariant key feeding a displacement monomial's coefficient.

    Returns the sorted insertion tuple <prod tau_m^{e_m} tau_0^r> (class 1)
    or None when the dimension constraint makes the coefficient vanish.
    """
    size = sum(expo)
    sumlev = sum(m * e for m, e in enumerate(expo))
    r = sumlev - (3 * g - 3) - size
    if r < 0 or (c == 0 and r > 0):
        return None
    levels = [m for m, e in enumerate(expo) for _ in range(e)] + [0] * r
    if not levels:
        return None
    return tuple(sorted(((lv, 1) for lv in levels), reverse=True))


def ingest_gw_table(path: str):
    """Read a GW table, validate the model, and assemble the GenFunSet.

    Returns (model, genfun, warnings). Raises TableError on malformed
    files, model violations, inconsistent duplicates, or missing records.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TableError(f"not valid JSON: {exc}") from exc
    if doc.get("format") != TABLE_FORMAT:
        raise TableError(f"unexpected format tag {doc.get('format')!r}")
    try:
        md = doc["model"]
        model = ManifoldModel(
            md["num_classes"],
            [[frac_from_str(x) for x in row] for row in md["eta"]],
            [frac_from_str(x) for x in md["b"]],
            [[frac_from_str(x) for x in row] for row in md["chern"]],
            euler_char=frac_from_str(md.get("euler_char", str(md["num_classes"]))),
            c1_cd1=frac_from_str(md.get("c1_cd1", "0")),
        )
        window = VarWindow(doc["window"]["max_level"], doc["window"]["num_classes"])
        degrees = {int(g): int(d) for g, d in doc["degrees"].items()}
        base_point = {(int(v[0]), int(v[1])): frac_from_str(x)
                      for v, x in doc.get("base_point", [])}
        raw_records = doc["records"]
    except (KeyError, TypeError, ValueError) as exc:
        raise TableError(f"malformed table: {exc}") from exc

    violations = validate_model(model)
    if violations:
        raise TableError("model validation failed: " + "; ".join(violations))
    if 0 not in degrees or 1 not in degrees:
        raise TableError("F0 and F1 records are both required")

    warnings: list[str] = []
    records: dict[tuple[int, tuple[tuple[int, int], ...]], Fraction] = {}
    for rec in raw_records:
        g = int(rec["genus"])
        ins = tuple(sorted(((int(p[0]), int(p[1])) for p in rec["insertions"]),
                           reverse=True))
        value = frac_from_str(rec["value"])
        if any(cls < 1 or cls > window.num_classes for _, cls in ins):
            warnings.append(f"record {ins} genus {g}: class outside window, skipped")
            continue
        key = (g, ins)
        if key in records and records[key] != value:
            raise TableError(f"inconsistent duplicate record for genus {g}, {ins}")
        records[key] = value

    if base_point and window.num_classes != 1:
        raise TableError("shifted base points are only supported for one-class models")
    c = base_point.get((0, 1), Fraction(0))

    built: dict[int, TruncSeries] = {}
    used: set[tuple[int, tuple[tuple[int, int], ...]]] = set()
    for g, deg_g in sorted(degrees.items()):
        terms: dict[Mono, Fraction] = {}
        for expo in _iter_exponents(window.max_level, deg_g):
            if window.num_classes == 1:
                ins = _padded_insertions(g, expo, c)
                if ins is None:
                    continue
                r = len([1 for lv, _ in ins if lv == 0]) - expo[0]
            else:
                if sum(expo) == 0:
                    continue
                levels = [m for m, e in enumerate(expo) for _ in range(e)]
                ins = tuple(sorted(((lv, 1) for lv in levels), reverse=True))
                r = 0
            key = (g, ins)
            if key not in records:
                raise TableError(
                    f"missing record for genus {g} insertions {ins}")
            used.add(key)
            value = records[key]
            if not value:
                continue
            denom = factorial(r)
            for e in expo:
                denom *= factorial(e)
            coeff = value * c ** r / denom
            if coeff:
                terms[_mono_from_exponents(expo)] = coeff
        built[g] = TruncSeries(window, terms, deg_g)
    for key in records:
        g, ins = key
        if key not in used:
            warnings.append(
                f"record genus {g} insertions {tuple(ins)} is outside the "
                "degree/level window, ignored")
    genfun = GenFunSet(window, built[0], built[1], built.get(2),
                       {v: x for v, x in base_point.items()})
    return model, genfun, warnings
