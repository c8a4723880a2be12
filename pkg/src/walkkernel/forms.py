"""Affine forms in boundary unknowns, with series coefficients.

An unknown is either a scalar series Q_{i,j} (a Point) or a whole function:
Q_{-,i}(x) (walks ending on the line y=i), Q_{i,-}(x) (on the line x=i, with
x marking the height) or the diagonal function Q^d_j(xbar) = sum_k
Q_{k,k+j} xbar^k.  Line functions only carry nonnegative powers of x and
diagonal functions only nonpositive ones; a flipped tag is the same function
after x -> 1/x, which reverses that side.

The moves of the kernel method act on these forms: [y^j] extraction of an
orbit sum, splitting into positive/zero/negative x-parts, elimination, root
substitution and linear solving.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import inf

from .errors import (
    KernelNotCancelled,
    NotEliminable,
    PrecisionComparison,
    SingularSystem,
    UnboundedSupport,
)
from .models import KernelModel
from .series import PuiseuxSeries, invert, series, substitute_x
from .walks import WalkTable, boundary_series
from .xypoly import TriPoly

MAX_CROSSING = 24


@dataclass(frozen=True, order=True)
class UnknownTag:
    kind: str
    i: int
    j: int = 0
    flipped: bool = False

    @classmethod
    def point(cls, i, j):
        return cls("point", i, j)

    @classmethod
    def line_y(cls, i):
        return cls("line_y", i)

    @classmethod
    def line_x(cls, i):
        return cls("line_x", i)

    @classmethod
    def diag(cls, j):
        return cls("diag", j)

    @property
    def is_function(self):
        return self.kind != "point"

    @property
    def side(self):
        """+1 if the function has only nonnegative x-powers, -1 if nonpositive."""
        if not self.is_function:
            return 0
        s = -1 if self.kind == "diag" else 1
        return -s if self.flipped else s

    def flip(self):
        if not self.is_function:
            return self
        return UnknownTag(self.kind, self.i, self.j, not self.flipped)

    def entry(self, e):
        """The Point multiplying x^e in this function, or None."""
        n = -e if self.flipped else e
        if self.kind == "line_y":
            return UnknownTag.point(n, self.i) if n >= 0 else None
        if self.kind == "line_x":
            return UnknownTag.point(self.i, n) if n >= 0 else None
        if self.kind == "diag":
            k = -n
            return UnknownTag.point(k, k + self.i) if k >= 0 and k + self.i >= 0 else None
        raise ValueError("points have no entries")

    def __str__(self):
        arg = "xbar" if self.flipped != (self.kind == "diag") else "x"
        if self.kind == "point":
            if (self.i, self.j) == (0, 0):
                return "Q(0,0)"
            return f"Q_{{{self.i},{self.j}}}"
        if self.kind == "line_y":
            return f"Q({arg},0)" if self.i == 0 else f"Q_{{-,{self.i}}}({arg})"
        if self.kind == "line_x":
            return f"Q(0,{arg})" if self.i == 0 else f"Q_{{{self.i},-}}({arg})"
        return f"Q^d_{self.i}({arg})"


P = UnknownTag.point
Q00 = P(0, 0)
LINE_Y0 = UnknownTag.line_y(0)
LINE_X0 = UnknownTag.line_x(0)


class LinearForm:
    """known + sum coeff[tag] * tag, exact through ``order`` (a t-exponent)."""

    __slots__ = ("known", "terms", "order")

    def __init__(self, known=None, terms=None, order=None):
        self.known = series(0) if known is None else series(known)
        orders = [self.known.order]
        kept = {}
        for tag, c in (terms or {}).items():
            c = series(c)
            orders.append(c.order)
            if not c.is_zero():
                kept[tag] = c
        self.terms = kept
        self.order = min(orders) if order is None else min(min(orders), order)

    @classmethod
    def of(cls, tag, coeff=1):
        return cls(None, {tag: series(coeff)})

    def tags(self):
        return set(self.terms)

    def function_tags(self):
        return {t for t in self.terms if t.is_function}

    def point_tags(self):
        return {t for t in self.terms if not t.is_function}

    def coefficient(self, tag):
        return self.terms.get(tag, series(0))

    def map(self, fn):
        return LinearForm(fn(self.known), {t: fn(c) for t, c in self.terms.items()})

    def __add__(self, other):
        terms = dict(self.terms)
        for tag, c in other.terms.items():
            terms[tag] = terms[tag] + c if tag in terms else c
        return LinearForm(self.known + other.known, terms, min(self.order, other.order))

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        s = series(s)
        return LinearForm(self.known * s, {t: c * s for t, c in self.terms.items()})

    __rmul__ = __mul__

    def truncate(self, order):
        return self.map(lambda c: c.truncate(order))

    def flip(self):
        """The same identity after x -> 1/x."""
        return LinearForm(
            self.known.invert_x(), {t.flip(): c.invert_x() for t, c in self.terms.items()}, self.order
        )

    def drop(self, tag):
        terms = dict(self.terms)
        terms.pop(tag, None)
        return LinearForm(self.known, terms, self.order)

    def evaluate(self, values) -> PuiseuxSeries:
        """known + sum coeff * value[tag]."""
        total = self.known
        for tag, c in self.terms.items():
            total = total + c * values[tag]
        return total

    def __repr__(self):
        parts = [f"[{self.known!r}]"]
        for tag in sorted(self.terms):
            parts.append(f"({self.terms[tag]!r})*{tag}")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# oracle values of tags


def tag_series(table: WalkTable, tag: UnknownTag) -> PuiseuxSeries:
    if tag.kind == "point":
        s = boundary_series(table, ("point", tag.i, tag.j))
    elif tag.kind in ("line_y", "line_x"):
        s = boundary_series(table, (tag.kind, tag.i))
    else:
        s = boundary_series(table, ("diag", tag.i)).invert_x()
    return s.invert_x() if tag.flipped else s


def oracle_residual(form: LinearForm, table: WalkTable) -> PuiseuxSeries:
    """The form with every unknown replaced by its enumerated series."""
    values = {tag: tag_series(table, tag) for tag in form.terms}
    return form.evaluate(values)


# ---------------------------------------------------------------------------
# [y^j] extraction

# The six orbit arguments of Q, as monomial maps (x -> x^a y^b, y -> x^c y^d).
ORBIT = {
    1: ((1, 0), (0, 1)),
    2: ((-1, -1), (0, 1)),
    3: ((0, 1), (-1, -1)),
    4: ((0, 1), (1, 0)),
    5: ((-1, -1), (1, 0)),
    6: ((1, 0), (-1, -1)),
}


def _extract(element, j):
    """[y^j] of a boundary object, as (tag, x-shift) or None.

    ``element`` is ("Q", g) for Q at the g-th orbit argument, ("V", n) for
    the n-th boundary function Q(x,0), Q(0,y), Q(xbar ybar,0),
    Q(0,xbar ybar), Q(0,x), Q(y,0), or "Q00".
    """
    if element == "Q00":
        return (Q00, 0) if j == 0 else None
    kind, g = element
    if kind == "Q":
        if g == 1:
            return (UnknownTag.line_y(j), 0) if j >= 0 else None
        if g == 2:
            return UnknownTag.diag(j), 0
        if g == 3:
            return UnknownTag.diag(-j), j
        if g == 4:
            return (UnknownTag.line_x(j), 0) if j >= 0 else None
        if g == 5:
            return (UnknownTag.line_x(-j), j) if j <= 0 else None
        if g == 6:
            return (UnknownTag.line_y(-j), j) if j <= 0 else None
    if kind == "V":
        if g == 1:
            return (LINE_Y0, 0) if j == 0 else None
        if g == 2:
            return (P(0, j), 0) if j >= 0 else None
        if g == 3:
            return (P(-j, 0), j) if j <= 0 else None
        if g == 4:
            return (P(0, -j), j) if j <= 0 else None
        if g == 5:
            return (LINE_X0, 0) if j == 0 else None
        if g == 6:
            return (P(j, 0), 0) if j >= 0 else None
    raise ValueError(f"unknown element {element!r}")


def _tri_to_series(terms):
    coeffs = {}
    for (n, i), c in terms.items():
        coeffs.setdefault(n, {})
        coeffs[n][i] = coeffs[n].get(i, 0) + c
    return PuiseuxSeries(coeffs)


def y0_extract(coeff: TriPoly, element, j=0) -> LinearForm:
    """[y^j] of coeff(x,y) * element as a linear form.

    ``element`` may also be "one" for the known part.
    """
    buckets = {}
    known = {}
    for (n, p, q), c in coeff.terms.items():
        if element == "one":
            if q == j:
                known[(n, p)] = known.get((n, p), 0) + c
            continue
        hit = _extract(element, j - q)
        if hit is None:
            continue
        tag, shift = hit
        if tag.kind == "point" and (tag.i < 0 or tag.j < 0):
            continue
        b = buckets.setdefault(tag, {})
        b[(n, p + shift)] = b.get((n, p + shift), 0) + c
    return LinearForm(_tri_to_series(known), {tag: _tri_to_series(b) for tag, b in buckets.items()})


def extract_sum(pairs, j=0) -> LinearForm:
    """[y^j] of sum coeff * element over (coeff, element) pairs."""
    total = LinearForm()
    for coeff, element in pairs:
        total = total + y0_extract(coeff, element, j)
    return total


# ---------------------------------------------------------------------------
# section identities


def functional_equation_pairs(model: KernelModel, g=1):
    """The functional equation at orbit argument g as (coeff, element) pairs
    summing to zero: K Q(g) - 1/c - A'(g) Q(X,0) - B'(g) Q(0,Y) - (kappa+tG(g)) Q00."""
    xmap, ymap = ORBIT[g]
    X_col = {1: 1, 2: 3, 3: 6, 4: 6, 5: 3, 6: 1}[g]
    Y_col = {1: 2, 2: 2, 3: 4, 4: 5, 5: 5, 6: 4}[g]
    return [
        (model.K.subs(xmap, ymap), ("Q", g)),
        (-model.constant, "one"),
        (-model.A_prime.subs(xmap, ymap), ("V", X_col)),
        (-model.B_prime.subs(xmap, ymap), ("V", Y_col)),
        (-model.origin_coeff.subs(xmap, ymap), "Q00"),
    ]


_AXIS_ELEMENT = {"y": 1, "x": 4, "diag": 2}


def section_identity(model: KernelModel, axis: str, k: int) -> LinearForm:
    """The [y^k] coefficient of the functional equation, as a form equal to 0.

    axis "y" relates the line functions Q_{-,i}(x), axis "x" the functions
    Q_{i,-}(x), and axis "diag" the diagonal functions Q^d_j(xbar) (it is
    the same extraction applied to the equation at (xbar ybar, y)).
    """
    g = _AXIS_ELEMENT[axis]
    if axis != "diag" and k < 0:
        raise ValueError("section index must be nonnegative")
    return extract_sum(functional_equation_pairs(model, g), k)


def point_identity(model: KernelModel, i: int, j: int) -> LinearForm:
    """The [x^i y^j] coefficient of the functional equation: a relation
    between Q_{i,j} and the points one step away from it."""
    return x_coefficient_form(section_identity(model, "y", j), i)


def descent_step(model: KernelModel):
    """The step that lowers the height by one (SW or S)."""
    (step,) = [s for s in model.spec.steps if s[1] == -1]
    return step


def reduce_points(model: KernelModel, form: LinearForm) -> LinearForm:
    """Rewrite Points through the point identities until none is left that
    can still be moved towards the x-axis.

    A walk reaches q = p + s from p by the descent step s, so the identity
    at q expresses Q_p through Q_q and points that are lower (or, for the
    east neighbour, on the same level).  Repeating this from the highest
    point down ends at points on the axes.
    """
    dx, dy = descent_step(model)
    while True:
        movable = [tag for tag in form.point_tags() if tag.i + dx >= 0 and tag.j + dy >= 0]
        if not movable:
            return form
        tag = max(movable, key=lambda p: (p.i + p.j, p.j))
        form = eliminate(form, point_identity(model, tag.i + dx, tag.j + dy), tag)


# ---------------------------------------------------------------------------
# positive / zero / negative parts


def _crossing(coeff: PuiseuxSeries, tag: UnknownTag, sel, max_crossing):
    """[x^sel] of coeff * F for a function tag F, in Point tags.

    Meant for the selectors away from F's own side; returns
    {point_tag: coefficient}.
    """
    bounds = coeff.x_bounds()
    if bounds is None:
        return {}
    lo, hi = bounds
    # F = sum_m f_m x^m; the term c_e f_m lands on x^(e+m)
    if tag.side > 0:
        m_range = range(0, -lo + 1)
    else:
        m_range = range(-hi, 1)
    entries = [(m, tag.entry(m)) for m in m_range]
    entries = [(m, pt) for m, pt in entries if pt is not None]
    if len(entries) > max_crossing:
        raise UnboundedSupport(
            f"{tag} crosses into [x^{sel}] through {len(entries)} entries (limit {max_crossing})"
        )
    out = {}
    for m, pt in entries:
        part = coeff.shift_x(m).x_part(sel)
        if not part.is_zero():
            out[pt] = part
    return out


def x_split(form: LinearForm, max_crossing=MAX_CROSSING):
    """Split into ([x^>], [x^0], [x^<]) parts.

    A function tag stays on its own side with its full coefficient; the
    finitely many terms of coeff * F that land on the other side are
    rewritten through Point tags and subtracted from F's side.
    """
    parts = {}
    for sel in ("pos", "zero", "neg"):
        known = form.known.x_part(sel)
        terms = {}
        for tag, c in form.terms.items():
            if tag.is_function:
                continue
            terms[tag] = c.x_part(sel)
        parts[sel] = [known, terms]
    for tag, c in form.terms.items():
        if not tag.is_function:
            continue
        home = "pos" if tag.side > 0 else "neg"
        crossing_total = {}
        for sel in ("pos", "zero", "neg"):
            if sel == home:
                continue
            cross = _crossing(c, tag, sel, max_crossing)
            for pt, cc in cross.items():
                terms = parts[sel][1]
                terms[pt] = terms[pt] + cc if pt in terms else cc
                crossing_total[pt] = crossing_total[pt] + cc if pt in crossing_total else cc
        terms = parts[home][1]
        terms[tag] = terms[tag] + c if tag in terms else c
        for pt, cc in crossing_total.items():
            terms[pt] = terms[pt] - cc if pt in terms else -cc
    order = form.order
    return tuple(LinearForm(parts[s][0], parts[s][1], order) for s in ("pos", "zero", "neg"))


def x_coefficient_form(form: LinearForm, e: int, max_crossing=MAX_CROSSING) -> LinearForm:
    """[x^e] of the identity, with function entries rewritten as Points."""
    known = form.known.x_coefficient(e)
    terms = {}
    for tag, c in form.terms.items():
        if not tag.is_function:
            terms[tag] = terms.get(tag, series(0)) + c.x_coefficient(e)
            continue
        bounds = c.x_bounds()
        if bounds is None:
            continue
        lo, hi = bounds
        ms = [m for m in range(e - hi, e - lo + 1) if tag.entry(m) is not None]
        if len(ms) > max_crossing:
            raise UnboundedSupport(f"[x^{e}] of {tag} term involves {len(ms)} entries")
        for m in ms:
            pt = tag.entry(m)
            cc = c.x_coefficient(e - m)
            if not cc.is_zero():
                terms[pt] = terms[pt] + cc if pt in terms else cc
    return LinearForm(known, terms, form.order)


# ---------------------------------------------------------------------------
# elimination


def eliminate(target: LinearForm, using: LinearForm, tag: UnknownTag, mode="divide") -> LinearForm:
    """Remove ``tag`` from target with the help of ``using``.

    mode "divide": target - (c_t / c_u) using, needs c_u with an invertible
    monomial leading term.  mode "cross": c_u * target - c_t * using, which
    keeps polynomial coefficients polynomial (the identity is rescaled by
    c_u).
    """
    if tag not in target.terms:
        return target
    cu = using.terms.get(tag)
    if cu is None:
        raise NotEliminable(f"{tag} does not occur in the eliminating form")
    ct = target.terms[tag]
    if mode == "cross":
        out = target * cu - using * ct
    else:
        lead = cu.coeffs.get(cu.low) if cu.low is not None else None
        if lead is None or len(lead) != 1:
            raise NotEliminable(f"coefficient of {tag} has no invertible monomial leading term")
        out = target - using * (ct * invert(cu))
    return out.drop(tag)


# ---------------------------------------------------------------------------
# root substitution


def substitute_root(form: LinearForm, root, need=0) -> LinearForm:
    """Evaluate at x = root, checking that every function tag drops out.

    Every function-tag coefficient must vanish at the root through the
    accurate order of the substituted form.
    """
    known = substitute_x(form.known, root)
    terms = {}
    for tag, c in form.terms.items():
        val = substitute_x(c, root)
        if tag.is_function:
            if not val.is_zero():
                raise KernelNotCancelled(
                    f"coefficient of {tag} is {val.terms()[0][2]}*t^{val.valuation} at the root, not 0"
                )
            # the vanishing is only known to the accuracy of the coefficient
            if val.order < known.order:
                known = known.truncate(val.order)
            continue
        terms[tag] = val
    out = LinearForm(known, terms)
    if out.order < need:
        raise PrecisionComparison(f"substituted form is accurate to t^{out.order}, need t^{need}")
    return out


# ---------------------------------------------------------------------------
# linear solving


def determinant(matrix):
    """Leibniz determinant of a small square matrix of series."""
    n = len(matrix)
    total = series(0)
    for perm in permutations(range(n)):
        sign = 1
        seen = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i] > seen[j]:
                    sign = -sign
        term = series(sign)
        for i, j in enumerate(perm):
            term = term * matrix[i][j]
            if term.is_zero() and term.is_exact:
                break
        total = total + term
    return total


def coefficient_matrix(equations, unknowns):
    return [[eq.coefficient(u) for u in unknowns] for eq in equations]


def solve_system(equations, unknowns):
    """Solve sum_j coeff_ij u_j + known_i = 0 for the Point unknowns.

    Gaussian elimination with minimal-valuation pivots.  Returns
    (assignment, determinant).  Raises SingularSystem when no pivot is
    known to be nonzero.
    """
    n = len(unknowns)
    if len(equations) != n:
        raise ValueError("need as many equations as unknowns")
    for eq in equations:
        extra = eq.tags() - set(unknowns)
        if extra:
            raise ValueError(f"equation has unknowns outside the system: {sorted(map(str, extra))}")
    rows = [[eq.coefficient(u) for u in unknowns] + [-eq.known] for eq in equations]
    det = series(1)
    cols = list(range(n))
    for k in range(n):
        best = None
        for r in range(k, n):
            for cidx in range(k, n):
                v = rows[r][cols[cidx]]
                if v.is_zero():
                    continue
                key = (v.valuation, r, cidx)
                if best is None or key < best[0]:
                    best = (key, r, cidx)
        if best is None:
            raise SingularSystem(f"no nonzero pivot at step {k + 1} of {n}")
        _, r, cidx = best
        if r != k:
            rows[k], rows[r] = rows[r], rows[k]
            det = -det
        if cidx != k:
            cols[k], cols[cidx] = cols[cidx], cols[k]
            det = -det
        pivot = rows[k][cols[k]]
        det = det * pivot
        inv = invert(pivot)
        for r2 in range(k + 1, n):
            f = rows[r2][cols[k]]
            if f.is_zero():
                continue
            f = f * inv
            for c2 in range(k, n):
                rows[r2][cols[c2]] = rows[r2][cols[c2]] - f * rows[k][cols[c2]]
            rows[r2][n] = rows[r2][n] - f * rows[k][n]
    sol = [None] * n
    for k in reversed(range(n)):
        acc = rows[k][n]
        for c2 in range(k + 1, n):
            acc = acc - rows[k][cols[c2]] * sol[cols[c2]]
        sol[cols[k]] = acc * invert(rows[k][cols[k]])
    return {unknowns[i]: sol[i] for i in range(n)}, det


def leading_term(s: PuiseuxSeries):
    """(coefficient, t-exponent) of the lowest term, or None if zero to accuracy."""
    if s.is_zero():
        return None
    lo = s.low
    return s.coeffs[lo].get(0, Fraction(0)), Fraction(lo, s.ram)


__all__ = [
    "UnknownTag",
    "LinearForm",
    "P",
    "Q00",
    "LINE_Y0",
    "LINE_X0",
    "ORBIT",
    "tag_series",
    "oracle_residual",
    "y0_extract",
    "extract_sum",
    "functional_equation_pairs",
    "section_identity",
    "x_split",
    "x_coefficient_form",
    "eliminate",
    "substitute_root",
    "determinant",
    "coefficient_matrix",
    "solve_system",
    "leading_term",
    "point_identity",
    "descent_step",
    "reduce_points",
]
