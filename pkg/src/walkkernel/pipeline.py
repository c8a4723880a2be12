"""The kernel-method solver for both models.

Stages, in order: orbit sums reduced to their boundary unknowns, the master
equation in Q(x,0) and Q^d_0, the canonical factorization of the
discriminant, the split into two kernel equations, kernel roots, the scalar
H equations, a linear solve, and back-substitution to Q(x,0), Q(0,y) and
Q(x,y).  Every stage can be checked against the walk table with
``oracle_residual``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import inf

import sympy

from .errors import (
    AllSystemsSingular,
    DegenerateRegime,
    DivisibilityFailure,
    NonSquareLeadingTerm,
    NotEliminable,
    PrecisionComparison,
    PrecisionExhausted,
    SingularSystem,
    UnboundedSupport,
    UnknownSetMismatch,
)
from .forms import (
    LINE_X0,
    LINE_Y0,
    Q00,
    LinearForm,
    UnknownTag,
    determinant,
    eliminate,
    extract_sum,
    leading_term,
    reduce_points,
    section_identity,
    solve_system,
    substitute_root,
    x_coefficient_form,
    x_split,
)
from .models import KernelModel, build_model, model_spec
from .orbit import orbit_system
from .series import (
    LaurentPoly,
    PuiseuxSeries,
    RootSeries,
    invert,
    puiseux_roots,
    series,
    sqrt,
    use_working_order,
    working_order,
)
from .xypoly import TriPoly

P = UnknownTag.point
D0 = UnknownTag.diag(0)
D1 = UnknownTag.diag(1)
T_SYM, X_SYM = sympy.symbols("t x")

# Unknowns allowed in each reduced equation, keyed by model.  At special
# weights some coefficients vanish, so a form may use a subset.
FULL_SET = frozenset({Q00, LINE_Y0, LINE_X0, D0, D1})
SPLIT_SETS = {
    "reverse_kreweras": {
        "pos": frozenset({Q00, P(0, 1), P(1, 0), LINE_Y0, LINE_X0}),
        "neg": frozenset({Q00, P(0, 1), P(1, 0), D0, D1}),
    },
    "kreweras": {
        "pos": frozenset({Q00, P(1, 0), P(2, 0), P(3, 0), LINE_Y0, LINE_X0}),
    },
}
SCALARS = {
    "reverse_kreweras": (Q00, P(0, 1), P(1, 0)),
    "kreweras": (Q00, P(1, 0), P(2, 0), P(3, 0), P(4, 0)),
}
MASTER_SETS = {name: frozenset(s) | {LINE_Y0, D0} for name, s in SCALARS.items()}
MASTER_SETS["kreweras"] = MASTER_SETS["kreweras"] - {P(4, 0)}
KERNEL_SETS = {
    name: {"pos": frozenset(s) | {LINE_Y0}, "zero": frozenset(s), "neg": frozenset(s) | {D0}}
    for name, s in SCALARS.items()
}
MAX_SHIFT = 8


def _check_tags(form: LinearForm, allowed, what):
    extra = form.tags() - set(allowed)
    if extra:
        raise UnknownSetMismatch(f"{what} has unexpected unknowns {sorted(map(str, extra))}")
    return form


def shifted(form: LinearForm, s: int) -> LinearForm:
    """The same identity multiplied by x^s."""
    if s == 0:
        return form
    return form.map(lambda c: c.shift_x(s))


# ---------------------------------------------------------------------------
# K_j = [y^j] 1/K


def _t():
    return PuiseuxSeries.monomial(1, 1, 0)


def discriminant(model: KernelModel) -> PuiseuxSeries:
    """Delta = (1 - t A_0)^2 - 4 t^2 A_{-1} A_1 for S = A_{-1}/y + A_0 + A_1 y."""
    am, a0, a1 = (PuiseuxSeries({0: p.terms}) for p in model.y_parts())
    one = series(1)
    t = _t()
    return (one - t * a0) * (one - t * a0) - t * t * am * a1 * 4


def kernel_Kj(model: KernelModel, js) -> dict:
    """{j: [y^j] 1/K} through the working order.

    K_j = Y_0^(-j)/sqrt(Delta) for j <= 0 and Y_1^(-j)/sqrt(Delta) for j >= 0,
    with Y_0 the small root and Y_1 the large root of K in y.
    """
    _, a0, a1 = (PuiseuxSeries({0: p.terms}) for p in model.y_parts())
    one = series(1)
    t = _t()
    root = sqrt(discriminant(model))
    inv_root = invert(root)
    y0 = (one - t * a0 - root) * invert(t * a1 * 2)
    inv_y1 = (t * a1 * 2) * invert(one - t * a0 + root)
    out = {}
    for j in js:
        base = y0 if j <= 0 else inv_y1
        p = inv_root
        for _ in range(abs(j)):
            p = p * base
        out[j] = p
    return out


# ---------------------------------------------------------------------------
# orbit sums


def _identity_for(model, tag):
    """The section identity that removes a function tag in favour of lower ones."""
    if tag.kind == "line_y":
        return section_identity(model, "y", tag.i - 1)
    if tag.kind == "line_x":
        return section_identity(model, "x", tag.i - 1)
    if tag.i > 1:
        return section_identity(model, "diag", tag.i - 1)
    return section_identity(model, "diag", tag.i + 1)


def reduce_functions(model, form: LinearForm, keep=FULL_SET) -> LinearForm:
    """Eliminate function tags outside ``keep``, farthest from the axes first."""
    while True:
        extra = [tag for tag in form.function_tags() if tag not in keep]
        if not extra:
            return form
        tag = max(extra, key=lambda tg: (abs(tg.i), tg))
        form = eliminate(form, _identity_for(model, tag), tag, mode="cross")


_RHS_TAG = {"Q00": Q00, ("V", 1): LINE_Y0, ("V", 5): LINE_X0}


def _kj_form(parts: dict, model) -> LinearForm:
    """[y^0] of (sum over parts of coeff(x,y) * element) / K, through the K_j.

    ``parts`` maps "one" or a boundary element to a TriPoly coefficient.
    """
    spans = [p.y_range() for p in parts.values() if not p.is_zero()]
    if not spans:
        return LinearForm()
    lo = min(s[0] for s in spans)
    hi = max(s[1] for s in spans)
    K = kernel_Kj(model, range(-hi, -lo + 1))
    known = series(0)
    terms = {}
    for element, p in parts.items():
        if p.is_zero():
            continue
        acc = series(0)
        for j in range(lo, hi + 1):
            c = p.y_coeff(j)
            if not c.is_zero():
                acc = acc + c * K[-j]
        if element == "one":
            known = known + acc
        else:
            tag = _RHS_TAG[element]
            terms[tag] = terms[tag] + acc if tag in terms else acc
    return LinearForm(known, terms)


def full_orbit_sum_y0(model: KernelModel, system=None) -> LinearForm:
    """[y^0] of N.Q = N.C/K, as a form equal to zero.

    The left side is reduced to Q(0,0), Q(x,0), Q(0,x), Q^d_0 and Q^d_1; the
    right side is zero for reverse Kreweras and a K_j combination otherwise.
    """
    system = system or orbit_system(model)
    lhs = extract_sum([(n, ("Q", g)) for g, n in enumerate(system.N, start=1) if not n.is_zero()])
    known, q00 = system.NC()
    rhs = _kj_form({"one": known, "Q00": q00}, model)
    form = reduce_functions(model, lhs - rhs)
    return _check_tags(form, FULL_SET, "full-orbit [y^0] form")


def _best_split(model, form: LinearForm, side: str, allowed, need):
    """x_split of x^s * form over shifts s, keeping the part on ``side``.

    Points in the part are pushed to the axes with the point identities.
    Among the shifts whose part contains ``need`` and only ``allowed``
    unknowns, the one with fewest unknowns wins (then the smallest |s|).
    """
    best = None
    for s in sorted(range(-MAX_SHIFT, MAX_SHIFT + 1), key=lambda v: (abs(v), v)):
        try:
            part = x_split(shifted(form, s))[{"pos": 0, "zero": 1, "neg": 2}[side]]
        except UnboundedSupport:
            continue
        if need not in part.terms:
            continue
        part = reduce_points(model, part)
        if part.tags() - set(allowed):
            continue
        key = (len(part.tags()), abs(s))
        if best is None or key < best[0]:
            best = (key, s, part)
    if best is None:
        raise UnknownSetMismatch(
            f"no shift gives a [x^{side}] part over {sorted(map(str, allowed))}"
        )
    return best[1], best[2]


@dataclass(frozen=True)
class FullOrbitSplits:
    form: LinearForm
    pos: LinearForm
    neg: LinearForm | None
    shifts: tuple


def full_orbit_splits(model: KernelModel, system=None) -> FullOrbitSplits:
    """The [x^>] part (Q(x,0) against Q(0,x)) and, for reverse Kreweras, the
    [x^<] part (Q^d_0 against Q^d_1) of the full-orbit form."""
    form = full_orbit_sum_y0(model, system)
    sets = SPLIT_SETS[model.name]
    sp, pos = _best_split(model, form, "pos", sets["pos"], LINE_X0)
    neg, sn = None, None
    if "neg" in sets and D1 in form.terms:
        try:
            sn, neg = _best_split(model, form, "neg", sets["neg"], D1)
        except UnknownSetMismatch:
            neg = None
    return FullOrbitSplits(form, pos, neg, (sp, sn))


def _half_orbit_raw(model: KernelModel, system) -> LinearForm:
    lhs = extract_sum([(n, ("Q", g)) for g, n in enumerate(system.N2, start=1) if not n.is_zero()])
    rhs = _kj_form(system.N2C2(), model)
    return reduce_functions(model, lhs - rhs)


# ---------------------------------------------------------------------------
# master equation


def kernel_polynomials(model: KernelModel):
    """(P_{x,0}, P^d_0) as sympy expressions in t and x at the model's weights."""
    a, b, _ = (sympy.Rational(w.numerator, w.denominator) for w in model.weights)
    t, x = T_SYM, X_SYM
    if model.name == "reverse_kreweras":
        px0 = (a**2 * t**2 + x - a * x - a * t * x**2 + a**2 * t * x**2) * (
            2 * a * b * t**2 + 2 * x - a * x - b * x - a * t * x**2 - b * t * x**2 + 2 * a * b * t * x**2
        )
        pd0 = (-a * t + a**2 * t + x - a * x + a**2 * t**2 * x**2) * (
            -b * t + b**2 * t + x - b * x + b**2 * t**2 * x**2
        )
    else:
        px0 = (
            (t * a - t * a**2 - x + a * x - t**2 * a**2 * x**2)
            * (t * b - t * b**2 - x + b * x - t**2 * b**2 * x**2)
            * (t * a + t * b - 2 * t * a * b - 2 * x + a * x + b * x - 2 * t**2 * a * b * x**2)
        )
        pd0 = (t**2 * a**2 + x - a * x - t * a * x**2 + t * a**2 * x**2) * (
            t**2 * b**2 + x - b * x - t * b * x**2 + t * b**2 * x**2
        )
    return sympy.expand(px0), sympy.expand(pd0)


def _to_sympy(s: PuiseuxSeries, margin=3):
    """An exact polynomial in t, x (x-powers may be negative) from a series.

    A truncated series is accepted only when its last ``margin`` accurate
    orders are zero, the sign that it has terminated.
    """
    s = s.normalized()
    if s.ram != 1:
        raise ValueError("expected integer powers of t")
    if not s.is_exact:
        top = max(s.coeffs) if s.coeffs else -1
        if top > s.accurate_order - margin:
            raise PrecisionExhausted("coefficient is not yet seen to be a polynomial")
    return sympy.Add(
        *[
            sympy.Rational(c.numerator, c.denominator) * T_SYM**k * X_SYM**e
            for k, p in s.coeffs.items()
            for e, c in p.items()
        ]
    )


def _from_sympy(expr) -> PuiseuxSeries:
    expr = sympy.expand(expr)
    coeffs = {}
    for term in sympy.Add.make_args(expr):
        c, rest = term.as_coeff_Mul()
        powers = rest.as_powers_dict()
        e = int(powers.get(X_SYM, 0))
        k = int(powers.get(T_SYM, 0))
        coeffs.setdefault(k, {})[e] = coeffs.get(k, {}).get(e, 0) + Fraction(int(c.p), int(c.q))
    return PuiseuxSeries(coeffs)


def _poly(expr):
    """(Poly in t, x, x-shift) with expr = poly / x^shift."""
    expr = sympy.expand(expr)
    low = 0
    for term in sympy.Add.make_args(expr):
        low = min(low, int(term.as_powers_dict().get(X_SYM, 0)))
    return sympy.Poly(sympy.expand(expr * X_SYM**-low), T_SYM, X_SYM, domain="QQ"), -low


def _unit_lead(factor) -> bool:
    """True if the lowest t-part of the factor is a single monomial in x."""
    poly = sympy.Poly(factor, T_SYM, X_SYM)
    low = min(m[0] for m in poly.monoms())
    return sum(1 for m in poly.monoms() if m[0] == low) == 1


def _spurious_factor(mu, nu, px0):
    """Common factor of the two function coefficients that is not part of P_{x,0}.

    Cross-multiplied eliminations leave such factors behind; removing them
    keeps the coefficient of Q^d_0 of low degree in x, so the split parts
    involve only the expected points.
    """
    pm, _ = _poly(mu)
    pn, _ = _poly(nu)
    g = sympy.gcd(pm, pn)
    keep = sympy.gcd(g, sympy.Poly(px0, T_SYM, X_SYM, domain="QQ"))
    spur = sympy.div(g, keep)[0]
    out = sympy.Integer(1)
    _, factors = spur.factor_list()
    for fac, mult in factors:
        expr = fac.as_expr()
        if expr.free_symbols and _unit_lead(expr):
            out = out * expr**mult
    return sympy.expand(out)


def _convention_scale(nu, pd0):
    """The constant that makes the Q^d_0 coefficient -2ac P^d_0(xbar) r(x,t)
    with r having leading coefficient 1.

    The leading coefficient of r is read at its lowest power of t and the
    highest power of x there.  This fixes the otherwise arbitrary scale of
    the master equation, and with it the determinants of the H systems.
    """
    flipped = sympy.expand(pd0.subs(X_SYM, 1 / X_SYM))
    ratio = sympy.cancel(nu / flipped)
    if sympy.denom(ratio).free_symbols - {X_SYM}:
        ratio = nu
    num, shift = _poly(sympy.numer(ratio) / sympy.denom(ratio))
    low = min(m[0] for m in num.monoms())
    top = max(m[1] for m in num.monoms() if m[0] == low)
    return num.coeff_monomial(T_SYM**low * X_SYM**top)


@dataclass(frozen=True)
class MasterEquation:
    form: LinearForm
    mu: object  # sympy: (coefficient of Q(x,0)) * sqrt(Delta)
    nu: object  # sympy: coefficient of Q^d_0(xbar)
    removed: object  # sympy: the factor divided out


def half_orbit_sum_y0(model: KernelModel, system=None, splits=None) -> MasterEquation:
    """The master equation mu Q(x,0)/sqrt(Delta) + nu Q^d_0 = ... .

    Built from [y^0] of N2.Q = N2.C2/K by eliminating Q(0,x) (and Q^d_1)
    with the full-orbit split parts, then divided by the common factor of
    the two function coefficients that is not a kernel factor, and scaled
    so that nu = -2ac P^d_0(xbar) r with r of leading coefficient 1.
    """
    system = system or orbit_system(model)
    splits = splits or full_orbit_splits(model, system)
    form = _half_orbit_raw(model, system)
    form = eliminate(form, splits.pos, LINE_X0, mode="cross")
    if D1 in form.terms:
        if splits.neg is None:
            raise NotEliminable("Q^d_1 remains but the full-orbit [x^<] part is unavailable")
        form = eliminate(form, splits.neg, D1, mode="cross")
    form = _check_tags(reduce_points(model, form), MASTER_SETS[model.name], "master equation")
    root = sqrt(discriminant(model))
    mu = _to_sympy(form.terms[LINE_Y0] * root)
    nu = _to_sympy(form.terms[D0])
    px0, pd0 = kernel_polynomials(model)
    spur = _spurious_factor(mu, nu, px0)
    mu2 = sympy.cancel(mu / spur)
    nu2 = sympy.cancel(nu / spur)
    if sympy.denom(mu2).free_symbols - {X_SYM} or sympy.denom(nu2).free_symbols - {X_SYM}:
        raise DivisibilityFailure("removed factor does not divide both function coefficients")
    a, _, c = (sympy.Rational(w.numerator, w.denominator) for w in model.weights)
    scale = -2 * a * c / _convention_scale(nu2, pd0)
    spur = sympy.expand(spur / scale)
    mu2 = sympy.expand(mu2 * scale)
    nu2 = sympy.expand(nu2 * scale)
    inv = invert(_from_sympy(spur))
    terms = {tag: c * inv for tag, c in form.terms.items() if tag not in (LINE_Y0, D0)}
    terms[LINE_Y0] = _from_sympy(mu2) * invert(root)
    terms[D0] = _from_sympy(nu2)
    return MasterEquation(LinearForm(form.known * inv, terms), mu2, nu2, spur)


# ---------------------------------------------------------------------------
# canonical factorization


@dataclass(frozen=True)
class Factorization:
    delta: PuiseuxSeries
    roots: tuple
    delta0: PuiseuxSeries
    delta_plus: PuiseuxSeries
    delta_minus: PuiseuxSeries
    inv_sqrt_plus: PuiseuxSeries
    sqrt_zero_minus: PuiseuxSeries


def canonical_factorization(model: KernelModel) -> Factorization:
    """Delta = Delta_0 Delta_-(xbar) Delta_+(x) from the roots of Delta in x.

    Roots that vanish at t = 0 go into Delta_- = prod (1 - X/x), the
    divergent ones into Delta_+ = prod (1 - x/X), and
    Delta_0 = (-1)^d [x^d]Delta prod X over the divergent roots.
    """
    delta = discriminant(model)
    lo, hi = delta.x_bounds()
    roots = tuple(puiseux_roots(delta.shift_x(-lo)))
    x = PuiseuxSeries.monomial(1, 0, 1)
    xbar = PuiseuxSeries.monomial(1, 0, -1)
    one = series(1)
    minus = one
    plus = one
    delta0 = series(delta.x_coefficient(hi)) * (-1) ** hi
    for r in roots:
        if r.finite:
            minus = minus * (one - r.value * xbar)
        else:
            plus = plus * (one - x * invert(r.value))
            delta0 = delta0 * r.value
    delta0 = delta0.normalized()
    return Factorization(
        delta,
        roots,
        delta0,
        plus.normalized(),
        minus.normalized(),
        invert(sqrt(plus)).normalized(),
        sqrt(delta0 * minus).normalized(),
    )


# ---------------------------------------------------------------------------
# the two kernel equations


@dataclass(frozen=True)
class KernelEquations:
    """[x^>], [x^0] and [x^<] parts of the master equation over sqrt(Delta_+).

    ``neg`` has been sent through x -> 1/x, so its function is Q^d_0(x).
    """

    pos: LinearForm
    zero: LinearForm
    neg: LinearForm
    shifts: tuple


def kernel_equations(model, master: MasterEquation, fact: Factorization) -> KernelEquations:
    """Split the master equation over sqrt(Delta_+) at one common shift.

    The master form is an equation over sqrt(Delta), so multiplying by
    sqrt(Delta_0 Delta_-) is the same as dividing by sqrt(Delta_+).  The
    shift s is the one whose three parts use only the expected unknowns,
    with the fewest unknowns overall (then the smallest |s|).  The [x^<]
    part keeps the scale of the master: it is sent through x -> 1/x and
    multiplied back by x^s.
    """
    form = master.form * fact.sqrt_zero_minus
    sets = KERNEL_SETS[model.name]
    best = None
    for s in sorted(range(-MAX_SHIFT, MAX_SHIFT + 1), key=lambda v: (abs(v), v)):
        try:
            parts = x_split(shifted(form, s))
        except UnboundedSupport:
            continue
        pos, zero, neg = (reduce_points(model, p) for p in parts)
        if LINE_Y0 not in pos.terms or D0 not in neg.terms:
            continue
        if pos.tags() - sets["pos"] or zero.tags() - sets["zero"] or neg.tags() - sets["neg"]:
            continue
        key = (len(pos.tags()) + len(zero.tags()) + len(neg.tags()), abs(s))
        if best is None or key < best[0]:
            best = (key, s, pos, zero, neg)
    if best is None:
        raise UnknownSetMismatch("no common shift splits the master equation over the expected unknowns")
    _, s, pos, zero, neg = best
    return KernelEquations(pos, zero, shifted(neg.flip(), s), (s, s))


# ---------------------------------------------------------------------------
# kernel roots


@dataclass(frozen=True)
class RootFamily:
    """A conjugate pair of kernel roots (mp_sqrt(disc) + lin) / den.

    ``labels`` are the numbers of the minus and plus roots, ``side`` names
    the kernel equation whose kernel the factor divides, and ``factor`` is
    the quadratic a2 x^2 + a1 x + a0 it annihilates (a sympy expression).
    """

    labels: tuple
    side: str
    factor: object
    disc: object
    lin: object
    den: object


def root_families(model: KernelModel):
    a, b, _ = (sympy.Rational(w.numerator, w.denominator) for w in model.weights)
    t, x = T_SYM, X_SYM
    disc_a = -4 * a**4 * t**3 + 4 * a**3 * t**3 + a**2 - 2 * a + 1
    disc_b = -4 * b**4 * t**3 + 4 * b**3 * t**3 + b**2 - 2 * b + 1
    if model.name == "reverse_kreweras":
        return (
            RootFamily((1, 2), "pos", a**2 * t**2 + x - a * x - a * t * x**2 + a**2 * t * x**2,
                       disc_a, a - 1, 2 * a * t * (a - 1)),
            RootFamily((3, 4), "pos",
                       2 * a * b * t**2 + 2 * x - a * x - b * x - a * t * x**2 - b * t * x**2
                       + 2 * a * b * t * x**2,
                       (a + b - 2) ** 2 - 8 * a * b * t**3 * (2 * a * b - a - b), a + b - 2,
                       2 * t * (2 * a * b - a - b)),
            RootFamily((5, 6), "neg", -a * t + a**2 * t + x - a * x + a**2 * t**2 * x**2,
                       disc_a, a - 1, 2 * a**2 * t**2),
            RootFamily((7, 8), "neg", -b * t + b**2 * t + x - b * x + b**2 * t**2 * x**2,
                       disc_b, b - 1, 2 * b**2 * t**2),
        )
    return (
        RootFamily((1, 2), "pos", t * a - t * a**2 - x + a * x - t**2 * a**2 * x**2,
                   disc_a, a - 1, 2 * a**2 * t**2),
        RootFamily((3, 4), "pos", t * b - t * b**2 - x + b * x - t**2 * b**2 * x**2,
                   disc_b, b - 1, 2 * b**2 * t**2),
        RootFamily((5, 6), "pos",
                   t * a + t * b - 2 * t * a * b - 2 * x + a * x + b * x - 2 * t**2 * a * b * x**2,
                   (a + b - 2) ** 2 - 8 * a * b * t**2 * (2 * a * b * t - a * t - b * t), a + b - 2,
                   4 * a * b * t**2),
        RootFamily((7, 8), "neg", t**2 * a**2 + x - a * x - t * a * x**2 + t * a**2 * x**2,
                   disc_a, a - 1, 2 * a * t * (a - 1)),
        RootFamily((9, 10), "neg", t**2 * b**2 + x - b * x - t * b * x**2 + t * b**2 * x**2,
                   disc_b, b - 1, 2 * b * t * (b - 1)),
    )


@dataclass(frozen=True)
class KernelRoot:
    label: int
    family: int  # the odd label of the pair
    side: str
    root: RootSeries


def _zero_multiplicity(factor):
    """Multiplicity of x = 0 as a root of the factor (0 if none)."""
    poly = sympy.Poly(factor, X_SYM)
    coeffs = list(reversed(poly.all_coeffs()))
    m = 0
    while m < len(coeffs) and sympy.expand(coeffs[m]) == 0:
        m += 1
    return m


def family_roots(model: KernelModel, fam: RootFamily):
    """The admissible (power series, vanishing at t = 0) root of a family.

    Raises DegenerateRegime when the family has none: the factor lost its x
    term (a + b = 2), or the closed form breaks down (a = 1 or b = 1).
    """
    if sympy.expand(fam.den) == 0:
        raise DegenerateRegime(f"roots x_{fam.labels[0]},{fam.labels[1]}: denominator vanishes")
    if sympy.Poly(fam.factor, X_SYM).coeff_monomial(X_SYM) == 0:
        raise DegenerateRegime(f"roots x_{fam.labels[0]},{fam.labels[1]}: factor has no x term")
    disc = _from_sympy(fam.disc)
    try:
        root = sqrt(disc)
    except NonSquareLeadingTerm as exc:
        raise DegenerateRegime(f"roots x_{fam.labels[0]},{fam.labels[1]}: {exc}") from None
    lin = series(_from_sympy(sympy.sympify(fam.lin)))
    inv_den = invert(_from_sympy(fam.den))
    factor = _from_sympy(fam.factor)
    found = []
    for sign, label in zip((-1, 1), fam.labels):
        value = ((root * sign + lin) * inv_den).normalized()
        if value.is_zero() or value.valuation <= 0 or value.ram != 1:
            continue
        residual = _evaluate_at(factor, value)
        if not residual.is_zero():
            raise PrecisionComparison(f"x_{label} does not annihilate its kernel factor")
        found.append(KernelRoot(label, fam.labels[0], fam.side, RootSeries(value, value.valuation, True)))
    if not found:
        raise DegenerateRegime(f"roots x_{fam.labels[0]},{fam.labels[1]}: neither is a power series")
    return found


def _evaluate_at(poly: PuiseuxSeries, value: PuiseuxSeries) -> PuiseuxSeries:
    total = series(0)
    power = series(1)
    lo, hi = poly.x_bounds()
    for e in range(0, hi + 1):
        c = poly.x_coefficient(e)
        if not c.is_zero():
            total = total + c * power
        power = power * value
    return total


def kernel_roots(model: KernelModel):
    """Admissible roots of P_{x,0} and P^d_0 from their closed forms.

    Raises DegenerateRegime if any family has no admissible root.
    """
    out = []
    for fam in root_families(model):
        out.extend(family_roots(model, fam))
    return out


# ---------------------------------------------------------------------------
# the scalar H equations

H0 = 0  # label of the [x^0] equation


def _min_x(s: PuiseuxSeries):
    bounds = s.x_bounds()
    return None if bounds is None else bounds[0]


def zero_root_equations(model, form: LinearForm, tag) -> dict:
    """{e: [x^e] form} for every e below the lowest power of x in the
    coefficient of ``tag``.

    The function behind ``tag`` has only nonnegative powers of x, so these
    coefficients do not involve it.  This is how a kernel factor that is a
    power of x (a root x = 0) still yields equations.
    """
    coeff = form.terms.get(tag)
    if coeff is None or coeff.is_zero():
        return {}
    m = _min_x(coeff)
    lows = [_min_x(c) for c in [form.known, *form.terms.values()]]
    lo = min(v for v in lows if v is not None)
    out = {}
    for e in range(lo, m):
        eq = reduce_points(model, x_coefficient_form(form, e))
        if eq.function_tags():
            continue
        if eq.known.is_zero() and all(c.is_zero() for c in eq.terms.values()):
            continue
        out[e] = eq
    return out


@dataclass(frozen=True)
class HSystem:
    """Scalar equations from the kernel equations, keyed by label.

    Integer labels are kernel roots (0 is the [x^0] equation); zero-root
    coefficient equations are keyed ("pos", e) or ("neg", e).
    """

    equations: dict
    roots: dict
    degenerate: tuple


def _dx(s: PuiseuxSeries) -> PuiseuxSeries:
    coeffs = {k: {e - 1: c * e for e, c in p.items() if e} for k, p in s.coeffs.items()}
    return PuiseuxSeries._raw({k: p for k, p in coeffs.items() if p}, s.ram, s.accurate_order)


def h_equations(model, keq: KernelEquations) -> HSystem:
    """H_i for every admissible root, the [x^0] equation and zero-root equations.

    When a root repeats (kernel factors coincide at a = b), the kernel
    vanishes to higher order there, so the k-th x-derivative of the kernel
    equation at the k-th repeat is a further equation; it is keyed
    ("d", label).
    """
    equations = {H0: keq.zero}
    roots = {}
    degenerate = []
    for fam in root_families(model):
        try:
            found = family_roots(model, fam)
        except DegenerateRegime as exc:
            degenerate.append(str(exc))
            continue
        for r in found:
            form = keq.pos if r.side == "pos" else keq.neg
            twin = [k for k, q in roots.items() if q.side == r.side and (q.root.value - r.root.value).is_zero()]
            if twin:
                # the k-th repeat of a root gives the k-th derivative
                for _ in twin:
                    form = form.map(_dx)
                equations[("d", r.label)] = substitute_root(form, r.root)
            else:
                equations[r.label] = substitute_root(form, r.root)
            roots[r.label] = r
    for side, form in (("pos", keq.pos), ("neg", keq.neg)):
        (tag,) = form.function_tags()
        for e, eq in zero_root_equations(model, form, tag).items():
            equations[(side, e)] = eq
    return HSystem(equations, roots, tuple(degenerate))


# ---------------------------------------------------------------------------
# special cases


@dataclass(frozen=True)
class Plan:
    """How a weight point is solved.

    ``strata`` lists the special relations the weights satisfy,
    ``unknowns`` the scalars the H system is expected to determine, and
    ``preferred`` the equation sets tried first, as family labels (the odd
    label of each root pair, 0 for the [x^0] equation).
    """

    strata: tuple
    unknowns: tuple
    preferred: tuple
    injected: tuple
    merged: tuple = ()  # (u, v) pairs with u = v by the x <-> y symmetry


PREFERRED = {
    "reverse_kreweras": ((1, 3, 7), (1, 5, 7), (3, 5, 7), (0, 1, 7), (0, 5, 7)),
    "kreweras": ((1, 3, 5, 7),),
}


def strata(model) -> tuple:
    a, b, _ = model.weights
    out = []
    if a == 1:
        out.append("a=1")
    if b == 1:
        out.append("b=1")
    if a + b == 2:
        out.append("a+b=2")
    if a == b:
        out.append("a=b")
    return tuple(out)


def special_case_dispatch(model) -> Plan:
    """The unknowns and preferred equation sets for the stratum of the weights.

    b = 1 leaves two unknowns: Q(0,0), Q_{0,1} for reverse Kreweras (the
    coefficient of Q_{1,0} vanishes) and Q_{1,0}, Q_{2,0} for Kreweras.
    a = 1 is the reflection of b = 1: the scalars off the x-axis come from
    the reflected model.  a + b = 2 loses one root pair, so only sets
    avoiding it are preferred.  Kreweras always takes Q(0,0) from reverse
    Kreweras.
    """
    st = strata(model)
    name = model.name
    scalars = SCALARS[name]
    injected = (Q00,) if name == "kreweras" else ()
    preferred = PREFERRED[name]
    if "a=1" in st and "b=1" in st:
        unknowns = scalars
        preferred = ()
    elif "b=1" in st:
        unknowns = (Q00, P(0, 1)) if name == "reverse_kreweras" else (P(1, 0), P(2, 0))
        preferred = ((1, 3),) if name == "reverse_kreweras" else ((1, 7),)
    elif "a=1" in st:
        if name == "reverse_kreweras":
            injected = scalars
            unknowns = ()
        else:
            unknowns = scalars
        preferred = ()
    else:
        unknowns = scalars
        if "a+b=2" in st:
            lost = 3 if name == "reverse_kreweras" else 5
            preferred = tuple(p for p in preferred if lost not in p)
    merged = ()
    if "a=b" in st and name == "reverse_kreweras" and P(0, 1) in unknowns:
        # the system is singular at a = b; Q_{0,1} = Q_{1,0} by symmetry
        merged = ((P(0, 1), P(1, 0)),)
        unknowns = tuple(u for u in unknowns if u != P(0, 1))
        preferred = ((1, 7), (0, 1), (0, 7))
    unknowns = tuple(u for u in unknowns if u not in injected)
    return Plan(st, unknowns, preferred, injected, merged)


def _merge(eq: LinearForm, merged) -> LinearForm:
    terms = dict(eq.terms)
    for u, v in merged:
        if u in terms:
            c = terms.pop(u)
            terms[v] = terms[v] + c if v in terms else c
    return LinearForm(eq.known, terms)


# ---------------------------------------------------------------------------
# the linear solve


def _inject(eq: LinearForm, values: dict) -> LinearForm:
    known = eq.known
    terms = {}
    for tag, c in eq.terms.items():
        if tag in values:
            known = known + c * values[tag]
        else:
            terms[tag] = c
    return LinearForm(known, terms)


def _label_for(family, hs: HSystem):
    """The available equation label standing for a family label."""
    if family == H0 or isinstance(family, tuple):
        return family if family in hs.equations else None
    for label in (family, family + 1):
        if label in hs.equations:
            return label
    return None


def _leading(det):
    lt = leading_term(det)
    if lt is None:
        return None
    return (lt[0], lt[1])


def _candidate_sets(plan: Plan, hs: HSystem, n):
    seen = set()
    for fams in plan.preferred:
        labels = tuple(_label_for(f, hs) for f in fams)
        if None in labels or len(labels) != n:
            continue
        seen.add(labels)
        yield labels
    pool = sorted(hs.equations, key=lambda k: (isinstance(k, tuple), k if not isinstance(k, tuple) else 0, str(k)))
    for labels in combinations(pool, n):
        if labels not in seen:
            yield labels


def solve_h_system(model, hs: HSystem, plan: Plan, given: dict):
    """Solve the first nonsingular equation set for the plan's unknowns.

    Returns (values, labels, determinant).  Unknowns whose coefficient
    vanishes in every equation are left out and recovered later.
    """
    equations = {k: _merge(_inject(eq, given), plan.merged) for k, eq in hs.equations.items()}
    gone = {u for u, _ in plan.merged}
    wanted = [u for u in SCALARS[model.name] if u not in given and u not in gone]
    active = [u for u in wanted if any(not eq.coefficient(u).is_zero() for eq in equations.values())]
    if not active:
        return {}, (), None, []
    usable = HSystem({k: eq for k, eq in equations.items() if not (eq.tags() - set(active))}, hs.roots, hs.degenerate)
    tried = []
    for labels in _candidate_sets(plan, usable, len(active)):
        try:
            values, det = solve_system([usable.equations[k] for k in labels], active)
        except SingularSystem:
            tried.append((labels, None))
            continue
        tried.append((labels, _leading(det)))
        for u, v in plan.merged:
            if v in values:
                values[u] = values[v]
        return values, labels, det, tried
    raise AllSystemsSingular(
        f"no nonsingular set of {len(active)} equations among {sorted(map(str, usable.equations))}"
        f" for {[str(u) for u in active]}; tried {[(lab, lt) for lab, lt in tried]}"
    )


def determinant_table(model, hs: HSystem, unknowns, size=None):
    """{labels: leading term or None} over all equation sets of root labels
    and the [x^0] equation, for diagnostics."""
    size = size or len(unknowns)
    labels = sorted(k for k in hs.equations if not isinstance(k, tuple))
    out = {}
    for combo in combinations(labels, size):
        det = determinant([[hs.equations[k].coefficient(u) for u in unknowns] for k in combo])
        out[combo] = _leading(det)
    return out


# ---------------------------------------------------------------------------
# back-substitution


def _laurent_divide(num: dict, den: dict) -> dict:
    """Exact quotient of Laurent polynomials {exp: coeff}, or DivisibilityFailure."""
    if not num:
        return {}
    dlo = min(den)
    dhi = max(den)
    rem = dict(num)
    out = {}
    lead = den[dhi]
    while rem:
        top = max(rem)
        if top - dhi < min(rem) - dlo:
            raise DivisibilityFailure("kernel coefficient does not divide the right-hand side")
        q = rem[top] / lead
        e = top - dhi
        out[e] = q
        for de, dc in den.items():
            k = e + de
            v = rem.get(k, 0) - q * dc
            if v:
                rem[k] = v
            else:
                rem.pop(k, None)
    return out


def divide_series(num: PuiseuxSeries, den: PuiseuxSeries) -> PuiseuxSeries:
    """q with den * q = num, solved order by order in t.

    Each step divides by the lowest t-coefficient of ``den``, a Laurent
    polynomial in x, and insists that the division is exact and leaves no
    negative powers of x.
    """
    num, den = num.normalized(), den.normalized()
    if num.ram != 1 or den.ram != 1:
        raise DivisibilityFailure("back-substitution expects integer powers of t")
    if den.is_zero():
        raise DivisibilityFailure("kernel coefficient is zero")
    k0 = den.low
    acc = min(num.accurate_order, den.accurate_order) - k0
    if num.coeffs and min(num.coeffs) < k0:
        raise DivisibilityFailure("right-hand side starts below the kernel coefficient")
    d0 = den.coeffs[k0]
    q = {}
    m = 0
    while m <= acc:
        r = dict(num.coeffs.get(m + k0, {}))
        for j in range(1, m + 1):
            dj = den.coeffs.get(k0 + j)
            qm = q.get(m - j)
            if not dj or not qm:
                continue
            for e1, c1 in dj.items():
                for e2, c2 in qm.items():
                    v = r.get(e1 + e2, 0) - c1 * c2
                    if v:
                        r[e1 + e2] = v
                    else:
                        r.pop(e1 + e2, None)
        quo = _laurent_divide(r, d0)
        if any(e < 0 for e in quo):
            raise DivisibilityFailure(f"negative power of x at t^{m} in back-substitution")
        if quo:
            q[m] = quo
        m += 1
        if acc == inf:
            raise DivisibilityFailure("back-substitution needs a truncated right-hand side")
    return PuiseuxSeries(q, 1, acc)


def solve_function(form: LinearForm, tag, values: dict) -> PuiseuxSeries:
    """The function behind ``tag`` from a kernel equation with known scalars."""
    num = form.known
    for other, c in form.terms.items():
        if other == tag:
            continue
        if other not in values:
            raise NotEliminable(f"{other} is still unknown in back-substitution")
        num = num + c * values[other]
    return divide_series(-num, form.terms[tag])


def full_series(model: KernelModel, qx0, q0y, q00) -> TriPoly:
    """Q(x,y) from K Q = 1/c + A'Q(x,0) + B'Q(0,y) + (kappa + tG)Q(0,0).

    Q_n = R_n + S Q_{n-1} with R the right-hand side; every power of x and y
    must stay nonnegative.
    """
    rhs = (
        model.constant
        + model.A_prime * TriPoly.from_series(qx0)
        + model.B_prime * TriPoly.from_series_in_y(q0y)
        + model.origin_coeff * TriPoly.from_series(q00)
    )
    N = rhs.accurate_order
    layers = {}
    for (n, i, j), c in rhs.terms.items():
        layers.setdefault(n, {})[(i, j)] = c
    out = {}
    prev = {}
    steps = [((i, j), c) for (_, i, j), c in model.S.terms.items()]
    n = 0
    while n <= N:
        cur = dict(layers.get(n, {}))
        for (i, j), c in prev.items():
            for (di, dj), s in steps:
                key = (i + di, j + dj)
                v = cur.get(key, 0) + c * s
                if v:
                    cur[key] = v
                else:
                    cur.pop(key, None)
        for (i, j), c in cur.items():
            if i < 0 or j < 0:
                raise DivisibilityFailure(f"Q(x,y) has the term x^{i} y^{j} at t^{n}")
            out[(n, i, j)] = c
        prev = cur
        n += 1
        if N == inf:
            raise DivisibilityFailure("Q(x,y) needs truncated boundary series")
    return TriPoly._raw(out, N)


# ---------------------------------------------------------------------------
# the solution


@dataclass
class Solution:
    model: object  # ModelSpec
    weights: tuple
    order: int
    scalars: dict
    qx0: PuiseuxSeries
    q0y: PuiseuxSeries
    qd0: PuiseuxSeries
    full: TriPoly
    diagnostics: dict = field(default_factory=dict)

    def series(self, sel):
        """The series picked out by a walk-table selector (see boundary_series)."""
        kind, *args = sel
        if kind == "full":
            return self.full
        if kind == "point":
            i, j = args
            return PuiseuxSeries(
                {n: {0: c} for (n, k, l), c in self.full.terms.items() if (k, l) == (i, j)},
                1,
                self.order,
            )
        (i,) = args
        coeffs = {}
        for (n, k, l), c in self.full.terms.items():
            if kind == "line_y" and l == i:
                e = k
            elif kind == "line_x" and k == i:
                e = l
            elif kind == "diag" and l - k == i:
                e = k
            else:
                continue
            coeffs.setdefault(n, {})[e] = c
        return PuiseuxSeries(coeffs, 1, self.order)


@dataclass
class HalfSolution:
    scalars: dict
    qx0: PuiseuxSeries
    qd0: PuiseuxSeries
    diagnostics: dict


def _accuracy(*items):
    acc = inf
    for s in items:
        acc = min(acc, s.order)
    return acc


def half_solve(model: KernelModel, given=None) -> HalfSolution:
    """Scalars, Q(x,0) and Q^d_0 for one model at fixed weights.

    ``given`` holds scalars supplied from elsewhere (Q(0,0) for Kreweras,
    the reflected scalars at a = 1).
    """
    given = dict(given or {})
    plan = special_case_dispatch(model)
    system = orbit_system(model)
    splits = full_orbit_splits(model, system)
    master = half_orbit_sum_y0(model, system, splits)
    fact = canonical_factorization(model)
    keq = kernel_equations(model, master, fact)
    hs = h_equations(model, keq)
    diag = {
        "strata": plan.strata,
        "shift": keq.shifts[0],
        "roots": sorted(hs.roots),
        "degenerate": hs.degenerate,
        "equations": sorted(map(str, hs.equations)),
    }
    if model.name == "kreweras" and all(k in hs.equations for k in (1, 3, 5, 7, 9)):
        det = determinant([[hs.equations[k].coefficient(u) for u in SCALARS["kreweras"]] for k in (1, 3, 5, 7, 9)])
        diag["pre_injection_determinant"] = _leading(det)
        diag["pre_injection_order"] = det.order
    values, labels, det, tried = solve_h_system(model, hs, plan, given)
    diag["equation_set"] = labels
    diag["determinant"] = None if det is None else _leading(det)
    diag["tried"] = tried
    if model.name == "kreweras":
        active = [u for u in SCALARS["kreweras"] if u not in given]
        injected = HSystem({k: _inject(eq, given) for k, eq in hs.equations.items()}, hs.roots, hs.degenerate)
        diag["determinant_table"] = determinant_table(model, injected, active)
    scalars = {**given, **values}
    qx0 = _back_substitute(model, keq.pos, LINE_Y0, scalars)
    for u in SCALARS[model.name]:
        if u not in scalars and u.j == 0:
            scalars[u] = PuiseuxSeries({k: {0: p[u.i]} for k, p in qx0.coeffs.items() if u.i in p}, 1, qx0.accurate_order)
    for u, v in plan.merged:
        scalars.setdefault(u, scalars[v])
    (dtag,) = keq.neg.function_tags()
    qd0 = _back_substitute(model, keq.neg, dtag, scalars)
    return HalfSolution(scalars, qx0, qd0, diag)


def _back_substitute(model, form, tag, scalars):
    values = {u: v for u, v in scalars.items() if u in form.terms}
    missing = [u for u in form.terms if u != tag and u not in values]
    if missing:
        raise NotEliminable(f"{[str(u) for u in missing]} unknown in back-substitution")
    return solve_function(form, tag, values)


def _reflected_scalars(half: HalfSolution, model: KernelModel):
    """Scalars of the original model read from the reflected one."""
    out = {}
    for u, v in half.scalars.items():
        out[P(u.j, u.i)] = v
    return {u: v for u, v in out.items() if u in SCALARS[model.name]}


DEFAULT_ORDER = 40


def _solve_once(spec, order) -> Solution:
    model = build_model(spec)
    refl = build_model(spec.reflected())
    plan = special_case_dispatch(model)
    given = {}
    diag = {}
    if model.name == "kreweras":
        rk = half_solve(build_model(model_spec("rk", *spec.weights)))
        given[Q00] = rk.scalars[Q00]
        diag["injected_from"] = "reverse_kreweras"
    if "a=1" in plan.strata and "b=1" not in plan.strata:
        other = half_solve(refl, given)
        mapped = _reflected_scalars(other, model)
        given.update({u: v for u, v in mapped.items() if u in plan.injected})
        half = half_solve(model, given)
    else:
        half = half_solve(model, given)
        rgiven = {Q00: half.scalars[Q00]} if Q00 in half.scalars else {}
        if "a=b" in plan.strata:
            other = half
        else:
            other = half_solve(refl, {**rgiven, **_reflected_scalars(half, refl)})
    q00 = half.scalars[Q00]
    full = full_series(model, half.qx0, other.qx0, q00)
    acc = _accuracy(half.qx0, other.qx0, half.qd0, *half.scalars.values())
    acc = min(acc, full.accurate_order)
    diag.update(half.diagnostics)
    diag["reflected"] = other.diagnostics
    diag["working_order"] = working_order()
    return Solution(spec, spec.weights, int(acc), half.scalars, half.qx0, other.qx0, half.qd0, full, diag)


def _truncate_solution(sol: Solution, order) -> Solution:
    return Solution(
        sol.model,
        sol.weights,
        order,
        {u: v.truncate(order) for u, v in sol.scalars.items()},
        sol.qx0.truncate(order),
        sol.q0y.truncate(order),
        sol.qd0.truncate(order),
        sol.full.truncate(order),
        sol.diagnostics,
    )


def solve_model(name, weights=(1, 1, 1), order=12, working=None, retries=4) -> Solution:
    """Solve a model through t^order, raising the working order as needed.

    After a run that falls short of ``order`` the working order grows by the
    deficit plus 5; after a precision error it grows by 10.
    """
    spec = name if not isinstance(name, str) else model_spec(name, *weights)
    W = working or max(DEFAULT_ORDER, order + 16)
    last = None
    for _ in range(retries + 1):
        try:
            with use_working_order(W):
                sol = _solve_once(spec, order)
        except (PrecisionExhausted, PrecisionComparison) as exc:
            last = exc
            W += 10
            continue
        if sol.order >= order:
            return _truncate_solution(sol, order)
        last = PrecisionExhausted(f"working order {W} gave accuracy t^{sol.order}, need t^{order}")
        W += order - sol.order + 5
    raise PrecisionExhausted(f"gave up after {retries + 1} attempts: {last}")
