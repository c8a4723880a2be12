from fractions import Fraction
from math import lcm

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from walkkernel.errors import (
    NonMonomialLeadingTerm,
    NonSquareLeadingTerm,
    PrecisionComparison,
    PrecisionExhausted,
)
from walkkernel.series import (
    LaurentPoly,
    PuiseuxSeries,
    RootSeries,
    arith,
    evaluate_poly,
    invert,
    puiseux_roots,
    series,
    sqrt,
    substitute_x,
    use_working_order,
    x_part,
)

S = PuiseuxSeries.from_terms
PROPS = settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def t_(e=1):
    return PuiseuxSeries.monomial(1, e, 0)


def x_(e=1):
    return PuiseuxSeries.monomial(1, 0, e)


# ---------------------------------------------------------------------------
# examples


def test_difference_of_squares():
    f = S({(0, 0): 1, (1, 1): 1})
    g = S({(0, 0): 1, (1, 1): -1})
    assert arith(f, g, "mul") == S({(0, 0): 1, (2, 2): -1})


def test_add_zero_is_identity():
    f = S({(0, 0): 3, (Fraction(1, 2), -1): Fraction(2, 7)})
    assert arith(f, series(0), "add") == f


def test_ramified_difference_of_squares():
    h = t_(Fraction(1, 2))
    out = arith(1 + h, 1 - h, "mul")
    assert out.ram == 2
    assert out == 1 - t_()


def test_geometric_inverse():
    with use_working_order(8):
        inv = invert(1 - t_() * x_())
    assert inv.order == 8
    assert inv == S({(k, k): 1 for k in range(9)}, accurate_order=8)


def test_invert_monomial():
    assert invert(t_()) == t_(-1)


def test_invert_kernel_like():
    f = 1 - t_() * (x_() + x_(-1))
    with use_working_order(10):
        g = invert(f)
    assert (f * g).agrees(series(1), upto=10)
    assert g.coefficient(2, 0) == 2 and g.coefficient(2, 2) == 1 and g.coefficient(2, -2) == 1


def test_invert_needs_monomial_lead():
    with pytest.raises(NonMonomialLeadingTerm):
        invert(x_() + 1)


def test_sqrt_perfect_square():
    assert sqrt(1 + 2 * t_() + t_(2)).agrees(1 + t_(), upto=20)


def test_sqrt_one_minus_4t():
    with use_working_order(12):
        r = sqrt(1 - 4 * t_())
    assert [r.coefficient(k) for k in range(4)] == [1, -2, -2, -4]
    assert (r * r).agrees(1 - 4 * t_(), upto=12)


def test_sqrt_of_reverse_kreweras_delta():
    delta = 1 - 2 * t_() * x_() + t_(2) * x_(-1) * (x_(3) - 4)
    with use_working_order(20):
        r = sqrt(delta)
    assert (r * r).agrees(delta, upto=20)


def test_sqrt_rejects_non_square():
    with pytest.raises(NonSquareLeadingTerm):
        sqrt(2 + t_())
    with pytest.raises(NonSquareLeadingTerm):
        sqrt(t_())


def test_x_part_selectors():
    f = x_(-2) + 3 + x_()
    assert x_part(f, "pos") == x_()
    assert x_part(f, "zero") == series(3)
    assert x_part(f, "neg") == x_(-2)
    assert x_part(x_() + x_(-1), "geq") == x_()
    assert x_part(x_() + x_(-1), "leq") == x_(-1)


def test_x_part_positive_part_of_product_with_sqrt():
    # sqrt(Delta_0 Delta_-) for reverse Kreweras, known terms through t^4
    s = S({(0, 0): 1, (2, -1): -2, (3, 0): -4, (4, -2): -2}, accurate_order=4)
    pos = x_part(s * (x_(2) + x_(-1)), "pos")
    assert pos.agrees(x_(2) - 2 * t_(2) * x_() - 4 * t_(3) * x_(2), upto=4)


def test_roots_of_x2_minus_t():
    roots = puiseux_roots([-t_(), series(0), series(1)], order=6)
    assert len(roots) == 2
    assert {r.value.ram for r in roots} == {2}
    values = sorted(r.value.coefficient(Fraction(1, 2)) for r in roots)
    assert values == [-1, 1]


def test_reverse_kreweras_delta_finite_root():
    delta = 1 - 2 * t_() * x_() + t_(2) * x_(-1) * (x_(3) - 4)
    with use_working_order(12):
        roots = puiseux_roots(delta.shift_x(1))
    finite = [r for r in roots if r.finite]
    assert len(finite) == 1 and len(roots) == 3
    assert finite[0].value.agrees(S({(2, 0): 4, (5, 0): 32, (8, 0): 448}), upto=10)


def test_kreweras_delta_divergent_root():
    from walkkernel.models import build_model
    from walkkernel.pipeline import discriminant

    with use_working_order(14):
        delta = discriminant(build_model("kreweras"))
        lo, _ = delta.x_bounds()
        roots = puiseux_roots(delta.shift_x(-lo))
    (x3,) = [r for r in roots if not r.finite]
    want = S({(-2, 0): Fraction(1, 4), (1, 0): -2, (4, 0): -12, (7, 0): -160, (10, 0): -2688})
    assert x3.value.agrees(want, upto=10)


def test_substitute_monomial():
    f = x_() + x_(-1)
    assert substitute_x(f, t_(), order=10).agrees(t_() + t_(-1), upto=10)


def test_invert_x():
    f = x_(2) + 3 + x_(-1)
    assert substitute_x(f, "invert_x") == x_(-2) + 3 + x_()


def test_substitute_kernel_root():
    from walkkernel.models import build_model
    from walkkernel.pipeline import _evaluate_at, _from_sympy, family_roots, root_families

    model = build_model("rk", (2, 3, 5))
    fam = root_families(model)[0]
    (root,) = family_roots(model, fam)
    assert root.root.value.agrees(4 * t_(2), upto=4)
    assert _evaluate_at(_from_sympy(fam.factor), root.root.value).is_zero()
    assert substitute_x(_from_sympy(fam.factor), root.root).is_zero()


def test_substitution_reports_lost_accuracy():
    f = S({(0, -3): 1}, accurate_order=4)
    root = RootSeries(t_(2), Fraction(2), True)
    with pytest.raises(PrecisionExhausted):
        substitute_x(f, root, order=20, need=0)


def test_comparison_beyond_accuracy_is_an_error():
    f = S({(0, 0): 1}, accurate_order=3)
    with pytest.raises(PrecisionComparison):
        f.agrees(series(1), upto=5)
    with pytest.raises(PrecisionComparison):
        f.coefficient(4)


def test_laurent_poly_has_no_zero_terms():
    p = LaurentPoly({0: 1, 2: 0, -1: Fraction(3, 6)})
    assert p.terms == {0: 1, -1: Fraction(1, 2)}


# ---------------------------------------------------------------------------
# properties

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=4)
nonzero = rationals.filter(lambda q: q != 0)


@st.composite
def series_st(draw, lead=None, ram=None, acc=None):
    r = ram or draw(st.sampled_from([1, 2, 3]))
    acc = draw(st.integers(3, 7)) if acc is None else acc
    coeffs = {}
    start = 0
    if lead is not None:
        lo, e, u = lead
        coeffs[lo] = {e: u}
        start = lo + 1
    for k in range(start, acc + 1):
        if draw(st.booleans()):
            coeffs.setdefault(k, {})
            for e in draw(st.lists(st.integers(-2, 2), max_size=2, unique=True)):
                coeffs[k][e] = draw(nonzero)
    return PuiseuxSeries(coeffs, r, acc)


@st.composite
def invertible_st(draw):
    lo = draw(st.integers(-1, 2))
    e = draw(st.integers(-2, 2))
    u = draw(nonzero)
    r = draw(st.sampled_from([1, 2]))
    return draw(series_st(lead=(lo, e, u), ram=r, acc=lo + draw(st.integers(3, 6))))


@st.composite
def square_st(draw):
    lo = 2 * draw(st.integers(0, 1))
    e = 2 * draw(st.integers(-1, 1))
    u = draw(nonzero) ** 2
    r = draw(st.sampled_from([1, 2]))
    return draw(series_st(lead=(lo, e, u), ram=r, acc=lo + draw(st.integers(3, 6))))


@PROPS
@given(invertible_st())
def test_invert_law(f):
    with use_working_order(12):
        g = invert(f)
    prod = f * g
    assert prod.order >= 0
    assert prod.agrees(series(1))


@PROPS
@given(square_st())
def test_sqrt_law(f):
    with use_working_order(12):
        r = sqrt(f)
    assert (r * r).agrees(f)
    lo = min(r.coeffs)
    assert min(r.coeffs[lo].values()) > 0


@PROPS
@given(series_st())
def test_x_part_partition(f):
    total = x_part(f, "pos") + x_part(f, "zero") + x_part(f, "neg")
    assert total.coeffs == f.coeffs and total.accurate_order == f.accurate_order
    assert (x_part(f, "geq") + x_part(f, "neg")).coeffs == f.coeffs


@PROPS
@given(series_st(), series_st(), st.sampled_from(["add", "mul"]))
def test_ramification_unification(f, g, op):
    r = lcm(f.ram, g.ram)
    out = arith(f, g, op)
    assert out.ram == r
    again = arith(f.ramify(r), g.ramify(r), op)
    assert out.coeffs == again.coeffs and out.accurate_order == again.accurate_order


@PROPS
@given(invertible_st(), st.integers(4, 10))
def test_accuracy_is_honest_under_more_working_order(f, extra):
    with use_working_order(6):
        low = invert(f)
    with use_working_order(6 + extra):
        high = invert(f)
    assert high.order >= low.order
    assert low.agrees(high)


@st.composite
def split_quadratic(draw):
    """(x - r1)(x - r2) with roots of distinct leading terms."""
    e1, e2 = draw(st.integers(0, 3)), draw(st.integers(0, 3))
    c1, c2 = draw(nonzero), draw(nonzero)
    if (e1, c1) == (e2, c2):
        c2 = c1 + 1 if c1 != -1 else 2
    r1 = c1 * t_(e1) + draw(rationals) * t_(e1 + 1)
    r2 = c2 * t_(e2) + draw(rationals) * t_(e2 + 2)
    return [r1 * r2, -(r1 + r2), series(1)], (r1, r2)


@settings(max_examples=1000, deadline=None)
@given(split_quadratic())
def test_puiseux_roots_annihilate(data):
    coeffs, known = data
    with use_working_order(8):
        roots = puiseux_roots(coeffs)
        assert len(roots) == 2
        for r in roots:
            assert evaluate_poly(coeffs, r.value).agrees(series(0))
        for k in known:
            assert any(r.value.agrees(k) for r in roots)
