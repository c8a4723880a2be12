from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkkernel.errors import SelectorOutOfRange
from walkkernel.models import model_spec
from walkkernel.walks import boundary_series, enumerate_walks, functional_equation_residual

weights_st = st.tuples(*[st.fractions(min_value=-4, max_value=4, max_denominator=5).filter(lambda q: q != 0)] * 3)
models_st = st.sampled_from(["reverse_kreweras", "kreweras"])
PROPS = settings(max_examples=1000, deadline=None)


def test_first_step_reverse_kreweras():
    a, b = Fraction(2), Fraction(3)
    table = enumerate_walks(model_spec("rk", a, b, 5), 1)
    assert table.counts[1] == {(1, 0): a, (0, 1): b}


def test_empty_walk_has_weight_one():
    for m in ("rk", "kreweras"):
        assert enumerate_walks(model_spec(m, 2, 3, 5), 0).counts[0] == {(0, 0): 1}


def test_kreweras_returns_at_length_six():
    table = enumerate_walks(model_spec("kreweras"), 6)
    assert table.at(6, 0, 0) == 16


@pytest.mark.parametrize("m", ["rk", "kreweras"])
def test_length_three_excursions(m):
    a, b, c = Fraction(2), Fraction(3), Fraction(5)
    q00 = boundary_series(enumerate_walks(model_spec(m, a, b, c), 3), ("point", 0, 0))
    assert q00.coefficient(3) == c * (a + b)


def test_line_y0_first_step():
    s = boundary_series(enumerate_walks(model_spec("rk", 2, 3, 5), 4), ("line_y", 0))
    assert s.coefficient(1, 1) == 2 and s.coefficient(1, 0) == 0


def test_diag0_starts_at_one():
    for m in ("rk", "kreweras"):
        s = boundary_series(enumerate_walks(model_spec(m, 2, 3, 5), 4), ("diag", 0))
        assert s.coefficient(0) == 1


def test_negative_line_index_is_rejected():
    table = enumerate_walks(model_spec("rk"), 3)
    with pytest.raises(SelectorOutOfRange):
        boundary_series(table, ("line_y", -1))
    with pytest.raises(SelectorOutOfRange):
        boundary_series(table, ("point", -1, 0))


def test_empty_diagonal_is_zero_not_error():
    table = enumerate_walks(model_spec("rk"), 3)
    assert boundary_series(table, ("diag", -5)).is_zero()


def test_unit_weight_kreweras_excursions():
    table = enumerate_walks(model_spec("kreweras"), 9)
    assert [table.at(n, 0, 0) for n in (0, 3, 6, 9)] == [1, 2, 16, 192]


@pytest.mark.parametrize("m,w", [("rk", (2, 3, 5)), ("kreweras", (1, 1, 1))])
def test_functional_equation_examples(m, w):
    assert functional_equation_residual(enumerate_walks(model_spec(m, *w), 12)).is_zero()


@PROPS
@given(weights_st)
def test_constant_term_identity(w):
    a, b, c = w
    assert 1 - (1 / c + (a - 1) / a + (b - 1) / b + (a * c + b * c - a * b - a * b * c) / (a * b * c)) == 0


@PROPS
@given(models_st, weights_st)
def test_functional_equation_residual_vanishes(m, w):
    table = enumerate_walks(model_spec(m, *w), 12)
    assert functional_equation_residual(table).is_zero()


@PROPS
@given(weights_st, st.integers(0, 14))
def test_reversal_bijection_at_origin(w, n):
    rk = enumerate_walks(model_spec("rk", *w), n)
    kr = enumerate_walks(model_spec("kreweras", *w), n)
    assert [rk.at(k, 0, 0) for k in range(n + 1)] == [kr.at(k, 0, 0) for k in range(n + 1)]


@PROPS
@given(models_st, weights_st, st.integers(0, 10))
def test_support_stays_in_quadrant(m, w, n):
    # an NE step moves k + l by two, so Kreweras gets the looser bound
    table = enumerate_walks(model_spec(m, *w), n)
    reach = 1 if m == "reverse_kreweras" else 2
    for k, layer in enumerate(table.counts):
        for (i, j) in layer:
            assert i >= 0 and j >= 0 and max(i, j) <= k and i + j <= reach * k


@settings(max_examples=200, deadline=None)
@given(models_st, st.integers(0, 10))
def test_unit_weights_are_counts(m, n):
    table = enumerate_walks(model_spec(m), n)
    for layer in table.counts:
        for v in layer.values():
            assert v.denominator == 1 and v > 0
