from fractions import Fraction

import pytest
from conftest import W
from hypothesis import given, settings
from hypothesis import strategies as st

from walkkernel.documents import (
    Bundle,
    deserialize,
    document_value,
    fmt_rational,
    serialize,
    series_document,
)
from walkkernel.errors import MalformedDocument
from walkkernel.series import PuiseuxSeries
from walkkernel.models import model_spec
from walkkernel.walks import boundary_series, enumerate_walks
from walkkernel.xypoly import TriPoly


def test_first_step_document():
    tab = enumerate_walks(model_spec("rk", 2, 3, 5), 1)
    full = boundary_series(tab, ("full",))
    doc = series_document(TriPoly({k: v for k, v in full.terms.items() if k[0] == 1}), "reverse_kreweras", "Q_1", W(2, 3, 5))
    assert [(k, e, f, fmt_rational(c)) for k, e, f, c in doc.terms] == [(1, 0, 1, "3"), (1, 1, 0, "2")]


def test_zero_series_keeps_accuracy():
    doc = series_document(PuiseuxSeries.zero(7), "kreweras", "zero")
    back = deserialize(serialize(doc))
    assert back == doc and back.terms == () and back.accurate_order == 7
    assert deserialize(serialize(doc, "csv"), "csv") == doc


def test_rationals_are_strings():
    doc = series_document(PuiseuxSeries({0: {0: Fraction(-3, 4)}}, 1, 3), "kreweras", "q", W(Fraction(1, 2), 3, 2))
    text = serialize(doc).decode()
    assert '"-3/4"' in text and '"1/2"' in text and "0.75" not in text


def test_bundle_round_trip():
    s = series_document(PuiseuxSeries({1: {1: 2}}, 1, 6), "reverse_kreweras", "Q(x,0)")
    b = Bundle("solution", (s,), {"order": 6})
    assert deserialize(serialize(b)) == b


@pytest.mark.parametrize(
    "data,where",
    [
        (b'{"model": "k"', "line 1"),
        (b'{"model":"k","quantity":"q","weights":{"a":"1","b":"1","c":"1"},"ramification":1,'
         b'"variables":"t^(t_num/ramification) * x^x_exp","terms":[{"t_num":0,"x_exp":0,"coeff":"0.5"}],'
         b'"accurate_order":3}', "terms[0].coeff"),
        (b'{"model":"k","quantity":"q","weights":{"a":"1","b":"1"},"ramification":1}', "weights"),
    ],
)
def test_malformed_json_reports_location(data, where):
    with pytest.raises(MalformedDocument, match=r".*" + where.replace("[", r"\[").replace("]", r"\]")):
        deserialize(data)


def test_malformed_csv_reports_line():
    doc = series_document(PuiseuxSeries({1: {1: 2}}, 1, 6), "rk", "q")
    lines = serialize(doc, "csv").decode().splitlines()
    lines[-1] = "1,x,,2"
    with pytest.raises(MalformedDocument, match="line 8"):
        deserialize("\n".join(lines).encode(), "csv")


def test_csv_is_single_series_only():
    with pytest.raises(ValueError):
        serialize(Bundle("solution"), "csv")


# ---------------------------------------------------------------------------
# round trip

small = st.fractions(min_value=-50, max_value=50, max_denominator=30).filter(lambda q: q != 0)


@st.composite
def documents(draw):
    if draw(st.booleans()):
        terms = draw(st.dictionaries(st.tuples(st.integers(0, 8), st.integers(-3, 3), st.integers(0, 3)), small, max_size=12))
        value = TriPoly(terms, draw(st.sampled_from([8, 10, float("inf")])))
    else:
        ram = draw(st.sampled_from([1, 2, 3]))
        coeffs = {}
        for (k, e), c in draw(st.dictionaries(st.tuples(st.integers(-2, 12), st.integers(-3, 3)), small, max_size=12)).items():
            coeffs.setdefault(k, {})[e] = c
        value = PuiseuxSeries(coeffs, ram, draw(st.sampled_from([12, 20, float("inf")])))
    w = draw(st.tuples(small, small, small))
    return series_document(value, draw(st.sampled_from(["kreweras", "reverse_kreweras"])), "Q", w), value


@settings(max_examples=1000, deadline=None)
@given(documents(), st.sampled_from(["json", "csv"]))
def test_serialize_round_trip(data, fmt):
    doc, value = data
    raw = serialize(doc, fmt)
    back = deserialize(raw, fmt)
    assert back == doc
    assert serialize(back, fmt) == raw
    restored = document_value(back)
    if isinstance(value, TriPoly):
        assert restored.terms == value.terms and restored.accurate_order == value.accurate_order
    else:
        assert restored.coeffs == value.coeffs and restored.accurate_order == value.accurate_order
