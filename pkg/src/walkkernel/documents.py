"""Exact JSON/CSV documents for series, solutions and verification reports.

Rationals are always written as "p/q" strings (or plain integers as "p"),
never as floats.  Terms are sorted by (t_num, x_exp, y_exp) and every
serializer emits keys in a fixed order, so equal values give equal bytes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import inf

from .errors import MalformedDocument
from .series import PuiseuxSeries
from .xypoly import TriPoly

X_ONLY = "t^(t_num/ramification) * x^x_exp"
XY = "t^(t_num/ramification) * x^x_exp * y^y_exp"
CSV_COLUMNS = ("t_num", "x_exp", "y_exp", "coeff")


def fmt_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rational(text, where="") -> Fraction:
    if not isinstance(text, str) or not text.strip():
        raise MalformedDocument(f"{where}: expected a rational string, got {text!r}")
    if "." in text or "e" in text.lower():
        raise MalformedDocument(f"{where}: decimal notation is not allowed in {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise MalformedDocument(f"{where}: not a rational: {text!r}") from None


def _fmt_order(order):
    return None if order == inf else int(order)


@dataclass(frozen=True)
class SeriesDocument:
    model: str
    quantity: str
    weights: tuple  # three "p/q" strings
    ramification: int
    variables: str
    terms: tuple  # (t_num, x_exp, y_exp or None, Fraction), sorted
    accurate_order: object  # int in units of 1/ramification, or inf

    @property
    def has_y(self):
        return self.variables == XY


def _weights(weights):
    return tuple(fmt_rational(w) for w in weights)


def series_document(s, model="", quantity="", weights=(1, 1, 1)) -> SeriesDocument:
    """A document for a PuiseuxSeries (x only) or a TriPoly (x and y)."""
    if isinstance(s, TriPoly):
        terms = tuple(sorted((n, i, j, c) for (n, i, j), c in s.terms.items()))
        return SeriesDocument(model, quantity, _weights(weights), 1, XY, terms, s.accurate_order)
    terms = tuple(sorted((k, e, None, c) for k, p in s.coeffs.items() for e, c in p.items()))
    return SeriesDocument(model, quantity, _weights(weights), s.ram, X_ONLY, terms, s.accurate_order)


def document_value(doc: SeriesDocument):
    """The PuiseuxSeries or TriPoly a document describes."""
    if doc.has_y:
        return TriPoly({(n, i, j): c for n, i, j, c in doc.terms}, doc.accurate_order)
    coeffs = {}
    for k, e, _, c in doc.terms:
        coeffs.setdefault(k, {})[e] = c
    return PuiseuxSeries(coeffs, doc.ramification, doc.accurate_order)


def _doc_json(doc: SeriesDocument) -> dict:
    terms = []
    for k, e, f, c in doc.terms:
        rec = {"t_num": k, "x_exp": e}
        if f is not None:
            rec["y_exp"] = f
        rec["coeff"] = fmt_rational(c)
        terms.append(rec)
    return {
        "model": doc.model,
        "quantity": doc.quantity,
        "weights": dict(zip("abc", doc.weights)),
        "ramification": doc.ramification,
        "variables": doc.variables,
        "terms": terms,
        "accurate_order": _fmt_order(doc.accurate_order),
    }


def _need(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise MalformedDocument(f"{where}: missing field {key!r}")
    return obj[key]


def _int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedDocument(f"{where}: expected an integer, got {value!r}")
    return value


def _doc_from_json(obj, where="document") -> SeriesDocument:
    weights = _need(obj, "weights", where)
    ws = tuple(fmt_rational(parse_rational(_need(weights, k, f"{where}.weights"), f"{where}.weights.{k}")) for k in "abc")
    ram = _int(_need(obj, "ramification", where), f"{where}.ramification")
    if ram < 1:
        raise MalformedDocument(f"{where}.ramification: must be positive")
    variables = _need(obj, "variables", where)
    if variables not in (X_ONLY, XY):
        raise MalformedDocument(f"{where}.variables: unknown convention {variables!r}")
    acc = _need(obj, "accurate_order", where)
    acc = inf if acc is None else _int(acc, f"{where}.accurate_order")
    raw = _need(obj, "terms", where)
    if not isinstance(raw, list):
        raise MalformedDocument(f"{where}.terms: expected a list")
    terms = []
    for n, rec in enumerate(raw):
        w = f"{where}.terms[{n}]"
        k = _int(_need(rec, "t_num", w), f"{w}.t_num")
        e = _int(_need(rec, "x_exp", w), f"{w}.x_exp")
        f = _int(_need(rec, "y_exp", w), f"{w}.y_exp") if variables == XY else None
        c = parse_rational(_need(rec, "coeff", w), f"{w}.coeff")
        if c == 0:
            raise MalformedDocument(f"{w}.coeff: zero coefficients are not stored")
        terms.append((k, e, f, c))
    return SeriesDocument(
        _need(obj, "model", where), _need(obj, "quantity", where), ws, ram, variables, tuple(sorted(terms)), acc
    )


# ---------------------------------------------------------------------------
# bundles: several documents plus JSON-safe metadata


@dataclass(frozen=True)
class Bundle:
    kind: str  # "solution", "expansion" or "report"
    documents: tuple = ()
    info: dict = field(default_factory=dict)


def plain(value):
    """A JSON-safe rendering of diagnostics: rationals as strings, tags by name."""
    if isinstance(value, Fraction):
        return fmt_rational(value)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return None if value == inf else fmt_rational(Fraction(value))
    if isinstance(value, dict):
        return {_key(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, PuiseuxSeries):
        return str(value)
    return str(value)


def _key(k):
    if isinstance(k, (tuple, list)):
        return ",".join(str(x) for x in k)
    return str(k)


# ---------------------------------------------------------------------------
# serialize / deserialize


def serialize(value, fmt="json") -> bytes:
    if fmt == "json":
        if isinstance(value, SeriesDocument):
            obj = _doc_json(value)
        elif isinstance(value, Bundle):
            obj = {"kind": value.kind, "info": plain(value.info), "documents": [_doc_json(d) for d in value.documents]}
        else:
            raise TypeError(f"cannot serialize {type(value).__name__}")
        return (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode()
    if fmt == "csv":
        if not isinstance(value, SeriesDocument):
            raise ValueError("csv holds a single series document only")
        return _csv(value)
    raise ValueError(f"unknown format {fmt!r}")


def _csv(doc: SeriesDocument) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["#model", doc.model])
    w.writerow(["#quantity", doc.quantity])
    w.writerow(["#weights", *doc.weights])
    w.writerow(["#ramification", doc.ramification])
    w.writerow(["#variables", doc.variables])
    w.writerow(["#accurate_order", "" if doc.accurate_order == inf else doc.accurate_order])
    w.writerow(CSV_COLUMNS)
    for k, e, f, c in doc.terms:
        w.writerow([k, e, "" if f is None else f, fmt_rational(c)])
    return buf.getvalue().encode()


def deserialize(data: bytes, fmt=None):
    """Inverse of serialize; the format is sniffed when not given."""
    try:
        text = data.decode() if isinstance(data, (bytes, bytearray)) else data
    except UnicodeDecodeError as exc:
        raise MalformedDocument(f"byte {exc.start}: not UTF-8") from None
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "csv"
    if fmt == "json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if isinstance(obj, dict) and "kind" in obj:
            docs = _need(obj, "documents", "bundle")
            if not isinstance(docs, list):
                raise MalformedDocument("bundle.documents: expected a list")
            return Bundle(
                obj["kind"],
                tuple(_doc_from_json(d, f"bundle.documents[{n}]") for n, d in enumerate(docs)),
                _need(obj, "info", "bundle"),
            )
        return _doc_from_json(obj)
    if fmt == "csv":
        return _parse_csv(text)
    raise ValueError(f"unknown format {fmt!r}")


_META = ("#model", "#quantity", "#weights", "#ramification", "#variables", "#accurate_order")


def _parse_csv(text) -> SeriesDocument:
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < len(_META) + 1:
        raise MalformedDocument(f"line {len(rows) + 1}: document ends before the column header")
    meta = {}
    for n, key in enumerate(_META):
        row = rows[n]
        if not row or row[0] != key:
            raise MalformedDocument(f"line {n + 1}: expected {key!r}")
        meta[key] = row[1:]
    if tuple(rows[len(_META)]) != CSV_COLUMNS:
        raise MalformedDocument(f"line {len(_META) + 1}: expected header {','.join(CSV_COLUMNS)}")

    def one(key):
        vals = meta[key]
        if len(vals) != 1:
            raise MalformedDocument(f"line {_META.index(key) + 1}: expected one value for {key}")
        return vals[0]

    def as_int(text, where):
        try:
            return int(text)
        except ValueError:
            raise MalformedDocument(f"{where}: expected an integer, got {text!r}") from None

    if len(meta["#weights"]) != 3:
        raise MalformedDocument("line 3: expected three weights")
    weights = tuple(fmt_rational(parse_rational(w, f"line 3 field {i + 2}")) for i, w in enumerate(meta["#weights"]))
    ram = as_int(one("#ramification"), "line 4")
    variables = one("#variables")
    if variables not in (X_ONLY, XY):
        raise MalformedDocument(f"line 5: unknown convention {variables!r}")
    acc_text = one("#accurate_order")
    acc = inf if acc_text == "" else as_int(acc_text, "line 6")
    terms = []
    first = len(_META) + 2
    for n, row in enumerate(rows[first - 1:], start=first):
        if len(row) != 4:
            raise MalformedDocument(f"line {n}: expected 4 fields, got {len(row)}")
        k = as_int(row[0], f"line {n} field t_num")
        e = as_int(row[1], f"line {n} field x_exp")
        if variables == XY:
            f = as_int(row[2], f"line {n} field y_exp")
        elif row[2] != "":
            raise MalformedDocument(f"line {n} field y_exp: x-only series has no y exponent")
        else:
            f = None
        c = parse_rational(row[3], f"line {n} field coeff")
        terms.append((k, e, f, c))
    return SeriesDocument(one("#model"), one("#quantity"), weights, ram, variables, tuple(sorted(terms)), acc)
