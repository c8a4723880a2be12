"""Exact truncated Puiseux series in t whose coefficients are Laurent
polynomials in x.

A series stores its terms on the grid t^(k/r) for a single ramification r,
together with ``accurate_order``: the largest k (in the same 1/r units) up to
which every coefficient is guaranteed exact.  Terms above that order are
never stored.  Polynomials that are known exactly carry ``inf``.

All values are immutable; every operation returns a new object.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, inf, isqrt, lcm

from .errors import (
    IndistinctLeadingTerms,
    NonMonomialLeadingTerm,
    NonRationalLeadingCoefficient,
    NonSquareLeadingTerm,
    PrecisionComparison,
    PrecisionExhausted,
)

# per-context so concurrent runs at different weights do not interfere
_ORDER = contextvars.ContextVar("working_order", default=Fraction(40))


def working_order():
    """Current truncation bound, as an exponent of t."""
    return _ORDER.get()


@contextlib.contextmanager
def use_working_order(order):
    token = _ORDER.set(Fraction(order))
    try:
        yield
    finally:
        _ORDER.reset(token)


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass an int, Fraction or 'p/q' string")
    return Fraction(value)


def rational_sqrt(q: Fraction):
    """Exact square root of a nonnegative rational, or None."""
    q = Fraction(q)
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _cap_units(order, ram):
    if order is None or order == inf:
        return inf
    v = Fraction(order) * ram
    return v.numerator // v.denominator


# ---------------------------------------------------------------------------
# Laurent polynomials in x


class LaurentPoly:
    """Finite map x-exponent -> Rational, zero coefficients never stored."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        if isinstance(terms, LaurentPoly):
            self.terms = dict(terms.terms)
            return
        self.terms = {}
        for e, c in (terms or {}).items():
            c = as_rational(c)
            if c:
                self.terms[int(e)] = c

    @classmethod
    def monomial(cls, coeff, exp=0):
        return cls({exp: coeff})

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def __getitem__(self, e):
        return self.terms.get(e, Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly({0: other}) if not isinstance(other, dict) else LaurentPoly(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly({0: other})
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, LaurentPoly) else -as_rational(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            other = as_rational(other)
            return LaurentPoly({e: c * other for e, c in self.terms.items()})
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def degree(self):
        return max(self.terms) if self.terms else None

    def min_degree(self):
        return min(self.terms) if self.terms else None

    def is_monomial(self):
        return len(self.terms) == 1

    def part(self, sel):
        keep = _SELECTORS[sel]
        return LaurentPoly({e: c for e, c in self.terms.items() if keep(e)})

    def invert_x(self):
        return LaurentPoly({-e: c for e, c in self.terms.items()})

    def __call__(self, x):
        x = as_rational(x)
        return sum((c * x ** e for e, c in self.terms.items()), Fraction(0))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(_fmt_term(c, Fraction(0), e) for e, c in sorted(self.terms.items()))


_SELECTORS = {
    "pos": lambda e: e > 0,
    "zero": lambda e: e == 0,
    "neg": lambda e: e < 0,
    "geq": lambda e: e >= 0,
    "leq": lambda e: e <= 0,
}


def _fmt_term(c, texp, xexp):
    parts = []
    if texp:
        parts.append("t" if texp == 1 else f"t^{texp}" if texp.denominator == 1 else f"t^({texp})")
    if xexp:
        parts.append("x" if xexp == 1 else f"x^{xexp}" if xexp > 0 else f"x^({xexp})")
    mono = "*".join(parts)
    if not mono:
        return str(c)
    if c == 1:
        return mono
    if c == -1:
        return "-" + mono
    return f"{c}*{mono}"


# ---------------------------------------------------------------------------
# Raw coefficient helpers (dict k -> dict e -> Fraction)


def _scaled(coeffs):
    den = 1
    for p in coeffs.values():
        for c in p.values():
            d = c.denominator
            if den % d:
                den = den // gcd(den, d) * d
    scaled = {}
    for k, p in coeffs.items():
        scaled[k] = {e: c.numerator * (den // c.denominator) for e, c in p.items()}
    return scaled, den


def _mul_raw(ca, cb, kmax):
    if not ca or not cb:
        return {}
    ia, da = _scaled(ca)
    ib, db = _scaled(cb)
    ka, kb = sorted(ia), sorted(ib)
    acc = {}
    for k1 in ka:
        lim = kmax - k1
        if lim < kb[0]:
            break
        p1 = ia[k1]
        for k2 in kb:
            if k2 > lim:
                break
            p2 = ib[k2]
            tgt = acc.get(k1 + k2)
            if tgt is None:
                tgt = acc[k1 + k2] = {}
            for e1, c1 in p1.items():
                for e2, c2 in p2.items():
                    e = e1 + e2
                    tgt[e] = tgt.get(e, 0) + c1 * c2
    den = da * db
    out = {}
    for k, p in acc.items():
        q = {e: Fraction(v, den) for e, v in p.items() if v}
        if q:
            out[k] = q
    return out


# ---------------------------------------------------------------------------
# Puiseux series


class PuiseuxSeries:
    """sum_k t^(k/ram) * p_k(x), exact for k <= accurate_order."""

    __slots__ = ("ram", "coeffs", "accurate_order")

    def __init__(self, coeffs=None, ram=1, accurate_order=inf):
        self.ram = int(ram)
        if self.ram < 1:
            raise ValueError("ramification must be positive")
        self.accurate_order = accurate_order if accurate_order == inf else int(accurate_order)
        out = {}
        for k, p in (coeffs or {}).items():
            if k > self.accurate_order:
                continue
            if isinstance(p, LaurentPoly):
                q = dict(p.terms)
            elif isinstance(p, dict):
                q = {int(e): as_rational(c) for e, c in p.items() if c}
            else:
                c = as_rational(p)
                q = {0: c} if c else {}
            if q:
                out[int(k)] = q
        self.coeffs = out

    @classmethod
    def _raw(cls, coeffs, ram, accurate_order):
        s = cls.__new__(cls)
        s.ram = ram
        s.accurate_order = accurate_order
        s.coeffs = coeffs
        return s

    # construction helpers

    @classmethod
    def const(cls, c, accurate_order=inf):
        return cls({0: {0: c}}, 1, accurate_order)

    @classmethod
    def monomial(cls, coeff=1, t_exp=0, x_exp=0):
        t_exp = Fraction(t_exp)
        return cls({t_exp.numerator: {x_exp: coeff}}, t_exp.denominator)

    @classmethod
    def zero(cls, accurate_order=inf, ram=1):
        return cls({}, ram, accurate_order)

    @classmethod
    def from_terms(cls, terms, accurate_order=inf):
        """Build from {(t_exp, x_exp): coeff}; accurate_order is a t-exponent."""
        ram = 1
        for texp, _ in terms:
            ram = lcm(ram, Fraction(texp).denominator)
        if accurate_order != inf:
            ram = lcm(ram, Fraction(accurate_order).denominator)
        coeffs = {}
        for (texp, xexp), c in terms.items():
            k = int(Fraction(texp) * ram)
            coeffs.setdefault(k, {})
            coeffs[k][xexp] = coeffs[k].get(xexp, 0) + as_rational(c)
        acc = inf if accurate_order == inf else int(Fraction(accurate_order) * ram)
        return cls(coeffs, ram, acc)

    # inspection

    @property
    def low(self):
        """Minimal k with a possibly nonzero coefficient (None for exact zero)."""
        if self.coeffs:
            return min(self.coeffs)
        if self.accurate_order == inf:
            return None
        return self.accurate_order + 1

    @property
    def valuation(self):
        lo = self.low
        return inf if lo is None else Fraction(lo, self.ram)

    @property
    def order(self):
        """Accurate order as an exponent of t."""
        if self.accurate_order == inf:
            return inf
        return Fraction(self.accurate_order, self.ram)

    @property
    def is_exact(self):
        return self.accurate_order == inf

    def is_zero(self):
        return not self.coeffs

    def is_univariate(self):
        return all(set(p) <= {0} for p in self.coeffs.values())

    def coeff(self, k) -> LaurentPoly:
        """Coefficient of t^(k/ram), in ramified units."""
        if k > self.accurate_order:
            raise PrecisionComparison(f"t^({k}/{self.ram}) is beyond accurate order {self.order}")
        return LaurentPoly(self.coeffs.get(k, {}))

    def coefficient(self, t_exp, x_exp=0) -> Fraction:
        t_exp = Fraction(t_exp)
        if t_exp > self.order:
            raise PrecisionComparison(f"t^{t_exp} is beyond accurate order {self.order}")
        k = t_exp * self.ram
        if k.denominator != 1:
            return Fraction(0)
        return self.coeffs.get(int(k), {}).get(x_exp, Fraction(0))

    def terms(self):
        """Sorted (t_exp, x_exp, coeff) triples."""
        out = []
        for k in sorted(self.coeffs):
            for e in sorted(self.coeffs[k]):
                out.append((Fraction(k, self.ram), e, self.coeffs[k][e]))
        return out

    def x_bounds(self):
        es = [e for p in self.coeffs.values() for e in p]
        if not es:
            return None
        return min(es), max(es)

    def univariate(self):
        """{t_exp: coeff} for an x-free series."""
        if not self.is_univariate():
            raise ValueError("series depends on x")
        return {Fraction(k, self.ram): p[0] for k, p in sorted(self.coeffs.items())}

    # ramification

    def ramify(self, r):
        if r == self.ram:
            return self
        if r % self.ram:
            raise ValueError(f"cannot ramify {self.ram} to {r}")
        m = r // self.ram
        acc = inf if self.accurate_order == inf else (self.accurate_order + 1) * m - 1
        return PuiseuxSeries._raw({k * m: p for k, p in self.coeffs.items()}, r, acc)

    def normalized(self):
        """Smallest ramification that holds every stored term exactly."""
        g = self.ram
        for k in self.coeffs:
            g = gcd(g, k)
            if g == 1:
                return self
        if g == 1:
            return self
        acc = inf if self.accurate_order == inf else (self.accurate_order + 1) // g - 1
        acc = acc if acc == inf else max(acc, -(10**9))
        # accurate_order in coarser units must not claim more than before
        if acc != inf and (acc + 1) * g - 1 > self.accurate_order:
            acc -= 1
        return PuiseuxSeries._raw({k // g: p for k, p in self.coeffs.items()}, self.ram // g, acc)

    def truncate(self, order):
        """Drop everything above t^order (order is a t-exponent)."""
        cap = _cap_units(order, self.ram)
        if cap >= self.accurate_order:
            return self
        return PuiseuxSeries._raw({k: p for k, p in self.coeffs.items() if k <= cap}, self.ram, cap)

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, PuiseuxSeries):
            return other
        if isinstance(other, LaurentPoly):
            return PuiseuxSeries({0: other})
        return PuiseuxSeries.const(as_rational(other))

    def __add__(self, other):
        return arith(self, self._coerce(other), "add")

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries._raw(
            {k: {e: -c for e, c in p.items()} for k, p in self.coeffs.items()},
            self.ram,
            self.accurate_order,
        )

    def __sub__(self, other):
        return arith(self, -self._coerce(other), "add")

    def __rsub__(self, other):
        return arith(-self, self._coerce(other), "add")

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return arith(self, self._coerce(other), "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, str)):
            return self.scale(1 / as_rational(other))
        return arith(self, invert(self._coerce(other)), "mul")

    def __rtruediv__(self, other):
        return arith(self._coerce(other), invert(self), "mul")

    def __pow__(self, n):
        if n < 0:
            return invert(self) ** (-n)
        result = PuiseuxSeries.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c):
        c = as_rational(c)
        if not c:
            return PuiseuxSeries.zero(self.accurate_order, self.ram)
        return PuiseuxSeries._raw(
            {k: {e: v * c for e, v in p.items()} for k, p in self.coeffs.items()},
            self.ram,
            self.accurate_order,
        )

    def shift_x(self, n):
        """Multiply by x^n."""
        if not n:
            return self
        return PuiseuxSeries._raw(
            {k: {e + n: c for e, c in p.items()} for k, p in self.coeffs.items()},
            self.ram,
            self.accurate_order,
        )

    def shift_t(self, t_exp):
        """Multiply by t^t_exp."""
        t_exp = Fraction(t_exp)
        s = self.ramify(lcm(self.ram, t_exp.denominator))
        d = int(t_exp * s.ram)
        acc = inf if s.accurate_order == inf else s.accurate_order + d
        return PuiseuxSeries._raw({k + d: p for k, p in s.coeffs.items()}, s.ram, acc)

    def x_part(self, sel):
        keep = _SELECTORS[sel]
        out = {}
        for k, p in self.coeffs.items():
            q = {e: c for e, c in p.items() if keep(e)}
            if q:
                out[k] = q
        return PuiseuxSeries._raw(out, self.ram, self.accurate_order)

    def x_coefficient(self, e):
        """The univariate series [x^e] of this series."""
        out = {k: {0: p[e]} for k, p in self.coeffs.items() if e in p}
        return PuiseuxSeries._raw(out, self.ram, self.accurate_order)

    def invert_x(self):
        return PuiseuxSeries._raw(
            {k: {-e: c for e, c in p.items()} for k, p in self.coeffs.items()},
            self.ram,
            self.accurate_order,
        )

    def evaluate_x(self, x):
        """Substitute a rational value for x."""
        x = as_rational(x)
        out = {}
        for k, p in self.coeffs.items():
            v = sum((c * x ** e for e, c in p.items()), Fraction(0))
            if v:
                out[k] = {0: v}
        return PuiseuxSeries._raw(out, self.ram, self.accurate_order)

    def with_accuracy(self, acc_units):
        """Lower the accurate order (in ramified units)."""
        if acc_units >= self.accurate_order:
            return self
        return PuiseuxSeries._raw(
            {k: p for k, p in self.coeffs.items() if k <= acc_units}, self.ram, acc_units
        )

    # comparison

    def agrees(self, other, upto=None):
        """Coefficientwise equality up to the smaller accurate order.

        ``upto`` (a t-exponent) asks for agreement through that order and
        raises PrecisionComparison if either side does not know it.
        """
        other = self._coerce(other)
        r = lcm(self.ram, other.ram)
        a, b = self.ramify(r), other.ramify(r)
        acc = min(a.accurate_order, b.accurate_order)
        if upto is not None:
            want = _cap_units(upto, r)
            if want > acc:
                raise PrecisionComparison(
                    f"requested agreement through t^{upto} but accuracy is t^{Fraction(acc, r)}"
                )
            acc = want
        for k in set(a.coeffs) | set(b.coeffs):
            if k <= acc and a.coeffs.get(k, {}) != b.coeffs.get(k, {}):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, (PuiseuxSeries, LaurentPoly, int, Fraction)):
            return NotImplemented
        return self.agrees(other)

    __hash__ = None

    def __repr__(self):
        body = " + ".join(_fmt_term(c, t, e) for t, e, c in self.terms()) or "0"
        body = body.replace("+ -", "- ")
        if self.accurate_order == inf:
            return body
        return f"{body} + O(t^{Fraction(self.accurate_order + 1, self.ram)})"


T = PuiseuxSeries.monomial(1, 1, 0)
X = PuiseuxSeries.monomial(1, 0, 1)
ONE = PuiseuxSeries.const(1)


def series(value) -> PuiseuxSeries:
    if isinstance(value, PuiseuxSeries):
        return value
    if isinstance(value, LaurentPoly):
        return PuiseuxSeries({0: value})
    return PuiseuxSeries.const(as_rational(value))


def _unify(f, g):
    if f.ram == g.ram:
        return f, g
    r = lcm(f.ram, g.ram)
    return f.ramify(r), g.ramify(r)


def arith(f: PuiseuxSeries, g: PuiseuxSeries, op: str) -> PuiseuxSeries:
    """Exact add or mul on the common ramification.

    The accurate order of a product is min(A_f + v_g, A_g + v_f), so only
    guaranteed terms are kept.
    """
    f, g = _unify(series(f), series(g))
    r = f.ram
    if op == "add":
        acc = min(f.accurate_order, g.accurate_order)
        out = {}
        for src in (f.coeffs, g.coeffs):
            for k, p in src.items():
                if k > acc:
                    continue
                tgt = out.get(k)
                if tgt is None:
                    out[k] = dict(p)
                    continue
                for e, c in p.items():
                    v = tgt.get(e, 0) + c
                    if v:
                        tgt[e] = v
                    else:
                        tgt.pop(e, None)
        return PuiseuxSeries._raw({k: p for k, p in out.items() if p}, r, acc)
    if op != "mul":
        raise ValueError(f"unknown op {op!r}")
    vf, vg = f.low, g.low
    if vf is None or vg is None:
        # exact zero annihilates; accuracy limited by the other operand only
        return PuiseuxSeries.zero(inf, r)
    acc = min(f.accurate_order + vg, g.accurate_order + vf)
    if acc != inf:
        acc = int(acc)
    kmax = acc
    return PuiseuxSeries._raw(_mul_raw(f.coeffs, g.coeffs, kmax), r, acc)


def _capped(f, order):
    cap = _cap_units(working_order() if order is None else order, f.ram)
    return cap


def _lead(f):
    lo = f.low
    if lo is None:
        raise ZeroDivisionError("series is exactly zero")
    if lo not in f.coeffs:
        raise PrecisionExhausted("leading coefficient is not known (series vanishes to accuracy)")
    return lo, f.coeffs[lo]


def _raw_trunc(c, kmax):
    return {k: p for k, p in c.items() if k <= kmax}


def _raw_add_scaled(a, b, s):
    """a + s*b on raw coefficient maps."""
    out = {k: dict(p) for k, p in a.items()}
    for k, p in b.items():
        tgt = out.setdefault(k, {})
        for e, c in p.items():
            v = tgt.get(e, 0) + s * c
            if v:
                tgt[e] = v
            else:
                tgt.pop(e, None)
    return {k: p for k, p in out.items() if p}


def _newton_unit_inverse(u, cap):
    """Raw inverse of a unit 1 + h (h of positive valuation) through k <= cap.

    Each step g <- g + g(1 - u g) doubles the number of correct terms.
    """
    one = {0: {0: Fraction(1)}}
    g = dict(one)
    prec = 0
    while prec < cap:
        prec = min(cap, 2 * prec + 1)
        ug = _mul_raw(_raw_trunc(u, prec), g, prec)
        err = _raw_add_scaled(one, ug, -1)
        g = _raw_add_scaled(g, _mul_raw(g, err, prec), 1)
    return g


def _newton_unit_inv_sqrt(u, cap):
    """Raw 1/sqrt(u) for a unit u = 1 + h, through k <= cap."""
    one = {0: {0: Fraction(1)}}
    y = dict(one)
    prec = 0
    while prec < cap:
        prec = min(cap, 2 * prec + 1)
        y2 = _mul_raw(y, y, prec)
        err = _raw_add_scaled(one, _mul_raw(_raw_trunc(u, prec), y2, prec), -1)
        y = _raw_add_scaled(y, _mul_raw(y, err, prec), Fraction(1, 2))
    return y


def _unit_part(f, lo, e, inv_u):
    return {k - lo: {ee - e: c * inv_u for ee, c in p.items()} for k, p in f.coeffs.items()}


def invert(f: PuiseuxSeries, order=None) -> PuiseuxSeries:
    """1/f, for f whose lowest coefficient is a single monomial u*x^e."""
    f = series(f)
    lo, lead = _lead(f)
    if len(lead) != 1:
        raise NonMonomialLeadingTerm(f"leading coefficient {LaurentPoly(lead)} is not a monomial")
    (e, u), = lead.items()
    acc = f.accurate_order - 2 * lo if f.accurate_order != inf else inf
    cap = min(acc, _capped(f, order))
    if cap < -lo:
        raise PrecisionExhausted("not enough accuracy to invert")
    # f = u x^e t^lo (1 + h)
    inv_u = 1 / u
    g = _newton_unit_inverse(_unit_part(f, lo, e, inv_u), cap + lo)
    out = {k - lo: {ee - e: c * inv_u for ee, c in p.items()} for k, p in g.items()}
    return PuiseuxSeries._raw(out, f.ram, cap)


def sqrt(f: PuiseuxSeries, order=None) -> PuiseuxSeries:
    """Square root with leading coefficient +sqrt(u).

    Needs a leading term u*x^e*t^(k/r) with u a rational square and e, k even.
    """
    f = series(f)
    lo, lead = _lead(f)
    if len(lead) != 1:
        raise NonSquareLeadingTerm(f"leading coefficient {LaurentPoly(lead)} is not a monomial")
    (e, u), = lead.items()
    su = rational_sqrt(u)
    if su is None or e % 2 or lo % 2:
        raise NonSquareLeadingTerm(
            f"leading term {u}*x^{e}*t^({lo}/{f.ram}) has no rational square root"
        )
    acc = f.accurate_order - lo // 2 if f.accurate_order != inf else inf
    cap = min(acc, _capped(f, order))
    rel = cap - lo // 2
    if rel < 0:
        raise PrecisionExhausted("not enough accuracy for a square root")
    unit = _unit_part(f, lo, e, 1 / u)
    root = _mul_raw(_raw_trunc(unit, rel), _newton_unit_inv_sqrt(unit, rel), rel)
    out = {k + lo // 2: {ee + e // 2: c * su for ee, c in p.items()} for k, p in root.items()}
    return PuiseuxSeries._raw(out, f.ram, cap)


def x_part(f: PuiseuxSeries, sel: str) -> PuiseuxSeries:
    """[x^>], [x^0], [x^<], [x^>=] or [x^<=] of f, coefficientwise."""
    return series(f).x_part(sel)


def power_table(root: PuiseuxSeries, lo: int, hi: int, order=None):
    """{e: root^e} for lo <= e <= hi."""
    table = {0: PuiseuxSeries.const(1)}
    if hi > 0:
        p = root.truncate(working_order() if order is None else order)
        table[1] = p
        for e in range(2, hi + 1):
            table[e] = (table[e - 1] * p).truncate(working_order() if order is None else order)
    if lo < 0:
        inv = invert(root, order)
        table[-1] = inv
        for e in range(2, -lo + 1):
            table[-e] = (table[-e + 1] * inv).truncate(working_order() if order is None else order)
    return table


def substitute_x(f: PuiseuxSeries, target, order=None, need=0) -> PuiseuxSeries:
    """Compose f(x) with x = target.

    ``target`` is either the string "invert_x" (exact x -> 1/x) or a
    univariate series / RootSeries.  For a root of valuation v and f with
    pole order D the result is accurate to A_f - v*D; ``need`` is the least
    accurate order (as a t-exponent) the caller can use.
    """
    f = series(f)
    if isinstance(target, str):
        if target != "invert_x":
            raise ValueError(target)
        return f.invert_x()
    root = target.value if isinstance(target, RootSeries) else series(target)
    bounds = f.x_bounds()
    if bounds is None:
        return PuiseuxSeries._raw({}, f.ram, f.accurate_order)
    lo, hi = bounds
    if f.accurate_order != inf and root.low is not None:
        v = root.valuation
        if v > 0 and lo < 0 or v < 0 and hi > 0:
            worst = min(v * lo, v * hi)
            if f.order + worst < need:
                raise PrecisionExhausted(
                    f"substitution leaves accuracy t^{f.order + worst}, need t^{need}"
                )
    pieces = {}
    for k, p in f.coeffs.items():
        for e, c in p.items():
            pieces.setdefault(e, {})[k] = {0: c}
    powers = power_table(root, min(lo, 0), max(hi, 0), order)
    total = PuiseuxSeries.zero(inf)
    for e in range(lo, hi + 1):
        fe = PuiseuxSeries._raw(pieces.get(e, {}), f.ram, f.accurate_order)
        if fe.is_exact and fe.is_zero():
            continue
        total = total + fe * powers[e]
    cap = working_order() if order is None else order
    total = total.truncate(cap)
    if total.order < need:
        raise PrecisionExhausted(f"substitution leaves accuracy t^{total.order}, need t^{need}")
    return total.normalized()


# ---------------------------------------------------------------------------
# Newton-Puiseux roots


@dataclass(frozen=True)
class RootSeries:
    value: PuiseuxSeries
    valuation: Fraction
    finite: bool

    def __repr__(self):
        return f"RootSeries({self.value!r})"


def poly_coefficients(f: PuiseuxSeries):
    """View a series with Laurent coefficients in x as a polynomial in x.

    Returns (shift, [a_0, ..., a_d]) with f = x^shift * sum a_i x^i.
    """
    f = series(f)
    bounds = f.x_bounds()
    if bounds is None:
        return 0, []
    lo, hi = bounds
    return lo, [f.x_coefficient(e) for e in range(lo, hi + 1)]


def evaluate_poly(coeffs, x: PuiseuxSeries, order=None):
    """Horner evaluation, exact through ``order``.

    When x has negative valuation each pending multiplication by x lowers
    the order, so intermediate truncations keep that many extra terms.
    """
    cap = Fraction(working_order() if order is None else order)
    drop = max(Fraction(0), -x.valuation) if not x.is_zero() else Fraction(0)
    acc = PuiseuxSeries.zero(inf)
    d = len(coeffs) - 1
    for i, a in enumerate(reversed(coeffs)):
        acc = (acc * x + a).truncate(cap + drop * (d - i))
    return acc


def _lc(a: PuiseuxSeries):
    lo = a.low
    return a.coeffs[lo][0]


def _rational_roots(char):
    """Nonzero rational roots with multiplicities of sum char[i] c^i."""
    import sympy

    c = sympy.Symbol("c")
    expr = sum(sympy.Rational(v.numerator, v.denominator) * c**i for i, v in enumerate(char))
    poly = sympy.Poly(expr, c, domain="QQ")
    _, factors = poly.factor_list()
    roots = []
    for fac, mult in factors:
        if fac.degree() == 1:
            a1, a0 = fac.all_coeffs()
            r = -sympy.Rational(a0) / sympy.Rational(a1)
            if r != 0:
                roots.append((Fraction(int(r.p), int(r.q)), mult))
        elif fac.degree() > 1:
            raise NonRationalLeadingCoefficient(
                f"initial coefficient satisfies irreducible {fac.as_expr()} = 0"
            )
    return sorted(roots, key=lambda rm: rm[0], reverse=True)


def _newton_segments(coeffs):
    pts = [(i, a.valuation) for i, a in enumerate(coeffs) if not a.is_zero()]
    for i, a in enumerate(coeffs):
        if a.is_zero() and not a.is_exact:
            raise PrecisionExhausted(f"coefficient of x^{i} vanishes to its accuracy")
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    segs = []
    for (i0, v0), (i1, v1) in zip(hull, hull[1:]):
        slope = Fraction(v1 - v0) / (i1 - i0)
        on = [i for i, v in pts if i0 <= i <= i1 and v == v0 + slope * (i - i0)]
        segs.append((-slope, on))
    return segs


def _shift_poly(coeffs, w, c, order):
    """Coefficients of P(t^w (c + z)) as a polynomial in z."""
    from math import comb

    d = len(coeffs) - 1
    tw = PuiseuxSeries.monomial(1, w, 0)
    scaled = []
    tp = PuiseuxSeries.const(1)
    for a in coeffs:
        s = a * tp
        scaled.append(s if s.is_exact else s.truncate(order))
        tp = tp * tw
    out = []
    for j in range(d + 1):
        acc = PuiseuxSeries.zero(inf)
        for i in range(j, d + 1):
            coef = comb(i, j) * c ** (i - j)
            if coef:
                acc = acc + scaled[i].scale(coef)
        out.append(acc)
    return out


def _exact_truncation(x, order):
    cap = _cap_units(order, x.ram)
    return PuiseuxSeries._raw({k: p for k, p in x.coeffs.items() if k <= cap}, x.ram, inf)


def _refine(coeffs, seed, order):
    """Newton iteration on a simple root started from ``seed``.

    The iterate is kept as an exact polynomial truncated at ``order``; it is
    accurate through ``order`` once P(x) vanishes through order + v(P'(x)).
    """
    deriv = [a.scale(i) for i, a in enumerate(coeffs)][1:]
    x = _exact_truncation(seed, order)
    for _ in range(200):
        dval = evaluate_poly(deriv, x, order + 2)
        if dval.is_zero():
            raise IndistinctLeadingTerms("derivative vanishes at the root: root is not simple")
        vd = dval.valuation
        bound = order + vd
        val = evaluate_poly(coeffs, x, bound)
        if val.is_zero():
            r = lcm(x.ram, Fraction(order).denominator)
            return x.ramify(r).with_accuracy(_cap_units(order, r))
        need = order - val.valuation
        if dval.order < need + 2 * vd:
            dval = evaluate_poly(deriv, x, need + 2 * vd)
        step = (val * invert(dval, need)).truncate(order)
        new = _exact_truncation(x - step, order)
        if new.agrees(x):
            raise IndistinctLeadingTerms("Newton iteration stalled before reaching the working order")
        x = new
    raise IndistinctLeadingTerms("Newton iteration did not converge")


def _roots_rec(coeffs, order, positive_only, depth=0):
    if depth > 64:
        raise IndistinctLeadingTerms("Newton-Puiseux recursion did not separate the roots")
    roots = []
    # strip exact zero roots
    zeros = 0
    while coeffs and coeffs[0].is_zero() and coeffs[0].is_exact:
        coeffs = coeffs[1:]
        zeros += 1
    roots.extend([PuiseuxSeries.zero(inf)] * zeros)
    if len(coeffs) <= 1:
        return roots
    for w, on in _newton_segments(coeffs):
        if positive_only and w <= 0:
            continue
        i0 = on[0]
        char = [Fraction(0)] * (on[-1] - i0 + 1)
        for i in on:
            char[i - i0] = _lc(coeffs[i])
        for c, mult in _rational_roots(char):
            if mult == 1:
                seed = PuiseuxSeries.monomial(c, w, 0)
                roots.append(_refine(coeffs, seed, order))
                continue
            sub = _shift_poly(coeffs, w, c, order + abs(w) * len(coeffs))
            # normalise the valuation so coefficients stay small
            vmin = min(a.valuation for a in sub if not a.is_zero())
            sub = [a.shift_t(-vmin) for a in sub]
            for z in _roots_rec(sub, order - w, True, depth + 1):
                x = (PuiseuxSeries.const(c) + z).shift_t(w)
                roots.append(x)
    return roots


def puiseux_roots(P, order=None, seed_hint=None):
    """All roots of a polynomial in x with Puiseux-series coefficients.

    ``P`` is either a list [a_0, ..., a_d] of x-free series or a series with
    Laurent coefficients in x (multiplied through by the lowest power of x).
    Roots are refined by Newton iteration to the working order and returned
    finite ones first (valuation descending), conjugates by leading differing
    coefficient descending.
    """
    if isinstance(P, PuiseuxSeries):
        _, P = poly_coefficients(P)
    coeffs = [series(a) for a in P]
    while coeffs and coeffs[-1].is_zero():
        coeffs.pop()
    cap = Fraction(working_order() if order is None else order)
    found = _roots_rec(coeffs, cap, False)
    if seed_hint:
        found = [r for r in found if any(_matches_hint(r, h) for h in seed_hint)]
    out = []
    for r in found:
        r = r.normalized()
        v = r.valuation
        out.append(RootSeries(r, v if v != inf else Fraction(10**9), v >= 0))
    out.sort(key=_root_key)
    return out


def _matches_hint(r, hint):
    hint = series(hint)
    try:
        return (r - hint).valuation > hint.valuation
    except Exception:
        return False


def _root_key(root):
    terms = root.value.terms()
    signature = tuple(-c for _, _, c in terms[:8])
    exps = tuple(t for t, _, _ in terms[:8])
    return (not root.finite, -root.valuation, exps, signature)
