"""Polynomials (and truncated series) in t, x, y with rational coefficients.

Exponents of x and y may be negative; exponents of t are nonnegative
integers.  Used for the step generator, the orbit matrices and the full
generating function Q(x,y) read off a walk table.
"""

from __future__ import annotations

from math import inf

from .series import PuiseuxSeries, as_rational


class TriPoly:
    """sum c * t^n x^i y^j, exact for n <= accurate_order."""

    __slots__ = ("terms", "accurate_order")

    def __init__(self, terms=None, accurate_order=inf):
        self.accurate_order = accurate_order
        self.terms = {}
        for key, c in (terms or {}).items():
            c = as_rational(c)
            if c and key[0] <= accurate_order:
                self.terms[tuple(key)] = c

    @classmethod
    def _raw(cls, terms, accurate_order=inf):
        p = cls.__new__(cls)
        p.terms = terms
        p.accurate_order = accurate_order
        return p

    @classmethod
    def const(cls, c):
        return cls({(0, 0, 0): c})

    @classmethod
    def mono(cls, c=1, n=0, i=0, j=0):
        return cls({(n, i, j): c})

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def _coerce(self, other):
        if isinstance(other, TriPoly):
            return other
        return TriPoly.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        acc = min(self.accurate_order, other.accurate_order)
        out = {k: v for k, v in self.terms.items() if k[0] <= acc}
        for k, v in other.terms.items():
            if k[0] > acc:
                continue
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return TriPoly._raw(out, acc)

    __radd__ = __add__

    def __neg__(self):
        return TriPoly._raw({k: -v for k, v in self.terms.items()}, self.accurate_order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def t_valuation(self):
        if self.terms:
            return min(k[0] for k in self.terms)
        return inf if self.accurate_order == inf else self.accurate_order + 1

    def __mul__(self, other):
        if not isinstance(other, TriPoly):
            c = as_rational(other)
            if not c:
                return TriPoly._raw({}, self.accurate_order)
            return TriPoly._raw({k: v * c for k, v in self.terms.items()}, self.accurate_order)
        if self.is_zero() and self.accurate_order == inf or other.is_zero() and other.accurate_order == inf:
            return TriPoly()
        acc = min(self.accurate_order + other.t_valuation(), other.accurate_order + self.t_valuation())
        out = {}
        for (n1, i1, j1), c1 in self.terms.items():
            for (n2, i2, j2), c2 in other.terms.items():
                n = n1 + n2
                if n > acc:
                    continue
                key = (n, i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + c1 * c2
        return TriPoly._raw({k: v for k, v in out.items() if v}, acc)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / as_rational(c))

    def __pow__(self, n):
        out = TriPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        acc = min(self.accurate_order, other.accurate_order)
        a = {k: v for k, v in self.terms.items() if k[0] <= acc}
        b = {k: v for k, v in other.terms.items() if k[0] <= acc}
        return a == b

    __hash__ = None

    def truncate(self, order):
        if order >= self.accurate_order:
            return self
        return TriPoly._raw({k: v for k, v in self.terms.items() if k[0] <= order}, order)

    def subs(self, xmap, ymap):
        """Monomial substitution x -> x^xmap[0] y^xmap[1], y -> x^ymap[0] y^ymap[1]."""
        out = {}
        for (n, i, j), c in self.terms.items():
            key = (n, i * xmap[0] + j * ymap[0], i * xmap[1] + j * ymap[1])
            out[key] = out.get(key, 0) + c
        return TriPoly._raw({k: v for k, v in out.items() if v}, self.accurate_order)

    def swap_xy(self):
        return self.subs((0, 1), (1, 0))

    def y_range(self):
        js = [k[2] for k in self.terms]
        return (min(js), max(js)) if js else None

    def y_coeff(self, j) -> PuiseuxSeries:
        """[y^j] as a series in t with Laurent coefficients in x."""
        coeffs = {}
        for (n, i, jj), c in self.terms.items():
            if jj == j:
                coeffs.setdefault(n, {})[i] = c
        return PuiseuxSeries(coeffs, 1, self.accurate_order)

    def at_y(self, value):
        """Substitute a rational value (typically 0) for y."""
        value = as_rational(value)
        out = {}
        for (n, i, j), c in self.terms.items():
            if j < 0 and value == 0:
                raise ZeroDivisionError("negative power of y at y = 0")
            v = c * value ** j
            if v:
                out[(n, i, 0)] = out.get((n, i, 0), 0) + v
        return TriPoly._raw({k: v for k, v in out.items() if v}, self.accurate_order)

    def at_x(self, value):
        return self.swap_xy().at_y(value).swap_xy()

    @classmethod
    def from_series(cls, s: PuiseuxSeries, y_exp=0):
        """Lift an integer-ramified series in t and x into t, x, y."""
        s = s.normalized()
        if s.ram != 1:
            raise ValueError("only integer powers of t can be lifted")
        terms = {(k, e, y_exp): c for k, p in s.coeffs.items() for e, c in p.items()}
        return cls._raw(terms, s.accurate_order)

    @classmethod
    def from_series_in_y(cls, s: PuiseuxSeries):
        """Lift a series in t and x, reading its x as y."""
        return cls.from_series(s).swap_xy()

    def __repr__(self):
        if not self.terms:
            body = "0"
        else:
            parts = []
            for (n, i, j), c in sorted(self.terms.items()):
                parts.append(f"{c}*t^{n}*x^{i}*y^{j}")
            body = " + ".join(parts)
        return body if self.accurate_order == inf else f"{body} + O(t^{self.accurate_order + 1})"


t = TriPoly.mono(1, 1, 0, 0)
x = TriPoly.mono(1, 0, 1, 0)
y = TriPoly.mono(1, 0, 0, 1)
xbar = TriPoly.mono(1, 0, -1, 0)
ybar = TriPoly.mono(1, 0, 0, -1)
ONE = TriPoly.const(1)
