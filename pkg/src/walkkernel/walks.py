"""Brute-force enumeration of weighted quarter-plane walks.

This is the ground truth every other stage is checked against.  A walk
picks up the weight of each vertex it arrives at: a on the x-axis away from
the origin, b on the y-axis away from the origin, c at the origin.  The
starting vertex carries no weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import SelectorOutOfRange
from .models import KernelModel, ModelSpec, build_model
from .series import PuiseuxSeries
from .xypoly import TriPoly, t


@dataclass(frozen=True)
class WalkTable:
    model: ModelSpec
    order: int
    counts: tuple = field(repr=False)

    def at(self, n, k, l):
        return self.counts[n].get((k, l), Fraction(0))


def _arrival_weight(spec, k, l):
    if k == 0 and l == 0:
        return spec.c
    if l == 0:
        return spec.a
    if k == 0:
        return spec.b
    return 1


def enumerate_walks(model: ModelSpec, order: int) -> WalkTable:
    """Weighted counts of all walks of length <= order, by endpoint."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    spec = model.spec if isinstance(model, KernelModel) else model
    layer = {(0, 0): Fraction(1)}
    counts = [layer]
    for _ in range(order):
        nxt = {}
        for (k, l), w in layer.items():
            for dk, dl in spec.steps:
                k2, l2 = k + dk, l + dl
                if k2 < 0 or l2 < 0:
                    continue
                v = w * _arrival_weight(spec, k2, l2)
                nxt[(k2, l2)] = nxt.get((k2, l2), 0) + v
        layer = {p: v for p, v in nxt.items() if v}
        counts.append(layer)
    return WalkTable(spec, order, tuple(counts))


def boundary_series(table: WalkTable, sel):
    """Generating series of the walks picked out by ``sel``.

    ``sel`` is one of ("full",), ("line_y", i), ("line_x", i), ("diag", j)
    or ("point", i, j).  line_y(i) is Q_{-,i}(x), line_x(i) is Q_{i,-}(x)
    with x marking the y-coordinate, diag(j) is sum_k Q_{k,k+j} x^k.  The
    full selector returns Q(x,y) as a TriPoly.
    """
    kind, *args = sel
    N = table.order
    if kind == "full":
        terms = {(n, k, l): c for n, layer in enumerate(table.counts) for (k, l), c in layer.items()}
        return TriPoly._raw(terms, N)
    if kind == "point":
        i, j = args
        if i < 0 or j < 0:
            raise SelectorOutOfRange(f"point({i},{j}) lies outside the quadrant")
        coeffs = {n: {0: layer[(i, j)]} for n, layer in enumerate(table.counts) if (i, j) in layer}
        return PuiseuxSeries(coeffs, 1, N)
    (i,) = args
    if kind in ("line_y", "line_x") and i < 0:
        raise SelectorOutOfRange(f"{kind}({i}) has a negative index")
    coeffs = {}
    for n, layer in enumerate(table.counts):
        row = {}
        for (k, l), c in layer.items():
            if kind == "line_y" and l == i:
                row[k] = c
            elif kind == "line_x" and k == i:
                row[l] = c
            elif kind == "diag" and l - k == i:
                row[k] = c
        if row:
            coeffs[n] = row
    if kind not in ("line_y", "line_x", "diag"):
        raise ValueError(f"unknown selector {sel!r}")
    return PuiseuxSeries(coeffs, 1, N)


def functional_equation_residual(table: WalkTable) -> TriPoly:
    """K Q - (1/c + A' Q(x,0) + B' Q(0,y) + (kappa + tG) Q(0,0)) from the table.

    Exact through the table order; should vanish identically.
    """
    km = build_model(table.model)
    Q = boundary_series(table, ("full",))
    Qx0 = Q.at_y(0)
    Q0y = Q.at_x(0)
    Q00 = Qx0.at_x(0)
    rhs = km.constant + km.A_prime * Qx0 + km.B_prime * Q0y + km.origin_coeff * Q00
    return (km.K * Q - rhs).truncate(table.order)
