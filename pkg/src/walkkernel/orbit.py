"""The six-element symmetry group, the orbit matrix and its null vectors.

Applying the group to the functional equation gives K Q = M V + C with
Q = (Q(g_1), ..., Q(g_6)) and V = (Q(x,0), Q(0,y), Q(xbar ybar,0),
Q(0,xbar ybar), Q(0,x), Q(y,0)).  A vector N with N M = 0 turns this into
the full-orbit sum K N.Q = N.C; a vector N2 killing the columns of V other
than Q(x,0) and Q(0,x) gives the half-orbit sum.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NullvectorCheckFailed
from .forms import ORBIT
from .models import KernelModel
from .xypoly import TriPoly, t, x, xbar, y, ybar

# Column of V holding Q(X,0) and Q(0,Y) for each group element.
X_COLUMN = {1: 0, 2: 2, 3: 5, 4: 5, 5: 2, 6: 0}
Y_COLUMN = {1: 1, 2: 1, 3: 3, 4: 4, 5: 4, 6: 3}
HALF_COLUMNS = (1, 2, 3, 5)


def act(p: TriPoly, g: int) -> TriPoly:
    xmap, ymap = ORBIT[g]
    return p.subs(xmap, ymap)


@dataclass(frozen=True)
class OrbitSystem:
    model: KernelModel
    M: tuple  # 6 x 6 TriPoly
    C: tuple  # 6 pairs (known part, coefficient of Q(0,0))
    N: tuple
    N2: tuple

    def NC(self):
        """N.C as (known part, coefficient of Q(0,0))."""
        known = TriPoly()
        q00 = TriPoly()
        for n, (c0, c1) in zip(self.N, self.C):
            known = known + n * c0
            q00 = q00 + n * c1
        return known, q00

    def N2C2(self):
        """N2.C2 with C2 = C + (columns Q(x,0), Q(0,x) of M times V).

        Returned as {element: coefficient} over "one", "Q00", ("V", 1), ("V", 5).
        """
        out = {"one": TriPoly(), "Q00": TriPoly(), ("V", 1): TriPoly(), ("V", 5): TriPoly()}
        for n, row, (c0, c1) in zip(self.N2, self.M, self.C):
            out["one"] = out["one"] + n * c0
            out["Q00"] = out["Q00"] + n * c1
            out[("V", 1)] = out[("V", 1)] + n * row[0]
            out[("V", 5)] = out[("V", 5)] + n * row[4]
        return out


def orbit_matrix(model: KernelModel):
    rows = []
    consts = []
    for g in range(1, 7):
        row = [TriPoly() for _ in range(6)]
        row[X_COLUMN[g]] = row[X_COLUMN[g]] + act(model.A_prime, g)
        row[Y_COLUMN[g]] = row[Y_COLUMN[g]] + act(model.B_prime, g)
        rows.append(tuple(row))
        consts.append((model.constant, act(model.origin_coeff, g)))
    return tuple(rows), tuple(consts)


def _null_vectors(model: KernelModel):
    a, b, _ = model.weights
    if model.name == "reverse_kreweras":
        N = (
            -y * (1 - b + t * b * x) * (1 - a + t * a * y),
            xbar * (1 - a + t * a * y) * (t * b + x * y - b * x * y),
            -xbar * (1 - b + t * b * y) * (t * a + x * y - a * x * y),
            y * (1 - a + t * a * x) * (1 - b + t * b * y),
            -xbar * (1 - a + t * a * x) * (t * b + x * y - b * x * y),
            # sign fixed by N M = 0; the opposite sign leaves column 1 nonzero
            xbar * (1 - b + t * b * x) * (t * a + x * y - a * x * y),
        )
        N2 = (
            -x * (1 - b + t * b * x) * (1 - a + t * a * y),
            ybar * (1 - a + t * a * y) * (t * b + x * y - b * x * y),
            TriPoly(),
            TriPoly(),
            -ybar * (1 - a + t * a * x) * (t * b + x * y - b * x * y),
            TriPoly(),
        )
        return N, N2
    ax = a * t + x - a * x
    bx = b * t + x - b * x
    ay = a * t + y - a * y
    by = b * t + y - b * y
    axy = 1 - a + a * t * x * y
    bxy = 1 - b + b * t * x * y
    # overall sign chosen so that N.C matches expected_NC below
    N = (
        -ax * by * axy * bxy,
        xbar * ax * bx * by * axy,
        -xbar * ax * bx * ay * bxy,
        bx * ay * axy * bxy,
        -ybar * bx * ay * by * axy,
        ybar * ax * ay * by * bxy,
    )
    N2 = (
        ax * bxy,
        -xbar * ax * bx,
        TriPoly(),
        TriPoly(),
        ybar * bx * ay,
        TriPoly(),
    )
    return N, N2


def expected_NC(model: KernelModel):
    """The closed form of N.C: zero for reverse Kreweras; for Kreweras
    t^3 xbar ybar (a-b)(x-y)(x^2y-1)(xy^2-1)[ab - (ab-ac-bc+abc)Q(0,0)]/c."""
    if model.name == "reverse_kreweras":
        return TriPoly(), TriPoly()
    a, b, c = model.weights
    base = t**3 * xbar * ybar * (x - y) * (x * x * y - 1) * (x * y * y - 1) * ((a - b) / c)
    return base * (a * b), base * (-(a * b - a * c - b * c + a * b * c))


def orbit_system(model: KernelModel, check=True) -> OrbitSystem:
    M, C = orbit_matrix(model)
    N, N2 = _null_vectors(model)
    system = OrbitSystem(model, M, C, N, N2)
    if check:
        verify(system)
    return system


def verify(system: OrbitSystem):
    """N M = 0, N2 M2 = 0, K invariant under the group and N.C as expected."""
    K = system.model.K
    for g in range(1, 7):
        if not act(K, g) == K:
            raise NullvectorCheckFailed(f"kernel is not invariant under group element {g}")
    for col in range(6):
        s = TriPoly()
        for n, row in zip(system.N, system.M):
            s = s + n * row[col]
        if not s.is_zero():
            raise NullvectorCheckFailed(f"N M has a nonzero entry in column {col + 1}")
    for col in HALF_COLUMNS:
        s = TriPoly()
        for n, row in zip(system.N2, system.M):
            s = s + n * row[col]
        if not s.is_zero():
            raise NullvectorCheckFailed(f"N2 M2 has a nonzero entry in column {col + 1}")
    got = system.NC()
    want = expected_NC(system.model)
    if not (got[0] == want[0] and got[1] == want[1]):
        raise NullvectorCheckFailed("N.C differs from its closed form")
    return True


