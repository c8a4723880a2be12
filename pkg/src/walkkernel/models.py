"""The two step sets and the data of their functional equations.

For a model with step generator S(x,y) and boundary weights (a,b,c) the
generating function satisfies

    K Q(x,y) = 1/c + A'(x,y) Q(x,0) + B'(x,y) Q(0,y) + (kappa + t G) Q(0,0)

with K = 1 - t S, A' = (a - 1 - t a A)/a, B' = (b - 1 - t b B)/b and
kappa = (ac + bc - ab - abc)/(abc).  A, B and G collect the steps that
would leave the quadrant from the x-axis, the y-axis and the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import UnknownModel
from .series import LaurentPoly, as_rational
from .xypoly import ONE, TriPoly, t

STEP_SETS = {
    "reverse_kreweras": ((1, 0), (0, 1), (-1, -1)),
    "kreweras": ((1, 1), (0, -1), (-1, 0)),
}

_ALIASES = {
    "reverse-kreweras": "reverse_kreweras",
    "reverse_kreweras": "reverse_kreweras",
    "rk": "reverse_kreweras",
    "kreweras": "kreweras",
}


def canonical_name(name: str) -> str:
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise UnknownModel(f"unknown model {name!r}; expected kreweras or reverse-kreweras") from None


@dataclass(frozen=True)
class ModelSpec:
    name: str
    steps: tuple
    weights: tuple

    @property
    def a(self):
        return self.weights[0]

    @property
    def b(self):
        return self.weights[1]

    @property
    def c(self):
        return self.weights[2]

    def reflected(self):
        """The same model with the roles of the two axes exchanged.

        Both step sets are symmetric under x <-> y, so only a and b swap.
        """
        return ModelSpec(self.name, self.steps, (self.b, self.a, self.c))


def model_spec(name, a=1, b=1, c=1) -> ModelSpec:
    name = canonical_name(name)
    weights = tuple(as_rational(w) for w in (a, b, c))
    if any(w == 0 for w in weights):
        raise ValueError("weights must be nonzero")
    return ModelSpec(name, STEP_SETS[name], weights)


def _mono(i, j):
    return TriPoly.mono(1, 0, i, j)


@dataclass(frozen=True)
class KernelModel:
    """A model together with the polynomial data of its functional equation."""

    spec: ModelSpec
    S: TriPoly
    A: TriPoly
    B: TriPoly
    G: TriPoly

    @property
    def name(self):
        return self.spec.name

    @property
    def weights(self):
        return self.spec.weights

    @property
    def K(self) -> TriPoly:
        return ONE - t * self.S

    @property
    def kappa(self) -> Fraction:
        a, b, c = self.weights
        return (a * c + b * c - a * b - a * b * c) / (a * b * c)

    @property
    def A_prime(self) -> TriPoly:
        a = self.spec.a
        return (TriPoly.const(a - 1) - t * self.A * a) / a

    @property
    def B_prime(self) -> TriPoly:
        b = self.spec.b
        return (TriPoly.const(b - 1) - t * self.B * b) / b

    @property
    def origin_coeff(self) -> TriPoly:
        """kappa + t G, the coefficient of Q(0,0)."""
        return TriPoly.const(self.kappa) + t * self.G

    @property
    def constant(self) -> TriPoly:
        return TriPoly.const(1 / self.spec.c)

    def y_parts(self):
        """(A_{-1}, A_0, A_1) with S = A_{-1}/y + A_0 + A_1 y, as Laurent polys in x."""
        parts = {-1: {}, 0: {}, 1: {}}
        for (n, i, j), c in self.S.terms.items():
            parts[j][i] = parts[j].get(i, 0) + c
        return tuple(LaurentPoly(parts[j]) for j in (-1, 0, 1))


def build_model(name, weights=(1, 1, 1)) -> KernelModel:
    """Step generator, boundary markers A, B, G and kernel of a named model."""
    spec = name if isinstance(name, ModelSpec) else model_spec(name, *weights)
    S = TriPoly()
    for i, j in spec.steps:
        S = S + _mono(i, j)
    if spec.name == "reverse_kreweras":
        A = B = G = _mono(-1, -1)
    elif spec.name == "kreweras":
        A, B, G = _mono(0, -1), _mono(-1, 0), TriPoly()
    else:
        raise UnknownModel(spec.name)
    return KernelModel(spec, S, A, B, G)
