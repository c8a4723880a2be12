from fractions import Fraction
from functools import lru_cache

from walkkernel.models import build_model, model_spec
from walkkernel.pipeline import solve_model
from walkkernel.walks import enumerate_walks


def W(*ws):
    return tuple(Fraction(w) for w in ws)


@lru_cache(maxsize=None)
def table(name, weights, order=16):
    return enumerate_walks(model_spec(name, *weights), order)


@lru_cache(maxsize=None)
def model(name, weights):
    return build_model(name, weights)


@lru_cache(maxsize=None)
def solution(name, weights, order=15, working=None):
    return solve_model(name, weights, order, working=working)
