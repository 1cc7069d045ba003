"""Seeded finitary test instances, one stream per pair class J1..J4."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import OpenSemigroup, PairClass, classify_pair
from .functions import DomainSpec, FinitaryFn, classify, simple_pairs


@dataclass(frozen=True)
class Instance:
    ident: str
    pair_class: PairClass
    semigroup: OpenSemigroup
    f: FinitaryFn


def _random_map(rng, window, support):
    vals = np.arange(window)
    pts = rng.choice(window, size=support, replace=False)
    vals[pts] = rng.integers(0, window, size=support)
    return vals


def _j1(rng, window):
    return _random_map(rng, window, int(rng.integers(2, window + 1)))


def _j2(rng, window):
    while True:
        vals = _random_map(rng, window, int(rng.integers(6, window + 1)))
        if len(classify(FinitaryFn(DomainSpec.open(window), vals)).blocks) >= 3:
            return vals


def _j3(rng, window):
    while True:
        vals = _random_map(rng, window, int(rng.integers(2, window + 1)))
        c = classify(FinitaryFn(DomainSpec.open(window), vals))
        if len(c.blocks) in (1, 2) and not c.is_semi_constant:
            return vals


def _j4(rng, window):
    vals = np.arange(window)
    k = int(rng.integers(2, window + 1))
    pts = rng.choice(window, size=k, replace=False)
    vals[pts] = rng.permutation(pts)
    return vals


GENERATORS = {PairClass.J1: _j1, PairClass.J2: _j2, PairClass.J3: _j3, PairClass.J4: _j4}


# Every one-transposition derivative of an admitted J3 map keeps at least three
# simple pairs, which the finite window needs in place of infinitely many.
J3_MIN_SIMPLE_PAIRS = 5


def j3_admissible(f: FinitaryFn) -> bool:
    return len(simple_pairs(f)) >= J3_MIN_SIMPLE_PAIRS


def generate(pair_class: PairClass, count: int, seed: int, window: int = 12,
             fresh_points: int = 4, admit=None) -> list:
    """``count`` instances of one class; ``admit(f)`` may veto candidates.

    J3 defaults to ``j3_admissible``; pass ``admit=lambda f: True`` to disable it.
    """
    pair_class = PairClass(pair_class)
    if admit is None and pair_class is PairClass.J3:
        admit = j3_admissible
    rng = np.random.default_rng([seed, list(PairClass).index(pair_class)])
    dom = DomainSpec.open(window, fresh_points)
    out = []
    while len(out) < count:
        f = FinitaryFn(dom, GENERATORS[pair_class](rng, window))
        if admit is not None and not admit(f):
            continue
        S = OpenSemigroup(dom, pair_class is PairClass.J1, (f,))
        assert classify_pair(S, f) is pair_class
        out.append(Instance(f"{pair_class.value}-{len(out):04d}", pair_class, S, f))
    return out
