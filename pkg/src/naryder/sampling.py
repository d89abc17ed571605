"""Seeded random rationals, vectors and matrices.

Coordinates are p/q with |p| <= 9 and 1 <= q <= 9.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .exact_linalg import Matrix


def rng_for(seed, *labels) -> random.Random:
    """Independent generator for a sub-task; string seeds hash deterministically."""
    if not labels:
        return random.Random(seed)
    return random.Random(":".join(str(x) for x in (seed,) + labels))


def random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 9))


def random_vector(rng: random.Random, d: int, nonzero: bool = True) -> tuple:
    while True:
        v = tuple(random_rational(rng) for _ in range(d))
        if not nonzero or any(v):
            return v


def random_matrix(rng: random.Random, d: int) -> Matrix:
    return Matrix(d, d, tuple(random_rational(rng) for _ in range(d * d)))


def random_antisymmetric(rng: random.Random, d: int) -> Matrix:
    e = [[Fraction(0)] * d for _ in range(d)]
    for i, j in itertools.combinations(range(d), 2):
        a = random_rational(rng)
        e[i][j], e[j][i] = a, -a
    return Matrix.from_rows(e, d)
