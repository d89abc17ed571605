"""Octonions over Q (or binary64 in approximate mode) and the ternary bracket.

The multiplication table comes from Cayley-Dickson doubling with
``(a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))`` applied three times to
the reals.  With that convention the coordinate order e1..e8 reads
1, a, b, ab, c, ac, bc, abc, where a, b, c are the generators of the three
doublings.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np
from sympy.solvers.diophantine.diophantine import sum_of_four_squares

from .exact_linalg import (
    Matrix,
    Subspace,
    as_fraction,
    format_fraction,
    rational_sqrt,
)
from .nary_core import CheckReport
from .sampling import random_rational

__all__ = [
    "DIM",
    "MUL_TABLE",
    "Octonion",
    "OctonionDomainError",
    "NoExactUnit",
    "InternalConsistencyError",
    "oct_mul",
    "oct_conj",
    "form",
    "norm",
    "ternary_bracket",
    "basis_octonion",
    "check_octonion_identities",
    "random_orthogonal",
    "random_unit_vector",
    "Frame",
    "frame_from_pair",
    "automorphism_from_frame",
    "automorphism_inverse",
]

DIM = 8


class OctonionDomainError(ValueError):
    pass


class NoExactUnit(OctonionDomainError):
    pass


class InternalConsistencyError(AssertionError):
    pass


def _cd_mul(x: list, y: list) -> list:
    n = len(x)
    if n == 1:
        return [x[0] * y[0]]
    h = n // 2
    a, b, c, d = x[:h], x[h:], y[:h], y[h:]

    def conj(u):
        return [u[0]] + [-t for t in u[1:]]

    ac, db = _cd_mul(a, c), _cd_mul(conj(d), b)
    da, bc = _cd_mul(d, a), _cd_mul(b, conj(c))
    return [p - q for p, q in zip(ac, db)] + [p + q for p, q in zip(da, bc)]


def _build_table():
    table = []
    for i in range(DIM):
        row = []
        for j in range(DIM):
            x = [0] * DIM
            y = [0] * DIM
            x[i] = y[j] = 1
            prod = _cd_mul(x, y)
            (k,) = [k for k, v in enumerate(prod) if v]
            row.append((prod[k], k))
        table.append(tuple(row))
    return tuple(table)


# MUL_TABLE[i][j] = (sign, k) with e_{i+1} e_{j+1} = sign * e_{k+1}
MUL_TABLE = _build_table()


def _coerce(x):
    if isinstance(x, (float, np.floating)):
        return float(x)
    return as_fraction(x)


class Octonion:
    """An octonion given by its 8 coordinates over e1..e8."""

    __slots__ = ("coords",)

    def __init__(self, coords: Sequence):
        coords = tuple(_coerce(c) for c in coords)
        if len(coords) != DIM:
            raise OctonionDomainError(f"an octonion has 8 coordinates, got {len(coords)}")
        self.coords = coords

    @classmethod
    def basis(cls, i: int) -> "Octonion":
        """e_i, 1-based."""
        return cls([int(k == i - 1) for k in range(DIM)])

    @classmethod
    def zero(cls) -> "Octonion":
        return cls([0] * DIM)

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return DIM

    def __getitem__(self, i):
        return self.coords[i]

    def __eq__(self, other):
        if isinstance(other, Octonion):
            return self.coords == other.coords
        return NotImplemented

    def __hash__(self):
        return hash(self.coords)

    def __add__(self, other):
        return Octonion([a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other):
        return Octonion([a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self):
        return Octonion([-a for a in self.coords])

    def __mul__(self, other):
        if isinstance(other, Octonion):
            return oct_mul(self, other)
        return Octonion([a * other for a in self.coords])

    def __rmul__(self, c):
        return Octonion([c * a for a in self.coords])

    def __truediv__(self, c):
        return Octonion([a / c for a in self.coords])

    def conj(self) -> "Octonion":
        return oct_conj(self)

    def real(self):
        return self.coords[0]

    def imag(self) -> "Octonion":
        return Octonion((0,) + self.coords[1:])

    def to_float(self) -> "Octonion":
        return Octonion([float(c) for c in self.coords])

    def max_abs(self) -> float:
        return max(abs(float(c)) for c in self.coords)

    def to_json(self) -> list:
        if self.exact:
            return [format_fraction(c) for c in self.coords]
        return [float(c) for c in self.coords]

    def __repr__(self):
        terms = [f"{format_fraction(c) if isinstance(c, Fraction) else c}*e{k + 1}"
                 for k, c in enumerate(self.coords) if c]
        return "Octonion(" + (" + ".join(terms) or "0") + ")"


def _oct(x) -> Octonion:
    return x if isinstance(x, Octonion) else Octonion(x)


def oct_mul(x, y) -> Octonion:
    x, y = _oct(x), _oct(y)
    zero = 0.0 if not (x.exact and y.exact) else Fraction(0)
    out = [zero] * DIM
    for i, a in enumerate(x.coords):
        if not a:
            continue
        row = MUL_TABLE[i]
        for j, b in enumerate(y.coords):
            if b:
                s, k = row[j]
                out[k] += s * a * b
    return Octonion(out)


def oct_conj(x) -> Octonion:
    x = _oct(x)
    return Octonion((x.coords[0],) + tuple(-c for c in x.coords[1:]))


def form(x, y):
    """e1-coefficient of (x conj(y) + y conj(x)) / 2."""
    x, y = _oct(x), _oct(y)
    s = oct_mul(x, oct_conj(y)) + oct_mul(y, oct_conj(x))
    return s.coords[0] / 2


def norm(x):
    """N(x) = <x, x>."""
    x = _oct(x)
    return sum(c * c for c in x.coords)


def basis_octonion(i: int) -> Octonion:
    return Octonion.basis(i)


def ternary_bracket(x, y, z) -> Octonion:
    """[x, y, z] = (x conj(y)) z - <y,z> x + <x,z> y - <x,y> z."""
    x, y, z = _oct(x), _oct(y), _oct(z)
    head = oct_mul(oct_mul(x, oct_conj(y)), z)
    return head - form(y, z) * x + form(x, z) * y - form(x, y) * z


# -- identity sweeps -----------------------------------------------------------

def random_orthogonal(rng: random.Random, n: int, rotations: int = 0) -> Matrix:
    """Exact rational orthogonal matrix: a product of random rational plane rotations.

    Each rotation uses (cos, sin) = ((1 - t^2), 2t) / (1 + t^2) for a random
    rational t; ``rotations`` defaults to n.
    """
    q = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(rotations or n):
        i, j = rng.sample(range(n), 2)
        t = random_rational(rng)
        c, s = (1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)
        for row in q:
            row[i], row[j] = c * row[i] - s * row[j], s * row[i] + c * row[j]
    return Matrix.from_rows(q, n)


def random_unit_vector(rng: random.Random, n: int) -> tuple:
    """Exact rational point on the unit sphere S^(n-1) by inverse stereographic projection."""
    t = [random_rational(rng) for _ in range(n - 1)]
    s = sum(a * a for a in t)
    return ((1 - s) / (1 + s),) + tuple(2 * a / (1 + s) for a in t)


def _random_imaginary_triple(rng: random.Random):
    q = random_orthogonal(rng, 7)
    cols = rng.sample(range(7), 3)
    return tuple(Octonion((0,) + q.col(c)) for c in cols)


def _random_cayley_triple(rng: random.Random):
    """(u, v, w) orthonormal imaginary with w orthogonal to uv."""
    u, v, _ = _random_imaginary_triple(rng)
    frame = frame_from_pair(u, v, search_cap=1)
    c = random_unit_vector(rng, 4)
    w = Octonion.zero()
    for coef, f in zip(c, frame.elements[4:]):
        w = w + coef * f
    return u, v, w


def _ets_witness(i: int):
    """Indices (j, k, l, m, s, t) with e_i = e_j e_k = e_l e_m = e_s e_t and e_k e_m = e_t."""
    pairs = [(j, k) for j in range(2, 9) for k in range(2, 9)
             if j != k and MUL_TABLE[j - 1][k - 1] == (1, i - 1)]
    for (j, k), (l, m), (s, t) in itertools.permutations(pairs, 3):
        if len({frozenset((j, k)), frozenset((l, m)), frozenset((s, t))}) < 3:
            continue
        if MUL_TABLE[k - 1][m - 1] == (1, t - 1):
            return (j, k, l, m, s, t)
    return None


def check_octonion_identities(seed: int = 0, trials: int = 100) -> dict:
    """Sweep the basis-product, conjugation and Moufang identities.

    Basis triples are checked exhaustively; ``trials`` seeded random
    orthonormal triples are checked exactly on top of that.  The reduced
    Moufang form (uv)(wu) = vw is only asserted when u is orthogonal to vw,
    which is where it follows from the full Moufang identity; triples
    outside that hypothesis are counted, not flagged.
    """
    rng = random.Random(seed)
    one = Octonion.basis(1)

    ets = CheckReport("ets", 0)
    witnesses = {}
    for i in range(2, 9):
        ets.checked += 1
        ei = Octonion.basis(i)
        w = _ets_witness(i)
        if oct_mul(one, ei) != ei or w is None:
            ets.violations.append({"i": i})
        else:
            witnesses[i] = list(w)

    uvw = CheckReport("uvw", 0)
    mou = CheckReport("mou", 0)
    moufang = CheckReport("moufang", 0)
    skipped = 0

    def sweep(u, v, w, origin):
        nonlocal skipped
        uvw.checked += 1
        bad = []
        if oct_mul(oct_mul(oct_conj(u), v), oct_conj(u)) != -oct_conj(v):
            bad.append("conj(u) v conj(u) = -conj(v)")
        if oct_mul(oct_mul(u, oct_conj(v)), w) != -oct_mul(oct_mul(u, oct_conj(w)), v):
            bad.append("(u conj(v)) w = -(u conj(w)) v")
        if oct_mul(u, oct_mul(oct_conj(v), w)) != -oct_mul(v, oct_mul(oct_conj(u), w)):
            bad.append("u (conj(v) w) = -v (conj(u) w)")
        if bad:
            uvw.violations.append({"triple": origin, "failed": bad})
        uv_wu = oct_mul(oct_mul(u, v), oct_mul(w, u))
        moufang.checked += 1
        if uv_wu != oct_mul(u, oct_mul(oct_mul(v, w), u)):
            moufang.violations.append({"triple": origin})
        if form(u, oct_mul(v, w)) != 0:
            skipped += 1
            return
        mou.checked += 1
        if uv_wu != oct_mul(v, w):
            mou.violations.append({"triple": origin})

    for a, b, c in itertools.permutations(range(2, 9), 3):
        sweep(Octonion.basis(a), Octonion.basis(b), Octonion.basis(c), [a, b, c])
    for t in range(trials):
        sweep(*_random_imaginary_triple(rng), f"random-orthonormal-{t}")
        sweep(*_random_cayley_triple(rng), f"random-cayley-{t}")

    reports = [ets, uvw, mou, moufang]
    return {
        "ok": all(r.ok for r in reports),
        "seed": seed,
        "trials": trials,
        "ets_witnesses": witnesses,
        "mou_outside_hypothesis": skipped,
        "reports": [r.to_json() for r in reports],
    }


# -- frames and automorphisms --------------------------------------------------

def _close(a, b, tol) -> bool:
    return max(abs(float(p) - float(q)) for p, q in zip(a, b)) <= tol


@dataclass(frozen=True)
class Frame:
    """Orthonormal system (e1, x, y, xy, z, xz, yz, (xy)z)."""

    elements: tuple
    mode: str = "exact"
    tol: float = 1e-9

    def violations(self) -> list:
        bad = []
        one = Octonion.basis(1)
        exact = self.mode == "exact"
        for i, j in itertools.combinations_with_replacement(range(DIM), 2):
            f = form(self.elements[i], self.elements[j])
            want = 1 if i == j else 0
            if (f != want) if exact else abs(float(f) - want) > self.tol:
                bad.append(f"<f{i + 1}, f{j + 1}> = {f}")
        for i in range(1, DIM):
            sq = oct_mul(self.elements[i], self.elements[i])
            if (sq != -one) if exact else not _close(sq, -one, self.tol):
                bad.append(f"f{i + 1}^2 != -1")
        return bad

    def to_json(self) -> dict:
        return {"mode": self.mode, "tol": self.tol, "elements": [e.to_json() for e in self.elements]}


def _is_neg_one(sq: Octonion, exact: bool, tol: float) -> bool:
    target = -Octonion.basis(1)
    return sq == target if exact else _close(sq, target, tol)


def frame_from_pair(x, y, mode: str = "exact", tol: float = 1e-9, search_cap: int = 6,
                    fallback: bool = True) -> Frame:
    """Complete orthonormal imaginary units x, y to a full octonion frame.

    In exact mode the fourth generator z is the first small integer
    combination of a rational basis of {1, x, y, xy}^perp whose norm is a
    rational square, falling back to a four-squares construction unless
    ``fallback`` is off; in approximate mode it is any normalized perp vector.
    """
    if mode not in ("exact", "approx"):
        raise OctonionDomainError(f"unknown mode {mode!r}")
    exact = mode == "exact"
    x, y = _oct(x), _oct(y)
    if exact:
        if not (x.exact and y.exact):
            raise OctonionDomainError("exact mode needs exact coordinates")
    else:
        x, y = x.to_float(), y.to_float()
    if not _is_neg_one(oct_mul(x, x), exact, tol):
        raise OctonionDomainError("x^2 != -1")
    if not _is_neg_one(oct_mul(y, y), exact, tol):
        raise OctonionDomainError("y^2 != -1")
    fxy = form(x, y)
    if (fxy != 0) if exact else abs(fxy) > tol:
        raise OctonionDomainError("x and y are not orthogonal")
    one = Octonion.basis(1) if exact else Octonion.basis(1).to_float()
    xy = oct_mul(x, y)
    if exact:
        z = _exact_unit_perp([one, x, y, xy], search_cap, fallback)
    else:
        z = _approx_unit_perp([one, x, y, xy])
    elements = (one, x, y, xy, z, oct_mul(x, z), oct_mul(y, z), oct_mul(xy, z))
    frame = Frame(elements, mode, tol)
    bad = frame.violations()
    if bad:
        raise InternalConsistencyError(f"constructed frame is not orthonormal: {bad[:3]}")
    return frame


def _search_order(r: int, width: int):
    """Integer vectors with max-norm exactly r: sparsest first, then by
    support position, entries ordered 1, -1, 2, -2, ..."""
    values = [v for a in range(1, r + 1) for v in (a, -a)]
    for nnz in range(1, width + 1):
        for pos in itertools.combinations(range(width), nnz):
            for vals in itertools.product(values, repeat=nnz):
                if r in vals or -r in vals:
                    yield pos, vals


def _search_unit(perp, cap: int):
    gram = [[sum((a * b for a, b in zip(u, v)), Fraction(0)) for v in perp] for u in perp]
    den = reduce(math.lcm, (g.denominator for row in gram for g in row), 1)
    igram = [[int(g * den) for g in row] for row in gram]
    for r in range(1, cap + 1):
        for pos, vals in _search_order(r, len(perp)):
            # N = k / den is a rational square iff k * den is a perfect square
            k = 0
            for a, pa in zip(vals, pos):
                row = igram[pa]
                for b, pb in zip(vals, pos):
                    k += a * b * row[pb]
            k *= den
            if k > 0 and math.isqrt(k) ** 2 == k:
                z = [Fraction(0)] * DIM
                for a, pa in zip(vals, pos):
                    z = [t + a * c for t, c in zip(z, perp[pa])]
                root = rational_sqrt(sum(t * t for t in z))
                return Octonion([t / root for t in z])
    return None


def _exact_unit_perp(system, cap: int, fallback: bool = True) -> Octonion:
    """Rational unit vector orthogonal to the rational unit quaternion frame ``system``.

    First the bounded integer search over a rational perp basis; if that
    comes up empty, z = h w for a perp vector w and h in the quaternion span
    of ``system`` with |h|^2 = 1/N(w), written as four rational squares.
    """
    perp = Subspace.span([list(s) for s in system], DIM).complement().vectors
    z = _search_unit(perp, cap)
    if z is not None:
        return z
    if not fallback:
        raise NoExactUnit(
            f"no rational unit vector found with coefficients up to {cap}; "
            "use approx mode or the solve-based witness"
        )
    w = Octonion(perp[0])
    n = norm(w)
    p, q = n.numerator, n.denominator
    # 1/N = q/p = (a^2 + b^2 + c^2 + d^2) / p^2 with a..d from p*q
    parts = sum_of_four_squares(p * q)
    h = Octonion.zero()
    for c, f in zip(parts, system):
        h = h + Fraction(c, p) * f
    z = oct_mul(h, w)
    if norm(z) != 1:
        raise InternalConsistencyError("four-squares unit construction failed")
    return z


def _approx_unit_perp(system) -> Octonion:
    q = np.array([list(s) for s in system], dtype=float)
    best, best_norm = None, -1.0
    for k in range(DIM):
        v = np.zeros(DIM)
        v[k] = 1.0
        v = v - q.T @ (q @ v)
        n = float(np.linalg.norm(v))
        if n > best_norm + 1e-12:
            best, best_norm = v, n
    return Octonion(list(best / best_norm))


def automorphism_from_frame(frame: Frame, check: bool = True):
    """The map e_i -> frame.elements[i].

    Exact frames give a :class:`Matrix`; approximate frames a float ndarray.
    With ``check`` the product, the form and the ternary bracket are
    verified to be preserved on all basis pairs and increasing triples.
    """
    exact = frame.mode == "exact"
    images = frame.elements
    if check:
        _check_automorphism(images, exact, frame.tol)
    if exact:
        return Matrix.from_columns([list(e) for e in images], DIM)
    return np.array([list(e) for e in images], dtype=float).T


def _check_automorphism(images, exact: bool, tol: float):
    def same(a, b):
        return a == b if exact else _close(a, b, tol)

    def phi(v: Octonion) -> Octonion:
        out = Octonion.zero() if exact else Octonion.zero().to_float()
        for c, f in zip(v.coords, images):
            if c:
                out = out + c * f
        return out

    for i, j in itertools.product(range(DIM), repeat=2):
        if not same(phi(oct_mul(Octonion.basis(i + 1), Octonion.basis(j + 1))),
                    oct_mul(images[i], images[j])):
            raise InternalConsistencyError(f"product not preserved on (e{i + 1}, e{j + 1})")
    for i, j in itertools.combinations_with_replacement(range(DIM), 2):
        f = form(images[i], images[j])
        want = int(i == j)
        if (f != want) if exact else abs(float(f) - want) > tol:
            raise InternalConsistencyError(f"form not preserved on (e{i + 1}, e{j + 1})")
    for t in itertools.combinations(range(DIM), 3):
        lhs = phi(ternary_bracket(*(Octonion.basis(k + 1) for k in t)))
        rhs = ternary_bracket(*(images[k] for k in t))
        if not same(lhs, rhs):
            raise InternalConsistencyError(f"bracket not preserved on {[k + 1 for k in t]}")


def automorphism_inverse(phi):
    """Inverse of a frame automorphism; frames are orthonormal, so it is the transpose."""
    if isinstance(phi, Matrix):
        return phi.T
    return np.asarray(phi).T


