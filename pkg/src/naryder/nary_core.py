"""Anticommutative n-ary algebras over Q and their derivations.

Structure constants are stored on strictly increasing (1-based) index tuples
only; every other argument order is recovered from the permutation sign, so
antisymmetry holds by construction.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .exact_linalg import (
    ContractViolation,
    Matrix,
    Subspace,
    Vector,
    det,
    format_fraction,
    is_zero,
    nullspace,
    solve,
    unit_vector,
    vector,
    zero_vector,
)

__all__ = [
    "NaryAlgebra",
    "CheckReport",
    "DerivationSpace",
    "ProbeVector",
    "WitnessTrace",
    "LocalVerdict",
    "GlobalVerdict",
    "sort_with_sign",
    "bracket",
    "basis_bracket",
    "raw_table_evaluator",
    "check_anticommutativity",
    "check_filippov",
    "leibniz_system",
    "derivation_space",
    "is_derivation",
    "orbit_subspace",
    "multi_point_witness",
    "default_probes",
    "locder_upper_bound",
    "is_local_derivation",
    "global_witness_verdict",
    "direct_sum",
    "antisymmetric_space",
]


def sort_with_sign(idx: Sequence[int]):
    """Sort ``idx`` and return ``(sign, sorted_tuple)``; sign is 0 on repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, tuple(sorted(idx))
    sign = 1
    # insertion sort counting transpositions; tuples are short
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


@dataclass(frozen=True, eq=False)
class NaryAlgebra:
    """Finite-dimensional anticommutative n-ary algebra.

    ``sc`` maps strictly increasing 1-based index tuples to coefficient
    vectors of length ``dim``; absent tuples are zero products.
    """

    arity: int
    dim: int
    sc: Mapping
    name: str = ""
    _key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.arity < 2:
            raise ContractViolation(f"arity must be at least 2, got {self.arity}")
        if self.dim < 1:
            raise ContractViolation(f"dimension must be positive, got {self.dim}")
        table = {}
        for idx, val in dict(self.sc).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.arity:
                raise ContractViolation(f"tuple {idx} does not have {self.arity} entries")
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ContractViolation(f"tuple {idx} is not strictly increasing")
            if idx[0] < 1 or idx[-1] > self.dim:
                raise ContractViolation(f"tuple {idx} out of range 1..{self.dim}")
            val = vector(val)
            if len(val) != self.dim:
                raise ContractViolation(f"value for {idx} has length {len(val)}, expected {self.dim}")
            if not is_zero(val):
                table[idx] = val
        object.__setattr__(self, "sc", MappingProxyType(table))
        object.__setattr__(self, "_key", (self.arity, self.dim, frozenset(table.items())))

    def __eq__(self, other):
        if not isinstance(other, NaryAlgebra):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        label = self.name or "NaryAlgebra"
        return f"<{label}: arity={self.arity}, dim={self.dim}, {len(self.sc)} nonzero products>"

    def basis(self, i: int) -> Vector:
        """e_i, 1-based."""
        return unit_vector(i - 1, self.dim)


def basis_bracket(A: NaryAlgebra, idx: Sequence[int]) -> Vector:
    """[e_{i1}, ..., e_{in}] for arbitrary (1-based) index order."""
    if len(idx) != A.arity:
        raise ContractViolation(f"{len(idx)} arguments for an {A.arity}-ary bracket")
    sign, key = sort_with_sign(idx)
    if sign == 0:
        return zero_vector(A.dim)
    val = A.sc.get(key)
    if val is None:
        return zero_vector(A.dim)
    return val if sign == 1 else tuple(-a for a in val)


def bracket(A: NaryAlgebra, args: Sequence) -> Vector:
    """Multilinear, fully antisymmetric extension of the structure constants."""
    if len(args) != A.arity:
        raise ContractViolation(f"{len(args)} arguments for an {A.arity}-ary bracket")
    args = [vector(a) for a in args]
    for a in args:
        if len(a) != A.dim:
            raise ContractViolation(f"argument of length {len(a)} in a {A.dim}-dimensional algebra")
    supports = [[(j + 1, x) for j, x in enumerate(a) if x] for a in args]
    terms = 1
    for s in supports:
        terms *= len(s)
    if terms == 0:
        return zero_vector(A.dim)
    out = [Fraction(0)] * A.dim
    if terms <= max(64, len(A.sc) * A.arity ** 3):
        for combo in itertools.product(*supports):
            sign, key = sort_with_sign([i for i, _ in combo])
            if sign == 0:
                continue
            val = A.sc.get(key)
            if val is None:
                continue
            coef = Fraction(sign)
            for _, x in combo:
                coef *= x
            for k, v in enumerate(val):
                if v:
                    out[k] += coef * v
    else:
        # [v_1..v_n] = sum over stored t of det(V[:, t]) * sc[t]
        for key, val in A.sc.items():
            minor = Matrix.from_rows([[a[i - 1] for i in key] for a in args])
            coef = det(minor)
            if coef:
                for k, v in enumerate(val):
                    if v:
                        out[k] += coef * v
    return tuple(out)


# -- reports -----------------------------------------------------------------

@dataclass
class CheckReport:
    """Outcome of an exhaustive identity or property check."""

    name: str
    checked: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "checked": self.checked,
            "ok": self.ok,
            "violation_count": len(self.violations),
            "violations": self.violations,
        }


def _vec_json(v) -> list:
    return [format_fraction(x) for x in v]


def raw_table_evaluator(A: NaryAlgebra, overrides: Mapping) -> Callable:
    """Evaluator on basis index tuples that prefers explicit ``overrides``.

    Lets a hand-written (possibly inconsistent) table be fed to
    :func:`check_anticommutativity`.
    """
    table = {tuple(k): vector(v) for k, v in overrides.items()}

    def evaluate(idx):
        idx = tuple(idx)
        if idx in table:
            return table[idx]
        return basis_bracket(A, idx)

    return evaluate


def check_anticommutativity(A: NaryAlgebra, evaluate: Optional[Callable] = None) -> CheckReport:
    """Check [.., e_i, .., e_j, ..] = -[.., e_j, .., e_i, ..] on all increasing tuples.

    ``evaluate`` maps a 1-based index tuple to a vector; it defaults to the
    algebra's own evaluation path.
    """
    evaluate = evaluate or (lambda idx: basis_bracket(A, idx))
    report = CheckReport("anticommutativity", 0)
    n = A.arity
    for t in itertools.combinations(range(1, A.dim + 1), n):
        base = vector(evaluate(t))
        for i, j in itertools.combinations(range(n), 2):
            s = list(t)
            s[i], s[j] = s[j], s[i]
            swapped = vector(evaluate(tuple(s)))
            report.checked += 1
            if any(a != -b for a, b in zip(base, swapped)):
                report.violations.append({
                    "args": list(t),
                    "transposition": [i + 1, j + 1],
                    "value": _vec_json(base),
                    "swapped_value": _vec_json(swapped),
                })
    # repeated arguments must vanish
    for t in itertools.combinations(range(1, A.dim + 1), n - 1):
        for r in t:
            idx = (r,) + t
            report.checked += 1
            val = vector(evaluate(idx))
            if not is_zero(val):
                report.violations.append({"args": list(idx), "repeated": r, "value": _vec_json(val)})
    return report


def _bracket_one_general(A: NaryAlgebra, idx: Sequence[int], slot: int, v) -> Vector:
    """[e_{idx}] with slot ``slot`` replaced by the vector ``v``."""
    out = [Fraction(0)] * A.dim
    idx = list(idx)
    for j, x in enumerate(v):
        if not x:
            continue
        idx[slot] = j + 1
        val = basis_bracket(A, idx)
        for k, w in enumerate(val):
            if w:
                out[k] += x * w
    return tuple(out)


def check_filippov(A: NaryAlgebra) -> CheckReport:
    """Fundamental identity on all increasing basis choices of x and y."""
    n, d = A.arity, A.dim
    report = CheckReport("filippov", 0)
    for a in itertools.combinations(range(1, d + 1), n):
        inner = basis_bracket(A, a)
        for b in itertools.combinations(range(1, d + 1), n - 1):
            report.checked += 1
            lhs = _bracket_one_general(A, (0,) + b, 0, inner)
            rhs = [Fraction(0)] * d
            for i in range(n):
                xi = basis_bracket(A, (a[i],) + b)
                if is_zero(xi):
                    continue
                term = _bracket_one_general(A, a, i, xi)
                rhs = [p + q for p, q in zip(rhs, term)]
            if list(lhs) != rhs:
                report.violations.append({
                    "x": list(a), "y": list(b), "lhs": _vec_json(lhs), "rhs": _vec_json(rhs),
                })
    return report


# -- derivations -------------------------------------------------------------

def leibniz_system(A: NaryAlgebra) -> Matrix:
    """Coefficient matrix of D[e_a] - sum_k [.., D e_ak, ..] = 0 over increasing a.

    Unknowns are the d*d entries of D, flattened row-major (index i*d + j
    holds D_ij).
    """
    d, n = A.dim, A.arity
    rows = []
    for a in itertools.combinations(range(1, d + 1), n):
        w = basis_bracket(A, a)
        eqs = [dict() for _ in range(d)]
        # D applied to the bracket value: component i picks up D_ij * w_j
        for j, wj in enumerate(w):
            if wj:
                for i in range(d):
                    eqs[i][i * d + j] = eqs[i].get(i * d + j, 0) + wj
        for k in range(n):
            col = a[k] - 1
            idx = list(a)
            for j in range(d):
                # D e_{a_k} has coefficient D_{j, a_k} on e_j
                idx[k] = j + 1
                val = basis_bracket(A, idx)
                for i, vi in enumerate(val):
                    if vi:
                        key = j * d + col
                        eqs[i][key] = eqs[i].get(key, 0) - vi
        for e in eqs:
            e = {k: c for k, c in e.items() if c}
            if e:
                row = [Fraction(0)] * (d * d)
                for k, c in e.items():
                    row[k] = Fraction(c)
                rows.append(row)
    if not rows:
        return Matrix(0, d * d, ())
    return Matrix.from_rows(rows, d * d)


@dataclass(frozen=True)
class DerivationSpace:
    algebra: NaryAlgebra
    space: Subspace
    basis_maps: tuple

    @property
    def dim(self) -> int:
        return self.space.dim

    def combine(self, coefficients) -> Matrix:
        d = self.algebra.dim
        coefficients = vector(coefficients)
        if len(coefficients) != len(self.basis_maps):
            raise ContractViolation("coefficient count does not match the derivation basis")
        flat = [Fraction(0)] * (d * d)
        for c, B in zip(coefficients, self.basis_maps):
            if c:
                for k, x in enumerate(B.entries):
                    if x:
                        flat[k] += c * x
        return Matrix(d, d, tuple(flat))

    def contains(self, L: Matrix) -> bool:
        return self.space.contains(L.entries)

    @cached_property
    def _action(self) -> tuple:
        # nonzero (i, j, coef) of every basis map; they are very sparse in practice
        d = self.algebra.dim
        return tuple(
            tuple((k // d, k % d, x) for k, x in enumerate(B.entries) if x)
            for B in self.basis_maps
        )

    def images(self, x) -> list:
        """Rows of the d x dim matrix whose column k is B_k(x)."""
        d = self.algebra.dim
        rows = [[Fraction(0)] * len(self.basis_maps) for _ in range(d)]
        for k, entries in enumerate(self._action):
            for i, j, c in entries:
                if x[j]:
                    rows[i][k] += c * x[j]
        return rows


@lru_cache(maxsize=32)
def derivation_space(A: NaryAlgebra) -> DerivationSpace:
    """Exact kernel of the Leibniz system of ``A``."""
    d = A.dim
    space = nullspace(leibniz_system(A))
    maps = tuple(Matrix(d, d, v) for v in space.vectors)
    return DerivationSpace(A, space, maps)


def is_derivation(A: NaryAlgebra, L: Matrix) -> CheckReport:
    """Leibniz rule on every increasing basis tuple; falsy report when it fails."""
    d = A.dim
    if L.shape != (d, d):
        raise ContractViolation(f"expected a {d}x{d} map, got {L.shape}")
    report = CheckReport("derivation", 0)
    cols = [L.col(j) for j in range(d)]
    for a in itertools.combinations(range(1, d + 1), A.arity):
        report.checked += 1
        lhs = L.apply(basis_bracket(A, a))
        rhs = [Fraction(0)] * d
        for k in range(A.arity):
            term = _bracket_one_general(A, a, k, cols[a[k] - 1])
            rhs = [p + q for p, q in zip(rhs, term)]
        if list(lhs) != rhs:
            report.violations.append({"args": list(a), "lhs": _vec_json(lhs), "rhs": _vec_json(rhs)})
    return report


def orbit_subspace(der: DerivationSpace, x) -> Subspace:
    """span{B(x) : B in the derivation basis}."""
    x = vector(x)
    return Subspace.span([B.apply(x) for B in der.basis_maps], der.algebra.dim)


@dataclass(frozen=True)
class WitnessTrace:
    """A derivation certified to hit prescribed values at prescribed points."""

    constraints: tuple
    coefficients: Vector
    witness: Matrix

    def replay(self, der: Optional[DerivationSpace] = None) -> bool:
        if der is not None and der.combine(self.coefficients) != self.witness:
            return False
        return all(self.witness.apply(x) == tuple(y) for x, y in self.constraints)

    def to_json(self) -> dict:
        return {
            "constraints": [{"point": _vec_json(x), "target": _vec_json(y)} for x, y in self.constraints],
            "coefficients": _vec_json(self.coefficients),
            "witness": self.witness.to_json(),
        }


def multi_point_witness(der: DerivationSpace, constraints: Iterable) -> Optional[WitnessTrace]:
    """A derivation D with D(x_i) = y_i for every constraint, or None."""
    d = der.algebra.dim
    constraints = tuple((vector(x), vector(y)) for x, y in constraints)
    for x, y in constraints:
        if len(x) != d or len(y) != d:
            raise ContractViolation(f"constraint vectors must have length {d}")
    k = len(der.basis_maps)
    if k == 0:
        ok = all(is_zero(y) for _, y in constraints)
        return WitnessTrace(constraints, (), Matrix.zeros(d)) if ok else None
    rows, rhs = [], []
    for x, y in constraints:
        rows += der.images(x)
        rhs += y
    if not rows:
        coeffs = zero_vector(k)
    else:
        coeffs = solve(Matrix.from_rows(rows, k), rhs)
        if coeffs is None:
            return None
    trace = WitnessTrace(constraints, coeffs, der.combine(coeffs))
    assert trace.replay(), "witness failed its own replay"
    return trace


# -- local derivations -------------------------------------------------------

@dataclass(frozen=True)
class ProbeVector:
    """0/1 vector with ones on ``support`` (0-based indices)."""

    support: frozenset
    dim: int

    @property
    def vector(self) -> Vector:
        return tuple(Fraction(int(i in self.support)) for i in range(self.dim))

    @property
    def label(self) -> str:
        return "+".join(f"Xi_{i + 1}" for i in sorted(self.support)) or "0"

    def to_json(self) -> dict:
        return {"probe": self.label, "support": [i + 1 for i in sorted(self.support)],
                "vector": _vec_json(self.vector)}


def default_probes(d: int) -> list:
    """All Xi_k, then all Xi_k + Xi_l (k < l), in lexicographic order."""
    probes = [ProbeVector(frozenset([k]), d) for k in range(d)]
    probes += [ProbeVector(frozenset([k, l]), d) for k, l in itertools.combinations(range(d), 2)]
    return probes


def _probe_vec(p) -> Vector:
    return p.vector if isinstance(p, ProbeVector) else vector(p)


def locder_upper_bound(A: NaryAlgebra, probes: Optional[Sequence] = None,
                       der: Optional[DerivationSpace] = None) -> Subspace:
    """Matrices B (flattened row-major) with B(p) in Der(A).p for every probe p.

    Every local derivation lies in this space.
    """
    d = A.dim
    if probes is None:
        probes = default_probes(d)
    probes = list(probes)
    if not probes:
        raise ContractViolation("at least one probe is required")
    der = der or derivation_space(A)
    rows = []
    for p in probes:
        p = _probe_vec(p)
        if len(p) != d:
            raise ContractViolation(f"probe of length {len(p)} in a {d}-dimensional algebra")
        for w in orbit_subspace(der, p).complement().vectors:
            # w . (B p) = sum_ij w_i B_ij p_j
            rows.append([w[i] * p[j] for i in range(d) for j in range(d)])
    if not rows:
        return Subspace.full(d * d)
    return nullspace(Matrix.from_rows(rows, d * d))


def antisymmetric_space(d: int) -> Subspace:
    """so(d) as a subspace of flattened d x d matrices."""
    vecs = []
    for i, j in itertools.combinations(range(d), 2):
        m = [Fraction(0)] * (d * d)
        m[i * d + j] = Fraction(1)
        m[j * d + i] = Fraction(-1)
        vecs.append(m)
    return Subspace.span(vecs, d * d)


@dataclass
class LocalVerdict:
    status: str  # "PASS-ON-SAMPLES" or "FAIL"
    point: Optional[Vector] = None
    probe: Optional[ProbeVector] = None
    checked: int = 0

    @property
    def passed(self) -> bool:
        return self.status == "PASS-ON-SAMPLES"

    def to_json(self) -> dict:
        out = {"status": self.status, "checked": self.checked}
        if self.point is not None:
            out["point"] = _vec_json(self.point)
        if self.probe is not None:
            out["probe"] = self.probe.label
        return out


def is_local_derivation(A: NaryAlgebra, B: Matrix, samples: Iterable = (),
                        der: Optional[DerivationSpace] = None,
                        with_probes: bool = True) -> LocalVerdict:
    """Semi-decision: FAIL with a certificate point, else PASS-ON-SAMPLES."""
    der = der or derivation_space(A)
    points = list(default_probes(A.dim)) if with_probes else []
    points += [vector(s) for s in samples]
    checked = 0
    for p in points:
        x = _probe_vec(p)
        checked += 1
        if multi_point_witness(der, [(x, B.apply(x))]) is None:
            probe = p if isinstance(p, ProbeVector) else None
            return LocalVerdict("FAIL", x, probe, checked)
    return LocalVerdict("PASS-ON-SAMPLES", checked=checked)


@dataclass
class GlobalVerdict:
    status: str  # "PASS", "FAIL-PAIRWISE" or "FAIL-GLOBAL"
    pair: Optional[tuple] = None
    trace: Optional[WitnessTrace] = None

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.pair is not None:
            out["pair"] = [i + 1 for i in self.pair]
        if self.trace is not None:
            out["trace"] = self.trace.to_json()
        return out


def global_witness_verdict(der: DerivationSpace, table: Sequence) -> GlobalVerdict:
    """Pairwise interpolation, then one global witness for a sampled map."""
    table = [(vector(x), vector(y)) for x, y in table]
    if not table:
        raise ContractViolation("sampled table must be nonempty")
    for i, j in itertools.combinations_with_replacement(range(len(table)), 2):
        if multi_point_witness(der, [table[i], table[j]]) is None:
            return GlobalVerdict("FAIL-PAIRWISE", pair=(i, j))
    trace = multi_point_witness(der, table)
    if trace is None:
        return GlobalVerdict("FAIL-GLOBAL")
    return GlobalVerdict("PASS", trace=trace)


def direct_sum(A1: NaryAlgebra, A2: NaryAlgebra) -> NaryAlgebra:
    """Block algebra on A1 + A2; mixed brackets vanish."""
    if A1.arity != A2.arity:
        raise ContractViolation(f"arity mismatch: {A1.arity} != {A2.arity}")
    d1, d2 = A1.dim, A2.dim
    zeros1, zeros2 = zero_vector(d1), zero_vector(d2)
    sc = {idx: tuple(val) + zeros2 for idx, val in A1.sc.items()}
    sc.update({tuple(i + d1 for i in idx): zeros1 + tuple(val) for idx, val in A2.sc.items()})
    name = f"{A1.name or 'A'}+{A2.name or 'B'}"
    return NaryAlgebra(A1.arity, d1 + d2, sc, name=name)

