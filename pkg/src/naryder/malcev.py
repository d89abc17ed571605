"""The ternary Malcev algebra M8 on the octonions.

Covers the algebra itself, its 21-dimensional derivation algebra in the
alpha/gamma parametrization, frame automorphisms, the constructive witness
for local derivations and the 2-local exploration harness.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .exact_linalg import (
    Matrix,
    Subspace,
    as_fraction,
    dot,
    format_fraction,
    is_zero,
    rational_sqrt,
    unit_vector,
    vector,
    vscale,
)
from .nary_core import (
    DerivationSpace,
    NaryAlgebra,
    derivation_space,
    is_derivation,
    leibniz_system,
    multi_point_witness,
)
from .octonion import (
    DIM,
    Frame,
    InternalConsistencyError,
    Octonion,
    OctonionDomainError,
    automorphism_from_frame,
    automorphism_inverse,
    frame_from_pair,
    ternary_bracket,
)
from .sampling import random_antisymmetric, random_vector, rng_for

__all__ = [
    "M8_BASIS_TERMS",
    "GAMMA_RELATIONS",
    "NotRationalSquare",
    "M8ParamError",
    "build_m8",
    "m8_derivations",
    "m8_basis_matrices",
    "m8_basis_check",
    "M8DerivationParams",
    "params_roundtrip",
    "params_to_matrix",
    "base_derivation",
    "WitnessDecomposition",
    "LocalWitnessTrace",
    "constructive_local_witness",
    "explore_2local",
]


class NotRationalSquare(OctonionDomainError):
    pass


class M8ParamError(ValueError):
    pass


# Delta_ij + sign * Delta_kl, Delta_ij = e_ij - e_ji, as listed for Der(M8)
M8_BASIS_TERMS = (
    ((2, 3), -1, (1, 4)), ((2, 4), 1, (1, 3)), ((2, 5), -1, (1, 6)), ((2, 6), 1, (1, 5)),
    ((2, 7), 1, (1, 8)), ((2, 8), -1, (1, 7)), ((3, 4), -1, (1, 2)), ((3, 5), -1, (1, 7)),
    ((3, 6), -1, (1, 8)), ((3, 7), 1, (1, 5)), ((3, 8), 1, (1, 6)), ((4, 5), -1, (1, 8)),
    ((4, 6), 1, (1, 7)), ((4, 7), -1, (1, 6)), ((4, 8), 1, (1, 5)), ((5, 6), -1, (1, 2)),
    ((5, 7), -1, (1, 3)), ((5, 8), -1, (1, 4)), ((6, 7), 1, (1, 4)), ((6, 8), -1, (1, 3)),
    ((7, 8), 1, (1, 2)),
)

# gamma_k = sum coef * alpha_j, keyed by k (1-based) -> {j: coef}
GAMMA_RELATIONS = {
    1: {7: -1, 16: -1, 21: 1},
    2: {2: 1, 17: -1, 20: -1},
    3: {1: -1, 18: -1, 19: 1},
    4: {4: 1, 10: 1, 15: 1},
    5: {3: -1, 11: 1, 14: -1},
    6: {6: -1, 8: -1, 13: 1},
    7: {5: 1, 9: -1, 12: -1},
}

# alpha_1..alpha_21 sit below the diagonal column by column, from column 2 on
ALPHA_POSITIONS = tuple((r, c) for c in range(1, 7) for r in range(c + 1, DIM))
GAMMA_POSITIONS = tuple((r, 0) for r in range(1, DIM))


def _delta(i: int, j: int) -> Matrix:
    return Matrix.unit(i - 1, j - 1, DIM) - Matrix.unit(j - 1, i - 1, DIM)


@lru_cache(maxsize=1)
def build_m8() -> NaryAlgebra:
    sc = {}
    for t in itertools.combinations(range(1, DIM + 1), 3):
        val = ternary_bracket(*(Octonion.basis(k) for k in t))
        if any(c not in (-1, 0, 1) for c in val.coords):
            raise InternalConsistencyError(f"non-unit structure constant on {t}: {val}")
        sc[t] = val.coords
    return NaryAlgebra(3, DIM, sc, name="M8")


def m8_derivations() -> DerivationSpace:
    return derivation_space(build_m8())


def m8_basis_matrices() -> list:
    return [_delta(*a) + s * _delta(*b) for a, s, b in M8_BASIS_TERMS]


def _term_label(term) -> str:
    (i, j), s, (k, l) = term
    return f"D{i}{j} {'+' if s > 0 else '-'} D{k}{l}"


def m8_basis_check() -> dict:
    A = build_m8()
    der = m8_derivations()
    mats = m8_basis_matrices()
    failing = [_term_label(t) for t, M in zip(M8_BASIS_TERMS, mats) if not is_derivation(A, M)]
    span = Subspace.span([M.entries for M in mats], DIM * DIM)
    gamma_bad = []
    for M in der.basis_maps:
        try:
            params_roundtrip(M)
        except M8ParamError as exc:
            gamma_bad.append(str(exc))
    return {
        "listed": len(mats),
        "all_derivations": not failing,
        "failing": failing,
        "independent": span.dim == len(mats),
        "span_equals_der": span == der.space,
        "der_dim": der.dim,
        "gamma_relations_hold": not gamma_bad,
        "ok": not failing and span.dim == len(mats) and span == der.space and not gamma_bad,
    }


# -- alpha / gamma parametrization ---------------------------------------------

def _gammas_from_alpha(alpha) -> tuple:
    return tuple(
        sum((c * alpha[j - 1] for j, c in GAMMA_RELATIONS[k].items()), Fraction(0))
        for k in range(1, 8)
    )


@dataclass(frozen=True)
class M8DerivationParams:
    alpha: tuple
    gamma: tuple

    def __post_init__(self):
        object.__setattr__(self, "alpha", vector(self.alpha))
        object.__setattr__(self, "gamma", vector(self.gamma))
        if len(self.alpha) != 21 or len(self.gamma) != 7:
            raise M8ParamError("expected 21 alphas and 7 gammas")

    @classmethod
    def from_alpha(cls, alpha) -> "M8DerivationParams":
        alpha = vector(alpha)
        return cls(alpha, _gammas_from_alpha(alpha))

    @classmethod
    def from_json(cls, data) -> "M8DerivationParams":
        if not isinstance(data, dict) or set(data) - {"alpha", "gamma"} or "alpha" not in data:
            raise M8ParamError('params JSON must be {"alpha": [...], "gamma": [...]}')
        try:
            alpha = vector(data["alpha"])
            if "gamma" in data:
                return cls(alpha, vector(data["gamma"]))
            return cls.from_alpha(alpha)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, M8ParamError):
                raise
            raise M8ParamError(f"bad scalar in params: {exc}") from exc

    def to_json(self) -> dict:
        return {"alpha": [format_fraction(a) for a in self.alpha],
                "gamma": [format_fraction(g) for g in self.gamma]}


def _raw_params_matrix(alpha, gamma) -> Matrix:
    e = [[Fraction(0)] * DIM for _ in range(DIM)]
    for a, (r, c) in zip(alpha, ALPHA_POSITIONS):
        e[r][c], e[c][r] = a, -a
    for g, (r, c) in zip(gamma, GAMMA_POSITIONS):
        e[r][c], e[c][r] = g, -g
    return Matrix.from_rows(e, DIM)


def params_roundtrip(M: Matrix) -> M8DerivationParams:
    """Read alpha and gamma off a derivation matrix and check the relations."""
    if M.shape != (DIM, DIM):
        raise M8ParamError(f"expected an 8x8 matrix, got {M.shape}")
    for i, j in itertools.combinations_with_replacement(range(DIM), 2):
        if M[i, j] != -M[j, i]:
            raise M8ParamError(f"not antisymmetric at entry ({i + 1},{j + 1})")
    alpha = tuple(M[r, c] for r, c in ALPHA_POSITIONS)
    gamma = tuple(M[r, c] for r, c in GAMMA_POSITIONS)
    expected = _gammas_from_alpha(alpha)
    for k, (g, want) in enumerate(zip(gamma, expected), start=1):
        if g != want:
            raise M8ParamError(
                f"gamma_{k} relation violated: entry ({k + 1},1) is {format_fraction(g)}, "
                f"relation gives {format_fraction(want)}"
            )
    params = M8DerivationParams(alpha, gamma)
    if _raw_params_matrix(alpha, gamma) != M:
        raise InternalConsistencyError("reconstruction differs from the input matrix")
    if not is_derivation(build_m8(), M):
        raise InternalConsistencyError("gamma relations hold but the map is not a derivation")
    return params


def params_to_matrix(p) -> Matrix:
    """Derivation matrix for ``p`` (params, or a bare sequence of 21 alphas)."""
    if not isinstance(p, M8DerivationParams):
        p = M8DerivationParams.from_alpha(p)
    expected = _gammas_from_alpha(p.alpha)
    for k, (g, want) in enumerate(zip(p.gamma, expected), start=1):
        if g != want:
            raise M8ParamError(f"gamma_{k} relation violated")
    M = _raw_params_matrix(p.alpha, p.gamma)
    if not is_derivation(build_m8(), M):
        raise InternalConsistencyError("parametrized matrix is not a derivation")
    return M


@lru_cache(maxsize=1)
def base_derivation() -> Matrix:
    """A derivation with D(e1) = 0 and D(e2) = e3 (alpha_1 = alpha_19 = 1).

    Checked against the constrained solve over Der(M8) on first use.
    """
    alpha = [0] * 21
    alpha[0] = alpha[18] = 1
    D = params_to_matrix(alpha)
    e1, e2, e3 = (unit_vector(k, DIM) for k in range(3))
    trace = multi_point_witness(m8_derivations(), [(e1, vector([0] * DIM)), (e2, e3)])
    if trace is None or D.apply(e1) != vector([0] * DIM) or D.apply(e2) != e3:
        raise InternalConsistencyError("base derivation does not satisfy D(e1)=0, D(e2)=e3")
    return D


# -- constructive local-derivation witness --------------------------------------

@dataclass
class WitnessDecomposition:
    """x = lambda0 e1 + lambda x1 and rest(x) = mu y1 with x1, y1 unit imaginary."""

    lambda0: object
    lam: object
    x1: Octonion
    y1: Octonion
    mu: object

    def to_json(self) -> dict:
        def s(v):
            return format_fraction(v) if isinstance(v, Fraction) else float(v)
        return {"lambda0": s(self.lambda0), "lambda": s(self.lam), "mu": s(self.mu),
                "x1": self.x1.to_json(), "y1": self.y1.to_json()}


@dataclass
class LocalWitnessTrace:
    point: tuple
    target: tuple
    witness: object  # Matrix in exact mode, ndarray in approx mode
    d_e1: object
    case: str  # "zero-point", "trivial" or "frame"
    mode: str
    tol: float
    decomposition: Optional[WitnessDecomposition] = None
    frame: Optional[Frame] = None
    residual: float = 0.0
    leibniz_residual: float = 0.0

    def to_json(self) -> dict:
        def mat(m):
            return m.to_json() if isinstance(m, Matrix) else np.asarray(m).tolist()

        def vec(v):
            return [format_fraction(a) if isinstance(a, Fraction) else float(a) for a in v]
        out = {
            "mode": self.mode, "tol": self.tol, "case": self.case,
            "point": vec(self.point), "target": vec(self.target),
            "witness": mat(self.witness), "d_e1": mat(self.d_e1),
            "residual": self.residual, "leibniz_residual": self.leibniz_residual,
        }
        if self.decomposition is not None:
            out["decomposition"] = self.decomposition.to_json()
        if self.frame is not None:
            out["frame"] = self.frame.to_json()
        return out


@lru_cache(maxsize=1)
def _float_leibniz() -> np.ndarray:
    L = leibniz_system(build_m8())
    return np.array([[float(x) for x in L.row(i)] for i in range(L.rows)])


@lru_cache(maxsize=1)
def _float_der_basis() -> np.ndarray:
    # shape (21, 8, 8)
    return np.array([[[float(x) for x in B.row(i)] for i in range(DIM)]
                     for B in m8_derivations().basis_maps])


def _check_antisymmetric(nabla, exact: bool, tol: float):
    if exact:
        if not nabla.is_antisymmetric():
            raise OctonionDomainError("nabla must be antisymmetric")
    elif np.max(np.abs(nabla + nabla.T)) > tol:
        raise OctonionDomainError("nabla must be antisymmetric")


def constructive_local_witness(nabla, x, mode: str = "exact", tol: float = 1e-9,
                               search_cap: int = 6):
    """Derivation D_x with D_x(x) = nabla(x), built through a frame automorphism.

    First subtract a derivation matching ``nabla`` at e1; what remains sends
    x to mu*y1 with y1 orthogonal to e1 and x1, and the base derivation
    transported by the automorphism e2 -> x1, e3 -> y1 covers it.
    Returns ``(D_x, trace)``.
    """
    if mode == "exact":
        return _exact_witness(nabla, x, search_cap)
    if mode == "approx":
        return _approx_witness(nabla, x, tol)
    raise OctonionDomainError(f"unknown mode {mode!r}")


def _exact_witness(nabla, x, search_cap):
    if isinstance(nabla, np.ndarray) or not isinstance(nabla, Matrix):
        nabla = Matrix.from_rows([[as_fraction(a) for a in r] for r in nabla], DIM)
    if nabla.shape != (DIM, DIM):
        raise OctonionDomainError("nabla must be 8x8")
    _check_antisymmetric(nabla, True, 0)
    x = vector(x)
    target = nabla.apply(x)
    zero = Matrix.zeros(DIM)
    if is_zero(x):
        return zero, LocalWitnessTrace(x, target, zero, zero, "zero-point", "exact", 0.0)
    e1 = unit_vector(0, DIM)
    first = multi_point_witness(m8_derivations(), [(e1, nabla.apply(e1))])
    if first is None:
        raise InternalConsistencyError("no derivation matches nabla at e1")
    d_e1 = first.witness
    rest = nabla - d_e1
    y = rest.apply(x)
    x_im = (Fraction(0),) + x[1:]
    decomposition = frame = None
    if is_zero(x_im) or is_zero(y):
        D_x, case = d_e1, "trivial"
    else:
        lam = rational_sqrt(dot(x_im, x_im))
        mu = rational_sqrt(dot(y, y))
        if lam is None or mu is None:
            which = "imaginary part of x" if lam is None else "reduced image"
            raise NotRationalSquare(
                f"norm of the {which} is not a rational square; use approx mode "
                "or multi_point_witness"
            )
        x1 = Octonion(vscale(1 / lam, x_im))
        y1 = Octonion(vscale(1 / mu, y))
        decomposition = WitnessDecomposition(x[0], lam, x1, y1, mu)
        frame = frame_from_pair(x1, y1, "exact", search_cap=search_cap)
        phi = automorphism_from_frame(frame)
        moved = phi @ base_derivation() @ automorphism_inverse(phi)
        D_x, case = d_e1 + (mu / lam) * moved, "frame"
    if not is_derivation(build_m8(), D_x):
        raise InternalConsistencyError("constructed witness is not a derivation")
    if D_x.apply(x) != target:
        raise InternalConsistencyError("constructed witness misses nabla(x)")
    trace = LocalWitnessTrace(x, target, D_x, d_e1, case, "exact", 0.0, decomposition, frame)
    return D_x, trace


def _approx_witness(nabla, x, tol):
    if isinstance(nabla, Matrix):
        nabla = np.array([[float(a) for a in r] for r in nabla.to_rows()])
    nabla = np.asarray(nabla, dtype=float)
    if nabla.shape != (DIM, DIM):
        raise OctonionDomainError("nabla must be 8x8")
    _check_antisymmetric(nabla, False, tol)
    x = np.array([float(a) for a in x])
    target = nabla @ x
    basis = _float_der_basis()
    if np.max(np.abs(x)) == 0:
        zero = np.zeros((DIM, DIM))
        return zero, LocalWitnessTrace(tuple(x), tuple(target), zero, zero, "zero-point", "approx", tol)
    # derivation matching nabla at e1: least squares over the basis images
    images = basis[:, :, 0].T  # 8 x 21
    coeffs, *_ = np.linalg.lstsq(images, nabla[:, 0], rcond=None)
    d_e1 = np.tensordot(coeffs, basis, axes=1)
    rest = nabla - d_e1
    y = rest @ x
    x_im = x.copy()
    x_im[0] = 0.0
    lam = float(np.linalg.norm(x_im))
    mu = float(np.linalg.norm(y))
    decomposition = frame = None
    if lam <= tol or mu <= tol:
        D_x, case = d_e1, "trivial"
    else:
        x1 = Octonion(list(x_im / lam))
        # y is orthogonal to e1 and x only up to rounding; project it back
        y1v = y / mu
        y1v[0] = 0.0
        y1v = y1v - (y1v @ (x_im / lam)) * (x_im / lam)
        y1 = Octonion(list(y1v / np.linalg.norm(y1v)))
        decomposition = WitnessDecomposition(float(x[0]), lam, x1, y1, mu)
        frame = frame_from_pair(x1, y1, "approx", tol=tol)
        phi = automorphism_from_frame(frame)
        base = np.array([[float(a) for a in r] for r in base_derivation().to_rows()])
        D_x, case = d_e1 + (mu / lam) * (phi @ base @ phi.T), "frame"
    residual = float(np.max(np.abs(D_x @ x - target)))
    leibniz = float(np.max(np.abs(_float_leibniz() @ D_x.reshape(-1))))
    if residual > tol or leibniz > tol:
        raise InternalConsistencyError(
            f"approximate witness outside tolerance: residual {residual:g}, Leibniz {leibniz:g}"
        )
    trace = LocalWitnessTrace(tuple(x), tuple(target), D_x, d_e1, case, "approx", tol,
                              decomposition, frame, residual, leibniz)
    return D_x, trace


# -- 2-local exploration --------------------------------------------------------

def explore_2local(trials: int, seed: int = 0, keep_feasible: bool = False) -> dict:
    """Seeded search for an antisymmetric map with no two-point derivation witness.

    Evidence only: a pass says nothing about the open question, an
    infeasible record is an instance worth looking at.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    der = m8_derivations()
    feasible = infeasible = 0
    cases, records = [], []
    for t in range(trials):
        rng = rng_for(seed, "explore-2local", t)
        nabla = random_antisymmetric(rng, DIM)
        x = random_vector(rng, DIM)
        y = random_vector(rng, DIM)
        trace = multi_point_witness(der, [(x, nabla.apply(x)), (y, nabla.apply(y))])
        record = {
            "trial": t,
            "trial_seed": f"{seed}:explore-2local:{t}",
            "feasible": trace is not None,
        }
        if trace is None:
            infeasible += 1
            record.update(nabla=nabla.to_json(),
                          x=[format_fraction(a) for a in x],
                          y=[format_fraction(a) for a in y])
            cases.append(record)
        else:
            feasible += 1
            if keep_feasible:
                records.append(record)
    report = {
        "label": "exploration evidence for the open 2-local question on M8; no claim",
        "trials": trials,
        "seed": seed,
        "feasible": feasible,
        "infeasible": infeasible,
        "infeasible_cases": cases,
    }
    if keep_feasible:
        report["feasible_records"] = records
    return report
