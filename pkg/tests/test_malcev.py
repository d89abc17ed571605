import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from instances import approx_m8_instance, exact_m8_instance
from naryder.exact_linalg import Matrix, unit_vector
from naryder.malcev import (
    M8DerivationParams,
    M8ParamError,
    NotRationalSquare,
    base_derivation,
    build_m8,
    constructive_local_witness,
    explore_2local,
    m8_basis_check,
    m8_basis_matrices,
    m8_derivations,
    params_roundtrip,
    params_to_matrix,
)
from naryder.nary_core import is_derivation, leibniz_system, multi_point_witness
from naryder.octonion import OctonionDomainError
from naryder.sampling import random_antisymmetric, random_vector


def Delta(i, j):
    return Matrix.unit(i - 1, j - 1, 8) - Matrix.unit(j - 1, i - 1, 8)


def e(i):
    return unit_vector(i - 1, 8)


def test_listed_basis():
    report = m8_basis_check()
    assert report["ok"] and report["der_dim"] == 21
    mats = m8_basis_matrices()
    M8 = build_m8()
    assert is_derivation(M8, mats[0]).ok and mats[0] == Delta(2, 3) - Delta(1, 4)
    assert is_derivation(M8, mats[-1]).ok and mats[-1] == Delta(7, 8) + Delta(1, 2)
    assert not is_derivation(M8, Delta(1, 2)).ok


def test_params_examples():
    p = params_roundtrip(Delta(2, 3) - Delta(1, 4))
    assert p.alpha[0] == -1 and sum(a != 0 for a in p.alpha) == 1
    assert p.gamma[2] == 1 and sum(g != 0 for g in p.gamma) == 1

    p = params_roundtrip(Matrix.zeros(8))
    assert not any(p.alpha) and not any(p.gamma)

    alpha = [0] * 21
    alpha[0] = alpha[18] = 1
    M = params_to_matrix(alpha)
    assert not any(M8DerivationParams.from_alpha(alpha).gamma)
    assert is_derivation(build_m8(), M).ok
    # Delta_ij = e_ij - e_ji; alpha_1 sits at entry (3,2)
    assert M == -(Delta(2, 3) + Delta(6, 7))


def test_params_errors():
    with pytest.raises(M8ParamError, match="gamma_3"):
        params_roundtrip(Delta(2, 3))
    with pytest.raises(M8ParamError, match="antisymmetric"):
        params_roundtrip(Matrix.unit(0, 0, 8))
    with pytest.raises(M8ParamError):
        M8DerivationParams.from_json({"alpha": [0.5] * 21})
    with pytest.raises(M8ParamError):
        M8DerivationParams.from_json({"beta": []})


@settings(max_examples=25, deadline=None)
@given(st.lists(st.fractions(min_value=-9, max_value=9, max_denominator=9), min_size=21, max_size=21))
def test_params_roundtrip_property(alpha):
    p = M8DerivationParams.from_alpha(alpha)
    M = params_to_matrix(p)
    assert params_roundtrip(M) == p
    assert m8_derivations().contains(M)
    assert M8DerivationParams.from_json(p.to_json()) == p


def test_every_derivation_has_params():
    rng = random.Random(0)
    der = m8_derivations()
    for _ in range(10):
        D = der.combine([F(rng.randint(-4, 4)) for _ in range(21)])
        assert params_to_matrix(params_roundtrip(D)) == D


def test_base_derivation():
    D = base_derivation()
    assert D.apply(e(1)) == (0,) * 8
    assert D.apply(e(2)) == e(3)


def test_witness_examples():
    D, trace = constructive_local_witness(Matrix.zeros(8), random_vector(random.Random(0), 8))
    assert D.is_zero()

    nabla = Delta(2, 3) + Delta(6, 7)
    D, trace = constructive_local_witness(nabla, e(2))
    assert D.apply(e(2)) == nabla.apply(e(2))
    assert m8_derivations().contains(D)

    # only row and column 1: the e1 part alone suffices
    v = (0, 2, -1, 0, 3, 0, 0, 1)
    nabla = Matrix.from_columns([v] + [[-v[i] if k == 0 else 0 for k in range(8)] for i in range(1, 8)], 8)
    assert nabla.is_antisymmetric()
    D, trace = constructive_local_witness(nabla, e(1))
    assert trace.case == "trivial" and D == trace.d_e1 and D.apply(e(1)) == v


def test_witness_errors():
    with pytest.raises(OctonionDomainError):
        constructive_local_witness(Matrix.identity(8), e(2))
    rng = random.Random(1)
    nabla = random_antisymmetric(rng, 8)
    x = (0, 1, 1, 0, 0, 0, 0, 0)  # |x_im|^2 = 2
    with pytest.raises(NotRationalSquare):
        constructive_local_witness(nabla, x)
    # approx mode handles the same input
    D, trace = constructive_local_witness(nabla, x, mode="approx")
    assert trace.residual <= 1e-9
    with pytest.raises(OctonionDomainError):
        constructive_local_witness(nabla, x, mode="fuzzy")


def test_exact_witness_instances():
    rng = random.Random(21)
    der = m8_derivations()
    for _ in range(5):
        nabla, x = exact_m8_instance(rng)
        assert nabla.is_antisymmetric()
        D, trace = constructive_local_witness(nabla, x)
        assert trace.case == "frame"
        assert der.contains(D) and D.apply(x) == nabla.apply(x)
        assert multi_point_witness(der, [(x, nabla.apply(x))]) is not None


def test_approx_witness_instances():
    rng = random.Random(22)
    L = np.array([[float(c) for c in r] for r in leibniz_system(build_m8()).to_rows()])
    for _ in range(5):
        nabla, x = approx_m8_instance(rng)
        D, trace = constructive_local_witness(nabla, x, mode="approx")
        N = np.array([[float(c) for c in r] for r in nabla.to_rows()])
        xf = np.array([float(c) for c in x])
        assert np.max(np.abs(D @ xf - N @ xf)) <= 1e-9
        assert np.max(np.abs(L @ D.reshape(-1))) <= 1e-9


def test_explore_2local():
    a = explore_2local(20, seed=5)
    assert a == explore_2local(20, seed=5)
    assert a["feasible"] + a["infeasible"] == 20
    assert len(a["infeasible_cases"]) == a["infeasible"]


def test_two_point_on_derivation_is_feasible():
    rng = random.Random(9)
    der = m8_derivations()
    D = der.combine([F(rng.randint(-3, 3)) for _ in range(21)])
    x, y = random_vector(rng, 8), random_vector(rng, 8)
    assert multi_point_witness(der, [(x, D.apply(x)), (y, D.apply(y))]) is not None
    # duplicate point reduces to the single-point case
    nabla = random_antisymmetric(rng, 8)
    one = multi_point_witness(der, [(x, nabla.apply(x))])
    two = multi_point_witness(der, [(x, nabla.apply(x)), (x, nabla.apply(x))])
    assert (one is None) == (two is None)
