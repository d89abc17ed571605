"""Acceptance suite: one test per criterion.

Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""
import io
import itertools
import json
from fractions import Fraction as F

import numpy as np
import pytest

from instances import approx_m8_instance, exact_m8_instance
from naryder.cli import run
from naryder.exact_linalg import Matrix, Subspace
from naryder.filippov import build_filippov, local_certificate, sampled_map_global_witness
from naryder.malcev import build_m8, constructive_local_witness, m8_derivations
from naryder.nary_core import derivation_space, is_derivation, leibniz_system, multi_point_witness
from naryder.octonion import (
    Octonion,
    automorphism_from_frame,
    check_octonion_identities,
    form,
    frame_from_pair,
    oct_mul,
    random_orthogonal,
    ternary_bracket,
)
from naryder.sampling import random_antisymmetric, random_rational, random_vector, rng_for

MS = range(4, 10)
SEED = 2024


def cli(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, json.loads(out.getvalue())


# The listed derivation basis of M8 and the gamma relations, transcribed
# directly (Delta_ij = e_ij - e_ji).
LISTED_BASIS = """
23-14 24+13 25-16 26+15 27+18 28-17 34-12 35-17 36-18 37+15 38+16
45-18 46+17 47-16 48+15 56-12 57-13 58-14 67+14 68-13 78+12
""".split()

GAMMA = {
    1: {7: -1, 16: -1, 21: 1},
    2: {2: 1, 17: -1, 20: -1},
    3: {1: -1, 18: -1, 19: 1},
    4: {4: 1, 10: 1, 15: 1},
    5: {3: -1, 11: 1, 14: -1},
    6: {6: -1, 8: -1, 13: 1},
    7: {5: 1, 9: -1, 12: -1},
}


def _delta(i, j):
    return Matrix.unit(i - 1, j - 1, 8) - Matrix.unit(j - 1, i - 1, 8)


def _listed(term):
    sign = 1 if "+" in term else -1
    a, b = term.replace("+", "-").split("-")
    return _delta(int(a[0]), int(a[1])) + sign * _delta(int(b[0]), int(b[1]))


def _alpha(M):
    # alpha_1..alpha_21: strictly lower triangle of columns 2..7, column by column
    return [M[r, c] for c in range(1, 7) for r in range(c + 1, 8)]


def test_ac01_filippov_identity():
    for m in MS:
        code, res = cli("check", "filippov", f"A:{m}")
        assert code == 0 and res["payload"]["violation_count"] == 0, m
    code, res = cli("check", "filippov", "M8")
    assert code == 1 and res["payload"]["violation_count"] >= 1


def test_ac02_der_filippov_dimensions():
    for m in MS:
        code, res = cli("der", f"A:{m}")
        assert code == 0
        assert res["payload"]["dim"] == m * (m - 1) // 2
        for B in res["payload"]["basis"]:
            M = Matrix.from_json(B)
            assert all(M[i, i] == 0 for i in range(m))
            assert all(M[i, j] + M[j, i] == 0 for i in range(m) for j in range(m))


def test_ac03_der_m8():
    code, res = cli("der", "M8")
    assert code == 0 and res["payload"]["dim"] == 21
    M8 = build_m8()
    listed = [_listed(t) for t in LISTED_BASIS]
    assert len(listed) == 21
    for B in listed:
        assert is_derivation(M8, B).ok
    computed = [Matrix.from_json(B) for B in res["payload"]["basis"]]
    span_listed = Subspace.span([B.entries for B in listed], 64)
    assert span_listed == Subspace.span([B.entries for B in computed], 64)
    assert span_listed.dim == 21
    for B in computed + listed:
        alpha = _alpha(B)
        for k, rel in GAMMA.items():
            assert B[k, 0] == sum(c * alpha[j - 1] for j, c in rel.items())
        assert B.is_antisymmetric()


def test_ac04_locder_bound():
    for m in MS:
        code, res = cli("locder-bound", f"A:{m}")
        assert code == 0
        assert res["payload"]["dim"] == m * (m - 1) // 2 and res["payload"]["antisymmetric"]
    code, res = cli("locder-bound", "M8")
    assert code == 0
    p = res["payload"]
    assert p["dim"] == 28 and p["antisymmetric"]
    assert p["der_dim"] == 21 and p["quotient_dim"] == 7


def _expected_probe(B, m):
    for k in range(m):
        if B[k, k]:
            return f"Xi_{k + 1}"
    for k, l in itertools.combinations(range(m), 2):
        if B[k, l] + B[l, k]:
            return f"Xi_{k + 1}+Xi_{l + 1}"
    return None


def test_ac05_local_probes():
    rng = rng_for(SEED, "ac05")
    ders = {m: derivation_space(build_filippov(m)) for m in MS}
    for t in range(200):
        m = MS[t % len(MS)]
        B = random_antisymmetric(rng, m)
        cert = local_certificate(m, B, ders[m])
        assert cert.status == "DERIVATION" and cert.witness == B
    for t in range(200):
        m = MS[t % len(MS)]
        B = random_antisymmetric(rng, m)
        # symmetric perturbation, on the diagonal or off it
        i = rng.randrange(m)
        j = i if t % 2 else rng.choice([k for k in range(m) if k != i])
        c = random_rational(rng) or F(1)
        S = Matrix.unit(i, j, m) + Matrix.unit(j, i, m) if i != j else Matrix.unit(i, i, m)
        B = B + c * S
        assert not B.is_antisymmetric()
        cert = local_certificate(m, B, ders[m])
        assert cert.status == "COUNTEREXAMPLE"
        assert len(cert.probe.support) in (1, 2)
        assert cert.probe.label == _expected_probe(B, m)


def test_ac06_m8_single_point_feasibility():
    rng = rng_for(SEED, "ac06")
    der = m8_derivations()
    for _ in range(100):
        nabla = random_antisymmetric(rng, 8)
        for _ in range(100):
            x = random_vector(rng, 8)
            trace = multi_point_witness(der, [(x, nabla.apply(x))])
            assert trace is not None


def test_ac07_constructive_witness():
    rng = rng_for(SEED, "ac07-exact")
    M8 = build_m8()
    der = m8_derivations()
    for _ in range(50):
        nabla, x = exact_m8_instance(rng)
        D, trace = constructive_local_witness(nabla, x)
        assert is_derivation(M8, D).ok
        assert D.apply(x) == nabla.apply(x)
        oracle = multi_point_witness(der, [(x, nabla.apply(x))])
        assert oracle is not None
    rng = rng_for(SEED, "ac07-approx")
    L = np.array([[float(c) for c in r] for r in leibniz_system(M8).to_rows()])
    for _ in range(50):
        nabla, x = approx_m8_instance(rng)
        D, trace = constructive_local_witness(nabla, x, mode="approx", tol=1e-9)
        N = np.array([[float(c) for c in r] for r in nabla.to_rows()])
        xf = np.array([float(c) for c in x])
        assert np.max(np.abs(D @ xf - N @ xf)) <= 1e-9
        assert np.max(np.abs(L @ D.reshape(-1))) <= 1e-9


def test_ac08_octonion_identities():
    report = check_octonion_identities(seed=SEED, trials=100)
    assert report["ok"]
    for r in report["reports"]:
        assert r["violation_count"] == 0
    by_name = {r["check"]: r for r in report["reports"]}
    # 210 ordered basis triples plus two random families of 100
    assert by_name["uvw"]["checked"] == 210 + 200
    e = [None] + [Octonion.basis(i) for i in range(1, 9)]
    for i in range(2, 9):
        j, k, l, m, s, t = report["ets_witnesses"][i]
        assert e[i] == oct_mul(e[1], e[i]) == oct_mul(e[j], e[k]) == oct_mul(e[l], e[m]) == oct_mul(e[s], e[t])
        assert oct_mul(e[k], e[m]) == e[t]


def test_ac09_automorphisms():
    rng = rng_for(SEED, "ac09")
    E = [Octonion.basis(i) for i in range(1, 9)]
    for _ in range(20):
        Q = random_orthogonal(rng, 7)
        a, b = rng.sample(range(7), 2)
        x, y = Octonion((0,) + Q.col(a)), Octonion((0,) + Q.col(b))
        frame = frame_from_pair(x, y)
        phi = automorphism_from_frame(frame)
        assert isinstance(phi, Matrix)

        def P(u):
            return Octonion(phi.apply(u.coords))

        assert P(E[1]) == x and P(E[2]) == y
        for u, v in itertools.product(E, repeat=2):
            assert P(oct_mul(u, v)) == oct_mul(P(u), P(v))
        for u, v in itertools.product(E, repeat=2):
            assert form(P(u), P(v)) == form(u, v)
        triples = list(itertools.combinations(E, 3))
        assert len(triples) == 56
        for u, v, w in triples:
            assert P(ternary_bracket(u, v, w)) == ternary_bracket(P(u), P(v), P(w))


def test_ac10_two_local_shadow():
    rng = rng_for(SEED, "ac10")
    for t in range(20):
        m = MS[t % len(MS)]
        der = derivation_space(build_filippov(m))
        D = der.combine([random_rational(rng) for _ in range(der.dim)])
        table = [(x, D.apply(x)) for x in (random_vector(rng, m) for _ in range(m + 1))]
        verdict = sampled_map_global_witness(m, table, der)
        assert verdict.status == "PASS"
        assert all(verdict.trace.witness.apply(x) == y for x, y in table)
    code, first = cli("explore-2local", "--trials", "1000", "--seed", "1")
    assert code == 0 and first["payload"]["trials"] == 1000
    p = first["payload"]
    assert p["feasible"] + p["infeasible"] == 1000
    _, second = cli("explore-2local", "--trials", "1000", "--seed", "1")
    assert second == first


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
