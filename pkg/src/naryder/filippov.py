"""The simple Filippov algebras A_m and their derivation theorems.

A_m is the (m-1)-ary, m-dimensional algebra with
``[e_1, ..., ^e_i, ..., e_m] = (-1)^(m+i) e_i``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .exact_linalg import Matrix, unit_vector
from .nary_core import (
    DerivationSpace,
    GlobalVerdict,
    NaryAlgebra,
    ProbeVector,
    default_probes,
    derivation_space,
    global_witness_verdict,
    is_derivation,
    multi_point_witness,
)

__all__ = [
    "FilippovDomainError",
    "SUPPORTED_RANGE",
    "build_filippov",
    "elementary_antisymmetric",
    "verify_der_characterization",
    "LocalCertificate",
    "local_certificate",
    "sampled_map_global_witness",
]

SUPPORTED_RANGE = range(4, 10)


class FilippovDomainError(ValueError):
    pass


def build_filippov(m: int) -> NaryAlgebra:
    if m < 4:
        raise FilippovDomainError(f"A_m is only built for m >= 4, got m={m}")
    sc = {}
    for i in range(1, m + 1):
        idx = tuple(k for k in range(1, m + 1) if k != i)
        sign = 1 if (m + i) % 2 == 0 else -1
        v = unit_vector(i - 1, m)
        sc[idx] = tuple(sign * x for x in v)
    return NaryAlgebra(m - 1, m, sc, name=f"A:{m}")


def elementary_antisymmetric(k: int, l: int, d: int) -> Matrix:
    """Delta_kl = e_kl - e_lk for 1-based k, l."""
    return Matrix.unit(k - 1, l - 1, d) - Matrix.unit(l - 1, k - 1, d)


def _zero_diagonal(M: Matrix) -> bool:
    return all(M[i, i] == 0 for i in range(M.rows))


def verify_der_characterization(m: int) -> dict:
    A = build_filippov(m)
    der = derivation_space(A)
    expected = m * (m - 1) // 2
    antisym = all(B.is_antisymmetric() and _zero_diagonal(B) for B in der.basis_maps)
    converse = all(
        bool(is_derivation(A, elementary_antisymmetric(k, l, m)))
        for k, l in itertools.combinations(range(1, m + 1), 2)
    )
    return {
        "algebra": A.name,
        "dim": der.dim,
        "expected_dim": expected,
        "dim_ok": der.dim == expected,
        "antisymmetric_ok": antisym,
        "converse_ok": converse,
        "ok": der.dim == expected and antisym and converse,
    }


@dataclass
class LocalCertificate:
    status: str  # "DERIVATION" or "COUNTEREXAMPLE"
    probe: Optional[ProbeVector] = None
    witness: Optional[Matrix] = None

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.probe is not None:
            out["probe"] = self.probe.to_json()
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def local_certificate(m: int, B: Matrix, der: Optional[DerivationSpace] = None) -> LocalCertificate:
    """Replay the Xi_k then Xi_k + Xi_l probe sequence against ``B``.

    Returns the first probe at which no derivation matches ``B``, or
    DERIVATION with ``B`` itself once every probe passes.
    """
    A = build_filippov(m)
    if B.shape != (m, m):
        raise FilippovDomainError(f"expected a {m}x{m} map, got {B.shape}")
    der = der or derivation_space(A)
    for p in default_probes(m):
        x = p.vector
        if multi_point_witness(der, [(x, B.apply(x))]) is None:
            return LocalCertificate("COUNTEREXAMPLE", probe=p)
    if not is_derivation(A, B):
        raise AssertionError("every probe passed but the map is not a derivation")
    return LocalCertificate("DERIVATION", witness=B)


def sampled_map_global_witness(m: Union[int, NaryAlgebra], table: Sequence,
                               der: Optional[DerivationSpace] = None) -> GlobalVerdict:
    A = m if isinstance(m, NaryAlgebra) else build_filippov(m)
    der = der or derivation_space(A)
    return global_witness_verdict(der, table)
