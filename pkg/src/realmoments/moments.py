"""Moment sequences of a bipartite state.

Three sequences are computed, each with the zeroth entry fixed to the global
dimension ``d = dA * dB``:

* realignment moments ``r_k = Tr[(R R^dag)^(k/2)] = sum_i s_i^k`` over the
  singular values ``s_i`` of the realigned state ``R = R(rho)``;
* centered moments ``q_k``, the same power sums for ``R(rho - rho_A (x) rho_B)``;
* PT moments ``p_k = Tr[(rho^T_A)^k] = sum_i l_i^k`` over the signed
  eigenvalues of the partial transpose.

The notation ``Tr[X]^(k/2)`` is read as the trace of the half-integer power
of ``X``, evaluated as a power sum of singular values so no fractional
matrix power is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .linalg import hermitian_eigenvalues, singular_values
from .reshape import partial_trace, partial_transpose, realign
from .states import DensityMatrix

MomentKind = Literal["R", "Q", "P"]


@dataclass(frozen=True)
class MomentVector:
    """Moments ``(m_0, m_1, ..., m_K)`` of one kind; ``m_0`` is the global dimension."""

    kind: MomentKind
    values: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("R", "Q", "P"):
            raise ValueError(f"unknown moment kind {self.kind!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def K(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> float:
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)


def power_sums(spectrum, d: int, K: int) -> tuple[float, ...]:
    """``(d, sum x, sum x^2, ..., sum x^K)`` over the values in ``spectrum``."""
    if K < 0:
        raise ValueError(f"moment order K must be >= 0, got {K}")
    x = np.asarray(spectrum, dtype=np.float64)
    sums = [float(d)]
    power = np.ones_like(x)
    for _ in range(K):
        power = power * x
        sums.append(float(np.sum(power)))
    return tuple(sums)


def _order(s: DensityMatrix, K: int | None) -> int:
    return s.d if K is None else K


def realignment_spectrum(s: DensityMatrix) -> np.ndarray:
    return singular_values(realign(s.mat, s.dims)).values


def centered_operator(s: DensityMatrix) -> np.ndarray:
    """``rho - rho_A (x) rho_B``."""
    rho_a = partial_trace(s.mat, s.dims, "A")
    rho_b = partial_trace(s.mat, s.dims, "B")
    return s.mat - np.kron(rho_a, rho_b)


def centered_spectrum(s: DensityMatrix) -> np.ndarray:
    return singular_values(realign(centered_operator(s), s.dims)).values


def pt_spectrum(s: DensityMatrix) -> np.ndarray:
    return hermitian_eigenvalues(partial_transpose(s.mat, s.dims)).values


def realignment_moments(s: DensityMatrix, K: int | None = None) -> MomentVector:
    return MomentVector("R", power_sums(realignment_spectrum(s), s.d, _order(s, K)))


def centered_moments(s: DensityMatrix, K: int | None = None) -> MomentVector:
    return MomentVector("Q", power_sums(centered_spectrum(s), s.d, _order(s, K)))


def pt_moments(s: DensityMatrix, K: int | None = None) -> MomentVector:
    # signed eigenvalues, no absolute value
    return MomentVector("P", power_sums(pt_spectrum(s), s.d, _order(s, K)))
