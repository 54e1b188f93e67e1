"""Index rearrangements on bipartite operators: vec, realignment, partial transpose and trace.

A ``d x d`` operator on ``H_A (x) H_B`` is viewed as a ``dA x dA`` grid of
``dB x dB`` blocks ``Z[i, j]``.  Internally this is the 4-index view
``rho.reshape(dA, dB, dA, dB)[i, k, j, l] == Z[i, j][k, l]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DimError
from .linalg import ComplexMatrix, as_matrix


@dataclass(frozen=True)
class BipartiteDims:
    dA: int
    dB: int

    def __post_init__(self):
        for name in ("dA", "dB"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise DimError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def d(self) -> int:
        return self.dA * self.dB

    @classmethod
    def parse(cls, text: str) -> "BipartiteDims":
        """Parse ``"2x3"`` (or ``"2,3"``) into dims."""
        parts = text.lower().replace(",", "x").split("x")
        if len(parts) != 2:
            raise DimError(f"cannot parse dimensions {text!r}; expected e.g. 2x3")
        try:
            return cls(int(parts[0]), int(parts[1]))
        except ValueError:
            raise DimError(f"cannot parse dimensions {text!r}; expected e.g. 2x3") from None

    def __str__(self) -> str:
        return f"{self.dA}x{self.dB}"


def _blocks(rho, dims: BipartiteDims) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape != (dims.d, dims.d):
        raise DimError(f"expected a {dims.d}x{dims.d} matrix for dims {dims}, got {rho.shape}")
    return rho.reshape(dims.dA, dims.dB, dims.dA, dims.dB)


def vec(c) -> ComplexMatrix:
    """Column-stacked entries of ``c`` as a ``1 x (m*n)`` row: (c11, ..., cm1, c12, ...)."""
    c = as_matrix(c)
    return c.flatten(order="F")[np.newaxis, :]


def realign(rho, dims: BipartiteDims) -> ComplexMatrix:
    """Realigned ``dA^2 x dB^2`` matrix whose rows are ``vec(Z[i, j])``.

    Rows run over blocks column by column: Z[1,1], ..., Z[dA,1], Z[1,2], ...,
    Z[dA,dA].  Any row/column ordering gives the same singular values; this
    one is fixed so realigned matrices are reproducible entry for entry.
    """
    z = _blocks(rho, dims)
    # axes (j, i, l, k): row index j*dA + i, column index l*dB + k (column-major vec)
    return z.transpose(2, 0, 3, 1).reshape(dims.dA**2, dims.dB**2).copy()


def partial_transpose(rho, dims: BipartiteDims) -> ComplexMatrix:
    """Transpose on subsystem A: block (i, j) of the result is block (j, i) of ``rho``."""
    z = _blocks(rho, dims)
    return z.transpose(2, 1, 0, 3).reshape(dims.d, dims.d).copy()


def partial_trace(rho, dims: BipartiteDims, keep: Literal["A", "B"] = "A") -> ComplexMatrix:
    z = _blocks(rho, dims)
    if keep == "A":
        return np.einsum("ikjk->ij", z)
    if keep == "B":
        return np.einsum("kikj->ij", z)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")
