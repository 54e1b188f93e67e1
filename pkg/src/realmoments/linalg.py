"""Dense complex linear algebra: products, Kronecker products and Jacobi spectra.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Eigenvalues of
Hermitian matrices come from a cyclic two-sided Jacobi iteration and singular
values from the one-sided (Hestenes) Jacobi variant, both compiled with numba.
Only spectra are produced; eigenvectors are never needed downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Literal

import numpy as np
from numba import njit

from .errors import ConvergenceError, DimError, ValidationError

ComplexMatrix = np.ndarray

MAX_SWEEPS = 100
OFF_DIAG_RTOL = 1e-14
HERM_RTOL = 1e-10
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues or singular values sorted in non-increasing order."""

    values: np.ndarray
    kind: Literal["eigen", "singular"]

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def min(self) -> float:
        return float(self.values[-1])

    @property
    def max(self) -> float:
        return float(self.values[0])


def as_matrix(a) -> ComplexMatrix:
    """Coerce ``a`` to a finite 2-D complex128 array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix contains NaN or Inf entries")
    return arr


def matmul(a, b) -> ComplexMatrix:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def conjugate_transpose(a) -> ComplexMatrix:
    return as_matrix(a).conj().T.copy()


def kron(a, b) -> ComplexMatrix:
    return np.kron(as_matrix(a), as_matrix(b))


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a)))


def herm_tolerance(a) -> float:
    """Hermiticity tolerance scaled by the Frobenius norm (never below the absolute 1e-10)."""
    return HERM_RTOL * max(1.0, frobenius_norm(a))


def is_hermitian(a, tol: float | None = None) -> bool:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    if tol is None:
        tol = herm_tolerance(a)
    return float(np.max(np.abs(a - a.conj().T))) <= tol


@njit(cache=True)
def _rotation(alpha, beta, gamma):
    # Unitary U such that U^H [[alpha, gamma], [conj(gamma), beta]] U is diagonal.
    mag = abs(gamma)
    phase = (gamma / mag).conjugate()
    theta = (beta - alpha) / (2.0 * mag)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / sqrt(t * t + 1.0)
    s = t * c
    return c + 0j, s + 0j, -s * phase, c * phase


@njit(cache=True)
def _jacobi_eigvals(a, max_sweeps, rtol):
    n = a.shape[0]
    a = a.copy()
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += abs(a[i, j]) ** 2
    fro = sqrt(fro)
    out = np.zeros(n)
    if fro == 0.0:
        return out, 0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += abs(a[i, j]) ** 2
        if sqrt(off) < rtol * fro:
            for i in range(n):
                out[i] = a[i, i].real
            return out, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-300:
                    continue
                u00, u01, u10, u11 = _rotation(a[p, p].real, a[q, q].real, a[p, q])
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * u00 + akq * u10
                    a[k, q] = akp * u01 + akq * u11
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = u00.conjugate() * apk + u10.conjugate() * aqk
                    a[q, k] = u01.conjugate() * apk + u11.conjugate() * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    return out, -1


@njit(cache=True)
def _jacobi_singular(a, max_sweeps, tol):
    # One-sided Jacobi: rotate column pairs until mutually orthogonal.
    m, n = a.shape
    a = a.copy()
    norms = np.zeros(n)
    fro2 = 0.0
    for i in range(m):
        for j in range(n):
            fro2 += abs(a[i, j]) ** 2
    # columns below this squared norm are rounding noise
    floor = fro2 * 2.220446049250313e-16**2
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0j
                for k in range(m):
                    alpha += abs(a[k, p]) ** 2
                    beta += abs(a[k, q]) ** 2
                    gamma += a[k, p].conjugate() * a[k, q]
                if alpha <= floor or beta <= floor or abs(gamma) <= tol * sqrt(alpha * beta):
                    continue
                rotated = True
                u00, u01, u10, u11 = _rotation(alpha, beta, gamma)
                for k in range(m):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * u00 + akq * u10
                    a[k, q] = akp * u01 + akq * u11
        if not rotated:
            for j in range(n):
                s = 0.0
                for k in range(m):
                    s += abs(a[k, j]) ** 2
                norms[j] = sqrt(s)
            return norms, sweep
    return norms, -1


def hermitian_eigenvalues(a) -> Spectrum:
    """Eigenvalues of a Hermitian matrix, descending.

    Raises DimError for non-square input, ValidationError when ``a`` is not
    Hermitian within :func:`herm_tolerance`, ConvergenceError if the Jacobi
    sweeps fail to reduce the off-diagonal mass below 1e-14 of the Frobenius
    norm within 100 sweeps.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimError(f"eigenvalues need a square matrix, got {a.shape}")
    if not is_hermitian(a):
        raise ValidationError("matrix is not Hermitian within tolerance")
    herm = np.ascontiguousarray(0.5 * (a + a.conj().T))
    vals, sweeps = _jacobi_eigvals(herm, MAX_SWEEPS, OFF_DIAG_RTOL)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps")
    return Spectrum(np.sort(vals)[::-1], "eigen")


def singular_values(a) -> Spectrum:
    """Singular values of any rectangular matrix, descending, ``min(rows, cols)`` of them."""
    a = as_matrix(a)
    if a.shape[1] > a.shape[0]:
        a = a.conj().T
    a = np.ascontiguousarray(a)
    tol = max(a.shape[1], 1) * _EPS
    vals, sweeps = _jacobi_singular(a, MAX_SWEEPS, tol)
    if sweeps < 0:
        raise ConvergenceError(f"one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps")
    return Spectrum(np.sort(vals)[::-1], "singular")


def min_eigenvalue_psd_check(a, tol: float = 1e-9) -> tuple[bool, float]:
    """Return ``(min_eig >= -tol, min_eig)`` for a Hermitian matrix."""
    lam = hermitian_eigenvalues(a).min
    return lam >= -tol, lam
