"""Bipartite density matrices: validated container, standard families, sampling and file I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimError, ParseError, ValidationError
from .linalg import ComplexMatrix, as_matrix, herm_tolerance, hermitian_eigenvalues, is_hermitian
from .reshape import BipartiteDims

TRACE_TOL = 1e-10
PSD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A Hermitian, unit-trace, positive semidefinite operator on ``H_A (x) H_B``.

    The matrix is copied and frozen on construction; every invariant is
    checked there, so any instance in hand is a valid state.
    """

    dims: BipartiteDims
    mat: ComplexMatrix

    def __post_init__(self):
        mat = np.array(as_matrix(self.mat), dtype=np.complex128)
        d = self.dims.d
        if mat.shape != (d, d):
            raise DimError(f"dims {self.dims} need a {d}x{d} matrix, got {mat.shape}")
        if not is_hermitian(mat):
            dev = float(np.max(np.abs(mat - mat.conj().T)))
            raise ValidationError(f"matrix is not Hermitian (max deviation {dev:.3g} > {herm_tolerance(mat):.3g})")
        tr = np.trace(mat)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace is {tr.real:.17g}{tr.imag:+.3g}j, expected 1")
        lam = hermitian_eigenvalues(mat).min
        if lam < -PSD_TOL:
            raise ValidationError(f"matrix is not positive semidefinite (min eigenvalue {lam:.6g})")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @property
    def d(self) -> int:
        return self.dims.d

    def purity(self) -> float:
        return float(np.real(np.sum(self.mat * self.mat.conj())))

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.mat, other.mat)

    def __hash__(self):
        return hash((self.dims, self.mat.tobytes()))


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _pure(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


TWO_QUBITS = BipartiteDims(2, 2)


def maximally_mixed(dims: BipartiteDims) -> DensityMatrix:
    return DensityMatrix(dims, np.eye(dims.d) / dims.d)


def product_state(rho_a, rho_b) -> DensityMatrix:
    """``rho_a (x) rho_b`` for two local density matrices given as arrays."""
    a, b = as_matrix(rho_a), as_matrix(rho_b)
    return DensityMatrix(BipartiteDims(a.shape[0], b.shape[0]), np.kron(a, b))


def werner(p: float) -> DensityMatrix:
    """Two-qubit ``p |phi+><phi+| + (1 - p) I/4``.

    This family is also known as the two-qubit isotropic state.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"werner parameter must lie in [0, 1], got {p}")
    m = np.zeros((4, 4), dtype=np.complex128)
    m[0, 0] = m[3, 3] = (1 + p) / 4
    m[1, 1] = m[2, 2] = (1 - p) / 4
    m[0, 3] = m[3, 0] = p / 2
    return DensityMatrix(TWO_QUBITS, m)


_BELL_VECTORS = {
    0: (np.array([1, 0, 0, 1]), "phi+"),
    1: (np.array([1, 0, 0, -1]), "phi-"),
    2: (np.array([0, 1, 1, 0]), "psi+"),
    3: (np.array([0, 1, -1, 0]), "psi-"),
}


def bell_state(index: int = 0) -> DensityMatrix:
    """Projector onto Bell state ``index``: 0 phi+, 1 phi-, 2 psi+, 3 psi-."""
    if index not in _BELL_VECTORS:
        raise ValueError(f"Bell index must be 0..3, got {index!r}")
    v = _BELL_VECTORS[index][0].astype(np.complex128)
    return DensityMatrix(TWO_QUBITS, _pure(v) / 2)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; identical seeds give identical streams on every platform."""
    return np.random.Generator(np.random.PCG64(seed))


def _ginibre(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    w = _hermitize(g @ g.conj().T)
    return w / np.trace(w).real


def random_density(dims: BipartiteDims, seed: int) -> DensityMatrix:
    """Sample from the Ginibre (Hilbert-Schmidt) ensemble: ``G G^dag / Tr(G G^dag)``."""
    return DensityMatrix(dims, _ginibre(dims.d, make_rng(seed)))


def random_separable(dims: BipartiteDims, num_terms: int, seed: int) -> DensityMatrix:
    """Convex mixture of ``num_terms`` products of Ginibre local states with Dirichlet(1) weights."""
    if num_terms < 1:
        raise ValueError(f"num_terms must be >= 1, got {num_terms}")
    rng = make_rng(seed)
    weights = rng.dirichlet(np.ones(num_terms)) if num_terms > 1 else np.ones(1)
    m = np.zeros((dims.d, dims.d), dtype=np.complex128)
    for w in weights:
        m += w * np.kron(_ginibre(dims.dA, rng), _ginibre(dims.dB, rng))
    m = _hermitize(m)
    return DensityMatrix(dims, m / np.trace(m).real)


def _format_rows(rows: np.ndarray) -> str:
    lines = ["    [" + ", ".join(repr(float(x)) for x in row) + "]" for row in rows]
    return "[\n" + ",\n".join(lines) + "\n  ]"


def serialize_state(s: DensityMatrix) -> str:
    """JSON text with keys ``dA``, ``dB``, ``re``, ``im``; floats use shortest round-trip repr."""
    return (
        "{\n"
        f'  "dA": {s.dims.dA},\n'
        f'  "dB": {s.dims.dB},\n'
        f'  "re": {_format_rows(s.mat.real)},\n'
        f'  "im": {_format_rows(s.mat.imag)}\n'
        "}\n"
    )


def _read_grid(doc: dict, key: str) -> np.ndarray:
    grid = doc.get(key)
    if not isinstance(grid, list) or not all(isinstance(row, list) for row in grid):
        raise ParseError(f'field "{key}" must be an array of arrays of numbers')
    for row in grid:
        for x in row:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ParseError(f'field "{key}" contains a non-numeric entry {x!r}')
    if len({len(row) for row in grid}) > 1:
        raise DimError(f'field "{key}" has rows of unequal length')
    return np.array(grid, dtype=np.float64).reshape(len(grid), -1)


def parse_state(text: str) -> DensityMatrix:
    """Parse a state document.

    Raises ParseError for malformed JSON or schema (the message carries the
    byte offset for syntax errors), DimError when the arrays do not match
    ``dA * dB``, and ValidationError when the matrix is not a density matrix.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(exc.doc[: exc.pos].encode("utf-8"))
        raise ParseError(f"malformed state document at byte offset {offset}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("state document must be a JSON object")
    for key in ("dA", "dB", "re", "im"):
        if key not in doc:
            raise ParseError(f'state document is missing field "{key}"')
    for key in ("dA", "dB"):
        if isinstance(doc[key], bool) or not isinstance(doc[key], int):
            raise ParseError(f'field "{key}" must be an integer')
    dims = BipartiteDims(doc["dA"], doc["dB"])
    re, im = _read_grid(doc, "re"), _read_grid(doc, "im")
    if re.shape != (dims.d, dims.d) or im.shape != (dims.d, dims.d):
        raise DimError(f"dims {dims} need {dims.d}x{dims.d} arrays, got re {re.shape} and im {im.shape}")
    mat = np.empty((dims.d, dims.d), dtype=np.complex128)
    mat.real, mat.imag = re, im
    if not np.all(np.isfinite(mat)):
        raise ValidationError("state contains non-finite entries")
    return DensityMatrix(dims, mat)


def load_state(path) -> DensityMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_state(fh.read())


def save_state(s: DensityMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_state(s))
