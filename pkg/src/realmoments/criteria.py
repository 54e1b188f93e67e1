"""Separability criteria built from moment sequences, plus full-matrix baselines.

Every criterion yields a :class:`CriterionVerdict` with a signed margin:
negative beyond ``TOL_CRIT`` certifies entanglement, anything else is
inconclusive (all tests here are one-sided).  Moment inequalities that hold
for *every* state are reported separately as :class:`Diagnostic` entries;
a failing diagnostic means numerical trouble, never entanglement.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import sqrt
from typing import Callable, Iterable, Literal

import numpy as np

from . import linalg
from .moments import (
    MomentVector,
    centered_spectrum,
    power_sums,
    pt_spectrum,
    realignment_spectrum,
)
from .reshape import BipartiteDims, partial_trace
from .states import DensityMatrix

TOL_CRIT = 1e-9
GRAM_TOL = 1e-9
NORM_INEQ_TOL = 1e-12
# feasibility slack when searching the first-moment floor; errs towards "inconclusive"
_FLOOR_FEAS_TOL = 1e-12

HankelFamily = Literal["H", "B", "H_hat", "B_hat"]


class Verdict(str, enum.Enum):
    ENTANGLED = "entangled"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CriterionVerdict:
    criterion_id: str
    verdict: Verdict
    margin: float
    witness: dict | None = None

    @property
    def entangled(self) -> bool:
        return self.verdict is Verdict.ENTANGLED

    def to_dict(self) -> dict:
        return {
            "criterion_id": self.criterion_id,
            "verdict": self.verdict.value,
            "margin": self.margin,
            "witness": self.witness,
        }


@dataclass(frozen=True)
class Diagnostic:
    """An inequality valid for all states; ``ok`` is False only on numerical failure."""

    check_id: str
    value: float
    ok: bool

    def to_dict(self) -> dict:
        return {"check_id": self.check_id, "value": self.value, "ok": self.ok}


def make_verdict(criterion_id: str, margin: float, witness: dict | None = None, tol: float = TOL_CRIT) -> CriterionVerdict:
    margin = float(margin)
    verdict = Verdict.ENTANGLED if margin < -tol else Verdict.INCONCLUSIVE
    return CriterionVerdict(criterion_id, verdict, margin, witness)


# -- Hankel matrices -----------------------------------------------------------


@dataclass(frozen=True)
class HankelMatrix:
    family: HankelFamily
    order: int
    source_kind: str
    entries: np.ndarray

    def min_eigenvalue(self) -> float:
        return _min_eig(self.entries)


def _hankel_entries(values, family: str, k: int, first_moment: float | None = None) -> np.ndarray:
    shift = 1 if family.startswith("B") else 0
    idx = np.add.outer(np.arange(k + 1), np.arange(k + 1)) + shift
    m = np.asarray(values, dtype=np.float64)[idx]
    if family.endswith("_hat"):
        # positional replacement: only entries whose moment index is 1
        m[idx == 1] = 1.0
    elif first_moment is not None:
        m[idx == 1] = first_moment
    return m


def build_hankel(m: MomentVector, family: HankelFamily, k: int) -> HankelMatrix:
    """Hankel matrix of order ``k`` (size ``(k+1) x (k+1)``).

    ``H``: entries ``m[i+j]``; ``B``: entries ``m[i+j+1]``.  The ``_hat``
    variants put exactly 1 wherever the first moment would appear.
    """
    if family not in ("H", "B", "H_hat", "B_hat"):
        raise ValueError(f"unknown Hankel family {family!r}")
    if k < 0:
        raise ValueError(f"Hankel order must be >= 0, got {k}")
    need = 2 * k + (1 if family.startswith("B") else 0)
    if m.K < need:
        raise ValueError(f"{family}_{k} needs moments up to order {need}, have {m.K}")
    entries = _hankel_entries(m.values, family, k)
    entries.setflags(write=False)
    return HankelMatrix(family, k, m.kind, entries)


def _min_eig(a: np.ndarray) -> float:
    # real symmetric input built here; skip the public validation path
    vals, sweeps = linalg._jacobi_eigvals(
        np.ascontiguousarray(a, dtype=np.complex128), linalg.MAX_SWEEPS, linalg.OFF_DIAG_RTOL
    )
    if sweeps < 0:
        raise linalg.ConvergenceError("Jacobi eigensolver did not converge on a Hankel matrix")
    return float(np.min(vals))


def h_orders(d: int) -> range:
    return range(1, d // 2 + 1)


def b_orders(d: int) -> range:
    return range(1, (d - 1) // 2 + 1)


# -- per-state moment bundle ---------------------------------------------------


@dataclass(frozen=True)
class StateMoments:
    """Everything the criteria consume, computed once per state."""

    dims: BipartiteDims
    r: MomentVector
    q: MomentVector
    p: MomentVector
    pt_min_eig: float
    purity_a: float
    purity_b: float

    @classmethod
    def of(cls, s: DensityMatrix, K: int | None = None) -> "StateMoments":
        # third moments are always needed (thm1, corollary, p3) even for tiny d
        K = max(s.d, 3) if K is None else K
        pt_eigs = pt_spectrum(s)
        rho_a = partial_trace(s.mat, s.dims, "A")
        rho_b = partial_trace(s.mat, s.dims, "B")
        return cls(
            dims=s.dims,
            r=MomentVector("R", power_sums(realignment_spectrum(s), s.d, K)),
            q=MomentVector("Q", power_sums(centered_spectrum(s), s.d, K)),
            p=MomentVector("P", power_sums(pt_eigs, s.d, K)),
            pt_min_eig=float(pt_eigs[-1]),
            purity_a=float(np.real(np.vdot(rho_a, rho_a))),
            purity_b=float(np.real(np.vdot(rho_b, rho_b))),
        )


def _moments(s: DensityMatrix | StateMoments) -> StateMoments:
    return s if isinstance(s, StateMoments) else StateMoments.of(s)


# -- criteria ------------------------------------------------------------------


def thm1_r_moment_test(s: DensityMatrix | StateMoments, tol: float = TOL_CRIT) -> CriterionVerdict:
    """Separable states satisfy ``r_2^2 <= r_3``; margin is ``r_3 - r_2^2``."""
    r = _moments(s).r
    return make_verdict("thm1", r[3] - r[2] ** 2, {"r2": r[2], "r3": r[3]}, tol)


def first_moment_floor(r: MomentVector, k: int) -> float:
    """Smallest value of the first moment for which ``H_k`` stays PSD, all other moments fixed.

    The true ``r_1`` is always feasible and feasibility in ``t`` is an
    interval (minimum eigenvalue is concave in ``t``), so bisection on
    ``[-sqrt(d r_2) - 1, r_1]`` brackets the lower end.
    """
    values = r.values

    def feasible(t: float) -> bool:
        h = _hankel_entries(values, "H", k, first_moment=t)
        return _min_eig(h) >= -_FLOOR_FEAS_TOL * max(1.0, float(np.max(np.abs(h))))

    hi = values[1]
    lo = -sqrt(max(values[0] * values[2], 0.0)) - 1.0
    if feasible(lo):
        return lo
    for _ in range(200):
        if hi - lo <= 1e-14 * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def thm2_hankel_test(s: DensityMatrix | StateMoments, tol: float = TOL_CRIT) -> list[CriterionVerdict]:
    """Hatted Hankel tests on realignment moments.

    ``B_hat_l`` (l <= (d-1)//2): the first moment sits only in the corner, so
    lowering it to 1 keeps a PSD matrix PSD; margin is the minimum
    eigenvalue.

    ``H_hat_k`` (k <= d//2): the first moment sits off the diagonal, where
    substituting 1 does not preserve positivity (for k >= 2 the literal
    hatted matrix is indefinite for almost every separable state).  The test
    asks instead whether the higher moments force the first moment above the
    separable bound: margin is ``1 - first_moment_floor``.  The literal
    hatted minimum eigenvalue is kept in the witness.
    """
    ms = _moments(s)
    r, d = ms.r, ms.dims.d
    out = []
    for k in h_orders(d):
        floor = first_moment_floor(r, k)
        hat = _min_eig(_hankel_entries(r.values, "H_hat", k))
        out.append(make_verdict(f"thm2_H{k}", 1.0 - floor, {"family": "H_hat", "index": k, "first_moment_floor": floor, "hat_min_eig": hat}, tol))
    for l in b_orders(d):
        lam = _min_eig(_hankel_entries(r.values, "B_hat", l))
        out.append(make_verdict(f"thm2_B{l}", lam, {"family": "B_hat", "index": l}, tol))
    return out


def _gram_checks(m: MomentVector, d: int, prefix: str) -> list[Diagnostic]:
    out = []
    for fam, orders in (("H", h_orders(d)), ("B", b_orders(d))):
        for k in orders:
            lam = _min_eig(_hankel_entries(m.values, fam, k))
            out.append(Diagnostic(f"{prefix}_{fam}{k}", lam, lam >= -GRAM_TOL))
    return out


def thm3_q_hankel_test(s: DensityMatrix | StateMoments) -> list[Diagnostic]:
    """Unhatted ``H_k(q)``, ``B_l(q)`` are Gram matrices, PSD for every state."""
    ms = _moments(s)
    return _gram_checks(ms.q, ms.dims.d, "thm3")


def gram_r_checks(s: DensityMatrix | StateMoments) -> list[Diagnostic]:
    """Unhatted ``H_k(r)``, ``B_l(r)`` are Gram matrices, PSD for every state."""
    ms = _moments(s)
    return _gram_checks(ms.r, ms.dims.d, "gram_r")


def norm_inequality_check(s: DensityMatrix | StateMoments) -> Diagnostic:
    """``r_2^2 <= r_1 r_3`` for every state (Schatten-norm interpolation)."""
    r = _moments(s).r
    slack = r[1] * r[3] - r[2] ** 2
    return Diagnostic("norm_ineq", slack, slack >= -NORM_INEQ_TOL)


def corollary1_test(s: DensityMatrix | StateMoments, tol: float = TOL_CRIT) -> CriterionVerdict:
    """Centered-moment test ``q_2^2 <= sqrt((1 - Tr rho_A^2)(1 - Tr rho_B^2)) q_3``.

    Follows from ``B_1(q) >= 0`` (so ``q_2^2 <= q_1 q_3``) and the separable
    bound ``q_1 <= sqrt((1 - Tr rho_A^2)(1 - Tr rho_B^2))``.  The variant
    without the square root is not implied by those two facts and fires on
    separable states; its margin is reported as ``unrooted_margin``.
    """
    ms = _moments(s)
    q = ms.q
    factor = max(1.0 - ms.purity_a, 0.0) * max(1.0 - ms.purity_b, 0.0)
    margin = sqrt(factor) * q[3] - q[2] ** 2
    witness = {"q2": q[2], "q3": q[3], "purity_a": ms.purity_a, "purity_b": ms.purity_b, "unrooted_margin": factor * q[3] - q[2] ** 2}
    return make_verdict("cor1", margin, witness, tol)


def ccnr_test(s: DensityMatrix | StateMoments, tol: float = TOL_CRIT) -> CriterionVerdict:
    """Trace norm of the realigned state is at most 1 for separable states; margin ``1 - r_1``."""
    r = _moments(s).r
    return make_verdict("ccnr", 1.0 - r[1], {"r1": r[1]}, tol)


def ppt_test(s: DensityMatrix | StateMoments, tol: float = TOL_CRIT) -> CriterionVerdict:
    ms = _moments(s)
    return make_verdict("ppt", ms.pt_min_eig, {"min_eig": ms.pt_min_eig}, tol)


def pt_moment_tests(s: DensityMatrix | StateMoments, tol: float = TOL_CRIT) -> list[CriterionVerdict]:
    """``p_3 >= p_2^2`` and ``B_l(p) >= 0`` (raw ``p_1``, ``p_0 = d``); both hold for PPT states."""
    ms = _moments(s)
    p, d = ms.p, ms.dims.d
    out = [make_verdict("p3", p[3] - p[2] ** 2, {"p2": p[2], "p3": p[3]}, tol)]
    for l in b_orders(d):
        lam = _min_eig(_hankel_entries(p.values, "B", l))
        out.append(make_verdict(f"pt_B{l}", lam, {"family": "B", "index": l}, tol))
    return out


def _as_list(fn: Callable) -> Callable[[StateMoments, float], list[CriterionVerdict]]:
    def run(ms: StateMoments, tol: float) -> list[CriterionVerdict]:
        res = fn(ms, tol)
        return res if isinstance(res, list) else [res]

    return run


CRITERIA: dict[str, Callable[[StateMoments, float], list[CriterionVerdict]]] = {
    "thm1": _as_list(thm1_r_moment_test),
    "thm2": _as_list(thm2_hankel_test),
    "cor1": _as_list(corollary1_test),
    "ccnr": _as_list(ccnr_test),
    "ppt": _as_list(ppt_test),
    "pt": _as_list(pt_moment_tests),
}


def parse_criteria(selector: str | Iterable[str] | None) -> tuple[str, ...]:
    """Resolve ``"all"`` or a comma-separated list of criterion families."""
    if selector is None:
        return tuple(CRITERIA)
    names = [n.strip() for n in selector.split(",")] if isinstance(selector, str) else list(selector)
    names = [n for n in names if n]
    if names == ["all"] or not names:
        return tuple(CRITERIA)
    unknown = [n for n in names if n not in CRITERIA]
    if unknown:
        raise ValueError(f"unknown criteria {unknown}; choose from {', '.join(CRITERIA)} or all")
    return tuple(n for n in CRITERIA if n in names)


@dataclass(frozen=True)
class AnalysisReport:
    dims: BipartiteDims
    moments: dict[str, MomentVector]
    verdicts: list[CriterionVerdict]
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def entangled(self) -> bool:
        return any(v.entangled for v in self.verdicts)

    @property
    def diagnostics_ok(self) -> bool:
        return all(d.ok for d in self.diagnostics)

    def verdict(self, criterion_id: str) -> CriterionVerdict:
        for v in self.verdicts:
            if v.criterion_id == criterion_id:
                return v
        raise KeyError(criterion_id)

    def margins(self) -> dict[str, float]:
        return {v.criterion_id: v.margin for v in self.verdicts}

    def to_dict(self) -> dict:
        return {
            "dA": self.dims.dA,
            "dB": self.dims.dB,
            "moments": {kind: list(m.values) for kind, m in self.moments.items()},
            "verdicts": [v.to_dict() for v in self.verdicts],
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "entangled": self.entangled,
        }


def run_all(s: DensityMatrix, criteria: str | Iterable[str] | None = None, tol: float = TOL_CRIT) -> AnalysisReport:
    """Evaluate the selected criterion families (default: all) and every diagnostic on one state."""
    ms = StateMoments.of(s)
    verdicts = []
    for name in parse_criteria(criteria):
        verdicts.extend(CRITERIA[name](ms, tol))
    diagnostics = [norm_inequality_check(ms), *gram_r_checks(ms), *thm3_q_hankel_test(ms)]
    return AnalysisReport(s.dims, {"R": ms.r, "Q": ms.q, "P": ms.p}, verdicts, diagnostics)
