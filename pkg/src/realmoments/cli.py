"""Command-line front end: analyze, sweep, threshold, audit, plot.

Exit codes: 0 no entanglement found / success, 1 usage or input error,
2 some criterion certified entanglement (``analyze``), 3 an audit invariant
failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .criteria import CRITERIA, TOL_CRIT, AnalysisReport, StateMoments, parse_criteria, run_all
from .errors import RealMomentsError
from .reshape import BipartiteDims
from .states import DensityMatrix, load_state, random_density, random_separable, save_state, werner

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ENTANGLED = 2
EXIT_INVARIANT = 3

BISECTION_TOL = 1e-10


class CliError(Exception):
    """Reported on stderr with exit code 1."""


@dataclass(frozen=True)
class Family:
    make: Callable[[float], DensityMatrix]
    lo: float
    hi: float


FAMILIES: dict[str, Family] = {"werner": Family(werner, 0.0, 1.0)}


@dataclass(frozen=True)
class SweepSpec:
    family: str = "werner"
    param_start: float = 0.0
    param_end: float = 1.0
    steps: int = 101
    criteria: str = "all"

    def validate(self) -> Family:
        if self.family not in FAMILIES:
            raise CliError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        fam = FAMILIES[self.family]
        if self.steps < 2:
            raise CliError(f"--steps must be >= 2, got {self.steps}")
        if not self.param_start < self.param_end:
            raise CliError(f"start ({self.param_start}) must be below end ({self.param_end})")
        if self.param_start < fam.lo or self.param_end > fam.hi:
            raise CliError(f"{self.family} parameter range is [{fam.lo}, {fam.hi}]")
        try:
            parse_criteria(self.criteria)
        except ValueError as exc:
            raise CliError(str(exc)) from None
        return fam


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# -- analyze -------------------------------------------------------------------


def report_document(report: AnalysisReport, descriptor: str, timestamp: bool = True) -> str:
    meta = {
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else None,
    }
    doc = {"meta": meta, "state": descriptor, **report.to_dict()}
    return json.dumps(doc, indent=2) + "\n"


def cmd_analyze(path: str, criteria: str = "all", timestamp: bool = True) -> tuple[str, int]:
    state = load_state(path)
    report = run_all(state, criteria)
    code = EXIT_ENTANGLED if report.entangled else EXIT_OK
    return report_document(report, str(path), timestamp), code


# -- sweep ---------------------------------------------------------------------


def sweep_table(spec: SweepSpec) -> tuple[list[str], list[list[float]]]:
    fam = spec.validate()
    header: list[str] | None = None
    rows = []
    for p in np.linspace(spec.param_start, spec.param_end, spec.steps):
        report = run_all(fam.make(float(p)), spec.criteria)
        r = report.moments["R"]
        margins = report.margins()
        if header is None:
            header = ["param", "r1", "r2", "r3", "f", *(cid.lower() for cid in margins)]
        rows.append([float(p), r[1], r[2], r[3], r[3] - r[2] ** 2, *margins.values()])
    return header, rows


def cmd_sweep(spec: SweepSpec) -> str:
    """CSV with one row per grid point (both endpoints included), 17 significant digits."""
    header, rows = sweep_table(spec)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


# -- threshold -----------------------------------------------------------------


def _criterion_family(criterion_id: str) -> str:
    if criterion_id in ("thm1", "cor1", "ccnr", "ppt"):
        return criterion_id
    if criterion_id.startswith("thm2_"):
        return "thm2"
    if criterion_id == "p3" or criterion_id.startswith("pt_"):
        return "pt"
    raise CliError(f"unknown criterion {criterion_id!r}")


def criterion_margin(state: DensityMatrix, criterion_id: str) -> float:
    family = _criterion_family(criterion_id)
    for v in CRITERIA[family](StateMoments.of(state), TOL_CRIT):
        if v.criterion_id == criterion_id:
            return v.margin
    raise CliError(f"criterion {criterion_id!r} is not defined for {state.dims} states")


def find_threshold(family: str, criterion_id: str, scan_steps: int = 101, tol: float = BISECTION_TOL) -> float:
    """Parameter value where the criterion margin changes sign.

    A coarse scan (margins within the verdict tolerance count as zero) must
    show exactly one sign change; bisection on the raw margin sign then
    narrows the bracket below ``tol`` and returns its midpoint.
    """
    if family not in FAMILIES:
        raise CliError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    if scan_steps < 2:
        raise CliError(f"--steps must be >= 2, got {scan_steps}")
    fam = FAMILIES[family]

    def margin(p: float) -> float:
        return criterion_margin(fam.make(p), criterion_id)

    signed = []
    for p in np.linspace(fam.lo, fam.hi, scan_steps):
        m = margin(float(p))
        if abs(m) > TOL_CRIT:
            signed.append((float(p), 1 if m > 0 else -1))
    changes = [(a, b) for a, b in zip(signed, signed[1:]) if a[1] != b[1]]
    if len(changes) != 1:
        raise CliError(
            f"{criterion_id} margin on {family} changes sign {len(changes)} times on the pre-scan; expected exactly once"
        )
    (lo, lo_sign), (hi, _) = changes[0]
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        m = margin(mid)
        if (1 if m >= 0 else -1) == lo_sign:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cmd_threshold(family: str, criterion_id: str, scan_steps: int = 101) -> str:
    return _fmt(find_threshold(family, criterion_id, scan_steps)) + "\n"


# -- audit ---------------------------------------------------------------------

CROSS_TOL = 1e-10


def derive_seed(seed: int, *keys: int) -> int:
    """Independent 64-bit seed for one (dims, ensemble, sample) triple."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1, np.uint64)[0])


def state_invariants(state: DensityMatrix, report: AnalysisReport, separable: bool) -> list[str]:
    """Invariants this state/report pair violates, as ``category[:detail]`` strings."""
    bad = []
    for d in report.diagnostics:
        if not d.ok:
            bad.append("norm_ineq" if d.check_id == "norm_ineq" else f"gram:{d.check_id}")
    purity = state.purity()
    if abs(report.moments["R"][2] - purity) > CROSS_TOL or abs(report.moments["P"][2] - purity) > CROSS_TOL:
        bad.append("cross_identity")
    flagged = {v.criterion_id for v in report.verdicts if v.entangled}
    if "thm1" in flagged and "ccnr" not in flagged:
        bad.append("implication_thm1_ccnr")
    if ("thm1" in flagged) != ("thm2_B1" in flagged):
        bad.append("equivalence_thm1_b1")
    if any(c == "p3" or c.startswith("pt_") for c in flagged) and "ppt" not in flagged:
        bad.append("ppt_dominance")
    if separable and flagged:
        bad.append("soundness:" + ",".join(sorted(flagged)))
    return bad


@dataclass
class AuditResult:
    text: str
    violations: list[tuple[str, DensityMatrix]]

    @property
    def ok(self) -> bool:
        return not self.violations


ENSEMBLES = ("ginibre", "separable")
INVARIANTS = ("norm_ineq", "gram", "cross_identity", "implication_thm1_ccnr", "equivalence_thm1_b1", "ppt_dominance", "soundness")


def run_audit(dims_list: Sequence[BipartiteDims], num_samples: int, seed: int) -> AuditResult:
    """Sample Ginibre and separable states per dims and check every all-state invariant."""
    if num_samples < 1:
        raise CliError(f"--samples must be >= 1, got {num_samples}")
    lines = [f"audit seed={seed} samples={num_samples}", "", f"{'dims':<6}{'ensemble':<11}{'criterion':<11}{'detected':>9}{'states':>8}"]
    inv_counts: dict[str, int] = {}
    violations: list[tuple[str, DensityMatrix]] = []
    for dims in dims_list:
        for e, ensemble in enumerate(ENSEMBLES):
            detected: dict[str, int] = {}
            for i in range(num_samples):
                sample_seed = derive_seed(seed, dims.dA, dims.dB, e, i)
                if ensemble == "ginibre":
                    state = random_density(dims, sample_seed)
                else:
                    state = random_separable(dims, 1 + i % 4, sample_seed)
                report = run_all(state)
                for v in report.verdicts:
                    detected[v.criterion_id] = detected.get(v.criterion_id, 0) + v.entangled
                bad = state_invariants(state, report, ensemble == "separable")
                for name in bad:
                    key = name.split(":")[0]
                    inv_counts[key] = inv_counts.get(key, 0) + 1
                if bad:
                    violations.append((f"{dims}_{ensemble}_{i}_seed{sample_seed}: {'; '.join(bad)}", state))
            for cid, n in detected.items():
                lines.append(f"{str(dims):<6}{ensemble:<11}{cid:<11}{n:>9}{num_samples:>8}")
    lines += ["", f"{'invariant':<24}{'violations':>10}"]
    for name in INVARIANTS:
        lines.append(f"{name:<24}{inv_counts.get(name, 0):>10}")
    lines.append(f"{'states_with_violations':<24}{len(violations):>10}")
    return AuditResult("\n".join(lines) + "\n", violations)


# -- plot ----------------------------------------------------------------------

_PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Plot f = r3 - r2^2 against the sweep parameter.

Usage: python {{this file}} [output.png]
"""
import csv
import io
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

DATA = """\\
{data}"""
THRESHOLD = {threshold}

rows = list(csv.DictReader(io.StringIO(DATA)))
param = [float(row["param"]) for row in rows]
f = [float(row["f"]) for row in rows]

fig, ax = plt.subplots(figsize=(5, 3.5))
ax.plot(param, f, color="tab:blue", label="f = r3 - r2^2")
ax.axhline(0.0, color="gray", linewidth=0.8)
if THRESHOLD is not None:
    ax.axvline(THRESHOLD, color="tab:red", linestyle="--", label="threshold %.4f" % THRESHOLD)
ax.set_xlabel("p")
ax.set_ylabel("f")
ax.legend()
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "f_vs_param.png", dpi=150)
'''


def cmd_plot(csv_text: str) -> str:
    """Self-contained matplotlib script for the ``param``/``f`` columns of a sweep CSV."""
    reader = csv.DictReader(io.StringIO(csv_text))
    if reader.fieldnames is None:
        raise CliError("sweep CSV is empty")
    missing = [c for c in ("param", "f") if c not in reader.fieldnames]
    if missing:
        raise CliError(f"sweep CSV lacks column(s) {', '.join(missing)}")
    pairs = []
    for lineno, row in enumerate(reader, start=2):
        try:
            float(row["param"]), float(row["f"])
        except (TypeError, ValueError):
            raise CliError(f"sweep CSV line {lineno}: non-numeric param/f") from None
        pairs.append((row["param"], row["f"]))
    if not pairs:
        raise CliError("sweep CSV has no data rows")
    threshold = None
    for (p0, f0), (p1, f1) in zip(pairs, pairs[1:]):
        a, b = float(f0), float(f1)
        if a >= 0 > b or a < 0 <= b:
            x0, x1 = float(p0), float(p1)
            threshold = _fmt(x0 + (x1 - x0) * a / (a - b))
            break
    data = "param,f\n" + "".join(f"{p},{f}\n" for p, f in pairs)
    return _PLOT_TEMPLATE.format(data=data, threshold=threshold if threshold is not None else "None")


# -- entry point ---------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="realmoments", description="Entanglement detection from realignment moments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, criteria=True):
        p.add_argument("--out", help="write output to PATH instead of stdout")
        p.add_argument("--no-timestamp", action="store_true", help="omit wall-clock metadata")
        if criteria:
            p.add_argument("--criteria", default="all", help=f"comma list from {', '.join(CRITERIA)} (default all)")

    p = sub.add_parser("analyze", help="run every criterion on a state file")
    p.add_argument("path")
    common(p)

    p = sub.add_parser("sweep", help="criterion margins over a one-parameter family, as CSV")
    p.add_argument("--family", default="werner", choices=sorted(FAMILIES))
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--end", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    common(p)

    p = sub.add_parser("threshold", help="bisect the parameter where a criterion starts detecting")
    p.add_argument("--family", default="werner", choices=sorted(FAMILIES))
    p.add_argument("--criterion", default="thm1", help="criterion id, e.g. thm1, ccnr, ppt, cor1, p3, thm2_B1")
    p.add_argument("--steps", type=int, default=101, help="pre-scan grid size")
    common(p, criteria=False)

    p = sub.add_parser("audit", help="randomized invariant and soundness audit")
    p.add_argument("--dims", default="2x2,2x3,3x3", help="comma list such as 2x2,2x3")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repro-dir", default=".", help="where offending states are written")
    common(p, criteria=False)

    p = sub.add_parser("plot", help="emit a matplotlib script plotting f from a sweep CSV")
    p.add_argument("csv")
    common(p, criteria=False)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dims_list(text: str) -> list[BipartiteDims]:
    return [BipartiteDims.parse(t) for t in text.split(",") if t.strip()]


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors and --help both land here; report the code instead of raising
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        if args.command == "analyze":
            text, code = cmd_analyze(args.path, args.criteria, timestamp=not args.no_timestamp)
            _emit(text, args.out)
            return code
        if args.command == "sweep":
            spec = SweepSpec(args.family, args.start, args.end, args.steps, args.criteria)
            _emit(cmd_sweep(spec), args.out)
            return EXIT_OK
        if args.command == "threshold":
            _emit(cmd_threshold(args.family, args.criterion, args.steps), args.out)
            return EXIT_OK
        if args.command == "audit":
            result = run_audit(_dims_list(args.dims), args.samples, args.seed)
            _emit(result.text, args.out)
            if not result.ok:
                for label, state in result.violations:
                    name = label.split(":")[0]
                    path = os.path.join(args.repro_dir, f"audit_violation_{name}.json")
                    save_state(state, path)
                    print(f"invariant violation {label}; state written to {path}", file=sys.stderr)
                return EXIT_INVARIANT
            return EXIT_OK
        if args.command == "plot":
            with open(args.csv, encoding="utf-8") as fh:
                _emit(cmd_plot(fh.read()), args.out)
            return EXIT_OK
    except (CliError, RealMomentsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
