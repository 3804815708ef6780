"""Build protocols from specs, estimate biases and attach bounds."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ..boolfn import parse_function
from ..bounds import BoundSheet, bound_sheet, thm44_upper
from ..frac import CSV_COLUMNS, BiasReport, ProtocolConfig, build_protocol, exact_bias, mc_bias
from ..frac.estimate import _json_default, default_jobs, format_number
from ..frac.protocols import EXACT_BUDGET, CoveringProtocol
from .config import ExperimentSpec

EXIT_OK, EXIT_ERROR, EXIT_VACUOUS = 0, 1, 2
SWEEP_COLUMNS = CSV_COLUMNS + ("ratio", "error")
LOWER_KEY = {"rac_sr": "rac_sr", "qrac_sr": "qrac_sr", "earac": "earac", "rac_pr": "rac_pr"}


class HarnessError(RuntimeError):
    """Module failure tagged with the module and the offending parameters."""


@dataclass
class RunResult:
    report: BiasReport
    sheet: BoundSheet | None
    vacuous: bool
    audit: dict | None = None

    @property
    def exit_code(self) -> int:
        return EXIT_VACUOUS if self.vacuous else EXIT_OK

    def to_json(self) -> str:
        payload = {"report": self.report.to_dict(),
                   "bounds": self.sheet.as_dict() if self.sheet else None}
        if self.audit is not None:
            payload["audit"] = self.audit
        return json.dumps(payload, indent=2, default=_json_default) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerow(self.report.csv_row())
        return buf.getvalue()


def _module_of(spec: ExperimentSpec) -> str:
    return {"prrac": "prbox"}.get(spec.protocol, "frac")


def make_protocol(spec: ExperimentSpec):
    try:
        f = parse_function(spec.f, spec.k)
    except ValueError as exc:
        raise HarnessError(f"boolfn: f={spec.f!r}, k={spec.k}: {exc}") from exc
    try:
        cfg = ProtocolConfig(resource=spec.protocol, n=spec.n, f=f, m=spec.m, ell=spec.ell,
                             radius=spec.radius, delta=spec.delta, seed=spec.seed)
        return build_protocol(cfg)
    except (ValueError, RuntimeError) as exc:
        raise HarnessError(f"{_module_of(spec)}: protocol={spec.protocol}, n={spec.n}, m={spec.m}, "
                           f"ell={spec.ell}, f={spec.f}: {exc}") from exc


def _bound_m(spec: ExperimentSpec, protocol) -> int:
    if spec.protocol in ("rac_sr", "qrac_sr", "earac"):
        return spec.m
    return max(1, math.ceil(protocol.m - 1e-9))


def attach_bounds(spec: ExperimentSpec, protocol, report: BiasReport):
    """Fill stab_lower / thm44_upper; returns the sheet and the vacuity flag."""
    f = protocol.f
    m = min(_bound_m(spec, protocol), spec.n)
    try:
        report.thm44_upper = thm44_upper(f, spec.n, m, spec.eta)
    except ValueError:
        report.thm44_upper = None
    sheet = bound_sheet(f, spec.n, m, ell=spec.ell, eta=spec.eta)
    lower_vacuous = True
    if spec.protocol == "prrac":
        report.stab_lower, lower_vacuous = 1.0, False
    elif spec.protocol == "xor_pr" and isinstance(protocol, CoveringProtocol):
        report.stab_lower = protocol.shared_randomness_bias()
        lower_vacuous = report.stab_lower <= 0
    elif spec.protocol in LOWER_KEY and LOWER_KEY[spec.protocol] in sheet.lower:
        entry = sheet.lower[LOWER_KEY[spec.protocol]]
        report.stab_lower = entry.value
        lower_vacuous = entry.vacuous or entry.value <= 0
    upper_vacuous = report.thm44_upper is None or report.thm44_upper >= 1.0
    return sheet, lower_vacuous and upper_vacuous


def estimate(spec: ExperimentSpec, protocol, jobs: int | None = None) -> BiasReport:
    mode = spec.mode
    if mode == "auto":
        feasible = protocol.discrete
        if feasible:
            try:
                feasible = protocol.exact_terms() <= EXACT_BUDGET
            except ValueError:
                feasible = False
        mode = "exact" if feasible else "mc"
    try:
        if mode == "exact":
            return exact_bias(protocol)
        return mc_bias(protocol, spec.trials, spec.seed, jobs=jobs)
    except (ValueError, RuntimeError) as exc:
        raise HarnessError(f"{_module_of(spec)}: mode={mode}, protocol={spec.protocol}, n={spec.n}, "
                           f"m={spec.m}: {exc}") from exc


def _prrac_audit(protocol) -> dict:
    import numpy as np

    audits = protocol.sweep(np.random.default_rng(0)) if protocol.exact_terms() <= 10 ** 5 else []
    if not audits:
        return {"L": protocol.L, "boxes_total": (1 << protocol.L) - 1, "boxes_bob": protocol.L,
                "bits_sent": 1, "correct": None}
    return {"L": protocol.L,
            "boxes_total": max(a.boxes_total for a in audits),
            "boxes_bob": max(a.boxes_bob for a in audits),
            "bits_sent": max(a.bits_sent for a in audits),
            "correct": all(a.correct for a in audits),
            "cases": len(audits)}


def run(spec: ExperimentSpec, jobs: int | None = None) -> RunResult:
    protocol = make_protocol(spec)
    report = estimate(spec, protocol, jobs)
    sheet, vacuous = attach_bounds(spec, protocol, report)
    audit = _prrac_audit(protocol) if spec.protocol == "prrac" else None
    return RunResult(report, sheet, vacuous, audit)


def sweep_row(spec: ExperimentSpec) -> list[str]:
    try:
        result = run(spec, jobs=1)
    except HarnessError as exc:
        row = [spec.protocol, spec.n, spec.m, spec.k if spec.k else "", spec.f, spec.ell]
        row = [format_number(v) for v in row] + [""] * (len(CSV_COLUMNS) - len(row))
        return row + ["", str(exc)]
    report = result.report
    ratio = None
    if report.thm44_upper:
        ratio = report.bias_avg / report.thm44_upper
    return report.csv_row() + [format_number(ratio), ""]


def sweep(cells: list[ExperimentSpec], jobs: int | None = None) -> str:
    """CSV text with one row per cell, in cell-key order."""
    jobs = default_jobs() if jobs is None else max(1, jobs)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_row, cells))
    else:
        rows = [sweep_row(cell) for cell in cells]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()
