"""Command-line interface.

Exit codes: 0 success, 1 property violation, 2 usage or parse error,
3 dimension mismatch, 4 invalid projector family.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels, matrixio
from .channels import ProjectorFamily, measure, pinch
from .divergences import EntropicIndex, q_divergence, q_divergence_form2, tsallis_entropy
from .errors import DimensionMismatch, InvalidProjectorFamily, QDivError, ValidationError
from .propcheck import SUITES, TrialConfig, run_suite
from .spectral import validate_density
from .tolerances import scaled_tolerances, tol

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_DIM, EXIT_FAMILY = 0, 1, 2, 3, 4
SUITE_CHOICES = [*SUITES, "all"]


@dataclass
class RunReport:
    command: list
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    reports: list = field(default_factory=list)
    backend: str = kernels.BACKEND
    exit_code: int = 0
    wall_time: float = 0.0

    def add(self, name: str, operation: str, value) -> None:
        if isinstance(value, np.ndarray):
            value = {"re": value.real.tolist(), "im": value.imag.tolist()}
        elif isinstance(value, (np.floating, np.integer)):
            value = value.item()
        self.outputs.append({"name": name, "operation": operation, "value": value})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["reports"] = [r.to_dict() for r in self.reports]
        return d


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- argument types -------------------------------------------------------------


def _q_value(text: str) -> float:
    try:
        return EntropicIndex(float(text)).q
    except (ValueError, ValidationError):
        raise argparse.ArgumentTypeError(
            f"invalid q {text!r}: q must lie in the open interval (0, 1)"
        ) from None


def _q_list(text: str) -> tuple:
    return tuple(_q_value(t) for t in text.split(",") if t.strip())


def _dims(text: str) -> tuple:
    out = []
    try:
        for part in text.split(","):
            if "-" in part:
                lo, hi = (int(x) for x in part.split("-"))
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid dims {text!r}; use e.g. 2-8 or 2,4,8") from None
    if not out or min(out) < 2:
        raise argparse.ArgumentTypeError("dims must all be >= 2")
    return tuple(out)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        v = 0
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        v = -1
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _scale(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        v = 0.0
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance scale must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--out", type=Path, help="also write the JSON report to this path")
    common.add_argument("--tol-scale", type=_scale, default=1.0,
                        help="multiply every tolerance (diagnostics only)")
    common.add_argument("--seed", type=_seed, default=42)
    common.add_argument("--trials", type=_positive_int, default=1000,
                        help="trials per (dim, q) cell")
    common.add_argument("--dims", type=_dims, default=tuple(range(2, 9)))

    parser = argparse.ArgumentParser(prog="qdiv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", parents=[common], help="quantum q-divergence of two states")
    p.add_argument("rho", type=Path)
    p.add_argument("sigma", type=Path)
    p.add_argument("--q", type=_q_value, required=True)

    p = sub.add_parser("entropy", parents=[common], help="Tsallis entropy of a state")
    p.add_argument("rho", type=Path)
    p.add_argument("--q", type=_q_value, required=True)

    p = sub.add_parser("measure", parents=[common], help="projective measurement of a state")
    p.add_argument("rho", type=Path)
    p.add_argument("projectors", type=Path)

    p = sub.add_parser("check", parents=[common], help="run randomized property suites")
    p.add_argument("suite", choices=SUITE_CHOICES)
    p.add_argument("--q", type=_q_list, default=None, help="comma-separated q grid")
    p.add_argument("--workers", type=_positive_int, default=1)
    return parser


# -- commands -----------------------------------------------------------------


def _state(path: Path):
    return validate_density(matrixio.read_matrix(path))


def cmd_divergence(rho_path, sigma_path, q: float, report: RunReport) -> RunReport:
    rho, sigma = _state(rho_path), _state(sigma_path)
    report.inputs = {str(rho_path): matrixio.digest(rho_path),
                     str(sigma_path): matrixio.digest(sigma_path)}
    k3 = q_divergence(rho, sigma, q).value
    k2 = q_divergence_form2(rho, sigma, q).value
    report.add("q", "input", q)
    report.add("K_q", "q_divergence", k3)
    report.add("K_q_form2", "q_divergence_form2", k2)
    report.add("abs_difference", "|q_divergence - q_divergence_form2|", abs(k3 - k2))
    return report


def cmd_entropy(rho_path, q: float, report: RunReport) -> RunReport:
    rho = _state(rho_path)
    report.inputs = {str(rho_path): matrixio.digest(rho_path)}
    report.add("q", "input", q)
    report.add("S_q", "tsallis_entropy", tsallis_entropy(rho, q))
    return report


def cmd_measure(rho_path, projectors_path, report: RunReport) -> RunReport:
    rho = _state(rho_path)
    family = ProjectorFamily.from_projectors(matrixio.read_projectors(projectors_path))
    report.inputs = {str(rho_path): matrixio.digest(rho_path),
                     str(projectors_path): matrixio.digest(projectors_path)}
    outcomes = measure(rho, family)
    pinched = pinch(rho, family)
    report.add("p", "measure", [o.probability for o in outcomes])
    report.add("pinched", "pinch", np.asarray(pinched.matrix))
    report.add("trace_residual", "|Tr(pinch(rho)) - Tr(rho)|",
               abs(np.trace(pinched.matrix).real - np.trace(rho.matrix).real))
    return report


def cmd_check(suite: str, dims, q_values, trials: int, seed: int, workers: int,
              report: RunReport) -> RunReport:
    names = list(SUITES) if suite == "all" else [suite]
    for name in names:
        rep = run_suite(TrialConfig(name, dims, q_values, trials, seed, workers))
        report.reports.append(rep)
        if not rep.passed:
            report.exit_code = EXIT_VIOLATION
    return report


# -- output -------------------------------------------------------------------


def _format_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".10g")
    if isinstance(v, list):
        return "[" + ", ".join(_format_value(x) for x in v) + "]"
    return str(v)


def render_text(report: RunReport) -> str:
    lines = [f"qdiv {' '.join(report.command)}"]
    for o in report.outputs:
        v = o["value"]
        if isinstance(v, dict) and "re" in v:
            m = np.array(v["re"]) + 1j * np.array(v["im"])
            block = np.array2string(m, precision=6, suppress_small=True, max_line_width=120)
            lines.append(f"{o['name']:<16} ({o['operation']})")
            lines.extend("    " + row for row in block.splitlines())
        else:
            lines.append(f"{o['name']:<16} {_format_value(v):<24} ({o['operation']})")
    if report.reports:
        lines.append(f"{'suite':<22}{'trials':>8}{'viol':>7}{'worst_margin':>16}{'time[s]':>9}  status")
        for r in report.reports:
            status = "PASS" if r.violations == 0 else ("FAIL" if r.asserting else "NOTE")
            lines.append(f"{r.suite:<22}{r.trials_run:>8}{r.violations:>7}"
                         f"{r.worst_margin:>16.3e}{r.elapsed:>9.2f}  {status}")
        for r in report.reports:
            if r.violations and r.asserting:
                lines.append(f"  {r.suite}: worst_margin={r.worst_margin!r} "
                             f"reproduce with seed={r.seed} trial={r.worst_trial}")
            if r.details:
                det = ", ".join(f"{k}={_format_value(v)}" for k, v in sorted(r.details.items()))
                lines.append(f"  {r.suite}: {det}")
    lines.append("tolerances: " + ", ".join(f"{k}={v:.0e}" for k, v in report.tolerances.items()))
    return "\n".join(lines)


def _run(args, report: RunReport) -> RunReport:
    if args.command == "divergence":
        return cmd_divergence(args.rho, args.sigma, args.q, report)
    if args.command == "entropy":
        return cmd_entropy(args.rho, args.q, report)
    if args.command == "measure":
        return cmd_measure(args.rho, args.projectors, report)
    return cmd_check(args.suite, args.dims, args.q, args.trials, args.seed, args.workers, report)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    report = RunReport(command=argv)
    with scaled_tolerances(args.tol_scale):
        report.tolerances = tol().as_dict()
        try:
            _run(args, report)
        except InvalidProjectorFamily as exc:
            return _fail(EXIT_FAMILY, exc)
        except DimensionMismatch as exc:
            return _fail(EXIT_DIM, exc)
        except (ValidationError, QDivError) as exc:
            return _fail(EXIT_USAGE, exc)
    report.wall_time = time.perf_counter() - start

    payload = json.dumps(report.to_dict(), indent=2, allow_nan=False)
    if args.out is not None:
        args.out.write_text(payload + "\n")
    print(payload if args.json else render_text(report))
    return report.exit_code


def _fail(code: int, exc: Exception) -> int:
    print(f"qdiv: error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
