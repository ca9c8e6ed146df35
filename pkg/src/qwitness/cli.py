"""qwitness command line: verify, optimize, simulate, sweep, angles.

Exit statuses: 0 success / violation witnessed, 1 completed without a
violation, 2 validation failure, 3 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

from . import __version__, optimizer, simulator
from .documents import dumps_document, dumps_report, load_triple, triple_to_document
from .errors import CapExceededError, PureStateRequiredError, WitnessError
from .matcore import PureState
from .witness import check_ordering, photon_angles, violation_report

EXIT_OK, EXIT_NO_VIOLATION, EXIT_INVALID, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _finite(text):
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return value


def _noise(text):
    try:
        return simulator.NoiseModel.parse(text)
    except WitnessError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qwitness", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="check 0 <= A <= B <= I and the moment gaps of a triple")
    p.add_argument("--triple", required=True, help="triple document (bundled: eq15.json)")
    p.add_argument("--tol", type=_finite, default=1e-9, help="eigenvalue tolerance for the ordering")

    p = sub.add_parser("optimize", help="search for the maximally violating triple")
    p.add_argument("--grid", type=_finite, default=1e-3, help="reduced-grid step, in (0, 0.01]")
    p.add_argument("--tol", type=_finite, default=1e-8, help="local refinement tolerance")
    p.add_argument("--full", action="store_true", help="also run the four-parameter scan")
    p.add_argument("--full-step", type=_finite, default=0.02, help="four-parameter scan step, in (0, 0.05]")
    p.add_argument("--out", help="write the triple document here instead of standard output")

    for name, helptext in (("simulate", "run the two-stage statistical test"), ("sweep", "scan depolarizing noise")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--triple", required=True)
        p.add_argument("--seed", type=_nonneg_int, required=True)
        p.add_argument("--shots", type=int, default=100_000, help="shots per observable and probe state")
        p.add_argument("--significance", type=_finite, default=simulator.DEFAULT_SIGNIFICANCE, help="z threshold")
        p.add_argument(
            "--grid-points",
            type=_nonneg_int,
            default=10 if name == "simulate" else 0,
            help="N adds the poles plus an N x N Bloch-sphere lattice of probe states (0: document state only)",
        )
        p.add_argument("--batch-size", type=_positive_int, default=simulator.DEFAULT_BATCH)
        p.add_argument("--exact", action="store_true", help="use exact expectations instead of sampling")
        p.add_argument("--out")
        if name == "simulate":
            p.add_argument("--noise", type=_noise, default=simulator.NoiseModel(), help="none | depolarizing:P | jitter:SIGMA_DEG[:BATCH]")
        else:
            p.add_argument("--from", dest="p_from", type=_finite, default=0.0)
            p.add_argument("--to", dest="p_to", type=_finite, default=0.4)
            p.add_argument("--steps", type=int, default=81)

    p = sub.add_parser("angles", help="translate a triple into a photon-polarization setup")
    p.add_argument("--triple", required=True)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc.strerror or exc}") from None
    else:
        sys.stdout.write(text)


def _ordering_dict(r) -> dict:
    return {
        "ordered": r.ordered,
        "eig_A_min": r.eig_A_min,
        "eig_BminusA_min": r.eig_BminusA_min,
        "eig_IminusB_min": r.eig_IminusB_min,
        "tol": r.tol,
    }


def _violation_dict(r) -> dict:
    return {
        "witnessed": r.witnessed,
        "first_gap": r.first_gap,
        "second_gap": r.second_gap,
        "min_eig_B2A2": r.min_eig_B2A2,
    }


def _state_dict(s) -> dict:
    if isinstance(s, PureState):
        return {"kind": "pure", "alpha": s.alpha, "beta": s.beta}
    h = s.rho.h
    return {"kind": "mixed", "rho11": h.a11, "rho22": h.a22, "rho12": h.a12}


def cmd_verify(args) -> int:
    triple, _ = load_triple(args.triple)
    if args.tol < 0:
        raise UsageError("--tol must be nonnegative")
    ordering = check_ordering(triple, args.tol)
    violation = violation_report(triple, args.tol)
    sys.stdout.write(dumps_report({"ordering": _ordering_dict(ordering), "violation": _violation_dict(violation)}))
    return EXIT_OK if ordering.ordered else EXIT_INVALID


def cmd_optimize(args) -> int:
    if not 0 < args.grid <= 0.01:
        raise UsageError(f"--grid must lie in (0, 0.01], got {args.grid}")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    if args.full and not 0 < args.full_step <= 0.05:
        raise UsageError(f"--full-step must lie in (0, 0.05], got {args.full_step}")
    try:
        best = optimizer.optimize(args.grid, args.tol)
    except CapExceededError as exc:
        print(f"qwitness: {exc}; best point kept", file=sys.stderr)
        best = exc.best
        status = EXIT_NO_VIOLATION
    else:
        status = EXIT_OK
    meta = {"optimizer": best.metadata()}
    if args.full:
        full = optimizer.full_search(args.full_step)
        meta["full_search"] = full.metadata()
    text = dumps_document(triple_to_document(best.triple, meta))
    summary = {"objective": best.objective, "violation": best.violation, **meta}
    if args.out:
        _emit(text, args.out)
        sys.stdout.write(dumps_report(summary))
    else:
        sys.stdout.write(text)
        print(f"objective {best.objective:.12g}", file=sys.stderr)
    return status


def _plan(args, triple, noise) -> simulator.ExperimentPlan:
    if args.shots < 1:
        raise UsageError(f"--shots must be >= 1, got {args.shots}")
    if not args.exact and args.shots < 2:
        raise UsageError("--shots must be >= 2 to estimate standard errors")
    if not args.significance > 0:
        raise UsageError("--significance must be positive")
    probes = [triple.state]
    if args.grid_points:
        probes += simulator.default_probe_states(args.grid_points, args.grid_points)
    return simulator.ExperimentPlan(
        triple=triple,
        probe_states=probes,
        shots_per_observable=args.shots,
        noise=noise,
        seed=args.seed,
        significance=args.significance,
        exact=args.exact,
        batch_size=args.batch_size,
    )


def _probe_dict(r) -> dict:
    return {
        "index": r.index,
        "mean_A": r.moments_A.mean,
        "mean_B": r.moments_B.mean,
        "mean_sq_A": r.moments_A.mean_sq,
        "mean_sq_B": r.moments_B.mean_sq,
        "first_gap": r.first_gap,
        "first_gap_se": r.first_gap_se,
        "second_gap": r.second_gap,
        "second_gap_se": r.second_gap_se,
        "order_z": r.order_z,
        "violation_z": r.violation_z,
    }


def cmd_simulate(args) -> int:
    triple, _ = load_triple(args.triple)
    plan = _plan(args, triple, args.noise)
    verdict = simulator.run_protocol(plan)
    report = {
        "stage1_pass": verdict.stage1_pass,
        "stage2_violation": verdict.stage2_violation,
        "z_score": verdict.z_score,
        "best_index": verdict.best_index,
        "best_state": _state_dict(verdict.best_state),
        "best": _probe_dict(verdict.best),
        "settings": {
            "shots": plan.shots_per_observable,
            "seed": plan.seed,
            "noise": plan.noise.spec(),
            "significance": plan.significance,
            "probes": len(plan.probe_states),
            "exact": plan.exact,
        },
        "details": [_probe_dict(r) for r in verdict.details],
    }
    _emit(dumps_report(report), args.out)
    return EXIT_OK if verdict.stage2_violation else EXIT_NO_VIOLATION


def cmd_sweep(args) -> int:
    if args.steps < 2:
        raise UsageError(f"--steps must be >= 2, got {args.steps}")
    if not (0 <= args.p_from <= 1 and 0 <= args.p_to <= 1):
        raise UsageError("--from/--to must lie in [0, 1]")
    if args.p_from >= args.p_to:
        raise UsageError(f"inverted or empty range --from {args.p_from} --to {args.p_to}")
    if args.out:
        out = Path(args.out)
        if not out.parent.is_dir():
            raise UsageError(f"cannot write {args.out}: directory does not exist")
    triple, _ = load_triple(args.triple)
    plan = _plan(args, triple, simulator.NoiseModel())
    rows = simulator.sweep(plan, args.p_from, args.p_to, args.steps)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(simulator.SWEEP_HEADER)
    for r in rows:
        writer.writerow(r.csv_fields())
    crossing = simulator.zero_crossing(rows)
    try:
        closed = simulator.noise_threshold(triple)
    except WitnessError:
        closed = None
    summary = {"rows": len(rows), "zero_crossing": crossing, "closed_form_threshold": closed}
    if args.out:
        _emit(buf.getvalue(), args.out)
        sys.stdout.write(dumps_report(summary))
    else:
        sys.stdout.write(buf.getvalue())
        print(f"zero crossing {simulator.format_number(crossing) if crossing is not None else 'none'}", file=sys.stderr)
    return EXIT_OK


def cmd_angles(args) -> int:
    triple, _ = load_triple(args.triple)
    try:
        setup = photon_angles(triple)
    except PureStateRequiredError as exc:
        print(f"qwitness: {exc}; angles describe a pure polarization state", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(
        dumps_report(
            {
                "basis_rotation_deg": setup.basis_rotation_deg,
                "state_angle_deg": setup.state_angle_deg,
                "state_phase_deg": setup.state_phase_deg,
                "outcome_values_B": list(setup.outcome_values_B),
                "outcome_values_A": list(setup.outcome_values_A),
                "b_rotation_deg": setup.b_rotation_deg,
                "warnings": list(setup.warnings),
            }
        )
    )
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "angles": cmd_angles,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except WitnessError as exc:
        print(f"qwitness: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
