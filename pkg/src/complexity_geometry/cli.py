"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 infeasible budget, 3 invariant
violation.  Output files are written to a temporary name and renamed only
once the command has succeeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

from . import bounds, verify
from .compiler import (
    ORDERS,
    Budget,
    BudgetInfeasible,
    compile_path,
    leading_error_norm2,
    pairwise_bound,
    trotter_order,
    trotter_product,
)
from .linalg import dense, expm_hermitian, norm_fbar, norm_op
from .path import Hamiltonian, Path, Segment, complexity_length, geodesic_drift, geodesic_samples, normalize
from .sampling import random_hamiltonian, random_path, trial_rng
from .schedule import PenaltySchedule
from .serialize import atomic_write, csv_text, dumps

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_VIOLATION = 0, 1, 2, 3

BOUND_COLUMNS = ["schedule", "N", "L", "error", "kind", "threshold", "n_cheap", "bound", "variant"]


class InputError(Exception):
    pass


def _load_json_arg(value: str, what: str):
    text = value
    if not value.lstrip().startswith(("{", "[")):
        try:
            with open(value) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {what} file {value!r}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} is not valid JSON: {exc}") from None


def load_schedule(value: str, n_qubits: Optional[int]) -> PenaltySchedule:
    desc = _load_json_arg(value, "schedule")
    if not isinstance(desc, dict):
        raise InputError("schedule descriptor must be a JSON object")
    if n_qubits is not None and "n_qubits" in desc and int(desc["n_qubits"]) != n_qubits:
        raise InputError(f"schedule is for {desc['n_qubits']} qubits, expected {n_qubits}")
    try:
        return PenaltySchedule.from_descriptor(desc, n_qubits)
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad schedule: {exc}") from None


def load_path(value: str) -> Path:
    data = _load_json_arg(value, "path")
    try:
        return Path.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad path JSON: {exc}") from None


def _emit(args, payload: dict, rows: Optional[list] = None, columns: Optional[list] = None, indent: int = 1) -> None:
    if args.format == "csv":
        if rows is None:
            raise InputError(f"{args.command} has no CSV form")
        atomic_write(args.out, csv_text(rows, columns))
    else:
        atomic_write(args.out, dumps(payload, indent=indent))


def _require_n(args) -> int:
    if args.n is None:
        raise InputError("--n is required")
    if not 1 <= args.n <= 10:
        raise InputError("--n must be between 1 and 10")
    return args.n


# -- subcommands ---------------------------------------------------------------


def cmd_compile(args) -> int:
    if args.error is None or not args.error > 0:
        raise InputError("--error must be a positive number")
    if args.path:
        p = load_path(args.path)
    else:
        n = _require_n(args)
        rng = trial_rng(args.seed, 0)
        p = random_path(rng, n, 3, total_time=1.0)
    if args.schedule is None:
        raise InputError("--schedule is required")
    s = load_schedule(args.schedule[0], p.n_qubits)
    try:
        p = normalize(p)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    circuit, report = compile_path(p, s, Budget(args.error, args.error_kind), order=args.trotter_order, delta=args.delta)
    payload = {"report": report.to_json(), "circuit": circuit.to_json()}
    if args.report:
        atomic_write(args.report, dumps(report.to_json(), indent=1))
        payload = circuit.to_json()
    # circuits are large; keep them compact
    _emit(args, payload, indent=0)
    return EXIT_OK


def cmd_verify(args) -> int:
    n = args.n if args.n is not None else 3
    if not 1 <= n <= 6:
        raise InputError("verify supports 1 <= --n <= 6")
    trials = args.trials if args.trials is not None else 200
    if trials < 1:
        raise InputError("--trials must be positive")
    result = verify.run_all(n, trials, args.seed, fault=args.inject_fault)
    rows = [{k: c[k] for k in ("name", "trials", "failures", "worst_slack", "passed")} for c in result["checks"]]
    _emit(args, result, rows, ["name", "trials", "failures", "worst_slack", "passed"])
    if not result["passed"]:
        for c in result["checks"]:
            if not c["passed"]:
                print(f"violation: {c['name']} failed {c['failures']}/{c['trials']}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_bounds(args) -> int:
    n = _require_n(args)
    if args.length is None or not args.length > 0:
        raise InputError("--length must be a positive number")
    if args.error is None or not args.error > 0:
        raise InputError("--error must be a positive number")
    if not args.schedule:
        raise InputError("at least one --schedule is required")
    rows, details = [], []
    for value in args.schedule:
        s = load_schedule(value, n)
        q = bounds.BoundQuery(n, s, args.length, args.error, args.error_kind)
        row = bounds.bound_row(q)
        rows.append(row)
        details.append(
            {
                **row,
                "schedule_descriptor": s.descriptor(),
                "diameter_unitary": bounds.diameter_lowerbound_unitary(s),
                "diameter_unitary_simplified": bounds.diameter_simplified_unitary(s),
                "diameter_state": bounds.diameter_lowerbound_state(s),
                "diameter_state_simplified": bounds.diameter_simplified_state(s),
                "trivial_cap": bounds.trivial_gate_cap(n),
                **bounds.op_vs_complexity_sandwich(s),
            }
        )
    _emit(args, {"rows": details, "note": "diameter values are order-of-magnitude estimates"}, rows, BOUND_COLUMNS)
    return EXIT_OK


def cmd_geodesic(args) -> int:
    if args.path:
        p = load_path(args.path)
        h0 = p.segments[0].hamiltonian.without_identity()[0]
        n = p.n_qubits
    else:
        n = _require_n(args)
        h0 = random_hamiltonian(trial_rng(args.seed, 0), n)
    if n > 5:
        raise InputError("geodesic integration supports at most 5 qubits")
    if h0.norm_fbar() == 0:
        raise InputError("initial Hamiltonian is zero")
    h0 = h0.scaled(1.0 / h0.norm_fbar())
    if args.schedule is None:
        raise InputError("--schedule is required")
    s = load_schedule(args.schedule[0], n)
    if not (0 < args.dt <= args.time):
        raise InputError("need 0 < --dt <= --time")
    try:
        steps, states = geodesic_samples(h0, s, args.time, args.dt)
    except FloatingPointError as exc:
        raise InputError(str(exc)) from None
    segs = tuple(Segment(t, Hamiltonian.from_vector(n, v)) for t, v in zip(steps, states))
    drift = geodesic_drift(states, s)
    path = Path(n, segs)
    drift["complexity_length"] = complexity_length(path, s)
    _emit(args, {"path": path.to_json(), "drift": drift, "schedule": s.descriptor()}, indent=0)
    return EXIT_OK


def cmd_trotter_order(args) -> int:
    n = args.n if args.n is not None else 4
    if not 1 <= n <= 8:
        raise InputError("trotter-order supports 1 <= --n <= 8")
    trials = args.trials if args.trials is not None else 100
    n_terms = args.terms
    if not 1 <= n_terms <= 4**n - 1:
        raise InputError(f"--terms must be between 1 and {4**n - 1}")
    delta = args.delta if args.delta is not None else 0.1
    rows = []
    violated = False
    for i in range(trials):
        h = random_hamiltonian(trial_rng(args.seed, i), n, n_terms=n_terms)
        g, nv = trotter_order(h, "greedy"), trotter_order(h, "naive")
        row = {
            "trial": i,
            "greedy_leading": leading_error_norm2(g),
            "naive_leading": leading_error_norm2(nv),
            "pairwise_bound": pairwise_bound(h),
            "half_square": 0.5 * h.norm_fbar() ** 4,
        }
        exact = expm_hermitian(dense(h), delta)
        dg, dn = trotter_product(g, delta) - exact, trotter_product(nv, delta) - exact
        row.update(
            greedy_fbar=norm_fbar(dg),
            naive_fbar=norm_fbar(dn),
            greedy_op=norm_op(dg),
            naive_op=norm_op(dn),
            ratio_fbar=norm_fbar(dg) / norm_fbar(dn) if norm_fbar(dn) > 0 else math.nan,
        )
        row["guarantee_holds"] = row["greedy_leading"] <= row["pairwise_bound"] * (1 + 1e-12) + 1e-15
        violated |= not row["guarantee_holds"]
        rows.append(row)
    columns = list(rows[0].keys())
    config = {"n_qubits": n, "terms": n_terms, "trials": trials, "seed": args.seed, "delta": delta}
    _emit(args, {"config": config, "trials": rows}, rows, columns)
    return EXIT_VIOLATION if violated else EXIT_OK


COMMANDS = {
    "compile": cmd_compile,
    "verify": cmd_verify,
    "bounds": cmd_bounds,
    "geodesic": cmd_geodesic,
    "trotter-order": cmd_trotter_order,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="complexity-geometry", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--n", type=int, help="number of qubits")

    c = sub.add_parser("compile", help="compile a path to two-local gates")
    common(c)
    c.add_argument("--path", help="path JSON file or inline JSON (default: seeded random path)")
    c.add_argument("--schedule", action="append", help="schedule JSON file or inline JSON")
    c.add_argument("--error", type=float, help="target error")
    c.add_argument("--error-kind", choices=("killing", "op"), default="killing")
    c.add_argument("--delta", type=float, help="override the window length")
    c.add_argument("--trotter-order", choices=ORDERS, default="greedy")
    c.add_argument("--report", help="write the report here and the circuit to --out")

    v = sub.add_parser("verify", help="run the randomized inequality suites")
    common(v)
    v.add_argument("--trials", type=int)
    v.add_argument("--inject-fault", choices=verify.FAULTS, help=argparse.SUPPRESS)

    b = sub.add_parser("bounds", help="tabulate gate-count and diameter bounds")
    common(b)
    b.add_argument("--schedule", action="append", help="schedule JSON (repeatable)")
    b.add_argument("--length", "-L", type=float, help="complexity length L")
    b.add_argument("--error", type=float)
    b.add_argument("--error-kind", choices=("killing", "op"), default="killing")

    g = sub.add_parser("geodesic", help="integrate the geodesic equation")
    common(g)
    g.add_argument("--path", help="take the initial Hamiltonian from this path's first segment")
    g.add_argument("--schedule", action="append")
    g.add_argument("--time", type=float, default=1.0)
    g.add_argument("--dt", type=float, default=1e-3)

    t = sub.add_parser("trotter-order", help="compare greedy and naive Trotter orderings")
    common(t)
    t.add_argument("--trials", type=int)
    t.add_argument("--terms", type=int, default=50)
    t.add_argument("--delta", type=float, help="time step for the measured Trotter error (default 0.1)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except BudgetInfeasible as exc:
        print(f"error: infeasible budget: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
