"""Command-line front end: compile, verify, gap, pea, count.

Exit codes: 0 success, 2 infeasible strategy, 3 verification mismatch,
4 unresolved peaks.  All sampling flows from --seed; identical invocations
produce byte-identical output files.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bcs import energy_gap, exact_spectrum, load_model, spectrum_to_csv
from .builders import (
    Carryover,
    FixedRange,
    InfeasibleStrategyError,
    Limited,
    Naive,
    Stepwise,
    build_uzz,
)
from .pea import PEAConfig, UnresolvedPeaksError, estimate_gap, result_to_json, run_pea, substeps_for_target
from .resources import ResourceReport, ReportRow, crossover_n, max_n_for_budget, verify_counts
from .sequence import count_ops, effective_unitary, load_sequence, save_sequence

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_VERIFY_FAILED = 3
EXIT_UNRESOLVED = 4


def _strategy_from_name(name: str, p: int | None):
    table = {
        "naive": Naive,
        "stepwise": Stepwise,
        "carryover": Carryover,
        "limited": Limited,
    }
    if name == "fixed-range":
        if p is None:
            raise SystemExit("--strategy fixed-range requires --p")
        return FixedRange(p)
    if name not in table:
        raise SystemExit(f"unknown strategy {name!r}")
    return table[name]()


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _diagonal_target(v: np.ndarray) -> np.ndarray:
    n = v.shape[0]
    idx = np.arange(2**n)
    phases = np.zeros(2**n)
    for m in range(n):
        for l in range(m + 1, n):
            sm = 1 - 2 * ((idx >> (n - 1 - m)) & 1)
            sl = 1 - 2 * ((idx >> (n - 1 - l)) & 1)
            phases = phases + v[m, l] / 2.0 * sm * sl
    return np.diag(np.exp(1j * phases))


def cmd_compile(args) -> int:
    model = load_model(args.model)
    strategy = _strategy_from_name(args.strategy, args.p)
    try:
        seq = build_uzz(model.v, strategy)
    except InfeasibleStrategyError as exc:
        print(f"infeasible strategy: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if args.out:
        save_sequence(seq, args.out)
    else:
        from .sequence import sequence_to_json

        _write(json.dumps(sequence_to_json(seq), sort_keys=True, indent=1) + "\n", None)
    counts = count_ops(seq)
    print(f"compiled {args.strategy}: {counts['bus']} bus operations, "
          f"{counts['local']} locals", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .hybrid import EntangledBusError

    model = load_model(args.model)
    seq = load_sequence(args.sequence)
    target = _diagonal_target(model.v.v)
    try:
        u = effective_unitary(seq, seq.num_qubits)
    except EntangledBusError as exc:
        print(f"FAIL: bus does not disentangle ({exc})")
        return EXIT_VERIFY_FAILED
    phase = np.trace(target.conj().T @ u)
    phase = phase / abs(phase) if abs(phase) > 0 else 1.0
    dev = float(np.max(np.abs(u - phase * target)))
    tol = args.tol
    status = "PASS" if dev < tol else "FAIL"
    print(f"{status}: max deviation {dev:.3e} (tolerance {tol:g})")
    return EXIT_OK if dev < tol else EXIT_VERIFY_FAILED


def cmd_gap(args) -> int:
    model = load_model(args.model)
    sector = model.n_excitations if abs(model.r - 1.0) < 1e-12 else None
    exact = energy_gap(model, sector)
    if args.spectrum_out:
        with open(args.spectrum_out, "w") as fh:
            fh.write(spectrum_to_csv(exact_spectrum(model, sector)))
    lines = [f"exact gap: {exact!r}"]
    code = EXIT_OK
    if args.method in ("pea", "both"):
        cfg = PEAConfig(k=args.k, tau=args.tau, trotter_order=args.order,
                        shots=args.shots, seed=args.seed)
        if args.substeps is not None:
            cfg.trotter_substeps = args.substeps
        else:
            from .pea import build_pea

            tau = build_pea(model, cfg).tau
            cfg.trotter_substeps = substeps_for_target(model, tau, args.k, args.order)
        res = run_pea(model, cfg)
        try:
            gap = estimate_gap(res)
            lines.append(f"pea gap: {gap!r} +- {res.resolution_energy!r}")
            lines.append("peak phases: " + ", ".join(f"{p!r} (w={w:.4f})" for p, w in res.phases[:2]))
        except UnresolvedPeaksError as exc:
            lines.append(f"pea gap: unresolved peaks ({exc})")
            code = EXIT_UNRESOLVED
    _write("\n".join(lines) + "\n", args.out)
    return code


def cmd_pea(args) -> int:
    model = load_model(args.model)
    cfg = PEAConfig(k=args.k, tau=args.tau, trotter_order=args.order,
                    trotter_substeps=args.substeps or 1,
                    shots=args.shots, seed=args.seed)
    res = run_pea(model, cfg)
    _write(json.dumps(result_to_json(res), sort_keys=True, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_count(args) -> int:
    if args.verify_counts:
        report = verify_counts(seed=args.seed or 7)
    else:
        report = ResourceReport()
    report.rows.append(ReportRow("crossover", n=crossover_n()))
    delta = args.delta if args.delta is not None else 2 * np.pi / 2**10
    budget = args.budget
    report.rows.append(ReportRow(
        "maxN_nn", n=max_n_for_budget("nn", budget, delta), delta=delta))
    report.rows.append(ReportRow(
        "maxN_general", n=max_n_for_budget("general", budget, delta), delta=delta))
    text = report.to_json() + "\n" if args.format == "json" else report.to_csv()
    _write(text, args.out)
    mismatches = report.mismatches()
    if mismatches:
        print(f"{len(mismatches)} count mismatches", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubusim",
        description="Compile, verify, and cost out bus-mediated qubit circuits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a coupled-spin evolution to bus operations")
    c.add_argument("--model", required=True)
    c.add_argument("--strategy", default="carryover",
                   choices=["naive", "stepwise", "carryover", "limited", "fixed-range"])
    c.add_argument("--p", type=int, default=None, help="interaction range for fixed-range")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_compile)

    v = sub.add_parser("verify", help="check a compiled sequence against its model")
    v.add_argument("--model", required=True)
    v.add_argument("--sequence", required=True)
    v.add_argument("--tol", type=float, default=1e-9)
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gap", help="energy gap, exactly and/or by phase estimation")
    g.add_argument("--model", required=True)
    g.add_argument("--method", default="both", choices=["exact", "pea", "both"])
    g.add_argument("--k", type=int, default=6)
    g.add_argument("--tau", type=float, default=None)
    g.add_argument("--order", type=int, default=2, choices=[1, 2])
    g.add_argument("--substeps", type=int, default=None)
    g.add_argument("--shots", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--spectrum-out", default=None,
                   help="also write the sector spectrum as index,eigenvalue CSV")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gap)

    p = sub.add_parser("pea", help="full phase-estimation run, JSON result")
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--order", type=int, default=2, choices=[1, 2])
    p.add_argument("--substeps", type=int, default=None)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_pea)

    n = sub.add_parser("count", help="resource tables: formulas vs compiled counts")
    n.add_argument("--verify-counts", action="store_true")
    n.add_argument("--budget", type=float, default=6e6)
    n.add_argument("--delta", type=float, default=None)
    n.add_argument("--seed", type=int, default=None)
    n.add_argument("--format", default="csv", choices=["csv", "json"])
    n.add_argument("--out", default=None)
    n.set_defaults(func=cmd_count)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
