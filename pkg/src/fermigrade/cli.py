"""Command-line surface.

Subcommands: ``grade`` (per-order orthogonality verdicts), ``araki``
(angle spectrum between p-internal spaces), ``internal`` (basis of a
p-internal space), ``matelem`` (group-function overlap or q-particle
matrix element with optional orthogonality pruning).

Exit codes: 0 success, 2 parse error, 3 resource ceiling exceeded,
4 failed orthogonality verification.  The p-orthogonality tolerance
defaults to 1e-8, can be set globally through the GRADE_TOL environment
variable, and per run with --tol.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time

from .density import rdm_eigensystem
from .fileio import ParseError, format_complex, parse_operator_file, parse_state_file
from .fock import CeilingError, indices_of
from .groups import (
    OrthogonalityError,
    PlanCounter,
    matelem,
    matelem_pruned,
    overlap_group,
    overlap_group_pruned,
)
from .ortho import araki_angles, grade


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_state_file(fh.read())


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def cmd_grade(args) -> int:
    sf = _load(args.file)
    s1 = sf.resolve_state(args.state1)
    s2 = sf.resolve_state(args.state2)
    report = grade(s1, s2, tol=args.tol, exhaustive=args.exhaustive)
    print("p  orthogonal")
    rows = []
    for p, ok in report.verdicts:
        print(f"{p}  {'yes' if ok else 'no'}")
        rows.append([p, "yes" if ok else "no"])
    print(f"grade = {report.grade if report.grade is not None else 'none'}")
    if args.csv:
        _write_csv(args.csv, ["p", "orthogonal"], rows)
    return 0


def cmd_araki(args) -> int:
    sf = _load(args.file)
    s1 = sf.resolve_state(args.state1)
    s2 = sf.resolve_state(args.state2)
    spectrum = araki_angles(s1, s2, args.p, method=args.method)
    d1, d2 = spectrum.dims
    print(f"internal dims: d1 = {d1}, d2 = {d2}, dim E = {spectrum.dim_e}")
    print("angle_rad          angle_deg  multiplicity")
    rows = []
    for theta, mult in spectrum.angles:
        deg = math.degrees(theta)
        print(f"{theta:.15f}  {deg:9.6f}  {mult}")
        rows.append([f"{theta:.15f}", f"{deg:.6f}", mult])
    if args.csv:
        _write_csv(args.csv, ["angle_rad", "angle_deg", "multiplicity"], rows)
    return 0


def cmd_internal(args) -> int:
    sf = _load(args.file)
    state = sf.resolve_state(args.state)
    if not 1 <= args.p <= state.n:
        raise ValueError(f"--p {args.p} outside 1..{state.n}")
    w, dm, vecs = rdm_eigensystem(state, args.p)
    cut = args.rank_tol * max(float(w[0]), 0.0)
    rows = []
    count = 0
    for k in range(len(w)):
        if w[k] <= cut:
            break
        count += 1
        print(f"vector {count}  (eigenvalue {w[k]:.12g})")
        for i, m in enumerate(dm.occs):
            c = vecs[i, k]
            if abs(c) > 1e-10:
                occ = " ".join(str(x) for x in indices_of(m))
                print(f"  {format_complex(c)} [{occ}]")
                rows.append([count, f"{w[k]:.17g}", occ, f"{c.real:.17g}", f"{c.imag:.17g}"])
    print(f"dim I^{args.p} = {count}")
    if args.csv:
        _write_csv(args.csv, ["vector", "eigenvalue", "occupation", "coeff_re", "coeff_im"], rows)
    return 0


def cmd_matelem(args) -> int:
    sf = _load(args.file)
    bra = sf.resolve_group(args.bra)
    ket = sf.resolve_group(args.ket)
    counter = PlanCounter()
    start = time.perf_counter()
    if args.operator:
        with open(args.operator, "r", encoding="utf-8") as fh:
            op = parse_operator_file(fh.read(), sf.basis)
        if args.q is None:
            value = matelem(bra, op, ket, counter=counter, threads=args.threads)
        else:
            value = matelem_pruned(bra, op, ket, args.q, verify=args.verify, tol=args.tol,
                                   counter=counter, threads=args.threads)
    else:
        if args.q is None:
            value = overlap_group(bra, ket, counter=counter, threads=args.threads)
        else:
            value = overlap_group_pruned(bra, ket, args.q, verify=args.verify, tol=args.tol,
                                         counter=counter, threads=args.threads)
    elapsed = time.perf_counter() - start
    print(f"value = {format_complex(value)}")
    if args.report_terms:
        print(f"plans = {counter.plans}")
        print(f"outer plans = {counter.outer_plans}")
    print(f"elapsed_s = {elapsed:.6f}")
    if args.csv:
        _write_csv(
            args.csv,
            ["value_re", "value_im", "plans", "outer_plans", "elapsed_s"],
            [[f"{value.real:.17g}", f"{value.imag:.17g}", counter.plans, counter.outer_plans, f"{elapsed:.6f}"]],
        )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fermigrade",
        description="Graded orthogonality, internal spaces and Araki angles for fermionic states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grade", help="per-order orthogonality verdicts and the grade")
    p.add_argument("file")
    p.add_argument("state1")
    p.add_argument("state2")
    p.add_argument("--tol", type=float, default=None, help="p-orthogonality tolerance (default GRADE_TOL or 1e-8)")
    p.add_argument("--exhaustive", action="store_true", help="test every p instead of bisecting")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_grade)

    p = sub.add_parser("araki", help="Araki angle spectrum between p-internal spaces")
    p.add_argument("file")
    p.add_argument("state1")
    p.add_argument("state2")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--method", choices=["svd", "operator"], default="svd")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_araki)

    p = sub.add_parser("internal", help="basis of a p-internal space with occupation expansions")
    p.add_argument("file")
    p.add_argument("state")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--rank-tol", type=float, default=1e-10,
                   help="relative eigenvalue cutoff deciding which eigenvalues count as nonzero")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_internal)

    p = sub.add_parser("matelem", help="group overlap, or matrix element with --operator")
    p.add_argument("file")
    p.add_argument("bra")
    p.add_argument("ket")
    p.add_argument("--operator", default=None, help="operator file; omit to compute the overlap")
    p.add_argument("--q", type=int, default=None, help="declared orthogonality grade enabling pruning")
    p.add_argument("--verify", action="store_true", help="check the declared orthogonality first")
    p.add_argument("--report-terms", action="store_true", help="print enumerated plan counts")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_matelem)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OrthogonalityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except CeilingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
