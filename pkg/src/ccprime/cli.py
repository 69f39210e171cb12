"""Command-line interface: ``ccprime {validate,orbitals,sieve,tableau,equitable}``.

Exit codes: 0 success, 1 negative domain outcome (for example a survivor
under ``--expect-forced``), 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Callable

from ccprime import core, equitable, io, orbitals, sieve, tableau
from ccprime.errors import CCError

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(payload: Any, text: str, fmt: str) -> None:
    if fmt == "json":
        print(io.dumps(payload))
    else:
        print(text)


def _load(path: str) -> Any:
    try:
        return io.read_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _fail(exc: CCError, fmt: str) -> int:
    text = f"{exc.kind}: {exc}\nwitness: {io.dumps(exc.witness)}"
    _emit(exc.to_dict(), text, fmt)
    return EXIT_NEGATIVE


def _config_summary(cc: core.CoherentConfig) -> tuple[dict[str, Any], list[str]]:
    payload = io.config_to_json(cc)
    nf = len(cc.fibers)
    lines = [f"valid: {cc.size} points, {cc.num_relations} relations, {nf} fiber{'s' if nf != 1 else ''}"]
    for i, fib in enumerate(cc.fibers):
        lines.append(f"fiber {i}: size {len(fib)}: {list(fib)}")
    for x in range(nf):
        for y in range(nf):
            rels = cc.block(x, y)
            lines.append(f"block ({x},{y}): relations {list(rels)} degrees {[cc.degrees[r] for r in rels]}")
    if nf == 2 and len(cc.fibers[0]) == len(cc.fibers[1]):
        verdict = core.matching_structure(cc)
        payload["matching"] = verdict.to_dict()
        line = f"matching structure: {verdict.kind}"
        if verdict.kind == "matching":
            line += f" (relation {verdict.matching_relation}, isomorphism onto C_X x T_2 verified)"
        lines.append(line)
        lines.append(f"unit degree in R_XY: {verdict.unit_degree_xy}; in R_YX: {verdict.unit_degree_yx}")
    return payload, lines


def cmd_validate(args: argparse.Namespace) -> int:
    obj = _load(args.path)
    try:
        cc = core.validate_configuration(io.matrix_from_json(obj))
    except CCError as exc:
        return _fail(exc, args.format)
    payload, lines = _config_summary(cc)
    _emit(payload, "\n".join(lines), args.format)
    return EXIT_OK


def cmd_orbitals(args: argparse.Namespace) -> int:
    obj = _load(args.action)
    try:
        cc = orbitals.orbital_configuration(io.action_from_json(obj))
    except CCError as exc:
        return _fail(exc, args.format)
    payload = io.config_to_json(cc)
    if args.output:
        try:
            Path(args.output).write_text(io.dumps(payload) + "\n", encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc}") from exc
    nf = len(cc.fibers)
    text = f"{nf} fiber{'s' if nf != 1 else ''}, {cc.num_relations} relations"
    if nf == 2:
        text += f", |R_XY|={len(cc.block(0, 1))}"
    _emit(payload, text, args.format)
    return EXIT_OK


def _report_lines(rep: sieve.SieveReport, trace: bool) -> list[str]:
    p = rep.params
    lines = [f"m={p.m} r={p.r} k={p.k} e={p.e} case={rep.theorem_case} verdict={rep.verdict}"]
    if trace:
        for c in rep.candidates:
            rule = c.eliminated_by or "SURVIVES"
            lines.append(f"  {list(c.degrees)}: {rule} {io.dumps(_short_witness(c.witness))}")
    for s in rep.survivors:
        lines.append(f"  survivor {list(s)}")
    for d in rep.designs():
        lines.append(f"  design {tuple(d)}")
    return lines


def _short_witness(w: dict[str, Any]) -> dict[str, Any]:
    if "branches" in w:
        return {"cells": w["cells"], "branches": len(w["branches"])}
    return w


def cmd_sieve(args: argparse.Namespace) -> int:
    if args.survey is not None:
        if args.m is not None or args.r is not None:
            raise UsageError("--survey excludes -m/-r")
        result = sieve.survey(args.survey, workers=args.workers)
        rows = [f"{'m':>5} {'r':>4} {'k':>4} {'verdict':<10} survivors"]
        for rep in result.reports:
            p = rep.params
            rows.append(f"{p.m:>5} {p.r:>4} {p.k:>4} {rep.verdict:<10} {[list(s) for s in rep.survivors] or ''}")
            if args.trace:
                rows.extend(_report_lines(rep, True)[1:])
        _emit(result.to_dict(), "\n".join(rows), args.format)
        forced = not result.survivors()
    else:
        if args.m is None or args.r is None:
            raise UsageError("give -m and -r, or --survey N")
        try:
            params = sieve.SieveParameters(args.m, args.r)
        except CCError as exc:
            raise UsageError(f"{exc.kind}: {exc}") from exc
        rep = sieve.run_pipeline(params)
        _emit(rep.to_dict(), "\n".join(_report_lines(rep, args.trace)), args.format)
        forced = rep.forced
    return EXIT_NEGATIVE if args.expect_forced and not forced else EXIT_OK


def _parse_cells(raw: str) -> tuple[int, int, int]:
    try:
        cells = tuple(int(c) for c in raw.split(","))
    except ValueError as exc:
        raise UsageError(f"--cells expects a,b,c: {raw!r}") from exc
    if len(cells) != 3:
        raise UsageError(f"--cells expects three sizes: {raw!r}")
    return cells  # type: ignore[return-value]


def cmd_tableau(args: argparse.Namespace) -> int:
    try:
        inst = tableau.TableauInstance(_parse_cells(args.cells), args.k)
    except CCError as exc:
        raise UsageError(f"{exc.kind}: {exc}") from exc
    result = tableau.eliminate(inst)
    lines = [f"cells={list(inst.cells)} k={inst.k} m={inst.m}: {'feasible' if result.feasible else 'infeasible'}"]
    if result.feasible:
        for s in result.solutions:
            lines.append(f"  beta={[list(r) for r in s.beta]} swap_class={s.swap_class}")
    else:
        for b in result.trace:
            lines.append(f"  {io.dumps(b.to_dict())}")
    _emit(result.to_dict(), "\n".join(lines), args.format)
    return EXIT_OK if result.feasible else EXIT_NEGATIVE


def cmd_equitable(args: argparse.Namespace) -> int:
    obj = _load(args.path)
    try:
        cc = core.validate_configuration(io.matrix_from_json(obj))
        if args.enumerate:
            limit = args.max_points if args.max_points is not None else equitable.max_points_from_env()
            parts = equitable.enumerate_equitable(cc, max_points=limit, fiber=args.fiber)
            summary = equitable.congruence_summary(cc, parts, fiber=args.fiber)
            payload = {"partitions": [p.to_dict() for p in parts], "summary": summary.to_dict()}
            text = (
                f"{len(parts)} equitable partitions; cell counts {dict(sorted(summary.cell_counts.items()))}; "
                f"|Pi| = 1 mod {summary.modulus}: {'holds' if summary.holds else 'FAILS'}"
            )
        else:
            try:
                cells = json.loads(args.cells)
            except json.JSONDecodeError as exc:
                raise UsageError(f"--cells must be a JSON list of lists: {exc}") from exc
            part = equitable.verify_equitable(cc, cells, fiber=args.fiber)
            payload = part.to_dict()
            text = f"equitable; cell sizes {list(part.cell_sizes)}\n" + "\n".join(
                f"  relation {r}: {[list(row) for row in m]}" for r, m in sorted(part.parameters.items())
            )
    except CCError as exc:
        return _fail(exc, args.format)
    _emit(payload, text, args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccprime", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable[[argparse.Namespace], int], help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "validate a configuration file")
    p.add_argument("path")

    p = add("orbitals", cmd_orbitals, "build the orbital configuration of an action")
    p.add_argument("action")
    p.add_argument("-o", "--output")

    p = add("sieve", cmd_sieve, "run the degree-multiset sieve")
    p.add_argument("-m", type=int)
    p.add_argument("-r", type=int)
    p.add_argument("--survey", type=int, metavar="N", help="all primes m < N")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--expect-forced", action="store_true", help="exit 1 if any multiset survives")
    p.add_argument("--workers", type=int, default=1)

    p = add("tableau", cmd_tableau, "solve a 3-cell tableau instance")
    p.add_argument("--cells", required=True, help="a,b,c")
    p.add_argument("-k", type=int, required=True)

    p = add("equitable", cmd_equitable, "verify or enumerate equitable partitions")
    p.add_argument("path")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--enumerate", action="store_true")
    mode.add_argument("--cells", help="JSON list of cells, e.g. '[[0],[1,2]]'")
    p.add_argument("--fiber", type=int, default=0)
    p.add_argument("--max-points", type=int, help="override CC_MAX_POINTS / default 12")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
