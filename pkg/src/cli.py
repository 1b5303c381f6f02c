"""CLI for gridwqo.

Wires the library modules to a command line:
- matrix inspection: classify, pmm, double
- griddings: member, griddings, decompose
- coils: coil, inflate, longest-coil, encode
- decisions and antichains: decide-lwqo, basis, antichain, counterexample,
  probe-unique, survey

Exit codes: 0 success or LWQO, 1 non-member, 2 input error, 3 budget
exceeded, 10 NOT_LWQO.
"""

from __future__ import annotations

import argparse
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
import json
import logging
from pathlib import Path
import sys
import time
from typing import Any

from src import __version__
from src.coil import (
    Chirality,
    build_coil,
    coil_type,
    encode_indivisible,
    end_inflate,
    longest_coil_contained,
)
from src.config import (
    DEFAULT_SETTINGS_PATH,
    Budget,
    BudgetExceeded,
    Settings,
    load_matrix,
    load_settings,
    parse_permutation_arg,
)
from src.core import Permutation
from src.decide import (
    Verdict,
    antichain_family,
    basis_search,
    bicyclic_counterexample,
    decide_lwqo,
    end_inflated_survey,
    unique_gridding_probe,
)
from src.decomposition import decompose
from src.gridding import (
    GriddedPermutation,
    GriddingError,
    enumerate_griddings,
    make_gridded,
    member,
)
from src.matrix import (
    CycleDescriptor,
    GriddingMatrix,
    classify,
    cycles,
    double,
    ensure_pmm,
    format_matrix,
    normalize_to_pmm,
    pmm_sequences,
)

EXIT_OK = 0
EXIT_NON_MEMBER = 1
EXIT_INPUT_ERROR = 2
EXIT_BUDGET = 3
EXIT_NOT_LWQO = 10

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


@dataclass
class RunConfig:
    """One parsed invocation."""

    command: str
    matrix_path: Path | None = None
    perms: list[Permutation] = field(default_factory=list)
    as_json: bool = False
    count: bool = False
    gridding: str | None = None
    max_len: int | None = None
    lengths: list[int] = field(default_factory=list)
    coil_type: tuple[int, int, int] | None = None
    k: int = 1
    start: int = 1
    chirality: Chirality = Chirality.A
    length: int | None = None
    cycle: int = 1
    bound: int | None = None
    seed: int | None = None
    settings: Settings = field(default_factory=Settings)
    budget_seconds: float | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        """
        Build a RunConfig from parsed arguments and the settings file.

        Raises:
            ValueError: If a flag value is malformed or out of range
        """
        settings = load_settings(args.settings)
        if args.jobs is not None:
            settings.jobs = args.jobs
        if args.budget_seconds is not None:
            settings.budget_seconds = args.budget_seconds
        settings.validate()

        perm_texts = list(getattr(args, "perms", None) or [])
        if getattr(args, "perm", None) is not None:
            perm_texts.insert(0, args.perm)
        matrix = getattr(args, "matrix", None)

        return cls(
            command=args.command,
            matrix_path=Path(matrix) if matrix is not None else None,
            perms=[parse_permutation_arg(text) for text in perm_texts],
            as_json=args.json,
            count=getattr(args, "count", False),
            gridding=getattr(args, "gridding", None),
            max_len=getattr(args, "max_len", None),
            lengths=parse_lengths(getattr(args, "lengths", None) or ""),
            coil_type=parse_type(args.type) if getattr(args, "type", None) else None,
            k=getattr(args, "k", 1),
            start=getattr(args, "start", 1),
            chirality=Chirality(getattr(args, "chirality", "A")),
            length=getattr(args, "length", None),
            cycle=getattr(args, "cycle", 1),
            bound=getattr(args, "bound", None),
            seed=getattr(args, "seed", None),
            settings=settings,
            budget_seconds=settings.budget_seconds,
        )

    def matrix(self) -> GriddingMatrix:
        if self.matrix_path is None:
            raise ValueError(f"Command {self.command} needs a matrix file")
        return load_matrix(self.matrix_path)

    def budget(self) -> Budget:
        return Budget(self.budget_seconds)


@dataclass
class Report:
    """Result of one command, printable as text or JSON."""

    exit_code: int
    result: Any
    witnesses: list[Any] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)


def parse_lengths(text: str) -> list[int]:
    """Parse ``"9..12"`` or ``"9,13,19"`` into a list of lengths."""
    text = text.strip()
    if not text:
        return []
    try:
        if ".." in text:
            low, high = text.split("..", 1)
            return list(range(int(low), int(high) + 1))
        return [int(part) for part in text.split(",")]
    except ValueError as e:
        raise ValueError(f"Invalid lengths: {text!r}") from e


def parse_type(text: str) -> tuple[int, int, int]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise ValueError(f"Coil type needs three labels s1,s2,f: {text!r}")
    try:
        s1, s2, final = (int(p) for p in parts)
    except ValueError as e:
        raise ValueError(f"Invalid coil type: {text!r}") from e
    return s1, s2, final


def parse_gridding_flag(text: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Parse ``"v:4,6;h:5,7"`` into vertical and horizontal cuts."""
    cuts: dict[str, tuple[int, ...]] = {"v": (), "h": ()}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        key, _, values = part.partition(":")
        if key not in cuts:
            raise ValueError(f"Invalid gridding flag {text!r}: expected v:...;h:...")
        try:
            cuts[key] = tuple(int(v) for v in values.split(",") if v.strip())
        except ValueError as e:
            raise ValueError(f"Invalid cut list in {text!r}") from e
    return cuts["v"], cuts["h"]


def gridded_to_dict(gridded: GriddedPermutation) -> dict[str, Any]:
    return {
        "perm": list(gridded.perm.values),
        "cells": [list(cell) for cell in gridded.cells],
    }


def render_gridded(gridded: GriddedPermutation) -> str:
    """Textual plot with cell boundaries, top row first."""
    n = len(gridded)
    matrix = gridded.matrix
    col_breaks = {k for k in range(1, n) if gridded.cells[k - 1][0] != gridded.cells[k][0]}
    rows_by_value = {gridded.value_of(k): gridded.cell_of(k)[1] for k in range(1, n + 1)}
    out = []
    for value in range(n, 0, -1):
        if value < n and rows_by_value[value] != rows_by_value[value + 1]:
            out.append("-" * (2 * n + len(col_breaks)))
        line = ""
        for position in range(1, n + 1):
            line += "o " if gridded.value_of(position) == value else ". "
            if position in col_breaks:
                line += "|"
        out.append(line.rstrip())
    out.append(f"({matrix.cols}x{matrix.rows} gridding: {gridded.perm})")
    return "\n".join(out)


def _gridded_input(config: RunConfig, matrix: GriddingMatrix) -> GriddedPermutation | None:
    perm = config.perms[0]
    if config.gridding is not None:
        v_lines, h_lines = parse_gridding_flag(config.gridding)
        return make_gridded(perm, matrix, v_lines, h_lines)
    return member(perm, matrix, config.budget())


def _pick_cycle(matrix: GriddingMatrix, number: int) -> CycleDescriptor:
    found = cycles(matrix)
    if not 1 <= number <= len(found):
        raise ValueError(f"Matrix has {len(found)} cycle(s); --cycle {number} is out of range")
    return found[number - 1]


def cmd_classify(config: RunConfig) -> Report:
    label = classify(config.matrix())
    return Report(EXIT_OK, str(label), lines=[str(label)])


def cmd_pmm(config: RunConfig) -> Report:
    outcome = pmm_sequences(config.matrix())
    if isinstance(outcome, CycleDescriptor):
        cells = [list(c) for c in outcome.cells]
        return Report(
            EXIT_OK,
            {"negative_cycle": cells, "sign": outcome.sign},
            lines=[f"No PMM sequences: negative cycle through {outcome.cells}"],
        )
    return Report(
        EXIT_OK,
        {"columns": list(outcome.columns), "rows": list(outcome.rows)},
        lines=[f"columns: {list(outcome.columns)}", f"rows: {list(outcome.rows)}"],
    )


def cmd_double(config: RunConfig) -> Report:
    doubled = double(config.matrix())
    return Report(EXIT_OK, doubled.rows_top_down(), lines=[format_matrix(doubled)])


def cmd_member(config: RunConfig) -> Report:
    matrix = config.matrix()
    perm = config.perms[0]
    witness = member(perm, matrix, config.budget())
    if witness is None:
        return Report(EXIT_NON_MEMBER, False, lines=[f"{perm} is not in the grid class"])
    return Report(
        EXIT_OK,
        True,
        witnesses=[gridded_to_dict(witness)],
        lines=[f"{perm} is in the grid class", render_gridded(witness)],
    )


def cmd_griddings(config: RunConfig) -> Report:
    matrix = config.matrix()
    found = sorted(
        enumerate_griddings(config.perms[0], matrix, config.budget()), key=lambda g: g.cells
    )
    if config.count:
        return Report(EXIT_OK, len(found), lines=[str(len(found))])
    lines = [f"{len(found)} gridding(s)"] + [render_gridded(g) for g in found]
    return Report(EXIT_OK, [gridded_to_dict(g) for g in found], lines=lines)


def cmd_decompose(config: RunConfig) -> Report:
    matrix = ensure_pmm(config.matrix())
    gridded = _gridded_input(config, matrix)
    if gridded is None:
        return Report(EXIT_NON_MEMBER, None, lines=[f"{config.perms[0]} is not in the grid class"])
    parts = decompose(gridded)
    lines = [f"{len(parts)} indivisible part(s)"]
    lines += [f"  {part.perm}  cells {list(part.cells)}" for part in parts]
    return Report(EXIT_OK, [gridded_to_dict(p) for p in parts], lines=lines)


def _coil_from_config(config: RunConfig) -> tuple[GriddedPermutation, Any, bool]:
    normal, doubled = normalize_to_pmm(config.matrix())
    if config.length is None:
        raise ValueError("--length is required")
    cycle = _pick_cycle(normal, config.cycle)
    gridded, certificate = build_coil(normal, cycle, config.start, config.chirality, config.length)
    return gridded, certificate, doubled


def cmd_coil(config: RunConfig) -> Report:
    gridded, certificate, doubled = _coil_from_config(config)
    result = {
        **gridded_to_dict(gridded),
        "order": list(certificate.order),
        "type": list(coil_type(certificate)),
        "doubled": doubled,
    }
    return Report(EXIT_OK, result, lines=[str(gridded.perm), render_gridded(gridded)])


def cmd_inflate(config: RunConfig) -> Report:
    gridded, certificate, _ = _coil_from_config(config)
    inflated = end_inflate(gridded, certificate)
    return Report(EXIT_OK, gridded_to_dict(inflated), lines=[str(inflated.perm)])


def cmd_longest_coil(config: RunConfig) -> Report:
    match = longest_coil_contained(config.perms[0], config.matrix())
    if match is None:
        return Report(EXIT_OK, None, lines=["No coil is contained"])
    result = {
        "length": match.length,
        "chirality": str(match.chirality),
        "start": match.start,
        "cycle": [list(c) for c in match.cycle.cells],
    }
    return Report(
        EXIT_OK,
        result,
        lines=[f"length {match.length}, chirality {match.chirality}, start {match.start}"],
    )


def cmd_encode(config: RunConfig) -> Report:
    matrix = ensure_pmm(config.matrix())
    gridded = _gridded_input(config, matrix)
    if gridded is None:
        return Report(EXIT_NON_MEMBER, None, lines=[f"{config.perms[0]} is not in the grid class"])
    code = encode_indivisible(gridded, seed=config.seed)
    result = {
        "a": code.a,
        "b": code.b,
        "body": gridded_to_dict(code.body),
        "body_matrix": code.body.matrix.rows_top_down(),
    }
    lines = [
        f"a = {code.a}, b = {code.b}",
        f"body: {code.body.perm}",
        format_matrix(code.body.matrix),
    ]
    return Report(EXIT_OK, result, lines=lines)


def cmd_decide_lwqo(config: RunConfig) -> Report:
    verdict = decide_lwqo(
        config.matrix(),
        config.perms,
        jobs=config.settings.worker_count(),
        budget=config.budget(),
    )
    witnesses = []
    for component in verdict.components:
        for item in component.chiralities:
            entry: dict[str, Any] = {
                "cycle": [list(c) for c in component.cycle.cells],
                "bound": component.bound,
                "chirality": str(item.chirality),
                "alive": item.alive,
            }
            if item.witness is not None:
                entry["start"] = item.witness.start
                entry["coil"] = list(item.witness.coil.values)
                entry["pattern"] = list(item.witness.pattern.values)
                entry["embedding"] = list(item.witness.embedding.indices)
            else:
                entry["coils"] = [list(c.values) for c in item.coils]
            witnesses.append(entry)
    code = EXIT_OK if verdict.answer is Verdict.LWQO else EXIT_NOT_LWQO
    lines = [str(verdict.answer)]
    if verdict.dropped:
        lines.append(f"dropped (not in class): {', '.join(str(p) for p in verdict.dropped)}")
    return Report(code, str(verdict.answer), witnesses=witnesses, lines=lines)


def cmd_basis(config: RunConfig) -> Report:
    max_len = config.max_len if config.max_len is not None else config.settings.max_basis_length
    found = sorted(
        basis_search(
            config.matrix(),
            max_len,
            limit=config.settings.max_basis_length,
            jobs=config.settings.worker_count(),
            budget=config.budget(),
        ),
        key=lambda p: (len(p), p.values),
    )
    return Report(EXIT_OK, [list(p.values) for p in found], lines=[str(p) for p in found])


def cmd_antichain(config: RunConfig) -> Report:
    if config.coil_type is None:
        raise ValueError("--type is required")
    matrix = ensure_pmm(config.matrix())
    family = antichain_family(matrix, config.coil_type, config.k)
    return Report(
        EXIT_OK,
        [gridded_to_dict(m) for m in family.members],
        lines=[f"length {len(m)}: {m.perm}" for m in family.members],
    )


def cmd_counterexample(config: RunConfig) -> Report:
    example = bicyclic_counterexample(config.k)
    result = {
        "perm": list(example.perm.values),
        "matrix": example.matrix.rows_top_down(),
        "submatrix": example.submatrix.rows_top_down(),
    }
    return Report(EXIT_OK, result, lines=[str(example.perm)])


def cmd_probe_unique(config: RunConfig) -> Report:
    matrix = ensure_pmm(config.matrix())
    rows = unique_gridding_probe(matrix, config.lengths, config.budget())
    result = [
        {
            "start": r.start,
            "chirality": str(r.chirality),
            "length": r.length,
            "perm": list(r.perm.values),
            "griddings": r.griddings,
        }
        for r in rows
    ]
    lines = [f"{r.length:>4} {r.chirality}{r.start}: {r.griddings} gridding(s)" for r in rows]
    return Report(EXIT_OK, result, lines=lines)


def cmd_survey(config: RunConfig) -> Report:
    if config.bound is None:
        raise ValueError("--bound is required")
    matrix = ensure_pmm(config.matrix())
    report = end_inflated_survey(matrix, config.perms, config.bound, config.budget())
    result = {
        "bound": report.bound,
        "alive": [
            {
                "type": list(kind),
                "lengths": list(lengths),
                "alive_at_bound": kind in report.alive_at_bound,
            }
            for kind, lengths in report.alive.items()
        ],
    }
    lines = [
        f"type {kind}: {list(lengths)}"
        + (" (alive at bound)" if kind in report.alive_at_bound else "")
        for kind, lengths in report.alive.items()
    ] or ["No end-inflated coil avoids the basis"]
    return Report(EXIT_OK, result, lines=lines)


COMMANDS: dict[str, Callable[[RunConfig], Report]] = {
    "classify": cmd_classify,
    "pmm": cmd_pmm,
    "double": cmd_double,
    "member": cmd_member,
    "griddings": cmd_griddings,
    "decompose": cmd_decompose,
    "coil": cmd_coil,
    "inflate": cmd_inflate,
    "longest-coil": cmd_longest_coil,
    "encode": cmd_encode,
    "decide-lwqo": cmd_decide_lwqo,
    "basis": cmd_basis,
    "antichain": cmd_antichain,
    "counterexample": cmd_counterexample,
    "probe-unique": cmd_probe_unique,
    "survey": cmd_survey,
}


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per operation."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Emit machine-readable JSON")
    common.add_argument("--jobs", type=int, help="Parallel worker processes")
    common.add_argument("--budget-seconds", type=float, help="Wall-clock budget for searches")
    common.add_argument("--debug", action="store_true", help="Enable debug logging")
    common.add_argument(
        "--settings", type=Path, default=DEFAULT_SETTINGS_PATH, help="Settings JSON file"
    )

    parser = argparse.ArgumentParser(
        prog="gridwqo",
        description="Monotone grid classes: griddings, coils and lwqo decisions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text)

    for name, help_text in (
        ("classify", "Cycle class of the row-column graph"),
        ("pmm", "Row and column sequences, or a negative cycle"),
        ("double", "Doubled matrix"),
    ):
        add(name, help_text).add_argument("matrix")

    for name, help_text in (
        ("member", "Grid class membership with a witness gridding"),
        ("griddings", "All griddings of a permutation"),
        ("decompose", "Decomposition into indivisibles"),
        ("longest-coil", "Longest coil contained in a permutation"),
        ("encode", "Encode an indivisible as (body, a, b)"),
    ):
        p = add(name, help_text)
        p.add_argument("matrix")
        p.add_argument("perm")
        if name == "griddings":
            p.add_argument("--count", action="store_true", help="Print only the number")
        if name in ("decompose", "encode"):
            p.add_argument("--gridding", help="Cut lines, e.g. v:4,6;h:5,7")
        if name == "encode":
            p.add_argument("--seed", type=int, help="Coil decomposition seed position")

    for name, help_text in (("coil", "Build a coil"), ("inflate", "Build an end-inflated coil")):
        p = add(name, help_text)
        p.add_argument("matrix")
        p.add_argument("--start", type=int, default=1)
        p.add_argument("--chirality", choices=["A", "B"], default="A")
        p.add_argument("--length", type=int, required=True)
        p.add_argument("--cycle", type=int, default=1, help="Cycle number when several exist")

    p = add("decide-lwqo", "Decide lwqo of the subclass avoiding the given basis")
    p.add_argument("matrix")
    p.add_argument("perms", nargs="*")

    p = add("basis", "Basis elements up to a length")
    p.add_argument("matrix")
    p.add_argument("--max-len", type=int)

    p = add("antichain", "End-inflated coil antichain of one type")
    p.add_argument("matrix")
    p.add_argument("--type", required=True, help="s1,s2,f")
    p.add_argument("--count", dest="k", type=int, default=3)

    p = add("counterexample", "Bicyclic basis-element family member")
    p.add_argument("--k", type=int, default=1)

    p = add("probe-unique", "Gridding counts of coils")
    p.add_argument("matrix")
    p.add_argument("--lengths", required=True, help="a..b or a,b,c")

    p = add("survey", "Bounded survey of end-inflated coils avoiding a basis")
    p.add_argument("matrix")
    p.add_argument("perms", nargs="*")
    p.add_argument("--bound", type=int, required=True)

    return parser


def run(config: RunConfig) -> tuple[int, dict[str, Any], list[str]]:
    """
    Dispatch a parsed invocation.

    Returns:
        (exit code, JSON payload, human-readable lines)
    """
    started = time.perf_counter()
    report = COMMANDS[config.command](config)
    payload = {
        "command": config.command,
        "inputs": {
            "matrix": str(config.matrix_path) if config.matrix_path else None,
            "perms": [list(p.values) for p in config.perms],
        },
        "result": report.result,
        "witnesses": report.witnesses,
        "timing": {"seconds": round(time.perf_counter() - started, 6)},
    }
    return report.exit_code, payload, report.lines


def main(argv: Sequence[str] | None = None) -> int:
    """
    Execute one gridwqo command.

    Returns:
        Exit code (see module docstring)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT_ERROR

    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.WARNING,
        format=LOG_FORMAT,
        stream=sys.stderr,
    )

    try:
        config = RunConfig.from_args(args)
        code, payload, lines = run(config)
    except BudgetExceeded as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (FileNotFoundError, json.JSONDecodeError, GriddingError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    if config.as_json:
        print(json.dumps(payload, indent=2))
    else:
        for line in lines:
            print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
