"""Command-line workflow: ``phylopipe <command> <type> [options] : <command> <type> ...``.

Commands are ``distance``, ``correction``, ``algorithm`` and
``optimization``, separated by standalone ``:`` arguments. They always run
in that order, whatever their order on the command line, except that
several optimizations run in the order given. Each stage takes its input
from the previous stage or from a file option, and ``--out`` writes a copy
of its result.
"""

from __future__ import annotations

import argparse
import logging
import os
import re
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import correction, dataset as dataset_io, distance, matrix as matrix_io, tree as tree_io
from .bench import ALGORITHMS as BENCH_ALGORITHMS, BenchConfig, run_bench, write_csv
from .dataset import Dataset
from .errors import DataError, ErrorKind, WorkflowError
from .gcp import VARIANTS as GCP_VARIANTS, run_gcp
from .lbr import run_lbr
from .matrix import DistanceMatrix
from .mst import run_edmonds, run_goeburst
from .nj import VARIANTS as NJ_VARIANTS, run_nj
from .tree import Tree

LOG_LEVEL_VARIABLE = "PHYLOPIPE_LOG_LEVEL"

logger = logging.getLogger("phylopipe")


def log(level: str, message: str) -> None:
    """Emit a diagnostic on the ``phylopipe`` logger (standard error under the CLI).

    ``level`` is ``info`` (progress), ``warning`` (ignored input),
    ``error`` (user mistakes) or ``exception`` (internal failures, with the
    active traceback).
    """
    if level == "exception":
        logger.exception(message)
    elif level in ("info", "warning", "error"):
        getattr(logger, level)(message)
    else:
        raise ValueError(f"unknown log level {level!r}")


STAGE_ORDER = ("distance", "correction", "algorithm", "optimization")

ALIASES = {"o": "out", "d": "dataset", "m": "matrix", "t": "tree", "l": "lvs"}
FILE_OPTIONS = frozenset({"out", "dataset", "matrix", "tree"})


@dataclass(frozen=True)
class FileRef:
    """A ``format:path`` file option."""

    format_name: str
    path: str

    @classmethod
    def parse(cls, value: str) -> "FileRef":
        fmt, sep, path = value.partition(":")
        if not sep or not fmt or not path:
            raise WorkflowError(ErrorKind.INVALID_TYPE, f"expected format:path, got {value!r}")
        return cls(fmt.lower(), path)

    def __str__(self) -> str:
        return f"{self.format_name}:{self.path}"


@dataclass
class CommandSpec:
    kind: str
    type_name: str
    options: dict[str, str] = field(default_factory=dict)


@dataclass
class WorkflowContext:
    dataset: Optional[Dataset] = None
    matrix: Optional[DistanceMatrix] = None
    tree: Optional[Tree] = None


Stage = Callable[[CommandSpec, WorkflowContext], None]


def _lvs(spec: CommandSpec) -> int:
    raw = spec.options.get("lvs", "3")
    try:
        value = int(raw)
        if value < 1:
            raise ValueError
    except ValueError:
        log("warning", f"ignoring invalid --lvs={raw!r}; using 3")
        return 3
    return value


def _frequency_source(ctx: WorkflowContext, matrix: DistanceMatrix) -> Optional[Dataset]:
    if ctx.dataset is not None and set(ctx.dataset.ids) == set(matrix.ids):
        return ctx.dataset
    return None


ALGORITHM_TYPES: dict[str, Callable[[DistanceMatrix, CommandSpec, WorkflowContext], Tree]] = {
    **{name: (lambda v: lambda m, spec, ctx: run_gcp(m, v))(name) for name in GCP_VARIANTS},
    **{name: (lambda v: lambda m, spec, ctx: run_nj(m, v))(name) for name in NJ_VARIANTS},
    "goeburst": lambda m, spec, ctx: run_goeburst(m, _lvs(spec), _frequency_source(ctx, m)),
    "edmonds": lambda m, spec, ctx: run_edmonds(m),
}

TYPES = {
    "distance": tuple(distance.METRICS),
    "correction": tuple(correction.CORRECTIONS),
    "algorithm": tuple(ALGORITHM_TYPES),
    "optimization": ("lbr",),
}

STAGE_OPTIONS = {
    "distance": {"dataset", "out", "mode"},
    "correction": {"matrix", "out"},
    "algorithm": {"matrix", "out"},
    "optimization": {"tree", "matrix", "out"},
}
TYPE_OPTIONS = {("algorithm", "goeburst"): {"lvs", "dataset"}}

_OPTION = re.compile(r"--?([A-Za-z]+)=(.*)", re.DOTALL)


def usage() -> str:
    lines = [
        "usage: phylopipe <command> <type> [--option=value ...] [: <command> <type> ...]",
        "       phylopipe bench --algorithm=<name> [--sizes=...]",
        "       phylopipe help",
        "",
        "commands run in the order distance, correction, algorithm, optimization;",
        "optimization may be given several times.",
        "",
    ]
    for kind in STAGE_ORDER:
        lines.append(f"{kind}: {', '.join(TYPES[kind])}")
        options = sorted(STAGE_OPTIONS[kind])
        lines.append(f"    options: {', '.join('--' + o for o in options)}")
        if kind == "algorithm":
            lines.append("    goeburst also accepts --lvs=<k> (default 3) and --dataset=<format:path>")
    lines += [
        "",
        "file options take format:path:",
        f"    --dataset/-d  {', '.join(dataset_io.READERS)}",
        f"    --matrix/-m   {', '.join(matrix_io.READ_FORMATS)}",
        f"    --tree/-t     {', '.join(tree_io.READERS)}",
        "    --out/-o      the format of the stage's result",
        "--mode=eager|lazy on distance chooses when distances are computed.",
        f"log level: environment variable {LOG_LEVEL_VARIABLE} (default WARNING)",
    ]
    return "\n".join(lines)


def _segments(argv: Sequence[str]) -> list[list[str]]:
    segments: list[list[str]] = [[]]
    for token in argv:
        if token == ":":
            segments.append([])
        else:
            segments[-1].append(token)
    return segments


def parse_arguments(argv: Sequence[str]) -> list[CommandSpec]:
    """Split ``argv`` into commands.

    Returns an empty list for ``help`` (after printing usage). Raises
    :class:`WorkflowError` for an empty command line, an unknown or empty
    command, a command without a type, an unknown type or a repeated
    non-optimization command. Malformed, unknown and duplicate options are
    dropped with a warning.
    """
    argv = list(argv)
    if not argv:
        raise WorkflowError(ErrorKind.NO_COMMAND, "no command given; try 'help'")
    if argv[0].lower() == "help":
        print(usage())
        return []
    commands = []
    seen = set()
    for segment in _segments(argv):
        if not segment:
            raise WorkflowError(ErrorKind.INVALID_COMMAND, "empty command between ':' separators")
        kind = segment[0].lower()
        if kind not in TYPES:
            raise WorkflowError(ErrorKind.INVALID_COMMAND, f"unknown command {segment[0]!r}")
        if len(segment) < 2 or _OPTION.fullmatch(segment[1]) or segment[1].startswith("-"):
            raise WorkflowError(ErrorKind.MISSING_TYPE, f"command {kind!r} needs a type")
        type_name = segment[1].lower()
        if type_name not in TYPES[kind]:
            raise WorkflowError(
                ErrorKind.INVALID_TYPE,
                f"unknown {kind} type {segment[1]!r}; choose from {', '.join(TYPES[kind])}",
            )
        if kind != "optimization":
            if kind in seen:
                raise WorkflowError(ErrorKind.REPEATED_COMMAND, f"command {kind!r} given more than once")
            seen.add(kind)
        allowed = STAGE_OPTIONS[kind] | TYPE_OPTIONS.get((kind, type_name), set())
        options: dict[str, str] = {}
        for token in segment[2:]:
            match = _OPTION.fullmatch(token)
            if match is None:
                log("warning", f"ignoring malformed argument {token!r} of {kind}")
                continue
            name = match.group(1).lower()
            name = ALIASES.get(name, name)
            value = match.group(2)
            if name not in allowed:
                log("warning", f"ignoring unknown option {token!r} of {kind} {type_name}")
            elif name in options:
                log("warning", f"ignoring duplicate option {token!r} of {kind}")
            else:
                if name in FILE_OPTIONS:
                    fmt, sep, path = value.partition(":")
                    options[name] = f"{fmt.lower()}{sep}{path}"
                else:
                    options[name] = value.lower()
        commands.append(CommandSpec(kind, type_name, options))
    return commands


def validate(commands: Sequence[CommandSpec]) -> None:
    """Reject an optimization that would follow a distance or correction with no algorithm."""
    kinds = {c.kind for c in commands}
    if "optimization" in kinds and "algorithm" not in kinds and kinds & {"distance", "correction"}:
        raise WorkflowError(
            ErrorKind.INVALID_COMMAND,
            "optimization cannot follow distance or correction without an algorithm",
        )


def _read_file(ref: FileRef, readers: dict, what: str, **kwargs):
    reader = readers.get(ref.format_name)
    if reader is None:
        raise WorkflowError(
            ErrorKind.INVALID_TYPE,
            f"unknown {what} format {ref.format_name!r}; choose from {', '.join(readers)}",
        )
    try:
        with open(ref.path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise WorkflowError(ErrorKind.IO_FAILURE, f"cannot read {ref.path}: {exc.strerror}") from exc
    return reader(text, **kwargs)


def _load_dataset(spec: CommandSpec, ctx: WorkflowContext) -> Dataset:
    if "dataset" in spec.options:
        ctx.dataset = _read_file(FileRef.parse(spec.options["dataset"]), dataset_io.READERS, "dataset")
    if ctx.dataset is None:
        raise WorkflowError(ErrorKind.MISSING_INPUT, f"{spec.kind} {spec.type_name} needs a dataset (--dataset)")
    return ctx.dataset


def _load_matrix(spec: CommandSpec, ctx: WorkflowContext) -> DistanceMatrix:
    if "matrix" in spec.options:
        ref = FileRef.parse(spec.options["matrix"])
        readers = {name: (lambda s: lambda text: matrix_io.read_matrix(text, s))(sym)
                   for name, sym in matrix_io.READ_FORMATS.items()}
        ctx.matrix = _read_file(ref, readers, "matrix")
    if ctx.matrix is None:
        raise WorkflowError(ErrorKind.MISSING_INPUT, f"{spec.kind} {spec.type_name} needs a matrix (--matrix)")
    return ctx.matrix


def _load_tree(spec: CommandSpec, ctx: WorkflowContext) -> Tree:
    if "tree" in spec.options:
        ctx.tree = _read_file(FileRef.parse(spec.options["tree"]), tree_io.READERS, "tree")
    if ctx.tree is None:
        raise WorkflowError(ErrorKind.MISSING_INPUT, f"{spec.kind} {spec.type_name} needs a tree (--tree)")
    return ctx.tree


def _write_out(spec: CommandSpec, writers: dict[str, Callable[[object], str]], value) -> None:
    if "out" not in spec.options:
        return
    ref = FileRef.parse(spec.options["out"])
    writer = writers.get(ref.format_name)
    if writer is None:
        raise WorkflowError(
            ErrorKind.INVALID_TYPE,
            f"unknown output format {ref.format_name!r} for {spec.kind}; choose from {', '.join(writers)}",
        )
    text = writer(value)
    try:
        with open(ref.path, "w", encoding="utf-8") as handle:
            handle.write(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        raise WorkflowError(ErrorKind.IO_FAILURE, f"cannot write {ref.path}: {exc.strerror}") from exc
    log("info", f"{spec.kind} {spec.type_name}: wrote {ref}")


MATRIX_WRITERS = {name: (lambda s: lambda m: matrix_io.write_matrix(m, s))(sym)
                  for name, sym in matrix_io.READ_FORMATS.items()}


def _run_distance(spec: CommandSpec, ctx: WorkflowContext) -> None:
    data = _load_dataset(spec, ctx)
    mode = spec.options.get("mode", "eager")
    if mode not in ("eager", "lazy"):
        log("warning", f"ignoring invalid --mode={mode!r}; using eager")
        mode = "eager"
    ctx.matrix = distance.build_matrix(data, spec.type_name, mode)
    _write_out(spec, MATRIX_WRITERS, ctx.matrix)


def _run_correction(spec: CommandSpec, ctx: WorkflowContext) -> None:
    m = _load_matrix(spec, ctx)
    # raw Hamming counts become proportions before the correction
    loci = ctx.dataset.locus_count if ctx.dataset is not None and m.metric == "hamming" else None
    ctx.matrix = correction.CORRECTIONS[spec.type_name](m, loci)
    _write_out(spec, MATRIX_WRITERS, ctx.matrix)


def _run_algorithm(spec: CommandSpec, ctx: WorkflowContext) -> None:
    if "dataset" in spec.options:
        _load_dataset(spec, ctx)
    m = _load_matrix(spec, ctx)
    ctx.tree = ALGORITHM_TYPES[spec.type_name](m, spec, ctx)
    _write_out(spec, tree_io.WRITERS, ctx.tree)


def _run_optimization(spec: CommandSpec, ctx: WorkflowContext) -> None:
    t = _load_tree(spec, ctx)
    m = _load_matrix(spec, ctx)
    ctx.tree = run_lbr(t, m)
    _write_out(spec, tree_io.WRITERS, ctx.tree)


STAGES: dict[str, Stage] = {
    "distance": _run_distance,
    "correction": _run_correction,
    "algorithm": _run_algorithm,
    "optimization": _run_optimization,
}


def execute(commands: Sequence[CommandSpec], ctx: Optional[WorkflowContext] = None) -> WorkflowContext:
    """Run the stages in workflow order and return the final context.

    Errors propagate; see :func:`run_workflow` for the exit-status wrapper.
    """
    validate(commands)
    ctx = ctx if ctx is not None else WorkflowContext()
    ordered = sorted(commands, key=lambda c: STAGE_ORDER.index(c.kind))
    for spec in ordered:
        log("info", f"running {spec.kind} {spec.type_name}")
        STAGES[spec.kind](spec, ctx)
    return ctx


def run_workflow(commands: Sequence[CommandSpec], ctx: Optional[WorkflowContext] = None) -> int:
    """Run the stages and map failures to exit statuses.

    0 on success, 1 for user errors (bad command lines, unreadable or
    malformed files, data outside a formula's domain), 2 for internal
    errors.
    """
    try:
        execute(commands, ctx)
    except (WorkflowError, DataError) as exc:
        log("error", str(exc))
        return 1
    except Exception:
        log("exception", "internal error")
        return 2
    return 0


def _bench_main(argv: Sequence[str]) -> int:
    parser = argparse.ArgumentParser(prog="phylopipe bench", description="Time an algorithm on synthetic profiles.")
    parser.add_argument("--algorithm", required=True, choices=sorted(BENCH_ALGORITHMS))
    parser.add_argument("--sizes", default="100,200,400", help="comma-separated profile counts")
    parser.add_argument("--warmups", type=int, default=10)
    parser.add_argument("--iterations", type=int, default=20)
    parser.add_argument("--mode", choices=("eager", "lazy"), default="eager")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--loci", type=int, default=20)
    parser.add_argument("--alphabet", type=int, default=10)
    args = parser.parse_args(argv)
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
        config = BenchConfig(args.algorithm, sizes, args.warmups, args.iterations, args.mode,
                             args.seed, args.loci, args.alphabet)
    except ValueError as exc:
        log("error", str(exc))
        return 1
    write_csv(run_bench(config), sys.stdout)
    return 0


def _configure_logging() -> None:
    if logger.handlers:
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    logger.addHandler(handler)
    level = os.environ.get(LOG_LEVEL_VARIABLE, "WARNING").upper()
    value = logging.getLevelName(level)
    logger.setLevel(value if isinstance(value, int) else logging.WARNING)


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0].lower() == "bench":
        return _bench_main(argv[1:])
    try:
        commands = parse_arguments(argv)
    except WorkflowError as exc:
        log("error", str(exc))
        return 1
    if not commands:
        return 0
    return run_workflow(commands)
