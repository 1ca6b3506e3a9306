"""Build-time benchmark: generate a model, hand it to a backend with a zero time
limit, and time everything up to the backend's TIME_LIMIT return.

Usage::

    bench --family fac --size 25 --mode cached --mode direct --repeats 3 --format table
"""
from __future__ import annotations

import argparse
import csv
import gc
import io
import resource
import statistics
import sys
import tempfile
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .benchgen import fac_variable_count, generate_fac, generate_lqcp, lqcp_variable_count
from .errors import EmptyReport, ModelingError, OutOfMemory
from .fileio import OneShotFileBackend
from .model import Model, direct_model, optimizer_with_attributes
from .solvers.bnb import MILPBackend
from .solvers.fw import FWBackend
from .status import TerminationStatus

FAMILIES = {
    "fac": (generate_fac, fac_variable_count, MILPBackend),
    "lqcp": (generate_lqcp, lqcp_variable_count, FWBackend),
}
MODES = ("cached", "direct")
BACKENDS = ("internal", "oneshot")
CSV_HEADER = ("family", "size", "variables", "mode", "run", "seconds", "peak_bytes")


class ConfigurationError(ModelingError, ValueError):
    pass


@dataclass
class BenchRecord:
    family: str
    size: int
    variables: int
    mode: str
    run: int
    seconds: float
    peak_bytes: Optional[int]
    status: TerminationStatus


@dataclass
class BenchReport:
    family: str
    size: int
    mode: str
    variables: int
    records: list

    @property
    def timings(self) -> list[float]:
        return [r.seconds for r in self.records]

    @property
    def min(self) -> float:
        return min(self.timings)

    @property
    def median(self) -> float:
        return statistics.median(self.timings)


def peak_rss_bytes() -> Optional[int]:
    """Peak resident set size of this process, or None where unavailable."""
    try:
        kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    except (AttributeError, OSError):
        return None
    # Linux reports KiB; macOS reports bytes
    return int(kb) if sys.platform == "darwin" else int(kb) * 1024


def _backend_factory(family: str, backend: str, workdir: Optional[str]) -> Callable:
    if backend == "internal":
        return FAMILIES[family][2]
    if backend == "oneshot":
        return lambda: OneShotFileBackend(workdir)
    raise ConfigurationError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


def _one_run(family: str, size: int, mode: str, factory: Callable) -> tuple[float, TerminationStatus]:
    generate = FAMILIES[family][0]
    start = time.perf_counter()
    if mode == "cached":
        model = Model(optimizer_with_attributes(factory, [("time_limit", 0.0)]))
    else:
        model = direct_model(factory())
        model.set_time_limit(0.0)
    generate(size, model)
    model.optimize()
    seconds = time.perf_counter() - start
    status = model.termination_status()
    del model
    gc.collect()
    return seconds, status


def run_bench(family: str, size: int, mode: str = "cached", repeats: int = 3,
              backend: str = "internal") -> BenchReport:
    """Time ``repeats`` build-and-pass runs of one benchmark instance."""
    if family not in FAMILIES:
        raise ConfigurationError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}; expected one of {MODES}")
    if repeats < 1:
        raise ConfigurationError("repeats must be at least 1")
    report = BenchReport(family, size, mode, FAMILIES[family][1](size), [])
    with tempfile.TemporaryDirectory(prefix="bench-") as workdir:
        factory = _backend_factory(family, backend, workdir)
        for run in range(1, repeats + 1):
            try:
                seconds, status = _one_run(family, size, mode, factory)
            except MemoryError as exc:
                raise OutOfMemory(family, size) from exc
            if status is not TerminationStatus.TIME_LIMIT:
                raise AssertionError(f"{family}-{size} {mode}: backend returned {status}, not TIME_LIMIT")
            report.records.append(BenchRecord(family, size, report.variables, mode, run,
                                              seconds, peak_rss_bytes(), status))
    return report


@dataclass
class BenchConfig:
    """One CLI invocation: every size is run in every mode."""

    family: str
    sizes: list[int]
    modes: list[str] = field(default_factory=lambda: ["cached"])
    backend: str = "internal"
    repeats: int = 3
    format: str = "csv"
    output: str = "-"

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "BenchConfig":
        return cls(args.family, list(args.size), list(args.mode or ["cached"]), args.backend,
                   args.repeats, args.format, args.output)


def run_config(config: BenchConfig) -> list[BenchReport]:
    return [run_bench(config.family, size, mode, config.repeats, config.backend)
            for size in config.sizes for mode in config.modes]


def _flatten(records) -> list[BenchRecord]:
    out = []
    for r in records:
        out.extend(r.records if isinstance(r, BenchReport) else [r])
    return out


def emit_report(records: Sequence, fmt: str = "csv") -> bytes:
    """Render records (or reports) as CSV or as a text table of median seconds."""
    rows = _flatten(records)
    if not rows:
        raise EmptyReport("no benchmark records to report")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.family, r.size, r.variables, r.mode, r.run, f"{r.seconds:.6f}",
                        "" if r.peak_bytes is None else r.peak_bytes])
        return buf.getvalue().encode()
    if fmt == "table":
        return _table(rows).encode()
    raise ConfigurationError(f"unknown format {fmt!r}; expected csv or table")


def _table(rows: list[BenchRecord]) -> str:
    modes = [m for m in MODES if any(r.mode == m for r in rows)]
    groups: dict[tuple, dict[str, list[float]]] = {}
    variables = {}
    for r in rows:
        groups.setdefault((r.family, r.size), {}).setdefault(r.mode, []).append(r.seconds)
        variables[r.family, r.size] = r.variables
    header = ["instance", "variables"] + modes
    body = []
    for family in sorted({k[0] for k in groups}):
        for key in sorted(k for k in groups if k[0] == family):
            cells = [f"{family}-{key[1]}", f"{variables[key]:,}"]
            for m in modes:
                t = groups[key].get(m)
                cells.append(f"{statistics.median(t):.3f}" if t else "-")
            body.append(cells)
    widths = [max(len(str(row[i])) for row in [header] + body) for i in range(len(header))]
    lines = ["  ".join(str(c).rjust(w) for c, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    prev = None
    for cells in body:
        family = cells[0].split("-")[0]
        if prev is not None and family != prev:
            lines.append("")
        prev = family
        lines.append("  ".join(c.rjust(w) for c, w in zip(cells, widths)))
    return "\n".join(lines) + "\n"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description="Model build-and-pass timing benchmark.")
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--size", required=True, type=int, action="append",
                   help="instance size; repeat the flag for several sizes")
    p.add_argument("--mode", action="append", choices=MODES,
                   help="attachment mode; repeat the flag for both (default: cached)")
    p.add_argument("--backend", default="internal", choices=BACKENDS)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--format", default="csv", choices=("csv", "table"))
    p.add_argument("--output", default="-", help="output path, '-' for stdout")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    config = BenchConfig.from_args(args)
    try:
        reports = run_config(config)
    except OutOfMemory as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return 3
    except (ModelingError, ValueError) as exc:
        print(f"bench: configuration error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    out = emit_report(reports, config.format)
    if config.output == "-":
        sys.stdout.write(out.decode())
    else:
        with open(config.output, "wb") as fh:
            fh.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
