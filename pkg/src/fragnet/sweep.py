"""Parameter sweep over the diversity grid, parallel and reproducible.

Every run's seed is derived statelessly from (master_seed, cell index,
run index), so results are identical no matter how many workers execute
the sweep or in which order runs finish.  Cells enumerate the cartesian
cube of ``sigma_values`` over (sigma_d, sigma_rs, sigma_rw) with sigma_rw
varying fastest.

Persisted tables use CSV (the analysis interchange format) or JSONL (one
run-record object per line, able to carry extras such as failures).
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .engine import SimConfig, run
from .metrics import RunResult
from .model import DiversityParams

__all__ = [
    "CSV_COLUMNS",
    "SweepSpec",
    "FailedRun",
    "ResultTable",
    "ResultsFormatError",
    "derive_seed",
    "run_sweep",
    "persist_results",
    "load_results",
]

CSV_COLUMNS = (
    "sigma_d",
    "sigma_rs",
    "sigma_rw",
    "run_index",
    "seed",
    "cd",
    "spl",
    "edge_count",
    "component_count",
    "wall_ms",
)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15  # 2**64 / golden ratio, the splitmix64 increment


def _mix64(z: int) -> int:
    """splitmix64 finalizer: bijective avalanche mix on 64-bit integers."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master_seed: int, cell_index: int, run_index: int) -> int:
    """Stateless per-run seed: mix the master seed with the run coordinates.

    Bit-exact definition (all arithmetic mod 2**64, ``mix`` = splitmix64
    finalizer, ``G`` = 0x9E3779B97F4A7C15)::

        z = mix(master_seed)
        z = mix(z + G * (1 + cell_index))
        z = mix(z + G * (2 + run_index))

    Each stage is a bijection in its coordinate, so within one master seed
    and cell all run seeds are distinct, and collisions across cells are no
    more likely than for uniformly random 64-bit values.
    """
    z = _mix64(master_seed)
    z = _mix64((z + _GOLDEN * (1 + cell_index)) & _MASK64)
    z = _mix64((z + _GOLDEN * (2 + run_index)) & _MASK64)
    return z


@dataclass(frozen=True)
class SweepSpec:
    """Defines the experiment grid: sigma cube x runs_per_cell seeded runs."""

    sigma_values: Tuple[float, ...] = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
    runs_per_cell: int = 100
    base_config: SimConfig = field(default_factory=SimConfig)
    master_seed: int = 0
    parallelism: int = 1
    record_timing: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma_values", tuple(float(s) for s in self.sigma_values))
        if not self.sigma_values:
            raise ValueError("sigma_values must not be empty")
        if any(s < 0.0 for s in self.sigma_values):
            raise ValueError("sigma_values must all be >= 0")
        if self.runs_per_cell < 1:
            raise ValueError(f"runs_per_cell must be >= 1, got {self.runs_per_cell}")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")
        if not 0 <= self.master_seed < (1 << 64):
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def cells(self) -> List[Tuple[float, float, float]]:
        """All (sigma_d, sigma_rs, sigma_rw) cells; sigma_rw varies fastest."""
        return list(itertools.product(self.sigma_values, repeat=3))

    @property
    def total_runs(self) -> int:
        return len(self.sigma_values) ** 3 * self.runs_per_cell


@dataclass(frozen=True)
class FailedRun:
    """A run that raised instead of completing; kept re-runnable via its seed."""

    sigma_d: float
    sigma_rs: float
    sigma_rw: float
    run_index: int
    seed: int
    error: str


@dataclass
class ResultTable:
    """Sweep output: one RunResult per (cell, run_index), in cell-major order.

    ``spec`` is provenance metadata and deliberately excluded from equality:
    two tables are equal when their recorded outcomes are equal, no matter
    where they came from (a table loaded from CSV has no spec attached).
    """

    rows: List[RunResult]
    failures: List[FailedRun] = field(default_factory=list)
    spec: Optional[SweepSpec] = None
    version: str = "1"

    @property
    def complete(self) -> bool:
        return not self.failures

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResultTable):
            return NotImplemented
        return (
            self.version == other.version
            and self.rows == other.rows
            and self.failures == other.failures
        )


def _execute_item(
    item: Tuple[int, float, float, float, int, int, SimConfig, bool]
) -> Union[RunResult, FailedRun]:
    _cell_index, sigma_d, sigma_rs, sigma_rw, run_index, seed, base, record_timing = item
    try:
        diversity = dataclasses.replace(
            base.diversity, sigma_d=sigma_d, sigma_rs=sigma_rs, sigma_rw=sigma_rw
        )
        config = dataclasses.replace(base, diversity=diversity, seed=seed)
        _state, result = run(config, record_timing=record_timing)
        return dataclasses.replace(result, run_index=run_index)
    except Exception as exc:  # recorded, not retried: keeps failures auditable
        return FailedRun(sigma_d, sigma_rs, sigma_rw, run_index, seed, repr(exc))


ProgressSink = Callable[[Dict[str, object]], None]


def run_sweep(spec: SweepSpec, progress: Optional[ProgressSink] = None) -> ResultTable:
    """Execute every (cell, run_index) of the spec; order- and worker-invariant.

    A failing run is recorded as a FailedRun (with its derived seed) and the
    sweep continues; ``table.complete`` tells whether all runs succeeded.
    ``progress`` receives one event per finished run.
    """
    items = []
    for cell_index, (sigma_d, sigma_rs, sigma_rw) in enumerate(spec.cells()):
        for run_index in range(spec.runs_per_cell):
            seed = derive_seed(spec.master_seed, cell_index, run_index)
            items.append(
                (
                    cell_index,
                    sigma_d,
                    sigma_rs,
                    sigma_rw,
                    run_index,
                    seed,
                    spec.base_config,
                    spec.record_timing,
                )
            )

    total = len(items)
    start = time.perf_counter()
    outcomes: List[Union[RunResult, FailedRun]] = []

    def note_done() -> None:
        if progress is not None:
            elapsed = time.perf_counter() - start
            progress(
                {
                    "completed": len(outcomes),
                    "total": total,
                    "elapsed_s": elapsed,
                    "runs_per_sec": len(outcomes) / elapsed if elapsed > 0 else 0.0,
                }
            )

    if spec.parallelism == 1:
        for item in items:
            outcomes.append(_execute_item(item))
            note_done()
    else:
        chunksize = max(1, total // (spec.parallelism * 8))
        with ProcessPoolExecutor(max_workers=spec.parallelism) as pool:
            for outcome in pool.map(_execute_item, items, chunksize=chunksize):
                outcomes.append(outcome)
                note_done()

    rows = [o for o in outcomes if isinstance(o, RunResult)]
    failures = [o for o in outcomes if isinstance(o, FailedRun)]
    return ResultTable(rows=rows, failures=failures, spec=spec)


# -- persistence -------------------------------------------------------------


class ResultsFormatError(ValueError):
    """A results file does not conform to the documented CSV/JSONL schema."""


def _infer_format(path: Path, fmt: Optional[str]) -> str:
    if fmt is not None:
        if fmt not in ("csv", "jsonl"):
            raise ValueError(f"unknown results format {fmt!r}")
        return fmt
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    raise ValueError(f"cannot infer results format from {path.name!r}; pass fmt=")


def _sorted_rows(table: ResultTable) -> List[RunResult]:
    if table.spec is not None:
        cell_order = {cell: i for i, cell in enumerate(table.spec.cells())}
        key = lambda r: (cell_order[(r.sigma_d, r.sigma_rs, r.sigma_rw)], r.run_index)
    else:
        key = lambda r: (r.sigma_d, r.sigma_rs, r.sigma_rw, r.run_index)
    return sorted(table.rows, key=key)


def _row_values(row: RunResult) -> List[object]:
    return [
        repr(row.sigma_d),
        repr(row.sigma_rs),
        repr(row.sigma_rw),
        row.run_index,
        row.seed,
        repr(row.cd),
        "" if row.spl is None else repr(row.spl),
        row.edge_count,
        row.component_count,
        row.wall_ms,
    ]


def persist_results(table: ResultTable, path: Union[str, Path], fmt: Optional[str] = None) -> None:
    """Write the table to ``path`` as CSV or JSONL (inferred from the suffix).

    CSV carries exactly the documented columns (failures cannot be
    represented there and only successful rows are written); JSONL carries
    one object per run plus one object per failure (with an "error" key).
    The undefined-spl case is an empty CSV field / JSON null, never a
    sentinel number.
    """
    path = Path(path)
    fmt = _infer_format(path, fmt)
    rows = _sorted_rows(table)
    if fmt == "csv":
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow(_row_values(row))
    else:
        with open(path, "w") as handle:
            for row in rows:
                record = {name: getattr(row, name) for name in CSV_COLUMNS}
                handle.write(json.dumps(record) + "\n")
            for failure in table.failures:
                record = dataclasses.asdict(failure)
                handle.write(json.dumps(record) + "\n")


def _parse_field(name: str, raw: str, line_no: int):
    try:
        if name in ("run_index", "seed", "edge_count", "component_count", "wall_ms"):
            return int(raw)
        if name == "spl":
            return None if raw == "" else float(raw)
        return float(raw)
    except ValueError:
        raise ResultsFormatError(
            f"line {line_no}, column {name!r}: cannot parse {raw!r}"
        ) from None


def _load_csv(path: Path) -> ResultTable:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ResultsFormatError("line 1: empty file, expected a header row") from None
        unknown = set(header) - set(CSV_COLUMNS)
        missing = set(CSV_COLUMNS) - set(header)
        if unknown or missing:
            detail = []
            if unknown:
                detail.append(f"unknown column(s) {sorted(unknown)}")
            if missing:
                detail.append(f"missing column(s) {sorted(missing)}")
            raise ResultsFormatError(f"line 1: {', '.join(detail)}")
        rows = []
        for line_no, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise ResultsFormatError(
                    f"line {line_no}: expected {len(header)} fields, found {len(record)}"
                )
            values = {
                name: _parse_field(name, raw, line_no)
                for name, raw in zip(header, record)
            }
            rows.append(RunResult(**values))
    return ResultTable(rows=rows)


def _load_jsonl(path: Path) -> ResultTable:
    rows: List[RunResult] = []
    failures: List[FailedRun] = []
    with open(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ResultsFormatError(f"line {line_no}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise ResultsFormatError(f"line {line_no}: expected an object")
            if "error" in obj:
                try:
                    failures.append(
                        FailedRun(
                            sigma_d=float(obj["sigma_d"]),
                            sigma_rs=float(obj["sigma_rs"]),
                            sigma_rw=float(obj["sigma_rw"]),
                            run_index=int(obj["run_index"]),
                            seed=int(obj["seed"]),
                            error=str(obj["error"]),
                        )
                    )
                except KeyError as exc:
                    raise ResultsFormatError(
                        f"line {line_no}, column {exc.args[0]!r}: missing field"
                    ) from None
                continue
            missing = [name for name in CSV_COLUMNS if name not in obj]
            if missing:
                raise ResultsFormatError(
                    f"line {line_no}, column {missing[0]!r}: missing field"
                )
            spl = obj["spl"]
            rows.append(
                RunResult(
                    sigma_d=float(obj["sigma_d"]),
                    sigma_rs=float(obj["sigma_rs"]),
                    sigma_rw=float(obj["sigma_rw"]),
                    run_index=int(obj["run_index"]),
                    seed=int(obj["seed"]),
                    cd=float(obj["cd"]),
                    spl=None if spl is None else float(spl),
                    edge_count=int(obj["edge_count"]),
                    component_count=int(obj["component_count"]),
                    wall_ms=int(obj["wall_ms"]),
                )
            )
    return ResultTable(rows=rows, failures=failures)


def load_results(path: Union[str, Path], fmt: Optional[str] = None) -> ResultTable:
    """Read a results table persisted by :func:`persist_results`.

    Columns are matched by name, so a shuffled CSV header is accepted.
    Malformed content raises :class:`ResultsFormatError` naming the line
    and column.
    """
    path = Path(path)
    fmt = _infer_format(path, fmt)
    if fmt == "csv":
        return _load_csv(path)
    return _load_jsonl(path)
