"""CSV and text renderings of reports, plus readers that re-check them against the simulator.

Seconds are written with 9 decimals and bytes as plain integers, so every
file is byte-identical across runs with the same inputs.
"""
import csv
import io
import math
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from ckptprof.misc.errors import DocumentError
from ckptprof.misc.formatting import fmt_bytes, fmt_seconds
from ckptprof.model.tree import CallTree, CheckpointConfig, StaticRef, format_refs, parse_refs
from ckptprof.services.binomial import BinomialCost
from ckptprof.services.optimizer import ParetoPoint, TrajectoryPoint
from ckptprof.services.profiler import ProfileReport, Suggestion
from ckptprof.services.simulator import AdjointCost, simulate

REPORT_FIELDS = ["ref", "occurrences", "category", "dt_s", "dtn_bytes", "dpk_bytes"]
TRAJECTORY_FIELDS = ["step", "time_s", "peak_bytes", "applied"]
SCATTER_FIELDS = ["config_id", "time_s", "peak_bytes"]
SCATTER_CONFIG_FIELDS = ["config_id", "config"]
PARETO_FIELDS = ["time_s", "peak_bytes", "config"]
REVOLVE_FIELDS = ["l", "d", "r", "E", "stores", "restores"]

# Slack for values that went through the 9-decimal text form.
TOLERANCE = 1e-9


def _csv(header: List[str], rows: Iterable[List[object]]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return out.getvalue()


def _table(header: List[str], rows: List[List[str]]) -> str:
    widths = [max(len(cell) for cell in column) for column in zip(header, *rows)]
    lines = [
        "  ".join(cell.rjust(width) if i else cell.ljust(width) for i, (cell, width) in enumerate(zip(row, widths)))
        for row in [header, *rows]
    ]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _suggestion_row(s: Suggestion) -> List[str]:
    return [str(s.ref), str(s.occurrences), str(s.category), fmt_seconds(s.dt), fmt_bytes(s.dtn), fmt_bytes(s.dpk)]


# profiler ---------------------------------------------------------------------------
def report_csv(report: ProfileReport) -> str:
    return _csv(REPORT_FIELDS, (_suggestion_row(s) for s in report.suggestions))


def format_report_table(report: ProfileReport) -> str:
    rows = []
    for s in report.suggestions:
        row = _suggestion_row(s)
        if s.ref.proc in report.multi_site_procs:
            row[0] += "*"
        rows.append(row)
    text = _table(REPORT_FIELDS, rows)
    if report.multi_site_procs:
        text += "* procedure called at several sites; values are for this site only\n"
    return text


# optimizer --------------------------------------------------------------------------
def trajectory_csv(trajectory: Sequence[TrajectoryPoint]) -> str:
    return _csv(
        TRAJECTORY_FIELDS,
        ([p.step, fmt_seconds(p.time_s), fmt_bytes(p.peak_bytes), format_refs(p.applied)] for p in trajectory),
    )


def suggestions_csv(trajectory: Sequence[TrajectoryPoint]) -> str:
    return _csv(
        ["step", *REPORT_FIELDS],
        ([p.step, *_suggestion_row(s)] for p in trajectory for s in p.suggestions),
    )


def scatter_csv(samples: Sequence[Tuple[CheckpointConfig, AdjointCost]]) -> str:
    return _csv(
        SCATTER_FIELDS,
        ([i, fmt_seconds(cost.time_s), fmt_bytes(cost.peak_bytes)] for i, (_, cost) in enumerate(samples)),
    )


def scatter_configs_csv(samples: Sequence[Tuple[CheckpointConfig, AdjointCost]]) -> str:
    return _csv(SCATTER_CONFIG_FIELDS, ([i, format_refs(config.inhibited)] for i, (config, _) in enumerate(samples)))


def pareto_csv(front: Sequence[ParetoPoint]) -> str:
    return _csv(
        PARETO_FIELDS,
        ([fmt_seconds(p.time_s), fmt_bytes(p.peak_bytes), format_refs(p.config.inhibited)] for p in front),
    )


# binomial ---------------------------------------------------------------------------
def revolve_row(l: int, d: int, cost: BinomialCost) -> List[str]:
    return [str(l), str(d), str(cost.repetition), str(cost.step_executions), str(cost.stores), str(cost.restores)]


def format_revolve_table(rows: List[List[str]]) -> str:
    return _table(REVOLVE_FIELDS, rows)


# readers ----------------------------------------------------------------------------
@dataclass(frozen=True)
class TrajectoryRow:
    step: int
    time_s: float
    peak_bytes: int
    applied: FrozenSet[StaticRef]


@dataclass(frozen=True)
class ScatterRow:
    config_id: int
    time_s: float
    peak_bytes: int


@dataclass(frozen=True)
class ParetoRow:
    time_s: float
    peak_bytes: int
    inhibited: FrozenSet[StaticRef]


def _read(text: str, header: List[str]) -> List[List[str]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != header:
        raise DocumentError(f"expected CSV header {','.join(header)}", line=1)
    for number, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DocumentError(f"expected {len(header)} fields, got {len(row)}", line=number)
    return rows[1:]


def _convert(rows: List[List[str]], build):
    out = []
    for number, row in enumerate(rows, start=2):
        try:
            out.append(build(row))
        except ValueError as e:
            raise DocumentError(f"malformed row: {e}", line=number) from e
    return out


def read_trajectory_csv(text: str) -> List[TrajectoryRow]:
    return _convert(
        _read(text, TRAJECTORY_FIELDS),
        lambda r: TrajectoryRow(int(r[0]), float(r[1]), int(r[2]), parse_refs(r[3])),
    )


def read_scatter_csv(text: str) -> List[ScatterRow]:
    return _convert(_read(text, SCATTER_FIELDS), lambda r: ScatterRow(int(r[0]), float(r[1]), int(r[2])))


def read_scatter_configs_csv(text: str) -> List[Tuple[int, FrozenSet[StaticRef]]]:
    return _convert(_read(text, SCATTER_CONFIG_FIELDS), lambda r: (int(r[0]), parse_refs(r[1])))


def read_pareto_csv(text: str) -> List[ParetoRow]:
    return _convert(
        _read(text, PARETO_FIELDS),
        lambda r: ParetoRow(float(r[0]), int(r[1]), parse_refs(r[2])),
    )


# verification -----------------------------------------------------------------------
def _mismatch(what: str, config: CheckpointConfig, time_s: float, peak: int, cost: AdjointCost) -> Optional[str]:
    if math.isclose(time_s, cost.time_s, rel_tol=TOLERANCE, abs_tol=TOLERANCE) and peak == cost.peak_bytes:
        return None
    return (
        f"{what} [{format_refs(config.inhibited)}]: recorded ({fmt_seconds(time_s)}, {peak}) "
        f"but simulate gives ({fmt_seconds(cost.time_s)}, {cost.peak_bytes})"
    )


def verify_trajectory(tree: CallTree, rows: Sequence[TrajectoryRow], config0: CheckpointConfig) -> List[str]:
    """Replay the applied refs step by step; returns one message per disagreeing row."""
    problems = []
    config = config0
    for row in rows:
        config = config.with_inhibited(row.applied)
        problem = _mismatch(f"trajectory step {row.step}", config, row.time_s, row.peak_bytes, simulate(tree, config))
        if problem:
            problems.append(problem)
    return problems


def verify_scatter(
    tree: CallTree,
    rows: Sequence[ScatterRow],
    configs: Sequence[Tuple[int, FrozenSet[StaticRef]]],
    base: Optional[CheckpointConfig] = None,
) -> List[str]:
    binomial = dict(base.binomial) if base is not None else {}
    by_id = dict(configs)
    problems = []
    for row in rows:
        if row.config_id not in by_id:
            problems.append(f"scatter point {row.config_id} has no configuration")
            continue
        config = CheckpointConfig(inhibited=by_id[row.config_id], binomial=binomial)
        problem = _mismatch(f"scatter point {row.config_id}", config, row.time_s, row.peak_bytes, simulate(tree, config))
        if problem:
            problems.append(problem)
    return problems


def verify_pareto(tree: CallTree, rows: Sequence[ParetoRow], base: Optional[CheckpointConfig] = None) -> List[str]:
    binomial = dict(base.binomial) if base is not None else {}
    problems = []
    for row in rows:
        config = CheckpointConfig(inhibited=row.inhibited, binomial=binomial)
        problem = _mismatch("pareto point", config, row.time_s, row.peak_bytes, simulate(tree, config))
        if problem:
            problems.append(problem)
    return problems
