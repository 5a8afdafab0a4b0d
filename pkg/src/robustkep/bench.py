"""Benchmark harness: experiment matrix execution and result aggregation."""

from __future__ import annotations

import csv
import io as _io
import math
from dataclasses import dataclass, fields
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

from .core import CompatibilityGraph
from .solvers import RobustConfig, solve_robust

DEFAULT_SHIFT = 10.0


@dataclass
class BenchRecord:
    """One (instance, config) benchmark cell, in CSV column order."""

    instance_name: str
    n_pairs: int
    n_ndds: int
    n_arcs: int
    max_cycle_len: int
    max_chain_len: int
    budget: int
    policy: str
    encoding: str
    method: str
    lifting: bool
    status: str
    objective: Optional[int]
    time_total_s: float
    time_stage2_s: float
    time_stage3_s: float
    n_attacks: int
    n_subproblems: int
    bb_nodes: int
    seed: Optional[int]

    def __post_init__(self):
        if self.status not in ("optimal", "timelimit"):
            raise ValueError(f"unknown status {self.status!r}")
        if (self.objective is not None) != (self.status == "optimal"):
            raise ValueError("objective must be present exactly when optimal")
        if min(self.time_total_s, self.time_stage2_s, self.time_stage3_s) < 0:
            raise ValueError("negative time")


CSV_FIELDS = [f.name for f in fields(BenchRecord)]


def record_to_row(rec: BenchRecord) -> List[str]:
    row = []
    for name in CSV_FIELDS:
        val = getattr(rec, name)
        if val is None:
            row.append("")
        elif isinstance(val, bool):
            row.append("on" if val else "off")
        elif isinstance(val, float):
            row.append(f"{val:.6f}")
        else:
            row.append(str(val))
    return row


def record_from_row(row: Sequence[str]) -> BenchRecord:
    if len(row) != len(CSV_FIELDS):
        raise ValueError(f"expected {len(CSV_FIELDS)} columns, got {len(row)}")
    vals: Dict[str, object] = {}
    for name, raw in zip(CSV_FIELDS, row):
        if name in ("objective", "seed"):
            vals[name] = None if raw == "" else int(raw)
        elif name == "lifting":
            vals[name] = raw == "on"
        elif name.startswith("time_"):
            vals[name] = float(raw)
        elif name in ("instance_name", "policy", "encoding", "method", "status"):
            vals[name] = raw
        else:
            vals[name] = int(raw)
    return BenchRecord(**vals)  # type: ignore[arg-type]


def write_records(records: Iterable[BenchRecord], stream: TextIO) -> None:
    writer = csv.writer(stream)
    writer.writerow(CSV_FIELDS)
    for rec in records:
        writer.writerow(record_to_row(rec))


def read_records(stream: TextIO) -> List[BenchRecord]:
    reader = csv.reader(stream)
    rows = [r for r in reader if r]
    if not rows:
        return []
    if rows[0] == CSV_FIELDS:
        rows = rows[1:]
    return [record_from_row(r) for r in rows]


def run_matrix(
    instances: Sequence[Tuple[str, CompatibilityGraph]],
    configs: Sequence[RobustConfig],
    stream: Optional[TextIO] = None,
) -> List[BenchRecord]:
    """Solve every (instance, config) cell; records are written to ``stream``
    as they complete so partial runs remain usable."""
    writer = None
    if stream is not None:
        writer = csv.writer(stream)
        writer.writerow(CSV_FIELDS)
    records: List[BenchRecord] = []
    for name, graph in instances:
        for cfg in configs:
            result = solve_robust(graph, cfg)
            rec = BenchRecord(
                instance_name=name,
                n_pairs=graph.num_pairs,
                n_ndds=graph.num_ndds,
                n_arcs=len(graph.arcs),
                max_cycle_len=cfg.max_cycle_len,
                max_chain_len=cfg.max_chain_len,
                budget=cfg.budget,
                policy=cfg.policy.value,
                encoding=cfg.encoding.value,
                method=cfg.subproblem_method,
                lifting=cfg.lifting,
                status=result.status,
                objective=result.value if result.status == "optimal" else None,
                time_total_s=result.stats.time_total,
                time_stage2_s=result.stats.time_stage2,
                time_stage3_s=result.stats.time_stage3,
                n_attacks=result.stats.n_attacks,
                n_subproblems=result.stats.n_subproblems,
                bb_nodes=result.stats.bb_nodes,
                seed=cfg.seed,
            )
            records.append(rec)
            if writer is not None:
                writer.writerow(record_to_row(rec))
                stream.flush()
    return records


def shifted_geometric_mean(values: Sequence[float], shift: float = DEFAULT_SHIFT) -> float:
    """prod(v + shift)^(1/n) - shift."""
    if shift < 0:
        raise ValueError("shift must be >= 0")
    if not values:
        raise ValueError("empty value list")
    log_sum = 0.0
    for v in values:
        if v + shift <= 0:
            raise ValueError(f"value {v} with shift {shift} is not positive")
        log_sum += math.log(v + shift)
    return math.exp(log_sum / len(values)) - shift


GROUP_KEYS = [
    "n_vertices",
    "max_cycle_len",
    "max_chain_len",
    "budget",
    "policy",
    "encoding",
    "method",
    "lifting",
]

SUMMARY_FIELDS = GROUP_KEYS + [
    "n_instances",
    "n_optimal",
    "sgm_time_s",
    "mean_attacks",
    "mean_subproblems",
    "mean_bb_nodes",
]


def aggregate(
    records: Sequence[BenchRecord], shift: float = DEFAULT_SHIFT
) -> List[Dict[str, object]]:
    """Per-group summary: count solved, shifted geometric mean of total times,
    arithmetic means of attack/subproblem/node counts over solved cells."""
    groups: Dict[Tuple, List[BenchRecord]] = {}
    for rec in records:
        key = (
            rec.n_pairs + rec.n_ndds,
            rec.max_cycle_len,
            rec.max_chain_len,
            rec.budget,
            rec.policy,
            rec.encoding,
            rec.method,
            rec.lifting,
        )
        groups.setdefault(key, []).append(rec)
    rows: List[Dict[str, object]] = []
    for key in sorted(groups, key=lambda k: tuple(str(t) for t in k)):
        cells = groups[key]
        solved = [r for r in cells if r.status == "optimal"]
        row: Dict[str, object] = dict(zip(GROUP_KEYS, key))
        row["n_instances"] = len(cells)
        row["n_optimal"] = len(solved)
        if solved:
            row["sgm_time_s"] = shifted_geometric_mean(
                [r.time_total_s for r in solved], shift
            )
            row["mean_attacks"] = sum(r.n_attacks for r in solved) / len(solved)
            row["mean_subproblems"] = sum(r.n_subproblems for r in solved) / len(solved)
            row["mean_bb_nodes"] = sum(r.bb_nodes for r in solved) / len(solved)
        else:
            for name in ("sgm_time_s", "mean_attacks", "mean_subproblems", "mean_bb_nodes"):
                row[name] = None
        rows.append(row)
    return rows


def _fmt(val: object) -> str:
    if val is None:
        return "—"
    if isinstance(val, bool):
        return "on" if val else "off"
    if isinstance(val, float):
        return f"{val:.2f}"
    return str(val)


def summary_to_csv(rows: Sequence[Dict[str, object]]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(SUMMARY_FIELDS)
    for row in rows:
        writer.writerow(["" if row[f] is None else _fmt(row[f]) for f in SUMMARY_FIELDS])
    return buf.getvalue()


def summary_to_table(rows: Sequence[Dict[str, object]]) -> str:
    """Aligned text table with one line per group."""
    headers = ["|V|", "K", "L", "B", "policy", "enc", "method", "lift",
               "n", "opt", "sgm time", "#att", "#sub", "#nodes"]
    body = [
        [_fmt(row[f]) for f in SUMMARY_FIELDS]
        for row in rows
    ]
    widths = [
        max(len(headers[i]), max((len(r[i]) for r in body), default=0))
        for i in range(len(headers))
    ]
    def line(cells):
        return "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    out = [line(headers), line(["-" * w for w in widths])]
    out += [line(r) for r in body]
    return "\n".join(out) + "\n"
