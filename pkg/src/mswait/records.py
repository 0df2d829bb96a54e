"""Right-censored multi-stage subject histories.

Each subject follows a prefix of a root path through the stage tree. A visit
to stage ``j`` has an entry time ``T_ij``, an exit time ``U_ij`` (the
censoring time when the exit was not observed) and the indicator ``delta_ij``
of an observed exit. Entry into a visited stage is always observed.

The CSV layout is one row per stage visit::

    subject_id,stage,entry_time,exit_time,status

with ``status`` one of ``to:<stage>``, ``censored`` or ``terminal``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DuplicateStageVisit,
    EdgeViolation,
    MalformedRow,
    StageNotVisited,
    TimeOrderViolation,
    UnknownStage,
    ValidationError,
)
from .graph import StageGraph

__all__ = [
    "StageVisit",
    "SubjectRecord",
    "Dataset",
    "StageColumns",
    "TransitionTable",
    "parse_dataset",
    "write_dataset",
    "transition_table",
    "waiting_time",
]

CSV_COLUMNS = ("subject_id", "stage", "entry_time", "exit_time", "status")


@dataclass(frozen=True)
class StageVisit:
    stage: int
    entry: float
    exit: float
    exited: bool  # delta_ij
    to: int | None = None

    @property
    def waiting_time(self) -> float:
        return self.exit - self.entry


@dataclass(frozen=True)
class SubjectRecord:
    """Observed history of one subject.

    `status` is ``"censored"`` (follow-up ended at ``censoring_time`` in the
    last visited stage) or ``"terminal"`` (the last visited stage is terminal).
    """

    subject_id: str
    visits: tuple[StageVisit, ...]
    status: str

    @property
    def censored(self) -> bool:
        return self.status == "censored"

    @property
    def censoring_time(self) -> float | None:
        return self.visits[-1].exit if self.censored else None

    @property
    def final_time(self) -> float:
        """``T_i``: censoring time, or time of the last observed transition."""
        last = self.visits[-1]
        return last.exit if self.censored else last.entry

    @property
    def last_stage(self) -> int:
        return self.visits[-1].stage

    @property
    def stages(self) -> tuple[int, ...]:
        return tuple(v.stage for v in self.visits)

    def visit(self, stage: int) -> StageVisit:
        for v in self.visits:
            if v.stage == stage:
                return v
        raise StageNotVisited(f"subject {self.subject_id} never entered stage {stage}")

    def gamma(self, stage: int) -> int:
        return int(any(v.stage == stage for v in self.visits))

    def delta(self, stage: int) -> int:
        return int(any(v.stage == stage and v.exited for v in self.visits))


def waiting_time(rec: SubjectRecord, stage: int) -> float:
    """Observed time spent in `stage`, ``U_ij - T_ij``."""
    return rec.visit(stage).waiting_time


class StageColumns(NamedTuple):
    """Visits to a single stage, one entry per subject that entered it."""

    idx: np.ndarray  # subject indices
    entry: np.ndarray
    exit: np.ndarray
    exited: np.ndarray  # bool
    dest: np.ndarray  # child stage id, -1 when no exit observed

    @property
    def wait(self) -> np.ndarray:
        return self.exit - self.entry


def validate_record(rec: SubjectRecord, graph: StageGraph) -> None:
    sid = rec.subject_id
    if not rec.visits:
        raise MalformedRow(f"subject {sid}: no stage visits")
    if rec.status not in ("censored", "terminal"):
        raise MalformedRow(f"subject {sid}: unknown status {rec.status!r}")
    stages = [v.stage for v in rec.visits]
    for s in stages:
        if s not in graph:
            raise UnknownStage(f"subject {sid}: stage {s} is not in the graph")
    if len(set(stages)) != len(stages):
        dup = next(s for s in stages if stages.count(s) > 1)
        raise DuplicateStageVisit(f"subject {sid}: stage {dup} visited twice")
    for k, v in enumerate(rec.visits):
        if not (np.isfinite(v.entry) and np.isfinite(v.exit)):
            raise TimeOrderViolation(f"subject {sid}: non-finite time in stage {v.stage}")
        if v.entry < 0 or v.exit < v.entry:
            raise TimeOrderViolation(
                f"subject {sid}: stage {v.stage} has entry {v.entry} and exit {v.exit}"
            )
        last = k == len(rec.visits) - 1
        if k == 0 and v.stage != graph.root:
            raise EdgeViolation(f"subject {sid}: history starts in stage {v.stage}, not the root")
        if not last:
            nxt = rec.visits[k + 1]
            if not v.exited or v.to != nxt.stage:
                raise MalformedRow(f"subject {sid}: stage {v.stage} is not followed by its exit")
            if graph.predecessor(nxt.stage) != v.stage:
                raise EdgeViolation(f"subject {sid}: no edge {v.stage}->{nxt.stage}")
            if nxt.entry != v.exit:
                raise TimeOrderViolation(
                    f"subject {sid}: exit from {v.stage} at {v.exit} but entry to "
                    f"{nxt.stage} at {nxt.entry}"
                )
        elif v.exited:
            raise MalformedRow(f"subject {sid}: last visit (stage {v.stage}) cannot have an exit")
    terminal = graph.is_terminal(rec.visits[-1].stage)
    if rec.status == "terminal" and not terminal:
        raise MalformedRow(f"subject {sid}: status terminal in non-terminal stage {rec.last_stage}")
    if rec.status == "censored" and terminal:
        raise MalformedRow(f"subject {sid}: censored in terminal stage {rec.last_stage}")


class Dataset:
    """Validated collection of subject histories on a fixed stage graph.

    Internally columnar: for every stage the entry/exit times and indicators
    of all subjects are stored as arrays, with NaN where the stage was never
    entered. Build with :meth:`from_records` or :func:`parse_dataset`.
    """

    def __init__(
        self,
        graph: StageGraph,
        subject_ids: Sequence[str],
        entry: np.ndarray,
        exit: np.ndarray,
        exited: np.ndarray,
        dest: np.ndarray,
        censored: np.ndarray,
        last_stage: np.ndarray,
    ):
        self.graph = graph
        self.subject_ids = tuple(str(s) for s in subject_ids)
        self.col = {s: k for k, s in enumerate(graph.stages)}
        self.entry = entry
        self.exit = exit
        self.exited = exited
        self.dest = dest
        self.censored = censored
        self.last_stage = last_stage
        if len(set(self.subject_ids)) != len(self.subject_ids):
            raise ValidationError("subject ids must be unique")
        for a in (entry, exit, exited, dest):
            a.flags.writeable = False

    @property
    def n(self) -> int:
        return len(self.subject_ids)

    def __len__(self) -> int:
        return self.n

    @property
    def entered(self) -> np.ndarray:
        return ~np.isnan(self.entry)

    @cached_property
    def final_time(self) -> np.ndarray:
        """``T_i`` for every subject."""
        rows = np.arange(self.n)
        cols = np.array([self.col[s] for s in self.last_stage], dtype=int)
        if not self.n:
            return np.zeros(0)
        return np.where(self.censored, self.exit[rows, cols], self.entry[rows, cols])

    @property
    def censoring_fraction(self) -> float:
        return float(self.censored.mean()) if self.n else 0.0

    def stage(self, j: int) -> StageColumns:
        if j not in self.col:
            raise UnknownStage(f"stage {j} is not in the graph")
        c = self.col[j]
        idx = np.flatnonzero(~np.isnan(self.entry[:, c]))
        return StageColumns(
            idx, self.entry[idx, c], self.exit[idx, c], self.exited[idx, c], self.dest[idx, c]
        )

    def censored_in(self, j: int) -> np.ndarray:
        """Indices of subjects whose follow-up ended while in stage `j`."""
        return np.flatnonzero(self.censored & (self.last_stage == j))

    @classmethod
    def from_records(cls, graph: StageGraph, records: Iterable[SubjectRecord]) -> Dataset:
        records = list(records)
        for rec in records:
            validate_record(rec, graph)
        n, S = len(records), len(graph.stages)
        col = {s: k for k, s in enumerate(graph.stages)}
        entry = np.full((n, S), np.nan)
        exit_ = np.full((n, S), np.nan)
        exited = np.zeros((n, S), dtype=bool)
        dest = np.full((n, S), -1, dtype=np.int64)
        for i, rec in enumerate(records):
            for v in rec.visits:
                c = col[v.stage]
                entry[i, c], exit_[i, c], exited[i, c] = v.entry, v.exit, v.exited
                if v.to is not None:
                    dest[i, c] = v.to
        ds = cls(
            graph,
            [r.subject_id for r in records],
            entry,
            exit_,
            exited,
            dest,
            np.array([r.censored for r in records], dtype=bool),
            np.array([r.last_stage for r in records], dtype=np.int64),
        )
        ds.__dict__["records"] = tuple(records)
        return ds

    @cached_property
    def records(self) -> tuple[SubjectRecord, ...]:
        out = []
        for i, sid in enumerate(self.subject_ids):
            path = self.graph.path_from_root(int(self.last_stage[i]))
            visits = []
            for s in path:
                c = self.col[s]
                to = int(self.dest[i, c])
                visits.append(
                    StageVisit(
                        s,
                        float(self.entry[i, c]),
                        float(self.exit[i, c]),
                        bool(self.exited[i, c]),
                        to if to >= 0 else None,
                    )
                )
            out.append(SubjectRecord(sid, tuple(visits), "censored" if self.censored[i] else "terminal"))
        return tuple(out)

    def subset(self, idx) -> Dataset:
        idx = np.asarray(idx, dtype=int)
        return Dataset(
            self.graph,
            [self.subject_ids[i] for i in idx],
            self.entry[idx],
            self.exit[idx],
            self.exited[idx],
            self.dest[idx],
            self.censored[idx],
            self.last_stage[idx],
        )


def _parse_status(raw: str, where: str) -> tuple[str, int | None]:
    s = raw.strip().lower()
    if s in ("censored", "terminal"):
        return s, None
    if s.startswith("to:"):
        try:
            return "to", int(s[3:])
        except ValueError:
            pass
    raise MalformedRow(f"{where}: bad status {raw!r}")


def _parse_time(raw: str, where: str, name: str) -> float:
    try:
        x = float(raw)
    except (TypeError, ValueError):
        raise MalformedRow(f"{where}: {name} {raw!r} is not a number") from None
    if not np.isfinite(x):
        raise MalformedRow(f"{where}: {name} must be finite")
    return x


def parse_dataset(path: str | Path, graph: StageGraph) -> Dataset:
    """Read and validate a subject CSV against `graph`.

    A final ``to:<k>`` row whose target ``k`` is terminal may omit the row for
    stage ``k``; the terminal visit is then implied.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRow(f"{path}: empty file") from None
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise MalformedRow(f"{path}: missing columns {missing}")
        pos = {c: header.index(c) for c in CSV_COLUMNS}
        rows: dict[str, list] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            where = f"{path}:{lineno}"
            if len(row) < len(header):
                raise MalformedRow(f"{where}: expected {len(header)} fields, got {len(row)}")
            sid = row[pos["subject_id"]].strip()
            if not sid:
                raise MalformedRow(f"{where}: empty subject_id")
            try:
                stage = int(row[pos["stage"]])
            except ValueError:
                raise MalformedRow(f"{where}: bad stage {row[pos['stage']]!r}") from None
            status, to = _parse_status(row[pos["status"]], where)
            entry = _parse_time(row[pos["entry_time"]], where, "entry_time")
            raw_exit = row[pos["exit_time"]].strip()
            exit_ = entry if (status == "terminal" and raw_exit == "") else _parse_time(
                raw_exit, where, "exit_time"
            )
            rows.setdefault(sid, []).append((where, stage, entry, exit_, status, to))

    records = []
    for sid, visits_raw in rows.items():
        visits = []
        status = "censored"
        for k, (where, stage, entry, exit_, st, to) in enumerate(visits_raw):
            last = k == len(visits_raw) - 1
            if st == "to":
                if to not in graph:
                    raise EdgeViolation(f"{where}: transition to unknown stage {to}")
                if graph.predecessor(to) != stage:
                    raise EdgeViolation(f"{where}: no edge {stage}->{to} in the graph")
                visits.append(StageVisit(stage, entry, exit_, True, to))
                if last:
                    if not graph.is_terminal(to):
                        raise MalformedRow(f"{where}: history ends with a move to non-terminal stage {to}")
                    visits.append(StageVisit(to, exit_, exit_, False, None))
                    status = "terminal"
            else:
                if not last:
                    raise MalformedRow(f"{where}: status {st!r} must be the subject's last row")
                if st == "terminal":
                    visits.append(StageVisit(stage, entry, entry, False, None))
                    if exit_ != entry:
                        raise TimeOrderViolation(f"{where}: terminal row must have exit_time equal to entry_time")
                else:
                    visits.append(StageVisit(stage, entry, exit_, False, None))
                status = st
        records.append(SubjectRecord(sid, tuple(visits), status))
    return Dataset.from_records(graph, records)


def write_dataset(ds: Dataset, path: str | Path) -> None:
    """Write `ds` in the subject CSV layout; times use exact float repr."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec in ds.records:
            for v in rec.visits:
                if v.to is not None:
                    status = f"to:{v.to}"
                elif rec.status == "terminal":
                    status = "terminal"
                else:
                    status = "censored"
                w.writerow((rec.subject_id, v.stage, repr(v.entry), repr(v.exit), status))


@dataclass(frozen=True)
class TransitionTable:
    """Observed transition counts; the diagonal holds per-stage censoring counts."""

    stages: tuple[int, ...]
    counts: np.ndarray

    def __getitem__(self, key: tuple[int, int]) -> int:
        a, b = key
        return int(self.counts[self.stages.index(a), self.stages.index(b)])

    def row(self, stage: int) -> np.ndarray:
        return self.counts[self.stages.index(stage)]

    def format(self) -> str:
        width = max(4, max((len(str(int(x))) for x in self.counts.flat), default=1) + 1)
        head = "from\\to" + "".join(f"{s:>{width}}" for s in self.stages)
        lines = [head]
        for s, r in zip(self.stages, self.counts):
            lines.append(f"{s:>7}" + "".join(f"{int(x):>{width}}" for x in r))
        return "\n".join(lines)

    def to_csv_rows(self) -> list[list]:
        return [["from", *self.stages]] + [[s, *map(int, r)] for s, r in zip(self.stages, self.counts)]


def transition_table(ds: Dataset) -> TransitionTable:
    stages = tuple(ds.graph.stages)
    counts = np.zeros((len(stages), len(stages)), dtype=np.int64)
    pos = {s: k for k, s in enumerate(stages)}
    for s in stages:
        c = ds.col[s]
        d = ds.dest[:, c]
        for child in ds.graph.successors(s):
            counts[pos[s], pos[child]] = int(np.sum(ds.exited[:, c] & (d == child)))
        counts[pos[s], pos[s]] = int(np.sum(ds.censored & (ds.last_stage == s)))
    return TransitionTable(stages, counts)
