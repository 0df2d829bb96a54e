"""Progressive multi-stage models as rooted trees of stages."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import (
    CycleDetected,
    DuplicateStage,
    MultipleParents,
    MultipleRoots,
    NoPath,
    UnknownStage,
    UnreachableStage,
    ValidationError,
)

__all__ = [
    "StageGraph",
    "build_graph",
    "load_graph",
    "six_stage_graph",
    "bmt_nine_stage_graph",
]


@dataclass(frozen=True)
class StageGraph:
    """A validated progressive tree of stages.

    Stage ids are opaque integers. Use :func:`build_graph` to construct one;
    the constructor itself does not validate.
    """

    stages: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    root: int
    _children: dict[int, tuple[int, ...]] = field(repr=False, compare=False)
    _parent: dict[int, int | None] = field(repr=False, compare=False)

    def __contains__(self, stage: object) -> bool:
        return stage in self._parent

    def _check(self, stage: int) -> None:
        if stage not in self._parent:
            raise UnknownStage(f"stage {stage!r} is not in the graph")

    def successors(self, stage: int) -> tuple[int, ...]:
        self._check(stage)
        return self._children[stage]

    def predecessor(self, stage: int) -> int | None:
        self._check(stage)
        return self._parent[stage]

    def is_terminal(self, stage: int) -> bool:
        self._check(stage)
        return not self._children[stage]

    @property
    def terminal_stages(self) -> tuple[int, ...]:
        return tuple(s for s in self.stages if not self._children[s])

    @property
    def transient_stages(self) -> tuple[int, ...]:
        return tuple(s for s in self.stages if self._children[s])

    def path_from_root(self, stage: int) -> list[int]:
        self._check(stage)
        path = [stage]
        while (p := self._parent[path[-1]]) is not None:
            path.append(p)
        return path[::-1]

    def unique_path(self, start: int, end: int) -> list[int]:
        """Stages on the chain from `start` down to `end`, both included.

        Raises
        ------
        NoPath
            If `end` is not in the subtree rooted at `start`.
        """
        self._check(start)
        path = self.path_from_root(end)
        try:
            i = path.index(start)
        except ValueError:
            raise NoPath(f"stage {end} is not reachable from stage {start}") from None
        return path[i:]

    def path_edges(self, start: int, end: int) -> list[tuple[int, int]]:
        path = self.unique_path(start, end)
        return list(zip(path[:-1], path[1:]))

    def is_ancestor(self, ancestor: int, stage: int) -> bool:
        """True when `ancestor` lies on the root path of `stage` (or equals it)."""
        return ancestor in self.path_from_root(stage)

    def to_dict(self) -> dict:
        return {"stages": list(self.stages), "edges": [list(e) for e in self.edges]}

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")


def build_graph(stages: Iterable[int], edges: Iterable[tuple[int, int]]) -> StageGraph:
    """Validate `stages` and parent->child `edges` as a rooted tree."""
    stages = tuple(int(s) for s in stages)
    edges = tuple((int(a), int(b)) for a, b in edges)
    if len(set(stages)) != len(stages):
        dup = sorted({s for s in stages if stages.count(s) > 1})
        raise DuplicateStage(f"duplicate stage ids: {dup}")
    known = set(stages)
    if not known:
        raise ValidationError("a stage graph needs at least one stage")
    parent: dict[int, int | None] = {s: None for s in stages}
    children: dict[int, list[int]] = {s: [] for s in stages}
    for a, b in edges:
        for s in (a, b):
            if s not in known:
                raise UnknownStage(f"edge ({a}, {b}) references unknown stage {s}")
        if a == b:
            raise CycleDetected(f"self-loop on stage {a}")
        if parent[b] is not None:
            raise MultipleParents(f"stage {b} has more than one incoming edge")
        parent[b] = a
        children[a].append(b)

    roots = [s for s in stages if parent[s] is None]
    if not roots:
        raise CycleDetected("no root stage: every stage has a parent")
    if len(roots) > 1:
        raise MultipleRoots(f"more than one root stage: {roots}")
    root = roots[0]

    seen = {root}
    frontier = [root]
    while frontier:
        s = frontier.pop()
        for c in children[s]:
            if c in seen:  # pragma: no cover - impossible with single parents
                raise CycleDetected(f"stage {c} reached twice")
            seen.add(c)
            frontier.append(c)
    missing = [s for s in stages if s not in seen]
    if missing:
        # with one parent per stage, anything unreachable hangs off a cycle
        s, visited = missing[0], set()
        while s is not None and s not in visited:
            visited.add(s)
            s = parent[s]
        if s is not None:
            raise CycleDetected(f"cycle through stage {s}")
        raise UnreachableStage(f"stages not reachable from root {root}: {missing}")

    return StageGraph(
        stages=stages,
        edges=edges,
        root=root,
        _children={s: tuple(sorted(c)) for s, c in children.items()},
        _parent=parent,
    )


def load_graph(path: str | Path) -> StageGraph:
    """Read a graph from a JSON file ``{"stages": [...], "edges": [[a, b], ...]}``."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return graph_from_dict(doc, source=str(path))


def graph_from_dict(doc: dict, source: str = "graph") -> StageGraph:
    if not isinstance(doc, dict) or "stages" not in doc or "edges" not in doc:
        raise ValidationError(f"{source}: expected an object with 'stages' and 'edges'")
    try:
        edges = [(a, b) for a, b in doc["edges"]]
    except (TypeError, ValueError):
        raise ValidationError(f"{source}: edges must be [parent, child] pairs") from None
    return build_graph(doc["stages"], edges)


def six_stage_graph() -> StageGraph:
    """Surgery / local recurrence / metastasis / death model with stages 0..5."""
    return build_graph(range(6), [(0, 1), (0, 2), (1, 3), (1, 4), (3, 5)])


def bmt_nine_stage_graph() -> StageGraph:
    """Platelet recovery / acute GVHD / chronic GVHD tree with stages 0..8."""
    return build_graph(
        range(9),
        [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6), (3, 7), (5, 8)],
    )
