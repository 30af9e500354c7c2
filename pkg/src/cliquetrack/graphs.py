"""Weighted snapshot graphs, the windowed event loader, and node metadata."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .validation import check_threshold, check_window

logger = logging.getLogger(__name__)

Pair = tuple[int, int]


class EventFormatError(ValueError):
    """A malformed event or attribute record, annotated with its source line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NameMap:
    """Bijection between external node labels and dense integer ids.

    Ids are handed out in first-seen order, so the same input stream always
    produces the same mapping.
    """

    __slots__ = ("_id_of", "_labels")

    def __init__(self, labels: Iterable[str] = ()):
        self._id_of: dict[str, int] = {}
        self._labels: list[str] = []
        for label in labels:
            self.add(label)

    def add(self, label: str) -> int:
        """Return the id for ``label``, assigning the next free one if new."""
        nid = self._id_of.get(label)
        if nid is None:
            nid = len(self._labels)
            self._id_of[label] = nid
            self._labels.append(label)
        return nid

    def id(self, label: str) -> int:
        return self._id_of[label]

    def label(self, nid: int) -> str:
        return self._labels[nid]

    def labels(self) -> list[str]:
        return list(self._labels)

    def __contains__(self, label) -> bool:
        return label in self._id_of

    def __len__(self) -> int:
        return len(self._labels)

    def __repr__(self) -> str:
        return f"NameMap({len(self)} labels)"


class Snapshot:
    """An immutable weighted undirected graph at one time step.

    Edges are stored once per unordered node pair, self-loops are rejected
    and the node set is exactly the set of edge endpoints. Instances are
    read-only: thresholding and joining return new snapshots. Internal
    adjacency is built in sorted order, so iteration over nodes, neighbors
    and edges is deterministic regardless of input edge order.
    """

    __slots__ = ("t", "_adj", "_n_edges")

    def __init__(self, t: int, edges: Iterable[tuple[int, int, float]] = ()):
        if t < 0:
            raise ValueError(f"snapshot index must be non-negative, got {t}")
        pairs: dict[Pair, float] = {}
        for u, v, w in edges:
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            w = float(w)
            if not math.isfinite(w) or w < 0:
                raise ValueError(f"edge ({u}, {v}) has invalid weight {w!r}")
            if u > v:
                u, v = v, u
            if (u, v) in pairs:
                raise ValueError(f"duplicate edge ({u}, {v})")
            pairs[(u, v)] = w
        adj: dict[int, dict[int, float]] = {}
        for u, v in sorted(pairs):
            w = pairs[(u, v)]
            adj.setdefault(u, {})[v] = w
            adj.setdefault(v, {})[u] = w
        self.t = int(t)
        self._adj = {u: dict(sorted(nbrs.items())) for u, nbrs in sorted(adj.items())}
        self._n_edges = len(pairs)

    def __reduce__(self):
        return (Snapshot, (self.t, list(self.edges())))

    @property
    def adj(self) -> dict[int, dict[int, float]]:
        """Adjacency mapping node -> {neighbor: weight}. Treat as read-only."""
        return self._adj

    @property
    def nodes(self) -> frozenset[int]:
        return frozenset(self._adj)

    @property
    def n_nodes(self) -> int:
        return len(self._adj)

    @property
    def n_edges(self) -> int:
        return self._n_edges

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Yield (u, v, w) once per edge with u < v, in sorted order."""
        for u, nbrs in self._adj.items():
            for v, w in nbrs.items():
                if u < v:
                    yield u, v, w

    def neighbors(self, u: int):
        return self._adj[u].keys()

    def degree(self, u: int) -> int:
        return len(self._adj[u])

    def has_node(self, u: int) -> bool:
        return u in self._adj

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def weight(self, u: int, v: int) -> float:
        return self._adj[u][v]

    def get_weight(self, u: int, v: int, default: float = 0.0) -> float:
        return self._adj.get(u, {}).get(v, default)

    def total_weight(self) -> float:
        return sum(w for _, _, w in self.edges())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Snapshot):
            return NotImplemented
        return self.t == other.t and self._adj == other._adj

    __hash__ = None  # mutable-looking container semantics; do not use as a key

    def __repr__(self) -> str:
        return f"Snapshot(t={self.t}, nodes={self.n_nodes}, edges={self.n_edges})"


def threshold(s: Snapshot, w_star: float) -> Snapshot:
    """Keep only edges with weight >= w_star (the boundary is inclusive).

    The node set is recomputed from the surviving edges. ``w_star = 0``
    returns the snapshot unchanged.
    """
    w_star = check_threshold(w_star)
    if w_star == 0:
        return s
    return Snapshot(s.t, (e for e in s.edges() if e[2] >= w_star))


def join(a: Snapshot, b: Snapshot) -> Snapshot:
    """Union of the edge sets of two snapshots.

    An edge present in both keeps the larger weight; downstream detection on
    the joint graph only looks at edge existence, so the recorded weight is
    diagnostic. Both inputs are expected to be thresholded with the same
    cutoff already. The result carries the first snapshot's step index.
    """
    merged: dict[Pair, float] = {(u, v): w for u, v, w in a.edges()}
    for u, v, w in b.edges():
        prev = merged.get((u, v))
        merged[(u, v)] = w if prev is None else max(prev, w)
    return Snapshot(a.t, ((u, v, w) for (u, v), w in merged.items()))


@dataclass
class SnapshotSeries:
    """Ordered snapshots plus the label map they were ingested under."""

    snapshots: list[Snapshot]
    step_unit: str = "window"
    names: NameMap = field(default_factory=NameMap)
    skipped_self_loops: int = 0

    def __post_init__(self):
        if not self.snapshots:
            raise ValueError("series must contain at least one snapshot")
        ts = [s.t for s in self.snapshots]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("snapshot indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self) -> Iterator[Snapshot]:
        return iter(self.snapshots)

    def __getitem__(self, i) -> Snapshot:
        return self.snapshots[i]


def load_events(
    events: Iterable[tuple[float, str, str, float]],
    window: float,
    step_unit: str = "window",
) -> SnapshotSeries:
    """Accumulate (time, u, v, weight) interaction events into snapshots.

    An event at time ``x`` lands in snapshot ``floor(x / window)``; repeated
    node pairs within one window have their weights summed into a single
    edge, and windows without events still yield (empty) snapshots so step
    indices stay aligned with wall-clock time. Self-loop events are skipped
    and counted on the returned series; malformed records raise
    EventFormatError.
    """
    window = check_window(window)
    names = NameMap()
    buckets: dict[int, dict[Pair, float]] = {}
    skipped = 0
    last_step = -1
    accepted = 0
    for idx, record in enumerate(events):
        try:
            time, u_label, v_label, w = record
            time = float(time)
            w = float(w)
        except (TypeError, ValueError) as exc:
            raise EventFormatError(
                f"record {idx}: expected (time, u, v, weight), got {record!r}"
            ) from exc
        if not math.isfinite(time) or time < 0:
            raise EventFormatError(f"record {idx}: invalid time {time!r}")
        if not math.isfinite(w) or w < 0:
            raise EventFormatError(f"record {idx}: invalid weight {w!r}")
        u_label, v_label = str(u_label), str(v_label)
        if u_label == v_label:
            skipped += 1
            continue
        step = int(time // window)
        u = names.add(u_label)
        v = names.add(v_label)
        if u > v:
            u, v = v, u
        bucket = buckets.setdefault(step, {})
        bucket[(u, v)] = bucket.get((u, v), 0.0) + w
        last_step = max(last_step, step)
        accepted += 1
    if accepted == 0:
        raise EventFormatError(
            "no events" if skipped == 0 else f"no events ({skipped} self-loops skipped)"
        )
    if skipped:
        logger.warning("skipped %d self-loop events", skipped)
    snapshots = [
        Snapshot(t, [(u, v, w) for (u, v), w in sorted(buckets.get(t, {}).items())])
        for t in range(last_step + 1)
    ]
    return SnapshotSeries(snapshots, step_unit=step_unit, names=names, skipped_self_loops=skipped)


@dataclass
class AttributeTable:
    """Sparse per-node metadata: one categorical and one numeric column."""

    categorical: dict[int, str] = field(default_factory=dict)
    numeric: dict[int, float] = field(default_factory=dict)


def attributes_from_rows(
    rows: Iterable[tuple[str, str | None, float | None]], names: NameMap
) -> tuple[AttributeTable, int]:
    """Map (label, categorical, numeric) rows onto node ids.

    Rows whose label never appeared in the event stream are dropped, since
    such nodes cannot occur in any community; the count of dropped rows is
    returned alongside the table. Empty fields leave the corresponding
    column unset for that node.
    """
    table = AttributeTable()
    unknown = 0
    for label, cat, num in rows:
        label = str(label)
        if label not in names:
            unknown += 1
            continue
        nid = names.id(label)
        if cat is not None and cat != "":
            table.categorical[nid] = str(cat)
        if num is not None and num != "":
            table.numeric[nid] = float(num)
    if unknown:
        logger.warning("dropped %d attribute rows for unknown node labels", unknown)
    return table, unknown
