"""Matching covers across consecutive snapshots and stitching timelines.

Two consecutive covers are related through the cover of their joint graph
(the union of the two edge sets): adding edges can only grow or merge
percolation communities, so every community of either step sits inside
exactly one joint community. Candidate pairs inside each joint community are
then matched greedily by decreasing relative node overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from sklearn.base import BaseEstimator

from .graphs import Snapshot, SnapshotSeries, join, threshold
from .percolation import CommunityCover, cpm_communities
from .validation import check_k, check_series, check_threshold

EVENT_KINDS = ("birth", "death", "growth", "contraction", "unchanged", "merge", "split")
_KIND_ORDER = {kind: i for i, kind in enumerate(EVENT_KINDS)}


class MatchingInvariantError(RuntimeError):
    """A community was contained in no joint community.

    This cannot happen when both covers and the joint cover come from the
    same k and weight cutoff; seeing it means the inputs were built with
    mismatched parameters.
    """


@dataclass(frozen=True)
class EventRecord:
    """One lifecycle event; participants are timeline ids.

    Merge events list the source timelines first (ascending) and the
    continuing timeline last; split events list the source timeline first
    and every continuation after it (the source's own continuation
    included).
    """

    t: int
    kind: str
    participants: tuple[int, ...]
    size_delta: int = 0


@dataclass
class CommunityTimeline:
    """One community identity followed across consecutive snapshots."""

    id: int
    t0: int
    states: list[frozenset[int]]
    alive_at_end: bool = False

    @property
    def t_last(self) -> int:
        return self.t0 + len(self.states) - 1

    @property
    def birth_size(self) -> int:
        return len(self.states[0])

    def state_at(self, t: int) -> frozenset[int]:
        if not self.t0 <= t <= self.t_last:
            raise ValueError(
                f"step {t} outside timeline {self.id} span [{self.t0}, {self.t_last}]"
            )
        return self.states[t - self.t0]

    def steps(self) -> range:
        return range(self.t0, self.t_last + 1)

    def __len__(self) -> int:
        return len(self.states)


@dataclass
class JointGroup:
    """Cover indices from steps t and t+1 contained in one joint community."""

    joint_index: int
    at_t: list[int] = field(default_factory=list)
    at_t1: list[int] = field(default_factory=list)
    pairs: list[tuple[int, int]] = field(default_factory=list)  # match order, best first


@dataclass
class StepMatching:
    """Outcome of matching two consecutive covers through their joint cover."""

    t: int
    cover_t: CommunityCover
    cover_t1: CommunityCover
    joint_cover: CommunityCover
    pairs: list[tuple[int, int]]
    deaths: list[int]
    births: list[int]
    groups: list[JointGroup]


def _locate(comm, joint_cover: CommunityCover, node_to_joints, where: str) -> int:
    probe = min(comm.members)
    hits = [
        j for j in node_to_joints.get(probe, ()) if comm.members <= joint_cover[j].members
    ]
    if not hits:
        head = sorted(comm.members)[:8]
        raise MatchingInvariantError(
            f"community {head}{'...' if len(comm.members) > 8 else ''} at {where} is "
            "contained in no joint community; the covers and the joint cover were "
            "likely built with different k or weight cutoff"
        )
    if len(hits) == 1:
        return hits[0]
    # several joint communities can contain the same node set when covers
    # overlap heavily; pick the smallest deterministically
    return min(hits, key=lambda j: (len(joint_cover[j].members), joint_cover[j].sort_key))


def match_step(
    cover_t: CommunityCover, cover_t1: CommunityCover, joint_cover: CommunityCover
) -> StepMatching:
    """Pair the communities of step t with those of step t+1.

    Every community of either step is assigned to the joint community
    containing it, then candidate pairs inside each joint community are
    matched greedily in decreasing Jaccard overlap of their member sets.
    Ties fall to the larger intersection, then the smaller minimum member
    id, then lexicographic member tuples, so the matching is total and
    deterministic. Pairs without common members never form; unmatched
    communities at t are deaths, unmatched communities at t+1 are births.
    """
    if not (cover_t.k == cover_t1.k == joint_cover.k):
        raise ValueError("covers disagree on k")
    node_to_joints: dict[int, list[int]] = {}
    for j, comm in enumerate(joint_cover):
        for node in comm.members:
            node_to_joints.setdefault(node, []).append(j)
    groups = [JointGroup(j) for j in range(len(joint_cover))]
    for i, comm in enumerate(cover_t):
        groups[_locate(comm, joint_cover, node_to_joints, "t")].at_t.append(i)
    for i, comm in enumerate(cover_t1):
        groups[_locate(comm, joint_cover, node_to_joints, "t+1")].at_t1.append(i)

    pairs: list[tuple[int, int]] = []
    matched_t: set[int] = set()
    matched_t1: set[int] = set()
    for grp in groups:
        if not grp.at_t or not grp.at_t1:
            continue
        candidates = []
        for i in grp.at_t:
            members_t = cover_t[i].members
            for j in grp.at_t1:
                members_t1 = cover_t1[j].members
                inter = len(members_t & members_t1)
                if inter == 0:
                    continue
                union = len(members_t) + len(members_t1) - inter
                candidates.append(
                    (
                        -inter / union,
                        -inter,
                        min(min(members_t), min(members_t1)),
                        tuple(sorted(members_t)),
                        tuple(sorted(members_t1)),
                        i,
                        j,
                    )
                )
        candidates.sort()
        for cand in candidates:
            i, j = cand[5], cand[6]
            if i in matched_t or j in matched_t1:
                continue
            matched_t.add(i)
            matched_t1.add(j)
            grp.pairs.append((i, j))
            pairs.append((i, j))

    deaths = [i for i in range(len(cover_t)) if i not in matched_t]
    births = [j for j in range(len(cover_t1)) if j not in matched_t1]
    return StepMatching(
        t=int(cover_t.t),
        cover_t=cover_t,
        cover_t1=cover_t1,
        joint_cover=joint_cover,
        pairs=pairs,
        deaths=deaths,
        births=births,
        groups=groups,
    )


def joint_cover(
    g_t: Snapshot, g_t1: Snapshot, k: int, *, w_star: float = 0.0, t: int | None = None
) -> CommunityCover:
    """Cover of the edge union of two consecutive thresholded snapshots."""
    label = f"joint({t},{t + 1})" if t is not None else "joint"
    return cpm_communities(join(g_t, g_t1), k, w_star=w_star, source_t=label)


@dataclass
class TrackingResult:
    covers: list[CommunityCover]
    matchings: list[StepMatching]
    timelines: list[CommunityTimeline]
    events: list[EventRecord]


def _check_covers(covers, n_expected: int, k: int, w_star: float, what: str):
    if len(covers) != n_expected:
        raise ValueError(f"expected {n_expected} {what}, got {len(covers)}")
    for c in covers:
        if c.k != k or c.w_star != w_star:
            raise ValueError(
                f"parameter mismatch in {what}: found (k={c.k}, w_star={c.w_star}), "
                f"expected (k={k}, w_star={w_star})"
            )


def build_timelines(
    series: SnapshotSeries,
    k: int,
    w_star: float = 0.0,
    *,
    covers: list[CommunityCover] | None = None,
    joints: list[CommunityCover] | None = None,
) -> TrackingResult:
    """Detect, match and stitch: the full tracking pipeline over a series.

    Per-snapshot covers and joint covers may be passed in precomputed (for
    example from a parallel front end); they must carry the same k and
    cutoff. Timeline identity follows the matched chain of best-overlap
    pairs; births, deaths, growth/contraction/unchanged, merge and split
    events are emitted along the way in a canonical order.
    """
    check_series(series)
    check_k(k)
    w_star = check_threshold(w_star)
    thresholded = [threshold(s, w_star) for s in series]
    if covers is None:
        covers = [cpm_communities(g, k, w_star=w_star, source_t=g.t) for g in thresholded]
    else:
        _check_covers(covers, len(series), k, w_star, "covers")
    if joints is None:
        joints = [
            joint_cover(thresholded[i], thresholded[i + 1], k, w_star=w_star, t=i)
            for i in range(len(series) - 1)
        ]
    else:
        _check_covers(joints, len(series) - 1, k, w_star, "joint covers")
    matchings = [
        match_step(covers[i], covers[i + 1], joints[i]) for i in range(len(series) - 1)
    ]

    timelines: list[CommunityTimeline] = []
    events: list[EventRecord] = []

    def new_timeline(t0: int, members: frozenset[int]) -> int:
        tid = len(timelines)
        timelines.append(CommunityTimeline(tid, t0, [members]))
        return tid

    current: dict[int, int] = {}
    for i in range(len(covers[0])):
        tid = new_timeline(0, covers[0][i].members)
        current[i] = tid
        events.append(EventRecord(0, "birth", (tid,)))

    for m in matchings:
        t1 = m.t + 1
        nxt: dict[int, int] = {}
        step_events: list[EventRecord] = []
        for i, j in m.pairs:
            tid = current[i]
            before = m.cover_t[i].members
            after = m.cover_t1[j].members
            timelines[tid].states.append(after)
            nxt[j] = tid
            if len(after) > len(before):
                step_events.append(
                    EventRecord(t1, "growth", (tid,), len(after) - len(before))
                )
            elif len(after) < len(before):
                step_events.append(
                    EventRecord(t1, "contraction", (tid,), len(after) - len(before))
                )
            elif after == before:
                step_events.append(EventRecord(t1, "unchanged", (tid,)))
            # equal size with different members: no size event
        for j in m.births:
            tid = new_timeline(t1, m.cover_t1[j].members)
            nxt[j] = tid
            step_events.append(EventRecord(t1, "birth", (tid,)))
        for i in m.deaths:
            step_events.append(EventRecord(t1, "death", (current[i],)))
        for grp in m.groups:
            if not grp.pairs:
                continue
            continuation = current[grp.pairs[0][0]]
            if len(grp.at_t) >= 2:
                sources = sorted(current[i] for i in grp.at_t)
                step_events.append(EventRecord(t1, "merge", (*sources, continuation)))
            if len(grp.at_t1) >= 2:
                landing = sorted(nxt[j] for j in grp.at_t1)
                step_events.append(EventRecord(t1, "split", (continuation, *landing)))
        step_events.sort(key=lambda e: (_KIND_ORDER[e.kind], e.participants))
        events.extend(step_events)
        current = nxt

    for tid in current.values():
        timelines[tid].alive_at_end = True
    return TrackingResult(covers, matchings, timelines, events)


@dataclass(frozen=True)
class CompositionEntry:
    """Membership composition of one timeline step.

    ``old`` members were already present in the previous step, ``new`` ones
    were not (everyone is new at birth); the leaving counts split the
    members absent from the next step by that same status and are zero at
    the final step.
    """

    t: int
    old: int
    new: int
    leaving_old: int
    leaving_new: int


def composition_profile(tl: CommunityTimeline) -> list[CompositionEntry]:
    """Old/new member counts per step, with next-step leavers split by status."""
    rows = []
    for idx, state in enumerate(tl.states):
        prev = tl.states[idx - 1] if idx else frozenset()
        old = len(state & prev)
        new = len(state) - old
        if idx + 1 < len(tl.states):
            leaving = state - tl.states[idx + 1]
            leaving_old = len(leaving & prev)
            leaving_new = len(leaving) - leaving_old
        else:
            leaving_old = leaving_new = 0
        rows.append(CompositionEntry(tl.t0 + idx, old, new, leaving_old, leaving_new))
    return rows


class CommunityTracker(BaseEstimator):
    """Temporal community tracker with the scikit-learn estimator API.

    Fitting runs thresholding, detection, joint-graph matching and timeline
    stitching over a SnapshotSeries.

    Parameters
    ----------
    k : int, default=4
        Clique size for the percolation.
    w_star : float, default=0.0
        Weight cutoff applied to every snapshot before detection.

    Attributes
    ----------
    covers_ : list of CommunityCover, one per snapshot.
    matchings_ : list of StepMatching, one per consecutive pair.
    timelines_ : list of CommunityTimeline.
    events_ : list of EventRecord.
    """

    def __init__(self, k: int = 4, w_star: float = 0.0):
        self.k = k
        self.w_star = w_star

    def fit(self, X: SnapshotSeries, y=None):
        result = build_timelines(X, self.k, self.w_star)
        self.covers_ = result.covers
        self.matchings_ = result.matchings
        self.timelines_ = result.timelines
        self.events_ = result.events
        self.result_ = result
        return self

    def fit_predict(self, X: SnapshotSeries, y=None) -> list[CommunityTimeline]:
        """Fit and return the stitched timelines."""
        return self.fit(X).timelines_
