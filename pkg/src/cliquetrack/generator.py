"""Synthetic temporal networks with planted communities and known schedules.

The generator realizes a schedule of planted communities (birth, death,
per-step member replacement, merges and splits) into a weighted event
stream, and returns the ground-truth timelines and events alongside, so
detection and tracking can be verified against a known answer. Two extra
factories build series whose members or communities leave with a
probability wired to their outside-commitment ratio, for calibrating the
commitment curves.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .graphs import AttributeTable, Snapshot, SnapshotSeries, load_events
from .tracking import CommunityTimeline, EventRecord, _KIND_ORDER
from .validation import check_k, check_probability


class ScheduleError(ValueError):
    """The planted schedule is inconsistent or infeasible."""


@dataclass
class CommunityPlan:
    """Lifecycle plan for one planted community.

    The community exists from step ``birth`` through ``death`` inclusive
    (None rides to the end of the series). Each step after birth, every
    member is independently swapped for a fresh node with probability
    ``replace_fraction``; replaced members keep their ids and fall back to
    the background population. A plan with ``merge_into`` has its members
    absorbed by that plan at step ``merge_at`` (so it dies at
    ``merge_at - 1``); a plan with ``split_off`` is born by taking ``size``
    members from its parent at its birth step.
    """

    name: str
    size: int
    birth: int = 0
    death: int | None = None
    replace_fraction: float = 0.0
    merge_into: str | None = None
    merge_at: int | None = None
    split_off: str | None = None


@dataclass
class AttributePlanting:
    """How node attributes are drawn.

    ``homogeneous``: members of one plan share a categorical value and get
    numeric values in a tight band around a per-plan center, while
    background nodes draw uniformly. ``uniform``: every node draws
    uniformly. ``none``: no attributes.
    """

    mode: str = "homogeneous"
    n_categories: int = 40
    numeric_range: tuple[float, float] = (18.0, 80.0)
    numeric_spread: float = 1.0


@dataclass
class PlantedSchedule:
    """Global layout of a synthetic series.

    ``k`` is the clique size the series is built to support: planted member
    sets are wired densely enough (completely, at the default
    ``intra_edge_prob`` of 1) to form one percolation community at that k.
    Background edges use the weaker ``inter_weight`` law, so an analysis
    cutoff above it sees exactly the planted structure.
    """

    n_steps: int
    plans: list[CommunityPlan]
    k: int = 4
    background_nodes: int = 0
    background_edge_prob: float = 0.0
    intra_edge_prob: float = 1.0
    intra_weight: tuple[float, float] = (4.0, 6.0)
    inter_weight: tuple[float, float] = (0.5, 1.5)
    attributes: AttributePlanting = field(default_factory=AttributePlanting)


def _last_step(plan: CommunityPlan, n_steps: int) -> int:
    if plan.merge_at is not None:
        return plan.merge_at - 1
    return n_steps - 1 if plan.death is None else plan.death


def _normalize(schedule: PlantedSchedule) -> PlantedSchedule:
    if schedule.n_steps < 1:
        raise ScheduleError("n_steps must be at least 1")
    check_k(schedule.k)
    check_probability(schedule.background_edge_prob, "background_edge_prob")
    if not 0 < schedule.intra_edge_prob <= 1:
        raise ScheduleError("intra_edge_prob must lie in (0, 1]")
    for name, law in (("intra_weight", schedule.intra_weight), ("inter_weight", schedule.inter_weight)):
        lo, hi = law
        if lo < 0 or hi < lo:
            raise ScheduleError(f"{name} must be (lo, hi) with 0 <= lo <= hi")
    if not schedule.plans:
        raise ScheduleError("schedule needs at least one planted community")
    by_name = {}
    for plan in schedule.plans:
        if plan.name in by_name:
            raise ScheduleError(f"duplicate plan name {plan.name!r}")
        by_name[plan.name] = plan
    for plan in schedule.plans:
        if plan.size < schedule.k:
            raise ScheduleError(
                f"plan {plan.name!r}: size {plan.size} below clique size k={schedule.k}"
            )
        check_probability(plan.replace_fraction, f"plan {plan.name!r} replace_fraction")
        if (plan.merge_into is None) != (plan.merge_at is None):
            raise ScheduleError(f"plan {plan.name!r}: merge_into and merge_at go together")
        if plan.merge_at is not None:
            target = by_name.get(plan.merge_into)
            if target is None or target is plan:
                raise ScheduleError(f"plan {plan.name!r}: merge target {plan.merge_into!r} unknown")
            if not 1 <= plan.merge_at < schedule.n_steps:
                raise ScheduleError(f"plan {plan.name!r}: merge_at {plan.merge_at} out of range")
            if plan.death is not None and plan.death != plan.merge_at - 1:
                raise ScheduleError(
                    f"plan {plan.name!r}: death {plan.death} contradicts merge_at {plan.merge_at}"
                )
            if not target.birth < plan.merge_at <= _last_step(target, schedule.n_steps):
                raise ScheduleError(
                    f"plan {plan.name!r}: target {target.name!r} is not alive at step {plan.merge_at}"
                )
        if plan.split_off is not None:
            parent = by_name.get(plan.split_off)
            if parent is None or parent is plan:
                raise ScheduleError(f"plan {plan.name!r}: split parent {plan.split_off!r} unknown")
            if not parent.birth < plan.birth <= _last_step(parent, schedule.n_steps):
                raise ScheduleError(
                    f"plan {plan.name!r}: parent {parent.name!r} is not alive at step {plan.birth}"
                )
        last = _last_step(plan, schedule.n_steps)
        if not 0 <= plan.birth <= last < schedule.n_steps:
            raise ScheduleError(
                f"plan {plan.name!r}: lifespan [{plan.birth}, {last}] out of range"
            )
    # replacement preserves sizes, so community sizes are exactly simulable:
    # walk the steps to check splits never drain a parent below k
    size_now: dict[str, int] = {}
    for t in range(schedule.n_steps):
        for plan in schedule.plans:
            if t == plan.birth:
                if plan.split_off is not None:
                    remaining = size_now[plan.split_off] - plan.size
                    if remaining < schedule.k:
                        raise ScheduleError(
                            f"plan {plan.name!r}: splitting {plan.size} members at step {t} "
                            f"would leave parent {plan.split_off!r} with {remaining} < k="
                            f"{schedule.k} members"
                        )
                    size_now[plan.split_off] = remaining
                size_now[plan.name] = plan.size
        for plan in schedule.plans:
            if plan.merge_at == t:
                size_now[plan.merge_into] += size_now[plan.name]
    return schedule


@dataclass
class SynthResult:
    """Generated series plus its planted ground truth."""

    series: SnapshotSeries
    attributes: AttributeTable
    truth_timelines: list[CommunityTimeline]
    truth_events: list[EventRecord]
    events: list[tuple[float, str, str, float]]
    attribute_rows: list[tuple[str, str | None, float | None]]
    timeline_id_of_plan: dict[str, int]


def _unrank_pair(rank: int, n: int) -> tuple[int, int]:
    # pairs (i, j), i < j, in lexicographic order
    lo, hi = 0, n - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid * n - mid * (mid + 1) // 2 <= rank:
            lo = mid
        else:
            hi = mid - 1
    j = rank - (lo * n - lo * (lo + 1) // 2) + lo + 1
    return lo, j


def _pad_series(series: SnapshotSeries, n_steps: int) -> SnapshotSeries:
    if len(series) >= n_steps:
        return series
    snapshots = list(series.snapshots)
    snapshots.extend(Snapshot(t, []) for t in range(len(series), n_steps))
    return SnapshotSeries(
        snapshots, series.step_unit, series.names, series.skipped_self_loops
    )


def generate(schedule: PlantedSchedule, seed: int = 0) -> SynthResult:
    """Realize a planted schedule into an event stream, snapshots and truth.

    The same schedule and seed give bit-identical output. With the default
    complete intra wiring and an analysis cutoff above the inter-weight law,
    detection at the schedule's k recovers the planted member sets exactly.
    """
    schedule = _normalize(schedule)
    rng = np.random.default_rng(seed)
    att = schedule.attributes
    if att.mode not in ("homogeneous", "uniform", "none"):
        raise ScheduleError(f"unknown attribute mode {att.mode!r}")

    label = "n{}".format
    next_id = schedule.background_nodes
    categorical: dict[int, str] = {}
    numeric: dict[int, float] = {}

    def draw_uniform_attrs(nid: int) -> None:
        if att.mode == "none":
            return
        categorical[nid] = f"z{int(rng.integers(att.n_categories)):03d}"
        numeric[nid] = float(rng.uniform(*att.numeric_range))

    plan_category: dict[str, str] = {}
    plan_center: dict[str, float] = {}
    if att.mode == "homogeneous":
        for plan in schedule.plans:
            plan_category[plan.name] = f"z{int(rng.integers(att.n_categories)):03d}"
            plan_center[plan.name] = float(rng.uniform(*att.numeric_range))

    def draw_member_attrs(nid: int, plan_name: str) -> None:
        if att.mode == "none":
            return
        if att.mode == "uniform":
            draw_uniform_attrs(nid)
            return
        categorical[nid] = plan_category[plan_name]
        numeric[nid] = float(
            plan_center[plan_name] + rng.uniform(-att.numeric_spread, att.numeric_spread)
        )

    for nid in range(schedule.background_nodes):
        draw_uniform_attrs(nid)

    def fresh_members(count: int, plan_name: str) -> list[int]:
        nonlocal next_id
        ids = list(range(next_id, next_id + count))
        next_id += count
        for nid in ids:
            draw_member_attrs(nid, plan_name)
        return ids

    members: dict[str, list[int]] = {}
    final_members: dict[str, list[int]] = {}
    truth_states: dict[str, list[frozenset[str]]] = {p.name: [] for p in schedule.plans}
    retired: list[int] = []
    events: list[tuple[float, str, str, float]] = []
    last_of = {p.name: _last_step(p, schedule.n_steps) for p in schedule.plans}

    for t in range(schedule.n_steps):
        for plan in schedule.plans:
            if t == plan.birth:
                if plan.split_off is not None:
                    parent = members[plan.split_off]
                    picked = rng.choice(len(parent), size=plan.size, replace=False)
                    taken = sorted(parent[i] for i in picked)
                    members[plan.split_off] = sorted(set(parent) - set(taken))
                    members[plan.name] = taken
                else:
                    members[plan.name] = fresh_members(plan.size, plan.name)
            elif plan.birth < t <= last_of[plan.name] and plan.replace_fraction > 0:
                current = members[plan.name]
                mask = rng.random(len(current)) < plan.replace_fraction
                victims = [current[i] for i in range(len(current)) if mask[i]]
                if victims:
                    gone = set(victims)
                    keep = [m for m in current if m not in gone]
                    retired.extend(victims)
                    members[plan.name] = sorted(keep + fresh_members(len(victims), plan.name))
        for plan in schedule.plans:
            if plan.merge_at == t:
                members[plan.merge_into] = sorted(
                    set(members[plan.merge_into]) | set(final_members[plan.name])
                )

        step_edges: dict[tuple[int, int], float] = {}
        alive = [p for p in schedule.plans if p.birth <= t <= last_of[p.name]]
        for plan in alive:
            current = members[plan.name]
            truth_states[plan.name].append(frozenset(label(m) for m in current))
            pairs = [
                (current[i], current[j])
                for i in range(len(current))
                for j in range(i + 1, len(current))
            ]
            if schedule.intra_edge_prob < 1:
                mask = rng.random(len(pairs)) < schedule.intra_edge_prob
                pairs = [p for p, keep in zip(pairs, mask) if keep]
            weights = rng.uniform(*schedule.intra_weight, size=len(pairs))
            for (u, v), w in zip(pairs, weights):
                step_edges[(u, v)] = float(w)
            if t == last_of[plan.name]:
                final_members[plan.name] = list(current)
                if plan.merge_at is None:
                    retired.extend(current)
        if schedule.background_edge_prob > 0:
            pool = sorted(
                set(range(schedule.background_nodes))
                | set(retired)
                | {m for p in alive for m in members[p.name]}
            )
            n_pool = len(pool)
            total_pairs = n_pool * (n_pool - 1) // 2
            if total_pairs:
                n_draw = int(rng.binomial(total_pairs, schedule.background_edge_prob))
                if n_draw:
                    ranks = rng.choice(total_pairs, size=n_draw, replace=False)
                    weights = rng.uniform(*schedule.inter_weight, size=n_draw)
                    for rank, w in zip(ranks, weights):
                        i, j = _unrank_pair(int(rank), n_pool)
                        key = (pool[i], pool[j])
                        if key not in step_edges:
                            step_edges[key] = float(w)
        for (u, v), w in sorted(step_edges.items()):
            events.append((float(t), label(u), label(v), w))

    series = _pad_series(load_events(events, window=1.0, step_unit="step"), schedule.n_steps)
    names = series.names

    timeline_id_of_plan = {p.name: i for i, p in enumerate(schedule.plans)}
    truth_timelines = []
    for plan in schedule.plans:
        states = [
            frozenset(names.add(lab) for lab in state) for state in truth_states[plan.name]
        ]
        truth_timelines.append(
            CommunityTimeline(
                id=timeline_id_of_plan[plan.name],
                t0=plan.birth,
                states=states,
                alive_at_end=last_of[plan.name] == schedule.n_steps - 1,
            )
        )

    truth_events: list[EventRecord] = []
    for plan in schedule.plans:
        tid = timeline_id_of_plan[plan.name]
        truth_events.append(EventRecord(plan.birth, "birth", (tid,)))
        if last_of[plan.name] < schedule.n_steps - 1:
            truth_events.append(EventRecord(last_of[plan.name] + 1, "death", (tid,)))
    merge_groups: dict[tuple[str, int], list[str]] = {}
    for plan in schedule.plans:
        if plan.merge_at is not None:
            merge_groups.setdefault((plan.merge_into, plan.merge_at), []).append(plan.name)
    for (target, step), absorbed in sorted(merge_groups.items()):
        sources = sorted(timeline_id_of_plan[n] for n in absorbed + [target])
        truth_events.append(
            EventRecord(step, "merge", (*sources, timeline_id_of_plan[target]))
        )
    split_groups: dict[tuple[str, int], list[str]] = {}
    for plan in schedule.plans:
        if plan.split_off is not None:
            split_groups.setdefault((plan.split_off, plan.birth), []).append(plan.name)
    for (parent, step), children in sorted(split_groups.items()):
        landing = sorted(timeline_id_of_plan[n] for n in children + [parent])
        truth_events.append(
            EventRecord(step, "split", (timeline_id_of_plan[parent], *landing))
        )
    truth_events.sort(key=lambda e: (e.t, _KIND_ORDER[e.kind], e.participants))

    attribute_rows = [
        (label(nid), categorical.get(nid), numeric.get(nid))
        for nid in range(next_id)
        if nid in categorical or nid in numeric
    ]
    table = AttributeTable()
    for lab, cat, num in attribute_rows:
        if lab in names:
            nid = names.id(lab)
            if cat is not None:
                table.categorical[nid] = cat
            if num is not None:
                table.numeric[nid] = num
    return SynthResult(
        series=series,
        attributes=table,
        truth_timelines=truth_timelines,
        truth_events=truth_events,
        events=events,
        attribute_rows=attribute_rows,
        timeline_id_of_plan=timeline_id_of_plan,
    )


def uniform_schedule(
    n_communities: int,
    size: int,
    n_steps: int,
    replace_fraction: float = 0.0,
    *,
    k: int = 4,
    background_nodes: int = 0,
    background_edge_prob: float = 0.0,
    attribute_mode: str = "homogeneous",
) -> PlantedSchedule:
    """Schedule with ``n_communities`` identical full-length plans."""
    plans = [
        CommunityPlan(name=f"c{i:02d}", size=size, replace_fraction=replace_fraction)
        for i in range(n_communities)
    ]
    return PlantedSchedule(
        n_steps=n_steps,
        plans=plans,
        k=k,
        background_nodes=background_nodes,
        background_edge_prob=background_edge_prob,
        attributes=AttributePlanting(mode=attribute_mode),
    )


def schedule_to_dict(schedule: PlantedSchedule) -> dict:
    return asdict(schedule)


def schedule_from_dict(data: dict) -> PlantedSchedule:
    """Build a schedule from plain dicts, as parsed from a JSON file."""
    data = dict(data)
    plans = [CommunityPlan(**p) for p in data.pop("plans", [])]
    attrs = data.pop("attributes", None)
    kwargs = {}
    for key in (
        "n_steps",
        "k",
        "background_nodes",
        "background_edge_prob",
        "intra_edge_prob",
    ):
        if key in data:
            kwargs[key] = data.pop(key)
    for key in ("intra_weight", "inter_weight"):
        if key in data:
            kwargs[key] = tuple(data.pop(key))
    if data:
        raise ScheduleError(f"unknown schedule keys: {sorted(data)}")
    if attrs is not None:
        if "numeric_range" in attrs:
            attrs = dict(attrs, numeric_range=tuple(attrs["numeric_range"]))
        kwargs["attributes"] = AttributePlanting(**attrs)
    return PlantedSchedule(plans=plans, **kwargs)


@dataclass(eq=False)
class MechanismResult:
    """Series whose leave/death coins are wired to commitment ratios."""

    series: SnapshotSeries
    truth_timelines: list[CommunityTimeline]
    ratios: np.ndarray
    probabilities: np.ndarray
    events: list[tuple[float, str, str, float]]
    slot_of_timeline: list[int] | None = None


def _finish_mechanism(
    events, n_steps, raw_timelines, ratios, probabilities
) -> MechanismResult:
    series = _pad_series(load_events(events, window=1.0, step_unit="step"), n_steps)
    names = series.names
    timelines = [
        CommunityTimeline(
            id=i,
            t0=t0,
            states=[frozenset(names.add(lab) for lab in s) for s in states],
            alive_at_end=t0 + len(states) - 1 == n_steps - 1,
        )
        for i, (t0, states) in enumerate(raw_timelines)
    ]
    return MechanismResult(series, timelines, np.asarray(ratios), np.asarray(probabilities), events)


def make_abandonment_series(
    n_communities: int = 6,
    size: int = 12,
    n_steps: int = 120,
    *,
    intra_weight: float = 3.0,
    leave_floor: float = 0.03,
    leave_slope: float = 0.6,
    ratio_range: tuple[float, float] = (0.05, 0.85),
    seed: int = 0,
) -> MechanismResult:
    """Series where a member's chance of leaving grows with its outside ratio.

    Each community is a complete clique of constant weight; every member
    slot carries one external stub edge sized so that the member's
    w_out / (w_in + w_out) hits a fixed target, spread over ``ratio_range``.
    Per step each member leaves (is replaced by a fresh node) with
    probability ``leave_floor + leave_slope * ratio``. Stubs have degree one
    per step, so they never join any community; run detection with a zero
    cutoff to keep them visible to the weight sums.
    """
    if size < 2 or n_communities < 1 or n_steps < 2:
        raise ValueError("need size >= 2, n_communities >= 1, n_steps >= 2")
    ratios = np.linspace(ratio_range[0], ratio_range[1], size)
    probabilities = leave_floor + leave_slope * ratios
    if probabilities.max() >= 1 or probabilities.min() < 0:
        raise ValueError("leave probabilities must stay inside [0, 1)")
    w_in = (size - 1) * intra_weight
    stub_weight = ratios / (1 - ratios) * w_in
    rng = np.random.default_rng(seed)
    label = "n{}".format

    next_id = 0

    def fresh(count: int) -> list[int]:
        nonlocal next_id
        ids = list(range(next_id, next_id + count))
        next_id += count
        return ids

    occupants = [fresh(size) for _ in range(n_communities)]
    stubs = [fresh(size) for _ in range(n_communities)]
    raw_timelines: list[tuple[int, list[frozenset[str]]]] = [
        (0, []) for _ in range(n_communities)
    ]
    events: list[tuple[float, str, str, float]] = []
    for t in range(n_steps):
        for c in range(n_communities):
            current = occupants[c]
            raw_timelines[c][1].append(frozenset(label(m) for m in current))
            step_edges = []
            for i in range(size):
                for j in range(i + 1, size):
                    step_edges.append((current[i], current[j], intra_weight))
            for slot in range(size):
                step_edges.append((current[slot], stubs[c][slot], float(stub_weight[slot])))
            for u, v, w in sorted((min(u, v), max(u, v), w) for u, v, w in step_edges):
                events.append((float(t), label(u), label(v), w))
            if t < n_steps - 1:
                flips = rng.random(size) < probabilities
                for slot in range(size):
                    if flips[slot]:
                        occupants[c][slot] = fresh(1)[0]
    return _finish_mechanism(events, n_steps, raw_timelines, ratios, probabilities)


def make_disintegration_series(
    n_slots: int = 12,
    size: int = 8,
    n_steps: int = 160,
    *,
    intra_weight: float = 3.0,
    death_floor: float = 0.02,
    death_slope: float = 0.55,
    ratio_range: tuple[float, float] = (0.05, 0.8),
    seed: int = 0,
) -> MechanismResult:
    """Series where a community's chance of dissolving grows with its outside ratio.

    Each slot hosts a complete-clique community whose members carry stub
    edges sized so the community's W_out / (W_in + W_out) hits the slot's
    fixed target. Per step the community dissolves with probability
    ``death_floor + death_slope * ratio``; a dissolved slot respawns with
    fresh members the next step, so every ratio stays populated.
    """
    if size < 2 or n_slots < 1 or n_steps < 2:
        raise ValueError("need size >= 2, n_slots >= 1, n_steps >= 2")
    ratios = np.linspace(ratio_range[0], ratio_range[1], n_slots)
    probabilities = death_floor + death_slope * ratios
    if probabilities.max() >= 1 or probabilities.min() < 0:
        raise ValueError("death probabilities must stay inside [0, 1)")
    total_in = size * (size - 1) / 2 * intra_weight
    member_stub_weight = ratios / (1 - ratios) * total_in / size
    rng = np.random.default_rng(seed)
    label = "n{}".format

    next_id = 0

    def fresh(count: int) -> list[int]:
        nonlocal next_id
        ids = list(range(next_id, next_id + count))
        next_id += count
        return ids

    stubs = [fresh(size) for _ in range(n_slots)]
    occupants = [fresh(size) for _ in range(n_slots)]
    births = [0] * n_slots
    states: list[list[frozenset[str]]] = [[] for _ in range(n_slots)]
    finished: list[tuple[int, int, list[frozenset[str]]]] = []  # (slot, t0, states)
    events: list[tuple[float, str, str, float]] = []
    for t in range(n_steps):
        for slot in range(n_slots):
            if occupants[slot] is None:
                occupants[slot] = fresh(size)
                births[slot] = t
                states[slot] = []
            current = occupants[slot]
            states[slot].append(frozenset(label(m) for m in current))
            step_edges = []
            for i in range(size):
                for j in range(i + 1, size):
                    step_edges.append((current[i], current[j], intra_weight))
            for i in range(size):
                step_edges.append((current[i], stubs[slot][i], float(member_stub_weight[slot])))
            for u, v, w in sorted((min(u, v), max(u, v), w) for u, v, w in step_edges):
                events.append((float(t), label(u), label(v), w))
            if rng.random() < probabilities[slot]:
                finished.append((slot, births[slot], states[slot]))
                occupants[slot] = None
    for slot in range(n_slots):
        if occupants[slot] is not None:
            finished.append((slot, births[slot], states[slot]))
    finished.sort(key=lambda item: (item[0], item[1]))
    raw_timelines = [(t0, st) for _, t0, st in finished]
    slot_of = [slot for slot, _, _ in finished]
    result = _finish_mechanism(events, n_steps, raw_timelines, ratios, probabilities)
    result.slot_of_timeline = slot_of
    return result
