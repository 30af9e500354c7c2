"""Evolution statistics over timelines, covers, snapshots and attributes."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graphs import AttributeTable, Snapshot
from .percolation import CommunityCover
from .tracking import CommunityTimeline


class CensoredTimelineError(ValueError):
    """Lifetime requested for a timeline still alive at the final snapshot."""


def jaccard(a: frozenset, b: frozenset) -> float:
    """Relative overlap |a & b| / |a | b|; two empty sets count as identical."""
    if not a and not b:
        return 1.0
    inter = len(a & b)
    return inter / (len(a) + len(b) - inter)


def autocorrelation(tl: CommunityTimeline, t0: int, lag: int = 0) -> float:
    """Overlap between the state at step t0 and the state ``lag`` steps later.

    Defined as the Jaccard index of the two member sets, so it is 1.0 at lag
    zero and symmetric in the two states. Both steps must lie inside the
    timeline's span.
    """
    if lag < 0:
        raise ValueError(f"lag must be non-negative, got {lag}")
    return jaccard(tl.state_at(t0), tl.state_at(t0 + lag))


def stationarity(tl: CommunityTimeline) -> float | None:
    """Mean overlap between consecutive states; None for single-step timelines.

    The mean runs over the ``len - 1`` consecutive pairs, so a membership
    that never changes scores exactly 1.0 and ``1 - stationarity`` is the
    average fraction of members exchanged per step.
    """
    n = len(tl.states)
    if n < 2:
        return None
    return sum(jaccard(tl.states[i], tl.states[i + 1]) for i in range(n - 1)) / (n - 1)


def lifetime(tl: CommunityTimeline) -> int:
    """Number of snapshots the timeline existed (its state count).

    Only defined for dead timelines; ones still alive at the final snapshot
    are censored and raise CensoredTimelineError so aggregates exclude them.
    """
    if tl.alive_at_end:
        raise CensoredTimelineError(
            f"timeline {tl.id} is still alive at the final snapshot"
        )
    return len(tl.states)


@dataclass(eq=False)
class LagCurve:
    """Mean value per integer lag with sample counts."""

    lags: np.ndarray
    values: np.ndarray
    counts: np.ndarray


DEFAULT_SIZE_CLASSES: tuple[tuple[int, int | None], ...] = (
    (3, 5),
    (6, 10),
    (11, 20),
    (21, None),
)


def size_class_label(lo: int, hi: int | None) -> str:
    return f"{lo}+" if hi is None else f"{lo}-{hi}"


def mean_autocorrelation_by_birth_size(
    timelines: Iterable[CommunityTimeline],
    size_classes: Sequence[tuple[int, int | None]] = DEFAULT_SIZE_CLASSES,
) -> dict[str, LagCurve]:
    """Average overlap-vs-lag curves, one per birth-size class.

    Every (timeline, start step, lag) observation inside a timeline's span
    contributes; timelines are grouped by the size of their birth state and
    lags with no samples are dropped. Classes are (lo, hi) inclusive ranges,
    hi=None meaning unbounded.
    """
    acc: dict[str, dict[int, list[float]]] = {}
    for tl in timelines:
        label = None
        for lo, hi in size_classes:
            if lo <= tl.birth_size and (hi is None or tl.birth_size <= hi):
                label = size_class_label(lo, hi)
                break
        if label is None:
            continue
        per_lag = acc.setdefault(label, {})
        n = len(tl.states)
        for lag in range(n):
            bucket = per_lag.setdefault(lag, [0.0, 0])
            for start in range(n - lag):
                bucket[0] += jaccard(tl.states[start], tl.states[start + lag])
                bucket[1] += 1
    curves = {}
    for label in sorted(acc):
        lags = sorted(acc[label])
        values = [acc[label][lag][0] / acc[label][lag][1] for lag in lags]
        counts = [acc[label][lag][1] for lag in lags]
        curves[label] = LagCurve(
            np.asarray(lags, dtype=int), np.asarray(values), np.asarray(counts, dtype=int)
        )
    return curves


@dataclass(eq=False)
class SizeProfile:
    """Normalized mean age per observed community size."""

    sizes: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    mean_age: float


def age_size_profile(timelines: Iterable[CommunityTimeline]) -> SizeProfile:
    """Mean age per community size, divided by the global mean age.

    One observation per (timeline, step): the state's size and the steps
    elapsed since birth (zero at birth). Values above 1 mark sizes whose
    communities are older than average.
    """
    per_size: dict[int, list[float]] = {}
    total = 0.0
    count = 0
    for tl in timelines:
        for idx, state in enumerate(tl.states):
            bucket = per_size.setdefault(len(state), [0.0, 0])
            bucket[0] += idx
            bucket[1] += 1
            total += idx
            count += 1
    mean_age = total / count if count else 0.0
    sizes = sorted(per_size)
    values = [
        per_size[s][0] / per_size[s][1] / mean_age if mean_age > 0 else math.nan
        for s in sizes
    ]
    counts = [per_size[s][1] for s in sizes]
    return SizeProfile(
        np.asarray(sizes, dtype=int),
        np.asarray(values),
        np.asarray(counts, dtype=int),
        mean_age,
    )


@dataclass(frozen=True)
class CommitmentRatios:
    """Aggregated link weights inside vs outside a community.

    ``w_in``/``w_out`` are one member's weights to co-members and to the rest
    of the network; ``W_in``/``W_out`` aggregate the whole community
    (internal edges counted once, boundary edges once).
    """

    w_in: float
    w_out: float
    W_in: float
    W_out: float

    @property
    def member_ratio(self) -> float | None:
        total = self.w_in + self.w_out
        return self.w_out / total if total > 0 else None

    @property
    def community_ratio(self) -> float | None:
        total = self.W_in + self.W_out
        return self.W_out / total if total > 0 else None


def _member_set(community) -> frozenset[int]:
    return getattr(community, "members", community)


def member_weights(node: int, community, g: Snapshot) -> tuple[float, float]:
    """One member's aggregated link weight to co-members and to non-members."""
    members = _member_set(community)
    w_in = w_out = 0.0
    for v, w in g.adj.get(node, {}).items():
        if v in members:
            w_in += w
        else:
            w_out += w
    return w_in, w_out


def community_weights(community, g: Snapshot) -> tuple[float, float]:
    """Total internal edge weight (each edge once) and boundary edge weight."""
    members = _member_set(community)
    total_in = total_out = 0.0
    for u in sorted(members):
        for v, w in g.adj.get(u, {}).items():
            if v in members:
                if u < v:
                    total_in += w
            else:
                total_out += w
    return total_in, total_out


def commitment(node: int, community, g: Snapshot) -> CommitmentRatios:
    """Member- and community-level commitment weights for one node.

    The node must belong to the community; its member ratio
    w_out / (w_in + w_out) measures how much of its interaction weight
    points outside.
    """
    members = _member_set(community)
    if node not in members:
        raise ValueError(f"node {node} is not a member of the community")
    w_in, w_out = member_weights(node, members, g)
    W_in, W_out = community_weights(members, g)
    return CommitmentRatios(w_in, w_out, W_in, W_out)


@dataclass(eq=False)
class BinnedCurve:
    """Per-bin values with sample counts; empty bins hold NaN, not zero."""

    bin_edges: np.ndarray
    values: np.ndarray
    counts: np.ndarray

    @property
    def n_bins(self) -> int:
        return len(self.bin_edges) - 1

    def occupied(self) -> np.ndarray:
        return self.counts > 0


def make_unit_bins(bins: int | Sequence[float]) -> np.ndarray:
    """Bin edges partitioning [0, 1]: a count of equal bins or explicit edges."""
    if isinstance(bins, (int, np.integer)):
        if bins < 1:
            raise ValueError(f"need at least one bin, got {bins}")
        # arange/n keeps decimal edges exact where linspace would drift
        return np.arange(int(bins) + 1) / int(bins)
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be a strictly ascending 1-d sequence")
    if abs(edges[0]) > 1e-12 or abs(edges[-1] - 1.0) > 1e-12:
        raise ValueError("bin edges must partition [0, 1]")
    return edges


def _bin_index(x: float, edges: np.ndarray) -> int:
    i = int(np.searchsorted(edges, x, side="right")) - 1
    return min(max(i, 0), len(edges) - 2)


def _ratio_curve(numer: np.ndarray, denom: np.ndarray, edges: np.ndarray) -> BinnedCurve:
    values = np.full(len(denom), np.nan)
    mask = denom > 0
    values[mask] = numer[mask] / denom[mask]
    return BinnedCurve(edges, values, denom.astype(int))


@dataclass(eq=False)
class AbandonmentCurves:
    """Leave probability and time-in-community, binned by outside commitment."""

    p_leave: BinnedCurve
    time_in_community: BinnedCurve
    n_observations: int
    n_skipped: int


def abandonment_curve(
    timelines: Iterable[CommunityTimeline],
    snapshots: Sequence[Snapshot],
    bins: int | Sequence[float] = 10,
) -> AbandonmentCurves:
    """Per-member leave probability vs the w_out / (w_in + w_out) ratio.

    For every member of every state that has a continuation inside its
    timeline, the ratio is measured on the snapshot of that step and the
    member counts as leaving when absent from the continuation. States
    without a continuation (deaths and series-end censoring) contribute
    nothing. The companion curve bins each (timeline, member) by the ratio
    at the member's first step and averages the length of its initial
    consecutive stay. ``snapshots`` must be the thresholded snapshots the
    covers were detected on, indexable by step; members with zero incident
    weight are skipped and counted.
    """
    edges = make_unit_bins(bins)
    n_bins = len(edges) - 1
    leaves = np.zeros(n_bins)
    observations = np.zeros(n_bins)
    stay_sum = np.zeros(n_bins)
    stay_count = np.zeros(n_bins)
    skipped = 0
    for tl in timelines:
        states = tl.states
        for idx in range(len(states) - 1):
            g = snapshots[tl.t0 + idx]
            state, nxt = states[idx], states[idx + 1]
            for node in sorted(state):
                w_in, w_out = member_weights(node, state, g)
                total = w_in + w_out
                if total <= 0:
                    skipped += 1
                    continue
                b = _bin_index(w_out / total, edges)
                observations[b] += 1
                if node not in nxt:
                    leaves[b] += 1
        first_step: dict[int, int] = {}
        for idx, state in enumerate(states):
            for node in state:
                if node not in first_step:
                    first_step[node] = idx
        for node in sorted(first_step):
            idx = first_step[node]
            g = snapshots[tl.t0 + idx]
            w_in, w_out = member_weights(node, states[idx], g)
            total = w_in + w_out
            if total <= 0:
                skipped += 1
                continue
            run = 1
            while idx + run < len(states) and node in states[idx + run]:
                run += 1
            b = _bin_index(w_out / total, edges)
            stay_sum[b] += run
            stay_count[b] += 1
    return AbandonmentCurves(
        p_leave=_ratio_curve(leaves, observations, edges),
        time_in_community=_ratio_curve(stay_sum, stay_count, edges),
        n_observations=int(observations.sum()),
        n_skipped=skipped,
    )


@dataclass(eq=False)
class DisintegrationCurves:
    """Death probability and lifetime, binned by community-level commitment."""

    p_disintegrate: BinnedCurve
    lifetime_by_birth_ratio: BinnedCurve
    n_observations: int
    n_skipped: int


def disintegration_curve(
    timelines: Iterable[CommunityTimeline],
    snapshots: Sequence[Snapshot],
    bins: int | Sequence[float] = 10,
) -> DisintegrationCurves:
    """Community death probability vs the W_out / (W_in + W_out) ratio.

    Every state is an observation except those censored by the end of the
    series; a state counts as a death when it is the last of a dead
    timeline. The companion curve bins uncensored timelines by the ratio of
    their birth state and averages their lifetimes. ``snapshots`` must be
    the thresholded snapshots, indexable by step.
    """
    edges = make_unit_bins(bins)
    n_bins = len(edges) - 1
    deaths = np.zeros(n_bins)
    observations = np.zeros(n_bins)
    tau_sum = np.zeros(n_bins)
    tau_count = np.zeros(n_bins)
    skipped = 0
    for tl in timelines:
        last_idx = len(tl.states) - 1
        for idx, state in enumerate(tl.states):
            if idx == last_idx and tl.alive_at_end:
                continue
            total_in, total_out = community_weights(state, snapshots[tl.t0 + idx])
            total = total_in + total_out
            if total <= 0:
                skipped += 1
                continue
            b = _bin_index(total_out / total, edges)
            observations[b] += 1
            if idx == last_idx:
                deaths[b] += 1
        if not tl.alive_at_end:
            total_in, total_out = community_weights(tl.states[0], snapshots[tl.t0])
            total = total_in + total_out
            if total <= 0:
                skipped += 1
                continue
            b = _bin_index(total_out / total, edges)
            tau_sum[b] += len(tl.states)
            tau_count[b] += 1
    return DisintegrationCurves(
        p_disintegrate=_ratio_curve(deaths, observations, edges),
        lifetime_by_birth_ratio=_ratio_curve(tau_sum, tau_count, edges),
        n_observations=int(observations.sum()),
        n_skipped=skipped,
    )


@dataclass(frozen=True)
class WeightRatioSummary:
    """Mean weight of intra-community links vs inter-community links."""

    mean_intra: float | None
    mean_inter: float | None
    n_intra: int
    n_inter: int

    @property
    def ratio(self) -> float | None:
        if self.mean_intra is None or self.mean_inter is None or self.mean_inter == 0:
            return None
        return self.mean_intra / self.mean_inter


def _accumulate_weight_ratio(cover, snapshot, sums):
    community_of: dict[int, set[int]] = {}
    for idx, comm in enumerate(cover):
        for node in comm.members:
            community_of.setdefault(node, set()).add(idx)
    empty: set[int] = set()
    for u, v, w in snapshot.edges():
        if community_of.get(u, empty) & community_of.get(v, empty):
            sums[0] += w
            sums[1] += 1
        else:
            sums[2] += w
            sums[3] += 1


def _weight_ratio_from_sums(sums) -> WeightRatioSummary:
    intra_sum, n_intra, inter_sum, n_inter = sums
    return WeightRatioSummary(
        mean_intra=intra_sum / n_intra if n_intra else None,
        mean_inter=inter_sum / n_inter if n_inter else None,
        n_intra=int(n_intra),
        n_inter=int(n_inter),
    )


def weight_ratio(cover: CommunityCover, snapshot: Snapshot) -> WeightRatioSummary:
    """Mean intra- vs inter-community link weight for one snapshot.

    An edge is intra when its endpoints share at least one community and
    inter otherwise (edges touching nodes outside every community included).
    Either class may be empty, leaving the ratio undefined (None); the cover
    must come from the same (thresholded) snapshot.
    """
    sums = [0.0, 0, 0.0, 0]
    _accumulate_weight_ratio(cover, snapshot, sums)
    return _weight_ratio_from_sums(sums)


def pooled_weight_ratio(
    covers: Sequence[CommunityCover], snapshots: Sequence[Snapshot]
) -> WeightRatioSummary:
    """Weight ratio with every edge of every snapshot pooled into one estimate."""
    if len(covers) != len(snapshots):
        raise ValueError("need one cover per snapshot")
    sums = [0.0, 0, 0.0, 0]
    for cover, snapshot in zip(covers, snapshots):
        _accumulate_weight_ratio(cover, snapshot, sums)
    return _weight_ratio_from_sums(sums)


def largest_attribute_block(values: Sequence, numeric_window: float | None = None) -> int:
    """Size of the largest subset sharing one categorical value, or whose
    numeric values differ by at most ``numeric_window``."""
    if not values:
        return 0
    if numeric_window is None:
        return max(Counter(values).values())
    ordered = sorted(values)
    best = 1
    lo = 0
    for hi in range(len(ordered)):
        while ordered[hi] - ordered[lo] > numeric_window:
            lo += 1
        best = max(best, hi - lo + 1)
    return best


@dataclass(eq=False)
class HomogeneityCurve:
    """Largest same-attribute block in real communities vs random sets, by size."""

    sizes: np.ndarray
    n_real: np.ndarray
    n_rand: np.ndarray
    sigma_rand: np.ndarray
    counts: np.ndarray
    n_skipped: int
    mode: str

    @property
    def ratio(self) -> np.ndarray:
        return self.n_real / self.n_rand

    @property
    def band_low(self) -> np.ndarray:
        return self.n_real / (self.n_rand + self.sigma_rand)

    @property
    def band_high(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(
                self.n_rand - self.sigma_rand > 0,
                self.n_real / np.maximum(self.n_rand - self.sigma_rand, 1e-300),
                np.inf,
            )

    @property
    def n_real_over_s(self) -> np.ndarray:
        return self.n_real / self.sizes


def homogeneity_ratio(
    covers: Sequence[CommunityCover],
    attrs: AttributeTable,
    mode: str = "categorical",
    *,
    numeric_window: float = 3.0,
    draws: int = 1000,
    seed: int = 0,
    min_coverage: float = 0.5,
) -> HomogeneityCurve:
    """Attribute homogeneity of communities against a random baseline.

    For every community (across all covers and steps) the largest block of
    attributed members sharing one categorical value, or fitting inside the
    numeric window, is averaged per attributed-member count s. The baseline
    draws ``draws`` uniform s-subsets of the whole attributed population
    with a seeded generator and reports their mean block size and its
    standard deviation. Communities whose attribute coverage falls below
    ``min_coverage``, or that are larger than the attributed population, are
    skipped and counted.
    """
    if mode not in ("categorical", "numeric"):
        raise ValueError(f"mode must be 'categorical' or 'numeric', got {mode!r}")
    if draws < 1:
        raise ValueError(f"draws must be at least 1, got {draws}")
    table: Mapping[int, object] = attrs.categorical if mode == "categorical" else attrs.numeric
    window = None if mode == "categorical" else float(numeric_window)
    if window is not None and window <= 0:
        raise ValueError(f"numeric window must be positive, got {numeric_window}")
    population = sorted(table)
    pop_values = [table[n] for n in population]
    per_size: dict[int, list[int]] = {}
    skipped = 0
    for cover in covers:
        for comm in cover:
            values = [table[m] for m in sorted(comm.members) if m in table]
            size = len(comm.members)
            if size == 0 or len(values) / size < min_coverage:
                skipped += 1
                continue
            if len(values) < 2 or len(values) > len(population):
                skipped += 1
                continue
            per_size.setdefault(len(values), []).append(
                largest_attribute_block(values, numeric_window=window)
            )
    rng = np.random.default_rng(seed)
    sizes = sorted(per_size)
    n_real, n_rand, sigma, counts = [], [], [], []
    for s in sizes:
        blocks = per_size[s]
        n_real.append(sum(blocks) / len(blocks))
        counts.append(len(blocks))
        rand_blocks = np.empty(draws)
        for d in range(draws):
            picked = rng.choice(len(population), size=s, replace=False)
            rand_blocks[d] = largest_attribute_block(
                [pop_values[i] for i in picked], numeric_window=window
            )
        n_rand.append(float(rand_blocks.mean()))
        sigma.append(float(rand_blocks.std()))
    return HomogeneityCurve(
        sizes=np.asarray(sizes, dtype=int),
        n_real=np.asarray(n_real),
        n_rand=np.asarray(n_rand),
        sigma_rand=np.asarray(sigma),
        counts=np.asarray(counts, dtype=int),
        n_skipped=skipped,
        mode=mode,
    )


@dataclass(eq=False)
class HeatmapGrid:
    """Mean lifetime per (size, stationarity) cell.

    Empty cells hold NaN with a zero count rather than zero. ``ridge`` gives,
    per size row, the occupied stationarity bin with the largest mean
    lifetime (-1 for rows without occupied cells).
    """

    size_edges: np.ndarray
    zeta_edges: np.ndarray
    mean_lifetime: np.ndarray
    counts: np.ndarray
    ridge: np.ndarray
    n_excluded: int


def auto_size_bins(sizes: Iterable[int]) -> list[float]:
    """Doubling integer bin edges covering the observed sizes."""
    sizes = list(sizes)
    if not sizes:
        return [0.0, 1.0]
    edges = [float(min(sizes))]
    while edges[-1] <= max(sizes):
        edges.append(edges[-1] * 2)
    return edges


def lifespan_heatmap(
    timelines: Iterable[CommunityTimeline],
    size_bins: Sequence[float],
    zeta_bins: int | Sequence[float] = 10,
    size_mode: str = "birth",
) -> HeatmapGrid:
    """Mean lifetime binned by community size and stationarity.

    Size is the birth-state size by default (``size_mode="mean"`` uses the
    mean state size instead). Censored timelines, single-step timelines
    (whose stationarity is undefined) and sizes outside the given bins are
    excluded and counted.
    """
    if size_mode not in ("birth", "mean"):
        raise ValueError(f"size_mode must be 'birth' or 'mean', got {size_mode!r}")
    size_edges = np.asarray(size_bins, dtype=float)
    if size_edges.ndim != 1 or len(size_edges) < 2 or np.any(np.diff(size_edges) <= 0):
        raise ValueError("size bins must be a strictly ascending 1-d sequence")
    zeta_edges = make_unit_bins(zeta_bins)
    shape = (len(size_edges) - 1, len(zeta_edges) - 1)
    sums = np.zeros(shape)
    counts = np.zeros(shape, dtype=int)
    excluded = 0
    for tl in timelines:
        if tl.alive_at_end:
            excluded += 1
            continue
        zeta = stationarity(tl)
        if zeta is None:
            excluded += 1
            continue
        if size_mode == "birth":
            size = float(tl.birth_size)
        else:
            size = sum(len(s) for s in tl.states) / len(tl.states)
        si = int(np.searchsorted(size_edges, size, side="right")) - 1
        if si == shape[0] and size == size_edges[-1]:
            si -= 1
        if not 0 <= si < shape[0]:
            excluded += 1
            continue
        zi = _bin_index(zeta, zeta_edges)
        sums[si, zi] += lifetime(tl)
        counts[si, zi] += 1
    means = np.full(shape, np.nan)
    mask = counts > 0
    means[mask] = sums[mask] / counts[mask]
    ridge = np.full(shape[0], -1, dtype=int)
    for row in range(shape[0]):
        occupied = np.flatnonzero(mask[row])
        if len(occupied):
            ridge[row] = occupied[np.argmax(means[row, occupied])]
    return HeatmapGrid(size_edges, zeta_edges, means, counts, ridge, excluded)
