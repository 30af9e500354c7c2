"""Temporal overlapping-community analytics on weighted graph snapshots.

Detect overlapping communities per snapshot by k-clique percolation, match
them across consecutive steps through the joint graph, stitch matched pairs
into timelines, and compute lifecycle statistics (autocorrelation,
stationarity, lifetime, commitment and homogeneity curves). A seeded
generator plants communities with known schedules for verification, and the
``cliquetrack`` command line ties everything into reproducible pipelines.
"""

from .generator import (
    AttributePlanting,
    CommunityPlan,
    MechanismResult,
    PlantedSchedule,
    ScheduleError,
    SynthResult,
    generate,
    make_abandonment_series,
    make_disintegration_series,
    schedule_from_dict,
    schedule_to_dict,
    uniform_schedule,
)
from .graphs import (
    AttributeTable,
    EventFormatError,
    NameMap,
    Snapshot,
    SnapshotSeries,
    attributes_from_rows,
    join,
    load_events,
    threshold,
)
from .metrics import (
    AbandonmentCurves,
    BinnedCurve,
    CensoredTimelineError,
    CommitmentRatios,
    DisintegrationCurves,
    HeatmapGrid,
    HomogeneityCurve,
    LagCurve,
    SizeProfile,
    WeightRatioSummary,
    abandonment_curve,
    age_size_profile,
    auto_size_bins,
    autocorrelation,
    commitment,
    community_weights,
    disintegration_curve,
    homogeneity_ratio,
    jaccard,
    largest_attribute_block,
    lifespan_heatmap,
    lifetime,
    make_unit_bins,
    mean_autocorrelation_by_birth_size,
    member_weights,
    pooled_weight_ratio,
    stationarity,
    weight_ratio,
)
from .percolation import (
    CliquePercolation,
    Community,
    CommunityCover,
    UnionFind,
    cpm_communities,
    detect_communities,
    enumerate_k_cliques,
    maximal_cliques,
    select_weight_threshold,
)
from .tracking import (
    CommunityTimeline,
    CommunityTracker,
    CompositionEntry,
    EventRecord,
    JointGroup,
    MatchingInvariantError,
    StepMatching,
    TrackingResult,
    build_timelines,
    composition_profile,
    joint_cover,
    match_step,
)

__version__ = "0.1.0"

__all__ = [
    "AbandonmentCurves",
    "AttributePlanting",
    "AttributeTable",
    "BinnedCurve",
    "CensoredTimelineError",
    "CliquePercolation",
    "CommitmentRatios",
    "Community",
    "CommunityCover",
    "CommunityPlan",
    "CommunityTimeline",
    "CommunityTracker",
    "CompositionEntry",
    "DisintegrationCurves",
    "EventFormatError",
    "EventRecord",
    "HeatmapGrid",
    "HomogeneityCurve",
    "JointGroup",
    "LagCurve",
    "MatchingInvariantError",
    "MechanismResult",
    "NameMap",
    "PlantedSchedule",
    "ScheduleError",
    "SizeProfile",
    "Snapshot",
    "SnapshotSeries",
    "StepMatching",
    "SynthResult",
    "TrackingResult",
    "UnionFind",
    "WeightRatioSummary",
    "abandonment_curve",
    "age_size_profile",
    "attributes_from_rows",
    "auto_size_bins",
    "autocorrelation",
    "build_timelines",
    "commitment",
    "community_weights",
    "composition_profile",
    "cpm_communities",
    "detect_communities",
    "disintegration_curve",
    "enumerate_k_cliques",
    "generate",
    "homogeneity_ratio",
    "jaccard",
    "join",
    "joint_cover",
    "largest_attribute_block",
    "lifespan_heatmap",
    "lifetime",
    "load_events",
    "make_abandonment_series",
    "make_disintegration_series",
    "make_unit_bins",
    "match_step",
    "maximal_cliques",
    "mean_autocorrelation_by_birth_size",
    "member_weights",
    "pooled_weight_ratio",
    "schedule_from_dict",
    "schedule_to_dict",
    "select_weight_threshold",
    "stationarity",
    "threshold",
    "uniform_schedule",
    "weight_ratio",
]
