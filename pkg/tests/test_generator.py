import numpy as np
import pytest

from cliquetrack import (
    AttributePlanting,
    CommunityPlan,
    PlantedSchedule,
    ScheduleError,
    build_timelines,
    detect_communities,
    generate,
    make_abandonment_series,
    make_disintegration_series,
    schedule_from_dict,
    schedule_to_dict,
)


def plain_schedule(**overrides):
    base = dict(
        n_steps=8,
        plans=[CommunityPlan("a", size=8, replace_fraction=0.1), CommunityPlan("b", size=6)],
        background_nodes=15,
        background_edge_prob=0.01,
    )
    base.update(overrides)
    return PlantedSchedule(**base)


class TestScheduleValidation:
    def test_size_below_k(self):
        with pytest.raises(ScheduleError, match="below clique size"):
            generate(PlantedSchedule(n_steps=3, plans=[CommunityPlan("a", size=3)], k=4))

    def test_unknown_merge_target(self):
        plan = CommunityPlan("a", size=6, merge_into="ghost", merge_at=2)
        with pytest.raises(ScheduleError, match="unknown"):
            generate(PlantedSchedule(n_steps=5, plans=[plan]))

    def test_merge_target_must_be_alive(self):
        plans = [
            CommunityPlan("a", size=6, death=1),
            CommunityPlan("b", size=6, merge_into="a", merge_at=3),
        ]
        with pytest.raises(ScheduleError, match="not alive"):
            generate(PlantedSchedule(n_steps=6, plans=plans))

    def test_split_cannot_exhaust_parent(self):
        plans = [
            CommunityPlan("a", size=8),
            CommunityPlan("b", size=6, birth=2, split_off="a"),
        ]
        with pytest.raises(ScheduleError, match="would leave parent"):
            generate(PlantedSchedule(n_steps=6, plans=plans))

    def test_replace_fraction_bounds(self):
        with pytest.raises(ValueError):
            generate(
                PlantedSchedule(n_steps=3, plans=[CommunityPlan("a", size=6, replace_fraction=1.5)])
            )

    def test_duplicate_names(self):
        with pytest.raises(ScheduleError, match="duplicate"):
            generate(PlantedSchedule(n_steps=3, plans=[CommunityPlan("a", 6), CommunityPlan("a", 6)]))


class TestGenerate:
    def test_same_seed_is_bit_identical(self):
        a = generate(plain_schedule(), seed=42)
        b = generate(plain_schedule(), seed=42)
        assert a.events == b.events
        assert a.attribute_rows == b.attribute_rows
        assert [tl.states for tl in a.truth_timelines] == [tl.states for tl in b.truth_timelines]

    def test_different_seeds_differ(self):
        a = generate(plain_schedule(), seed=1)
        b = generate(plain_schedule(), seed=2)
        assert a.events != b.events

    def test_exact_recovery_without_background(self):
        schedule = plain_schedule(background_nodes=0, background_edge_prob=0.0)
        result = generate(schedule, seed=5)
        for t, snapshot in enumerate(result.series):
            got = set(detect_communities(snapshot, schedule.k, 0.0).member_sets())
            expected = {
                tl.states[t - tl.t0]
                for tl in result.truth_timelines
                if tl.t0 <= t <= tl.t_last
            }
            assert got == expected

    def test_thresholding_removes_background(self):
        schedule = plain_schedule(background_nodes=40, background_edge_prob=0.03)
        result = generate(schedule, seed=6)
        for t, snapshot in enumerate(result.series):
            got = set(detect_communities(snapshot, schedule.k, 2.0).member_sets())
            expected = {
                tl.states[t - tl.t0]
                for tl in result.truth_timelines
                if tl.t0 <= t <= tl.t_last
            }
            assert got == expected

    def test_turnover_tracks_replace_fraction(self):
        r = 0.2
        changed, total = 0, 0
        for seed in range(5):
            schedule = PlantedSchedule(
                n_steps=20, plans=[CommunityPlan("a", size=30, replace_fraction=r)]
            )
            (tl,) = generate(schedule, seed=seed).truth_timelines
            for a, b in zip(tl.states, tl.states[1:]):
                changed += len(a - b)
                total += len(a)
        assert changed / total == pytest.approx(r, abs=0.03)

    def test_replaced_members_leave_forever(self):
        schedule = PlantedSchedule(
            n_steps=6, plans=[CommunityPlan("a", size=10, replace_fraction=0.3)]
        )
        (tl,) = generate(schedule, seed=3).truth_timelines
        for idx, state in enumerate(tl.states[:-1]):
            gone = state - tl.states[idx + 1]
            for later in tl.states[idx + 1 :]:
                assert not (gone & later)

    def test_lifespans_and_censoring(self):
        plans = [
            CommunityPlan("early", size=6, birth=0, death=3),
            CommunityPlan("late", size=6, birth=2),
        ]
        result = generate(PlantedSchedule(n_steps=6, plans=plans), seed=0)
        early, late = result.truth_timelines
        assert early.t0 == 0 and early.t_last == 3 and not early.alive_at_end
        assert late.t0 == 2 and late.t_last == 5 and late.alive_at_end
        kinds = [(e.t, e.kind) for e in result.truth_events]
        assert (0, "birth") in kinds and (2, "birth") in kinds and (4, "death") in kinds

    def test_merge_schedule_realized(self):
        plans = [
            CommunityPlan("a", size=6),
            CommunityPlan("b", size=6, merge_into="a", merge_at=3),
        ]
        result = generate(PlantedSchedule(n_steps=6, plans=plans), seed=1)
        a, b = result.truth_timelines
        assert b.t_last == 2 and not b.alive_at_end
        assert len(a.states[3]) == 12
        assert b.states[2] <= a.states[3]
        merges = [e for e in result.truth_events if e.kind == "merge"]
        assert merges == [type(merges[0])(3, "merge", (0, 1, 0))]

    def test_split_schedule_realized(self):
        plans = [
            CommunityPlan("a", size=12),
            CommunityPlan("c", size=5, birth=3, split_off="a"),
        ]
        result = generate(PlantedSchedule(n_steps=6, plans=plans), seed=1)
        a, c = result.truth_timelines
        assert c.t0 == 3 and len(c.states[0]) == 5
        assert len(a.states[3]) == 7
        assert c.states[0] <= a.states[2]
        assert not (c.states[0] & a.states[3])
        splits = [e for e in result.truth_events if e.kind == "split"]
        assert splits == [type(splits[0])(3, "split", (0, 0, 1))]

    def test_tracker_recovers_merge_and_split(self):
        plans = [
            CommunityPlan("a", size=8, replace_fraction=0.05),
            CommunityPlan("b", size=8, replace_fraction=0.05, merge_into="a", merge_at=4),
            CommunityPlan("c", size=5, birth=6, split_off="a"),
        ]
        schedule = PlantedSchedule(
            n_steps=9, plans=plans, background_nodes=20, background_edge_prob=0.005
        )
        result = generate(schedule, seed=11)
        tracked = build_timelines(result.series, 4, 2.0)
        merges = [e for e in tracked.events if e.kind == "merge"]
        splits = [e for e in tracked.events if e.kind == "split"]
        assert [e.t for e in merges] == [4]
        assert [e.t for e in splits] == [6]

    def test_attribute_modes(self):
        homogeneous = generate(plain_schedule(), seed=0)
        assert homogeneous.attributes.categorical and homogeneous.attributes.numeric
        none = generate(
            plain_schedule(attributes=AttributePlanting(mode="none")), seed=0
        )
        assert not none.attribute_rows
        uniform = generate(
            plain_schedule(attributes=AttributePlanting(mode="uniform")), seed=0
        )
        assert uniform.attributes.categorical

    def test_homogeneous_plans_share_category(self):
        result = generate(plain_schedule(background_nodes=0, background_edge_prob=0.0), seed=4)
        names = result.series.names
        for tl, plan in zip(result.truth_timelines, ("a", "b")):
            values = {
                result.attributes.categorical[m] for state in tl.states for m in state
            }
            assert len(values) == 1

    def test_series_padded_to_schedule_length(self):
        plans = [CommunityPlan("a", size=6, death=2)]
        result = generate(PlantedSchedule(n_steps=7, plans=plans), seed=0)
        assert len(result.series) == 7
        assert result.series[6].n_edges == 0


class TestScheduleSerialization:
    def test_roundtrip(self):
        schedule = plain_schedule()
        rebuilt = schedule_from_dict(schedule_to_dict(schedule))
        assert schedule_to_dict(rebuilt) == schedule_to_dict(schedule)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ScheduleError, match="unknown schedule keys"):
            schedule_from_dict({"n_steps": 3, "plans": [], "bogus": 1})


class TestMechanismSeries:
    def test_abandonment_probabilities_monotone(self):
        result = make_abandonment_series(n_communities=2, size=6, n_steps=10, seed=0)
        assert np.all(np.diff(result.ratios) > 0)
        assert np.all(np.diff(result.probabilities) > 0)
        assert len(result.truth_timelines) == 2
        for tl in result.truth_timelines:
            assert len(tl) == 10 and tl.alive_at_end

    def test_abandonment_planted_ratios_measured_exactly(self):
        from cliquetrack import member_weights

        result = make_abandonment_series(n_communities=1, size=5, n_steps=4, seed=1)
        (tl,) = result.truth_timelines
        snapshot = result.series[0]
        measured = sorted(
            member_weights(m, tl.states[0], snapshot)[1]
            / sum(member_weights(m, tl.states[0], snapshot))
            for m in tl.states[0]
        )
        assert np.allclose(measured, result.ratios)

    def test_abandonment_cover_is_exactly_planted(self):
        result = make_abandonment_series(n_communities=3, size=6, n_steps=5, seed=2)
        for t, snapshot in enumerate(result.series):
            got = set(detect_communities(snapshot, 4, 0.0).member_sets())
            assert got == {tl.states[t] for tl in result.truth_timelines}

    def test_disintegration_ratio_measured_exactly(self):
        from cliquetrack import community_weights

        result = make_disintegration_series(n_slots=3, size=5, n_steps=6, seed=3)
        by_slot = {}
        for tl, slot in zip(result.truth_timelines, result.slot_of_timeline):
            total_in, total_out = community_weights(tl.states[0], result.series[tl.t0])
            by_slot.setdefault(slot, total_out / (total_in + total_out))
        for slot, measured in by_slot.items():
            assert measured == pytest.approx(result.ratios[slot])

    def test_disintegration_respawns_keep_slots_busy(self):
        result = make_disintegration_series(n_slots=4, size=5, n_steps=30, seed=5)
        per_step = np.zeros(30, dtype=int)
        for tl in result.truth_timelines:
            for t in tl.steps():
                per_step[t] += 1
        assert np.all(per_step == 4)

    def test_probability_bounds_validated(self):
        with pytest.raises(ValueError, match="inside"):
            make_abandonment_series(leave_floor=0.9, leave_slope=0.6)
