from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gazeprompt.frameplan import (
    FramePlan,
    RenderConfig,
    frames_for_duration,
    plan_frames,
    sampled_index,
)

from conftest import scanpath_from_durations


def oracle_sampled_indices(total_frames: int, k: int) -> list[int]:
    """Materialize every virtual index and evaluate the sampling rule directly."""
    virtual = list(range(1, total_frames + 1))
    out = []
    for j in range(1, k + 1):
        idx = math.floor(j * total_frames / k)
        idx = min(max(idx, 1), total_frames)
        out.append(virtual[idx - 1])
    return out


def oracle_ownership(per_fixation_frames: list[int]) -> list[int]:
    """Fixation ordinal of each virtual frame, by flat repetition."""
    owners = []
    for ordinal, count in enumerate(per_fixation_frames, start=1):
        owners.extend([ordinal] * count)
    return owners


def exact_frames_for_duration(duration: float, fps: int) -> int:
    # independent round-half-up in exact rational arithmetic over the binary float
    return max(1, math.floor(Fraction(duration) * fps + Fraction(1, 2)))


def test_single_fixation_one_second():
    plan = plan_frames(scanpath_from_durations([1.0]), RenderConfig(fps=10, k=16))
    assert plan.per_fixation_frames == (10,)
    assert plan.total_frames == 10


def test_three_fixations_total_equals_k_sampling_is_identity():
    plan = plan_frames(scanpath_from_durations([1.0, 0.5, 0.1]), RenderConfig(fps=10, k=16))
    assert plan.per_fixation_frames == (10, 5, 1)
    assert plan.total_frames == 16
    assert plan.sampled_indices == tuple(range(1, 17))
    ordinals = [plan.fixation_ordinal(i) for i in plan.sampled_indices]
    assert ordinals == [1] * 10 + [2] * 5 + [3] * 1


def test_fewer_virtual_frames_than_k_repeats_frames():
    # frozen from the brute-force oracle for total=5, k=16
    plan = plan_frames(scanpath_from_durations([0.1] * 5), RenderConfig(fps=10, k=16))
    assert plan.total_frames == 5
    expected = [1, 1, 1, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4, 5]
    assert list(plan.sampled_indices) == expected
    assert oracle_sampled_indices(5, 16) == expected


def test_exact_division_samples_every_tenth_frame():
    plan = plan_frames(scanpath_from_durations([1.0] * 16), RenderConfig(fps=10, k=16))
    assert plan.total_frames == 160
    assert list(plan.sampled_indices) == [10 * j for j in range(1, 17)]


def test_subsecond_fixation_keeps_one_frame():
    assert frames_for_duration(0.01, 10) == 1
    assert frames_for_duration(0.05, 10) == 1  # 0.5 rounds half up to 1
    assert frames_for_duration(0.15, 10) == 2
    assert frames_for_duration(0.24, 10) == 2
    assert frames_for_duration(0.25, 10) == 3


def test_plan_invariants_reject_bad_construction():
    with pytest.raises(ValueError):
        FramePlan(per_fixation_frames=(2, 2), total_frames=5, sampled_indices=(1,))
    with pytest.raises(ValueError):
        FramePlan(per_fixation_frames=(2, 2), total_frames=4, sampled_indices=(0, 1))
    with pytest.raises(ValueError):
        FramePlan(per_fixation_frames=(2, 2), total_frames=4, sampled_indices=(3, 2))


def test_render_config_validation():
    with pytest.raises(ValueError):
        RenderConfig(fps=0)
    with pytest.raises(ValueError):
        RenderConfig(k=0)
    with pytest.raises(ValueError):
        RenderConfig(dot_radius_px=0)
    with pytest.raises(ValueError):
        RenderConfig(heatmap_alpha_min=0.0)
    with pytest.raises(ValueError):
        RenderConfig(dot_color=(300, 0, 0))


durations_strategy = st.lists(
    st.floats(min_value=0.01, max_value=5.0, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=25,
)


@given(durations=durations_strategy, k=st.integers(min_value=1, max_value=40))
@settings(max_examples=200)
def test_plan_matches_brute_force_oracle(durations, k):
    config = RenderConfig(fps=10, k=k)
    plan = plan_frames(scanpath_from_durations(durations), config)

    assert plan.total_frames == sum(
        exact_frames_for_duration(d, config.fps) for d in durations
    )
    assert list(plan.sampled_indices) == oracle_sampled_indices(plan.total_frames, k)

    owners = oracle_ownership(list(plan.per_fixation_frames))
    for idx in plan.sampled_indices:
        assert plan.fixation_ordinal(idx) == owners[idx - 1]


@given(durations=durations_strategy, k=st.integers(min_value=1, max_value=40))
@settings(max_examples=200)
def test_sampled_indices_monotone_and_bounded(durations, k):
    plan = plan_frames(scanpath_from_durations(durations), RenderConfig(fps=10, k=k))
    assert len(plan.sampled_indices) == k
    assert all(1 <= idx <= plan.total_frames for idx in plan.sampled_indices)
    assert list(plan.sampled_indices) == sorted(plan.sampled_indices)
    ordinals = [plan.fixation_ordinal(idx) for idx in plan.sampled_indices]
    assert ordinals == sorted(ordinals)


@given(durations=durations_strategy)
@settings(max_examples=100)
def test_duration_weighting_of_sampled_counts(durations):
    """A fixation at least twice as long never gets fewer sampled frames,
    provided both counts exceed 1 and the virtual video is long enough."""
    k = 16
    plan = plan_frames(scanpath_from_durations(durations), RenderConfig(fps=10, k=k))
    if plan.total_frames < 2 * k:
        return
    counts = {ordinal: 0 for ordinal in range(1, len(durations) + 1)}
    for idx in plan.sampled_indices:
        counts[plan.fixation_ordinal(idx)] += 1
    for a, ta in enumerate(durations, start=1):
        for b, tb in enumerate(durations, start=1):
            if ta >= 2 * tb and counts[a] > 1 and counts[b] > 1:
                assert counts[a] >= counts[b]


@given(durations=durations_strategy, factor=st.sampled_from([2, 4, 8]))
@settings(max_examples=100)
def test_reciprocal_fps_duration_scaling_keeps_attribution(durations, factor):
    """fps -> c*fps with durations -> d/c leaves the sampled attribution
    unchanged (halving a float is exact)."""
    base = plan_frames(scanpath_from_durations(durations), RenderConfig(fps=10, k=16))
    scaled = plan_frames(
        scanpath_from_durations([d / factor for d in durations]),
        RenderConfig(fps=10 * factor, k=16),
    )
    assert base.per_fixation_frames == scaled.per_fixation_frames
    assert base.sampled_indices == scaled.sampled_indices
    assert base.source_fixation_of_frame == scaled.source_fixation_of_frame
