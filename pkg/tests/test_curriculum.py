import pytest
from hypothesis import given, strategies as st

from boostdepth.curriculum import (
    BOOST,
    STEREO,
    WARMUP,
    BaselineModel,
    ScheduleParams,
    SourceSelection,
    baseline,
    expand_sources,
    fixed_sources,
    schedule_for_epoch,
    select_source,
)
from boostdepth.exceptions import ConfigError


def test_baseline_examples():
    m = BaselineModel(0.12)
    assert baseline(m, 4) == pytest.approx(0.48)
    assert baseline(m, -4) == pytest.approx(0.48)
    assert baseline(m, STEREO) == 0.1
    assert baseline(m, 0) == 0.0
    with pytest.raises(ConfigError):
        BaselineModel(0.0)


def test_schedule_examples():
    s = schedule_for_epoch(0, WARMUP, False)
    assert s.tau == pytest.approx(0.1) and s.omega == (STEREO, 1, 2)
    assert schedule_for_epoch(10, BOOST, False).tau == pytest.approx(0.6)
    assert schedule_for_epoch(10, BOOST, False).omega == (STEREO, 1, 2, 3, 4, 5)
    tri = schedule_for_epoch(10, BOOST, True)
    assert tri.tau == pytest.approx(0.6) and max(tri.omega[1:]) == 7
    assert schedule_for_epoch(5, WARMUP, True).tau == pytest.approx(0.3)
    with pytest.raises(ConfigError):
        schedule_for_epoch(-1, WARMUP, False)
    with pytest.raises(ConfigError):
        schedule_for_epoch(0, "cooldown", False)
    assert STEREO not in schedule_for_epoch(0, WARMUP, False, ScheduleParams(use_stereo=False)).omega


def test_select_source_examples():
    w0 = schedule_for_epoch(0, WARMUP, False)
    assert select_source(BaselineModel(0.08), w0).chosen == STEREO
    assert select_source(BaselineModel(0.03), w0).chosen == STEREO
    w5 = schedule_for_epoch(5, WARMUP, False)
    assert select_source(BaselineModel(0.03), w5).chosen == STEREO
    assert select_source(BaselineModel(0.06), w5).chosen == 2


def test_select_source_ties_and_fallback():
    w0 = schedule_for_epoch(0, WARMUP, False)
    # t+1 and stereo both at 0.1: monocular wins
    assert select_source(BaselineModel(0.1), w0).chosen == 1
    # t+1 and t+2 both infeasible: the narrowest one
    assert select_source(BaselineModel(0.5), w0).chosen == STEREO
    assert select_source(BaselineModel(0.1), schedule_for_epoch(0, BOOST, False)).chosen == 1
    assert select_source(BaselineModel(0.5), w0, available={1, -1, 2, -2}).chosen == 1
    with pytest.raises(ConfigError):
        select_source(BaselineModel(0.5), w0, available=set())


def test_expand_sources_examples():
    assert expand_sources(SourceSelection(STEREO), True).sources == (STEREO,)
    assert expand_sources(SourceSelection(1), True).sources == (1, -1, STEREO)
    assert expand_sources(SourceSelection(4), True).sources == (4, 3, 2, -4, -3, -2)
    assert expand_sources(SourceSelection(4), False).sources == (4, -4)
    assert expand_sources(SourceSelection(STEREO), False).sources == (STEREO,)
    # window clipping drops frames, never clamps
    assert expand_sources(SourceSelection(4), True, available={1, 2, 3, 4, -1, -2, -3}).sources == (4, 3, 2, -3, -2)


def test_fixed_sources():
    assert fixed_sources(1, True).sources == (1, -1, STEREO)
    assert fixed_sources(2, False, available={2, -2, -1}).sources == (2, -2)


def _tri_min_brute(chosen):
    if chosen == STEREO:
        return {STEREO}
    if chosen == 1:
        return {1, -1, STEREO}
    if chosen == 2:
        return {2, 1, -2, -1, STEREO}
    return {chosen + d for d in (0, -1, -2)} | {-chosen + d for d in (0, 1, 2)}


@pytest.mark.parametrize("chosen", [STEREO, 1, 2, 3, 4, 5, 6, 7])
def test_expand_matches_case_dispatch(chosen):
    out = expand_sources(SourceSelection(chosen), True).sources
    assert set(out) == _tri_min_brute(chosen)
    assert len(out) == len(set(out))
    if chosen not in (STEREO, 1, 2):
        assert sorted(x for x in out if x > 0) == sorted(-x for x in out if x < 0)


def _select_brute(b, epoch, stage, tri):
    """Enumerate the candidate set and pick the widest feasible baseline by hand."""
    if stage == WARMUP:
        tau, top = 0.1 + 0.04 * epoch, 2
    elif tri:
        tau, top = 0.15 * epoch - 0.9, 7
    else:
        tau, top = 0.1 * epoch - 0.4, 5
    cands = [(0.1, 0, 0, STEREO)] + [(b * k, 1, k, k) for k in range(1, top + 1)]
    feasible = [c for c in cands if c[0] <= tau]
    if feasible:
        return max(feasible)[3]
    return min(cands, key=lambda c: (c[0], -c[1]))[3]


@given(
    st.floats(0.01, 0.2),
    st.sampled_from([(WARMUP, False), (WARMUP, True), (BOOST, False), (BOOST, True)]),
    st.integers(0, 19),
)
def test_select_matches_enumeration(b, stage_tri, epoch):
    stage, tri = stage_tri
    sched = schedule_for_epoch(epoch, stage, tri)
    assert select_source(BaselineModel(b), sched).chosen == _select_brute(b, epoch, stage, tri)


@given(st.floats(0.01, 0.2), st.sampled_from([(WARMUP, False), (BOOST, False), (BOOST, True)]))
def test_chosen_baseline_non_decreasing(b, stage_tri):
    stage, tri = stage_tri
    m = BaselineModel(b)
    prev = -1.0
    for epoch in range(20):
        sched = schedule_for_epoch(epoch, stage, tri)
        g = baseline(m, select_source(m, sched).chosen)
        if any(baseline(m, x) <= sched.tau for x in sched.omega):
            assert g <= sched.tau + 1e-12
            assert g >= prev - 1e-12
            prev = g
