"""End-to-end acceptance checks, one test group per numbered criterion.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary ends with one
``[PASS]``/``[FAIL]`` line per criterion.
"""

import subprocess
import sys
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from boostdepth.curriculum import BOOST, STEREO, WARMUP, BaselineModel, ScheduleParams, SourceSelection
from boostdepth.exceptions import NumericError
from boostdepth.metrics import edge_metrics, evaluate_depth, pointcloud_metrics
from boostdepth.optimizer import DepthState, Objective, RunConfig, build_candidates, gradient_check, run, selection_for
from boostdepth.photometric import ErrorMap, LossConfig, min_aggregate, total_loss
from boostdepth.pose import PARTIAL_INCREMENTAL, NoisyOracleEstimator, PosePolicy, simulate_drift
from boostdepth.synth import SceneSpec, render, trajectory_for

MD2 = dict(curriculum=False, tri_min=False, incremental_pose=False, partial_incremental=False, error_reconstructions=False)
TRI = SourceSelection(3, (3, 2, 1, -3, -2, -1))


def perturbed(depth, seed, n_levels=1, amp=0.1):
    r = np.random.default_rng(seed)
    noise = ndimage.gaussian_filter(r.normal(0, 1, depth.shape), 3)
    noise *= amp / np.abs(noise).max()
    return DepthState.from_log_depth(np.log(depth) + noise, n_levels)


# -- 1 ------------------------------------------------------------------------------


@pytest.mark.acceptance(1, "analytic log-depth gradient matches central differences")
def test_gradient_check_full_loss(record_property):
    scene = render(SceneSpec(layout="two_plane_step", width=64, height=48, frames=7))
    w = scene.window(3)
    est = NoisyOracleEstimator(scene.trajectory, seed=0)
    cands, _ = build_candidates(est, PosePolicy(PARTIAL_INCREMENTAL), TRI, w, True)
    assert any(c.error_induced for c in cands)
    st_ = perturbed(w.depth, 7)
    start = time.perf_counter()
    worst, checked = gradient_check(st_, Objective(w), cands, n_pixels=100)
    elapsed = time.perf_counter() - start
    record_property("detail", f"max rel err {worst:.2e} over {len(checked)} px in {elapsed:.1f}s")
    assert len(checked) == 100
    assert worst < 1e-3
    assert elapsed < 10


# -- 2 ------------------------------------------------------------------------------

N_FRAMES = 15


def _brute_selection(b, epoch, stage, tri, t):
    exists = lambda k: 0 <= t + k < N_FRAMES
    if stage == WARMUP:
        tau, top = 0.1 + 0.04 * epoch, 2
    elif tri:
        tau, top = 0.15 * epoch + -0.9, 7
    else:
        tau, top = 0.1 * epoch + -0.4, 5
    # (baseline, monocular?, offset, name)
    cands = [(0.1, 0, 0, STEREO)] + [(b * k, 1, k, k) for k in range(1, top + 1) if exists(k)]
    feasible = [c for c in cands if c[0] <= tau]
    if feasible:
        chosen = max(feasible)[3]
    else:
        chosen = min(cands, key=lambda c: (c[0], -c[1]))[3]
    if chosen == STEREO:
        full = [STEREO]
    elif not tri:
        full = [chosen, -chosen]
    elif chosen == 1:
        full = [1, -1, STEREO]
    elif chosen == 2:
        full = [2, 1, -2, -1, STEREO]
    else:
        k = chosen
        full = [k, k - 1, k - 2, -k, -(k - 1), -(k - 2)]
    return chosen, [x for x in full if x == STEREO or exists(x)]


@pytest.mark.acceptance(2, "curriculum selection and tri-min expansion match enumeration")
def test_curriculum_enumeration(record_property):
    scene = render(SceneSpec(width=16, height=12, frames=N_FRAMES))
    windows = {t: scene.window(t) for t in range(N_FRAMES)}
    n = 0
    for b in (0.02, 0.05, 0.08, 0.12):
        model = BaselineModel(b, 0.1)
        for tri in (False, True):
            cfg = RunConfig(tri_min=tri)
            for stage in (WARMUP, BOOST):
                for epoch in range(20):
                    for t, w in windows.items():
                        sel = selection_for(cfg, stage, epoch, model, w.available, ScheduleParams())
                        chosen, sources = _brute_selection(b, epoch, stage, tri, t)
                        assert (sel.chosen, list(sel.sources)) == (chosen, sources), (b, tri, stage, epoch, t)
                        n += 1
    record_property("detail", f"{n} configurations")


# -- 3 ------------------------------------------------------------------------------


@pytest.mark.acceptance(3, "noisy oracle drift: incremental error n*e(b), direct worse")
def test_drift_simulation(record_property):
    traj = trajectory_for(SceneSpec())
    b = 0.1
    e_b = 0.5 * b**2
    inc = {n: [] for n in range(1, 8)}
    direct = {n: [] for n in range(1, 8)}
    for seed in range(200):
        for row in simulate_drift(NoisyOracleEstimator(traj, seed=seed), traj, 7):
            (inc if row["policy"] == "incremental" else direct)[row["separation"]].append(row["mean_error"])
    worst = 0.0
    for n in range(1, 8):
        ratio = np.mean(inc[n]) / (n * e_b)
        worst = max(worst, abs(ratio - 1))
        assert abs(ratio - 1) < 0.05, n
        if n >= 2:
            assert np.all(np.array(direct[n]) > np.array(inc[n])), n
    record_property("detail", f"worst relative deviation {worst:.2e}")


# -- 4 ------------------------------------------------------------------------------


@pytest.mark.acceptance(4, "error reconstructions: alpha=1 is a no-op, alpha=5.5 never raises the aggregate")
def test_alpha_one_bit_identical(step_scene):
    cfg = dict(warmup_epochs=1, boost_epochs=3, boost_start_epoch=12, iterations_per_epoch=3, targets=(7,))
    est = lambda: NoisyOracleEstimator(step_scene.trajectory, seed=3)
    on = run(step_scene, RunConfig(error_reconstructions=True, error_alpha=1.0, **cfg), estimator=est())
    off = run(step_scene, RunConfig(error_reconstructions=False, **cfg), estimator=est())
    assert [r["loss"] for r in on.log] == [r["loss"] for r in off.log]
    assert np.array_equal(on.depth, off.depth)


@pytest.mark.acceptance(4, "error reconstructions: alpha=1 is a no-op, alpha=5.5 never raises the aggregate")
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_alpha_aggregate_not_above_standard(step_scene, seed, record_property):
    w = step_scene.window(7)
    est = NoisyOracleEstimator(step_scene.trajectory, seed=seed)
    policy = PosePolicy(PARTIAL_INCREMENTAL, 5.5)
    with_err, _ = build_candidates(est, policy, TRI, w, True)
    std_only, _ = build_candidates(est, policy, TRI, w, False)
    obj = Objective(w)
    # shrunken depth so that error-induced reconstructions win part of the image
    st_ = perturbed(w.depth / 1.8, seed)
    a = obj(st_, with_err, 1, want_grad=False).scales[0]
    s = obj(st_, std_only, 1, want_grad=False).scales[0]
    m = s.aggregated.mask
    assert np.all(a.aggregated.mask[m])
    assert np.all(a.aggregated.values[m] <= s.aggregated.values[m])
    won = np.mean(a.winner[m] >= len(std_only))
    assert won > 0
    record_property("detail", f"seed {seed}: error recon wins {won:.1%} of pixels")


# -- 5 and 6 --------------------------------------------------------------------------

ITERS = 10  # per epoch; keeps each full run well under the time budget


@pytest.fixture(scope="module")
def gain_scene():
    return render(SceneSpec(layout="two_plane_step", brightness_gain=1.03))


@pytest.fixture(scope="module")
def runs(gain_scene):
    cache = {}

    def get(name):
        if name not in cache:
            if name == "oracle":
                cfg, est = RunConfig(iterations_per_epoch=ITERS), None
            elif name == "md2":
                cfg, est = RunConfig(warmup_epochs=20, boost_epochs=0, iterations_per_epoch=ITERS, **MD2), None
            else:
                kind, seed = name[:-1], int(name[-1])
                flags = {} if kind == "partial" else dict(incremental_pose=False, partial_incremental=False)
                cfg = RunConfig(iterations_per_epoch=ITERS, **flags)
                est = NoisyOracleEstimator(gain_scene.trajectory, seed=seed)
            start = time.perf_counter()
            depth = run(gain_scene, cfg, estimator=est).depth
            elapsed = time.perf_counter() - start
            cache[name] = (evaluate_depth(depth, gain_scene.frames[7].depth, gain_scene.intrinsics), elapsed)
        return cache[name]

    return get


ACC5 = "full pipeline on the step scene: oracle AbsRel < 0.05, partial beats direct"


@pytest.mark.acceptance(5, ACC5)
def test_oracle_full_abs_rel(runs, record_property):
    report, elapsed = runs("oracle")
    record_property("detail", f"oracle AbsRel {report.abs_rel:.4f} in {elapsed:.0f}s")
    assert report.abs_rel < 0.05
    assert elapsed < 300


@pytest.mark.acceptance(5, ACC5)
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_partial_beats_direct_with_noisy_poses(runs, seed, record_property):
    partial, tp = runs(f"partial{seed}")
    direct, td = runs(f"direct{seed}")
    record_property("detail", f"seed {seed}: partial {partial.abs_rel:.4f} vs direct {direct.abs_rel:.4f}")
    assert partial.abs_rel < direct.abs_rel
    assert tp < 300 and td < 300


@pytest.mark.acceptance(6, "edge completeness of the full pipeline is no worse than the single-pair baseline")
def test_edge_completeness(runs, record_property):
    full, _ = runs("oracle")
    md2, _ = runs("md2")
    record_property("detail", f"Comp full {full.edge_comp:.3f} vs md2 {md2.edge_comp:.3f}")
    assert full.edge_comp <= md2.edge_comp


# -- 7 ------------------------------------------------------------------------------


def brute_nearest(a, b):
    return np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1)).min(axis=1)


def brute_edge_mean(src, dst, cap):
    if not src.any():
        return cap
    if not dst.any():
        return cap
    s = np.argwhere(src).astype(float)
    d = np.argwhere(dst).astype(float)
    return float(np.minimum(brute_nearest(s, d), cap).mean())


@pytest.mark.acceptance(7, "point-cloud and edge metrics match brute force")
def test_pointcloud_brute_force():
    rng = np.random.default_rng(70)
    for _ in range(50):
        a = rng.normal(size=(int(rng.integers(1, 2001)), 3))
        b = rng.normal(size=(int(rng.integers(1, 2001)), 3))
        delta = float(rng.uniform(0.05, 0.5))
        m = pointcloud_metrics(a, b, delta)
        d_ab, d_ba = brute_nearest(a, b), brute_nearest(b, a)
        p, r = np.mean(d_ab < delta), np.mean(d_ba < delta)
        assert m["chamfer"] == pytest.approx(d_ab.mean() + d_ba.mean(), abs=1e-12)
        assert m["precision"] == pytest.approx(p, abs=1e-12) and m["recall"] == pytest.approx(r, abs=1e-12)
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        iou = p * r / (p + r - p * r) if p + r > 0 else 0.0
        assert m["f_score"] == pytest.approx(f, abs=1e-12) and m["iou"] == pytest.approx(iou, abs=1e-12)


@pytest.mark.acceptance(7, "point-cloud and edge metrics match brute force")
def test_edge_distance_brute_force():
    rng = np.random.default_rng(71)
    for _ in range(20):
        pred = rng.random((128, 128)) < rng.uniform(0.001, 0.03)
        gt = rng.random((128, 128)) < rng.uniform(0.001, 0.03)
        acc, comp, _ = edge_metrics(pred, gt, 10.0)
        assert acc == brute_edge_mean(pred, gt, 10.0)
        assert comp == brute_edge_mean(gt, pred, 10.0)


@pytest.mark.acceptance(7, "point-cloud and edge metrics match brute force")
def test_metric_worked_examples():
    m = pointcloud_metrics(np.array([[0.0, 0.0, 0.0]]), np.array([[0.0, 0.0, 0.05], [0.0, 0.0, 0.5]]))
    assert m["chamfer"] == pytest.approx(0.325, abs=1e-12)
    assert m["precision"] == 1 and m["recall"] == 0.5
    assert m["f_score"] == pytest.approx(2 / 3, abs=1e-12) and m["iou"] == pytest.approx(0.5, abs=1e-12)
    a = np.zeros((20, 20), bool)
    a[5, 5] = True
    b = np.zeros_like(a)
    b[5, 8] = True
    assert edge_metrics(b, a)[:2] == (3.0, 3.0)


# -- 8 ------------------------------------------------------------------------------

SMALL = """\
scene.layout = two_plane_step
scene.width = 32
scene.height = 24
scene.frames = 5
run.warmup_epochs = 1
run.boost_epochs = 1
run.boost_start_epoch = 12
run.iterations_per_epoch = 2
pose.kind = noisy_oracle
posesim.max_separation = 3
"""


def _cli(*args):
    proc = subprocess.run([sys.executable, "-m", "boostdepth", *map(str, args)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.mark.acceptance(8, "every CLI command is byte-identical when repeated with the same seed")
def test_cli_repeats_are_byte_identical(tmp_path, record_property):
    cfg = tmp_path / "small.txt"
    cfg.write_text(SMALL)
    outs = {}
    for rep in ("a", "b"):
        d = tmp_path / rep
        _cli("synth", "--config", cfg, "--seed", 5, "--out", d / "scene")
        _cli("optimize", "--config", cfg, "--seed", 5, "--scene", d / "scene", "--out", d / "run", "--dump-errors")
        _cli("eval", "--config", cfg, "--seed", 5, "--pred", d / "run", "--gt", d / "scene", "--out", d / "eval")
        _cli("posesim", "--config", cfg, "--seed", 5, "--out", d / "posesim")
        outs[rep] = d
    for cmd in ("scene", "run", "eval", "posesim"):
        a, b = _tree(outs["a"] / cmd), _tree(outs["b"] / cmd)
        assert a and a == b, cmd
    record_property("detail", f"{sum(len(_tree(outs['a'] / c)) for c in ('scene', 'run', 'eval', 'posesim'))} files compared")


# -- 9 ------------------------------------------------------------------------------

ACC9 = "min-aggregation properties hold over 1000 random examples each"


@st.composite
def error_maps(draw, n_min=1, n_max=6):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(n_min, n_max))
    r = np.random.default_rng(seed)
    shape = (int(r.integers(2, 7)), int(r.integers(2, 7)))
    # coarse values make ties common
    maps = [ErrorMap(r.integers(0, 4, shape) / 4.0, r.random(shape) < 0.8) for _ in range(n)]
    return maps, r


@pytest.mark.acceptance(9, ACC9)
@settings(max_examples=1000)
@given(error_maps())
def test_min_bounded_by_inputs(case):
    maps, _ = case
    agg, winner = min_aggregate(maps)
    for i, m in enumerate(maps):
        assert np.all(agg.values[m.mask] <= m.values[m.mask])
        assert np.all(agg.mask[m.mask])
    assert np.array_equal(agg.mask, np.logical_or.reduce([m.mask for m in maps]))
    assert np.all(winner[~agg.mask] == -1)


@pytest.mark.acceptance(9, ACC9)
@settings(max_examples=1000)
@given(error_maps())
def test_loss_permutation_invariant(case):
    maps, r = case
    perm = [maps[i] for i in r.permutation(len(maps))]
    a, _ = min_aggregate(maps)
    b, _ = min_aggregate(perm)
    assert np.array_equal(a.mask, b.mask)
    assert np.array_equal(a.values[a.mask], b.values[b.mask])
    depth = r.uniform(1, 10, a.values.shape)
    image = r.random(a.values.shape + (3,))
    mu = r.random(a.values.shape) < 0.7
    cfg = LossConfig()
    if not (a.mask & mu).any():
        # nothing left to average: both orders must refuse the same way
        for agg in (a, b):
            with pytest.raises(NumericError):
                total_loss(agg, mu, depth, image, cfg)
        return
    assert total_loss(a, mu, depth, image, cfg) == total_loss(b, mu, depth, image, cfg)


@pytest.mark.acceptance(9, ACC9)
@settings(max_examples=1000)
@given(error_maps(n_min=2, n_max=8))
def test_superset_never_above_subset(case):
    maps, r = case
    k = int(r.integers(1, len(maps)))
    subset = [maps[i] for i in sorted(r.choice(len(maps), k, replace=False))]
    full, _ = min_aggregate(maps)
    sub, _ = min_aggregate(subset)
    assert np.all(full.mask[sub.mask])
    assert np.all(full.values[sub.mask] <= sub.values[sub.mask])
