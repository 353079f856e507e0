"""Single-pair baseline vs the full pipeline on the two-plane step scene.

Takes a minute or two. Pass a number to change iterations per epoch.
"""
import sys
import time

from boostdepth.metrics import evaluate_depth
from boostdepth.optimizer import RunConfig, run
from boostdepth.pose import NoisyOracleEstimator
from boostdepth.synth import SceneSpec, render

iters = int(sys.argv[1]) if len(sys.argv) > 1 else 10
scene = render(SceneSpec(layout="two_plane_step", brightness_gain=1.03))
gt = scene.frames[7].depth

off = dict(curriculum=False, tri_min=False, incremental_pose=False, partial_incremental=False, error_reconstructions=False)
configs = {
    "md2": (RunConfig(warmup_epochs=20, boost_epochs=0, iterations_per_epoch=iters, **off), None),
    "full/oracle": (RunConfig(iterations_per_epoch=iters), None),
    "full/noisy partial": (RunConfig(iterations_per_epoch=iters), NoisyOracleEstimator(scene.trajectory, seed=0)),
    "full/noisy direct": (
        RunConfig(iterations_per_epoch=iters, incremental_pose=False, partial_incremental=False),
        NoisyOracleEstimator(scene.trajectory, seed=0),
    ),
}

for name, (cfg, est) in configs.items():
    t0 = time.perf_counter()
    res = run(scene, cfg, estimator=est)
    r = evaluate_depth(res.depth, gt, scene.intrinsics)
    print(f"{name:20s} AbsRel {r.abs_rel:.4f}  Acc {r.edge_acc:6.3f}  Comp {r.edge_comp:6.3f}  "
          f"F {r.f_score:.3f}  ({time.perf_counter() - t0:.0f}s)")
