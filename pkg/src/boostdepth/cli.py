"""Command-line entry point: ``boostdepth {synth,optimize,eval,posesim}``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config, write_config
from .exceptions import BoostDepthError, ConfigError, DataError
from .io import read_pfm, write_pfm
from .metrics import MetricReport, evaluate_depth, write_reports_csv, write_reports_json
from .optimizer import DepthOptimizer, DepthState, write_log
from .pose import NoisyOracleEstimator, OptimizedEstimator, OracleEstimator, simulate_drift, write_drift_csv
from .synth import MANIFEST, load_scene, render, save_scene, trajectory_for

log = logging.getLogger("boostdepth")


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc
    return out


def make_estimator(cfg: ExperimentConfig, trajectory):
    p = cfg.pose
    if p.kind == "oracle":
        return OracleEstimator(trajectory)
    noisy = NoisyOracleEstimator(trajectory, p.drift(), cfg.seed)
    if p.kind == "noisy_oracle":
        return noisy
    return OptimizedEstimator(noisy if p.base == "noisy_oracle" else OracleEstimator(trajectory))


def cmd_synth(cfg: ExperimentConfig, out_dir) -> Path:
    out = _out_dir(out_dir)
    scene = render(cfg.scene_spec())
    save_scene(scene, out)
    write_config(cfg, out)
    log.info("wrote %d frames to %s", len(scene.frames), out)
    return out


def _load_resume(resume_dir, targets, n_levels) -> dict:
    states = {}
    for t in targets:
        path = Path(resume_dir) / f"logdepth_{t:03d}.pfm"
        if not path.exists():
            raise DataError(f"resume directory lacks {path.name}")
        states[t] = DepthState.from_log_depth(read_pfm(path), n_levels)
    return states


def cmd_optimize(cfg: ExperimentConfig, scene_dir, out_dir, threads: int = 1, resume=None) -> Path:
    scene = load_scene(scene_dir)
    out = _out_dir(out_dir)
    run_cfg = cfg.run
    if not run_cfg.targets:
        run_cfg = replace(run_cfg, targets=(len(scene.frames) // 2,))
    init = None
    if resume is not None:
        init = _load_resume(resume, run_cfg.targets, max(run_cfg.warmup_scales, run_cfg.boost_scales))
    elif run_cfg.warmup_epochs == 0 and run_cfg.boost_epochs > 0:
        log.warning("boost-only run without --resume starts from a constant depth")
    est = make_estimator(cfg, scene.trajectory)
    opt = DepthOptimizer(scene, run_cfg, cfg.loss, est, cfg.schedule, threads=threads, init_states=init)
    result = opt.run(snapshot_every_epoch=cfg.output.snapshots, keep_errors=cfg.output.dump_errors)
    write_config(cfg, out)
    write_log(out / "train_log.csv", result.log)
    for t, depth in result.depths.items():
        write_pfm(out / f"depth_{t:03d}.pfm", depth)
        write_pfm(out / f"logdepth_{t:03d}.pfm", result.states[t].log_depth())
    if cfg.output.snapshots:
        snap = _out_dir(out / "snapshots")
        for epoch, maps in result.snapshots.items():
            for t, depth in maps.items():
                write_pfm(snap / f"epoch_{epoch:02d}_depth_{t:03d}.pfm", depth)
    if cfg.output.dump_errors:
        err = _out_dir(out / "errors")
        for epoch, maps in result.errors.items():
            for t, em in maps.items():
                write_pfm(err / f"epoch_{epoch:02d}_error_{t:03d}.pfm", np.where(em.mask, em.values, np.nan))
    log.info("optimised %d target(s); final loss %.6f", len(result.depths), result.log[-1]["loss"] if result.log else float("nan"))
    return out


def _depth_files(d: Path) -> dict:
    return {p.name: p for p in sorted(d.glob("depth_*.pfm"))}


def cmd_eval(cfg: ExperimentConfig, pred_dir, gt_dir, out_dir) -> MetricReport:
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    preds = _depth_files(pred_dir)
    gts = _depth_files(gt_dir)
    if not preds:
        raise DataError(f"{pred_dir}: no depth_*.pfm files")
    missing = sorted(set(preds) - set(gts))
    if missing:
        raise DataError(f"{gt_dir}: no ground truth for {', '.join(missing)}")
    k = None
    m = cfg.metrics
    if m.pointcloud:
        if (gt_dir / MANIFEST).exists():
            k = load_scene(gt_dir).intrinsics
        else:
            log.warning("%s has no manifest; point-cloud metrics skipped", gt_dir)
    out = _out_dir(out_dir)
    reports = {}
    for name, path in preds.items():
        pred, gt = read_pfm(path), read_pfm(gts[name])
        if pred.shape != gt.shape:
            raise DataError(f"{name}: prediction {pred.shape} vs ground truth {gt.shape}")
        reports[name] = evaluate_depth(
            pred, gt, k, m.median_scale, m.edge_low, m.edge_high, m.delta, m.edge_orientation, m.edge_cap
        )
    agg = MetricReport.mean(list(reports.values()))
    write_reports_json(out / "metrics.json", reports, agg)
    write_reports_csv(out / "metrics.csv", reports, agg)
    write_config(cfg, out)
    return agg


def cmd_posesim(cfg: ExperimentConfig, out_dir) -> Path:
    out = _out_dir(out_dir)
    spec = cfg.scene_spec()
    traj = trajectory_for(spec)
    est = NoisyOracleEstimator(traj, cfg.pose.drift(), cfg.seed)
    rows = simulate_drift(est, traj, cfg.posesim.max_separation)
    write_drift_csv(out / "drift.csv", rows)
    write_config(cfg, out)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="plain-text 'section.key = value' file")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("--preset", choices=["md2", "warmup", "full", "pre"])
    common.add_argument("--threads", type=int, default=1, help="worker threads for per-source reconstruction")
    common.add_argument("--dump-errors", action="store_true", help="write per-epoch aggregated error maps")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="boostdepth", description="Wide-baseline photometric depth optimisation on synthetic scenes.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", parents=[common], help="render a synthetic scene to disk")
    opt = sub.add_parser("optimize", parents=[common], help="optimise depth for a scene directory")
    opt.add_argument("--scene", required=True, help="scene directory written by 'synth'")
    opt.add_argument("--resume", help="output directory of an earlier run to start from")
    ev = sub.add_parser("eval", parents=[common], help="score predicted depth maps against ground truth")
    ev.add_argument("--pred", required=True, help="directory of predicted depth_*.pfm")
    ev.add_argument("--gt", required=True, help="directory of ground-truth depth_*.pfm (a scene directory)")
    ev.add_argument("--median-scale", action="store_true", help="rescale predictions by the median ratio")
    sub.add_parser("posesim", parents=[common], help="direct vs incremental pose drift table")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.config, args.preset, args.seed)
        if args.dump_errors:
            cfg = replace(cfg, output=replace(cfg.output, dump_errors=True))
        if args.command == "synth":
            cmd_synth(cfg, args.out)
        elif args.command == "optimize":
            if args.preset == "pre" and not args.resume:
                raise ConfigError("--preset pre needs --resume DIR with saved log-depth")
            cmd_optimize(cfg, args.scene, args.out, args.threads, args.resume)
        elif args.command == "eval":
            if args.median_scale:
                cfg = replace(cfg, metrics=replace(cfg.metrics, median_scale=True))
            cmd_eval(cfg, args.pred, args.gt, args.out)
        else:
            cmd_posesim(cfg, args.out)
    except BoostDepthError as exc:
        print(f"boostdepth: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"boostdepth: error: {exc}", file=sys.stderr)
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
