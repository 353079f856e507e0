"""Depth evaluation: image errors, depth-edge accuracy/completeness and point-cloud scores."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, fields

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .exceptions import ConfigError, DataError

DEPTH_MIN = 1e-3
DEPTH_MAX = 100.0
EDGE_CAP = 10.0
PROSE = "prose"  # acc: predicted edges -> nearest gt edge; comp: gt edges -> nearest predicted edge
LITERAL = "literal"  # the opposite pairing of means and distance maps


@dataclass
class MetricReport:
    abs_rel: float = float("nan")
    sq_rel: float = float("nan")
    rmse: float = float("nan")
    rmse_log: float = float("nan")
    delta1: float = float("nan")
    delta2: float = float("nan")
    delta3: float = float("nan")
    edge_acc: float = float("nan")
    edge_comp: float = float("nan")
    chamfer: float = float("nan")
    precision: float = float("nan")
    recall: float = float("nan")
    f_score: float = float("nan")
    iou: float = float("nan")
    flags: list = field(default_factory=list)

    def update(self, values: dict) -> "MetricReport":
        for k, v in values.items():
            setattr(self, k, float(v))
        return self

    def values(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "flags"}

    @staticmethod
    def mean(reports: list) -> "MetricReport":
        if not reports:
            raise DataError("no reports to average")
        out = MetricReport()
        for name in out.values():
            vals = np.array([r.values()[name] for r in reports])
            vals = vals[np.isfinite(vals)]
            if vals.size:
                setattr(out, name, float(vals.mean()))
        return out


def metric_names() -> list:
    return list(MetricReport().values())


def _clean(x: float):
    return x if np.isfinite(x) else None


def write_reports_json(path, reports: dict, aggregate: MetricReport) -> None:
    """``reports`` maps image names to reports; NaN metrics become ``null``."""
    body = {
        "images": {k: {**{m: _clean(v) for m, v in r.values().items()}, "flags": r.flags} for k, r in reports.items()},
        "mean": {m: _clean(v) for m, v in aggregate.values().items()},
    }
    with open(path, "w") as f:
        json.dump(body, f, indent=2, sort_keys=True)
        f.write("\n")


def write_reports_csv(path, reports: dict, aggregate: MetricReport) -> None:
    names = metric_names()
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["image"] + names + ["flags"])
        for k, r in list(reports.items()) + [("mean", aggregate)]:
            vals = r.values()
            w.writerow([k] + [repr(vals[n]) for n in names] + [";".join(r.flags)])


# -- image metrics ------------------------------------------------------------------


def image_metrics(pred, gt, median_scale: bool = False, valid=None) -> dict:
    """KITTI-style errors over valid ground-truth pixels.

    Both maps are clamped to ``[1e-3, 100]``. With ``median_scale`` the
    prediction is first multiplied by ``median(gt) / median(pred)``.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise DataError(f"prediction {pred.shape} and ground truth {gt.shape} differ in shape")
    ok = np.isfinite(gt) & (gt > 0) & np.isfinite(pred)
    if valid is not None:
        ok &= np.asarray(valid, bool)
    if not ok.any():
        raise DataError("no valid ground-truth pixels")
    p, g = pred[ok], gt[ok]
    if median_scale:
        p = p * (np.median(g) / np.median(p))
    p = np.clip(p, DEPTH_MIN, DEPTH_MAX)
    g = np.clip(g, DEPTH_MIN, DEPTH_MAX)
    thresh = np.maximum(g / p, p / g)
    return {
        "abs_rel": float(np.mean(np.abs(g - p) / g)),
        "sq_rel": float(np.mean((g - p) ** 2 / g)),
        "rmse": float(np.sqrt(np.mean((g - p) ** 2))),
        "rmse_log": float(np.sqrt(np.mean((np.log(g) - np.log(p)) ** 2))),
        "delta1": float(np.mean(thresh < 1.25)),
        "delta2": float(np.mean(thresh < 1.25**2)),
        "delta3": float(np.mean(thresh < 1.25**3)),
    }


# -- depth edges --------------------------------------------------------------------


def _non_maximum_suppression(mag, gx, gy):
    """Keep pixels that are maxima along the quantised gradient direction.

    A pixel survives if it is strictly greater than the neighbour ahead and at
    least as large as the one behind, so plateaus two pixels wide keep exactly
    one pixel.
    """
    h, w = mag.shape
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = np.digitize(angle, [22.5, 67.5, 112.5, 157.5]) % 4  # 0: x, 1: diag, 2: y, 3: anti-diag
    offsets = [(0, 1), (1, 1), (1, 0), (1, -1)]
    padded = np.pad(mag, 1)
    keep = np.zeros((h, w), bool)
    rows, cols = np.mgrid[0:h, 0:w]
    for s, (dy, dx) in enumerate(offsets):
        sel = sector == s
        ahead = padded[rows + 1 + dy, cols + 1 + dx]
        behind = padded[rows + 1 - dy, cols + 1 - dx]
        keep |= sel & (mag > ahead) & (mag >= behind)
    return keep


def extract_edges(depth, low: float = 0.05, high: float = 0.15) -> np.ndarray:
    """Binary depth-boundary map from the gradient of log-depth.

    Central-difference gradient magnitude of ``log(depth)``, thinned by
    non-maximum suppression, then hysteresis: weak pixels (>= ``low``) are kept
    when 8-connected to a strong one (>= ``high``).
    """
    if not 0 < low <= high:
        raise ConfigError(f"need 0 < low <= high, got {low}, {high}")
    d = np.clip(np.asarray(depth, dtype=np.float64), DEPTH_MIN, DEPTH_MAX)
    z = np.log(d)
    gy, gx = np.gradient(z)
    mag = np.hypot(gx, gy)
    thin = _non_maximum_suppression(mag, gx, gy) & (mag >= low)
    labels, n = ndimage.label(thin, structure=np.ones((3, 3), bool))
    if n == 0:
        return thin
    strong = np.zeros(n + 1, bool)
    strong[np.unique(labels[thin & (mag >= high)])] = True
    strong[0] = False
    return strong[labels]


def _mean_distance(src: np.ndarray, dst: np.ndarray, cap: float):
    """Mean over ``src`` pixels of the capped distance to the nearest ``dst`` pixel."""
    if not src.any():
        return cap, True
    if not dst.any():
        return cap, False
    dist = ndimage.distance_transform_edt(~dst)
    return float(np.minimum(dist[src], cap).mean()), False


def edge_metrics(pred_edges, gt_edges, cap: float = EDGE_CAP, orientation: str = PROSE):
    """Edge accuracy and completeness in pixels.

    Under the default orientation, accuracy averages over predicted edge pixels
    the distance to the nearest ground-truth edge and completeness averages over
    ground-truth edges the distance to the nearest prediction. Distances are
    capped at ``cap``; an empty averaging set reports ``cap``. Returns
    ``(acc, comp, flags)``.
    """
    pred = np.asarray(pred_edges, bool)
    gt = np.asarray(gt_edges, bool)
    if pred.shape != gt.shape:
        raise DataError(f"edge maps differ in shape: {pred.shape} vs {gt.shape}")
    if orientation == PROSE:
        acc, e_acc = _mean_distance(pred, gt, cap)
        comp, e_comp = _mean_distance(gt, pred, cap)
    elif orientation == LITERAL:
        acc, e_acc = _mean_distance(gt, pred, cap)
        comp, e_comp = _mean_distance(pred, gt, cap)
    else:
        raise ConfigError(f"unknown edge orientation {orientation!r}")
    flags = []
    if e_acc:
        flags.append("edge_acc_empty")
    if e_comp:
        flags.append("edge_comp_empty")
    if not pred.any() or not gt.any():
        flags.append("edge_set_empty")
    return acc, comp, flags


# -- point clouds -------------------------------------------------------------------


def pointcloud_metrics(pred, gt, delta: float = 0.1) -> dict:
    """Chamfer distance, precision/recall at ``delta``, F-score and IoU."""
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 3)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 3)
    if len(pred) == 0 or len(gt) == 0:
        raise DataError("point clouds must be non-empty")
    if not delta > 0:
        raise ConfigError("delta must be positive")
    d_pg = cKDTree(gt).query(pred)[0]
    d_gp = cKDTree(pred).query(gt)[0]
    precision = float(np.mean(d_pg < delta))
    recall = float(np.mean(d_gp < delta))
    pr = precision + recall
    f = 2 * precision * recall / pr if pr > 0 else 0.0
    union = pr - precision * recall
    iou = precision * recall / union if union > 0 else 0.0
    return {
        "chamfer": float(d_pg.mean() + d_gp.mean()),
        "precision": precision,
        "recall": recall,
        "f_score": f,
        "iou": iou,
    }


def evaluate_depth(
    pred, gt, k=None, median_scale: bool = False, low=0.05, high=0.15, delta=0.1, orientation=PROSE, cap=EDGE_CAP
) -> MetricReport:
    """Full battery for one depth map; point-cloud metrics need intrinsics ``k``."""
    from .geometry import backproject

    report = MetricReport().update(image_metrics(pred, gt, median_scale))
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if median_scale:
        ok = np.isfinite(gt) & (gt > 0)
        pred = pred * (np.median(gt[ok]) / np.median(pred[ok]))
    acc, comp, flags = edge_metrics(extract_edges(pred, low, high), extract_edges(gt, low, high), cap, orientation)
    report.update({"edge_acc": acc, "edge_comp": comp})
    report.flags = flags
    if k is not None:
        clip = lambda d: np.clip(d, DEPTH_MIN, DEPTH_MAX)
        report.update(pointcloud_metrics(backproject(clip(pred), k), backproject(clip(gt), k), delta))
    return report


__all__ = [
    "MetricReport",
    "image_metrics",
    "extract_edges",
    "edge_metrics",
    "pointcloud_metrics",
    "evaluate_depth",
    "write_reports_json",
    "write_reports_csv",
    "PROSE",
    "LITERAL",
]

