"""Photometric reconstruction error, minimum aggregation, automasking and smoothness.

The per-pixel error combines a 3x3 SSIM term with an L1 term,

    pe(a, b) = w/2 * (1 - SSIM(a, b)) + (1 - w) * |a - b|,

evaluated per channel and averaged over channels. Functions with a ``_grad``
suffix additionally return the pieces needed for backpropagation to the
second image argument (the reconstruction).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .exceptions import ConfigError, NumericError
from .geometry import as_image

C1 = 0.01**2
C2 = 0.03**2


@dataclass(frozen=True)
class LossConfig:
    ssim_weight: float = 0.85
    smoothness_lambda: float = 0.001
    automask_enabled: bool = True

    def __post_init__(self):
        if not 0.0 <= self.ssim_weight <= 1.0:
            raise ConfigError(f"ssim_weight must be in [0, 1], got {self.ssim_weight}")
        if self.smoothness_lambda < 0:
            raise ConfigError("smoothness_lambda must be non-negative")


@dataclass
class ErrorMap:
    values: np.ndarray
    mask: np.ndarray

    def masked_mean(self) -> float:
        if not self.mask.any():
            raise NumericError("error map has no valid pixels")
        return float(self.values[self.mask].mean())


def _box1(x: np.ndarray, axis: int) -> np.ndarray:
    x = np.moveaxis(x, axis, 0)
    p = np.concatenate([x[1:2], x, x[-2:-1]])  # reflect: the edge sample is not repeated
    return np.moveaxis((p[:-2] + p[1:-1] + p[2:]) / 3.0, 0, axis)


def _box1_adjoint(g: np.ndarray, axis: int) -> np.ndarray:
    g = np.moveaxis(g, axis, 0)
    n = g.shape[0]
    gp = np.zeros((n + 2,) + g.shape[1:])
    gp[0:n] += g
    gp[1 : n + 1] += g
    gp[2 : n + 2] += g
    out = gp[1 : n + 1].copy()
    out[1] += gp[0]
    out[n - 2] += gp[n + 1]
    return np.moveaxis(out / 3.0, 0, axis)


def box3(x: np.ndarray) -> np.ndarray:
    """3x3 mean filter over the first two axes with reflect padding."""
    return _box1(_box1(x, 0), 1)


def box3_adjoint(g: np.ndarray) -> np.ndarray:
    return _box1_adjoint(_box1_adjoint(g, 1), 0)


def _check_pair(a, b):
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise ConfigError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def ssim(a, b) -> np.ndarray:
    """Local SSIM over 3x3 windows; returns an array shaped like the inputs."""
    shape = np.shape(a)
    a, b = _check_pair(a, b)
    s = _ssim_parts(a, b)[0]
    return s.reshape(shape) if len(shape) == 2 else s


def _ssim_parts(x, y):
    c = x.shape[2]
    m = box3(np.concatenate([x, y, x * x, y * y, x * y], axis=2))
    mu_x, mu_y = m[..., :c], m[..., c : 2 * c]
    sxx = m[..., 2 * c : 3 * c] - mu_x**2
    syy = m[..., 3 * c : 4 * c] - mu_y**2
    sxy = m[..., 4 * c :] - mu_x * mu_y
    a1 = 2 * mu_x * mu_y + C1
    a2 = 2 * sxy + C2
    b1 = mu_x**2 + mu_y**2 + C1
    b2 = sxx + syy + C2
    s = a1 * a2 / (b1 * b2)
    return s, (mu_x, mu_y, a1, a2, b1, b2)


def _window_valid(mask) -> np.ndarray:
    if mask is None:
        return None
    return ndimage.binary_erosion(mask, structure=np.ones((3, 3), bool), border_value=1)


@dataclass
class _PECache:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    parts: tuple
    weight: float


def photometric_error_grad(a, b, cfg: LossConfig = LossConfig(), mask=None):
    """Like :func:`photometric_error` but also returns a cache for :func:`photometric_backward`."""
    x, y = _check_pair(a, b)
    w = cfg.ssim_weight
    s, parts = _ssim_parts(x, y)
    pe = (0.5 * w * (1.0 - s) + (1.0 - w) * np.abs(x - y)).mean(axis=2)
    valid = np.ones(pe.shape, bool) if mask is None else _window_valid(mask)
    return ErrorMap(pe, valid), _PECache(x, y, s, parts, w)


def photometric_backward(cache: _PECache, g: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. the second image given ``g = dL/dpe`` of shape (H, W)."""
    x, y, s, w = cache.x, cache.y, cache.s, cache.weight
    mu_x, mu_y, a1, a2, b1, b2 = cache.parts
    gc = (g / x.shape[2])[..., None] * np.ones_like(x)
    gs = -0.5 * w * gc
    den = b1 * b2
    ds_dmu = (2 * mu_x * (a2 - a1) - 2 * mu_y * s * (b2 - b1)) / den
    ds_dyy = -s / b2
    ds_dxy = 2 * a1 / den
    grad = box3_adjoint(gs * ds_dmu) + 2 * y * box3_adjoint(gs * ds_dyy) + x * box3_adjoint(gs * ds_dxy)
    grad += gc * (1.0 - w) * np.sign(y - x)
    return grad


def photometric_error(a, b, cfg: LossConfig = LossConfig(), mask=None) -> ErrorMap:
    """Per-pixel photometric error between ``a`` and ``b``.

    ``mask`` marks valid pixels of ``b``; a pixel is valid in the result only if
    its whole 3x3 SSIM window is valid.
    """
    return photometric_error_grad(a, b, cfg, mask)[0]


def min_aggregate(errors: Sequence[ErrorMap]):
    """Per-pixel minimum over candidate error maps.

    Returns ``(ErrorMap, winner)``. Invalid entries never win; a pixel is
    invalid only when every candidate is invalid (winner is -1 there). Ties go
    to the earliest candidate.
    """
    if len(errors) == 0:
        raise ConfigError("min_aggregate needs at least one error map")
    shape = errors[0].values.shape
    for e in errors:
        if e.values.shape != shape or e.mask.shape != shape:
            raise ConfigError("error maps must share a shape")
    stack = np.stack([np.where(e.mask, e.values, np.inf) for e in errors])
    winner = np.argmin(stack, axis=0)
    best = np.take_along_axis(stack, winner[None], axis=0)[0]
    valid = np.isfinite(best)
    winner = np.where(valid, winner, -1)
    return ErrorMap(np.where(valid, best, 0.0), valid), winner


def automask(target, sources, reconstructions, cfg: LossConfig = LossConfig(), recon_masks=None) -> np.ndarray:
    """Pixels where some reconstruction beats every unwarped source."""
    target = as_image(target)
    if not cfg.automask_enabled:
        return np.ones(target.shape[:2], bool)
    ident = min_aggregate([photometric_error(target, s, cfg) for s in sources])[0]
    if recon_masks is None:
        recon_masks = [None] * len(reconstructions)
    recon = min_aggregate(
        [photometric_error(target, r, cfg, m) for r, m in zip(reconstructions, recon_masks)]
    )[0]
    return automask_from_errors(ident, recon)


def automask_from_errors(identity: ErrorMap, recon: ErrorMap) -> np.ndarray:
    return recon.mask & (recon.values < np.where(identity.mask, identity.values, np.inf))


def _image_edge_weights(image):
    img = as_image(image)
    wx = np.exp(-np.abs(img[:, :-1] - img[:, 1:]).mean(axis=2))
    wy = np.exp(-np.abs(img[:-1] - img[1:]).mean(axis=2))
    return wx, wy


def smoothness_grad(depth, image, valid=None):
    """Edge-aware smoothness on mean-normalised inverse depth and its gradient w.r.t. depth."""
    d = np.asarray(depth, dtype=np.float64)
    img = as_image(image)
    if img.shape[:2] != d.shape:
        raise ConfigError(f"depth {d.shape} and image {img.shape[:2]} differ in shape")
    ok = np.ones(d.shape, bool) if valid is None else (np.asarray(valid, bool) & (d > 0))
    if not ok.any():
        raise NumericError("smoothness undefined: no valid depth")
    inv = np.where(ok, 1.0 / np.where(ok, d, 1.0), 0.0)
    n_ok = ok.sum()
    m = inv.sum() / n_ok
    if not m > 0:
        raise NumericError("smoothness undefined: zero mean inverse depth")
    nd = inv / m
    wx, wy = _image_edge_weights(img)
    okx = ok[:, :-1] & ok[:, 1:]
    oky = ok[:-1] & ok[1:]
    dx = nd[:, :-1] - nd[:, 1:]
    dy = nd[:-1] - nd[1:]
    cx = max(okx.sum(), 1)
    cy = max(oky.sum(), 1)
    value = float((np.abs(dx) * wx)[okx].sum() / cx + (np.abs(dy) * wy)[oky].sum() / cy)

    gx = np.where(okx, np.sign(dx) * wx / cx, 0.0)
    gy = np.where(oky, np.sign(dy) * wy / cy, 0.0)
    g_nd = np.zeros_like(nd)
    g_nd[:, :-1] += gx
    g_nd[:, 1:] -= gx
    g_nd[:-1] += gy
    g_nd[1:] -= gy
    g_inv = np.where(ok, g_nd / m - (g_nd * inv).sum() / (m * m * n_ok), 0.0)
    g_depth = np.where(ok, -g_inv * inv * inv, 0.0)
    return value, g_depth


def smoothness_loss(depth, image, valid=None) -> float:
    """Mean of ``|grad d*| * exp(-|grad I|)`` over x and y, with ``d* = (1/d) / mean(1/d)``."""
    return smoothness_grad(depth, image, valid)[0]


def total_loss(per_pixel: ErrorMap, mask, depth, image, cfg: LossConfig = LossConfig()) -> float:
    """Masked mean photometric error plus ``lambda`` times the smoothness term."""
    keep = per_pixel.mask & np.asarray(mask, bool)
    if not keep.any():
        raise NumericError("no valid pixels after masking")
    photo = float(per_pixel.values[keep].mean())
    if cfg.smoothness_lambda == 0:
        return photo
    return photo + cfg.smoothness_lambda * smoothness_loss(depth, image)
