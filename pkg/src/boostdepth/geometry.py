"""Pinhole camera model, rigid transforms and inverse warping.

Conventions: right-handed camera frame with +z forward, image u to the right
and v down, pixel centres at integer coordinates. A pose ``P_{t->t'}`` maps
points expressed in the target camera frame into the source camera frame.

Images are ``(H, W, C)`` float arrays, depth maps are ``(H, W)`` float arrays.
Coordinate grids are ``(H, W, 2)`` arrays holding ``(u, v)`` per pixel.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import ConfigError

Z_MIN = 1e-3
BORDER_EPS = 1e-9


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ConfigError(f"focal lengths must be positive, got {self.fx}, {self.fy}")
        if self.width < 2 or self.height < 2:
            raise ConfigError(f"image must be at least 2x2, got {self.width}x{self.height}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ConfigError("principal point must lie inside the image")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def rays(self) -> np.ndarray:
        """Unnormalised viewing rays ``K^-1 [u, v, 1]`` for every pixel, shape (H, W, 3)."""
        v, u = np.mgrid[0 : self.height, 0 : self.width].astype(np.float64)
        x = (u - self.cx) / self.fx
        y = (v - self.cy) / self.fy
        return np.stack([x, y, np.ones_like(x)], axis=-1)

    def pixel_grid(self) -> np.ndarray:
        v, u = np.mgrid[0 : self.height, 0 : self.width].astype(np.float64)
        return np.stack([u, v], axis=-1)


def skew(w: np.ndarray) -> np.ndarray:
    wx, wy, wz = w
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


def rotation_from_axis_angle(w) -> np.ndarray:
    """Rodrigues' formula; ``w`` is the rotation axis scaled by the angle in radians."""
    w = np.asarray(w, dtype=np.float64)
    theta = float(np.linalg.norm(w))
    if theta < 1e-12:
        return np.eye(3) + skew(w)
    k = skew(w / theta)
    return np.eye(3) + np.sin(theta) * k + (1.0 - np.cos(theta)) * (k @ k)


def axis_angle_from_rotation(r: np.ndarray) -> np.ndarray:
    cos = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(cos)
    v = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    if theta < 1e-9:
        return v / 2.0
    if np.pi - theta < 1e-6:
        # near pi the antisymmetric part vanishes; recover the axis from R + I
        m = (r + np.eye(3)) / 2.0
        axis = m[np.argmax(np.diag(m))]
        axis = axis / np.linalg.norm(axis)
        return axis * theta
    return v * theta / (2.0 * np.sin(theta))


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """A proper rigid motion ``x -> R x + t``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
            raise ConfigError("rigid transform has non-finite entries")
        if np.abs(r.T @ r - np.eye(3)).max() > 1e-9 or np.linalg.det(r) < 0:
            raise ConfigError("rotation must be orthonormal with determinant +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, m) -> "RigidTransform":
        m = np.asarray(m, dtype=np.float64)
        return cls(m[:3, :3], m[:3, 3])

    @classmethod
    def from_twist(cls, xi) -> "RigidTransform":
        """Left perturbation ``exp(xi)`` for ``xi = (v, w)``; translation is taken as ``v``."""
        xi = np.asarray(xi, dtype=np.float64)
        return cls(rotation_from_axis_angle(xi[3:]), xi[:3])

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """``self o other``: apply ``other`` first, then ``self``."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    __matmul__ = compose

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return points @ self.rotation.T + self.translation

    def adjoint(self) -> np.ndarray:
        """6x6 adjoint acting on twists ordered ``(v, w)``."""
        ad = np.zeros((6, 6))
        ad[:3, :3] = self.rotation
        ad[:3, 3:] = skew(self.translation) @ self.rotation
        ad[3:, 3:] = self.rotation
        return ad

    def with_translation(self, translation) -> "RigidTransform":
        return RigidTransform(self.rotation, translation)

    def allclose(self, other: "RigidTransform", atol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, atol=atol, rtol=0)
            and np.allclose(self.translation, other.translation, atol=atol, rtol=0)
        )

    def __repr__(self) -> str:
        return f"RigidTransform(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


def as_image(img) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[..., None]
    if img.ndim != 3:
        raise ConfigError(f"expected an (H, W) or (H, W, C) image, got shape {img.shape}")
    return img


@lru_cache(maxsize=16)
def _cached_rays(k: Intrinsics) -> np.ndarray:
    r = k.rays()
    r.setflags(write=False)
    return r


def _check_depth(depth: np.ndarray, k: Intrinsics) -> np.ndarray:
    depth = np.asarray(depth, dtype=np.float64)
    if depth.shape != k.shape:
        raise ConfigError(f"depth shape {depth.shape} does not match intrinsics {k.shape}")
    return depth


@dataclass
class Projection:
    """Result of projecting a target depth map into a source camera."""

    coords: np.ndarray  # (H, W, 2)
    in_front: np.ndarray  # (H, W) bool
    points: np.ndarray  # (H, W, 3) target points expressed in the source frame
    du_dpoint: np.ndarray  # (H, W, 3)
    dv_dpoint: np.ndarray  # (H, W, 3)


def project_full(depth: np.ndarray, pose: RigidTransform, k: Intrinsics, z_min: float = Z_MIN) -> Projection:
    depth = _check_depth(depth, k)
    cam = _cached_rays(k) * depth[..., None]
    pts = cam @ pose.rotation.T + pose.translation
    z = pts[..., 2]
    in_front = z > z_min
    zs = np.where(in_front, z, 1.0)
    inv_z = 1.0 / zs
    u = k.fx * pts[..., 0] * inv_z + k.cx
    v = k.fy * pts[..., 1] * inv_z + k.cy
    coords = np.stack([u, v], axis=-1)
    zero = np.zeros_like(z)
    du = np.stack([k.fx * inv_z, zero, -k.fx * pts[..., 0] * inv_z**2], axis=-1)
    dv = np.stack([zero, k.fy * inv_z, -k.fy * pts[..., 1] * inv_z**2], axis=-1)
    return Projection(coords, in_front, pts, du, dv)


def project(depth: np.ndarray, pose: RigidTransform, k: Intrinsics, z_min: float = Z_MIN):
    """Pixel coordinates of every target pixel seen from the source camera.

    Returns ``(coords, in_front)``; ``in_front`` is False where the transformed
    point has ``z <= z_min``.
    """
    p = project_full(depth, pose, k, z_min)
    return p.coords, p.in_front


@dataclass
class Sample:
    image: np.ndarray  # (H, W, C)
    valid: np.ndarray  # (H, W)
    d_du: np.ndarray  # (H, W, C)
    d_dv: np.ndarray  # (H, W, C)


def sample_bilinear_full(source, coords: np.ndarray) -> Sample:
    src = as_image(source)
    h, w, _ = src.shape
    u = coords[..., 0]
    v = coords[..., 1]
    finite = np.isfinite(u) & np.isfinite(v)
    # tolerate projection roundoff at the border (1e-9 px), nothing more
    valid = finite & (u >= -BORDER_EPS) & (u <= w - 1 + BORDER_EPS) & (v >= -BORDER_EPS) & (v <= h - 1 + BORDER_EPS)
    uc = np.clip(np.where(valid, u, 0.0), 0, w - 1)
    vc = np.clip(np.where(valid, v, 0.0), 0, h - 1)
    # the last row/column uses the cell to its left/top so integer coords stay exact
    x0 = np.minimum(np.floor(uc).astype(np.intp), w - 2)
    y0 = np.minimum(np.floor(vc).astype(np.intp), h - 2)
    ax = (uc - x0)[..., None]
    ay = (vc - y0)[..., None]
    flat = src.reshape(h * w, -1)
    idx = y0 * w + x0
    i00 = flat[idx]
    i01 = flat[idx + 1]
    i10 = flat[idx + w]
    i11 = flat[idx + w + 1]
    dx_top = i01 - i00
    dx_bot = i11 - i10
    top = i00 + ax * dx_top
    bot = i10 + ax * dx_bot
    d_dv = bot - top
    out = top + ay * d_dv
    d_du = dx_top + ay * (dx_bot - dx_top)
    vm = valid[..., None]
    return Sample(np.where(vm, out, 0.0), valid, np.where(vm, d_du, 0.0), np.where(vm, d_dv, 0.0))


def sample_bilinear(source, coords: np.ndarray):
    """Bilinear lookup of ``source`` at real-valued ``(u, v)`` coordinates.

    Returns ``(image, valid)``. Coordinates whose 2x2 neighbourhood leaves the
    image are marked invalid (no clamping) and their output is zero.
    """
    s = sample_bilinear_full(source, np.asarray(coords, dtype=np.float64))
    return s.image, s.valid


def synthesize(target_depth, source, pose: RigidTransform, k: Intrinsics, z_min: float = Z_MIN):
    """Reconstruct the target view from ``source`` by inverse warping.

    Returns ``(image, mask)`` where mask combines the in-front and in-bounds tests.
    """
    coords, in_front = project(target_depth, pose, k, z_min)
    img, valid = sample_bilinear(source, coords)
    mask = valid & in_front
    return np.where(mask[..., None], img, 0.0), mask


def backproject(depth, k: Intrinsics, pose: RigidTransform | None = None, valid=None) -> np.ndarray:
    """One 3D point per valid pixel, shape (N, 3), in the frame given by ``pose``."""
    depth = _check_depth(depth, k)
    ok = np.isfinite(depth) & (depth > 0)
    if valid is not None:
        ok &= np.asarray(valid, dtype=bool)
    pts = k.rays()[ok] * depth[ok][:, None]
    if pose is not None:
        pts = pose.apply(pts)
    return pts
