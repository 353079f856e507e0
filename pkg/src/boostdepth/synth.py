"""Procedural test scenes with exact ground truth.

Scenes are built from textured planes and rendered by nearest-hit ray casting,
so depth, poses and occlusions are known analytically. Scene units are the
baseline units of the curriculum: the stereo rig is ``stereo_baseline`` units
wide and ``meters_per_unit`` converts to metres for reporting.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .curriculum import STEREO
from .exceptions import ConfigError, DataError
from .geometry import Intrinsics, RigidTransform, as_image, rotation_from_axis_angle
from .io import read_pfm, write_pfm, write_ppm
from .pose import relative_pose, stereo_rig_pose

LAYOUTS = ("textured_plane", "two_plane_step", "ramp_plus_occluder")


@dataclass(frozen=True)
class SceneSpec:
    layout: str = "textured_plane"
    width: int = 96
    height: int = 64
    focal_ratio: float = 0.8  # focal length as a fraction of the image width
    channels: int = 3
    frames: int = 15
    reference_frame: int = -1  # -1: the middle frame sits at the world origin
    translation: tuple = (0.1, 0.0, 0.0)  # per-frame camera motion, camera frame
    yaw_rate_deg: float = 0.0
    stereo_baseline: float = 0.1
    meters_per_unit: float = 5.4
    brightness_gain: float = 1.0
    brightness_bias: float = 0.0
    texture_octaves: int = 4
    texture_cell: float = 1.0  # size of the coarsest noise cell, scene units
    texture_contrast: float = 1.4
    seed: int = 0
    plane_depth: float = 8.0
    near_depth: float = 4.0
    far_depth: float = 9.0
    near_rect: tuple = (-1.0, 0.6, -0.6, 0.5)  # x0, x1, y0, y1 on the near plane
    ramp_depth: float = 8.0
    ramp_slope: float = -0.6  # dz/dy of the ramp surface
    occluder_depth: float = 3.0
    occluder_rect: tuple = (-0.3, 0.1, -0.4, 0.3)

    def __post_init__(self):
        if self.layout not in LAYOUTS:
            raise ConfigError(f"unknown layout {self.layout!r}; choose from {LAYOUTS}")
        if self.frames < 1:
            raise ConfigError("a scene needs at least one frame")
        if self.channels not in (1, 3):
            raise ConfigError("channels must be 1 or 3")
        if len(self.translation) != 3:
            raise ConfigError("translation must have three components")
        if not (0 < self.brightness_gain <= 2):
            raise ConfigError("brightness_gain must be in (0, 2]")
        if not (-0.5 <= self.brightness_bias <= 0.5):
            raise ConfigError("brightness_bias must be in [-0.5, 0.5]")
        if min(self.plane_depth, self.near_depth, self.far_depth, self.ramp_depth, self.occluder_depth) <= 0:
            raise ConfigError("plane depths must be positive")
        if self.layout == "two_plane_step" and not self.near_depth < self.far_depth:
            raise ConfigError("near plane must be in front of the far plane")

    @property
    def reference(self) -> int:
        return self.frames // 2 if self.reference_frame < 0 else self.reference_frame

    def intrinsics(self) -> Intrinsics:
        f = self.focal_ratio * self.width
        return Intrinsics(f, f, (self.width - 1) / 2.0, (self.height - 1) / 2.0, self.width, self.height)


@dataclass
class Frame:
    image: np.ndarray
    depth: np.ndarray
    pose: RigidTransform  # camera-to-world


@dataclass
class FrameWindow:
    """A target frame with its neighbours keyed by relative offset (and ``"s"``)."""

    target: int
    intrinsics: Intrinsics
    frames: dict
    stereo_pose: RigidTransform | None = None

    @property
    def image(self) -> np.ndarray:
        return self.frames[0].image

    @property
    def depth(self) -> np.ndarray:
        return self.frames[0].depth

    @property
    def available(self) -> set:
        return {k for k in self.frames if k != 0}

    def gt_pose(self, source) -> RigidTransform:
        """Ground-truth ``P_{t->source}``."""
        if source == STEREO:
            return self.stereo_pose
        return self.frames[source].pose.inverse().compose(self.frames[0].pose)


@dataclass
class Scene:
    spec: SceneSpec
    intrinsics: Intrinsics
    frames: list
    stereo: list = field(default_factory=list)
    stereo_pose: RigidTransform | None = None

    @property
    def trajectory(self) -> list:
        return [f.pose for f in self.frames]

    @property
    def baseline(self) -> float:
        """Ground-truth per-frame baseline (mean one-step translation norm)."""
        if len(self.frames) < 2:
            return float(np.linalg.norm(self.spec.translation))
        traj = self.trajectory
        steps = [np.linalg.norm(relative_pose(traj, i, i + 1).translation) for i in range(len(traj) - 1)]
        return float(np.mean(steps))

    def window(self, t: int, max_offset: int | None = None) -> FrameWindow:
        if not 0 <= t < len(self.frames):
            raise ConfigError(f"target {t} outside the sequence")
        frames = {}
        for i, f in enumerate(self.frames):
            k = i - t
            if max_offset is None or abs(k) <= max_offset:
                frames[k] = f
        if self.stereo:
            frames[STEREO] = self.stereo[t]
        return FrameWindow(t, self.intrinsics, frames, self.stereo_pose)

    def windows(self) -> list:
        return [self.window(t) for t in range(len(self.frames))]


def perturb_brightness(image, k: int, gain: float, bias: float) -> np.ndarray:
    """``clip(gain**|k| * image + bias * |k|, 0, 1)``."""
    k = abs(int(k))
    return np.clip(gain**k * np.asarray(image, dtype=np.float64) + bias * k, 0.0, 1.0)


class _Texture:
    """Multi-octave periodic value noise with smoothstep interpolation."""

    size = 64

    def __init__(self, seed: int, octaves: int, cell: float, contrast: float):
        rng = np.random.default_rng(seed)
        self.lattices = [rng.random((self.size, self.size)) for _ in range(octaves)]
        self.cells = [cell / 2**o for o in range(octaves)]
        self.amps = [0.5**o for o in range(octaves)]
        self.contrast = contrast

    def __call__(self, s1, s2):
        total = np.zeros_like(s1)
        for lat, cell, amp in zip(self.lattices, self.cells, self.amps):
            x = s1 / cell
            y = s2 / cell
            x0 = np.floor(x)
            y0 = np.floor(y)
            fx = x - x0
            fy = y - y0
            fx = fx * fx * (3 - 2 * fx)
            fy = fy * fy * (3 - 2 * fy)
            i0 = x0.astype(np.int64) % self.size
            j0 = y0.astype(np.int64) % self.size
            i1 = (i0 + 1) % self.size
            j1 = (j0 + 1) % self.size
            top = lat[j0, i0] + fx * (lat[j0, i1] - lat[j0, i0])
            bot = lat[j1, i0] + fx * (lat[j1, i1] - lat[j1, i0])
            total += amp * (top + fy * (bot - top))
        value = total / sum(self.amps)
        return np.clip(0.5 + self.contrast * (value - 0.5), 0.0, 1.0)


@dataclass
class _Plane:
    origin: np.ndarray
    normal: np.ndarray
    axis1: np.ndarray
    axis2: np.ndarray
    bounds: tuple | None  # (s1_min, s1_max, s2_min, s2_max) in plane coordinates
    textures: list


def _frontal(depth, bounds, textures) -> _Plane:
    return _Plane(np.array([0.0, 0.0, depth]), np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), bounds, textures)


def _planes(spec: SceneSpec) -> list:
    def tex(i):
        return [
            _Texture(spec.seed * 1000 + 10 * i + c, spec.texture_octaves, spec.texture_cell, spec.texture_contrast)
            for c in range(spec.channels)
        ]

    if spec.layout == "textured_plane":
        return [_frontal(spec.plane_depth, None, tex(0))]
    if spec.layout == "two_plane_step":
        return [_frontal(spec.far_depth, None, tex(0)), _frontal(spec.near_depth, tuple(spec.near_rect), tex(1))]
    # ramp: z = ramp_depth + ramp_slope * y
    n = np.array([0.0, -spec.ramp_slope, 1.0])
    n /= np.linalg.norm(n)
    a2 = np.array([0.0, 1.0, spec.ramp_slope])
    a2 /= np.linalg.norm(a2)
    ramp = _Plane(np.array([0.0, 0.0, spec.ramp_depth]), n, np.array([1.0, 0.0, 0.0]), a2, None, tex(0))
    return [ramp, _frontal(spec.occluder_depth, tuple(spec.occluder_rect), tex(1))]


def trajectory_for(spec: SceneSpec) -> list:
    """Camera-to-world poses: constant body-frame step and constant yaw rate."""
    ref = spec.reference
    step = np.asarray(spec.translation, dtype=np.float64)
    yaw = np.deg2rad(spec.yaw_rate_deg)
    poses = {ref: RigidTransform.identity()}
    for i in range(ref + 1, spec.frames):
        prev = poses[i - 1]
        rot = prev.rotation @ rotation_from_axis_angle([0.0, yaw, 0.0])
        poses[i] = RigidTransform(rot, prev.translation + prev.rotation @ step)
    for i in range(ref - 1, -1, -1):
        nxt = poses[i + 1]
        rot = nxt.rotation @ rotation_from_axis_angle([0.0, -yaw, 0.0])
        poses[i] = RigidTransform(rot, nxt.translation - rot @ step)
    return [poses[i] for i in range(spec.frames)]


def ray_cast(spec: SceneSpec, pose: RigidTransform, k: Intrinsics | None = None):
    """Render ``(image, depth)`` for a camera with camera-to-world ``pose`` (no brightness model)."""
    k = k or spec.intrinsics()
    rays = k.rays()
    dirs = rays @ pose.rotation.T
    centre = pose.translation
    best = np.full(k.shape, np.inf)
    image = np.zeros(k.shape + (spec.channels,))
    for plane in _planes(spec):
        denom = dirs @ plane.normal
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = ((plane.origin - centre) @ plane.normal) / denom
        hit = centre + lam[..., None] * dirs
        rel = hit - plane.origin
        s1 = rel @ plane.axis1
        s2 = rel @ plane.axis2
        ok = np.isfinite(lam) & (lam > 0)
        if plane.bounds is not None:
            b = plane.bounds
            ok &= (s1 >= b[0]) & (s1 <= b[1]) & (s2 >= b[2]) & (s2 <= b[3])
        closer = ok & (lam < best)
        if not closer.any():
            continue
        best = np.where(closer, lam, best)
        for c, tex in enumerate(plane.textures):
            image[..., c] = np.where(closer, tex(np.where(closer, s1, 0.0), np.where(closer, s2, 0.0)), image[..., c])
    if not np.isfinite(best).all():
        raise ConfigError("scene leaves some pixels without a surface")
    return image, best


def render(spec: SceneSpec) -> Scene:
    """Render every frame, its stereo partner and ground-truth depth."""
    k = spec.intrinsics()
    traj = trajectory_for(spec)
    rig = stereo_rig_pose(spec.stereo_baseline)
    frames, stereo = [], []
    for i, pose in enumerate(traj):
        sep = i - spec.reference
        img, depth = ray_cast(spec, pose, k)
        frames.append(Frame(perturb_brightness(img, sep, spec.brightness_gain, spec.brightness_bias), depth, pose))
        right = pose.compose(rig.inverse())
        simg, sdepth = ray_cast(spec, right, k)
        stereo.append(Frame(perturb_brightness(simg, sep, spec.brightness_gain, spec.brightness_bias), sdepth, right))
    return Scene(spec, k, frames, stereo, rig)


# -- on-disk format -----------------------------------------------------------------

MANIFEST = "manifest.txt"


def _pose_numbers(p: RigidTransform) -> str:
    return " ".join(repr(float(v)) for v in p.matrix()[:3].ravel())


def _spec_lines(spec: SceneSpec) -> list:
    out = []
    for f in fields(spec):
        v = getattr(spec, f.name)
        if isinstance(v, tuple):
            v = ", ".join(repr(float(x)) for x in v)
        out.append(f"spec.{f.name} = {v}")
    return out


def save_scene(scene: Scene, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    k = scene.intrinsics
    lines = [
        "# boostdepth scene v1",
        f"intrinsics = {k.fx!r} {k.fy!r} {k.cx!r} {k.cy!r} {k.width} {k.height}",
        f"frames = {len(scene.frames)}",
        f"baseline = {scene.baseline!r}",
        f"stereo_pose = {_pose_numbers(scene.stereo_pose) if scene.stereo_pose else '-'}",
    ]
    lines += _spec_lines(scene.spec)
    for i, f in enumerate(scene.frames):
        name = f"frame_{i:03d}"
        write_pfm(out / f"{name}.pfm", f.image)
        write_ppm(out / f"{name}.ppm", f.image)
        write_pfm(out / f"depth_{i:03d}.pfm", f.depth)
        stereo = "-"
        if scene.stereo:
            stereo = f"stereo_{i:03d}.pfm"
            write_pfm(out / stereo, scene.stereo[i].image)
        lines.append(f"frame {i} {name}.pfm depth_{i:03d}.pfm {stereo} {_pose_numbers(f.pose)}")
    (out / MANIFEST).write_text("\n".join(lines) + "\n")
    return out


def _parse_pose(nums) -> RigidTransform:
    m = np.array([float(x) for x in nums]).reshape(3, 4)
    return RigidTransform(m[:, :3], m[:, 3])


def _spec_from_items(items: dict) -> SceneSpec:
    kwargs = {}
    for f in fields(SceneSpec):
        if f.name not in items:
            continue
        raw = items[f.name]
        default = f.default
        if isinstance(default, tuple):
            kwargs[f.name] = tuple(float(x) for x in raw.split(","))
        elif isinstance(default, bool):
            kwargs[f.name] = raw.lower() == "true"
        else:
            kwargs[f.name] = type(default)(raw)
    return SceneSpec(**kwargs)


def load_scene(scene_dir) -> Scene:
    d = Path(scene_dir)
    path = d / MANIFEST
    if not path.exists():
        raise DataError(f"{d}: no {MANIFEST}")
    spec_items, frame_rows = {}, []
    k = stereo_pose = None
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("frame "):
            frame_rows.append(line.split())
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "intrinsics":
            fx, fy, cx, cy, w, h = value.split()
            k = Intrinsics(float(fx), float(fy), float(cx), float(cy), int(w), int(h))
        elif key == "stereo_pose" and value != "-":
            stereo_pose = _parse_pose(value.split())
        elif key.startswith("spec."):
            spec_items[key[5:]] = value
    if k is None or not frame_rows:
        raise DataError(f"{path}: missing intrinsics or frames")
    frames, stereo = [], []
    for row in frame_rows:
        if len(row) != 17:
            raise DataError(f"{path}: malformed frame row {' '.join(row[:2])}")
        _, _, img, depth, st, *nums = row
        try:
            pose = _parse_pose(nums)
            frames.append(Frame(as_image(read_pfm(d / img)), read_pfm(d / depth), pose))
            if st != "-":
                stereo.append(Frame(as_image(read_pfm(d / st)), None, pose.compose(stereo_pose.inverse())))
        except FileNotFoundError as exc:
            raise DataError(f"{d}: missing file {exc.filename}") from exc
    for f in frames + stereo:
        if f.image.shape[:2] != k.shape:
            raise DataError(f"{d}: image size does not match intrinsics")
    try:
        spec = _spec_from_items(spec_items)
    except (ValueError, TypeError) as exc:
        raise DataError(f"{path}: bad spec echo ({exc})") from exc
    return Scene(spec, k, frames, stereo, stereo_pose)


def spec_dict(spec: SceneSpec) -> dict:
    return asdict(spec)
