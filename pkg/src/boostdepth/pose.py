"""Pose estimators and the policies that turn one-step estimates into source poses.

An estimator answers ``estimate(i, j)`` with the relative pose ``P_{i->j}``
that maps points in camera ``i`` into camera ``j``. Trajectories are lists of
camera-to-world transforms.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curriculum import STEREO, SourceSelection, is_stereo
from .exceptions import ConfigError
from .geometry import RigidTransform, rotation_from_axis_angle

DIRECT = "direct"
FULL_INCREMENTAL = "full_incremental"
PARTIAL_INCREMENTAL = "partial_incremental"
POSE_MODES = (DIRECT, FULL_INCREMENTAL, PARTIAL_INCREMENTAL)


def relative_pose(trajectory: Sequence[RigidTransform], i: int, j: int) -> RigidTransform:
    return trajectory[j].inverse().compose(trajectory[i])


class PoseEstimator:
    kind = "abstract"

    def __init__(self, trajectory: Sequence[RigidTransform]):
        self.trajectory = list(trajectory)

    def __len__(self) -> int:
        return len(self.trajectory)

    def check(self, *indices: int) -> None:
        for i in indices:
            if not 0 <= i < len(self.trajectory):
                raise ConfigError(f"frame {i} is outside the sequence (0..{len(self.trajectory) - 1})")

    def estimate(self, i: int, j: int) -> RigidTransform:
        raise NotImplementedError


class OracleEstimator(PoseEstimator):
    """Returns ground-truth relative poses."""

    kind = "oracle"

    def estimate(self, i, j):
        self.check(i, j)
        return relative_pose(self.trajectory, i, j)


@dataclass(frozen=True)
class DriftModel:
    """Baseline-dependent translation shrinkage.

    A single estimate over a true baseline ``B`` reports ``(1 - c * B**(p-1)) * t_true``,
    so its translation error is ``e(B) = c * B**p``.
    """

    scale_c: float = 0.5
    power: float = 2.0
    rotation_std_deg: float = 0.05

    def translation_scale(self, b: float) -> float:
        return max(0.0, 1.0 - self.scale_c * b ** (self.power - 1))

    def translation_error(self, b: float) -> float:
        """``e(b)``, the translation error of a single estimate over baseline ``b``."""
        return b * (1.0 - self.translation_scale(b))


class NoisyOracleEstimator(PoseEstimator):
    """Ground truth with baseline-dependent translation shrinkage and rotation noise.

    The noise for an ordered pair ``(i, j)`` is a deterministic function of the
    seed, so repeated queries agree.
    """

    kind = "noisy_oracle"

    def __init__(self, trajectory, drift: DriftModel = DriftModel(), seed: int = 0):
        super().__init__(trajectory)
        self.drift = drift
        self.seed = int(seed)

    def estimate(self, i, j):
        self.check(i, j)
        true = relative_pose(self.trajectory, i, j)
        b = float(np.linalg.norm(true.translation))
        t = self.drift.translation_scale(b) * true.translation
        std = np.deg2rad(self.drift.rotation_std_deg)
        if std > 0:
            rng = np.random.default_rng([self.seed, i, j])
            noise = rotation_from_axis_angle(rng.normal(0.0, std, 3))
            r = noise @ true.rotation
        else:
            r = true.rotation
        return RigidTransform(r, t)


class OptimizedEstimator(PoseEstimator):
    """Estimates from ``base`` refined by per-pair left corrections ``exp(xi)``."""

    kind = "optimized"

    def __init__(self, base: PoseEstimator):
        super().__init__(base.trajectory)
        self.base = base
        self.corrections: dict[tuple[int, int], RigidTransform] = {}

    def estimate(self, i, j):
        base = self.base.estimate(i, j)
        corr = self.corrections.get((i, j))
        return base if corr is None else corr.compose(base)

    def apply_update(self, pair: tuple[int, int], xi) -> None:
        corr = self.corrections.get(pair, RigidTransform.identity())
        self.corrections[pair] = RigidTransform.from_twist(xi).compose(corr)


@dataclass(frozen=True)
class PosePolicy:
    mode: str = DIRECT
    error_alpha: float = 5.5

    def __post_init__(self):
        if self.mode not in POSE_MODES:
            raise ConfigError(f"unknown pose mode {self.mode!r}")
        if not self.error_alpha > 0:
            raise ConfigError("error_alpha must be positive")


def _steps(t: int, n: int) -> list[tuple[int, int]]:
    sign = 1 if n > 0 else -1
    return [(t + sign * m, t + sign * (m + 1)) for m in range(abs(n))]


def incremental_pose(est: PoseEstimator, t: int, n: int) -> RigidTransform:
    """``P_{t->t+n}`` as the product of ``|n|`` one-step estimates.

    Later steps multiply on the left: ``P = A_n ... A_2 A_1``.
    """
    if n == 0:
        return RigidTransform.identity()
    est.check(t, t + n)
    pose = RigidTransform.identity()
    for i, j in _steps(t, n):
        pose = est.estimate(i, j).compose(pose)
    return pose


@dataclass(frozen=True)
class PoseRecipe:
    """How a source pose is assembled from pair estimates.

    ``chain`` lists one-step pairs in application order. ``direct`` is the
    single pair estimate. For ``partial`` the rotation comes from the chain and
    the translation from ``direct``.
    """

    kind: str  # "direct" | "chain" | "partial" | "stereo"
    chain: tuple = ()
    direct: tuple | None = None


def recipes_for_sources(policy: PosePolicy, sources, t: int) -> dict:
    mono = [int(x) for x in sources if not is_stereo(x)]
    nearest = min((abs(k) for k in mono), default=None)
    out = {}
    for x in sources:
        if is_stereo(x):
            out[x] = PoseRecipe("stereo")
            continue
        k = int(x)
        pair = (t, t + k)
        if abs(k) == 1 or policy.mode == DIRECT:
            out[x] = PoseRecipe("direct", direct=pair)
        elif policy.mode == FULL_INCREMENTAL or abs(k) == nearest:
            out[x] = PoseRecipe("chain", chain=tuple(_steps(t, k)))
        else:
            out[x] = PoseRecipe("partial", chain=tuple(_steps(t, k)), direct=pair)
    return out


def build_pose(est: PoseEstimator, recipe: PoseRecipe, stereo_pose: RigidTransform | None = None) -> RigidTransform:
    if recipe.kind == "stereo":
        if stereo_pose is None:
            raise ConfigError("stereo source requested but no rig extrinsics given")
        return stereo_pose
    if recipe.kind == "direct":
        return est.estimate(*recipe.direct)
    rot = RigidTransform.identity()
    for i, j in recipe.chain:
        rot = est.estimate(i, j).compose(rot)
    if recipe.kind == "chain":
        return rot
    return RigidTransform(rot.rotation, est.estimate(*recipe.direct).translation)


def recipe_gradients(est: PoseEstimator, recipe: PoseRecipe, g_trans, g_rot) -> dict:
    """Distribute a source-pose gradient onto the twists of its pair estimates.

    ``g_trans`` is dL/dt and ``g_rot`` the gradient for a left rotation
    perturbation ``R -> exp(w) R`` of the assembled pose. Returns
    ``{pair: (6,) gradient}`` for left perturbations ``exp(xi) P_pair``.
    """
    g_trans = np.asarray(g_trans, dtype=np.float64)
    g_rot = np.asarray(g_rot, dtype=np.float64)
    out: dict = {}

    def add(pair, g):
        out[pair] = out.get(pair, 0.0) + g

    if recipe.kind == "stereo":
        return out
    if recipe.kind == "direct":
        t = est.estimate(*recipe.direct).translation
        add(recipe.direct, np.concatenate([g_trans, g_rot + np.cross(t, g_trans)]))
        return out
    steps = [est.estimate(i, j) for i, j in recipe.chain]
    if recipe.kind == "chain":
        full = RigidTransform.identity()
        for a in steps:
            full = a.compose(full)
        g_full = np.concatenate([g_trans, g_rot + np.cross(full.translation, g_trans)])
        left = RigidTransform.identity()
        for pair, a in zip(reversed(recipe.chain), reversed(steps)):
            add(pair, left.adjoint().T @ g_full)
            left = left.compose(a)
        return out
    # partial: rotation from the chain, translation from the direct estimate
    left = np.eye(3)
    for pair, a in zip(reversed(recipe.chain), reversed(steps)):
        add(pair, np.concatenate([np.zeros(3), left.T @ g_rot]))
        left = left @ a.rotation
    t = est.estimate(*recipe.direct).translation
    add(recipe.direct, np.concatenate([g_trans, np.cross(t, g_trans)]))
    return out


def poses_for_sources(
    est: PoseEstimator,
    policy: PosePolicy,
    selection: SourceSelection,
    t: int,
    stereo_pose: RigidTransform | None = None,
) -> dict:
    """Source index -> ``P_{t->source}`` under the given policy.

    ``direct`` uses one estimate per source; ``full_incremental`` chains one-step
    estimates for every source; ``partial_incremental`` chains only the
    nearest monocular sources and, for the rest, combines the chained rotation
    with the directly estimated translation. The stereo pose is the rig's.
    """
    recipes = recipes_for_sources(policy, selection.sources, t)
    return {x: build_pose(est, r, stereo_pose) for x, r in recipes.items()}


def error_induced_pose(pose: RigidTransform, alpha: float) -> RigidTransform:
    """Same rotation, translation divided by ``alpha``.

    Callers treat the result as a constant: no pose gradient flows through it.
    """
    if not alpha > 0:
        raise ConfigError(f"alpha must be positive, got {alpha}")
    if alpha == 1:
        return pose
    return RigidTransform(pose.rotation.copy(), pose.translation / alpha)


def stereo_rig_pose(stereo_baseline: float) -> RigidTransform:
    """Pose mapping left-camera points into a right camera offset by ``+x``."""
    return RigidTransform(np.eye(3), np.array([-stereo_baseline, 0.0, 0.0]))


def simulate_drift(est: PoseEstimator, trajectory: Sequence[RigidTransform], max_separation: int) -> list[dict]:
    """Mean translation error of direct vs incremental estimates per frame separation."""
    n_frames = len(trajectory)
    if n_frames <= max_separation:
        raise ConfigError("trajectory must be longer than max_separation")
    rows = []
    for n in range(1, max_separation + 1):
        errs = {DIRECT: [], "incremental": []}
        for i in range(n_frames - n):
            true = relative_pose(trajectory, i, i + n).translation
            errs[DIRECT].append(np.linalg.norm(est.estimate(i, i + n).translation - true))
            errs["incremental"].append(np.linalg.norm(incremental_pose(est, i, n).translation - true))
        for policy, e in errs.items():
            e = np.asarray(e)
            rows.append({"separation": n, "policy": policy, "mean_error": float(e.mean()), "std_error": float(e.std())})
    return rows


def write_drift_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["separation", "policy", "mean_error", "std_error"], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "mean_error": repr(r["mean_error"]), "std_error": repr(r["std_error"])})

