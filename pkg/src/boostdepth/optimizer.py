"""Direct photometric optimisation of per-pixel log-depth.

The depth of each target frame is a residual pyramid of log-depth grids: level
``l`` has resolution ``H/2^l x W/2^l`` and the prediction at scale ``s`` is

    z_s = log(d_init) + sum_{l >= s} upsample(level_l),

bilinearly upsampled to full resolution before view synthesis. Warmup
evaluates all scales, boosting only the finest one. Gradients of the loss are
derived by hand through projection, bilinear sampling, SSIM, the per-pixel
minimum and the smoothness term; Adam updates every level.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .curriculum import (
    BOOST,
    STEREO,
    WARMUP,
    BaselineModel,
    ScheduleParams,
    SourceSelection,
    expand_sources,
    fixed_sources,
    is_stereo,
    schedule_for_epoch,
    select_source,
)
from .exceptions import ConfigError, NumericError
from .geometry import Intrinsics, RigidTransform, project_full, sample_bilinear_full
from .photometric import (
    ErrorMap,
    LossConfig,
    automask_from_errors,
    min_aggregate,
    photometric_backward,
    photometric_error,
    photometric_error_grad,
    smoothness_grad,
)
from .pose import (
    DIRECT,
    FULL_INCREMENTAL,
    PARTIAL_INCREMENTAL,
    OptimizedEstimator,
    OracleEstimator,
    PoseEstimator,
    PosePolicy,
    build_pose,
    error_induced_pose,
    recipe_gradients,
    recipes_for_sources,
)
from .synth import FrameWindow, Scene

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    warmup_epochs: int = 10
    boost_epochs: int = 10
    boost_start_epoch: int = -1  # absolute index of the first boost epoch; -1: right after warmup
    iterations_per_epoch: int = 30
    lr: float = 0.02
    lr_decay: float = 0.4
    lr_milestones: tuple = (11, 13, 15, 16, 17, 18, 19)
    warmup_scales: int = 4
    boost_scales: int = 1
    curriculum: bool = True
    skip: int = 1
    use_stereo: bool = True
    tri_min: bool = True
    incremental_pose: bool = True
    partial_incremental: bool = True
    error_reconstructions: bool = True
    error_alpha: float = 5.5
    pose_lr: float = 1e-3
    init_depth: float = 0.0  # 0: median ground-truth depth of the target
    z_min: float = 1e-3
    d_max: float = 100.0
    targets: tuple = ()  # absolute frame indices; empty: the middle frame

    def __post_init__(self):
        if self.warmup_epochs < 0 or self.boost_epochs < 0:
            raise ConfigError("epoch counts must be non-negative")
        if self.iterations_per_epoch < 1:
            raise ConfigError("iterations_per_epoch must be at least 1")
        if self.warmup_scales < 1 or self.boost_scales < 1:
            raise ConfigError("at least one scale is needed")
        if not self.lr > 0:
            raise ConfigError("learning rate must be positive")
        if not 0 < self.z_min < self.d_max:
            raise ConfigError("need 0 < z_min < d_max")

    @property
    def first_boost_epoch(self) -> int:
        return self.warmup_epochs if self.boost_start_epoch < 0 else self.boost_start_epoch

    def epochs(self) -> list:
        """``(absolute_epoch, stage)`` for every epoch of the run."""
        out = [(e, WARMUP) for e in range(self.warmup_epochs)]
        out += [(self.first_boost_epoch + e, BOOST) for e in range(self.boost_epochs)]
        return out

    def lr_at(self, epoch: int) -> float:
        return self.lr * self.lr_decay ** sum(1 for m in self.lr_milestones if epoch >= m)

    def pose_policy(self, stage: str) -> PosePolicy:
        mode = DIRECT
        if stage == BOOST and self.incremental_pose:
            mode = PARTIAL_INCREMENTAL if self.partial_incremental else FULL_INCREMENTAL
        return PosePolicy(mode, self.error_alpha)


# -- resolution pyramid ---------------------------------------------------------------


@lru_cache(maxsize=64)
def _upsample_matrix(n_out: int, n_in: int) -> np.ndarray:
    """1-D bilinear resampling matrix (half-pixel centres, edge clamped)."""
    m = np.zeros((n_out, n_in))
    if n_in == n_out:
        return np.eye(n_out)
    src = np.clip((np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5, 0, n_in - 1)
    i0 = np.minimum(np.floor(src).astype(int), n_in - 1)
    i1 = np.minimum(i0 + 1, n_in - 1)
    a = src - i0
    rows = np.arange(n_out)
    np.add.at(m, (rows, i0), 1 - a)
    np.add.at(m, (rows, i1), a)
    return m


def level_shapes(shape: tuple, n_levels: int) -> list:
    h, w = shape
    return [(max(2, h >> l), max(2, w >> l)) for l in range(n_levels)]


def upsample(level: np.ndarray, shape: tuple) -> np.ndarray:
    if level.shape == shape:
        return level
    return _upsample_matrix(shape[0], level.shape[0]) @ level @ _upsample_matrix(shape[1], level.shape[1]).T


def upsample_adjoint(g: np.ndarray, level_shape: tuple) -> np.ndarray:
    if g.shape == level_shape:
        return g
    return _upsample_matrix(g.shape[0], level_shape[0]).T @ g @ _upsample_matrix(g.shape[1], level_shape[1])


@dataclass
class DepthState:
    """Log-depth pyramid of one target frame plus its Adam accumulators."""

    offset: float
    levels: list
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    steps: int = 0

    @classmethod
    def constant(cls, shape: tuple, depth: float, n_levels: int = 4) -> "DepthState":
        if not depth > 0:
            raise ConfigError("initial depth must be positive")
        levels = [np.zeros(s) for s in level_shapes(shape, n_levels)]
        return cls(float(np.log(depth)), levels)

    @classmethod
    def from_log_depth(cls, log_depth: np.ndarray, n_levels: int = 4) -> "DepthState":
        z = np.asarray(log_depth, dtype=np.float64)
        st = cls.constant(z.shape, float(np.exp(np.median(z))), n_levels)
        st.levels[0] = z - st.offset
        return st

    @property
    def shape(self) -> tuple:
        return self.levels[0].shape

    def prediction(self, scale: int) -> np.ndarray:
        z = np.full(self.shape, self.offset)
        for lvl in self.levels[scale:]:
            z = z + upsample(lvl, self.shape)
        return z

    def log_depth(self) -> np.ndarray:
        return self.prediction(0)

    def depth(self, z_min: float = 1e-3, d_max: float = 100.0) -> np.ndarray:
        return np.exp(np.clip(self.log_depth(), np.log(z_min), np.log(d_max)))

    def adam_step(self, grads: list, lr: float, beta1=0.9, beta2=0.999, eps=1e-8) -> None:
        if not self.m:
            self.m = [np.zeros_like(l) for l in self.levels]
            self.v = [np.zeros_like(l) for l in self.levels]
        self.steps += 1
        c1 = 1 - beta1**self.steps
        c2 = 1 - beta2**self.steps
        for i, g in enumerate(grads):
            self.m[i] = beta1 * self.m[i] + (1 - beta1) * g
            self.v[i] = beta2 * self.v[i] + (1 - beta2) * g * g
            self.levels[i] = self.levels[i] - lr * (self.m[i] / c1) / (np.sqrt(self.v[i] / c2) + eps)

    def clamp(self, z_min: float, d_max: float) -> None:
        z = self.log_depth()
        lo, hi = np.log(z_min), np.log(d_max)
        self.levels[0] = self.levels[0] + (np.clip(z, lo, hi) - z)


# -- objective ---------------------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    source: object
    pose: RigidTransform
    error_induced: bool = False


@dataclass
class ScaleDiagnostics:
    aggregated: ErrorMap
    winner: np.ndarray
    automask: np.ndarray
    loss: float


@dataclass
class Evaluation:
    loss: float
    level_grads: list | None
    pose_grads: dict  # source -> (g_trans, g_rot) for standard candidates
    scales: list


@lru_cache(maxsize=16)
def _rays(k: Intrinsics) -> np.ndarray:
    return k.rays()


class Objective:
    """Loss of one target window for a set of candidate reconstructions."""

    def __init__(self, window: FrameWindow, loss_cfg: LossConfig = LossConfig(), z_min=1e-3, d_max=100.0, threads: int = 1):
        self.window = window
        self.cfg = loss_cfg
        self.z_min = z_min
        self.d_max = d_max
        self.threads = threads
        self._identity: dict = {}

    def identity_error(self, source) -> ErrorMap:
        if source not in self._identity:
            self._identity[source] = photometric_error(self.window.image, self.window.frames[source].image, self.cfg)
        return self._identity[source]

    def _candidate(self, depth, cand: Candidate, want_grad: bool):
        k = self.window.intrinsics
        proj = project_full(depth, cand.pose, k, self.z_min)
        smp = sample_bilinear_full(self.window.frames[cand.source].image, proj.coords)
        valid = smp.valid & proj.in_front
        recon = np.where(valid[..., None], smp.image, 0.0)
        em, cache = photometric_error_grad(self.window.image, recon, self.cfg, valid)
        return em, (proj, smp, valid, cache) if want_grad else None

    def _map(self, fn, items):
        if self.threads > 1 and len(items) > 1:
            with ThreadPoolExecutor(self.threads) as ex:
                return list(ex.map(fn, items))
        return [fn(x) for x in items]

    def scale_loss(self, z: np.ndarray, candidates: list, scale: int, want_grad=True, want_pose_grad=False):
        lo, hi = np.log(self.z_min), np.log(self.d_max)
        inside = (z >= lo) & (z <= hi)
        depth = np.exp(np.clip(z, lo, hi))
        results = self._map(lambda c: self._candidate(depth, c, want_grad), candidates)
        ems = [r[0] for r in results]
        agg, winner = min_aggregate(ems)
        standard = [i for i, c in enumerate(candidates) if not c.error_induced]
        if self.cfg.automask_enabled:
            ident = min_aggregate([self.identity_error(candidates[i].source) for i in standard])[0]
            recon_std = min_aggregate([ems[i] for i in standard])[0]
            mu = automask_from_errors(ident, recon_std)
        else:
            mu = np.ones(z.shape, bool)
        keep = agg.mask & mu
        n = int(keep.sum())
        if not agg.mask.any():
            raise NumericError("no source reconstruction covers any pixel")
        # every pixel can be automasked at a coarse scale; it then adds nothing
        photo = float(agg.values[keep].mean()) if n else 0.0
        lam = self.cfg.smoothness_lambda / 2**scale
        smooth, g_smooth = smoothness_grad(depth, self.window.image) if lam > 0 else (0.0, None)
        loss = photo + lam * smooth
        diag = ScaleDiagnostics(agg, winner, mu, loss)
        if not want_grad:
            return loss, None, {}, diag

        g_z = np.zeros(z.shape)
        pose_grads = {}
        for i, (cand, (_, extra)) in enumerate(zip(candidates, results)):
            sel = keep & (winner == i)
            if n == 0 or not sel.any():
                continue
            proj, smp, valid, cache = extra
            g_recon = photometric_backward(cache, sel / n)
            g_recon = np.where(valid[..., None], g_recon, 0.0)
            g_u = (g_recon * smp.d_du).sum(axis=2)
            g_v = (g_recon * smp.d_dv).sum(axis=2)
            g_pt = g_u[..., None] * proj.du_dpoint + g_v[..., None] * proj.dv_dpoint
            cam = proj.points - cand.pose.translation
            g_z += (g_pt * cam).sum(axis=2)
            if want_pose_grad and not cand.error_induced:
                g_t = g_pt.sum(axis=(0, 1))
                g_r = np.cross(cam.reshape(-1, 3), g_pt.reshape(-1, 3)).sum(axis=0)
                prev = pose_grads.get(cand.source, (0.0, 0.0))
                pose_grads[cand.source] = (prev[0] + g_t, prev[1] + g_r)
        if g_smooth is not None:
            g_z += lam * g_smooth * depth
        g_z = np.where(inside, g_z, 0.0)
        return loss, g_z, pose_grads, diag

    def __call__(self, state: DepthState, candidates: list, scales: int, want_grad=True, want_pose_grad=False) -> Evaluation:
        if not candidates:
            raise ConfigError("no source frames to reconstruct from")
        total = 0.0
        level_grads = [np.zeros_like(l) for l in state.levels] if want_grad else None
        pose_grads: dict = {}
        diags = []
        for s in range(scales):
            loss, g_z, pg, diag = self.scale_loss(state.prediction(s), candidates, s, want_grad, want_pose_grad)
            total += loss / scales
            diags.append(diag)
            if want_grad:
                g_z = g_z / scales
                for l in range(s, len(state.levels)):
                    level_grads[l] += upsample_adjoint(g_z, state.levels[l].shape)
                for src, (gt, gr) in pg.items():
                    prev = pose_grads.get(src, (0.0, 0.0))
                    pose_grads[src] = (prev[0] + gt / scales, prev[1] + gr / scales)
        if not np.isfinite(total):
            raise NumericError("loss is not finite")
        return Evaluation(total, level_grads, pose_grads, diags)


# -- training ----------------------------------------------------------------------


def selection_for(cfg: RunConfig, stage: str, epoch: int, model: BaselineModel, available, params: ScheduleParams) -> SourceSelection:
    if not cfg.curriculum:
        sel = fixed_sources(cfg.skip, cfg.use_stereo, available)
    else:
        if not cfg.use_stereo:
            params = ScheduleParams(**{**params.__dict__, "use_stereo": False})
        sched = schedule_for_epoch(epoch, stage, cfg.tri_min, params)
        sel = expand_sources(select_source(model, sched, available), cfg.tri_min, available)
        if not cfg.use_stereo:
            sel = SourceSelection(sel.chosen, tuple(x for x in sel.sources if not is_stereo(x)))
    if not sel.sources:
        raise ConfigError("source set is empty after clipping to the sequence")
    return sel


def build_candidates(est: PoseEstimator, policy: PosePolicy, selection: SourceSelection, window: FrameWindow, error_reconstructions: bool):
    recipes = recipes_for_sources(policy, selection.sources, window.target)
    std = [Candidate(x, build_pose(est, r, window.stereo_pose)) for x, r in recipes.items()]
    cands = list(std)
    if error_reconstructions:
        cands += [Candidate(c.source, error_induced_pose(c.pose, policy.error_alpha), True) for c in std]
    return cands, recipes


def estimate_baseline(est: PoseEstimator) -> float:
    n = len(est)
    if n < 2:
        raise ConfigError("need at least two frames to estimate the baseline")
    return float(np.mean([np.linalg.norm(est.estimate(i, i + 1).translation) for i in range(n - 1)]))


def _fmt_sources(sources) -> str:
    return ";".join(x if is_stereo(x) else f"{int(x):+d}" for x in sources)


@dataclass
class RunResult:
    depths: dict  # target -> final depth map
    log: list  # rows for the training log
    snapshots: dict  # epoch -> {target: depth}
    states: dict  # target -> DepthState
    errors: dict = field(default_factory=dict)  # epoch -> {target: aggregated ErrorMap}

    @property
    def depth(self) -> np.ndarray:
        return self.depths[min(self.depths)] if len(self.depths) == 1 else self.depths[sorted(self.depths)[len(self.depths) // 2]]


class DepthOptimizer:
    """Runs the warmup and boosting stages over a scene."""

    def __init__(
        self,
        scene: Scene,
        cfg: RunConfig = RunConfig(),
        loss_cfg: LossConfig = LossConfig(),
        estimator: PoseEstimator | None = None,
        schedule: ScheduleParams = ScheduleParams(),
        threads: int = 1,
        init_states: dict | None = None,
    ):
        self.scene = scene
        self.cfg = cfg
        self.loss_cfg = loss_cfg
        self.est = estimator or OracleEstimator(scene.trajectory)
        self.schedule = schedule
        self.threads = threads
        targets = cfg.targets or (len(scene.frames) // 2,)
        self.targets = tuple(int(t) for t in targets)
        self.windows = {t: scene.window(t) for t in self.targets}
        if not cfg.use_stereo:
            for w in self.windows.values():
                w.frames.pop(STEREO, None)
        self.objectives = {t: Objective(w, loss_cfg, cfg.z_min, cfg.d_max, threads) for t, w in self.windows.items()}
        n_levels = max(cfg.warmup_scales, cfg.boost_scales)
        self.states = {}
        for t, w in self.windows.items():
            if init_states and t in init_states:
                self.states[t] = init_states[t]
            else:
                d0 = cfg.init_depth if cfg.init_depth > 0 else float(np.median(w.depth))
                self.states[t] = DepthState.constant(w.depth.shape, d0, n_levels)
        self.model = BaselineModel(estimate_baseline(self.est), schedule_stereo_baseline(scene))
        self._pose_adam: dict = {}
        self._warned: set = set()

    def selection(self, t: int, stage: str, epoch: int) -> SourceSelection:
        w = self.windows[t]
        sel = selection_for(self.cfg, stage, epoch, self.model, w.available, self.schedule)
        full = selection_for(self.cfg, stage, epoch, self.model, None, self.schedule) if self.cfg.curriculum else fixed_sources(self.cfg.skip, self.cfg.use_stereo)
        missing = set(full.sources) - set(sel.sources)
        if missing and (t, stage, epoch) not in self._warned:
            self._warned.add((t, stage, epoch))
            log.warning("target %d epoch %d: sources %s outside the sequence were dropped", t, epoch, _fmt_sources(sorted(missing, key=str)))
        return sel

    def step(self, t: int, stage: str, epoch: int, lr: float):
        """One Adam step on target ``t``; returns ``(loss, selection, evaluation)``."""
        cfg = self.cfg
        sel = self.selection(t, stage, epoch)
        policy = cfg.pose_policy(stage)
        errors = cfg.error_reconstructions and stage == BOOST
        cands, recipes = build_candidates(self.est, policy, sel, self.windows[t], errors)
        scales = cfg.warmup_scales if stage == WARMUP else cfg.boost_scales
        optimise_pose = isinstance(self.est, OptimizedEstimator)
        ev = self.objectives[t](self.states[t], cands, scales, True, optimise_pose)
        state = self.states[t]
        state.adam_step(ev.level_grads, lr)
        state.clamp(cfg.z_min, cfg.d_max)
        if optimise_pose:
            self._pose_step(recipes, ev.pose_grads)
        return ev.loss, sel, ev

    def _pose_step(self, recipes: dict, pose_grads: dict) -> None:
        pair_grads: dict = {}
        for src, (g_t, g_r) in pose_grads.items():
            for pair, g in recipe_gradients(self.est, recipes[src], g_t, g_r).items():
                pair_grads[pair] = pair_grads.get(pair, 0.0) + g
        for pair in sorted(pair_grads):
            g = pair_grads[pair]
            m, v, n = self._pose_adam.get(pair, (np.zeros(6), np.zeros(6), 0))
            n += 1
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            self._pose_adam[pair] = (m, v, n)
            xi = -self.cfg.pose_lr * (m / (1 - 0.9**n)) / (np.sqrt(v / (1 - 0.999**n)) + 1e-8)
            self.est.apply_update(pair, xi)

    def run(self, snapshot_every_epoch: bool = False, keep_errors: bool = False) -> RunResult:
        cfg = self.cfg
        rows = []
        snapshots, errors = {}, {}
        it = 0
        for epoch, stage in cfg.epochs():
            lr = cfg.lr_at(epoch)
            last = {}
            for _ in range(cfg.iterations_per_epoch):
                losses, sources = [], []
                for t in self.targets:
                    loss, sel, ev = self.step(t, stage, epoch, lr)
                    losses.append(loss)
                    sources.append(_fmt_sources(sel.sources))
                    last[t] = ev
                mean = float(np.mean(losses))
                if not np.isfinite(mean):
                    raise NumericError(f"loss became {mean} at epoch {epoch}")
                rows.append({"epoch": epoch, "iteration": it, "loss": mean, "lr": lr, "stage": stage, "sources": "|".join(sources)})
                it += 1
            log.info("epoch %d (%s): loss %.5f", epoch, stage, rows[-1]["loss"])
            if snapshot_every_epoch:
                snapshots[epoch] = {t: s.depth(cfg.z_min, cfg.d_max) for t, s in self.states.items()}
            if keep_errors:
                errors[epoch] = {t: ev.scales[0].aggregated for t, ev in last.items()}
        depths = {t: s.depth(cfg.z_min, cfg.d_max) for t, s in self.states.items()}
        return RunResult(depths, rows, snapshots, self.states, errors)


def schedule_stereo_baseline(scene: Scene) -> float:
    return float(scene.spec.stereo_baseline)


def run(world: Scene, cfg: RunConfig = RunConfig(), loss_cfg: LossConfig = LossConfig(), estimator: PoseEstimator | None = None, **kwargs) -> RunResult:
    """Optimise the depth of the configured target frames of ``world``."""
    return DepthOptimizer(world, cfg, loss_cfg, estimator, **kwargs).run()


def write_log(path, rows: list) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["epoch", "iteration", "loss", "lr", "stage", "sources"], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "loss": repr(r["loss"]), "lr": repr(r["lr"])})


# -- gradient checks ---------------------------------------------------------------


def _stable(ev_a: Evaluation, ev_b: Evaluation) -> bool:
    for a, b in zip(ev_a.scales, ev_b.scales):
        if not (np.array_equal(a.winner, b.winner) and np.array_equal(a.automask, b.automask) and np.array_equal(a.aggregated.mask, b.aggregated.mask)):
            return False
    return True


def _cell(state: DepthState, objective: Objective, candidates, p) -> list:
    """Piecewise-smooth regime of the loss around pixel ``p`` (kink detector)."""
    depth = np.exp(state.log_depth())
    k = objective.window.intrinsics
    target = objective.window.image[p]
    out = []
    point = _rays(k)[p] * depth[p]
    for c in candidates:
        x, y, z = c.pose.apply(point)
        uv = np.array([k.fx * x / z + k.cx, k.fy * y / z + k.cy])
        smp = sample_bilinear_full(objective.window.frames[c.source].image, uv[None, None])
        signs = tuple(np.sign(smp.image[0, 0] - target).astype(int))
        out.append((tuple(np.floor(uv).astype(int)), bool(z > objective.z_min), signs))
    # the smoothness term has |.| kinks where neighbouring depths cross
    y, x = p
    h, w = depth.shape
    nb = [(y + dy, x + dx) for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)) if 0 <= y + dy < h and 0 <= x + dx < w]
    out.append(tuple(int(np.sign(depth[p] - depth[q])) for q in nb))
    return out


def gradient_check(
    state: DepthState,
    objective: Objective,
    candidates: list,
    scales: int = 1,
    n_pixels: int = 100,
    h: float = 1e-4,
    level: int = 0,
    seed: int = 0,
):
    """Compare analytic and central-difference gradients at random pixels.

    Pixels whose finite-difference stencil crosses a non-differentiable point
    (a change of min-aggregation winner, automask, bilinear cell, the sign of
    an L1 residual or the order of neighbouring depths) are skipped.
    Returns ``(max_relative_error, checked_pixels)``.
    """
    ev = objective(state, candidates, scales)
    g = ev.level_grads[level]
    rng = np.random.default_rng(seed)
    shape = state.levels[level].shape
    order = rng.permutation(shape[0] * shape[1])
    worst = 0.0
    checked = []
    for flat in order:
        if len(checked) >= n_pixels:
            break
        p = np.unravel_index(flat, shape)
        base = state.levels[level][p]
        evs = []
        for sign in (1, -1):
            state.levels[level][p] = base + sign * h
            evs.append(objective(state, candidates, scales, want_grad=False))
        state.levels[level][p] = base
        if not (_stable(ev, evs[0]) and _stable(ev, evs[1])):
            continue
        if level == 0:
            cells = []
            for sign in (1, -1):
                state.levels[0][p] = base + sign * h
                cells.append(_cell(state, objective, candidates, p))
            state.levels[0][p] = base
            if cells[0] != cells[1]:
                continue
        fd = (evs[0].loss - evs[1].loss) / (2 * h)
        a = g[p]
        denom = max(abs(a), abs(fd))
        rel = 0.0 if denom == 0 else abs(a - fd) / denom
        worst = max(worst, rel)
        checked.append(p)
    return worst, checked
