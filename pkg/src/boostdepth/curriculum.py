"""Baseline-driven choice of source frames.

Source frames are identified relative to the target: a signed integer ``k``
stands for frame ``t + k`` and :data:`STEREO` for the stereo partner of ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Collection, Union

from .exceptions import ConfigError

STEREO = "s"
SourceIndex = Union[int, str]

WARMUP = "warmup"
BOOST = "boost"


def is_stereo(x: SourceIndex) -> bool:
    return x == STEREO


@dataclass(frozen=True)
class BaselineModel:
    """Constant-velocity baseline model: ``G(t, t+k) = b * |k|``, ``G(t, s) = stereo_baseline``."""

    b: float
    stereo_baseline: float = 0.1

    def __post_init__(self):
        if not self.b > 0:
            raise ConfigError(f"per-frame baseline must be positive, got {self.b}")


def baseline(model: BaselineModel, candidate: SourceIndex) -> float:
    if is_stereo(candidate):
        return model.stereo_baseline
    return model.b * abs(int(candidate))


@dataclass(frozen=True)
class ScheduleParams:
    """Threshold and candidate-set coefficients; ``tau = intercept + slope * epoch``."""

    warmup_tau_intercept: float = 0.1
    warmup_tau_slope: float = 0.04
    warmup_max_offset: int = 2
    boost_tau_intercept: float = -0.4
    boost_tau_slope: float = 0.1
    boost_max_offset: int = 5
    trimin_tau_intercept: float = -0.9
    trimin_tau_slope: float = 0.15
    trimin_max_offset: int = 7
    use_stereo: bool = True


@dataclass(frozen=True)
class CurriculumSchedule:
    stage: str
    epoch: int
    omega: tuple
    tau: float
    tri_min: bool


@dataclass(frozen=True)
class SourceSelection:
    chosen: SourceIndex
    sources: tuple = field(default=())

    def monocular(self) -> list[int]:
        return [x for x in self.sources if not is_stereo(x)]


def schedule_for_epoch(epoch: int, stage: str, tri_min: bool, params: ScheduleParams = ScheduleParams()) -> CurriculumSchedule:
    """Threshold and candidate set for an absolute epoch index.

    Boost-stage thresholds use the absolute epoch (they only make sense for
    epochs past the warmup).
    """
    if epoch < 0:
        raise ConfigError("epoch must be non-negative")
    if stage == WARMUP:
        tau = params.warmup_tau_intercept + params.warmup_tau_slope * epoch
        top = params.warmup_max_offset
    elif stage == BOOST and tri_min:
        tau = params.trimin_tau_slope * epoch + params.trimin_tau_intercept
        top = params.trimin_max_offset
    elif stage == BOOST:
        tau = params.boost_tau_slope * epoch + params.boost_tau_intercept
        top = params.boost_max_offset
    else:
        raise ConfigError(f"unknown stage {stage!r}")
    omega = ((STEREO,) if params.use_stereo else ()) + tuple(range(1, top + 1))
    return CurriculumSchedule(stage, epoch, omega, tau, tri_min)


def _rank(model: BaselineModel, x: SourceIndex):
    # ties: monocular before stereo, then the larger offset
    return (baseline(model, x), 0 if is_stereo(x) else 1, 0 if is_stereo(x) else int(x))


def select_source(model: BaselineModel, sched: CurriculumSchedule, available: Collection | None = None) -> SourceSelection:
    """Widest-baseline candidate whose baseline does not exceed ``tau``.

    ``available`` optionally restricts the candidates to frames present in the
    sequence window. With no feasible candidate, the narrowest one is used.
    """
    omega = [x for x in sched.omega if available is None or x in available]
    if not omega:
        raise ConfigError("no candidate source frames available")
    feasible = [x for x in omega if baseline(model, x) <= sched.tau]
    if feasible:
        chosen = max(feasible, key=lambda x: _rank(model, x))
    else:
        # narrowest baseline; a monocular frame wins a tie with stereo here too
        chosen = min(omega, key=lambda x: (baseline(model, x), 1 if is_stereo(x) else 0))
    return SourceSelection(chosen, (chosen,))


def expand_sources(selection: SourceSelection, tri_min: bool, available: Collection | None = None) -> SourceSelection:
    """Full source set for a chosen frame, dropping frames outside ``available``."""
    c = selection.chosen
    if is_stereo(c):
        full = [STEREO]
    else:
        k = int(c)
        if k < 1:
            raise ConfigError(f"chosen monocular offset must be positive, got {k}")
        if not tri_min:
            full = [k, -k]
        elif k == 1:
            full = [1, -1, STEREO]
        elif k == 2:
            full = [2, 1, -2, -1, STEREO]
        else:
            full = [k, k - 1, k - 2, -k, -k + 1, -k + 2]
    if available is not None:
        full = [x for x in full if x in available]
    return SourceSelection(c, tuple(full))


def fixed_sources(skip: int, use_stereo: bool, available: Collection | None = None) -> SourceSelection:
    """Non-curriculum source set ``{t+skip, t-skip}`` plus the stereo frame."""
    full = [skip, -skip] + ([STEREO] if use_stereo else [])
    if available is not None:
        full = [x for x in full if x in available]
    return SourceSelection(skip, tuple(full))
