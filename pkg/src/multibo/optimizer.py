"""Sequential optimization loop with a minimum sampling distance.

Each iteration scores every feasible candidate with the configured
acquisition, observes the objective at the argmax (ties resolve to the
lowest candidate index), refits the posterior, and decides whether the new
observation "locates" an optimum. Candidates closer than ``min_distance``
to any already-sampled point are never proposed; when none remain the run
terminates early rather than relaxing the constraint.

A step is flagged as a located optimum when the conditions its acquisition
family actually reasons about hold at the sampled point: families using the
value posterior require the observed value to reach the improvement
threshold, and families using the gradient band require the posterior-mean
gradient norm to fall within the band half-width.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .acquisition import AcquisitionConfig, evaluate as evaluate_acquisition
from .engine import CandidateEvaluator
from .errors import ConfigError, Exhausted, GridTooLarge, NonFinite
from .gp import GPState
from .kernels import Kernel

MAX_CANDIDATES = 10_000_000


@dataclass(frozen=True)
class OptimizerConfig:
    """Run settings: domain, candidate generation, constraint, and model."""

    bounds: np.ndarray
    kernel: Kernel
    acquisition: AcquisitionConfig
    budget: int
    min_distance: float = 0.0
    grid_step: float | None = None
    grid_counts: tuple[int, ...] | None = None
    random_candidates: int | None = None
    prior_points: np.ndarray | None = None
    n_priors: int = 3
    prior_mean: float = 0.0
    seed: int = 0
    jitter_schedule: tuple[float, ...] = numerics.DEFAULT_JITTER_SCHEDULE

    def __post_init__(self):
        bounds = np.atleast_2d(np.asarray(self.bounds, dtype=float))
        if bounds.ndim != 2 or bounds.shape[1] != 2 or bounds.shape[0] == 0:
            raise ConfigError("bounds must be a nonempty stack of [low, high] pairs")
        if np.any(bounds[:, 0] >= bounds[:, 1]):
            raise ConfigError("every bound must satisfy low < high")
        object.__setattr__(self, "bounds", bounds)
        if self.budget < 0:
            raise ConfigError("budget must be nonnegative")
        if self.min_distance < 0:
            raise ConfigError("min_distance must be nonnegative")
        modes = [
            self.grid_step is not None,
            self.grid_counts is not None,
            self.random_candidates is not None,
        ]
        if sum(modes) != 1:
            raise ConfigError(
                "exactly one of grid_step, grid_counts, random_candidates must be set"
            )
        if self.grid_counts is not None and len(self.grid_counts) != bounds.shape[0]:
            raise ConfigError("grid_counts must give one resolution per dimension")
        if self.prior_points is not None:
            pts = np.atleast_2d(np.asarray(self.prior_points, dtype=float))
            if pts.shape[1] != bounds.shape[0]:
                raise ConfigError("prior_points dimension does not match bounds")
            if np.any(pts < bounds[:, 0]) or np.any(pts > bounds[:, 1]):
                raise ConfigError("prior_points must lie within bounds")
            if pts.shape[0] >= 2:
                deltas = pts[:, None, :] - pts[None, :, :]
                dist = np.linalg.norm(deltas, axis=-1)
                np.fill_diagonal(dist, np.inf)
                if dist.min() < self.min_distance:
                    raise ConfigError(
                        "prior_points violate the minimum sampling distance"
                    )
            object.__setattr__(self, "prior_points", pts)
        elif self.n_priors < 1:
            raise ConfigError("n_priors must be at least 1")

    @property
    def dim(self) -> int:
        return self.bounds.shape[0]


@dataclass(frozen=True)
class StepRecord:
    """One evaluated point: priors carry step 0, selections count from 1."""

    step: int
    kind: str  # "prior" | "bo"
    point: np.ndarray
    value: float
    acquisition: float | None
    flagged: bool
    distance: float | None


@dataclass(frozen=True)
class RunTrace:
    """Ordered evaluation record plus final-state summary."""

    steps: tuple[StepRecord, ...]
    config: OptimizerConfig
    termination: str
    n_samples: int
    jitter: float

    def points(self, kind: str | None = None) -> np.ndarray:
        rows = [s.point for s in self.steps if kind is None or s.kind == kind]
        return np.asarray(rows) if rows else np.empty((0, self.config.dim))

    def bo_steps(self) -> tuple[StepRecord, ...]:
        return tuple(s for s in self.steps if s.kind == "bo")

    def flagged(self) -> tuple[StepRecord, ...]:
        return tuple(s for s in self.steps if s.flagged)

    def min_pairwise_distance(self) -> float:
        pts = self.points()
        if pts.shape[0] < 2:
            return float("inf")
        deltas = pts[:, None, :] - pts[None, :, :]
        dist = np.linalg.norm(deltas, axis=-1)
        np.fill_diagonal(dist, np.inf)
        return float(dist.min())


def generate_candidates(cfg: OptimizerConfig, seed: int | None = None) -> np.ndarray:
    """Candidate stack: a deterministic full grid, or seeded uniform points."""
    bounds = cfg.bounds
    if cfg.random_candidates is not None:
        if cfg.random_candidates > MAX_CANDIDATES:
            raise GridTooLarge(f"{cfg.random_candidates} candidates exceeds cap")
        rng = np.random.default_rng(cfg.seed if seed is None else seed)
        u = rng.random((cfg.random_candidates, cfg.dim))
        return bounds[:, 0] + u * (bounds[:, 1] - bounds[:, 0])
    if cfg.grid_step is not None:
        counts = [int(round((hi - lo) / cfg.grid_step)) + 1 for lo, hi in bounds]
    else:
        counts = list(cfg.grid_counts)
    total = int(np.prod(counts))
    if total > MAX_CANDIDATES:
        raise GridTooLarge(f"grid of {total} points exceeds cap {MAX_CANDIDATES}")
    axes = [np.linspace(lo, hi, c) for (lo, hi), c in zip(bounds, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


# distances exactly at the minimum must stay feasible despite round-off
# (grid step equal to min_distance is the common configuration)
_DIST_RTOL = 1e-9


def _feasible_mask(candidates: np.ndarray, history: np.ndarray, d: float) -> np.ndarray:
    mask = np.ones(candidates.shape[0], dtype=bool)
    if d <= 0 or history.shape[0] == 0:
        return mask
    cut = d * d * (1.0 - _DIST_RTOL)
    for h in history:
        mask &= np.sum((candidates - h) ** 2, axis=1) >= cut
    return mask


def propose_next(state: GPState, candidates, history, cfg: OptimizerConfig):
    """Feasible candidate with maximal acquisition; lowest index wins ties.

    Returns ``(point, index, acquisition_value)``. Raises ``Exhausted`` when
    no candidate is at least ``min_distance`` away from every history point.
    """
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    history = np.atleast_2d(np.asarray(history, dtype=float)) if len(history) else np.empty((0, cfg.dim))
    mask = _feasible_mask(candidates, history, cfg.min_distance)
    if not mask.any():
        raise Exhausted("no candidate satisfies the minimum sampling distance")
    evaluator = CandidateEvaluator(
        state.kernel, candidates, state.prior_mean,
        capacity=state.n_samples, jitter_schedule=cfg.jitter_schedule,
    )
    evaluator.fit(state.inputs, state.values)
    acq = evaluator.acquisition_values(cfg.acquisition)
    acq = np.where(mask, acq, -np.inf)
    idx = int(np.argmax(acq))
    return candidates[idx], idx, float(acq[idx])


def _draw_priors(cfg: OptimizerConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.prior_points is not None:
        return cfg.prior_points
    pts: list[np.ndarray] = []
    for _ in range(100_000):
        if len(pts) == cfg.n_priors:
            break
        u = rng.random(cfg.dim)
        p = cfg.bounds[:, 0] + u * (cfg.bounds[:, 1] - cfg.bounds[:, 0])
        if all(np.linalg.norm(p - q) >= cfg.min_distance for q in pts):
            pts.append(p)
    if len(pts) < cfg.n_priors:
        raise ConfigError(
            "could not place prior points at the requested minimum distance"
        )
    return np.asarray(pts)


def _observe(objective, point: np.ndarray) -> float:
    value = float(objective(point))
    if not np.isfinite(value):
        raise NonFinite(f"objective returned {value} at {point.tolist()}")
    return value


def run(objective, cfg: OptimizerConfig, truths=None) -> RunTrace:
    """Execute the full loop: priors, fit, then ``budget`` propose/observe/refit
    rounds. ``truths`` (optional row stack) enables distance-to-optimum logging."""
    seeds = np.random.SeedSequence(cfg.seed).spawn(2)
    prior_rng = np.random.default_rng(seeds[0])
    cand_seed = seeds[1].generate_state(1)[0]
    candidates = generate_candidates(cfg, seed=int(cand_seed))
    priors = _draw_priors(cfg, prior_rng)
    truths = None if truths is None else np.atleast_2d(np.asarray(truths, dtype=float))

    def truth_distance(p):
        if truths is None or truths.shape[0] == 0:
            return None
        return float(np.min(np.linalg.norm(truths - p, axis=1)))

    acq_cfg = cfg.acquisition
    records = []
    prior_values = []
    for p in priors:
        v = _observe(objective, p)
        prior_values.append(v)
        records.append(StepRecord(
            step=0, kind="prior", point=p.copy(), value=v,
            acquisition=None, flagged=False, distance=truth_distance(p),
        ))

    evaluator = CandidateEvaluator(
        cfg.kernel, candidates, cfg.prior_mean,
        capacity=priors.shape[0] + cfg.budget, jitter_schedule=cfg.jitter_schedule,
    )
    evaluator.fit(priors, prior_values)
    mask = _feasible_mask(candidates, priors, cfg.min_distance)

    termination = "budget"
    for t in range(1, cfg.budget + 1):
        if not mask.any():
            termination = "exhausted"
            break
        acq = evaluator.acquisition_values(acq_cfg)
        masked = np.where(mask, acq, -np.inf)
        idx = int(np.argmax(masked))
        point = candidates[idx].copy()
        value = _observe(objective, point)
        evaluator.append(point, value)

        flag = True
        if acq_cfg.uses_value:
            flag = flag and value >= acq_cfg.threshold
        if acq_cfg.uses_band:
            grad = evaluator.gradient_mean_at(point)
            flag = flag and float(np.linalg.norm(grad)) <= acq_cfg.epsilon
        records.append(StepRecord(
            step=t, kind="bo", point=point, value=value,
            acquisition=float(acq[idx]), flagged=bool(flag),
            distance=truth_distance(point),
        ))
        if cfg.min_distance > 0:
            cut = cfg.min_distance**2 * (1.0 - _DIST_RTOL)
            mask &= np.sum((candidates - point) ** 2, axis=1) >= cut

    return RunTrace(
        steps=tuple(records),
        config=cfg,
        termination=termination,
        n_samples=evaluator.n_samples,
        jitter=evaluator.jitter,
    )
