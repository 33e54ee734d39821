"""Regularization path: fit along a decreasing penalty grid, rank by entry.

A feature enters the path at the first grid step where its weight is
nonzero; features are ranked by entry step, with ties sharing the same
rank. Warm starts carry each solution to the next step; they change
nothing semantically because every fit is converged to tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .featurize import DesignMatrix
from .sparse_glm import FitProblem, FitResult, SolverConfig, fit

DEFAULT_ZERO_EPS = 1e-9


class DegenerateLabelsError(Exception):
    """All labels agree: no contrastive signal to rank features by."""


@dataclass(frozen=True)
class PathConfig:
    """Penalty grid: k+1 values from lambda_start down to lambda_end."""

    k: int = 100
    lambda_start: float = 0.1
    lambda_end: float = 0.001
    spacing: str = "linear"
    zero_eps: float = DEFAULT_ZERO_EPS

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not (self.lambda_start > self.lambda_end > 0):
            raise ValueError(
                "need lambda_start > lambda_end > 0, got "
                f"{self.lambda_start} and {self.lambda_end}"
            )
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.zero_eps <= 0:
            raise ValueError(f"zero_eps must be > 0, got {self.zero_eps}")


def lambda_grid(config: PathConfig) -> np.ndarray:
    """Strictly decreasing grid with exact endpoints."""
    if config.spacing == "linear":
        return np.linspace(config.lambda_start, config.lambda_end, config.k + 1)
    return np.geomspace(config.lambda_start, config.lambda_end, config.k + 1)


def nonzero_features(result: FitResult, zero_eps: float = DEFAULT_ZERO_EPS) -> set[int]:
    """Feature ids with |weight| above the numerical-zero guard.

    Coordinate-descent soft thresholding produces exact zeros, so this is
    a guard, not a heuristic.
    """
    return set(np.flatnonzero(np.abs(result.weights) > zero_eps).tolist())


class RankGroup(NamedTuple):
    rank: int
    entry_step: int
    feature_ids: tuple[int, ...]


@dataclass
class PathResult:
    lambdas: np.ndarray
    fits: list[FitResult]
    entry_steps: dict[int, int]
    ranking: tuple[RankGroup, ...]
    all_converged: bool

    @property
    def selected_features(self) -> tuple[int, ...]:
        return tuple(sorted(self.entry_steps))

    def rank_of(self, feature_id: int) -> int:
        for group in self.ranking:
            if feature_id in group.feature_ids:
                return group.rank
        raise KeyError(f"feature {feature_id} never entered the path")

    def step_summary(self) -> list[dict]:
        """Per-step digest for reports: penalty, active count, convergence."""
        return [
            {
                "step": i,
                "lam": float(self.lambdas[i]),
                "n_active": len(nonzero_features(result)),
                "converged": result.converged,
            }
            for i, result in enumerate(self.fits)
        ]


def run_path(
    matrix: DesignMatrix,
    config: PathConfig | None = None,
    solver: SolverConfig | None = None,
) -> PathResult:
    """Fit every grid step with warm starts and rank features by entry.

    Non-convergence at a step is recorded on that step's fit and clears
    all_converged; the path is still returned.
    """
    config = config or PathConfig()
    solver = solver or SolverConfig()
    labels = np.unique(matrix.labels)
    if labels.size < 2:
        raise DegenerateLabelsError(
            "no contrastive signal: every instance has the same label"
        )
    lambdas = lambda_grid(config)
    fits: list[FitResult] = []
    warm: tuple[np.ndarray, float] | None = None
    for lam in lambdas:
        result = fit(
            FitProblem(
                matrix=matrix,
                lam=float(lam),
                tolerance=solver.tolerance,
                max_iters=solver.max_iters,
                warm_start=warm,
            )
        )
        fits.append(result)
        warm = (result.weights.copy(), result.intercept)

    entry_steps: dict[int, int] = {}
    for step, result in enumerate(fits):
        for feature_id in nonzero_features(result, config.zero_eps):
            entry_steps.setdefault(feature_id, step)

    by_step: dict[int, list[int]] = {}
    for feature_id, step in entry_steps.items():
        by_step.setdefault(step, []).append(feature_id)
    groups = []
    for rank, step in enumerate(sorted(by_step), start=1):
        members = by_step[step]
        weights_at_entry = fits[step].weights
        members.sort(key=lambda f: (-abs(weights_at_entry[f]), f))
        groups.append(RankGroup(rank=rank, entry_step=step, feature_ids=tuple(members)))

    return PathResult(
        lambdas=lambdas,
        fits=fits,
        entry_steps=entry_steps,
        ranking=tuple(groups),
        all_converged=all(r.converged for r in fits),
    )
