"""Gradient-descent driver for the 2D embedding.

Joint affinities are boosted by the early-exaggeration factor for the
first phase of the optimization, momentum switches from its initial to
its final value when that phase ends, and per-parameter gains adapt the
step size. The KL objective is recorded every 50 iterations.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import OptimizationError, ParameterError
from .affinities import joint_affinities
from .gradient import _kl_csr, bh_gradient_and_z
from .quadtree import QuadTree

KL_RECORD_EVERY = 50
MIN_GAIN = 0.01


@dataclass(frozen=True)
class TsneConfig:
    """Optimizer settings.

    ``iterations`` counts every gradient update, including the
    ``exaggeration_iters`` spent with boosted affinities at the start.
    """

    perplexity: float = 30.0
    early_exaggeration: float = 12.0
    learning_rate: float = 200.0
    iterations: int = 2500
    theta: float = 0.5
    exaggeration_iters: int = 250
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.perplexity < 1:
            raise ParameterError(f"perplexity must be >= 1, got {self.perplexity}")
        if self.early_exaggeration <= 0 or self.learning_rate <= 0:
            raise ParameterError("early_exaggeration and learning_rate must be positive")
        if self.iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.iterations}")
        if not 0.0 <= self.theta <= 1.0:
            raise ParameterError(f"theta must be in [0, 1], got {self.theta}")
        if self.exaggeration_iters < 0:
            raise ParameterError("exaggeration_iters must be >= 0")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TsneConfig":
        return cls(**d)


@dataclass
class Embedding:
    """2D coordinates aligned with dataset clip order, plus the KL trace."""

    points: np.ndarray
    kl_trace: list[tuple[int, float]] = field(default_factory=list)
    config: TsneConfig | None = None

    def to_dict(self) -> dict:
        return {
            "points": [[float(x), float(y)] for x, y in self.points],
            "kl_trace": [[int(i), float(k)] for i, k in self.kl_trace],
            "config": self.config.to_dict() if self.config else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Embedding":
        return cls(
            points=np.asarray(d["points"], dtype=np.float64),
            kl_trace=[(int(i), float(k)) for i, k in d.get("kl_trace", [])],
            config=TsneConfig.from_dict(d["config"]) if d.get("config") else None,
        )

    def kl_at(self, iteration: int) -> float:
        for it, kl in self.kl_trace:
            if it == iteration:
                return kl
        raise KeyError(f"no KL recorded at iteration {iteration}")


def run_tsne(
    features: np.ndarray,
    config: TsneConfig | None = None,
    progress: Callable[[int, int], None] | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> Embedding:
    """Embed feature rows into 2D; deterministic for a fixed seed."""
    config = config or TsneConfig()
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]

    affinity = joint_affinities(x, config.perplexity, seed=config.seed)
    p_true = affinity.probabilities
    p_run = p_true * config.early_exaggeration if config.exaggeration_iters > 0 else p_true

    rng = np.random.default_rng(config.seed)
    y = rng.normal(scale=1e-4, size=(n, 2))
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    trace: list[tuple[int, float]] = []

    for it in range(1, config.iterations + 1):
        if should_stop is not None and should_stop():
            raise OptimizationError(f"optimization cancelled at iteration {it}", trace)
        if it == config.exaggeration_iters + 1:
            p_run = p_true
        momentum = (
            config.momentum_initial if it <= config.exaggeration_iters
            else config.momentum_final
        )

        grad, _ = bh_gradient_and_z(p_run, y, config.theta)

        flipped = np.sign(grad) != np.sign(velocity)
        gains = np.where(flipped, gains + 0.2, gains * 0.8)
        np.maximum(gains, MIN_GAIN, out=gains)
        velocity = momentum * velocity - config.learning_rate * (gains * grad)
        y = y + velocity
        y -= y.mean(axis=0)

        if not np.all(np.isfinite(y)):
            raise OptimizationError(f"coordinates diverged at iteration {it}", trace)

        if it % KL_RECORD_EVERY == 0 or it == config.iterations:
            _, z = QuadTree(y).repulsion(config.theta)
            if z <= 0 or not np.isfinite(z):
                raise OptimizationError(f"KL diverged at iteration {it}", trace)
            kl = float(_kl_csr(p_true.indptr, p_true.indices.astype(np.int64),
                               p_true.data, y, z))
            trace.append((it, kl))
            if not np.isfinite(kl):
                raise OptimizationError(f"KL diverged at iteration {it}", trace)
        if progress is not None:
            progress(it, config.iterations)

    return Embedding(points=y, kl_trace=trace, config=config)
