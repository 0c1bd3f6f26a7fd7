"""Projected Riemannian subgradient method, the sublinear baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .problems import ProblemInstance
from .solver import Trace, zeta


@dataclass(frozen=True)
class BaselineConfig:
    """Step rule: ``step=None`` gives r / sqrt(zeta * t), a float gives a constant step."""

    max_queries: int
    step: Optional[float] = None

    def __post_init__(self):
        if self.max_queries < 1:
            raise ValueError("max_queries must be >= 1")
        if self.step is not None and not self.step > 0:
            raise ValueError("constant step must be positive")


@dataclass
class BaselineResult:
    x_best: np.ndarray
    f_best: float
    queries_used: int
    trace: Trace


def project_ball(instance: ProblemInstance, x):
    """Metric projection onto B(x_ref, r): pull x back along the geodesic toward x_ref."""
    spec = instance.spec
    d = float(spec.dist(instance.x_ref, x))
    if d <= instance.radius:
        return x
    return spec.exp(instance.x_ref, spec.log(instance.x_ref, x) * (instance.radius / d))


def run_baseline(instance: ProblemInstance, config: BaselineConfig, *,
                 keep_trace=True) -> BaselineResult:
    spec = instance.spec
    r = instance.radius
    z = zeta(r, spec.curvature)
    trace = Trace()
    x = instance.x_ref
    x_best, f_best = x, math.inf
    for t in range(1, config.max_queries + 1):
        res = instance.evaluate(x)
        if res.value < f_best:
            x_best, f_best = x, res.value
        if keep_trace:
            trace.append(t - 1, 0, t - 1, True, res.value, f_best)
        gn = float(spec.norm(res.g))
        if gn == 0:
            break
        eta = config.step if config.step is not None else r / math.sqrt(z * t)
        x = project_ball(instance, spec.exp(x, res.g * (-eta / gn)))
    return BaselineResult(x_best, f_best, t, trace)
