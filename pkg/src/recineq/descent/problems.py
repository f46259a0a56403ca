"""Convex test problems with (epsilon-)subgradient oracles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..certificate import Check
from .sets import Ball, Box, ConvexSet, contains

Vector = np.ndarray
Oracle = Callable[[Vector, float], Vector]


@dataclass(frozen=True)
class ConvexProblem:
    """``min f`` over ``C`` with a known minimizer.

    ``oracle(x, eps)`` returns some ``u`` in the ``eps``-subdifferential of
    ``f`` at ``x``; ``rho > 1`` bounds ``|u|`` along trajectories.
    """

    name: str
    dim: int
    f: Callable[[Vector], float]
    oracle: Oracle
    C: ConvexSet
    x_star: Vector
    f_star: float
    rho: float

    def __post_init__(self) -> None:
        if not self.rho > 1:
            raise ValueError("rho must exceed 1")
        if np.shape(self.x_star) != (self.dim,):
            raise ValueError("x_star has the wrong dimension")
        if not contains(self.C, self.x_star):
            raise ValueError("x_star must lie in C")


def l1_box(dim: int = 5, rho: float = 3.0) -> ConvexProblem:
    """``f = |x|_1`` on ``[-1, 1]^dim``; the oracle picks 0 at zero coordinates."""
    return ConvexProblem(
        name=f"l1-box-{dim}",
        dim=dim,
        f=lambda x: float(np.abs(x).sum()),
        oracle=lambda x, eps: np.sign(x),
        C=Box.cube(dim, 1.0),
        x_star=np.zeros(dim),
        f_star=0.0,
        rho=rho,
    )


def quadratic(dim: int = 2, radius: float = 5.0) -> ConvexProblem:
    """``f = |x|^2 / 2`` with its exact gradient; ``C`` is the ball of the given radius."""
    return ConvexProblem(
        name=f"quadratic-{dim}",
        dim=dim,
        f=lambda x: 0.5 * float(x @ x),
        oracle=lambda x, eps: np.array(x, dtype=float),
        C=Ball((0.0,) * dim, radius),
        x_star=np.zeros(dim),
        f_star=0.0,
        rho=radius,
    )


def check_oracle(
    prob: ConvexProblem,
    points: list[Vector],
    slacks: list[float],
    gradients: list[Vector],
    ys: list[Vector],
    tol: float = 1e-12,
) -> Check:
    """``f(y) - f(x) >= <u, y - x> - eps`` for each triple and each sample ``y``, and ``|u| <= rho``."""
    chk = Check("epsilon-subgradient", checked_range=(0, len(points) - 1))
    for n, (x, eps, u) in enumerate(zip(points, slacks, gradients)):
        if float(np.linalg.norm(u)) > prob.rho + tol:
            chk.fail({"n": n, "norm_u": float(np.linalg.norm(u)), "rho": prob.rho})
        fx = prob.f(x)
        for y in ys:
            gap = prob.f(y) - fx - float(u @ (y - x)) + eps
            if gap < -tol:
                chk.fail({"n": n, "y": [float(v) for v in y], "gap": gap})
                break
    return chk
