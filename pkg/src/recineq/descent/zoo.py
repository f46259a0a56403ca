"""Named demo problems, each a ready-to-run trajectory with its declared constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from ..seqcore import FLOAT, Seq
from .fixedpoint import PowerLaw, run_accretive_implicit, run_km
from .problems import ConvexProblem, l1_box, quadratic
from .subgradient import (
    AbstractSetup,
    projective_constants,
    quadratic_constants,
    run_gradient_descent,
    run_projected_subgradient,
)
from .trajectory import Trajectory

HARMONIC = Seq(lambda n: Fraction(1, n + 1), name="1/(n+1)")
SHIFTED_HARMONIC = Seq(lambda n: Fraction(1, n + 2), name="1/(n+2)")


@dataclass
class ZooEntry:
    name: str
    description: str
    build: Callable[[int], Trajectory]
    params: dict[str, Any] = field(default_factory=dict)


def l1_box_setup(horizon: int = 0) -> AbstractSetup:
    """``|x|_1`` on ``[-1,1]^5`` from ``(1,...,1)``; ``alpha_n = 1/(n+1)``, no slack.

    Declared constants: ``rho = 3``, ``mu_slack = 1``, ``L = 2 >= pi^2/6``, ``K = 5``.
    """
    prob = l1_box(5)
    traj = run_projected_subgradient(prob, HARMONIC, Seq.constant(0), np.ones(5), horizon, mu_slack=1)
    consts = projective_constants(3, 1, 2, 5)
    b = HARMONIC.map(lambda a: 1 * a, name="mu*alpha")
    d = HARMONIC.map(lambda a: 2 * consts.a * a * a, name="2*rho*alpha^2")
    return AbstractSetup(traj, prob, consts, b, HARMONIC, d, HARMONIC)


def quadratic_setup(horizon: int = 0) -> AbstractSetup:
    """``|x|^2/2`` from ``(3, 4)`` by exact gradient steps ``alpha_n = 1/(n+2)``.

    ``|grad f(x_n)| = |x_n| <= 5``, ``K = 25`` and ``sum alpha_n^2 <= 1``.
    """
    prob: ConvexProblem = quadratic(2, 5.0)
    traj = run_gradient_descent(prob, SHIFTED_HARMONIC, np.array([3.0, 4.0]), horizon)
    consts = quadratic_constants(5, 25, 1)
    zero = Seq.constant(0)
    c = SHIFTED_HARMONIC.map(lambda a: 5 * a, name="5*alpha")
    return AbstractSetup(traj, prob, consts, zero, c, zero, SHIFTED_HARMONIC)


SQUARE = PowerLaw(Fraction(1), Fraction(2))

ZOO: dict[str, ZooEntry] = {
    e.name: e
    for e in [
        ZooEntry("l1-box-5", "projected subgradient on |x|_1 over [-1,1]^5", lambda h: l1_box_setup(h).traj),
        ZooEntry("quadratic-2", "gradient descent on |x|^2/2 in the plane", lambda h: quadratic_setup(h).traj),
        ZooEntry(
            "sine-km",
            "x_{n+1} = sin x_n from x_0 = 1",
            lambda h: run_km(math.sin, Seq.constant(1.0, FLOAT), 1.0, h),
        ),
        ZooEntry(
            "accretive-square",
            "implicit steps for A(x) = x|x| from x_0 = 1, alpha = 1",
            lambda h: run_accretive_implicit(SQUARE, Seq.constant(1.0, FLOAT), 1.0, h),
        ),
    ]
}


def zoo_trajectory(name: str, horizon: int) -> Trajectory:
    try:
        entry = ZOO[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; known: {', '.join(ZOO)}") from None
    return entry.build(horizon)
