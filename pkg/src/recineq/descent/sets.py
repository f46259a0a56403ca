"""Closed convex sets with closed-form Euclidean projections."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi) or any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box needs lo <= hi coordinatewise")

    @classmethod
    def cube(cls, dim: int, half_width: float) -> "Box":
        return cls((-half_width,) * dim, (half_width,) * dim)


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")


@dataclass(frozen=True)
class Halfspace:
    """``{x : <a, x> <= b}``."""

    a: tuple[float, ...]
    b: float

    def __post_init__(self) -> None:
        if not any(self.a):
            raise ValueError("halfspace normal must be nonzero")


ConvexSet = Union[Box, Ball, Halfspace]


def project(C: ConvexSet, z: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``z`` onto ``C``."""
    z = np.asarray(z, dtype=float)
    if isinstance(C, Box):
        return np.clip(z, C.lo, C.hi)
    if isinstance(C, Ball):
        c = np.asarray(C.center, dtype=float)
        v = z - c
        norm = float(np.linalg.norm(v))
        return z.copy() if norm <= C.radius else c + v * (C.radius / norm)
    if isinstance(C, Halfspace):
        a = np.asarray(C.a, dtype=float)
        excess = float(a @ z) - C.b
        return z - max(0.0, excess / float(a @ a)) * a
    raise TypeError(f"unknown set descriptor {C!r}")


def contains(C: ConvexSet, x: np.ndarray, tol: float = 1e-12) -> bool:
    x = np.asarray(x, dtype=float)
    if isinstance(C, Box):
        return bool(np.all(x >= np.asarray(C.lo) - tol) and np.all(x <= np.asarray(C.hi) + tol))
    if isinstance(C, Ball):
        return float(np.linalg.norm(x - np.asarray(C.center))) <= C.radius + tol
    if isinstance(C, Halfspace):
        return float(np.asarray(C.a) @ x) <= C.b + tol
    raise TypeError(f"unknown set descriptor {C!r}")


def sample_points(C: ConvexSet, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Points of ``C`` for finite checks: random draws pushed into ``C`` by projection."""
    if isinstance(C, Box):
        lo, hi = np.asarray(C.lo), np.asarray(C.hi)
        lo_f, hi_f = np.where(np.isfinite(lo), lo, -10.0), np.where(np.isfinite(hi), hi, 10.0)
        return [rng.uniform(lo_f, hi_f) for _ in range(count)]
    if isinstance(C, Ball):
        c = np.asarray(C.center, dtype=float)
        return [project(C, c + rng.normal(size=c.size) * C.radius) for _ in range(count)]
    a = np.asarray(C.a, dtype=float)
    return [project(C, rng.normal(size=a.size) * 5.0) for _ in range(count)]
