"""Iterate records shared by all descent and fixed-point schemes."""

from __future__ import annotations

import csv
import io
import math
import threading
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from ..seqcore import FLOAT, Seq

Point = Any  # float for scalar schemes, numpy vector otherwise


@dataclass(slots=True)
class StepRecord:
    u: Point = None
    alpha: float = 0.0
    eps_slack: float = 0.0
    residual: float = 0.0
    halt: bool = False


# step(n, x_n) -> (x_{n+1}, record for step n)
Stepper = Callable[[int, Point], tuple[Point, StepRecord]]


def _norm(x: Point) -> float:
    return abs(x) if isinstance(x, float) else float(np.linalg.norm(x))


class Trajectory:
    """Iterates ``x_0, x_1, ...`` produced on demand by a stepper.

    ``ensure(n)`` runs the scheme until ``x_n`` exists; records for step ``k``
    describe the move from ``x_k`` to ``x_{k+1}``.  Once the stepper reports a
    halt the iterate is repeated and ``halt_index`` is set.
    """

    def __init__(
        self,
        x0: Point,
        step: Stepper,
        objective: Callable[[Point], float],
        x_star: Point,
        horizon: int = 0,
        name: str = "",
    ):
        self.name = name
        self.xs: list[Point] = [x0]
        self.records: list[StepRecord] = []
        self.halt_index: Optional[int] = None
        self._step = step
        self._objective = objective
        self.x_star = x_star
        self._fs: dict[int, float] = {}
        self._lock = threading.Lock()
        self.ensure(horizon)

    def __len__(self) -> int:
        return len(self.xs)

    def ensure(self, n: int) -> None:
        if len(self.xs) > n:
            return
        with self._lock:
            xs, records, step = self.xs, self.records, self._step
            for k in range(len(xs) - 1, n):
                x = xs[k]
                if self.halt_index is not None:
                    nxt, rec = x, StepRecord(u=records[-1].u, halt=True)
                else:
                    nxt, rec = step(k, x)
                    if rec.halt:
                        self.halt_index = k
                        nxt = x
                if not math.isfinite(nxt if type(nxt) is float else _norm(nxt)):
                    raise FloatingPointError(f"{self.name}: non-finite iterate at step {k + 1}")
                xs.append(nxt)
                records.append(rec)

    def x(self, n: int) -> Point:
        self.ensure(n)
        return self.xs[n]

    def record(self, n: int) -> StepRecord:
        self.ensure(n + 1)
        return self.records[n]

    def f(self, n: int) -> float:
        try:
            return self._fs[n]
        except KeyError:
            pass
        self.ensure(n)
        v = float(self._objective(self.xs[n]))
        with self._lock:
            return self._fs.setdefault(n, v)

    def dist(self, n: int) -> float:
        return _norm(self.x(n) - self.x_star)

    def f_seq(self, offset: float = 0.0) -> Seq:
        return Seq(lambda n: self.f(n) - offset, FLOAT, name=f"{self.name}.f")

    def dist_seq(self) -> Seq:
        return Seq(self.dist, FLOAT, name=f"{self.name}.dist")

    def to_csv(self, upto: int) -> str:
        """Rows ``n, f, dist, alpha, eps_slack, halt`` for ``n <= upto``."""
        self.ensure(upto + 1)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "f", "dist", "alpha", "eps_slack", "halt"])
        for n in range(upto + 1):
            rec = self.records[n]
            w.writerow([n, repr(self.f(n)), repr(self.dist(n)), repr(rec.alpha), repr(rec.eps_slack), int(rec.halt)])
        return buf.getvalue()
