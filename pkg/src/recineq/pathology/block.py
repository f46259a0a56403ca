"""Padding a sequence into slope-bounded blocks, and the matching ``mu``.

Given ``s``, step sizes ``alpha`` and ``theta``, block ``n`` starts at ``l(n)``
and walks linearly from ``s_n`` toward ``s_{n+1}`` in steps of
``theta * alpha_k``, so that ``|beta_k - beta_{k+1}| <= theta * alpha_k``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction

from ..certificate import Certificate, Check, from_checks
from ..seqcore import Number, Q, Seq, positive_rational

DEFAULT_SEARCH_CAP = 10**6


class BlockSearchError(RuntimeError):
    """The least-k search for ``l(n+1)`` exceeded its cap."""

    def __init__(self, n: int, cap: int):
        super().__init__(f"block {n}: no k within {cap} summands reaches the threshold")
        self.n = n
        self.cap = cap


class BlockPreconditionError(ValueError):
    def __init__(self, what: str, index: int):
        super().__init__(f"{what} (first offending index {index})")
        self.what = what
        self.index = index


def _sgn(x: Fraction) -> int:
    return (x > 0) - (x < 0)


@dataclass
class BlockConstruction:
    """Lazily extended padding of ``s``; ``l`` and ``beta`` grow on demand."""

    s: Seq
    alpha: Seq
    theta: Fraction
    search_cap: int = DEFAULT_SEARCH_CAP
    l_values: list[int] = field(default_factory=lambda: [0])
    beta_values: list[Fraction] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def _extend_block(self) -> None:
        n = len(self.l_values) - 1
        start = self.l_values[n]
        sn, sn1 = self.s(n), self.s(n + 1)
        target = abs(sn1 - sn) / self.theta
        sign = _sgn(sn1 - sn)
        acc = Fraction(0)
        vals = [sn]
        k = start
        while True:
            acc += self.alpha(k)
            if acc >= target:
                break
            k += 1
            if k - start >= self.search_cap:
                raise BlockSearchError(n, self.search_cap)
            # beta_k = s_n + sgn * theta * sum_{i=l(n)}^{k-1} alpha_i
            vals.append(sn + sign * self.theta * acc)
        self.beta_values.extend(vals)
        self.l_values.append(k + 1)

    def ensure_beta(self, k: int) -> None:
        with self._lock:
            while len(self.beta_values) <= k:
                self._extend_block()

    def ensure_blocks(self, n: int) -> None:
        with self._lock:
            while len(self.l_values) <= n:
                self._extend_block()

    def l(self, n: int) -> int:
        self.ensure_blocks(n)
        return self.l_values[n]

    def beta_at(self, k: int) -> Fraction:
        self.ensure_beta(k)
        return self.beta_values[k]

    @property
    def beta(self) -> Seq:
        return Seq(self.beta_at, name="beta")

    def blocks_covering(self, horizon: int) -> int:
        """Least ``B`` with ``l(B) > horizon``; blocks ``0..B-1`` cover ``[0, horizon]``."""
        self.ensure_beta(horizon)
        B = 0
        while self.l(B) <= horizon:
            B += 1
        return B


def block_padding(
    s: Seq, alpha: Seq, theta: Number, horizon: int, search_cap: int = DEFAULT_SEARCH_CAP
) -> BlockConstruction:
    """Build ``l`` and ``beta`` at least up to index ``horizon``."""
    bc = BlockConstruction(s, alpha, positive_rational(theta, "theta"), search_cap)
    bc.ensure_beta(horizon)
    return bc


def check_block_invariants(bc: BlockConstruction, horizon: int) -> Certificate:
    B = bc.blocks_covering(horizon)
    l_inc = Check("l-strictly-increasing", checked_range=(0, B))
    anchor = Check("beta-at-block-start", checked_range=(0, B - 1))
    between = Check("beta-between-endpoints", checked_range=(0, horizon))
    for n in range(B):
        if not bc.l(n + 1) > bc.l(n) or bc.l(n) < n:
            l_inc.fail({"n": n, "l_n": bc.l(n), "l_n1": bc.l(n + 1)})
        if bc.beta_at(bc.l(n)) != bc.s(n):
            anchor.fail({"n": n, "beta": bc.beta_at(bc.l(n)), "s": bc.s(n)})
        lo, hi = sorted((bc.s(n), bc.s(n + 1)))
        for k in range(bc.l(n), min(bc.l(n + 1), horizon + 1)):
            if not lo <= bc.beta_at(k) <= hi:
                between.fail({"k": k, "block": n, "beta": bc.beta_at(k)})
    slope = Check("slope-bounded", checked_range=(0, horizon - 1))
    for k in range(horizon):
        if abs(bc.beta_at(k) - bc.beta_at(k + 1)) > bc.theta * bc.alpha(k):
            slope.fail({"k": k, "diff": abs(bc.beta_at(k) - bc.beta_at(k + 1))})
    return from_checks("block-invariants", [l_inc, anchor, between, slope])


def summability_bound(bc: BlockConstruction, horizon: int, c: Number, alpha_bar: Number) -> tuple[Fraction, Fraction]:
    """``(sum alpha_i beta_i, 2(c/theta + alpha_bar) sum s_n)`` over the blocks covering ``[0, horizon]``.

    The sums run over ``i < l(B)`` and ``n <= B`` for ``B = blocks_covering(horizon)``.
    """
    B = bc.blocks_covering(horizon)
    lhs = sum((bc.alpha(i) * bc.beta_at(i) for i in range(bc.l(B))), Fraction(0))
    rhs = 2 * (Q(c) / bc.theta + Q(alpha_bar)) * sum((bc.s(n) for n in range(B + 1)), Fraction(0))
    return lhs, rhs


def nu_zero() -> Seq:
    """The branch used when ``sum alpha_i beta_i`` has no computable rate."""
    return Seq.constant(0)


def nu_from_increasing(c: Number, a: Seq) -> Seq:
    """``nu_n = c - a_n`` for increasing ``a`` bounded by ``c``; the other branch."""
    c = Q(c)
    return Seq(lambda n: c - a(n), name=f"{c}-{a.name}")


def block_mu(bc: BlockConstruction, L: Number, nu: Seq, horizon: int) -> Seq:
    """``mu_0 = L + nu_0`` and ``mu_{n+1} = L + nu_{n+1} - sum_{i<=n} alpha_i beta_i``.

    Raises :class:`BlockPreconditionError` if ``nu`` is not nonincreasing and
    nonnegative on ``[0, horizon]`` or if ``L`` is below the partial sum.
    """
    L = positive_rational(L, "L")
    for n in range(horizon + 1):
        if nu(n) < 0:
            raise BlockPreconditionError("nu must be nonnegative", n)
        if n and nu(n) > nu(n - 1):
            raise BlockPreconditionError("nu must be nonincreasing", n)
    weighted = Seq(lambda i: bc.alpha(i) * bc.beta_at(i), name="alpha*beta")
    if weighted.prefix(horizon + 1) > L:
        k = next(i for i in range(horizon + 1) if weighted.prefix(i + 1) > L)
        raise BlockPreconditionError("L is below the partial sum of alpha_i beta_i", k)
    return Seq(lambda n: L + nu(n) - weighted.prefix(n), name="mu")


def check_block_mu(bc: BlockConstruction, mu: Seq, horizon: int) -> Certificate:
    nonneg = Check("mu-nonnegative", checked_range=(0, horizon))
    dec = Check("mu-decrease", checked_range=(0, horizon - 1))
    for n in range(horizon + 1):
        if mu(n) < 0:
            nonneg.fail({"n": n, "mu": mu(n)})
        if n < horizon and mu(n + 1) > mu(n) - bc.alpha(n) * bc.beta_at(n):
            dec.fail({"n": n})
    return from_checks("block-mu", [nonneg, dec])
