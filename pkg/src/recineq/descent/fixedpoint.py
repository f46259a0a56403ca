"""Krasnoselskii-Mann iteration, its Case II rates, and a scalar accretive scheme."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
from scipy.optimize import bisect

from ..certificate import Check
from ..ratecalc import StarInstance, case2_rate, case2b_rate
from ..seqcore import FLOAT, DivergenceRate, Number, Q, Seq, constant_divergence_rate, positive_rational
from .trajectory import StepRecord, Trajectory

MANN_CLAMP_FLOOR = Fraction(1, 10**6)


def _scalar_norm(x):
    return abs(x) if isinstance(x, (int, float)) else float(sum(v * v for v in x) ** 0.5)


def run_km(T: Callable, alpha: Seq, x0, horizon: int, x_star=0.0) -> Trajectory:
    """``x_{n+1} = (1 - alpha_n) x_n + alpha_n T x_n``; ``alpha_n`` must lie in ``[0, 1]``.

    The trajectory's ``f`` column is ``|x_n - x*|``.
    """

    const = alpha.constant_value
    if const is not None and not 0 <= const <= 1:
        raise ValueError(f"alpha = {const} is not in [0, 1]")
    a_const = None if const is None else float(const)

    def step(n: int, x):
        a = a_const
        if a is None:
            a = float(alpha(n))
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"alpha({n}) = {a} is not in [0, 1]")
        tx = T(x)
        # same recursion; this form keeps fixed points of T fixed in floating point
        nxt = tx if a == 1.0 else x + a * (tx - x)
        return nxt, StepRecord(alpha=a)

    x0 = float(x0) if isinstance(x0, (int, float, Fraction)) else x0
    if isinstance(x0, float) and isinstance(x_star, float):
        objective = lambda x: abs(x - x_star)  # noqa: E731
    else:
        objective = lambda x: _scalar_norm(x - x_star)  # noqa: E731
    return Trajectory(x0, step, objective, x_star, horizon, name="km")


def sine_omega(t: Fraction) -> Fraction:
    return t**3 / 16


def wc_rate_sine(eps: Number) -> int:
    """Rate for ``x_{n+1} = sin x_n`` from ``x_0 in (0, 1]``; equals ``ceil(256 / eps^3)``."""
    eps = positive_rational(eps, "eps")
    if eps > 1:
        raise ValueError("eps must lie in (0, 1]")
    return case2_rate(constant_divergence_rate(1), lambda _: 0, sine_omega, 1, 1, eps)


def sine_star_instance(traj: Trajectory) -> StarInstance:
    """``mu_n = |x_n|``, ``alpha = 1``, ``beta_n = |x_n|^3/8``, ``gamma = 0``."""
    return StarInstance(
        mu=Seq(lambda n: abs(traj.x(n)), FLOAT, name="mu"),
        alpha=Seq.constant(1.0, FLOAT),
        beta=Seq(lambda n: abs(traj.x(n)) ** 3 / 8, FLOAT, name="beta"),
        gamma=Seq.constant(0.0, FLOAT),
        c=Fraction(1),
        alpha_bar=Fraction(1),
    )


# ---------------------------------------------------------------------------
# power laws and the Mann rate


def _to_fraction(x: mpmath.mpf) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(int(man)) * Fraction(2) ** int(exp)


@dataclass(frozen=True)
class PowerLaw:
    """``psi(t) = coeff * t**exponent`` for rational ``coeff, exponent > 0``."""

    coeff: Fraction
    exponent: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff", positive_rational(self.coeff, "coeff"))
        object.__setattr__(self, "exponent", positive_rational(self.exponent, "exponent"))

    @property
    def exact(self) -> bool:
        return self.exponent.denominator == 1

    def __call__(self, t: float) -> float:
        return float(self.coeff) * float(t) ** float(self.exponent)

    def _power_iv(self, t: Fraction, power: Fraction):
        # interval arithmetic encloses the true value at any working precision
        base = mpmath.iv.mpf(t.numerator) / t.denominator
        return base ** (mpmath.iv.mpf(power.numerator) / power.denominator)

    def lower(self, t: Number) -> Fraction:
        """Rational lower bound on ``psi(t)``; exact for integer exponents."""
        t = Q(t)
        if self.exact:
            return self.coeff * t ** int(self.exponent)
        return self.coeff * _to_fraction(self._power_iv(t, self.exponent).a)

    def inverse_integral_upper(self, lo: Fraction, hi: Fraction) -> Fraction:
        """Rational upper bound on ``integral_lo^hi dt / psi(t)`` for ``exponent > 1``."""
        p = self.exponent
        scale = self.coeff * (p - 1)
        if self.exact:
            q = int(p) - 1
            return (1 / lo**q - 1 / hi**q) / scale
        diff = self._power_iv(lo, 1 - p) - self._power_iv(hi, 1 - p)
        return _to_fraction(diff.b) / scale


Sigma = Callable[[Fraction, Fraction], int]


@dataclass(frozen=True)
class MannRate:
    """A Mann rate with the intermediate quantities that produced it."""

    value: int
    sigma_arg: Fraction
    integral_arg: Fraction
    clamped: bool


def mann_rate_details(
    psi: PowerLaw,
    sigma: Sigma,
    r: DivergenceRate,
    c: Number,
    d: Number,
    alpha_bar: Number,
    eps: Number,
    floor: Number = MANN_CLAMP_FLOOR,
) -> MannRate:
    """``r(sigma(min(psi(eps/2d), eps/alpha_bar) / 2d, c), 2d * int_{eps/2d}^c dt/psi) + 1``.

    When ``eps/2d >= c`` the integral is empty or inverted; the second argument
    is then replaced by ``floor`` and the result is flagged as clamped.
    """
    if psi.exponent <= 1:
        raise ValueError("mann_rate needs a power law with exponent > 1")
    c, d, ab = positive_rational(c, "c"), positive_rational(d, "d"), positive_rational(alpha_bar, "alpha_bar")
    eps, floor = positive_rational(eps, "eps"), positive_rational(floor, "floor")
    lo = eps / (2 * d)
    delta = min(psi.lower(lo), eps / ab) / (2 * d)
    if lo < c:
        x, clamped = 2 * d * psi.inverse_integral_upper(lo, c), False
        if x < floor:
            x, clamped = floor, True
    else:
        x, clamped = floor, True
    return MannRate(r(sigma(delta, c), x) + 1, delta, x, clamped)


def mann_rate(psi, sigma, r, c, d, alpha_bar, eps, floor: Number = MANN_CLAMP_FLOOR) -> int:
    return mann_rate_details(psi, sigma, r, c, d, alpha_bar, eps, floor).value


def sigma_zero(delta: Fraction, b: Fraction) -> int:
    """Rate for ``l_n = 0``: every index works."""
    return 0


# ---------------------------------------------------------------------------
# implicit scheme for a uniformly accretive scalar operator


def run_accretive_implicit(
    phi_acc: PowerLaw, alpha: Seq, x0: float, horizon: int, solver_tol: float = 1e-12
) -> Trajectory:
    """Solve ``x_{n+1} + alpha_n A(x_{n+1}) = x_n`` with ``A(x) = phi_acc(|x|) sign(x)``.

    Each step is a bisection on a bracket around ``[min(x_n, 0), max(x_n, 0)]``;
    the record's ``residual`` is the absolute residual of the accepted root.
    """

    def A(y: float) -> float:
        return math.copysign(phi_acc(abs(y)), y) if y else 0.0

    def step(n: int, x: float):
        a = float(alpha(n))
        if not a > 0:
            raise ValueError(f"alpha({n}) = {a} must be positive")
        if x == 0.0:
            return 0.0, StepRecord(alpha=a)
        F = lambda y: y + a * A(y) - x  # noqa: E731
        lo, hi = min(x, 0.0), max(x, 0.0)
        for _ in range(64):
            if F(lo) <= 0.0 <= F(hi):
                break
            lo, hi = lo - (hi - lo), hi + (hi - lo)
        else:
            raise RuntimeError(f"step {n}: no sign change found around x = {x}")
        y = bisect(F, lo, hi, xtol=solver_tol * 1e-3, rtol=4 * 2.0**-52, maxiter=400)
        res = abs(F(y))
        if res > solver_tol:
            raise RuntimeError(f"step {n}: residual {res} exceeds {solver_tol}")
        return y, StepRecord(alpha=a, residual=res)

    return Trajectory(float(x0), step, abs, 0.0, horizon, name="accretive")


def accretive_star_instance(traj: Trajectory, phi_acc: PowerLaw, K: Number = 1) -> StarInstance:
    """``mu_n = |x_n|``, ``beta_n = phi_acc(|x_{n+1}|)/K``, ``gamma = 0``."""
    K = float(positive_rational(K, "K"))
    return StarInstance(
        mu=Seq(lambda n: abs(traj.x(n)), FLOAT, name="mu"),
        alpha=Seq(lambda n: traj.record(n).alpha, FLOAT, name="alpha"),
        beta=Seq(lambda n: phi_acc(abs(traj.x(n + 1))) / K, FLOAT, name="beta"),
        gamma=Seq.constant(0.0, FLOAT),
    )


def accretive_rate(phi_acc: PowerLaw, K: Number, c: Number, alpha_const: Number, eps: Number) -> int:
    """Rate for ``|x_n| -> 0`` with constant steps: modulus ``phi_acc(eps)/(2K)``, ``phi == 0``."""
    K = positive_rational(K, "K")
    omega = lambda e: phi_acc.lower(e) / (2 * K)  # noqa: E731
    return case2b_rate(constant_divergence_rate(alpha_const), lambda _: 0, omega, c, eps)


def check_tail_small(traj: Trajectory, start: int, length: int, eps: Number, tol: float = 0.0) -> Check:
    """``|x_n - x*| <= eps + tol`` for every ``n`` in ``[start, start + length]``."""
    chk = Check("tail-within-eps", checked_range=(start, start + length))
    e = float(Q(eps)) + tol
    for n in range(start, start + length + 1):
        if traj.f(n) > e:
            chk.fail({"n": n, "value": traj.f(n), "eps": Q(eps)})
    return chk
