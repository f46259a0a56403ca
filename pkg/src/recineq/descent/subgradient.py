"""Projected subgradient descent and the abstract gradient-method conditions.

A gradient-like method ``x_n`` with "gradients" ``u_n`` and steps ``alpha_n``
yields an instance of the recursive inequality with

    mu_n    = (a/2) |x_n - x*|^2
    beta_n  = f(x_n) - f*
    gamma_n = a c_n^2 / 2 + alpha_n b_n + d_n

whenever the six conditions checked by :func:`check_abstract_conditions` hold.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from ..certificate import Certificate, Check, Verdict, from_checks
from ..ratecalc import StarInstance, g_tilde
from ..seqcore import FLOAT, Counterexample, DivergenceRate, Number, Q, Seq, find_metastable_witness, positive_rational
from .problems import ConvexProblem
from .sets import contains, project, sample_points
from .trajectory import StepRecord, Trajectory

DEFAULT_TOL = 1e-9


def run_projected_subgradient(
    prob: ConvexProblem,
    alpha: Seq,
    eps_slack: Seq,
    x0,
    horizon: int,
    mu_slack: Number | None = None,
) -> Trajectory:
    """``x_{n+1} = P_C(x_n - (alpha_n / nu_n) u_n)`` with ``nu_n = max(1, |u_n|)``.

    The run halts (and repeats its last iterate) when the oracle returns 0.
    If ``mu_slack`` is given, ``eps_slack(n) <= mu_slack * alpha(n)`` is
    enforced at every step.
    """
    x0 = np.asarray(x0, dtype=float)
    if not contains(prob.C, x0):
        raise ValueError("x0 must lie in C")
    mu = None if mu_slack is None else float(Q(mu_slack))

    def step(n: int, x: np.ndarray) -> tuple[np.ndarray, StepRecord]:
        a, eps = float(alpha(n)), float(eps_slack(n))
        if mu is not None and eps > mu * a:
            raise ValueError(f"eps_slack({n}) = {eps} exceeds mu_slack * alpha({n}) = {mu * a}")
        u = np.asarray(prob.oracle(x, eps), dtype=float)
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(f"oracle returned a non-finite vector at step {n}")
        rec = StepRecord(u=u, alpha=a, eps_slack=eps)
        if not np.any(u):
            rec.halt = True
            return x, rec
        nu = max(1.0, float(np.linalg.norm(u)))
        return project(prob.C, x - (a / nu) * u), rec

    return Trajectory(x0, step, prob.f, prob.x_star, horizon, name=prob.name)


def run_gradient_descent(prob: ConvexProblem, alpha: Seq, x0, horizon: int) -> Trajectory:
    """Plain ``x_{n+1} = x_n - alpha_n u_n`` with the oracle at slack 0 (no projection)."""
    x0 = np.asarray(x0, dtype=float)

    def step(n: int, x: np.ndarray) -> tuple[np.ndarray, StepRecord]:
        a = float(alpha(n))
        u = np.asarray(prob.oracle(x, 0.0), dtype=float)
        return x - a * u, StepRecord(u=u, alpha=a)

    return Trajectory(x0, step, prob.f, prob.x_star, horizon, name=prob.name)


# ---------------------------------------------------------------------------
# constants and the metastability bound


@dataclass(frozen=True)
class GradientConstants:
    """Constants of the abstract framework.

    ``b, c, d`` bound ``sum alpha_i b_i``, ``sum c_i^2`` and ``sum d_i``;
    ``K`` bounds ``|x_0 - x*|^2``; ``p`` bounds ``|u_n|``.
    """

    a: Fraction
    p: Fraction
    theta: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    K: Fraction
    e: Fraction


def abstract_constants(a, p, theta, b, c, d, K) -> GradientConstants:
    """Fill in ``e = a(c+K)/2 + b + d``."""
    a, p, theta, K = (positive_rational(v, n) for v, n in ((a, "a"), (p, "p"), (theta, "theta"), (K, "K")))
    b, c, d = Q(b), Q(c), Q(d)
    if min(b, c, d) < 0:
        raise ValueError("b, c, d must be nonnegative")
    return GradientConstants(a, p, theta, b, c, d, K, a * (c + K) / 2 + b + d)


def projective_constants(rho: Number, mu: Number, L: Number, K: Number) -> GradientConstants:
    """Constants for projected subgradient descent.

    ``(a, b, c, d, p, theta) = (rho, mu L, L, 2 rho L, rho, rho + mu)``, so that
    ``e = rho(L+K)/2 + (mu + 2 rho) L``.  ``L`` bounds ``sum alpha_i^2`` and
    ``mu`` is the slack constant with ``eps_n <= mu alpha_n``.
    """
    rho, mu = Q(rho), positive_rational(mu, "mu")
    if rho <= 1:
        raise ValueError("rho must exceed 1")
    L, K = Q(L), positive_rational(K, "K")
    if L < 0:
        raise ValueError("L must be nonnegative")
    return abstract_constants(rho, rho, rho + mu, mu * L, L, 2 * rho * L, K)


def quadratic_constants(grad_bound: Number, K: Number, alpha_sq_sum: Number) -> GradientConstants:
    """Plain gradient descent with ``|grad f(x_n)| <= G``: ``a = 1``, ``c_n = G alpha_n``, ``theta = G^2``."""
    G = positive_rational(grad_bound, "grad_bound")
    return abstract_constants(1, G, G * G, 0, G * G * Q(alpha_sq_sum), 0, K)


def gradient_meta_bound(e: Number, theta: Number, r: DivergenceRate, eps: Number, g: Counterexample) -> int:
    """Iterate ``n -> r(n + g(n), eps/(2 theta)) + 1`` from 0, ``ceil(4 theta e / eps^2)`` times."""
    e, theta, eps = positive_rational(e, "e"), positive_rational(theta, "theta"), positive_rational(eps, "eps")
    x = eps / (2 * theta)
    n = 0
    for _ in range(math.ceil(4 * theta * e / (eps * eps))):
        n = r(n + g(n), x) + 1
    return n


# ---------------------------------------------------------------------------
# the six conditions


CONDITION_NAMES = (
    "minimizer",  # (i)   f(x*) <= f(x_n)
    "gradient",  # (ii)  f(x_n) - f(y) <= <u_n, x_n - y> + b_n
    "step-bounded",  # (iii) |x_{n+1} - x_n| <= c_n
    "descent",  # (iv)  <alpha_n u_n, x_n - x*> <= a <x_n - x_{n+1}, x_n - x*> + d_n
    "gradient-bounded",  # (v)   |u_n| <= p
    "coefficients",  # (vi)  p c_n + b_n <= theta alpha_n
)


def sample_ys(prob: ConvexProblem, count: int = 8, seed: int = 0) -> list[np.ndarray]:
    """``x*`` plus ``count`` seeded sample points of ``C``."""
    rng = np.random.default_rng(seed)
    return [np.asarray(prob.x_star, dtype=float)] + sample_points(prob.C, count, rng)


def check_abstract_conditions(
    traj: Trajectory,
    prob: ConvexProblem,
    consts: GradientConstants,
    b: Seq,
    c: Seq,
    d: Seq,
    alpha: Seq,
    horizon: int,
    tol: float = DEFAULT_TOL,
    ys: list[np.ndarray] | None = None,
) -> Certificate:
    """Check conditions (i)-(vi) for ``n < horizon``; one check per condition."""
    ys = sample_ys(prob) if ys is None else ys
    checks = {name: Check(name, checked_range=(0, horizon - 1)) for name in CONDITION_NAMES}
    a, p, theta = float(consts.a), float(consts.p), float(consts.theta)
    x_star = np.asarray(traj.x_star, dtype=float)
    f_star = prob.f(x_star)
    fys = [prob.f(y) for y in ys]
    for n in range(horizon):
        x, x1 = traj.x(n), traj.x(n + 1)
        u = traj.record(n).u
        al, bn, cn, dn = float(alpha(n)), float(b(n)), float(c(n)), float(d(n))
        fx = traj.f(n)
        if f_star > fx + tol:
            checks["minimizer"].fail({"n": n, "f_star": f_star, "f": fx})
        for y, fy in zip(ys, fys):
            excess = fx - fy - float(u @ (x - y)) - bn
            if excess > tol:
                checks["gradient"].fail({"n": n, "y": [float(v) for v in y], "excess": excess})
                break
        stepn = float(np.linalg.norm(x1 - x))
        if stepn > cn + tol:
            checks["step-bounded"].fail({"n": n, "step": stepn, "c_n": cn})
        lhs = al * float(u @ (x - x_star))
        rhs = a * float((x - x1) @ (x - x_star)) + dn
        if lhs > rhs + tol:
            checks["descent"].fail({"n": n, "lhs": lhs, "rhs": rhs})
        un = float(np.linalg.norm(u))
        if un > p + tol:
            checks["gradient-bounded"].fail({"n": n, "norm_u": un, "p": p})
        if p * cn + bn > theta * al + tol:
            checks["coefficients"].fail({"n": n, "lhs": p * cn + bn, "theta_alpha": theta * al})
    return from_checks("abstract-conditions", list(checks.values()))


def star_instance_from_trajectory(
    traj: Trajectory, prob: ConvexProblem, consts: GradientConstants, alpha: Seq, b: Seq, c: Seq, d: Seq
) -> StarInstance:
    """The recursive-inequality instance a conforming trajectory induces (float backend)."""
    a = float(consts.a)
    return StarInstance(
        mu=Seq(lambda n: 0.5 * a * traj.dist(n) ** 2, FLOAT, name="mu"),
        alpha=Seq(lambda n: float(alpha(n)), FLOAT, name="alpha"),
        beta=Seq(lambda n: traj.f(n) - prob.f_star, FLOAT, name="beta"),
        gamma=Seq(lambda n: 0.5 * a * float(c(n)) ** 2 + float(alpha(n)) * float(b(n)) + float(d(n)), FLOAT, name="gamma"),
        theta=consts.theta,
    )


# ---------------------------------------------------------------------------
# deliberate violations, one per condition


@dataclass
class AbstractSetup:
    """Everything :func:`check_abstract_conditions` takes, bundled for sabotage."""

    traj: Trajectory
    prob: ConvexProblem
    consts: GradientConstants
    b: Seq
    c: Seq
    d: Seq
    alpha: Seq

    def check(self, horizon: int, tol: float = DEFAULT_TOL) -> Certificate:
        return check_abstract_conditions(
            self.traj, self.prob, self.consts, self.b, self.c, self.d, self.alpha, horizon, tol
        )


def _negated_gradients(traj: Trajectory, horizon: int) -> Trajectory:
    traj.ensure(horizon + 1)
    bad = copy.copy(traj)
    bad.records = [replace(r, u=-r.u) for r in traj.records]
    return bad


def sabotage(setup: AbstractSetup, condition: str, horizon: int) -> AbstractSetup:
    """A copy of ``setup`` altered so that ``condition`` should fail.

    minimizer: claim a point with larger ``f`` is the minimizer.
    gradient: negate every ``u_n``.
    step-bounded: halve ``c_n``.
    descent: halve ``a`` and drop ``d_n``.
    gradient-bounded: halve ``p``.
    coefficients: halve ``theta``.
    """
    s = copy.copy(setup)
    if condition == "minimizer":
        far = max((setup.traj.x(n) for n in range(horizon + 1)), key=setup.prob.f)
        x_star = np.asarray(far, dtype=float)
        s.prob = replace(setup.prob, x_star=x_star, f_star=setup.prob.f(x_star))
        s.traj = copy.copy(setup.traj)
        s.traj.x_star = x_star
    elif condition == "gradient":
        s.traj = _negated_gradients(setup.traj, horizon)
    elif condition == "step-bounded":
        s.c = setup.c.map(lambda v: v / 2)
    elif condition == "descent":
        s.consts = replace(setup.consts, a=setup.consts.a / 2)
        s.d = Seq.constant(0)
    elif condition == "gradient-bounded":
        s.consts = replace(setup.consts, p=setup.consts.p / 2)
    elif condition == "coefficients":
        s.consts = replace(setup.consts, theta=setup.consts.theta / 2)
    else:
        raise ValueError(f"unknown condition {condition!r}")
    return s


# ---------------------------------------------------------------------------
# soundness of the metastability bound on a trajectory


def certify_gradient_meta(
    setup: AbstractSetup,
    r: DivergenceRate,
    eps: Number,
    g: Counterexample,
    scan_cap: int,
    tol: float = DEFAULT_TOL,
) -> Certificate:
    """Find a metastable window for ``f(x_n) - f*`` and compare it with the bound.

    The six conditions are checked on the scanned range; if they fail the
    verdict is PREMISE_FAILED.  A witness beyond the bound, or no witness
    although every window up to the bound lies within the scan, raises a
    SOUNDNESS_ALARM.
    """
    eps = positive_rational(eps, "eps")
    bound = gradient_meta_bound(setup.consts.e, setup.consts.theta, r, eps, g)
    traj, prob = setup.traj, setup.prob
    beta = Seq(lambda n: traj.f(n) - prob.f_star, FLOAT, name="beta")
    w = find_metastable_witness(beta, 0, eps, g, bound, scan_cap)
    top = w.index + g(w.index) if w.found else w.scanned[1]
    premises = setup.check(top + 1, tol)
    found = Check("witness-found", checked_range=w.scanned)
    within = Check("witness-within-bound", checked_range=(0, min(bound, scan_cap)))
    if not w.found:
        found.fail({"scanned": w.scanned, "bound": bound})
    elif w.index > bound:
        within.fail({"witness": w.index, "bound": bound})
    checks = premises.checks + [found, within]
    if not premises.passed:
        verdict = Verdict.PREMISE_FAILED
    elif not within.passed or (not found.passed and g_tilde(g, bound) <= scan_cap):
        verdict = Verdict.SOUNDNESS_ALARM
    elif not found.passed:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.CERTIFIED
    return Certificate("gradient-meta", checks, verdict, bound=bound, witness=w.index)
