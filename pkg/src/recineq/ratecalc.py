"""Rate formulas for the recursive inequality and certificate checkers for them.

An instance of the inequality is four nonnegative sequences with

    mu(n+1) <= mu(n) - alpha(n) * beta(n) + gamma(n)

plus declared constants.  The functions here fall into two groups:

* closed-form rates (``series_meta_rate``, ``case1_beta_rate``, ``case2_rate``,
  ...) evaluated in exact rationals and big integers;
* ``*_certify`` checkers that verify a theorem's premises on exactly the finite
  range its bound touches, then cross-check the conclusion.  A conclusion that
  fails while every premise holds is reported as ``SOUNDNESS_ALARM``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .certificate import Certificate, Check, Verdict, from_checks
from .seqcore import (
    EXACT,
    ConvergenceRate,
    Counterexample,
    DivergenceRate,
    MetaRate,
    Number,
    Q,
    Seq,
    find_metastable_witness,
    partial_sum,
    positive_rational,
)

Modulus = Callable[[Fraction], Fraction]

# Safe-side margin for float-backend premise checks.
FLOAT_MARGIN = 2.0**-40

POSITIVITY_NOTE = (
    "the theorem is stated once for positive and once for nonnegative sequences; "
    "nonnegativity and alpha_n > 0 were checked"
)


@dataclass
class StarInstance:
    """One instance ``(mu, alpha, beta, gamma)`` of the recursive inequality."""

    mu: Seq
    alpha: Seq
    beta: Seq
    gamma: Seq
    c: Fraction | None = None
    alpha_bar: Fraction | None = None
    theta: Fraction | None = None
    Gamma: Fraction | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def backend(self) -> str:
        return self.mu.backend

    def seqs(self) -> dict[str, Seq]:
        return {"mu": self.mu, "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}


def _star_checks(inst: StarInstance, lo: int, hi: int, slack: Number) -> list[Check]:
    """Checks on ``[lo, hi)``; ``slack`` > 0 is lenient, < 0 demands a margin."""
    star = Check("recursive-inequality", checked_range=(lo, hi - 1))
    nonneg = Check("nonnegative", checked_range=(lo, hi - 1))
    mu_bound = Check("mu-bounded-by-c", checked_range=(lo, hi - 1))
    alpha_bound = Check("alpha-bounded", checked_range=(lo, hi - 1))
    mu, al, be, ga = inst.mu, inst.alpha, inst.beta, inst.gamma
    for n in range(lo, hi):
        if mu(n + 1) > mu(n) - al(n) * be(n) + ga(n) + slack:
            star.fail({"n": n, "lhs": mu(n + 1), "rhs": mu(n) - al(n) * be(n) + ga(n)})
        for name, s in inst.seqs().items():
            if s(n) < -max(slack, 0):
                nonneg.fail({"sequence": name, "n": n, "value": s(n)})
        if inst.c is not None and mu(n) > inst.c + slack:
            mu_bound.fail({"n": n, "mu": mu(n), "c": inst.c})
        if inst.alpha_bar is not None and al(n) > inst.alpha_bar + slack:
            alpha_bound.fail({"n": n, "alpha": al(n), "alpha_bar": inst.alpha_bar})
    return [star, nonneg, mu_bound, alpha_bound]


def star_check(inst: StarInstance, horizon: int, tol: Number = 0) -> Certificate:
    """Check the inequality, nonnegativity and declared bounds for all ``n < horizon``.

    ``tol`` is an absolute slack granted to every comparison (use 0 for exact data).
    """
    return from_checks("star", _star_checks(inst, 0, horizon, tol))


# ---------------------------------------------------------------------------
# Case I: summable gamma, rates for beta


def series_meta_rate(b: Number, eps: Number, g: Counterexample) -> int:
    """Metastability rate for a nonnegative series with sum at most ``b``.

    Iterates ``n -> n + g(n) + 1`` from 0, ``ceil(b/eps)`` times.
    """
    b, eps = positive_rational(b, "b"), positive_rational(eps, "eps")
    n = 0
    for _ in range(math.ceil(b / eps)):
        n = n + g(n) + 1
    return n


def series_meta(b: Number) -> MetaRate:
    """``series_meta_rate`` with the bound ``b`` fixed, as a :data:`MetaRate`."""
    return lambda eps, g: series_meta_rate(b, eps, g)


def series_window_witness(values: Sequence[Number], eps: Number, g: Counterexample, limit: int) -> int | None:
    """Brute force: least ``n <= limit`` with ``sum(values[n..n+g(n)]) <= eps``.

    ``values`` is a finite prefix of a series that is zero afterwards, so the
    scan never needs to go past ``len(values)``.
    """
    eps = Q(eps)
    prefix = [Fraction(0)]
    for v in values:
        prefix.append(prefix[-1] + Q(v))
    top = len(values)
    for n in range(min(limit, top) + 1):
        if prefix[min(n + g(n) + 1, top)] - prefix[n] <= eps:
            return n
    return None


def case1_beta_rate(phi: ConvergenceRate, theta: Number, eps: Number) -> int:
    """Rate for ``beta_n -> 0`` from a Cauchy rate ``phi`` of ``sum alpha_i beta_i``."""
    theta, eps = positive_rational(theta, "theta"), positive_rational(eps, "eps")
    return phi(eps * eps / (4 * theta))


def case1_beta_meta(
    Phi: MetaRate, r: DivergenceRate, theta: Number, eps: Number, g: Counterexample
) -> int:
    """Metastability rate for ``beta_n -> 0`` from one for ``sum alpha_i beta_i``."""
    theta, eps = positive_rational(theta, "theta"), positive_rational(eps, "eps")
    x = eps / (2 * theta)

    def h(n: int) -> int:
        v = r(n + g(n), x) - n
        if v < 0:
            raise ValueError(f"malformed divergence rate: r({n + g(n)}, {x}) < {n}")
        return v

    return Phi(eps * eps / (4 * theta), h)


def _divergence_check(
    alpha: Seq, r: DivergenceRate, x: Fraction, points: Iterable[int], top: int
) -> Check:
    """``r`` is sound at each point and monotone up to the evaluation ``top``."""
    chk = Check("divergence-rate")
    pts = list(points)
    for n in pts:
        rn = r(n, x)
        if partial_sum(alpha, n, rn) < x:
            chk.fail({"n": n, "x": x, "r": rn, "reason": "sum below x"})
        elif rn > top:
            chk.fail({"n": n, "x": x, "r": rn, "reason": "not monotone"})
    if pts:
        chk.checked_range = (min(pts), max(pts))
    return chk


def _nonneg_exact(seqs: dict[str, Seq], lo: int, hi: int) -> Check:
    chk = Check("nonnegative", checked_range=(lo, hi))
    for name, s in seqs.items():
        for n in range(lo, hi + 1):
            if s(n) < 0:
                chk.fail({"sequence": name, "n": n, "value": s(n)})
                break
    return chk


def _window_verdict(premises: list[Check], conclusion: Check) -> Verdict:
    if not all(c.passed for c in premises):
        return Verdict.PREMISE_FAILED
    return Verdict.CERTIFIED if conclusion.passed else Verdict.SOUNDNESS_ALARM


def case1_window_certify(
    alpha: Seq,
    beta: Seq,
    r: DivergenceRate,
    theta: Number,
    N1: int,
    N2: int,
    eps: Number,
    g: Counterexample,
    *,
    premise2_slack: Number | None = None,
    premise1_threshold: Number | None = None,
    rate_arg: Number | None = None,
) -> Certificate:
    """Certify ``beta_n <= eps`` on ``[N, N + g(N)]`` with ``N = max(N1, N2)``.

    With ``R = r(N + g(N), eps/4theta)`` the premises are

    1. ``sum_{i=N1}^{R} alpha_i beta_i <= eps^2 / 8theta``
    2. ``beta_n - beta_m <= theta * sum_{i=n}^{m-1} alpha_i + eps/4`` for
       ``N2 <= n < m <= R``

    together with soundness of ``r`` on the window.  The three keyword
    arguments override the constants ``eps/4``, ``eps^2/8theta`` and
    ``eps/4theta``; they exist for testing reductions and should normally be
    left alone.
    """
    theta, eps = positive_rational(theta, "theta"), positive_rational(eps, "eps")
    slack = eps / 4 if premise2_slack is None else Q(premise2_slack)
    threshold = eps * eps / (8 * theta) if premise1_threshold is None else Q(premise1_threshold)
    x = eps / (4 * theta) if rate_arg is None else positive_rational(rate_arg, "rate_arg")
    N = max(N1, N2)
    end = N + g(N)
    R = r(end, x)

    nonneg = _nonneg_exact({"alpha": alpha, "beta": beta}, min(N1, N2), max(R, end))
    div = _divergence_check(alpha, r, x, range(N, end + 1), R)

    p1 = Check("premise-1-tail-sum", checked_range=(N1, R))
    tail = sum((alpha(i) * beta(i) for i in range(N1, R + 1)), Fraction(0))
    if tail > threshold:
        p1.fail({"sum": tail, "threshold": threshold})

    # beta_n - beta_m - theta*(P(m) - P(n)) = V_n - V_m with V_k = beta_k + theta*P(k)
    p2 = Check("premise-2-regularity", checked_range=(N2, R))
    best_v, best_n = None, None
    for m in range(N2, R + 1):
        vm = beta(m) + theta * alpha.prefix(m)
        if best_v is not None and best_v - vm > slack:
            p2.fail({"n": best_n, "m": m, "excess": best_v - vm - slack})
        if best_v is None or vm > best_v:
            best_v, best_n = vm, m

    concl = Check("conclusion-beta-small", checked_range=(N, end))
    for n in range(N, end + 1):
        if beta(n) > eps:
            concl.fail({"n": n, "beta": beta(n), "eps": eps})

    premises = [nonneg, div, p1, p2]
    return Certificate(
        "case1-window", premises + [concl], _window_verdict(premises, concl), bound=R, witness=N
    )


def simplified_window_certify(
    alpha: Seq, beta: Seq, r: DivergenceRate, theta: Number, N: int, eps: Number, g: Counterexample
) -> Certificate:
    """Certify ``beta_n <= eps`` on ``[N, N + g(N)]`` under one-step regularity.

    Premises: ``sum_{i=N}^{R} alpha_i beta_i <= eps^2/4theta`` with
    ``R = r(N + g(N), eps/2theta)``, and ``beta_n - beta_{n+1} <= theta*alpha_n``
    (checked on ``[0, R)``).
    """
    theta, eps = positive_rational(theta, "theta"), positive_rational(eps, "eps")
    x = eps / (2 * theta)
    end = N + g(N)
    R = r(end, x)

    nonneg = _nonneg_exact({"alpha": alpha, "beta": beta}, N, max(R, end))
    div = _divergence_check(alpha, r, x, range(N, end + 1), R)
    p1 = Check("premise-1-tail-sum", checked_range=(N, R))
    tail = sum((alpha(i) * beta(i) for i in range(N, R + 1)), Fraction(0))
    if tail > eps * eps / (4 * theta):
        p1.fail({"sum": tail, "threshold": eps * eps / (4 * theta)})
    p2 = Check("premise-2-regularity", checked_range=(0, R))
    for n in range(R):
        if beta(n) - beta(n + 1) > theta * alpha(n):
            p2.fail({"n": n, "m": n + 1, "excess": beta(n) - beta(n + 1) - theta * alpha(n)})
    concl = Check("conclusion-beta-small", checked_range=(N, end))
    for n in range(N, end + 1):
        if beta(n) > eps:
            concl.fail({"n": n, "beta": beta(n), "eps": eps})
    premises = [nonneg, div, p1, p2]
    return Certificate(
        "case1-window", premises + [concl], _window_verdict(premises, concl), bound=R, witness=N
    )


def find_case1_window(
    alpha: Seq,
    beta: Seq,
    r: DivergenceRate,
    theta: Number,
    eps: Number,
    g: Counterexample,
    limit: int,
) -> Certificate | None:
    """Search ``N1 = N2 = N`` over ``0, 1, 2, 4, ...`` up to ``limit`` for a certified window.

    Returns the first certificate whose premises hold, or None.
    """
    N = 0
    while N <= limit:
        cert = case1_window_certify(alpha, beta, r, theta, N, N, eps, g)
        if cert.verdict is not Verdict.PREMISE_FAILED:
            return cert
        N = 1 if N == 0 else 2 * N
    return None


def case1_subsequence_bound(r: DivergenceRate, c: Number, Gamma: Number, eps: Number, N: int) -> int:
    """Some ``k`` in ``[N, r(N, (c + Gamma)/eps)]`` has ``beta_k <= eps`` (summable gamma)."""
    c, eps = positive_rational(c, "c"), positive_rational(eps, "eps")
    return r(N, (c + Q(Gamma)) / eps)


def case2_subsequence_bound(r: DivergenceRate, c: Number, eps: Number, n0: int) -> int:
    """Some ``k`` in ``[n0, r(n0, 2c/eps)]`` has ``beta_k <= eps`` once ``gamma/alpha <= eps/2``."""
    c, eps = positive_rational(c, "c"), positive_rational(eps, "eps")
    return r(n0, 2 * c / eps)


# ---------------------------------------------------------------------------
# moduli and Case II rates

DEFAULT_MODULUS_GRID = tuple(Fraction(k, 64) for k in range(1, 257))


def modulus_from_monotone(
    psi: Callable[[Fraction], Number], grid: Iterable[Number] = DEFAULT_MODULUS_GRID
) -> Modulus:
    """``omega(eps) = psi(eps)/2`` for nondecreasing ``psi`` vanishing only at 0.

    ``psi`` is validated on ``grid``; a sampled violation raises ValueError.
    """
    pts = sorted({Q(t) for t in grid})
    if psi(Fraction(0)) != 0:
        raise ValueError("psi(0) must be 0")
    prev = None
    for t in pts:
        v = psi(t)
        if v <= 0:
            raise ValueError(f"psi must be positive away from 0; psi({t}) = {v}")
        if prev is not None and v < prev[1]:
            raise ValueError(f"psi is not nondecreasing: psi({prev[0]}) > psi({t})")
        prev = (t, v)

    def omega(eps: Number) -> Fraction:
        return Q(psi(Q(eps))) / 2

    return omega


def check_modulus(
    inst: StarInstance,
    omega: Modulus,
    grid: Iterable[Number],
    horizon: int,
    variant: str = "mu_n",
) -> Certificate:
    """Check ``beta_n <= omega(eps) => mu_n <= eps`` (or ``mu_{n+1}``) for ``n < horizon``."""
    shift = {"mu_n": 0, "mu_succ": 1}[variant]
    chk = Check("modulus", checked_range=(0, horizon - 1))
    for eps in map(Q, grid):
        w = omega(eps)
        for n in range(horizon):
            if inst.beta(n) <= w and inst.mu(n + shift) > eps:
                chk.fail({"eps": eps, "n": n, "beta": inst.beta(n), "mu": inst.mu(n + shift)})
                break
    return from_checks("modulus", [chk])


def compose_beta_rate(phi: ConvergenceRate, omega_tilde: Modulus, eps: Number) -> int:
    """Rate for ``beta_n -> 0`` from a rate ``phi`` for ``mu_n -> 0``."""
    return phi(omega_tilde(positive_rational(eps, "eps")))


def case2_rate(
    r: DivergenceRate,
    phi: ConvergenceRate,
    omega: Modulus,
    c: Number,
    alpha_bar: Number,
    eps: Number,
) -> int:
    """Rate of convergence for ``mu_n -> 0`` when ``gamma_n/alpha_n -> 0`` with rate ``phi``."""
    c, ab = positive_rational(c, "c"), positive_rational(alpha_bar, "alpha_bar")
    eps = positive_rational(eps, "eps")
    w = positive_rational(omega(eps / 2), "omega(eps/2)")
    return r(phi(min(w / 2, eps / (2 * ab))), 2 * c / w)


def case2b_rate(r: DivergenceRate, phi: ConvergenceRate, omega: Modulus, c: Number, eps: Number) -> int:
    """As :func:`case2_rate` for a modulus that controls ``mu_{n+1}`` instead of ``mu_n``."""
    c, eps = positive_rational(c, "c"), positive_rational(eps, "eps")
    w = positive_rational(omega(eps), "omega(eps)")
    return r(phi(w / 2), 2 * c / w) + 1


def g_tilde(g: Counterexample, i: int) -> int:
    """``max{j + g(j) : j <= i}``; O(1) for counterexamples marked monotone."""
    if getattr(g, "monotone", False):
        return i + g(i)
    return max(j + g(j) for j in range(i + 1))


def case2_meta_certify(
    inst: StarInstance,
    r: DivergenceRate,
    eps: Number,
    g: Counterexample,
    delta: Number,
    p: int,
    m: int,
    variant: str = "mu_n",
    tol: float = FLOAT_MARGIN,
) -> Certificate:
    """Certify a metastable window for ``mu_n -> 0`` under the Case II premises.

    With ``h(delta, k) = g~(r(k, 2c/delta))`` the premises are

    * ``gamma_n/alpha_n <= min{delta/2, eps/2alpha_bar}`` on ``[m, h(delta, m)]``
      (threshold ``delta/2`` for ``variant="mu_succ"``),
    * ``beta_n <= delta => mu_n <= eps/2`` for ``n <= h(delta, p)``
      (``mu_{n+1} <= eps`` for ``mu_succ``),

    plus the standing hypotheses (recursive inequality, ``mu <= c``,
    ``alpha <= alpha_bar``, ``alpha > 0``) on the range the proof consumes.
    On success a window start ``N <= r(p, 2c/delta)`` (``r(m, 2c/delta) + 1``
    for ``mu_succ``) is searched for and returned as the witness.

    Float instances must satisfy every premise with margin ``tol``.
    """
    if variant not in ("mu_n", "mu_succ"):
        raise ValueError(f"unknown variant {variant!r}")
    if m > p:
        raise ValueError("need m <= p")
    if inst.c is None or inst.alpha_bar is None:
        raise ValueError("case II certification needs declared c and alpha_bar")
    eps, delta = positive_rational(eps, "eps"), positive_rational(delta, "delta")
    c, ab = Q(inst.c), Q(inst.alpha_bar)
    exact = inst.backend == EXACT
    margin: Number = 0 if exact else tol

    def le(a: Number, b: Number) -> bool:
        # a <= b with the safe-side margin
        return a <= b - margin

    x = 2 * c / delta
    r_m, r_p = r(m, x), r(p, x)
    h_m, h_p = g_tilde(g, r_m), g_tilde(g, r_p)
    shift = 1 if variant == "mu_succ" else 0
    top = max(h_p, h_m) + shift

    hyp = _star_checks(inst, 0, top + 1, -margin)
    pos = Check("alpha-positive", checked_range=(0, top))
    for n in range(top + 1):
        if not inst.alpha(n) > 0:
            pos.fail({"n": n, "alpha": inst.alpha(n)})
            break
    div = _divergence_check(inst.alpha, r, x, [m], r_p)

    if variant == "mu_n":
        ratio_thr, mu_thr = min(delta / 2, eps / (2 * ab)), eps / 2
    else:
        ratio_thr, mu_thr = delta / 2, eps
    ratio = Check("premise-gamma-over-alpha", checked_range=(m, h_m))
    for n in range(m, h_m + 1):
        a = inst.alpha(n)
        if a > 0 and not le(inst.gamma(n) / a, ratio_thr):
            ratio.fail({"n": n, "ratio": inst.gamma(n) / a, "threshold": ratio_thr})
    mod = Check("premise-modulus", checked_range=(0, h_p))
    for n in range(h_p + 1):
        if inst.beta(n) <= delta + margin and not le(inst.mu(n + shift), mu_thr):
            mod.fail({"n": n, "beta": inst.beta(n), "mu": inst.mu(n + shift), "threshold": mu_thr})

    bound = r_p if variant == "mu_n" else r_m + 1
    premises = hyp + [pos, div, ratio, mod]
    notes = [POSITIVITY_NOTE]
    concl = Check("conclusion-window", checked_range=(0, bound))
    witness = None
    if all(ch.passed for ch in premises):
        w = find_metastable_witness(inst.mu, 0, eps, g, bound, g_tilde(g, bound))
        witness = w.index
        if not w.found:
            concl.fail({"searched": list(w.scanned), "bound": bound})
    verdict = _window_verdict(premises, concl)
    return Certificate(f"case2-meta-{variant}", premises + [concl], verdict, bound, witness, notes)


def case2_meta_defaults(
    omega: Modulus, phi: ConvergenceRate, alpha_bar: Number, eps: Number, variant: str = "mu_n"
) -> tuple[Fraction, int]:
    """The ``(delta, p)`` used to derive the Case II rates from the metastable theorems."""
    eps, ab = positive_rational(eps, "eps"), positive_rational(alpha_bar, "alpha_bar")
    if variant == "mu_n":
        delta = Q(omega(eps / 2))
        return delta, phi(min(delta / 2, eps / (2 * ab)))
    delta = Q(omega(eps))
    return delta, phi(delta / 2)
