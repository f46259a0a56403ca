"""Sequences, moduli and finite-data checkers.

Values live in one of two backends. The ``exact`` backend holds
:class:`fractions.Fraction` (or ``int``) values and is used for every
certification step; the ``float`` backend holds IEEE doubles and is used for
trajectories of iterative methods, whose transcendental steps cannot be exact.

Moduli are plain callables:

* a rate of convergence ``phi(eps) -> int``
* a rate of divergence ``r(n, x) -> int`` with ``sum(alpha[n..r(n, x)]) >= x``
* a rate of metastability ``Phi(eps, g) -> int``
* a counterexample function ``g(n) -> int``

Indices are Python ints throughout, so bounds never overflow.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Callable, Iterable, Sequence, Union

from .certificate import Certificate, Check, Verdict, from_checks

Number = Union[int, Fraction, float]
ConvergenceRate = Callable[[Fraction], int]
DivergenceRate = Callable[[int, Fraction], int]
MetaRate = Callable[[Fraction, Callable[[int], int]], int]
Counterexample = Callable[[int], int]

EXACT = "exact"
FLOAT = "float"


def Q(value: Number | str) -> Fraction:
    """Coerce to an exact rational. Floats convert exactly (no rounding)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def positive_rational(value: Number | str, name: str = "value") -> Fraction:
    q = Q(value)
    if q <= 0:
        raise ValueError(f"{name} must be a positive rational, got {q}")
    return q


class Seq:
    """A lazily evaluated infinite sequence ``index -> value``.

    Evaluation is memoized per index; the cache and the running prefix sums
    are guarded by a lock so a ``Seq`` can be shared between threads.
    """

    def __init__(self, fn: Callable[[int], Number], backend: str = EXACT, name: str = ""):
        if backend not in (EXACT, FLOAT):
            raise ValueError(f"unknown backend {backend!r}")
        self._fn = fn
        self.backend = backend
        self.name = name or getattr(fn, "__name__", "seq")
        self._memo: dict[int, Number] = {}
        self._prefix: list[Number] = [Fraction(0) if backend == EXACT else 0.0]
        self._lock = threading.Lock()
        self.constant_value: Number | None = None  # set by ``Seq.constant``

    def __repr__(self) -> str:
        return f"Seq({self.name!r}, backend={self.backend!r})"

    def __call__(self, n: int) -> Number:
        if n < 0:
            raise IndexError(f"negative index {n}")
        try:
            return self._memo[n]
        except KeyError:
            pass
        v = self._coerce(self._fn(n))
        with self._lock:
            return self._memo.setdefault(n, v)

    def _coerce(self, v: Number) -> Number:
        if self.backend == EXACT:
            if isinstance(v, bool) or not isinstance(v, (int, Rational)):
                raise TypeError(f"{self.name}: exact backend got non-rational value {v!r}")
            return v if isinstance(v, Fraction) else Fraction(v)
        return float(v)

    def prefix(self, n: int) -> Number:
        """Sum of the first ``n`` terms, ``s(0) + ... + s(n-1)``."""
        with self._lock:
            have = len(self._prefix) - 1
        if n > have:
            # evaluate outside the lock; s(i) may itself touch other sequences
            acc = self._prefix[have]
            extra = []
            for i in range(have, n):
                acc = acc + self(i)
                extra.append(acc)
            with self._lock:
                if len(self._prefix) - 1 == have:
                    self._prefix.extend(extra)
        return self._prefix[n]

    def take(self, n: int) -> list[Number]:
        return [self(i) for i in range(n)]

    def map(self, fn: Callable[[Number], Number], name: str = "") -> "Seq":
        return Seq(lambda n: fn(self(n)), self.backend, name or f"map({self.name})")

    @classmethod
    def constant(cls, value: Number, backend: str = EXACT) -> "Seq":
        v = Q(value) if backend == EXACT else float(value)
        seq = cls(lambda n: v, backend, name=f"const({value})")
        seq.constant_value = v
        return seq

    @classmethod
    def from_values(cls, values: Sequence[Number], backend: str = EXACT, name: str = "") -> "Seq":
        """Finite data as a sequence; reading past the end raises IndexError."""
        vals = list(values)

        def fn(n: int) -> Number:
            if n >= len(vals):
                raise IndexError(f"{name or 'data'}: index {n} beyond {len(vals)} stored values")
            return vals[n]

        return cls(fn, backend, name or "data")


def partial_sum(s: Seq, m: int, n: int) -> Number:
    """``s(m) + ... + s(n)``; the empty sum (``n < m``) is zero."""
    if n < m:
        return Fraction(0) if s.backend == EXACT else 0.0
    if s.backend == EXACT:
        return s.prefix(n + 1) - s.prefix(m)
    total = math.fsum(s(i) for i in range(m, n + 1))
    if not math.isfinite(total):
        raise FloatingPointError(f"non-finite partial sum of {s.name} over [{m}, {n}]")
    return total


def nonnegativity_check(seqs: dict[str, Seq], horizon: int, tol: float = 0.0) -> Check:
    chk = Check("nonnegative", checked_range=(0, horizon - 1))
    for name, s in seqs.items():
        for n in range(horizon):
            if s(n) < -tol:
                chk.fail({"sequence": name, "n": n, "value": s(n)})
                break
    return chk


# ---------------------------------------------------------------------------
# rates of divergence


@lru_cache(maxsize=4096)
def exp_upper_fixed(x: Fraction, prec: int = 96) -> int:
    """Integer ``U`` with ``U / 2**prec >= e**x`` for rational ``x >= 0``.

    Truncated Taylor series on ``x / 2**j <= 1`` with the geometric tail bound,
    then ``j`` squarings; every rounding is upward, so the result is a rigorous
    upper bound with relative error below ``2**-(prec + 8)``.
    """
    if x < 0:
        raise ValueError("exp_upper_fixed expects x >= 0")
    if x == 0:
        return 1 << prec
    j = (x.numerator // x.denominator).bit_length()
    y = x / (1 << j)
    work = prec + j + 16
    eps = Fraction(1, 1 << (work + 2))
    total, term, k = Fraction(0), Fraction(1), 0
    while term >= eps:
        total += term
        k += 1
        term = term * y / k
    # tail sum_{i>=k} y^i/i! <= term * (k+1)/(k+1-y) <= 2*term for y <= 1
    total += 2 * term
    u = -((-total.numerator << work) // total.denominator)
    for _ in range(j):
        u = -((-u * u) >> work)
    return -((-u) >> (work - prec))


def exp_upper(x: Number, prec: int = 96) -> Fraction:
    """Rational upper bound on ``e**x``."""
    return Fraction(exp_upper_fixed(Q(x), prec), 1 << prec)


def harmonic_divergence_rate(prec: int = 96) -> DivergenceRate:
    """Rate of divergence for ``alpha_n = 1/(n+1)``: ``r(n, x) = ceil((n+1) e^x)``.

    Sound because ``sum_{i=n}^{N} 1/(i+1) >= log((N+2)/(n+1))``.
    """

    def r(n: int, x: Number) -> int:
        u = exp_upper_fixed(positive_rational(x, "x"), prec)
        return -((-(n + 1) * u) >> prec)

    r.__name__ = "harmonic_r"
    return r


def constant_divergence_rate(a: Number) -> DivergenceRate:
    """Rate of divergence for ``alpha_n == a``: ``r(n, x) = n + ceil(x / a)``."""
    a = positive_rational(a, "a")

    def r(n: int, x: Number) -> int:
        return n + math.ceil(positive_rational(x, "x") / a)

    r.__name__ = f"constant_r({a})"
    return r


def monotonize_divergence_rate(r: DivergenceRate) -> DivergenceRate:
    """``r~(n, x) = max{r(k, x) : k <= n}``; running maxima are cached per ``x``."""
    cache: dict[Fraction, list[int]] = {}
    lock = threading.Lock()

    def r_tilde(n: int, x: Number) -> int:
        x = Q(x)
        with lock:
            runs = cache.setdefault(x, [])
            while len(runs) <= n:
                k = len(runs)
                v = r(k, x)
                runs.append(v if not runs else max(runs[-1], v))
            return runs[n]

    r_tilde.__name__ = f"monotone({getattr(r, '__name__', 'r')})"
    return r_tilde


def check_divergence_rate(
    alpha: Seq, r: DivergenceRate, samples: Iterable[tuple[int, Number]]
) -> Certificate:
    """Check ``sum(alpha[n..r(n,x)]) >= x`` and monotonicity in ``n`` on the samples."""
    samples = [(n, Q(x)) for n, x in samples]
    sums = Check("sum-reaches-x")
    values: dict[tuple[int, Fraction], int] = {}
    for n, x in samples:
        top = r(n, x)
        values[(n, x)] = top
        got = partial_sum(alpha, n, top)
        if got < x:
            sums.fail({"n": n, "x": x, "r": top, "sum": got})
    mono = Check("monotone-in-n")
    for x in sorted({x for _, x in samples}):
        ns = sorted(n for n, y in values if y == x)
        for a, b in zip(ns, ns[1:]):
            if values[(a, x)] > values[(b, x)]:
                mono.fail({"x": x, "m": a, "n": b, "r_m": values[(a, x)], "r_n": values[(b, x)]})
    if samples:
        lo = min(n for n, _ in samples)
        sums.checked_range = (lo, max(values.values()))
    return from_checks("divergence-rate", [sums, mono])


def check_convergence_rate(
    s: Seq, limit: Number, phi: ConvergenceRate, grid: Iterable[Number], horizon: int
) -> Certificate:
    """Check ``|s(n) - limit| <= eps`` for ``phi(eps) <= n <= horizon``.

    Grid entries with ``phi(eps) > horizon`` cannot be checked and make the
    verdict INCONCLUSIVE (unless some other entry FAILED).
    """
    chk = Check("rate-of-convergence", checked_range=(0, horizon))
    inconclusive = Check("within-horizon")
    for eps in map(Q, grid):
        start = phi(eps)
        if start > horizon:
            inconclusive.fail({"eps": eps, "phi": start, "horizon": horizon})
            continue
        for n in range(start, horizon + 1):
            dev = abs(s(n) - limit)
            if dev > eps:
                chk.fail({"eps": eps, "n": n, "deviation": dev})
                break
    if not chk.passed:
        verdict = Verdict.FAILED
    elif not inconclusive.passed:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.CERTIFIED
    return Certificate("convergence-rate", [chk, inconclusive], verdict)


@dataclass(frozen=True)
class MetastableWitness:
    """Result of a metastable-window search; ``index`` is None when not found."""

    index: int | None
    scanned: tuple[int, int]

    @property
    def found(self) -> bool:
        return self.index is not None


def find_metastable_witness(
    s: Seq, limit: Number, eps: Number, g: Counterexample, bound: int, scan_cap: int
) -> MetastableWitness:
    """Smallest ``n <= min(bound, scan_cap)`` with ``|s(k) - limit| <= eps`` on ``[n, n+g(n)]``.

    ``s`` is never evaluated past ``scan_cap``; candidates whose window would
    reach beyond it are skipped.
    """
    eps = Q(eps)
    last = min(bound, scan_cap)
    bad_prefix = [0]  # bad_prefix[k] = number of bad indices below k

    def bad_count(upto: int) -> int:
        while len(bad_prefix) <= upto:
            k = len(bad_prefix) - 1
            bad_prefix.append(bad_prefix[-1] + (abs(s(k) - limit) > eps))
        return bad_prefix[upto]

    for n in range(last + 1):
        end = n + g(n)
        if end > scan_cap:
            continue
        if bad_count(end + 1) - bad_count(n) == 0:
            return MetastableWitness(n, (0, n))
    return MetastableWitness(None, (0, last))


# ---------------------------------------------------------------------------
# the declared family of counterexample functions


def g_constant(k: int) -> Counterexample:
    g = lambda n: k  # noqa: E731
    g.__name__ = f"const:{k}"
    g.monotone = True  # type: ignore[attr-defined]
    return g


def g_linear(k: int) -> Counterexample:
    g = lambda n: n + k  # noqa: E731
    g.__name__ = f"linear:{k}"
    g.monotone = True  # type: ignore[attr-defined]
    return g


def g_affine(a: int, b: int) -> Counterexample:
    g = lambda n: a * n + b  # noqa: E731
    g.__name__ = f"affine:{a},{b}"
    g.monotone = True  # type: ignore[attr-defined]
    return g


def parse_g(spec: str) -> Counterexample:
    """Parse ``const:k``, ``linear:k`` (``n + k``) or ``affine:a,b`` (``a*n + b``)."""
    kind, _, args = spec.strip().partition(":")
    try:
        nums = [int(t) for t in args.split(",")] if args else []
    except ValueError:
        raise ValueError(f"bad counterexample descriptor {spec!r}") from None
    if any(v < 0 for v in nums):
        raise ValueError(f"counterexample parameters must be nonnegative: {spec!r}")
    if kind == "const" and len(nums) == 1:
        return g_constant(nums[0])
    if kind == "linear" and len(nums) == 1:
        return g_linear(nums[0])
    if kind == "affine" and len(nums) == 2:
        return g_affine(*nums)
    raise ValueError(f"bad counterexample descriptor {spec!r}")
