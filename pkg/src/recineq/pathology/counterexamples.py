"""Case II instances built on a Specker sequence.

Both satisfy the recursive inequality and converge, yet ``mu`` has no
computable rate, showing that the Case II rates need the modulus premise.
"""

from __future__ import annotations

from fractions import Fraction

from ..ratecalc import StarInstance
from ..seqcore import Seq
from .machines import DEFAULT_TABLE, HaltingTable
from .specker import check_specker_input, specker_seq

UNBOUNDED_ALPHA_NOTE = (
    "variant b uses alpha_n = n + 1, which is not bounded although the "
    "surrounding statement assumes a bounded alpha; implemented as written"
)


def case2_counterexample(
    variant: str, a_seq: Seq, horizon: int, table: HaltingTable = DEFAULT_TABLE
) -> StarInstance:
    """Variant ``a``: ``mu = beta = s``, ``alpha = 1``, ``gamma_n = s_{n+1}``.

    Variant ``b``: ``mu = s`` for ``a = 1/(n+1)``, ``alpha_n = n + 1``,
    ``beta_n = 1/(n+1)^2`` and ``gamma_n = 2``.
    """
    pre = check_specker_input(a_seq, horizon + 1)
    if not pre.passed:
        raise ValueError(f"a must be positive and strictly decreasing: {pre.first_violation}")
    s = specker_seq(a_seq, table)
    if variant == "a":
        gamma = Seq(lambda n: s(n + 1), name="s(n+1)")
        return StarInstance(s, Seq.constant(1), s, gamma, c=Fraction(a_seq(0)), alpha_bar=Fraction(1))
    if variant == "b":
        for n in range(horizon + 2):
            if a_seq(n) != Fraction(1, n + 1):
                raise ValueError(f"variant b needs a_n = 1/(n+1); differs at n = {n}")
        return StarInstance(
            s,
            Seq(lambda n: Fraction(n + 1), name="n+1"),
            Seq(lambda n: Fraction(1, (n + 1) ** 2), name="1/(n+1)^2"),
            Seq.constant(2),
            c=Fraction(1),
            notes=[UNBOUNDED_ALPHA_NOTE],
        )
    raise ValueError(f"unknown variant {variant!r}")
