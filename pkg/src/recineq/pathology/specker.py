"""Specker-style sequences built from halting times.

``s_n = a_m`` for the least ``m <= n`` such that ``T_m`` on input ``m`` halts
at exactly step ``n``, and ``s_n = 0`` if there is no such ``m``.  For
decreasing positive ``a`` this converges to 0, and each term is computable,
but no computable rate of convergence exists.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

from ..certificate import Check
from ..seqcore import Number, Seq
from .machines import DEFAULT_TABLE, HaltingTable


def check_specker_input(a: Seq, upto: int) -> Check:
    """``a`` positive and strictly decreasing on ``[0, upto]``."""
    chk = Check("specker-input", checked_range=(0, upto))
    for n in range(upto + 1):
        if not a(n) > 0:
            chk.fail({"n": n, "a": a(n), "reason": "not positive"})
            break
        if n and not a(n) < a(n - 1):
            chk.fail({"n": n, "a": a(n), "reason": "not strictly decreasing"})
            break
    return chk


def specker_witness(n: int, budget: int | None = None, table: HaltingTable = DEFAULT_TABLE) -> int | None:
    """Least ``m <= n`` whose machine halts on input ``m`` at exactly step ``n``."""
    budget = n if budget is None else budget
    if budget < n:
        raise ValueError("simulation budget must be at least n")
    for m in range(n + 1):
        if table.halting_step(m, budget) == n:
            return m
    return None


def specker(a: Seq, n: int, budget: int | None = None, table: HaltingTable = DEFAULT_TABLE) -> Number:
    m = specker_witness(n, budget, table)
    return Fraction(0) if m is None else a(m)


def specker_seq(a: Seq, table: HaltingTable = DEFAULT_TABLE) -> Seq:
    """``n -> s_n`` as a sequence.

    Rows are computed in batches whose simulation budget doubles; this gives
    the same values as :func:`specker`, since a halting step does not depend
    on the budget once the budget covers it.
    """
    rows: list[SpeckerRow] = []
    lock = threading.Lock()

    def value(n: int) -> Number:
        with lock:
            if n >= len(rows):
                rows[:] = specker_rows(a, max(2 * len(rows), n, 64), table)
            return rows[n].value

    return Seq(value, a.backend, name=f"specker({a.name})")


@dataclass(frozen=True)
class SpeckerRow:
    n: int
    value: Fraction
    witness: int  # -1 when s_n = 0 by the default clause


def specker_rows(a: Seq, upto: int, table: HaltingTable | None = None) -> list[SpeckerRow]:
    """All rows ``(n, s_n, m or -1)`` for ``n <= upto`` from one pass over the machines."""
    table = table or DEFAULT_TABLE
    first: dict[int, int] = {}
    for m in range(upto + 1):
        t = table.halting_step(m, upto)
        # only m <= t can witness step t
        if t is not None and m <= t and t not in first:
            first[t] = m
    rows = []
    for n in range(upto + 1):
        m = first.get(n)
        rows.append(SpeckerRow(n, Fraction(0) if m is None else a(m), -1 if m is None else m))
    return rows
