"""A fixed enumeration of two-symbol Turing machines and an exact simulator.

Encoding v1
-----------
A natural ``m >= 2`` is read through its binary expansion with the leading 1
removed (the *payload*).  The payload is parsed as

1. the state count ``k >= 1`` in unary: ``k - 1`` ones followed by a ``0``;
2. ``2k`` transition entries, in the order ``(0,0), (0,1), (1,0), ... (k-1,1)``
   for ``(state, read symbol)``.  An entry is either ``0`` (HALT) or
   ``1`` followed by the next state in ``ceil(log2 k)`` bits (most significant
   first, must be ``< k``), the written symbol (1 bit) and the move
   (1 bit: ``0`` = L, ``1`` = R).

The payload must be consumed exactly.  Every other natural (``0``, ``1``,
truncated or overlong payloads, out-of-range states) decodes to the one-state
machine that halts immediately, whose own code is 8.

Simulation
----------
The tape is unbounded in both directions with blank symbol 0.  Input ``m`` is
written as ``m`` consecutive 1s with the head on the leftmost of them, state 0.
Each step looks up the entry for the current (state, symbol); an applied
transition is one step, and finding HALT also counts as a step, so a machine
that halts immediately halts at step 1.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional

ENCODING_VERSION = 1

Entry = Optional[tuple[int, int, str]]  # (next state, write, move) or None for HALT


@dataclass(frozen=True)
class Machine:
    n_states: int
    table: tuple[Entry, ...]

    def __post_init__(self) -> None:
        if self.n_states < 1 or len(self.table) != 2 * self.n_states:
            raise ValueError("table must have exactly two entries per state")
        for e in self.table:
            if e is not None:
                s, w, mv = e
                if not (0 <= s < self.n_states and w in (0, 1) and mv in ("L", "R")):
                    raise ValueError(f"malformed entry {e!r}")

    def entry(self, state: int, symbol: int) -> Entry:
        return self.table[2 * state + symbol]


HALT_MACHINE = Machine(1, (None, None))
RIGHT_FOREVER = Machine(1, ((0, 0, "R"), (0, 1, "R")))


def _state_bits(k: int) -> int:
    return (k - 1).bit_length()


def encode(machine: Machine) -> int:
    k = machine.n_states
    bits = ["1" * (k - 1), "0"]
    width = _state_bits(k)
    for e in machine.table:
        if e is None:
            bits.append("0")
        else:
            s, w, mv = e
            bits.append("1" + (format(s, f"0{width}b") if width else "") + str(w) + ("1" if mv == "R" else "0"))
    return int("1" + "".join(bits), 2)


def decode(m: int) -> Machine:
    """Total decoder: malformed codes give :data:`HALT_MACHINE`."""
    if m < 2:
        return HALT_MACHINE
    payload = bin(m)[3:]
    k = 0
    pos = 0
    while pos < len(payload) and payload[pos] == "1":
        k += 1
        pos += 1
    if pos >= len(payload):
        return HALT_MACHINE
    pos += 1
    k += 1
    width = _state_bits(k)
    table: list[Entry] = []
    for _ in range(2 * k):
        if pos >= len(payload):
            return HALT_MACHINE
        if payload[pos] == "0":
            table.append(None)
            pos += 1
            continue
        chunk = payload[pos + 1 : pos + 3 + width]
        if len(chunk) < width + 2:
            return HALT_MACHINE
        s = int(chunk[:width], 2) if width else 0
        if s >= k:
            return HALT_MACHINE
        table.append((s, int(chunk[width]), "R" if chunk[width + 1] == "1" else "L"))
        pos += 3 + width
    if pos != len(payload):
        return HALT_MACHINE
    return Machine(k, tuple(table))


def _state_name(i: int) -> str:
    if i >= 26:
        raise ValueError("textual format supports at most 26 states")
    return chr(ord("A") + i)


def to_text(machine: Machine) -> str:
    """Standard compact notation: ``1RB1LA_1LA---``; states are separated by ``_``."""
    out = []
    for s in range(machine.n_states):
        cells = []
        for sym in (0, 1):
            e = machine.entry(s, sym)
            cells.append("---" if e is None else f"{e[1]}{e[2]}{_state_name(e[0])}")
        out.append("".join(cells))
    return "_".join(out)


def from_text(text: str) -> Machine:
    rows = text.strip().split("_")
    k = len(rows)
    table: list[Entry] = []
    for row in rows:
        if len(row) != 6:
            raise ValueError(f"bad state row {row!r}")
        for cell in (row[:3], row[3:]):
            if cell == "---":
                table.append(None)
                continue
            w, mv, st = cell
            if w not in "01" or mv not in "LR" or not "A" <= st <= "Z":
                raise ValueError(f"bad transition {cell!r}")
            table.append((ord(st) - ord("A"), int(w), mv))
    return Machine(k, tuple(table))


def parse_machine(spec: str) -> Machine:
    """A decimal code or the textual notation."""
    spec = spec.strip()
    return decode(int(spec)) if spec.isdigit() else from_text(spec)


@dataclass(frozen=True)
class HaltResult:
    """``step`` is the exact halting step, or None if still running after ``budget`` steps."""

    step: int | None
    budget: int

    @property
    def halted(self) -> bool:
        return self.step is not None


def run_machine(machine: Machine, input_ones: int, budget: int) -> HaltResult:
    """Simulate at most ``budget`` steps on ``input_ones`` consecutive 1s."""
    # the head moves at most one cell per step, so a window of 2*budget+1 cells suffices
    width = 2 * budget + 3
    origin = budget + 1
    tape = bytearray(width)
    ones = min(input_ones, width - origin)
    tape[origin : origin + ones] = b"\x01" * ones
    head, state = origin, 0
    table = machine.table
    for step in range(1, budget + 1):
        e = table[2 * state + tape[head]]
        if e is None:
            return HaltResult(step, budget)
        state, tape[head] = e[0], e[1]
        head += 1 if e[2] == "R" else -1
    return HaltResult(None, budget)


def tm_decode(m: int) -> Machine:
    return decode(m)


def tm_halts_in(m: int, budget: int) -> HaltResult:
    """Run ``T_m`` on input ``m`` for at most ``budget`` steps."""
    return run_machine(decode(m), m, budget)


class HaltingTable:
    """Cached halting steps of ``T_m`` on input ``m``; safe to share between threads.

    A result is stored together with the budget it was computed under; a larger
    budget triggers re-simulation only for machines still running.
    """

    def __init__(self) -> None:
        self._known: dict[int, HaltResult] = {}
        self._lock = threading.Lock()

    def halting_step(self, m: int, budget: int) -> int | None:
        """Exact halting step if it is ``<= budget``, else None."""
        with self._lock:
            res = self._known.get(m)
        if res is None or (res.step is None and res.budget < budget):
            res = tm_halts_in(m, budget)
            with self._lock:
                old = self._known.get(m)
                if old is None or (old.step is None and old.budget < res.budget):
                    self._known[m] = res
                res = self._known[m]
        if res.step is not None and res.step <= budget:
            return res.step
        return None


DEFAULT_TABLE = HaltingTable()
