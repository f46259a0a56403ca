"""Computability-theoretic constructions: machines, Specker sequences, block padding."""

from .block import (
    BlockConstruction,
    BlockPreconditionError,
    BlockSearchError,
    block_mu,
    block_padding,
    check_block_invariants,
    check_block_mu,
    nu_from_increasing,
    nu_zero,
    summability_bound,
)
from .counterexamples import case2_counterexample
from .machines import (
    ENCODING_VERSION,
    HALT_MACHINE,
    RIGHT_FOREVER,
    HaltingTable,
    HaltResult,
    Machine,
    decode,
    encode,
    from_text,
    parse_machine,
    run_machine,
    tm_decode,
    tm_halts_in,
    to_text,
)
from .specker import check_specker_input, specker, specker_rows, specker_seq, specker_witness

__all__ = [name for name in dir() if not name.startswith("_")]
