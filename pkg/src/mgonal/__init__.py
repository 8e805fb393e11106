"""m-gonal numeration: sequences, decompositions, exact and sampled statistics."""

from .seqcore import (
    Decomposition,
    DigitVector,
    IllegalDecompositionError,
    MGonParams,
    bin_of,
    decompose,
    decompose_greedy,
    gaps_of,
    is_legal,
    omega,
    recompose,
    sequence_prefix,
    term,
)

__version__ = "0.1.0"

__all__ = [
    "Decomposition",
    "DigitVector",
    "IllegalDecompositionError",
    "MGonParams",
    "bin_of",
    "decompose",
    "decompose_greedy",
    "gaps_of",
    "is_legal",
    "omega",
    "recompose",
    "sequence_prefix",
    "term",
]
