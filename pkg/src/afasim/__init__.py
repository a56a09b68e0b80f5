"""Affine finite automata simulator with exact and high-precision backends."""
from __future__ import annotations

from .core import (
    LEFT_END,
    RIGHT_END,
    AffineError,
    AffineOperator,
    AfaMachine,
    RunResult,
    StateVector,
    affinize,
    apply,
    block_diag,
    l1_norm,
    run,
    run_reference,
    tensor_op,
    tensor_vec,
    weighting,
)
from .encoding import (
    LanguageOracle,
    build_combined,
    build_rotation_machine,
    collection_matrix,
    oracle_from_spec,
    phi,
    predicted_acceptance_combined,
    theta,
)
from .field import NumericField
from .powereq import blocks, build_powereq, is_member, member_string, predicted_acceptance_powereq, t_sum

__version__ = "0.1.0"

__all__ = [
    "LEFT_END", "RIGHT_END", "AffineError", "AffineOperator", "AfaMachine", "RunResult", "StateVector",
    "affinize", "apply", "block_diag", "l1_norm", "run", "run_reference", "tensor_op", "tensor_vec",
    "weighting", "LanguageOracle", "build_combined", "build_rotation_machine", "collection_matrix",
    "oracle_from_spec", "phi", "predicted_acceptance_combined", "theta", "NumericField", "blocks",
    "build_powereq", "is_member", "member_string", "predicted_acceptance_powereq", "t_sum",
]
