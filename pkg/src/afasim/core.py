"""Affine finite automata: state vectors, affine operators and runs.

Indices are 0-based throughout the code base.  A run of machine ``M`` on
``x = x_1 ... x_l`` computes::

    v_f = A_$ A_{x_l} ... A_{x_1} A_¢ e_I

and accepts with probability ``sum_{j in accepting} |v_f[j]| / |v_f|_1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .field import NumericField

LEFT_END = "¢"
RIGHT_END = "$"
END_MARKERS = (LEFT_END, RIGHT_END)


class AffineError(ValueError):
    """An operator or vector violates the sum-to-one invariant."""


class DimensionError(ValueError):
    pass


class UnknownSymbolError(ValueError):
    pass


def _column(values, field: NumericField | None) -> np.ndarray:
    arr = np.array(list(values), dtype=object)
    if field is not None:
        arr = np.array([field(x) for x in arr], dtype=object)
    return arr


def _matrix(rows, field: NumericField | None) -> np.ndarray:
    arr = np.array(rows, dtype=object)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {arr.shape}")
    if field is not None:
        arr = np.vectorize(field, otypes=[object])(arr)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    entries: np.ndarray
    field: NumericField = dc_field(default_factory=NumericField.exact)

    @classmethod
    def of(cls, values: Iterable, field: NumericField | None = None, check: bool = True) -> "StateVector":
        field = field or NumericField.exact()
        vec = cls(_column(values, field), field)
        if check:
            vec.check()
        return vec

    @classmethod
    def basis(cls, dim: int, index: int, field: NumericField | None = None) -> "StateVector":
        if not 0 <= index < dim:
            raise IndexError(f"basis index {index} outside 0..{dim - 1}")
        values = [0] * dim
        values[index] = 1
        return cls.of(values, field)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def total(self):
        return sum(self.entries, self.field.zero())

    def deviation(self):
        return abs(self.total() - 1)

    def check(self) -> "StateVector":
        if self.dim < 1:
            raise DimensionError("state vector must have at least one entry")
        if self.deviation() > self.field.tolerance:
            raise AffineError(f"entries sum to {self.total()}, not 1")
        return self

    def __len__(self):
        return self.dim

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def tolist(self) -> list:
        return list(self.entries)


@dataclass(frozen=True, eq=False)
class AffineOperator:
    """Square matrix whose every column sums to 1."""

    matrix: np.ndarray
    field: NumericField = dc_field(default_factory=NumericField.exact)

    def __post_init__(self):
        rows, cols = self.matrix.shape
        if rows != cols:
            raise DimensionError(f"affine operator must be square, got {rows}x{cols}")
        sums = self.column_sums()
        tol = self.field.tolerance
        bad = [j for j, s in enumerate(sums) if abs(s - 1) > tol]
        if bad:
            raise AffineError(f"columns {bad[:5]} do not sum to 1")

    @classmethod
    def of(cls, rows, field: NumericField | None = None) -> "AffineOperator":
        field = field or NumericField.exact()
        return cls(_matrix(rows, field), field)

    @classmethod
    def identity(cls, dim: int, field: NumericField | None = None) -> "AffineOperator":
        return cls.of(np.eye(dim, dtype=int).tolist(), field)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def column_sums(self) -> list:
        zero = self.field.zero()
        out = []
        for j in range(self.matrix.shape[1]):
            col = self.matrix[:, j]
            out.append(sum(col[col != 0], zero))
        return out

    def max_column_deviation(self):
        return max(abs(s - 1) for s in self.column_sums())

    def __matmul__(self, other: "AffineOperator") -> "AffineOperator":
        if self.dim != other.dim:
            raise DimensionError(f"cannot compose {self.dim}x{self.dim} with {other.dim}x{other.dim}")
        return AffineOperator(sparse_dot(self.matrix, other.matrix, self.field.zero()), self.field)


def sparse_dot(a: np.ndarray, b: np.ndarray, zero=0) -> np.ndarray:
    """Object-matrix product that skips zero entries of ``a``."""
    out = np.full((a.shape[0], b.shape[1]), zero, dtype=object)
    b_rows = [[(j, b[k, j]) for j in np.flatnonzero(b[k] != 0)] for k in range(b.shape[0])]
    for i in range(a.shape[0]):
        acc = {}
        row = a[i]
        for k in np.flatnonzero(row != 0):
            x = row[k]
            for j, y in b_rows[k]:
                acc[j] = acc[j] + x * y if j in acc else x * y
        for j, value in acc.items():
            out[i, j] = value
    return out


def _raw(x) -> np.ndarray:
    if isinstance(x, StateVector):
        return x.entries
    if isinstance(x, AffineOperator):
        return x.matrix
    return np.array(x, dtype=object)


def l1_norm(v):
    """Sum of absolute values of the entries."""
    entries = _raw(v)
    if entries.ndim != 1 or len(entries) < 1:
        raise DimensionError("l1_norm needs a non-empty vector")
    return sum((abs(x) for x in entries[1:]), abs(entries[0]))


def apply(op, v):
    """Matrix-vector product.

    Affine operator on a state vector gives a state vector; anything else
    gives a plain object array.
    """
    m = _raw(op)
    vec = _raw(v)
    if m.ndim != 2 or m.shape[1] != len(vec):
        raise DimensionError(f"operator of shape {m.shape} cannot act on a vector of length {len(vec)}")
    out = m.dot(vec)
    if isinstance(op, AffineOperator) and isinstance(v, StateVector):
        return StateVector(out, v.field)
    return out


def tensor_vec(u, v):
    """Kronecker product, row-major: ``out[i * len(v) + j] = u[i] * v[j]``."""
    out = np.kron(_raw(u), _raw(v))
    if isinstance(u, StateVector) and isinstance(v, StateVector):
        return StateVector(out, u.field)
    return out


def tensor_op(a, b):
    """Kronecker product of matrices, consistent with :func:`tensor_vec`."""
    left, right = _raw(a), _raw(b)
    p, q = right.shape
    zero = a.field.zero() if isinstance(a, AffineOperator) else 0
    out = np.full((left.shape[0] * p, left.shape[1] * q), zero, dtype=object)
    for i, j in zip(*np.nonzero(left != 0)):
        out[i * p:(i + 1) * p, j * q:(j + 1) * q] = right * left[i, j]
    if isinstance(a, AffineOperator) and isinstance(b, AffineOperator):
        return AffineOperator(out, a.field)
    return out


def block_diag(blocks: Sequence) -> np.ndarray:
    mats = [_raw(b) for b in blocks]
    for m in mats:
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"block of shape {m.shape} is not square")
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=object)
    at = 0
    for m in mats:
        k = m.shape[0]
        out[at:at + k, at:at + k] = m
        at += k
    if blocks and all(isinstance(b, AffineOperator) for b in blocks):
        return AffineOperator(out, blocks[0].field)
    return out


def affinize(m, field: NumericField | None = None) -> AffineOperator:
    """Embed a d x d linear map into a (d+1) x (d+1) affine operator.

    The new last row holds ``1 - (column sum)`` for each original column and
    the new last column is ``e_{d+1}``, so for ``(v, s)`` with entry sum 1 the
    result is ``(M v, 1 - sum(M v))``.
    """
    field = field or (m.field if isinstance(m, AffineOperator) else NumericField.exact())
    lin = _matrix(_raw(m).tolist(), field)
    d = lin.shape[0]
    if lin.shape[1] != d:
        raise DimensionError(f"affinize needs a square matrix, got {lin.shape}")
    out = np.empty((d + 1, d + 1), dtype=object)
    out[:d, :d] = lin
    zero, one = field.zero(), field.one()
    for j in range(d):
        col = lin[:, j]
        out[d, j] = one - sum(col[col != 0], zero)
    out[:d, d] = zero
    out[d, d] = one
    return AffineOperator(out, field)


def weighting(v, accepting: Iterable[int]):
    """Observation probability of the accepting set under the l1 rule."""
    entries = _raw(v)
    norm = l1_norm(entries)
    if norm == 0:
        raise ZeroDivisionError("weighting of a zero vector")
    picked = [abs(entries[j]) for j in accepting]
    if not picked:
        return norm * 0
    mass = sum(picked[1:], picked[0])
    if isinstance(mass, int) and isinstance(norm, int):
        return Fraction(mass, norm)
    return mass / norm


@dataclass(frozen=True, eq=False)
class AfaMachine:
    alphabet: tuple
    operators: Mapping[str, AffineOperator]
    initial: int
    accepting: frozenset
    field: NumericField = dc_field(default_factory=NumericField.exact)
    name: str = "afa"
    layout: Any = None
    # optional per-symbol factorizations: operators[s] == f[0] @ f[1] @ ...;
    # the fixed-point engine applies the sparser factors one at a time
    factors: Mapping[str, tuple] | None = None

    def __post_init__(self):
        for end in END_MARKERS:
            if end in self.alphabet:
                raise ValueError(f"end-marker {end!r} may not be part of the alphabet")
        missing = [s for s in self.symbols if s not in self.operators]
        if missing:
            raise ValueError(f"no operator for symbols {missing}")
        dims = {op.dim for op in self.operators.values()}
        if len(dims) != 1:
            raise DimensionError(f"operators disagree on dimension: {sorted(dims)}")
        m = dims.pop()
        if not 0 <= self.initial < m:
            raise IndexError(f"initial state {self.initial} outside 0..{m - 1}")
        if any(not 0 <= j < m for j in self.accepting):
            raise IndexError("accepting state out of range")
        for sym, parts in (self.factors or {}).items():
            if sym not in self.operators or not parts or any(
                not isinstance(f, AffineOperator) or f.dim != m for f in parts
            ):
                raise ValueError(f"bad factorization for symbol {sym!r}")
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))

    @property
    def symbols(self) -> tuple:
        return self.alphabet + END_MARKERS

    @property
    def dim(self) -> int:
        return next(iter(self.operators.values())).dim

    def initial_vector(self) -> StateVector:
        return StateVector.basis(self.dim, self.initial, self.field)

    @cached_property
    def program(self):
        """Fixed-point compilation, or None when the machine needs the reference engine."""
        from .fixedpoint import compile_machine

        return compile_machine(self)


@dataclass(frozen=True, eq=False)
class RunResult:
    final_vector: StateVector
    accept_probability: Any
    trace: list | None = None
    max_sum_deviation: Any = 0
    engine: str = "reference"

    @property
    def reject_probability(self):
        return 1 - self.accept_probability

    @property
    def accepted(self) -> bool:
        return self.accept_probability * 2 > 1


def check_word(machine: AfaMachine, word) -> None:
    allowed = set(machine.alphabet)
    unknown = set(word) - allowed
    if unknown:
        raise UnknownSymbolError(f"symbols {sorted(map(str, unknown))} are not in the alphabet {machine.alphabet}")


def run(machine: AfaMachine, word, *, trace: bool = False, engine: str = "auto") -> RunResult:
    """Run ``machine`` on ``word`` (end-markers are added here)."""
    check_word(machine, word)
    if engine not in ("auto", "fixed", "reference"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "reference" or (engine == "auto" and machine.program is None):
        return run_reference(machine, word, trace=trace)
    if machine.program is None:
        raise ValueError(f"machine {machine.name} cannot be compiled to fixed point")
    from .fixedpoint import execute

    return execute(machine, word, trace=trace)


def run_reference(machine: AfaMachine, word, *, trace: bool = False) -> RunResult:
    """Object-array evaluation in the machine's own field, one product per symbol."""
    check_word(machine, word)
    v = machine.initial_vector()
    steps = [v] if trace else None
    worst = v.deviation()
    for sym in (LEFT_END, *word, RIGHT_END):
        v = apply(machine.operators[sym], v)
        worst = max(worst, v.deviation())
        if trace:
            steps.append(v)
    return RunResult(v, weighting(v, machine.accepting), steps, worst, "reference")
