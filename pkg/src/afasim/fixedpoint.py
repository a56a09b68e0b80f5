"""Compile machines to fixed-point CSR programs and execute them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .core import LEFT_END, RIGHT_END, AfaMachine, RunResult, StateVector, weighting
from .field import NumericField, to_fraction

START_INT_LIMBS = 2
MAX_INT_LIMBS = 64


@dataclass(frozen=True, eq=False)
class FixedProgram:
    """Quantized operator tables plus the table sequence applied for each symbol.

    A symbol usually owns one table; a machine that supplies factors for a
    symbol gets one table per factor, applied right to left.
    """

    symbols: tuple
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    frac: int
    lookup: np.ndarray | None
    steps: tuple

    @property
    def scale_bits(self) -> int:
        return _kernels.LIMB_BITS * self.frac

    @property
    def dim(self) -> int:
        return self.indptr.shape[1] - 1

    @property
    def codes(self) -> dict:
        return {s: i for i, s in enumerate(self.symbols)}

    def symbol_codes(self, word) -> np.ndarray:
        """Symbol indices of ``¢ word $``."""
        code = self.codes
        if isinstance(word, str) and self.lookup is not None:
            body = self.lookup[np.frombuffer(word.encode("ascii"), dtype=np.uint8)]
        else:
            body = np.array([code[s] for s in word], dtype=np.int64)
        out = np.empty(len(body) + 2, dtype=np.int64)
        out[0] = code[LEFT_END]
        out[1:-1] = body
        out[-1] = code[RIGHT_END]
        return out

    def expand(self, symbols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Table codes for a symbol sequence and the step index ending each symbol."""
        counts = np.array([len(t) for t in self.steps], dtype=np.int64)[symbols]
        ends = np.cumsum(counts)
        if len(ends) == len(symbols) and ends[-1] == len(symbols):
            flat = np.array([t[0] for t in self.steps], dtype=np.uint8)[symbols]
            return flat, ends
        flat = np.concatenate([np.array(self.steps[c], dtype=np.uint8) for c in range(len(self.steps))])
        first = np.concatenate([[0], np.cumsum([len(t) for t in self.steps])[:-1]])
        offsets = np.arange(ends[-1]) - np.repeat(ends - counts, counts)
        return flat[np.repeat(first[symbols], counts) + offsets], ends

    def encode(self, word) -> np.ndarray:
        return self.expand(self.symbol_codes(word))[0]


def frac_limbs(field: NumericField) -> int:
    """Fractional limbs giving at least ``precision_bits`` bits after the point."""
    if field.is_exact:
        return 0
    return math.ceil(field.precision_bits / _kernels.LIMB_BITS)


def quantize(value, scale_bits: int) -> int:
    """Nearest integer to ``value * 2**scale_bits``."""
    if hasattr(value, "_mpf_"):
        sign, man, exp, _ = value._mpf_
        shift = exp + scale_bits
        if shift >= 0:
            n = int(man) << shift
        else:
            n = (int(man) + (1 << (-shift - 1))) >> -shift
        return -n if sign else n
    return round(to_fraction(value) * (1 << scale_bits))


def compile_machine(machine: AfaMachine) -> FixedProgram | None:
    frac = frac_limbs(machine.field)
    scale = _kernels.LIMB_BITS * frac
    one = 1 << scale
    dim = machine.dim
    rows = []
    steps = []
    factors = machine.factors or {}
    tables = []
    for sym in machine.symbols:
        ops = list(factors.get(sym) or [machine.operators[sym]])
        # applied right to left
        steps.append(tuple(range(len(tables), len(tables) + len(ops)))[::-1])
        tables.extend((sym, op) for op in ops)
    for sym, op in tables:
        mat = op.matrix
        q = np.zeros((dim, dim), dtype=object)
        for i, j in zip(*np.nonzero(mat != 0)):
            x = mat[i, j]
            if machine.field.is_exact and to_fraction(x).denominator != 1:
                return None
            q[i, j] = quantize(x, scale)
        if not machine.field.is_exact:
            # rounding may break exact column sums; the last row balances them
            for j in range(dim):
                residual = one - sum(q[:, j])
                slack = (one >> (machine.field.precision_bits // 2)) + 4 * dim
                if abs(residual) > slack:
                    raise ValueError(f"column {j} of operator {sym!r} is not affine")
                q[dim - 1, j] += residual
        rows.append(q)

    biggest = max(abs(int(x)) for q in rows for x in q.flat)
    lo = max(_kernels.limbs_needed(biggest), frac + 1)
    nnz = [[int(np.count_nonzero(q[i] != 0)) for i in range(dim)] for q in rows]
    max_row = max(max(r) for r in nnz)
    if max_row * lo >= _kernels.COLUMN_CAPACITY:
        return None
    maxnnz = max(max(sum(r) for r in nnz), 1)
    nsym = len(rows)
    indptr = np.zeros((nsym, dim + 1), dtype=np.int64)
    indices = np.zeros((nsym, maxnnz), dtype=np.int64)
    data = np.zeros((nsym, maxnnz, lo), dtype=np.int64)
    for s, q in enumerate(rows):
        p = 0
        for i in range(dim):
            for j in np.flatnonzero(q[i] != 0):
                indices[s, p] = j
                data[s, p] = _kernels.int_to_limbs(int(q[i, j]), lo)
                p += 1
            indptr[s, i + 1] = p

    lookup = None
    if all(len(s) == 1 and ord(s) < 128 for s in machine.alphabet):
        lookup = np.full(256, 255, dtype=np.uint8)
        for i, s in enumerate(machine.symbols[: len(machine.alphabet)]):
            lookup[ord(s)] = i
    return FixedProgram(tuple(machine.symbols), indptr, indices, data, frac, lookup, tuple(steps))


def _encode_vector(values, lv: int) -> np.ndarray:
    out = np.zeros((len(values), lv), dtype=np.int64)
    for r, x in enumerate(values):
        if x:
            out[r] = _kernels.int_to_limbs(int(x), lv)
    return out


def _decode_vector(vec: np.ndarray) -> list[int]:
    live = np.flatnonzero(vec.any(axis=1))
    values = [0] * len(vec)
    for r in live:
        values[r] = _kernels.limbs_to_int(vec[r])
    return values


def run_codes(program: FixedProgram, codes: np.ndarray, start: list[int], record: bool = False):
    """Run raw codes from integer start vector ``start`` (scaled by 2**scale_bits).

    Returns ``(final_ints, max_dev, trace_ints)``, widening the integer part
    whenever the kernel reports an overflow.
    """
    int_limbs = max(START_INT_LIMBS, max(_kernels.limbs_needed(x) for x in start) - program.frac)
    values = list(start)
    pending = codes
    max_dev = 0.0
    trace = [] if record else None
    while True:
        lv = program.frac + int_limbs
        v0 = _encode_vector(values, lv)
        status, vec, dev, tr, done = _kernels.run(
            program.indptr, program.indices, program.data, pending, v0, program.frac, record
        )
        max_dev = max(max_dev, dev)
        if record:
            kept = tr[: done + 1]
            rows = [_decode_vector(snap) for snap in kept]
            trace.extend(rows if not trace else rows[1:])
        values = _decode_vector(vec)
        if status == _kernels.OK:
            return values, max_dev, trace
        int_limbs *= 2
        if int_limbs > MAX_INT_LIMBS:
            raise OverflowError("state vector outgrew the fixed-point range")
        pending = pending[done:]


def _to_field(ints: list[int], field: NumericField, scale_bits: int) -> np.ndarray:
    if field.is_exact:
        return np.array([Fraction(x) for x in ints], dtype=object)
    ctx = field.ctx
    return np.array([ctx.ldexp(ctx.mpf(x), -scale_bits) for x in ints], dtype=object)


def execute(machine: AfaMachine, word, *, trace: bool = False) -> RunResult:
    program = machine.program
    codes, ends = program.expand(program.symbol_codes(word))
    start = [0] * machine.dim
    start[machine.initial] = 1 << program.scale_bits
    final, dev, steps = run_codes(program, codes, start, trace)
    if trace and len(ends) != len(codes):
        steps = [steps[0]] + [steps[e] for e in ends]
    vec = StateVector(_to_field(final, machine.field, program.scale_bits), machine.field)
    snaps = None
    if trace:
        snaps = [StateVector(_to_field(s, machine.field, program.scale_bits), machine.field) for s in steps]
    field = machine.field
    if field.is_exact:
        # integer vector: skip Fraction arithmetic
        prob = Fraction(sum(abs(final[j]) for j in machine.accepting), sum(abs(x) for x in final))
        deviation = Fraction(dev)
    else:
        prob = weighting(vec, machine.accepting)
        deviation = field.ctx.mpf(dev)
    return RunResult(vec, prob, snaps, deviation, f"fixed/{_kernels.active_backend()}")
