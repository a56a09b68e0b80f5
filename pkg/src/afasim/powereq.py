"""Exact recognizer for the language of geometrically growing a-blocks.

A member looks like ``a^{7*8^0} b a^{7*8^1} b ... b a^{7*8^n}``.  The machine
keeps four parts in its 20-entry state vector:

    0..8    w (x) w   with w = (1, 8 t_{j-1}, t_j)
    9..17   z (x) z   with z = (1, 8 t_j, 0)
    18      running sum T of squared block mismatches
    19      balancing entry so the entries sum to 1

and finishes in ``(1, k T_x, -k T_x, 0, ..., 0)``, which is accepted with
probability ``1 / (1 + 2 k T_x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import gadgets
from .core import LEFT_END, RIGHT_END, AfaMachine, affinize, block_diag, tensor_op, tensor_vec
from .field import NumericField

ALPHABET = ("a", "b")
DEFAULT_K = 25
DEFAULT_MAX_N = 6
FIRST_BLOCK = 7
RATIO = 8


@dataclass(frozen=True)
class Layout:
    vprime_block: range = range(0, 9)
    vpp_block: range = range(9, 18)
    t_entry: int = 18
    bar_entry: int = 19

    @property
    def dim(self) -> int:
        return self.bar_entry + 1

    def check(self) -> None:
        covered = sorted([*self.vprime_block, *self.vpp_block, self.t_entry, self.bar_entry])
        if covered != list(range(self.dim)):
            raise ValueError("layout ranges must be disjoint and cover every entry")


LAYOUT = Layout()


@dataclass(frozen=True)
class BlockDecomposition:
    counts: tuple

    @property
    def n(self) -> int:
        """Number of b separators."""
        return len(self.counts) - 1

    def join(self) -> str:
        return "b".join("a" * t for t in self.counts)


@dataclass(frozen=True, eq=False)
class PowerEqMachine:
    machine: AfaMachine
    k: int
    layout: Layout


def blocks(x: str) -> BlockDecomposition:
    foreign = set(x) - set(ALPHABET)
    if foreign:
        raise ValueError(f"unexpected symbols {sorted(foreign)}; input must be over {{a, b}}")
    return BlockDecomposition(tuple(len(part) for part in x.split("b")))


def t_sum(d: BlockDecomposition) -> int:
    counts = d.counts
    total = (counts[0] - FIRST_BLOCK) ** 2
    for prev, cur in zip(counts, counts[1:]):
        total += (cur - RATIO * prev) ** 2
    return total


def is_member(x: str) -> bool:
    return t_sum(blocks(x)) == 0


def member_string(n: int, max_n: int = DEFAULT_MAX_N) -> str:
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > max_n:
        raise ValueError(f"n={n} exceeds the configured maximum {max_n}")
    return "b".join("a" * (FIRST_BLOCK * RATIO**j) for j in range(n + 1))


def predicted_acceptance_powereq(x: str, k: int) -> Fraction:
    return Fraction(1, 1 + 2 * k * t_sum(blocks(x)))


def _kron3(m: np.ndarray) -> np.ndarray:
    return tensor_op(m, m)


def _linear_parts(k: int) -> dict:
    """19x19 integer maps acting on everything except the balancing entry."""
    lay = LAYOUT
    d = lay.bar_entry
    eye = np.eye(d, dtype=object) * 1
    w, z, t = lay.vprime_block, lay.vpp_block, lay.t_entry

    def arr(rows):
        return np.array(rows, dtype=object)

    # reading a: w[2] += 1 and z[1] += 8, with w[0] = z[0] = 1 pinned
    inc_w = gadgets.count_by(1, 3, src=0, dst=2)
    inc_z = gadgets.count_by(RATIO, 3, src=0, dst=1)
    step_a = block_diag([_kron3(inc_w), _kron3(inc_z), arr([[1]])])

    # b, step 1: w = (1, p, q) -> (1, q - p, 0)
    diff = arr([[1, 0, 0], [0, -1, 1], [0, 0, 0]])
    subtract = block_diag([_kron3(diff), np.eye(9, dtype=object) * 1, arr([[1]])])
    # b, step 2: T += (w (x) w)[4], the square of the mismatch
    accumulate = eye.copy()
    accumulate[t, w[4]] = 1
    # b, step 3: w (x) w <- z (x) z
    copy = eye.copy()
    for i in range(9):
        copy[w[i], w[i]] = 0
        copy[w[i], z[i]] = 1
    # b, step 4: z <- (1, 0, 0)
    reset_z = arr([[1, 0, 0], [0, 0, 0], [0, 0, 0]])
    reset = block_diag([np.eye(9, dtype=object) * 1, _kron3(reset_z), arr([[1]])])
    step_b = reset.dot(copy).dot(accumulate).dot(subtract)

    # left end-marker: e_0 -> w = (1, 7, 0), z = (1, 0, 0), T = 0
    start = eye.copy()
    seed = np.zeros(d, dtype=object)
    seed[w.start:w.stop] = tensor_vec(arr([1, FIRST_BLOCK, 0]), arr([1, FIRST_BLOCK, 0]))
    seed[z.start:z.stop] = tensor_vec(arr([1, 0, 0]), arr([1, 0, 0]))
    start[:, w[0]] = seed

    # right end-marker: steps 1-2, then (1, k T, -k T, 0, ...)
    finish = np.zeros((d, d), dtype=object)
    finish[0, w[0]] = 1
    finish[1, t] = k
    finish[2, t] = -k
    step_end = finish.dot(accumulate).dot(subtract)

    return {"a": step_a, "b": step_b, LEFT_END: start, RIGHT_END: step_end}


def build_powereq(k: int = DEFAULT_K) -> PowerEqMachine:
    if int(k) != k or k < 2:
        raise ValueError(f"k must be an integer >= 2, got {k}")
    LAYOUT.check()
    field = NumericField.exact()
    ops = {sym: affinize(lin, field) for sym, lin in _linear_parts(int(k)).items()}
    machine = AfaMachine(ALPHABET, ops, initial=0, accepting={0}, field=field, name=f"powereq(k={k})", layout=LAYOUT)
    return PowerEqMachine(machine, int(k), LAYOUT)
