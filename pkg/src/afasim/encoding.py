"""Membership of an arbitrary unary language packed into one rotation angle.

Bit ``i`` of the language (is ``a^i`` a member?) becomes the sign of the
base-8 digit ``8^-(i+2)`` of the angle, measured in full turns.  Rotating by
that angle ``8^(n+1)`` times and then by a quarter of ``pi`` leaves the point
near ``pi/2`` for members and near ``0`` otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import gadgets
from .core import LEFT_END, RIGHT_END, AfaMachine, AffineOperator, affinize, run, tensor_op
from .field import DEFAULT_PRECISION_BITS, NumericField, env_precision_bits
from .powereq import ALPHABET, DEFAULT_K, PowerEqMachine, blocks, build_powereq, t_sum

DEFAULT_GUARD = 4
DEFAULT_N_MAX = 3
BOUND = 0.98
# largest total angle error that still keeps the worst case above BOUND
ANGLE_MARGIN = math.acos(math.sqrt(BOUND)) - math.pi / 28
BUILTINS = ("empty", "full", "even")


class OracleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LanguageOracle:
    membership: Callable[[int], bool]
    source: str

    def __call__(self, i: int) -> bool:
        if i < 0:
            raise IndexError("string index must be non-negative")
        return bool(self.membership(i))

    def bits(self, count: int) -> str:
        return "".join("1" if self(i) else "0" for i in range(count))


def builtin_oracle(name: str) -> LanguageOracle:
    rules = {
        "empty": lambda i: False,
        "full": lambda i: True,
        "even": lambda i: i % 2 == 0,
    }
    if name not in rules:
        raise OracleError(f"unknown builtin language {name!r}; choose from {', '.join(BUILTINS)}")
    return LanguageOracle(rules[name], f"builtin:{name}")


def bits_oracle(bits, *, strict: bool = False, source: str | None = None) -> LanguageOracle:
    """Explicit membership bits; indices past the end are non-members unless ``strict``."""
    text = "".join(str(int(b)) for b in bits) if not isinstance(bits, str) else bits.strip()
    if set(text) - {"0", "1"}:
        raise OracleError("membership bits must be '0' or '1'")
    table = tuple(c == "1" for c in text)

    def member(i: int) -> bool:
        if i < len(table):
            return table[i]
        if strict:
            raise OracleError(f"membership of a^{i} is beyond the {len(table)} supplied bits")
        return False

    return LanguageOracle(member, source or f"bits:{text}")


def file_oracle(path, *, strict: bool = False) -> LanguageOracle:
    try:
        text = Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise OracleError(f"cannot read oracle file {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) > 1:
        raise OracleError(f"oracle file {path} must hold a single line of bits")
    return bits_oracle(lines[0] if lines else "", strict=strict, source=f"file:{path}")


def oracle_from_spec(spec: str, *, strict: bool = False) -> LanguageOracle:
    """``builtin:NAME``, ``bits:0101...`` or a path to a bit file."""
    if spec.startswith("builtin:"):
        return builtin_oracle(spec.split(":", 1)[1])
    if spec.startswith("bits:"):
        return bits_oracle(spec.split(":", 1)[1], strict=strict)
    return file_oracle(spec, strict=strict)


def f_sign(oracle: LanguageOracle, i: int) -> int:
    return 1 if oracle(i) else -1


@dataclass(frozen=True, eq=False)
class TruncatedAngle:
    value: object
    terms: int
    guard: int | None
    turns: Fraction
    field: NumericField

    def error_bound(self):
        """Distance to the untruncated angle is at most this many radians."""
        ctx = self.field.ctx
        return 2 * ctx.pi / (7 * ctx.mpf(8) ** (self.terms + 1))


def series_turns(oracle: LanguageOracle, start: int, stop: int, shift: int) -> Fraction:
    """sum_{i=start}^{stop-1} F(i) / 8^(i + shift) as an exact rational."""
    return sum((Fraction(f_sign(oracle, i), 8 ** (i + shift)) for i in range(start, stop)), Fraction(0))


def theta(oracle: LanguageOracle, terms: int, field: NumericField | None = None, guard: int | None = None) -> TruncatedAngle:
    if terms < 1:
        raise ValueError("need at least one series term")
    field = field or NumericField.high_precision()
    turns = series_turns(oracle, 0, terms, 2)
    return TruncatedAngle(2 * field.pi() * field(turns), terms, guard, turns, field)


def phi(oracle: LanguageOracle, j: int, terms: int, field: NumericField | None = None):
    """Angle after 8^(j+1) rotations by the truncated angle and a final pi/4."""
    if terms <= j:
        raise ValueError(f"need more than {j} terms to evaluate phi_{j}")
    field = field or NumericField.high_precision()
    quarter = Fraction(f_sign(oracle, j) + 1, 8)
    tail = series_turns(oracle, j + 1, terms, 1 - j)
    return 2 * field.pi() * field(quarter + tail)


def required_terms(n_max: int, guard: int) -> int:
    if n_max < 0 or guard < 1:
        raise ValueError("need n_max >= 0 and guard >= 1")
    return n_max + 1 + guard


def accumulated_error_bound(guard: int) -> float:
    """Angle error after the longest supported rotation run, in radians."""
    return 2 * math.pi / (7 * 8**guard)


def guard_is_safe(guard: int) -> bool:
    return accumulated_error_bound(guard) <= ANGLE_MARGIN


def required_float_bits(n_max: int) -> int:
    return 64 + 3 * (n_max + 2) * 3


def default_precision(n_max: int) -> int:
    return env_precision_bits() or max(DEFAULT_PRECISION_BITS, required_float_bits(n_max))


def collection_matrix(field: NumericField | None = None) -> AffineOperator:
    return AffineOperator.of(
        [
            [0, 0, 0, 1, 0],
            [1, 0, 0, 0, 0],
            [0, 1, 1, 0, 1],
            [0, 1, 1, 0, 1],
            [0, -1, -1, 0, -1],
        ],
        field,
    )


def build_rotation_machine(angle: TruncatedAngle) -> AfaMachine:
    """Five states: u (x) u for a point u on the unit circle, plus a balancing entry."""
    field = angle.field
    rot = gadgets.rotation(angle.value, field)
    step = affinize(tensor_op(rot, rot), field)
    quarter = gadgets.rotation(field.pi() / 4, field)
    finish = collection_matrix(field) @ affinize(tensor_op(quarter, quarter), field)
    ops = {
        "a": step,
        "b": AffineOperator.identity(5, field),
        # one extra rotation so member strings see exactly 8^(n+1) of them
        LEFT_END: step,
        RIGHT_END: finish,
    }
    return AfaMachine(ALPHABET, ops, initial=0, accepting={0}, field=field, name="rotation")


def _cast(op: AffineOperator, field: NumericField) -> AffineOperator:
    return AffineOperator(np.vectorize(field, otypes=[object])(op.matrix), field)


@lru_cache(maxsize=16)
def combine_operator(field: NumericField, outer: int = 20, inner: int = 5) -> AffineOperator:
    """Route (1, kT, -kT, 0..) (x) (s, c, 0, 0, 0) onto (s, c, kT(s+c), -kT(s+c), 0, ...)."""
    dim = outer * inner
    lin = np.zeros((dim - 1, dim - 1), dtype=object)
    lin[0, 0] = 1
    lin[1, 1] = 1
    for target, source in ((2, 1), (3, 2)):
        lin[target, source * inner] = 1
        lin[target, source * inner + 1] = 1
    return affinize(lin, field)


@lru_cache(maxsize=16)
def _powereq_in(k: int, field: NumericField):
    """The PowerEQ machine and its operators cast to ``field`` (shared across builds)."""
    pm = build_powereq(k)
    return pm, {sym: _cast(op, field) for sym, op in pm.machine.operators.items()}


@dataclass(frozen=True, eq=False)
class CombinedMachine:
    machine: AfaMachine
    k: int
    oracle: LanguageOracle
    n_max: int
    angle: TruncatedAngle
    powereq: PowerEqMachine
    rotation: AfaMachine

    @property
    def max_a_count(self) -> int:
        return 8 ** (self.n_max + 1)

    def check_input(self, word: str) -> None:
        if word.count("a") > self.max_a_count:
            raise ValueError("input exceeds configured n_max")

    def run(self, word: str, **kwargs):
        self.check_input(word)
        return run(self.machine, word, **kwargs)

    def predicted(self, word: str):
        return predicted_acceptance_combined(word, self.oracle, self.k, self.angle.terms, self.angle.field)


def build_combined(
    oracle: LanguageOracle,
    k: int = DEFAULT_K,
    n_max: int = DEFAULT_N_MAX,
    guard: int = DEFAULT_GUARD,
    precision_bits: int | None = None,
) -> CombinedMachine:
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if guard < 1:
        raise ValueError("guard must be at least 1")
    field = NumericField.high_precision(precision_bits or default_precision(n_max))
    pm, outer = _powereq_in(k, field)
    angle = theta(oracle, required_terms(n_max, guard), field, guard)
    rot = build_rotation_machine(angle)
    ops = {sym: tensor_op(outer[sym], rot.operators[sym]) for sym in pm.machine.symbols}
    ops[RIGHT_END] = combine_operator(field) @ ops[RIGHT_END]
    # (P (x) R) = (P (x) I)(I (x) R): two sparse passes instead of one dense one
    inner, outer_id = AffineOperator.identity(5, field), AffineOperator.identity(pm.machine.dim, field)
    factors = {"a": (tensor_op(outer["a"], inner), tensor_op(outer_id, rot.operators["a"]))}
    machine = AfaMachine(
        ALPHABET, ops, initial=0, accepting={0}, field=field,
        name=f"combined(k={k},n_max={n_max},guard={guard})", factors=factors,
    )
    return CombinedMachine(machine, pm.k, oracle, n_max, angle, pm, rot)


def final_turns(word: str, angle_turns: Fraction) -> Fraction:
    """Final angle of the rotation part in full turns, reduced to [0, 1)."""
    total = (word.count("a") + 1) * angle_turns + Fraction(1, 8)
    return total - math.floor(total)


def predicted_acceptance_combined(word: str, oracle: LanguageOracle, k: int, terms: int, field: NumericField | None = None):
    """sin^2(alpha) / (1 + 2 k T_x), alpha taken from the truncated series."""
    field = field or NumericField.high_precision()
    turns = series_turns(oracle, 0, terms, 2)
    alpha = 2 * field.pi() * field(final_turns(word, turns))
    return field.sin(alpha) ** 2 / (1 + 2 * k * t_sum(blocks(word)))
