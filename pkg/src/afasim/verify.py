"""Oracle-equivalence and invariant suites behind ``afasim verify``."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .core import run
from .encoding import bits_oracle, build_combined
from .powereq import build_powereq, member_string, predicted_acceptance_powereq
from .strings import mutate


@dataclass
class Case:
    label: str
    delta: float
    passed: bool
    note: str = ""


@dataclass
class SuiteResult:
    name: str
    cases: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return [c for c in self.cases if not c.passed]

    @property
    def passed(self) -> bool:
        return bool(self.cases) and not self.failures

    @property
    def max_delta(self) -> float:
        return max((c.delta for c in self.cases), default=0.0)

    def add(self, label: str, delta, passed: bool, note: str = "") -> None:
        self.cases.append(Case(label, float(delta), bool(passed), note))


def all_words(max_len: int, alphabet: str = "ab") -> Iterator[str]:
    for n in range(max_len + 1):
        for letters in itertools.product(alphabet, repeat=n):
            yield "".join(letters)


def random_words(count: int, max_len: int, rng: random.Random, alphabet: str = "ab") -> list[str]:
    return ["".join(rng.choice(alphabet) for _ in range(rng.randint(0, max_len))) for _ in range(count)]


def random_mutant(n: int, rng: random.Random, max_a: int | None = None) -> tuple[str, str]:
    """A non-member derived from ``member_string(n)`` by one random edit.

    Growth is capped so the result has at most ``max_a`` a's.
    """
    base = member_string(n)
    room = 3 if max_a is None else min(3, max_a - base.count("a"))
    kinds = ["grow"] if room > 0 else []
    kinds += ["shrink", "delb", "insb"] if n else ["shrink", "insb"]
    kind = rng.choice(kinds)
    j = rng.randint(0, n)
    size = 7 * 8**j
    if kind == "grow":
        spec = f"block{j}+{rng.randint(1, room)}"
    elif kind == "shrink":
        spec = f"block{j}-{rng.randint(1, 3)}"
    elif kind == "delb":
        spec = f"delb{rng.randint(1, n)}"
    else:
        spec = f"insb{j}@{rng.randint(0, size)}"
    return mutate(base, spec), spec


def verify_powereq(ks=(2, 10, 25), exhaustive_len: int = 14, random_count: int = 500,
                   max_len: int = 600, seed: int = 0) -> SuiteResult:
    result = SuiteResult("powereq")
    rng = random.Random(seed)
    words = list(all_words(exhaustive_len)) + random_words(random_count, max_len, rng)
    for k in ks:
        machine = build_powereq(k).machine
        for w in words:
            got = run(machine, w).accept_probability
            want = predicted_acceptance_powereq(w, k)
            if got != want:
                result.add(f"k={k} len={len(w)} {w[:40]}", abs(got - want), False, f"{got} != {want}")
        result.add(f"k={k} ({len(words)} strings)", 0, not result.failures)
    return result


def combined_outcome(cm, word: str) -> tuple:
    """(simulated acceptance, closed form, worst entry-sum deviation)."""
    res = cm.run(word)
    return res.accept_probability, cm.predicted(word), res.max_sum_deviation


def verify_combined(oracles: int = 200, bits: int = 12, k: int = 25, n_max: int = 3, guard: int = 4,
                    precision_bits: int = 128, tolerance: float = 1e-9, seed: int = 0,
                    report: Callable[[Case], None] | None = None) -> SuiteResult:
    """Simulator against the closed form on member strings and one mutant per oracle.

    Only the first ``n_max + 1 + guard`` bits of an oracle reach the machine, so
    machines and run results are shared between oracles that agree on them.
    """
    result = SuiteResult("combined")
    rng = random.Random(seed)
    cache = {}
    outcomes = {}
    for index in range(oracles):
        oracle = bits_oracle("".join(rng.choice("01") for _ in range(bits)))
        terms = n_max + 1 + guard
        key = oracle.bits(terms)
        if key not in cache:
            cache[key] = build_combined(oracle, k, n_max, guard, precision_bits)
        cm = cache[key]
        inputs = [(f"member{n}", member_string(n)) for n in range(n_max + 1)]
        n = rng.randint(0, n_max)
        word, spec = random_mutant(n, rng, cm.max_a_count)
        inputs.append((f"member{n}:{spec}", word))
        for tag, word in inputs:
            if (key, word) not in outcomes:
                outcomes[key, word] = combined_outcome(cm, word)
            got, want, dev = outcomes[key, word]
            delta = abs(got - want)
            result.add(f"oracle{index} {tag}", delta, delta <= tolerance and dev <= cm.machine.field.tolerance)
            if report:
                report(result.cases[-1])
    return result


def verify_invariants(precision_bits: int = 128, k: int = 25, seed: int = 0) -> SuiteResult:
    """Column sums of every operator and entry sums along traced runs."""
    result = SuiteResult("invariants")
    rng = random.Random(seed)
    pm = build_powereq(k)
    cm = build_combined(bits_oracle("".join(rng.choice("01") for _ in range(12))), k,
                        precision_bits=precision_bits)
    for machine in (pm.machine, cm.rotation, cm.machine):
        tol = machine.field.tolerance
        for sym, op in machine.operators.items():
            dev = op.max_column_deviation()
            result.add(f"{machine.name} column sums {sym}", dev, dev <= tol)
    words = [member_string(n) for n in range(3)] + random_words(20, 80, rng)
    for machine in (pm.machine, cm.machine):
        tol = machine.field.tolerance
        for w in words:
            res = run(machine, w, trace=len(w) < 100)
            worst = res.max_sum_deviation
            if res.trace:
                worst = max(worst, max(v.deviation() for v in res.trace))
            result.add(f"{machine.name} entry sums len={len(w)}", worst, worst <= tol)
    return result
