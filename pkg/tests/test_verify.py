import random

from afasim.powereq import blocks, is_member, t_sum
from afasim.verify import all_words, random_mutant, verify_invariants, verify_powereq


def test_all_words():
    words = list(all_words(3))
    assert len(words) == 15 and len(set(words)) == 15


def test_random_mutants_are_non_members():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(0, 3)
        word, spec = random_mutant(n, rng, max_a=8 ** 4)
        assert not is_member(word), spec
        assert word.count("a") <= 8 ** 4
        assert t_sum(blocks(word)) >= 1


def test_powereq_suite_small():
    result = verify_powereq(ks=(2, 5), exhaustive_len=5, random_count=10, max_len=40)
    assert result.passed and result.max_delta == 0


def test_invariants_suite():
    result = verify_invariants(precision_bits=96)
    assert result.passed, result.failures
