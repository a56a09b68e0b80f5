from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afasim.core import run, run_reference
from afasim.powereq import (
    LAYOUT,
    blocks,
    build_powereq,
    is_member,
    member_string,
    predicted_acceptance_powereq,
    t_sum,
)
from afasim.strings import parse_rle


@pytest.fixture(scope="module")
def m25():
    return build_powereq(25).machine


def test_blocks_and_t_sum():
    assert blocks(parse_rle("a^7 b a^56")).counts == (7, 56)
    assert blocks("").counts == (0,)
    assert blocks("b").counts == (0, 0)
    assert t_sum(blocks(member_string(2))) == 0
    assert t_sum(blocks("a" * 8)) == 1
    assert t_sum(blocks(parse_rle("a^7 b a^57"))) == 1
    with pytest.raises(ValueError):
        blocks("abc")


def test_membership():
    assert is_member("a" * 7)
    assert not is_member(parse_rle("a^7 b a^55"))
    assert not is_member("")
    assert member_string(1) == parse_rle("a^7 b a^56")
    assert member_string(2).count("a") == 8**3 - 1
    with pytest.raises(ValueError):
        member_string(7)
    with pytest.raises(ValueError):
        member_string(-1)


def test_predicted():
    assert predicted_acceptance_powereq(member_string(3), 9) == 1
    assert predicted_acceptance_powereq("a" * 8, 25) == Fraction(1, 51)
    assert predicted_acceptance_powereq("a" * 9, 25) == Fraction(1, 201)


def test_layout(m25):
    assert m25.dim == LAYOUT.dim == 20
    LAYOUT.check()


def test_bad_k():
    for k in (1, 0, 2.5):
        with pytest.raises(ValueError):
            build_powereq(k)


@pytest.mark.parametrize("n", range(4))
def test_members_accepted(m25, n):
    assert run(m25, member_string(n)).accept_probability == 1


def test_small_non_members():
    assert run(build_powereq(25).machine, "a" * 8).accept_probability == Fraction(1, 51)
    assert run(build_powereq(2).machine, parse_rle("a^7 b a^57")).accept_probability == Fraction(1, 5)


def test_final_vector_shape(m25):
    """Final vector is (1, kT, -kT, 0, ..., 0)."""
    v = run(m25, "a" * 9).final_vector.tolist()
    assert v[:3] == [1, 100, -100] and not any(v[3:])


def test_reference_engine_matches(m25):
    for w in ["", "b", "ab", "aaaaaaab", "a" * 7 + "b" + "a" * 50 + "bb"]:
        assert run_reference(m25, w).accept_probability == run(m25, w).accept_probability


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 70), min_size=1, max_size=4), st.sampled_from([2, 3, 25]))
def test_matches_closed_form(counts, k):
    word = "b".join("a" * c for c in counts)
    m = build_powereq(k).machine
    assert run(m, word).accept_probability == predicted_acceptance_powereq(word, k)
