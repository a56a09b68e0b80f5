import math
from fractions import Fraction

import pytest

from afasim.core import apply, run
from afasim.encoding import (
    ANGLE_MARGIN,
    OracleError,
    accumulated_error_bound,
    bits_oracle,
    build_combined,
    build_rotation_machine,
    builtin_oracle,
    collection_matrix,
    combine_operator,
    f_sign,
    file_oracle,
    guard_is_safe,
    oracle_from_spec,
    phi,
    predicted_acceptance_combined,
    required_float_bits,
    required_terms,
    theta,
    TruncatedAngle,
)
from afasim.field import NumericField
from afasim.powereq import member_string


@pytest.fixture(scope="module")
def demo():
    return build_combined(bits_oracle("101100111010"))


def test_oracles(tmp_path):
    assert f_sign(builtin_oracle("full"), 9) == 1
    assert f_sign(builtin_oracle("empty"), 9) == -1
    assert f_sign(bits_oracle("101"), 1) == -1
    assert builtin_oracle("even").bits(5) == "10101"
    assert bits_oracle([1, 0, 1]).bits(5) == "10100"
    with pytest.raises(OracleError):
        bits_oracle("10x")
    with pytest.raises(OracleError):
        bits_oracle("10", strict=True)(2)
    with pytest.raises(OracleError):
        builtin_oracle("odd")
    with pytest.raises(IndexError):
        builtin_oracle("full")(-1)

    path = tmp_path / "lang.bits"
    path.write_text("0110\n")
    assert file_oracle(path).bits(6) == "011000"
    assert oracle_from_spec(str(path)).bits(3) == "011"
    assert oracle_from_spec("bits:11").bits(3) == "110"
    assert oracle_from_spec("builtin:empty").bits(2) == "00"
    path.write_text("01\n10\n")
    with pytest.raises(OracleError):
        file_oracle(path)
    with pytest.raises(OracleError):
        file_oracle(tmp_path / "missing.bits")


def test_theta_limits(f128):
    empty, full = builtin_oracle("empty"), builtin_oracle("full")
    assert abs(theta(empty, 60, f128).value + f128.pi() / 28) < 1e-35
    assert abs(theta(full, 60, f128).value - f128.pi() / 28) < 1e-35
    one = theta(bits_oracle("0"), 1, f128)
    assert one.turns == Fraction(-1, 64)
    assert abs(one.value + 2 * f128.pi() / 64) < 1e-37
    with pytest.raises(ValueError):
        theta(full, 0)


def test_phi_examples(f128):
    lone = bits_oracle("0001")
    p = phi(lone, 3, 60, f128)
    assert abs(p - (f128.pi() / 2 - f128.pi() / 28)) < 1e-30
    assert abs(f128.sin(p) ** 2 - 0.98746) < 1e-5
    p0 = phi(builtin_oracle("empty"), 2, 60, f128)
    assert abs(f128.cos(p0) ** 2 - 0.98746) < 1e-5
    with pytest.raises(ValueError):
        phi(lone, 3, 3, f128)


def test_truncation_helpers():
    assert required_terms(3, 4) == 8 and required_terms(0, 4) == 5
    assert math.isclose(accumulated_error_bound(4), 2 * math.pi / (7 * 4096))
    assert guard_is_safe(4) and not guard_is_safe(1)
    assert 0 < ANGLE_MARGIN < 0.05
    assert required_float_bits(3) == 64 + 45
    with pytest.raises(ValueError):
        required_terms(-1, 4)


def test_truncated_angle_error_bound(f128):
    oracle = bits_oracle("110100101")
    short, long = theta(oracle, 6, f128), theta(oracle, 80, f128)
    assert isinstance(short, TruncatedAngle)
    assert abs(short.value - long.value) <= short.error_bound()


def test_collection_matrix(f128):
    c = collection_matrix()
    assert c.max_column_deviation() == 0
    assert list(apply(c, [1, 0, 0, 0, 0])) == [0, 1, 0, 0, 0]
    assert list(apply(c, [0, 0, 0, 1, 0])) == [1, 0, 0, 0, 0]
    h = Fraction(1, 2)
    assert list(apply(c, [h, h, h, h, -1])) == [h, h, 0, 0, 0]
    for alpha in (0.3, 1.1, 2.9):
        a = f128(alpha)
        cs, s2, c2 = f128.cos(a) * f128.sin(a), f128.sin(a) ** 2, f128.cos(a) ** 2
        out = apply(collection_matrix(f128), [c2, cs, cs, s2, -2 * cs])
        assert max(abs(x) for x in out[2:]) < 1e-35
        assert abs(out[0] - s2) < 1e-35 and abs(out[1] - c2) < 1e-35


def test_rotation_machine_zero_angle(f128):
    zero = TruncatedAngle(f128(0), 1, None, Fraction(0), f128)
    res = run(build_rotation_machine(zero), "")
    v = res.final_vector.tolist()
    assert all(abs(x - y) < 1e-35 for x, y in zip(v, [0.5, 0.5, 0, 0, 0]))
    assert abs(res.accept_probability - 0.5) < 1e-35


def test_combine_operator_routing(f128):
    op = combine_operator(f128)
    assert op.dim == 100 and op.max_column_deviation() <= f128.tolerance


def test_combined_members(demo):
    for n in range(4):
        word = member_string(n)
        p = demo.run(word).accept_probability
        assert abs(p - demo.predicted(word)) < 1e-30
        if demo.oracle(n):
            assert p >= 0.98
        else:
            assert 1 - p >= 0.98


def test_combined_final_vector(demo):
    v = demo.run("a" * 8).final_vector.tolist()
    s2 = demo.predicted("a" * 8) * 51
    assert abs(v[0] - s2) < 1e-30
    assert abs(v[2] - 25) < 1e-30 and abs(v[3] + 25) < 1e-30
    assert max(abs(x) for x in v[4:]) < 1e-30


def test_combined_non_member_bound(demo):
    for word in ["a" * 8, "a" * 7 + "b" + "a" * 57, "ab"]:
        p = demo.run(word).accept_probability
        assert 1 - p >= Fraction(50, 51) - 1e-30


def test_input_limit(demo):
    with pytest.raises(ValueError, match="exceeds configured n_max"):
        demo.run("a" * (8**4 + 1))


def test_build_validation():
    with pytest.raises(ValueError):
        build_combined(builtin_oracle("full"), n_max=-1)
    with pytest.raises(ValueError):
        build_combined(builtin_oracle("full"), guard=0)
    with pytest.raises(ValueError):
        build_combined(builtin_oracle("full"), k=1)


def test_predicted_closed_form(f128):
    full = builtin_oracle("full")
    p = predicted_acceptance_combined(member_string(0), full, 25, 8, f128)
    assert p >= 0.98
    half = predicted_acceptance_combined("a" * 8, full, 25, 8, f128) * 51
    assert 0 < half < 1


def test_precision_env(monkeypatch):
    monkeypatch.setenv("AFA_PRECISION_BITS", "160")
    cm = build_combined(builtin_oracle("full"), n_max=0)
    assert cm.machine.field == NumericField.high_precision(160)


def test_factored_operator_matches_product(demo):
    left, right = demo.machine.factors["a"]
    product = (left @ right).matrix
    target = demo.machine.operators["a"].matrix
    assert max(abs(x - y) for x, y in zip(product.flat, target.flat)) < 1e-36
    assert len(demo.machine.program.encode("aab")) == 1 + 2 * 2 + 1 + 1
