from fractions import Fraction

import pytest

from afasim.field import NumericField, env_precision_bits, to_fraction


def test_exact_field_refuses_binary_floats(exact):
    with pytest.raises(TypeError):
        exact(0.1)
    assert exact("1/3") == Fraction(1, 3)


def test_float_field_needs_enough_bits():
    with pytest.raises(ValueError):
        NumericField.high_precision(32)
    with pytest.raises(ValueError):
        NumericField("exact", 64)
    with pytest.raises(ValueError):
        NumericField("decimal")


def test_contexts_do_not_leak_precision():
    lo, hi = NumericField.high_precision(64), NumericField.high_precision(256)
    third_lo, third_hi = lo(Fraction(1, 3)), hi(Fraction(1, 3))
    assert abs(to_fraction(third_hi) - Fraction(1, 3)) < Fraction(1, 2**255)
    assert abs(to_fraction(third_lo) - Fraction(1, 3)) > Fraction(1, 2**80)


def test_tolerance(exact, f128):
    assert exact.tolerance == 0
    assert to_fraction(f128.tolerance) == Fraction(1, 2**64)


def test_to_fraction_roundtrip(f128):
    for x in (0, 1, -3, Fraction(-5, 8)):
        assert to_fraction(f128(x)) == Fraction(x)
    assert to_fraction(f128(-0.75)) == Fraction(-3, 4)
    with pytest.raises(TypeError):
        to_fraction(0.5)


def test_env_precision(monkeypatch):
    monkeypatch.delenv("AFA_PRECISION_BITS", raising=False)
    assert env_precision_bits() is None
    monkeypatch.setenv("AFA_PRECISION_BITS", "200")
    assert env_precision_bits() == 200
    monkeypatch.setenv("AFA_PRECISION_BITS", "16")
    with pytest.raises(ValueError):
        env_precision_bits()
