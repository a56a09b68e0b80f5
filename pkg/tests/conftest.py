from __future__ import annotations

import pytest

from afasim.field import NumericField


@pytest.fixture(scope="session")
def exact():
    return NumericField.exact()


@pytest.fixture(scope="session")
def f128():
    return NumericField.high_precision(128)
