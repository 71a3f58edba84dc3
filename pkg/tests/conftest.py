import math

import numpy as np
import pytest
from hypothesis import strategies as st

REFERENCE_AXIS = (0.5, 0.5, 1 / math.sqrt(2))

_criteria: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _criteria.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criteria, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def pure_state_oracle(bit, axis):
    """|psi><psi| built from spherical angles, independent of the Pauli expansion."""
    x, y, z = axis
    theta = math.atan2(math.hypot(x, y), z)
    phi = math.atan2(y, x)
    if bit == 0:
        theta, phi = math.pi - theta, phi + math.pi
    psi = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
    return np.outer(psi, psi.conj())


@st.composite
def unit_vectors(draw):
    v = draw(
        st.tuples(*[st.floats(-1, 1, allow_nan=False) for _ in range(3)]).filter(
            lambda t: 0.1 < math.sqrt(sum(c * c for c in t))
        )
    )
    n = math.sqrt(sum(c * c for c in v))
    return tuple(c / n for c in v)


bits = st.integers(0, 1)
