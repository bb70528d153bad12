import itertools

import numpy as np
import pytest

from regretopt import AugmentedSpace, SystemSpec, matching_pennies, random_system


def reference_operator(spec, k, J, discount=None):
    """Loop-by-loop min-max backup, written independently of the vectorized operator."""
    g = spec.gamma if discount is None else discount
    nS, nA, nW = spec.shape
    f, r = spec.transition, spec.reward
    space = AugmentedSpace.of(spec, k)
    out = np.empty(space.size)
    for idx in range(space.size):
        s_c, s_l, window = space.decode(idx)
        best = np.inf
        for a_c in range(nA):
            worst = -np.inf
            for w, a_l in itertools.product(range(nW), range(nA)):
                rho = r[s_l, a_l, window[0]] - g**k * r[s_c, a_c, w]
                nxt = space.index(f[s_c, a_c, w], f[s_l, a_l, window[0]], window[1:] + (w,))
                worst = max(worst, rho + g * J[nxt])
            best = min(best, worst)
        out[idx] = best
    return out


@pytest.fixture
def pennies():
    return matching_pennies(0.5)


@pytest.fixture
def small_system():
    return random_system(3, 2, 2, gamma=0.9, rng=7)


@pytest.fixture
def zero_system():
    return SystemSpec(np.zeros((2, 2, 2), dtype=int), np.zeros((2, 2, 2)), 0.9)


@pytest.fixture
def single_state():
    return SystemSpec(np.zeros((1, 1, 1), dtype=int), np.zeros((1, 1, 1)), 0.9)


# acceptance results, printed once at the end of the run
ACCEPTANCE: dict[int, str] = {}


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
