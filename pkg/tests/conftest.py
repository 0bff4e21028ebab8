import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from corners_lab.arrays import InterlacingArray

settings.register_profile(
    "repo", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))


class FixedDraws:
    """Stream stub that hands out prescribed exponential / uniform values in order."""

    def __init__(self, exponentials=(), uniforms=(), normals=()):
        self.exp = list(exponentials)
        self.uni = list(uniforms)
        self.nor = list(normals)

    @staticmethod
    def _take(pool, size):
        shape = () if size is None else tuple(np.atleast_1d(size))
        n = int(np.prod(shape)) if shape else 1
        if len(pool) < n:
            raise AssertionError("stub ran out of draws")
        out = np.array([pool.pop(0) for _ in range(n)], dtype=float)
        return out.reshape(shape) if shape else out[0]

    def exponential(self, rate, size=None):
        return self._take(self.exp, size)

    def uniform(self, size=None):
        return self._take(self.uni, size)

    def standard_normal(self, size=None):
        return self._take(self.nor, size)


@pytest.fixture
def fixed_draws():
    return FixedDraws


def random_interlacing(depth, rng, tie_prob=0.2, scale=2.0):
    """A valid array built from the top level down, with occasional ties."""
    top = -np.sort(-np.round(rng.normal(0, scale, depth), 1))
    levels = [top]
    for k in range(depth - 1, 0, -1):
        above = levels[0]
        lo, hi = above[1:], above[:-1]
        cur = lo + rng.random(k) * (hi - lo)
        snap = rng.random(k) < tie_prob
        cur[snap] = lo[snap]
        levels.insert(0, cur)
    return InterlacingArray(tuple(levels))


# one line per acceptance criterion, printed at the end of the run whatever the capture mode
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
