import functools

import pytest

from conewave.cones import compute_cone_projection, default_bump
from conewave.generators import preset
from conewave.grids import FrequencyGrid
from conewave.windows import frame_spectrum

# Regression constants; both agree with exact B-spline moment formulas to 1e-15.
C_PSI = {"a": 4.066185628022875, "b": 4.4373049965619185}

CORPUS_GRID = FrequencyGrid(256, 256, 24.0)
IDENTITY_GRID = FrequencyGrid(129, 129, 64.0)


@functools.lru_cache(maxsize=None)
def frame(name: str, grid: FrequencyGrid, tail_tol=1e-8):
    gen = preset(name)
    cones = compute_cone_projection(default_bump(gen.N), grid, tail_tol=tail_tol)
    return gen, cones, frame_spectrum(gen, cones)


@pytest.fixture(params=["a", "b"])
def name(request):
    return request.param


@pytest.fixture
def gen(name):
    return preset(name)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
