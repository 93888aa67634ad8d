import json
import math
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from sglgap import meshgen
from sglgap.gap_bound import evaluate_mesh, evaluate_warped
from sglgap.radial_eig import WarpedSurface
from sglgap.spaceform import CurvaturePair

DATA = Path(__file__).parent / "data"

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def oracle():
    return json.loads((DATA / "oracles.json").read_text())


def warped_surface(K=-0.6):
    return WarpedSurface.polynomial([0, 1, 0, 0.1], 2.0, 0.0, K)


CORPUS_MESHES = {
    "square": lambda: meshgen.square(),
    "rect-1x2": lambda: meshgen.rectangle(1, 2),
    "ellipse-1.5": lambda: meshgen.ellipse(1.5, 1.0),
    "hpentagon": lambda: meshgen.hyperbolic_polygon(5, 1.0),
    "cap-0.6": lambda: meshgen.geodesic_disk(1.0, 0.6),
}


class _Pipelines:
    """Lazily evaluated, shared pipeline results (each domain runs once per session)."""

    def __init__(self):
        self._cache = {}

    def __getitem__(self, key):
        if key not in self._cache:
            if key == "warped":
                self._cache[key] = evaluate_warped(warped_surface(), 1.0)
            elif key == "disk":
                m = meshgen.disk()
                self._cache[key] = evaluate_mesh(m, 1.0, CurvaturePair(0.0, 0.0))
            else:
                m = CORPUS_MESHES[key]()
                self._cache[key] = evaluate_mesh(m, 1.0, CurvaturePair(m.k, m.k))
        return self._cache[key]


@pytest.fixture(scope="session")
def pipelines():
    return _Pipelines()


@pytest.fixture(scope="session")
def two_pi_sq():
    return 2 * math.pi**2


# ---------------------------------------------------------------------------
# acceptance criteria: one summary line per @pytest.mark.criterion test

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when == "teardown":
        return
    if rep.when == "call" or rep.failed:
        num, title = mark.args
        _CRITERIA[num] = (title, "PASS" if rep.passed else "FAIL", rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, status, secs = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:>2}  {status}  {title}  ({secs:.1f} s)")
